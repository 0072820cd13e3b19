import json

import numpy as np
import pytest

from apident import (
    Dataset,
    EmptyMatchedSet,
    IdentifyConfig,
    NonNumericCell,
    NonUniformSampling,
    RaggedColumns,
    ReportError,
    load_csv,
    report_json,
    resolution,
    run_identification,
    synth_command,
    synthesize_dataset,
    write_csv,
    write_report,
)
from apident.cli import main

from helpers import random_model, rel_err

DT, N = 0.1, 1024
DELTA = resolution(DT * N)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_basic(tmp_path):
    ds = load_csv(write(tmp_path, "t,x1,y\n0,1,0\n0.5,2,1\n"))
    assert ds.dt == 0.5
    assert ds.channels["x1"].tolist() == [1.0, 2.0]
    assert ds.channels["y"].tolist() == [0.0, 1.0]


def test_load_csv_errors(tmp_path):
    with pytest.raises(NonUniformSampling, match="row 3"):
        load_csv(write(tmp_path, "t,x\n0,1\n0.5,1\n1.1,1\n"))
    with pytest.raises(RaggedColumns, match="row 2"):
        load_csv(write(tmp_path, "t,x\n0,1\n0.5\n"))
    with pytest.raises(NonNumericCell, match="column 'x'"):
        load_csv(write(tmp_path, "t,x\n0,1\n0.5,abc\n"))
    with pytest.raises(RaggedColumns):
        load_csv(write(tmp_path, "time,x\n0,1\n0.5,1\n"))
    with pytest.raises(RaggedColumns):
        load_csv(write(tmp_path, "t,x,x\n0,1,1\n0.5,1,1\n"))


def test_load_csv_long_record_shape(tmp_path):
    rows = ["t,x1,x2,x3,x4,y"] + [f"{0.5 * i:g},1,2,3,4,5" for i in range(274)]
    ds = load_csv(write(tmp_path, "\n".join(rows) + "\n"))
    assert ds.n == 274 and ds.dt == 0.5 and ds.duration == 137.0


def _single_channel_config(model=None, seed=0, **extra):
    cfg = {
        "dt": DT, "n": N,
        "inputs": [{"name": "x1", "random": {"count": 10, "omega_min": 100 * DELTA,
                                              "omega_max": 200 * DELTA, "commensurate": True}}],
        "outputs": [],
    }
    if model is not None:
        cfg["outputs"] = [{"name": "y", "channels": {"x1": {"p_a": model.p_a,
                                                            "coefficients": list(model.coefficients)}}}]
    cfg.update(extra)
    return cfg


def _true_model(p_a, order, seed):
    ds, man = synthesize_dataset(_single_channel_config(), seed)
    w = np.array(man["inputs"]["x1"]["private_frequencies"])
    return random_model(np.random.default_rng(seed + 1000), p_a, order, w, max_range=20)


@pytest.mark.parametrize("p_a,order", [(0, 2), (1, 3), (2, 1)])
def test_run_identification_noiseless(p_a, order):
    model = _true_model(p_a, order, seed=p_a)
    ds, man = synthesize_dataset(_single_channel_config(model), seed=p_a)
    rep = run_identification(ds, ["x1"], "y")
    assert rep.p_a == p_a and rep.order == order
    assert rel_err(rep.coefficients, model.coefficients) < 1e-6
    assert len(rep.matched_frequencies) == 10


def test_run_identification_does_not_mutate_dataset():
    model = _true_model(0, 1, seed=0)
    ds, _ = synthesize_dataset(_single_channel_config(model), seed=0)
    before = {k: v.copy() for k, v in ds.channels.items()}
    run_identification(ds, ["x1"], "y")
    assert all(np.array_equal(before[k], ds.channels[k]) for k in before)


def test_empty_matched_set():
    cfg = {
        "dt": DT, "n": N,
        "inputs": [{"name": "x1", "harmonics": [[100 * DELTA, 1, 0], [120 * DELTA, 0, 1]]}],
        "outputs": [{"name": "y", "channels": {},
                     "noise": {"additive": {"harmonics": [[150 * DELTA, 1, 0], [170 * DELTA, 1, 1]]}}}],
    }
    ds, _ = synthesize_dataset(cfg, 0)
    with pytest.raises(EmptyMatchedSet) as info:
        run_identification(ds, ["x1"], "y")
    assert info.value.stage == "separation"


def test_coupled_inputs_exclude_coupling_frequency():
    m1 = {"p_a": 0, "coefficients": [1.0, -0.05]}
    m2 = {"p_a": 0, "coefficients": [2.0, -0.01]}
    cfg = {
        "dt": DT, "n": N,
        "inputs": [
            {"name": "x1", "harmonics": [[100 * DELTA, 1, 0], [110 * DELTA, 0.5, 0.5], [125 * DELTA, 0, 1]]},
            {"name": "x2", "harmonics": [[140 * DELTA, 1, 0], [160 * DELTA, 0.8, 0.1]]},
        ],
        "couplings": [{"inputs": ["x1", "x2"], "harmonics": [[118 * DELTA, 0.7, -0.4]]}],
        "outputs": [{"name": "y", "channels": {"x1": m1, "x2": m2}}],
    }
    ds, man = synthesize_dataset(cfg, 0)
    rep = run_identification(ds, ["x1", "x2"], "y", "x1", config=IdentifyConfig(p_a=0))
    f12 = man["coupling_frequencies"][0]
    assert all(abs(w - f12) > DELTA for w in rep.matched_frequencies)
    # the coupling frequency was seen in the raw input set and removed
    assert any(abs(w - f12) < DELTA for w in rep.input_sets["x1"].freqs)
    np.testing.assert_allclose(rep.matched_frequencies, [100 * DELTA, 110 * DELTA, 125 * DELTA], rtol=1e-9)
    np.testing.assert_allclose(rep.coefficients, m1["coefficients"], rtol=1e-6)
    assert any("discarded" in w for w in rep.warnings)


def test_order_cap_warning():
    model = _true_model(0, 1, seed=2)
    cfg = _single_channel_config(model)
    cfg["inputs"][0]["random"]["count"] = 3
    ds, _ = synthesize_dataset(cfg, 2)
    rep = run_identification(ds, ["x1"], "y", config=IdentifyConfig(p_a=0))
    assert rep.trial_orders[-1] == 5
    assert any("cap lowered" in w for w in rep.warnings)


def test_report_schema_and_round_trip(tmp_path):
    model = _true_model(1, 2, seed=1)
    ds, _ = synthesize_dataset(_single_channel_config(model), seed=1)
    rep = run_identification(ds, ["x1"], "y")
    path = tmp_path / "r.json"
    write_report(rep, path)
    data = json.loads(path.read_text())
    assert list(data)[:11] == ["channel", "delta", "matched_frequencies", "exponents", "W_lowest", "p_a",
                               "order", "coefficients", "residuals", "conditions", "warnings"]
    assert data["p_a"] == 1 and len(data["coefficients"]) == data["order"] + 1
    assert set(data["exponents"][0]) == {"omega", "s_in", "s_out"}
    # 12 significant digits
    assert data["coefficients"][0] == float(f"{rep.coefficients[0]:.12g}")
    write_report(rep, tmp_path / "r2.json")
    assert json.loads((tmp_path / "r2.json").read_text()) == data
    assert (tmp_path / "r2.json").read_bytes() == path.read_bytes()


def test_report_rejects_nan():
    model = _true_model(0, 1, seed=0)
    ds, _ = synthesize_dataset(_single_channel_config(model), seed=0)
    rep = run_identification(ds, ["x1"], "y")
    rep.coefficients[0] = float("nan")
    with pytest.raises(ReportError):
        report_json(rep)


def test_end_to_end_determinism():
    model = _true_model(2, 2, seed=4)
    ds, _ = synthesize_dataset(_single_channel_config(model), seed=4)
    assert report_json(run_identification(ds, ["x1"], "y")) == report_json(run_identification(ds, ["x1"], "y"))


def test_synth_identity_channel_copies_input():
    cfg = {"dt": 0.5, "n": 64,
           "inputs": [{"name": "x", "harmonics": [[0.5, 1.0, 0.2], [1.3, 0.0, 0.7]]}],
           "outputs": [{"name": "y", "channels": {"x": {"p_a": 0, "coefficients": [1.0]}}}]}
    ds, _ = synthesize_dataset(cfg, 0)
    np.testing.assert_array_equal(ds.channels["y"], ds.channels["x"])


def test_synth_seeded_files_byte_identical(tmp_path):
    cfg = _single_channel_config(_true_model(0, 2, seed=3))
    cfg["outputs"][0]["noise"] = {"additive": {"random": {"count": 4, "omega_min": 100 * DELTA,
                                                         "omega_max": 300 * DELTA}}}
    a = synth_command(cfg, 11, tmp_path / "a.csv", tmp_path / "a.json")
    synth_command(cfg, 11, tmp_path / "b.csv", tmp_path / "b.json")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    # load(write(...)) reproduces the in-memory dataset
    assert load_csv(tmp_path / "a.csv").equals(a[0])
    c = synth_command(cfg, 12, tmp_path / "c.csv", tmp_path / "c.json")
    assert not c[0].equals(a[0])


def test_synth_random_gap():
    cfg = {"dt": 0.5, "n": 274,
           "inputs": [{"name": f"x{k}", "random": {"count": 6, "omega_min": 0.2, "omega_max": 6.0}}
                      for k in range(4)],
           "outputs": []}
    _, man = synthesize_dataset(cfg, 5)
    ws = np.sort(np.concatenate([v["private_frequencies"] for v in man["inputs"].values()]))
    assert np.min(np.diff(ws)) > 3 * man["delta"]


def test_write_csv_round_trip(tmp_path):
    ds = Dataset(0.25, {"a": [0.1, 0.2, 0.30000000000000004], "b": [1, 2, 3]}, t0=1.0)
    write_csv(ds, tmp_path / "x.csv")
    back = load_csv(tmp_path / "x.csv")
    assert back.dt == 0.25 and back.t0 == 1.0
    np.testing.assert_allclose(back.channels["a"], [0.1, 0.2, 0.3], rtol=1e-12)


# --- command line ----------------------------------------------------------


@pytest.fixture
def synth_files(tmp_path):
    model = _true_model(1, 2, seed=1)
    cfg = _single_channel_config(model)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main(["synth", "--config", str(cfg_path), "--seed", "1",
               "--out", str(tmp_path / "d.csv"), "--manifest", str(tmp_path / "m.json")])
    assert rc == 0
    return tmp_path, model


def test_cli_identify(synth_files):
    tmp_path, model = synth_files
    rc = main(["identify", "--input", str(tmp_path / "d.csv"), "--inputs", "x1", "--output", "y",
               "--channel", "x1:y", "--report", str(tmp_path / "r.json")])
    assert rc == 0
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["p_a"] == 1 and data["order"] == 2
    assert rel_err(data["coefficients"], model.coefficients) < 1e-6
    manifest = json.loads((tmp_path / "m.json").read_text())
    assert manifest["outputs"]["y"]["channels"]["x1"]["p_a"] == 1


def test_cli_identify_stdout(synth_files, capsys):
    tmp_path, _ = synth_files
    assert main(["identify", "--input", str(tmp_path / "d.csv"), "--inputs", "x1", "--output", "y"]) == 0
    assert json.loads(capsys.readouterr().out)["channel"] == "x1:y"


def test_cli_method_error_exit_code(synth_files):
    tmp_path, _ = synth_files
    rc = main(["identify", "--input", str(tmp_path / "d.csv"), "--inputs", "x1", "--output", "y",
               "--consistency-tol", "1e-30", "--report", str(tmp_path / "r.json")])
    assert rc == 2
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["coefficients"] is None and data["residuals"]


def test_cli_io_error_exit_code(tmp_path):
    assert main(["identify", "--input", str(tmp_path / "missing.csv"), "--inputs", "x", "--output", "y"]) == 1
    bad = write(tmp_path, "t,x,y\n0,1,1\n1,a,2\n")
    assert main(["identify", "--input", str(bad), "--inputs", "x", "--output", "y"]) == 1
    ok = write(tmp_path, "t,x,y\n0,1,1\n1,2,2\n2,1,1\n", "ok.csv")
    assert main(["identify", "--input", str(ok), "--inputs", "x", "--output", "nope"]) == 1


def test_cli_grid_option(synth_files):
    tmp_path, _ = synth_files
    rc = main(["identify", "--input", str(tmp_path / "d.csv"), "--inputs", "x1", "--output", "y",
               "--grid", f"{50 * DELTA}:{250 * DELTA}:{DELTA / 8}", "--report", str(tmp_path / "g.json")])
    assert rc == 0
    cfg = json.loads((tmp_path / "g.json").read_text())["config"]["grid"]
    assert cfg["omega_min"] == pytest.approx(50 * DELTA)
