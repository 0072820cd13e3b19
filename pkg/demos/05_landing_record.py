"""
End to end: four inputs, one output, a short record
===================================================

Synthesize a 137 s record (274 samples at 0.5 s) of four coupled inputs
acting on one output, write it to CSV, and identify the x1 -> y channel
from the CSV alone. The same steps are available from the shell:

    apident synth --config demos/05_landing_record.json --seed 7 --out rec.csv --manifest truth.json
    apident identify --input rec.csv --inputs x1,x2,x3,x4 --output y --channel x1:y
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from apident import load_csv, report_json, run_identification, synth_command

here = Path(__file__).parent
cfg = json.loads((here / "05_landing_record.json").read_text())

with tempfile.TemporaryDirectory() as tmp:
    csv_path = Path(tmp) / "record.csv"
    _, manifest = synth_command(cfg, 7, csv_path, Path(tmp) / "truth.json")
    data = load_csv(csv_path)

print(f"{data.n} samples of {', '.join(data.channels)}; "
      f"duration {data.duration:g} s")
truth = manifest["outputs"]["y"]["channels"]["x1"]
print("true x1 -> y:", truth)

report = run_identification(data, ["x1", "x2", "x3", "x4"], "y", channel="x1")
print(f"\ndelta = {report.delta:.5f} rad/s")
print("x1 frequencies kept after removing shared ones:", np.round(report.independent_set.freqs, 4))
print("matched with y:", np.round(report.matched_frequencies, 4))
print(f"p_a={report.p_a}, order={report.order}, coefficients={np.round(report.coefficients, 9)}")
for w in report.warnings:
    print("warning:", w)

print("\nJSON report (first lines):")
print("\n".join(report_json(report).splitlines()[:12]))
