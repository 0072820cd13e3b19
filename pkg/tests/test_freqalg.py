import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apident import (
    CouplingSpec,
    FrequencySet,
    discard_shared,
    estimate_frequencies,
    intersect,
    make_coupled_inputs,
    merge_close,
    resolution,
    synthesize,
)

from helpers import commensurate_freqs, random_signal


def test_resolution_examples():
    assert resolution(2 * np.pi) == 1.0
    # 274 samples at 0.5 s
    assert resolution(274 * 0.5) == pytest.approx(0.045863, abs=5e-6)
    assert resolution(2 * 137.0) == pytest.approx(resolution(137.0) / 2)
    with pytest.raises(ValueError):
        resolution(0.0)


def test_merge_close_examples():
    d = 0.1
    assert len(merge_close([], d)) == 0
    assert merge_close([1.0, 1.0 + d / 2, 3.0], d).freqs.tolist() == [1.0, 3.0]
    assert merge_close([3.0, 1.0, 2.0], d).freqs.tolist() == [1.0, 2.0, 3.0]


def test_merge_close_prefers_larger_amplitude():
    got = merge_close([1.0, 1.04, 3.0], 0.1, amplitudes=[0.2, 0.9, 1.0])
    assert got.freqs.tolist() == [1.04, 3.0]


def test_frequency_set_validation():
    with pytest.raises(ValueError):
        FrequencySet([2.0, 1.0], 0.1)
    with pytest.raises(ValueError):
        FrequencySet([1.0], 0.0)


def test_intersect_examples():
    a = FrequencySet([1.0, 2.0, 3.0], 0.01)
    b = FrequencySet([2.004, 4.0], 0.01)
    assert intersect(a, b).freqs.tolist() == [2.0]
    assert len(intersect(a, FrequencySet([5.0, 6.0], 0.01))) == 0
    with pytest.raises(ValueError):
        intersect(a, FrequencySet([1.0], 0.02))


def test_intersect_boundary_counts_as_match():
    a = FrequencySet([1.0], 0.25)
    b = FrequencySet([1.25], 0.25)
    assert intersect(a, b).freqs.tolist() == [1.0]


def test_discard_shared_examples():
    d = 0.1
    s0 = FrequencySet([1.0, 2.0, 3.0], d)
    s1 = FrequencySet([2.0 + d / 2, 5.0], d)
    assert discard_shared([s0, s1], 0).freqs.tolist() == [1.0, 3.0]
    assert discard_shared([s0], 0).freqs.tolist() == [1.0, 2.0, 3.0]


def test_discard_shared_boundary_is_distinct():
    s0 = FrequencySet([1.0], 0.25)
    s1 = FrequencySet([1.25], 0.25)
    assert discard_shared([s0, s1], 0).freqs.tolist() == [1.0]


def test_delta_mult_widens_tolerance():
    s0 = FrequencySet([1.0], 0.1)
    s1 = FrequencySet([1.15], 0.1)
    assert len(intersect(s0, s1)) == 0
    assert len(intersect(s0, s1, delta_mult=2.0)) == 1
    assert len(discard_shared([s0, s1], 0, delta_mult=2.0)) == 0


@st.composite
def fsets(draw, delta=0.1, max_size=15):
    raw = draw(st.lists(st.floats(0.1, 20), max_size=max_size))
    return merge_close(raw, delta)


def _brute_intersect(a, b):
    return [w for w in a.freqs if any(abs(w - v) <= a.delta for v in b.freqs)]


@settings(max_examples=150, deadline=None)
@given(fsets(), fsets())
def test_intersect_against_pairwise_scan(a, b):
    got = intersect(a, b)
    assert got.freqs.tolist() == _brute_intersect(a, b)
    assert set(got.freqs.tolist()) <= set(a.freqs.tolist())
    # matching is symmetric at the membership level
    back = intersect(b, a)
    assert back.freqs.tolist() == _brute_intersect(b, a)
    for w in got.freqs:
        assert any(abs(w - v) <= a.delta for v in back.freqs)


@settings(max_examples=150, deadline=None)
@given(st.lists(fsets(), min_size=1, max_size=4), st.data())
def test_discard_shared_properties(sets, data):
    i = data.draw(st.integers(0, len(sets) - 1))
    kept = discard_shared(sets, i)
    # pairwise scan oracle
    foreign = [v for m, s in enumerate(sets) if m != i for v in s.freqs]
    delta = sets[i].delta
    assert kept.freqs.tolist() == [w for w in sets[i].freqs if all(abs(w - v) >= delta for v in foreign)]
    for m, other in enumerate(sets):
        if m != i and len(other):
            assert all(np.min(np.abs(other.freqs - w)) >= delta for w in kept.freqs)
    twice = discard_shared([kept] + [s for m, s in enumerate(sets) if m != i], 0)
    assert twice.freqs.tolist() == kept.freqs.tolist()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.1, 20), max_size=25))
def test_merge_close_spacing_invariant(raw):
    s = merge_close(raw, 0.3)
    assert np.all(np.diff(s.freqs) >= 0.3)


@pytest.mark.parametrize("seed", range(4))
def test_separation_pipeline_removes_exactly_coupling(seed):
    rng = np.random.default_rng(seed)
    dt, n = 0.1, 1024
    delta = resolution(dt * n)
    taken = []
    privates = []
    for _ in range(3):
        w = commensurate_freqs(rng, delta, 6, 40, 400, taken=taken)
        taken.extend(w)
        privates.append(random_signal(rng, w))
    cw = commensurate_freqs(rng, delta, 3, 40, 400, taken=taken)
    pairs = ((0, 1, random_signal(rng, cw[:1])), (1, 2, random_signal(rng, cw[1:2])), (0, 2, random_signal(rng, cw[2:])))
    coupled = make_coupled_inputs(privates, CouplingSpec(pairs), delta)
    sets = [estimate_frequencies(synthesize(x, dt, n)) for x in coupled]
    for i in range(3):
        kept = discard_shared(sets, i)
        np.testing.assert_allclose(kept.freqs, privates[i].frequencies, atol=delta)
        removed = [w for w in sets[i].freqs if w not in kept.freqs.tolist()]
        mine = [h.omega for a, b, s in pairs if i in (a, b) for h in s.harmonics]
        np.testing.assert_allclose(sorted(removed), sorted(mine), atol=delta)
