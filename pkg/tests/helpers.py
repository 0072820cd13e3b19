"""Shared builders for synthetic identification problems."""
import numpy as np

from apident import APSignal, ChannelModel

# W = 1/D at the lowest frequency must sit in this quadrant (sign of Re, Im)
QUADRANT = {0: (1, 1), 1: (-1, 1), 2: (-1, -1)}


def commensurate_freqs(rng, delta, count, k_min, k_max, gap=3, taken=()):
    """``count`` integer multiples of ``delta`` at least ``gap`` steps apart."""
    ks = [int(round(w / delta)) for w in taken]
    out = []
    while len(out) < count:
        k = int(rng.integers(k_min, k_max + 1))
        if all(abs(k - j) >= gap for j in ks):
            ks.append(k)
            out.append(k)
    return np.sort(np.array(out)) * delta


def random_signal(rng, freqs, amp=(0.5, 1.5)):
    terms = []
    for w in freqs:
        r = rng.uniform(*amp)
        ph = rng.uniform(0, 2 * np.pi)
        terms.append((w, r * np.cos(ph), r * np.sin(ph)))
    return APSignal.from_terms(terms)


def random_model(rng, p_a, order, freqs, margin=0.1, max_range=None):
    """A channel whose response at ``min(freqs)`` lies in the quadrant for ``p_a``.

    Coefficients have mixed signs and unit-order magnitude once frequency is
    measured in units of the median of ``freqs``. ``max_range`` bounds the
    spread of ``|D|`` over ``freqs`` so no output harmonic becomes tiny.
    """
    freqs = np.asarray(freqs)
    scale = np.median(freqs)
    want = QUADRANT[p_a]
    axes = np.pi / 2 * np.arange(-2, 3)
    for _ in range(10_000):
        t = rng.uniform(0.5, 2.0, order + 1) * rng.choice([-1.0, 1.0], order + 1)
        m = ChannelModel(p_a, tuple(t / scale ** np.arange(p_a, p_a + order + 1)))
        w = complex(m.response(freqs.min()))
        d = np.abs(m.characteristic(freqs))
        if (np.sign(w.real), np.sign(w.imag)) != want:
            continue
        if np.min(np.abs(np.angle(w) - axes)) < margin:
            continue
        if max_range is not None and d.max() / d.min() > max_range:
            continue
        return m
    raise RuntimeError("no admissible model found")


def rel_err(got, want):
    got, want = np.asarray(got, float), np.asarray(want, float)
    return float(np.max(np.abs(got - want) / np.abs(want)))
