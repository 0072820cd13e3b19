"""
Almost-periodic signals and measurement noise
=============================================

Build a few trigonometric sums, sample them, and look at how the
multiplicative and additive noise terms change the record. A record that
holds whole periods of every component reproduces the Bohr mean power
exactly.
"""

import numpy as np
from apident import APSignal, NoiseModel, apply_noise, resolution, synthesize

dt, n = 0.1, 1024
delta = resolution(dt * n)  # smallest frequency gap the record can resolve
print(f"record: {n} samples, dt={dt}, T={dt * n:.1f} s, delta={delta:.5f} rad/s")

# frequencies on the record's own grid k*delta
x = APSignal.from_terms([(120 * delta, 1.0, 0.5), (150 * delta, -0.3, 0.8), (171 * delta, 0.6, 0.0)])
ts = synthesize(x, dt, n)
print(f"analytic mean power {x.mean_power():.12f}")
print(f"sampled  mean power {np.mean(ts.samples ** 2):.12f}")

# linearity: sums and scalings commute with sampling
y = APSignal.from_terms([(133 * delta, 0.2, 0.2)])
both = synthesize(x + y.scaled(3.0), dt, n).samples
print("sampling is linear:", np.allclose(both, ts.samples + 3.0 * synthesize(y, dt, n).samples))

# distort the record: a gain of 2 plus two narrow-band disturbances
noise = NoiseModel(
    theta_hat=2.0,
    reduced_noise=APSignal.from_terms([(190 * delta, 0.1, 0.0)]),
    additive_noise=APSignal.from_terms([(205 * delta, 0.0, 0.4)]),
)
noisy = apply_noise(ts, noise)
print(f"noisy record power {np.mean(noisy.samples ** 2):.4f} "
      f"(4 x clean = {4 * x.mean_power():.4f}, plus noise)")
