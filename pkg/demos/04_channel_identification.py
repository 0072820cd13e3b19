"""
Identifying one channel and choosing its order
==============================================

Given Fourier exponents of an input and an output at a handful of
frequencies, recover the astatism order from the quadrant of the
frequency response at the lowest frequency, then fit the coefficients of
the differential equation order by order. The largest order whose
least-squares residual stays at the noise floor is kept.
"""

import numpy as np
from apident import (APSignal, ChannelModel, FourierExponentPair, IdentifyConfig,
                     identify_channel, simulate_channel)

true = ChannelModel(p_a=1, coefficients=(-1.0, 0.4, 0.05))
print("true D(s) = -1.0 s + 0.4 s^2 + 0.05 s^3")

omegas = np.array([0.35, 0.6, 0.9, 1.3, 1.7])
x = APSignal.from_terms([(w, 1.0, 0.5) for w in omegas])
y = simulate_channel(x, true)
pairs = [FourierExponentPair(hx.omega, hx.exponent, hy.exponent)
         for hx, hy in zip(x.harmonics, y.harmonics)]

w0 = pairs[0].s_out / pairs[0].s_in
print(f"W at the lowest frequency: {w0:.4f} (quadrant II, one integrator)")

model = identify_channel(pairs)
print(f"\np_a={model.p_a}, order={model.order}")
print("coefficients:", np.round(model.coefficients, 10))
print("\n order  relative residual   condition")
for g, r, c in zip(model.trial_orders, model.residuals, model.conditions):
    print(f"  {g:3d}   {r:14.3e}   {c:10.3e}")

# too few frequencies for redundancy, or a tolerance nothing meets
try:
    identify_channel(pairs, IdentifyConfig(consistency_tol=1e-30))
except Exception as exc:
    print(f"\n{type(exc).__name__}: {exc}")
