"""
Separating inputs by their frequency sets
=========================================

With several inputs acting on one output, only frequencies that belong to
a single input can be attributed to it. Here two inputs share a coupling
component; removing the shared frequency leaves each input with its own
set, and intersecting with the output keeps only the channel's
frequencies.
"""

import numpy as np
from apident import (APSignal, CouplingSpec, discard_shared, estimate_frequencies, intersect,
                     make_coupled_inputs, resolution, synthesize)

dt, n = 0.1, 1024
delta = resolution(dt * n)

def tone(ks):
    return APSignal.from_terms([(kk * delta, 1.0, 0.3) for kk in ks])


x1, x2 = tone([100, 112, 131]), tone([150, 163, 177])
shared = APSignal.from_terms([(140 * delta, 0.7, -0.4)])
x1, x2 = make_coupled_inputs([x1, x2], CouplingSpec([(0, 1, shared)]), delta)

sets = [estimate_frequencies(synthesize(x, dt, n)) for x in (x1, x2)]
for name, s in zip(("x1", "x2"), sets):
    print(f"{name} peaks (in units of delta): {np.round(s.freqs / delta, 3)}")

own1 = discard_shared(sets, 0)
print("x1 without shared components:", np.round(own1.freqs / delta, 3))

# an output that only x1 reaches, through a gain of 2, plus a stray tone
y = x1.scaled(2.0) + APSignal.from_terms([(190 * delta, 0.5, 0.0)])
out_set = estimate_frequencies(synthesize(y, dt, n))
matched = intersect(own1, out_set)
print("matched x1 -> y:", np.round(matched.freqs / delta, 3))
