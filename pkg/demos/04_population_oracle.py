"""Population-level gain curves on an exactly solvable discrete model.

With the exact Bayes classifier over a finite support, expected gains have
closed forms. Two structural facts drive the whole method:

  * refitting at every split gives a curve that is piecewise convex
    between change points, maximized at a true change point;
  * fixing the classifier at one guess gives a piecewise *linear* curve
    whose only kinks are the true change points.

The second fact is what makes a two-step search sound: any informative
guess produces a curve whose maximum already sits on a change point.
"""

import numpy as np

from segclass.core import SegmentBounds, Segmentation
from segclass.oracle import (DiscreteDistribution, PopulationModel,
                             bayes_approximate_gain_curve,
                             bayes_split_gain_curve)

model = PopulationModel(
    truth=Segmentation((0, 8, 20)),
    distributions=(DiscreteDistribution(np.array([0.7, 0.2, 0.1])),
                   DiscreteDistribution(np.array([0.2, 0.3, 0.5]))))
print(f"model: n=20, change point at 8, support size 3\n")

s_values, gains = bayes_split_gain_curve(model, SegmentBounds(0, 20))
print("refit-at-every-split expected gain:")
print("  s    :", " ".join(f"{s:5d}" for s in s_values[1:-1]))
print("  gain :", " ".join(f"{g:5.2f}" for g in gains[1:-1]))
print(f"  maximized at s={s_values[np.argmax(gains)]} (the change point)\n")

for s0 in (4, 14):
    s_values, gains = bayes_approximate_gain_curve(model,
                                                   SegmentBounds(0, 20), s0)
    second = np.diff(gains, 2)
    kinks = [int(s_values[i + 1]) for i in np.flatnonzero(np.abs(second) > 1e-12)]
    print(f"classifier fixed at guess s0={s0:2d}: "
          f"max at s={s_values[np.argmax(gains)]}, kinks at {kinks}")

print("\nboth fixed-guess curves peak at 8 even though neither guess is")
print("anywhere near it - the approximate gain inherits the kink exactly.")
