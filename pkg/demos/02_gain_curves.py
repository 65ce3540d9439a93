"""Approximate gain curves on the covariance-shift setup.

A single classifier fit at a guess s0 yields per-observation ratios whose
partial sums trace a piecewise-linear curve with kinks at the true change
points. The middle guess (s0=300) is special: the mixtures left and right
of it coincide, so its curve carries no information - the reason the
search starts from three quartile guesses rather than one.

Writes the plot-ready curves to gain_curves.csv (columns: guess, s, gain).
"""

import csv

import numpy as np

import segclass as sc
from segclass.core import DetectionConfig, SegmentBounds
from segclass.detector import ForestEngine, step1_gain_table, two_step_search

series = sc.gen_cic(seed=1)
print(f"covariance-shift series, true change points {series.truth.changepoints}")

config = DetectionConfig(seed=1)
engine = ForestEngine(series.X, seed=1)
step = two_step_search(series.X, SegmentBounds(0, 600), engine, config)

candidates, table = step1_gain_table(step.likelihoods, config.delta, 600)
print(f"\nstep-1 guesses {step.initial_guesses} "
      f"-> refined guess s1={step.s1}, final estimate s_hat={step.s_hat}")

with open("gain_curves.csv", "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["guess", "s", "gain"])
    for j, guess in enumerate(step.initial_guesses):
        col = table[:, j]
        peak = candidates[np.argmax(col)]
        spread = col.max() - col.min()
        print(f"  guess {guess:3d}: curve peaks at s={peak:3d} "
              f"(max gain {col.max():8.1f}, spread {spread:8.1f})")
        for s, g in zip(candidates, col):
            writer.writerow([guess, int(s), g])
    final = step.final_gain_curve
    for s, g in zip(final.candidates, final.values):
        writer.writerow(["final", int(s), g])

print("\nwrote gain_curves.csv (one block per guess plus the final curve)")
print("note the near-flat spread of the balanced guess at 300")
