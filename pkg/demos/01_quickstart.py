"""Quickstart: detect change points in a simulated mean-shift series.

Simulates 600 observations in 5 dimensions whose mean jumps by 2 on the
middle third, runs the random-forest detector, and compares the estimate
against the ground truth.
"""

import segclass as sc

series = sc.gen_cim(seed=3)
print(f"simulated series: n={series.X.n}, d={series.X.d}, "
      f"true change points {series.truth.changepoints}")

result = sc.detect(series.X, method="random_forest", seed=3)

print(f"estimated change points: {result.changepoints}")
print(f"adjusted Rand index:     "
      f"{sc.adjusted_rand_index(series.truth, result.segmentation):.3f}")
print(f"engine fits: {result.engine_fits} "
      f"({result.segments_visited} segments visited, 4 fits each)")

print("\nsplit log (every segment the recursion looked at):")
for r in result.split_log:
    verdict = "accepted" if r.accepted else "rejected"
    print(f"  ({r.u:4d}, {r.v:4d}]  guesses={r.guesses}  "
          f"s_hat={r.s_hat:4d}  p={r.p_value:.3f}  {verdict}")

# the same call with the parametric baseline: fast, but mean-shifts only
baseline = sc.detect(series.X, method="change_in_mean")
print(f"\nchange-in-mean baseline finds: {baseline.changepoints}")
