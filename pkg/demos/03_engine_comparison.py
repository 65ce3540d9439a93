"""Compare the three engines across the three synthetic setups.

Mean shifts are easy for everyone. Covariance shifts are invisible to the
parametric baseline and to Euclidean kNN, but the forest picks them up.
The Dirichlet setup (10 change points, d=20) favors the forest as well.

Ten seeds per cell keep this demo quick; the acceptance suite runs the
full 100-seed versions.
"""

import numpy as np

import segclass as sc

SCENARIOS = [("CIM", sc.gen_cim), ("CIC", sc.gen_cic),
             ("Dirichlet", sc.gen_dirichlet)]
METHODS = ["random_forest", "knn", "change_in_mean"]
N_SEEDS = 10

print(f"mean adjusted Rand index over {N_SEEDS} seeds\n")
print(f"{'':16s}" + "".join(f"{m:>16s}" for m in METHODS))
for name, generate in SCENARIOS:
    cells = []
    for method in METHODS:
        scores = []
        for seed in range(N_SEEDS):
            series = generate(seed)
            result = sc.detect(series.X, method=method, seed=seed)
            scores.append(
                sc.adjusted_rand_index(series.truth, result.segmentation))
        cells.append(np.mean(scores))
    print(f"{name:16s}" + "".join(f"{c:16.3f}" for c in cells))

print("\nreading guide: forest handles all three; kNN collapses on CIC")
print("(distances carry no correlation information); the parametric")
print("baseline only ever sees mean shifts.")
