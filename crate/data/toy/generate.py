"""Regenerates the toy datasets in this directory (numpy, fixed seed)."""
import numpy as np

rng = np.random.default_rng(20240601)


def save(name, x, *labelings):
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    np.savetxt(f"{name}.data", x, fmt="%.10g")
    for i, lab in enumerate(labelings):
        np.savetxt(f"{name}.labels{i}", np.asarray(lab, dtype=int), fmt="%d")


# three unit-variance blobs, centres 20 standard deviations apart
centres = np.array([[0.0, 0.0], [20.0, 0.0], [10.0, 17.32]])
blobs = np.vstack([c + rng.standard_normal((50, 2)) for c in centres])
save("blobs3", blobs, np.repeat([1, 2, 3], 50))

save("line4", [0, 1, 2, 10], [1, 1, 1, 2])
save("chain_outlier", [0, 1, 2, 3, 4, 100], [1, 1, 1, 1, 1, 2])

stars = [[0, 0], [-1, 0], [0, 1], [0, -1], [20, 0], [21, 0], [20, 1], [20, -1]]
save("stars2", stars, [1, 1, 1, 1, 2, 2, 2, 2])

# uneven groups, two reference labelings (k = 3 and k = 2) and a few noise points
groups = [([0, 0], 12, 0.6), ([6, 1], 8, 0.5), ([3, 7], 20, 0.9)]
pts = np.vstack([np.array(c) + s * rng.standard_normal((m, 2)) for c, m, s in groups])
fine = np.repeat([1, 2, 3], [12, 8, 20])
coarse = np.where(fine == 3, 2, 1)
fine_noisy = fine.copy()
fine_noisy[[5, 17, 30]] = 0
save("uneven", pts, fine_noisy, coarse)
