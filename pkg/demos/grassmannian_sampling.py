"""Haar frames on G(d,k) against frames lifted from (direction, lower plane) pairs.

Run:  python3 demos/grassmannian_sampling.py
"""

import numpy as np

from kplane.grassmann import HemisphereChart, haar_sample, lift, sphere_sample, split
from kplane.lab import graproduct_experiment


def main():
    L = haar_sample(5, 3, rng_seed=1)
    print(f"Haar frame in G(5,3): orthonormality error {L.gram_error():.1e}")

    chart = HemisphereChart(5)
    xi, M = split(L, chart)
    back = lift(xi, M, chart)
    print(f"split -> lift recovers the plane: {back.same_plane(L)}")

    xi = sphere_sample(3, 1, rng_seed=2)[0]
    B = HemisphereChart(3).perp_basis(xi)
    print(f"chart basis of xi^perp: shape {B.shape}, |xi . B| = {np.abs(xi @ B).max():.1e}")

    print("\nMoment z-scores, Haar vs lifted, 100000 samples each:")
    for d, k in [(3, 2), (4, 2), (5, 3)]:
        rows = graproduct_experiment(d, k, n_samples=100_000)
        zs = ", ".join(f"{r['z']:+.2f}" for r in rows)
        print(f"  (d={d}, k={k}): {zs}")


if __name__ == "__main__":
    main()
