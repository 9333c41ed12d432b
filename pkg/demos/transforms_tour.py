"""Grid x-ray transforms, plate maximal functions and Fourier-side tools.

Run:  python3 demos/transforms_tour.py
"""

import math

import numpy as np

from kplane.grassmann import haar_sample, sphere_sample
from kplane.transforms import (gaussian_mixture, indicator_ball, lp_bands, maximal_plate, sobolev_norm,
                               xray, xray_l2_norm, xray_plancherel_constant)


def main():
    f = indicator_ball(3, 64, 0.8)
    g = xray(f, np.array([0.0, 0.0, 1.0]))
    print(f"x-ray of B(0, 0.8) along e3: peak {g.values.max():.4f} (chord 1.6), output dimension {g.d}")

    s = 0.15
    f = gaussian_mixture(3, 64, [[0.1, 0, 0], [-0.2, 0.1, 0]], [s, s], [1.0, -1.0])
    dirs = sphere_sample(3, 256, "quasi_uniform")
    ratio = xray_l2_norm(f, dirs, support_radius=1.25) / sobolev_norm(f, -0.5, pad=2)
    print(f"||f_xi|| / ||f||_H^-1/2 = {ratio:.4f},  C_3 = sqrt(pi) = {xray_plancherel_constant(3):.4f}")

    bands = lp_bands(f)
    energy = sum(b.lp_norm(2) ** 2 for b in bands)
    print(f"{len(bands)} Littlewood-Paley bands, energy ratio {energy / f.lp_norm(2) ** 2:.12f}")

    print("\nPlate maximal function of a small disc in the plane (expect pi delta / 2):")
    for delta in (0.2, 0.1, 0.05):
        disc = indicator_ball(2, 201, delta)
        frame = haar_sample(2, 1, rng_seed=0)
        print(f"  delta={delta:<5} grid {maximal_plate(disc, frame, delta, method='grid'):.4f}"
              f"   exact {math.pi * delta / 2:.4f}")


if __name__ == "__main__":
    main()
