"""Necessity sweeps and the numerical checks behind the exponent calculus, at small sizes.

Run:  python3 demos/scaling_experiments.py      (about a minute)
"""

from fractions import Fraction

from kplane.lab import (Family, conjectured_delta_exponent, highpass_decay_experiment, holder_experiment,
                        lp_maximal_experiment, necessity_sweep, plancherel_experiment)


def main():
    p = Fraction(3, 2)
    sw = necessity_sweep(Family.SMALL_BALL, 2, 1, p, 3, [0.2, 0.1, 0.05], 201, n_frames=16)
    print("Small-ball sweep in the plane, p = 3/2:")
    for delta, ratio in sw.points:
        print(f"  delta={delta:<5} ratio {ratio:.4f}")
    print(f"  slope {sw.slope:.4f} (exponent k - d/p = {conjectured_delta_exponent(2, 1, p)}),"
          f" residual {sw.residual:.4f}")

    rep = plancherel_experiment(resolution=48, n_functions=4, n_directions=128)
    print(f"\nx-ray L^2 identity: mean ratio {rep.mean:.4f}, spread {rep.spread:.4f}, C_3 {rep.constant:.4f}")

    hp = highpass_decay_experiment(resolution=64, n_functions=2, n_directions=16)
    print(f"high-pass decay at 64^3: slope {hp.slope:.4f}, residual {hp.residual:.4f} (expect -1/2)")

    ratios = holder_experiment(n_functions=40, resolution=32)
    print(f"Hoelder over lines: max ratio {max(ratios):.4f} over {len(ratios)} plates")

    for r in lp_maximal_experiment(n_functions=2, resolution=48, delta=1 / 16):
        print(f"sliced maximal vs band sum: {r.lhs:.4f} <= {r.rhs:.4f}  (ratio {r.constant:.3f})")


if __name__ == "__main__":
    main()
