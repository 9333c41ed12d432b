"""Walk the exact exponent calculus: seeds, lifts, pipelines, critical dimension.

Run:  python3 demos/exponent_calculus.py
"""

from fractions import Fraction

from kplane import exponents as ex
from kplane.exponents import KcritKind, Pipeline, SeedKind
from kplane.records import trace_table


def main():
    print("Lifting the weak seed on R^7 through three x-ray steps (d=10, k=4):")
    t = ex.derive_pipeline(Pipeline.SHARP_P, 10, 4)
    print(trace_table(t).render("csv"))
    print(f"final p = {t.final.p} = 10/(4 + 3/4): {t.final.p == Fraction(10) / Fraction(19, 4)}\n")

    print("Interpolated lifts keep p = (d+1)/2 and halve alpha each time:")
    for k in range(1, 6):
        b = ex.derive_pipeline(Pipeline.NON_L2, 10, k).final if k > 1 else ex.nonl2_trace(10, 1).final
        print(f"  k={k}: p={b.p}, q={b.q}, alpha={b.alpha}")

    print("\nCritical plane dimension:")
    for d in (4, 7, 10, 14, 20):
        print(f"  d={d:2d}  Bourgain {ex.kcrit(d, KcritKind.BOURGAIN):.6f}   KatzTao {ex.kcrit(d):.6f}")

    print("\nPlane-operator bound for d=14, k=5 with one spare iteration:")
    t = ex.derive_pipeline(Pipeline.NAK_THEOREM, 14, 5, 1)
    print(trace_table(t).render("csv"))

    print("\nA rule applied outside its hypotheses is refused with a reason:")
    try:
        ex.derive_pipeline(Pipeline.NAK_THEOREM, 10, 4, 2)
    except ex.RuleInapplicable as e:
        print(f"  {e}")

    print("\nHausdorff dimension lower bounds for (d, 2) sets:")
    for d in range(4, 11):
        print(f"  d={d:2d}  KatzTao {ex.hausdorff_bound(d, 2, SeedKind.KATZ_TAO)}"
              f"   Wolff {ex.hausdorff_bound(d, 2, SeedKind.WOLFF)}")


if __name__ == "__main__":
    main()
