"""Acceptance criteria 1-12 at their stated sizes and tolerances.

Each test records one PASS/FAIL line, printed at the end of the pytest run
(see conftest.py).  Running this file directly prints the same lines.
"""

import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from kplane import budgets
from kplane import exponents as ex
from kplane.exponents import BoundSpec, KcritKind, Operator, Pipeline, SeedKind
from kplane.lab import (Family, fit_power_law, graproduct_experiment, highpass_decay_experiment,
                        holder_experiment, necessity_sweep, plancherel_experiment)
from kplane.transforms import GridFunction, lp_bands, xray_plancherel_constant
from oracles import small_ball_oracle


# ---------------------------------------------------------------------------
# exact derivations


def test_criterion_01_pipeline_closed_forms(criterion):
    start = time.perf_counter()
    bad, l2_count = [], 0
    for d in range(3, 21):
        for k in range(2, d):
            b = ex.derive_pipeline(Pipeline.SHARP_P, d, k).final
            p = F(d) / (k + F(3, 4))
            if (b.p, b.alpha) != (p, d - k * p):
                bad.append(("SharpP", d, k))
            b = ex.derive_pipeline(Pipeline.NON_L2, d, k).final
            if (b.p, b.q, b.alpha) != (F(d + 1, 2), d + 1, F(3 * (d - k), 7 * 2 ** (k - 1))):
                bad.append(("NonL2", d, k))
            if k >= 3 and not ex.exceeds_kcrit(k, d):
                b = ex.derive_pipeline(Pipeline.L2, d, k).final
                l2_count += 1
                if (b.p, b.q, b.alpha) != (F(d, 2), F(d, 2), F(3 * (d - k), 7 * 2 ** (k - 2)) - 1):
                    bad.append(("L2", d, k))
    elapsed = time.perf_counter() - start
    ok = criterion(1, not bad and l2_count > 0 and elapsed < 1.0,
                   f"{len(bad)} mismatches, {l2_count} L2 instances, {elapsed:.3f} s")
    assert ok, bad


def _bisect(fn, lo, hi, tol=1e-13):
    while hi - lo > tol:
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if fn(mid) < 0 else (lo, mid)
    return (lo + hi) / 2


def test_criterion_02_nak_instance(criterion):
    t = ex.derive_pipeline(Pipeline.NAK_THEOREM, 14, 5, 1)
    b = t.final
    kc13 = _bisect(lambda k: 7 / 3 * 2 ** (k - 2) + k - 13, 1.0, 13.0)
    hyp = 4 > kc13 and ex.exceeds_kcrit(4, 13) and 5 > _bisect(lambda k: 7 / 3 * 2 ** (k - 2) + k - 14, 1, 14)
    ok = (b.operator is Operator.MAXIMAL_PLANE and (b.d, b.k) == (14, 5)
          and b.p == F(13, 3) == F(14 - 1, 2 + 1) and hyp)
    criterion(2, ok, f"p = {b.p}, operator {b.operator.value}, kcrit(13) = {kc13:.6f}")
    assert ok


def test_criterion_03_kcrit(criterion):
    b7, b4 = ex.kcrit(7, KcritKind.BOURGAIN), ex.kcrit(4, KcritKind.BOURGAIN)
    kt = ex.kcrit(7, KcritKind.KATZ_TAO)
    res = abs(7 / 3 * 2 ** (kt - 2) + kt - 7)
    ok = b7 == 3.0 and b4 == 2.0 and 2 < kt < 3 and res <= 1e-10
    criterion(3, ok, f"Bourgain(7) = {b7}, Bourgain(4) = {b4}, KatzTao(7) = {kt:.12f}, residual {res:.1e}")
    assert ok


def test_criterion_04_dimension_formulas(criterion):
    bad = []
    for d in range(3, 21):
        for k in range(2, d):
            kt = min(F(d), max(d - F(3 * (d - k), 7 * 2 ** (k - 2)) + 1, d - F(3 * (d - k), 7 * 2 ** (k - 1))))
            wo = min(F(d), max(d - F(d - k - 1, 2 ** (k - 1)) + 1, d - F(d - k - 1, 2 ** k)))
            if ex.hausdorff_bound(d, k, SeedKind.KATZ_TAO) != kt or ex.hausdorff_bound(d, k, SeedKind.WOLFF) != wo:
                bad.append(("formula", d, k))
            for seed, want, pipe in ((SeedKind.KATZ_TAO, kt, Pipeline.DIM_KT), (SeedKind.WOLFF, wo, Pipeline.DIM_WOLFF)):
                finals = [ex.nonl2_trace(d, k, seed).final, ex.l2_chain_trace(d, k, seed).final]
                # a plane-operator bound (alpha None) gives full dimension d
                cross = min(F(d), max(F(b.d) if b.alpha is None else b.d - b.alpha for b in finals))
                if cross != want or ex.dimension_from_bound(ex.derive_pipeline(pipe, d, k).final) != want:
                    bad.append((seed.value, d, k))
    ok = criterion(4, not bad, f"{len(bad)} mismatches over 2 <= k < d <= 20")
    assert ok, bad


def _random_spec(rng):
    d = rng.randint(2, 30)
    k = rng.randint(1, d - 1)
    p = F(rng.randint(1, 1000), rng.randint(1, 1000))
    p = max(F(1), min(p, F(d + 2)))
    q = F(rng.randint(1, 2000), rng.randint(1, 50))
    alpha = F(rng.randint(0, 5000), rng.randint(1, 500))
    return BoundSpec(Operator.MAXIMAL_PLATE, d, k, p, max(q, F(1)), alpha, rng.random() < 0.5)


def test_criterion_05_delta_power_invariance(criterion):
    rng = random.Random(20240605)
    bad = 0
    for _ in range(1000):
        b = _random_spec(rng)
        if ex.xray_step(b).alpha / ex.xray_step(b).p != b.alpha / b.p:
            bad += 1
    ident = 0
    for _ in range(1000):
        D = rng.randint(3, 40)
        m = 1 + F(rng.randint(1, 10 ** 6), 10 ** 6) * (D - 2)
        # input p = (D-1)/m gives p~ = D/(m+1) exactly
        if ex.xray_step(BoundSpec(Operator.MAXIMAL_PLATE, D - 1, 1, F(D - 1) / m, 10 * D, 1)).p != F(D) / (m + 1):
            ident += 1
        # and p <= (D-1)/m gives p~ <= D/(m+1)
        p = 1 + (F(D - 1) / m - 1) * F(rng.randint(0, 10 ** 6), 10 ** 6)
        if ex.xray_step(BoundSpec(Operator.MAXIMAL_PLATE, D - 1, 1, p, 10 * D, 1)).p > F(D) / (m + 1):
            ident += 1
    ok = criterion(5, bad == 0 and ident == 0, f"{bad} alpha/p violations in 1000 specs, {ident} identity violations")
    assert ok


# ---------------------------------------------------------------------------
# numerical identities


def test_criterion_06_littlewood_paley(criterion):
    g = GridFunction.zeros(3, 64)
    g.values = np.random.default_rng(6).standard_normal(g.shape)
    bands = lp_bands(g)
    recon = np.abs(sum(b.values for b in bands) - g.values).max() / np.abs(g.values).max()
    energy = sum(b.lp_norm(2) ** 2 for b in bands)
    parseval = abs(energy - g.lp_norm(2) ** 2) / g.lp_norm(2) ** 2
    ok = recon <= budgets.LP_RELATIVE and parseval <= budgets.LP_RELATIVE
    criterion(6, ok, f"reconstruction {recon:.1e}, Parseval {parseval:.1e} ({len(bands)} bands)")
    assert ok


def test_criterion_07_plancherel(criterion):
    start = time.perf_counter()
    rep = plancherel_experiment(d=3, resolution=64, n_functions=8, n_directions=256)
    elapsed = time.perf_counter() - start
    ok = rep.spread <= budgets.PLANCHEREL_SPREAD and elapsed < 600
    criterion(7, ok, f"spread {rep.spread:.4f}, mean {rep.mean:.4f} vs C_3 = {xray_plancherel_constant(3):.4f}, "
                     f"{elapsed:.0f} s")
    assert ok


def test_criterion_08_highpass_decay(criterion):
    sweep = highpass_decay_experiment(d=3, resolution=128, radii=(2, 4, 8, 16))
    lo, hi = budgets.HIGHPASS_SLOPE
    ok = lo <= sweep.slope <= hi and sweep.residual < budgets.FIT_RESIDUAL
    criterion(8, ok, f"slope {sweep.slope:.4f}, residual {sweep.residual:.4f}")
    assert ok


def test_criterion_09_holder(criterion):
    ratios = holder_experiment(n_functions=500, d=3, k=1, r=2)
    worst = max(ratios)
    ok = worst <= budgets.HOLDER_RATIO
    criterion(9, ok, f"max ratio {worst:.4f} over {len(ratios)} plates / 500 functions")
    assert ok


def test_criterion_10_graproduct(criterion):
    worst = {}
    for d, k in [(3, 2), (4, 2), (5, 3)]:
        worst[(d, k)] = max(abs(r["z"]) for r in graproduct_experiment(d, k, n_samples=100_000))
    ok = max(worst.values()) <= budgets.GRASS_Z
    criterion(10, ok, "max |z| " + ", ".join(f"{key}: {z:.2f}" for key, z in worst.items()))
    assert ok


def test_criterion_11_maximal_sanity_and_oracle(criterion):
    deltas = [0.2, 0.1, 0.05, 0.025]
    plate = necessity_sweep(Family.PLATE, 2, 1, 2, 2, deltas, 401, n_frames=4)
    p = F(3, 2)
    ball = necessity_sweep(Family.SMALL_BALL, 2, 1, p, 3, deltas, 401, n_frames=32)
    want, *_ = fit_power_law(deltas, [small_ball_oracle(x, float(p)) for x in deltas])
    own = min(plate.metadata["own_frame_values"])
    ok = own >= budgets.PLATE_SELF and abs(ball.slope - want) <= budgets.NECESSITY_SLOPE
    criterion(11, ok, f"plate self-value {own:.4f}, small-ball slope {ball.slope:.4f} vs oracle {want:.4f}")
    assert ok


def test_criterion_12_covered_by_exact_derivations(criterion):
    # not an empirical claim; it holds exactly when the derivation checks 1-5 do
    names = ["test_criterion_01_pipeline_closed_forms", "test_criterion_02_nak_instance",
             "test_criterion_03_kcrit", "test_criterion_04_dimension_formulas",
             "test_criterion_05_delta_power_invariance"]
    fns = [globals()[n] for n in names]
    results = {}

    def local(number, passed, detail=""):
        results[number] = passed
        return passed

    for fn in fns:
        try:
            fn(local)
        except AssertionError:
            pass
    ok = criterion(12, all(results.values()) and len(results) == 5,
                   "covered by exact derivations 1-5 (no empirical test)")
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
