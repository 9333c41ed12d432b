from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kplane import exponents as ex
from kplane.exponents import (INF, BoundSpec, KcritKind, Operator, Pipeline, Rule, RuleInapplicable,
                              SeedKind)


def plate(d, k, p, q, alpha, eps=False):
    return BoundSpec(Operator.MAXIMAL_PLATE, d, k, p, q, alpha, eps)


# ---------------------------------------------------------------------------
# BoundSpec and scalars


def test_boundspec_invariants():
    with pytest.raises(ValueError):
        plate(3, 3, 2, 2, 0)
    with pytest.raises(ValueError):
        plate(3, 1, F(1, 2), 2, 0)
    with pytest.raises(ValueError):
        BoundSpec(Operator.MAXIMAL_PLANE, 3, 1, 2, 2, F(1))
    with pytest.raises(ValueError):
        plate(3, 1, 2, 2, None)
    with pytest.raises(TypeError):
        plate(3, 1, 2.0, 2, 0)


def test_conjugate_exponent():
    assert ex.conjugate_exponent(2) == 2
    assert ex.conjugate_exponent(F(4, 3)) == 4
    assert ex.conjugate_exponent(4) == F(4, 3)
    assert ex.conjugate_exponent(INF) == 1
    with pytest.raises(ValueError):
        ex.conjugate_exponent(1)


@given(st.fractions(min_value=F(101, 100), max_value=100))
def test_conjugate_is_involutive(p):
    assert ex.conjugate_exponent(ex.conjugate_exponent(p)) == p


def test_kcrit_examples():
    assert ex.kcrit(7, KcritKind.BOURGAIN) == 3.0
    assert ex.kcrit(4, KcritKind.BOURGAIN) == 2.0
    k = ex.kcrit(7, KcritKind.KATZ_TAO)
    assert 2 < k < 3
    assert abs(7 / 3 * 2 ** (k - 2) + k - 7) < 1e-10


@pytest.mark.parametrize("d", range(3, 21))
@pytest.mark.parametrize("kind", list(KcritKind))
def test_kcrit_is_root_and_exceeds_agrees(d, kind):
    k = ex.kcrit(d, kind)
    assert abs(ex.kcrit_residual(k, d, kind)) < 1e-9
    for m in range(1, d):
        assert ex.exceeds_kcrit(m, d, kind) == (m > k + 1e-9)


# ---------------------------------------------------------------------------
# seeds and single rules


def test_seed_values():
    b = ex.seed_bound(SeedKind.KATZ_TAO_WEAK, 7)
    assert (b.p, b.q, b.alpha, b.eps_loss) == (4, 8, 3, True)
    b = ex.seed_bound(SeedKind.KATZ_TAO, 7)
    assert (b.p, b.q, b.alpha) == (F(31, 7), F(31, 4), F(18, 7))
    b = ex.seed_bound(SeedKind.WOLFF, 3)
    assert (b.p, b.alpha) == (F(5, 2), F(1, 2))
    with pytest.raises(ValueError):
        ex.seed_bound(SeedKind.KATZ_TAO_WEAK, 1)


def test_wolff_seed_reproduces_dimension_formula_after_one_halving():
    # the (4, 2) Wolff dimension d - (d-k-1)/2^k comes from halving alpha = 1/2 once
    b = ex.interp_step(ex.seed_bound(SeedKind.WOLFF, 3))
    assert b.alpha == F(1, 4)
    assert 4 - b.alpha == 4 - F(4 - 2 - 1, 2 ** 2)


def test_xray_step_examples():
    b = ex.xray_step(ex.seed_bound(SeedKind.KATZ_TAO_WEAK, 7))
    assert (b.d, b.k, b.p, b.alpha, b.q) == (8, 2, F(32, 11), F(24, 11), 8)
    zero = ex.xray_step(plate(7, 1, 4, 8, 0))
    assert zero.alpha == 0


def test_xray_step_preconditions():
    with pytest.raises(RuleInapplicable) as e:
        ex.xray_step(plate(3, 1, 6, 6, 1))
    assert "p <= d+1" in e.value.condition
    with pytest.raises(RuleInapplicable):
        ex.xray_step(BoundSpec(Operator.MAXIMAL_PLANE, 3, 1, 2, 2))


def test_interp_step_examples():
    b = ex.interp_step(ex.seed_bound(SeedKind.KATZ_TAO, 7))
    assert b.alpha == F(9, 7)
    b = ex.interp_step(ex.seed_bound(SeedKind.KATZ_TAO, 4))
    assert (b.d, b.k, b.p, b.q, b.alpha) == (5, 2, 3, 6, F(9, 14))


def test_q_restrict():
    b = plate(5, 2, 3, 6, F(9, 14))
    assert ex.q_restrict(b, 6) == b
    assert ex.q_restrict(b, 3).q == 3
    assert ex.q_restrict(b, 1).q == 1
    with pytest.raises(ValueError):
        ex.q_restrict(b, 7)


def test_l2_step_branches():
    out = ex.l2_step(plate(5, 2, 3, 3, F(9, 4)))
    assert (out.operator, out.d, out.k, out.alpha) == (Operator.MAXIMAL_PLATE, 6, 3, F(5, 4))
    assert ex.l2_step(plate(5, 2, 3, 3, 1)).alpha == 0
    plane = ex.l2_step(plate(5, 2, 3, 3, F(1, 2)))
    assert plane.operator is Operator.MAXIMAL_PLANE and plane.support_unit_ball
    assert plane.p == plane.q == 3
    with pytest.raises(RuleInapplicable, match="q = p"):
        ex.l2_step(plate(5, 2, 3, 6, 1))
    with pytest.raises(RuleInapplicable, match="p >= 2"):
        ex.l2_step(plate(5, 2, F(3, 2), F(3, 2), 1))


def test_p_raise_and_weaken():
    b = plate(5, 2, 3, 6, F(1, 2))
    r = ex.p_raise(b, 4)
    assert (r.p, r.q, r.alpha) == (4, 8, F(1, 2))
    assert ex.weaken_alpha(b, 1).alpha == 1
    with pytest.raises(ValueError):
        ex.p_raise(b, 2)
    with pytest.raises(ValueError):
        ex.weaken_alpha(b, 0)


# ---------------------------------------------------------------------------
# properties over random rationals

dims = st.integers(min_value=2, max_value=30)


@st.composite
def xray_inputs(draw):
    d = draw(dims)
    k = draw(st.integers(min_value=1, max_value=d - 1))
    D = d + 1
    p = draw(st.fractions(min_value=1, max_value=D + 1))
    q = draw(st.fractions(min_value=1, max_value=200))
    alpha = draw(st.fractions(min_value=0, max_value=50))
    return plate(d, k, p, q, alpha, draw(st.booleans()))


@settings(max_examples=1000)
@given(xray_inputs())
def test_xray_step_preserves_delta_power(b):
    out = ex.xray_step(b)
    assert out.delta_power() == b.delta_power()
    assert (out.d, out.k) == (b.d + 1, b.k + 1)
    assert out.eps_loss == b.eps_loss


@settings(max_examples=300)
@given(xray_inputs())
def test_xray_step_improves_p(b):
    out = ex.xray_step(b)
    assert (out.p < b.p) == (b.p > 1)


@settings(max_examples=500)
@given(st.integers(min_value=3, max_value=30), st.data())
def test_xray_step_p_identity(D, data):
    m = data.draw(st.fractions(min_value=1, max_value=D - 1).filter(lambda m: m > 1))
    p = F(D - 1) / m
    out = ex.xray_step(plate(D - 1, 1, p, 10 * D, 1))
    assert out.p == F(D) / (m + 1)


@settings(max_examples=500)
@given(st.integers(min_value=3, max_value=30), st.data())
def test_l2pcond_property(D, data):
    # input on R^(D-1): p <= (D-1)/m forces the lifted p to be <= D/(m+1)
    m = data.draw(st.fractions(min_value=1, max_value=D - 1))
    p = data.draw(st.fractions(min_value=1, max_value=F(D - 1) / m))
    out = ex.xray_step(plate(D - 1, 1, p, 10 * D, 1))
    assert out.p <= F(D) / (m + 1)


@settings(max_examples=300)
@given(xray_inputs())
def test_interp_step_halves_alpha(b):
    out = ex.interp_step(b)
    assert out.alpha == b.alpha / 2
    assert out.p == F(b.d + 2, 2)


@settings(max_examples=300)
@given(st.integers(2, 30), st.fractions(min_value=2, max_value=40), st.fractions(min_value=0, max_value=20))
def test_l2_step_branch_rule(d, p, alpha):
    out = ex.l2_step(plate(d, 1, p, p, alpha))
    if alpha >= 1:
        assert out.is_plate and out.alpha == alpha - 1
    else:
        assert out.operator is Operator.MAXIMAL_PLANE


# ---------------------------------------------------------------------------
# pipelines


def test_sharpp_chain():
    t = ex.derive_pipeline(Pipeline.SHARP_P, 10, 4)
    assert [s.output.p for s in t.steps] == [4, F(32, 11), F(12, 5), F(40, 19)]
    assert t.final.alpha == F(30, 19) and t.final.eps_loss


def test_nonl2_example():
    b = ex.derive_pipeline(Pipeline.NON_L2, 10, 3).final
    assert (b.p, b.q, b.alpha) == (F(11, 2), 11, F(3, 4))


def test_l2_preconditions():
    with pytest.raises(RuleInapplicable, match="3 <= k"):
        ex.derive_pipeline(Pipeline.L2, 10, 2)
    with pytest.raises(RuleInapplicable, match="kcrit"):
        ex.derive_pipeline(Pipeline.L2, 10, 5)


def test_nak_example():
    t = ex.derive_pipeline(Pipeline.NAK_THEOREM, 14, 5, 1)
    b = t.final
    assert b.operator is Operator.MAXIMAL_PLANE and b.support_unit_ball
    assert (b.d, b.k, b.p) == (14, 5, F(13, 3))
    assert ex.matches_closed_form(t)


def test_nak_preconditions():
    with pytest.raises(RuleInapplicable, match=r"j in \[1, k-4\]"):
        ex.derive_pipeline(Pipeline.NAK_THEOREM, 10, 4, 2)
    with pytest.raises(RuleInapplicable, match="kcrit"):
        ex.derive_pipeline(Pipeline.NAK_THEOREM, 20, 4)   # 4 < kcrit(20)
    with pytest.raises(RuleInapplicable, match="4 <= k"):
        ex.derive_pipeline(Pipeline.NAK_THEOREM, 6, 3)


def test_nak_all_valid_instances_reach_plane_bound():
    count = 0
    for d in range(5, 21):
        for k in range(4, d):
            if not ex.exceeds_kcrit(k, d):
                continue
            for j in range(0, k - 3):
                if j and not ex.exceeds_kcrit(k - j, d - j):
                    continue
                t = ex.derive_pipeline(Pipeline.NAK_THEOREM, d, k, j)
                assert t.final.operator is Operator.MAXIMAL_PLANE
                assert ex.matches_closed_form(t)
                count += 1
    assert count > 50


def test_trace_invariants_and_replay():
    t = ex.derive_pipeline(Pipeline.NAK_THEOREM, 14, 5, 1)
    t.check()
    assert t.steps[0].rule is Rule.SEED
    again = ex.derive_pipeline(Pipeline.NAK_THEOREM, 14, 5, 1)
    assert again.steps == t.steps


def test_trace_rejects_discontinuity():
    t = ex.DerivationTrace()
    t.append(Rule.SEED, {}, plate(3, 1, 2, 2, 1))
    with pytest.raises(ValueError):
        t.append(Rule.XRAY_STEP, plate(3, 1, 3, 3, 1), plate(4, 2, 2, 2, 1))


def test_dimension_examples():
    assert ex.hausdorff_bound(10, 2, SeedKind.KATZ_TAO) == F(58, 7)
    assert ex.hausdorff_bound(10, 2, SeedKind.WOLFF) == F(33, 4)
