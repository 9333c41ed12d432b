"""Exact exponent calculus for k-plane maximal operator bounds.

A :class:`BoundSpec` records an estimate

    ||M^k_delta f||_{L^q(G(d,k))} <~ delta^(-alpha/p) ||f||_{L^p(R^d)}

(or, for the plane operator N^k, the same without the delta loss).  The rules
below transform such estimates exactly, with every exponent a
:class:`fractions.Fraction`; an arbitrarily small epsilon loss is carried as a
boolean flag and never enters the arithmetic.

The pipelines chain the rules into full derivations; each returns a
:class:`DerivationTrace` whose final bound can be compared against the closed
forms exposed by :func:`closed_form`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Union

Rational = Union[int, Fraction]
Exponent = Union[Fraction, float]  # float only for math.inf

INF = math.inf


class RuleInapplicable(ValueError):
    """A rule or pipeline was applied outside its hypotheses.

    ``condition`` names the violated hypothesis.
    """

    def __init__(self, rule: str, condition: str):
        self.rule = rule
        self.condition = condition
        super().__init__(f"{rule}: hypothesis violated: {condition}")


class Operator(enum.Enum):
    MAXIMAL_PLATE = "MaximalPlate"
    MAXIMAL_PLANE = "MaximalPlane"


class SeedKind(enum.Enum):
    KATZ_TAO = "KatzTao"
    KATZ_TAO_WEAK = "KatzTaoWeak"
    WOLFF = "Wolff"


class KcritKind(enum.Enum):
    BOURGAIN = "Bourgain"
    KATZ_TAO = "KatzTao"


class Rule(enum.Enum):
    SEED = "Seed"
    XRAY_STEP = "XrayStep"
    INTERP_STEP = "InterpStep"
    L2_STEP = "L2Step"
    Q_RESTRICT = "QRestrict"
    P_RAISE = "PRaise"
    WEAKEN = "Weaken"


class Pipeline(enum.Enum):
    SHARP_P = "SharpP"
    NON_L2 = "NonL2"
    L2 = "L2"
    NAK_THEOREM = "NakTheorem"
    DIM_KT = "DimKT"
    DIM_WOLFF = "DimWolff"


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError(f"exponents must be exact rationals, got float {x!r}")
    return Fraction(x)


def _exp(x) -> Exponent:
    if x == INF:
        return INF
    return _frac(x)


@dataclass(frozen=True)
class BoundSpec:
    operator: Operator
    d: int
    k: int
    p: Fraction
    q: Exponent
    alpha: Optional[Fraction] = None
    eps_loss: bool = False
    support_unit_ball: bool = False

    def __post_init__(self):
        object.__setattr__(self, "p", _frac(self.p))
        object.__setattr__(self, "q", _exp(self.q))
        if self.alpha is not None:
            object.__setattr__(self, "alpha", _frac(self.alpha))
        if not (1 <= self.k < self.d):
            raise ValueError(f"need 1 <= k < d, got d={self.d}, k={self.k}")
        if self.p < 1 or self.q < 1:
            raise ValueError(f"need p, q >= 1, got p={self.p}, q={self.q}")
        if self.operator is Operator.MAXIMAL_PLANE:
            if self.alpha is not None:
                raise ValueError("plane-operator bounds carry no delta loss")
        elif self.alpha is None or self.alpha < 0:
            raise ValueError(f"plate bounds need alpha >= 0, got {self.alpha}")

    @property
    def is_plate(self) -> bool:
        return self.operator is Operator.MAXIMAL_PLATE

    def delta_power(self) -> Fraction:
        """The exponent alpha/p of the delta loss."""
        return self.alpha / self.p


@dataclass(frozen=True)
class Step:
    rule: Rule
    input: Union[BoundSpec, dict]
    output: BoundSpec


@dataclass
class DerivationTrace:
    steps: list = field(default_factory=list)
    name: Optional[str] = None

    @property
    def final(self) -> BoundSpec:
        return self.steps[-1].output

    def append(self, rule: Rule, inp, out: BoundSpec) -> BoundSpec:
        if self.steps and inp != self.steps[-1].output:
            raise ValueError("trace discontinuity: step input is not the previous output")
        self.steps.append(Step(rule, inp, out))
        return out

    def apply(self, rule: Rule, fn: Callable[..., BoundSpec], *args) -> BoundSpec:
        return self.append(rule, self.final, fn(self.final, *args))

    def extend(self, other: "DerivationTrace") -> None:
        for s in other.steps:
            self.append(s.rule, s.input, s.output)

    def check(self) -> None:
        """Validate the chaining and dimension-increment invariants."""
        for prev, cur in zip(self.steps, self.steps[1:]):
            if cur.input != prev.output:
                raise ValueError("trace discontinuity")
        for s in self.steps:
            if s.rule in (Rule.XRAY_STEP, Rule.INTERP_STEP, Rule.L2_STEP):
                if (s.output.d, s.output.k) != (s.input.d + 1, s.input.k + 1):
                    raise ValueError(f"{s.rule.value} must raise d and k by one")


# ---------------------------------------------------------------------------
# scalar helpers


def conjugate_exponent(p) -> Exponent:
    """Hoelder conjugate p/(p-1); infinity maps to 1."""
    if p == INF:
        return Fraction(1)
    p = _frac(p)
    if p <= 1:
        raise ValueError(f"conjugate exponent needs p > 1, got {p}")
    return p / (p - 1)


def _kcrit_defining(k, d: int, kind: KcritKind):
    exact = isinstance(k, (int, Fraction))
    two = Fraction(2) if exact else 2.0
    if kind is KcritKind.BOURGAIN:
        return two ** (k - 1) + k - d
    seven_thirds = Fraction(7, 3) if exact else 7.0 / 3.0
    return seven_thirds * two ** (k - 2) + k - d


def kcrit_residual(k, d: int, kind: KcritKind = KcritKind.KATZ_TAO):
    """Value of the defining function at ``k``; exact for integer or rational ``k``.

    The function is strictly increasing in ``k``, so its sign decides on which
    side of the critical dimension ``k`` lies.
    """
    return _kcrit_defining(k, d, KcritKind(kind))


def exceeds_kcrit(k: int, d: int, kind: KcritKind = KcritKind.KATZ_TAO) -> bool:
    """Exact test of ``k > kcrit(d)``."""
    return kcrit_residual(k, d, kind) > 0


def kcrit(d: int, kind: KcritKind = KcritKind.KATZ_TAO, tol: float = 1e-12) -> float:
    """Root of the critical-dimension relation, by bisection on [1, d]."""
    kind = KcritKind(kind)
    if d < 3:
        raise ValueError(f"kcrit needs d >= 3, got {d}")
    for k in range(1, d + 1):
        if kcrit_residual(k, d, kind) == 0:
            return float(k)
    lo, hi = 1.0, float(d)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _kcrit_defining(mid, d, kind) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# seeds and rules


def seed_bound(kind: SeedKind, n: int) -> BoundSpec:
    """Kakeya (k = 1) maximal bound on R^n.

    The published delta exponent -beta is converted to ``alpha = p * beta``.
    """
    kind = SeedKind(kind)
    if n < 2:
        raise ValueError(f"seed needs n >= 2, got {n}")
    if kind is SeedKind.KATZ_TAO:
        p = Fraction(4 * n + 3, 7)
        q = n + Fraction(3, 4)
        alpha = Fraction(3 * (n - 1), 7)
    elif kind is SeedKind.KATZ_TAO_WEAK:
        p = Fraction(4 * n, 7)
        if p <= 1:
            raise ValueError(f"weak Katz-Tao seed needs 4n/7 > 1, got n={n}")
        q = (n - 1) * conjugate_exponent(p)
        alpha = Fraction(3 * n, 7)
    else:
        p = Fraction(n + 2, 2)
        q = p
        alpha = Fraction(n - 2, 2)
    return BoundSpec(Operator.MAXIMAL_PLATE, n, 1, p, q, alpha, eps_loss=True)


def _require_plate(rule: str, b: BoundSpec):
    if not b.is_plate:
        raise RuleInapplicable(rule, "input must be a plate maximal bound (operator MaximalPlate)")


def _require_xray_hypotheses(rule: str, b: BoundSpec):
    _require_plate(rule, b)
    D = b.d + 1
    if b.p > D + 1:
        raise RuleInapplicable(rule, f"p <= d+1 with output d={D} (got p={b.p})")
    if b.k + 1 < 2:
        raise RuleInapplicable(rule, "output k >= 2")


def xray_step(b: BoundSpec) -> BoundSpec:
    """Lift a bound on R^(d-1) for (k-1)-plates to R^d and k-plates.

    p -> p d/(d+p-1), the delta power alpha/p is preserved, q -> min(q, d p').
    """
    _require_xray_hypotheses("XrayStep", b)
    D = b.d + 1
    p_new = b.p * D / (D + b.p - 1)
    q_new = b.q if b.p == 1 else min(b.q, D * conjugate_exponent(b.p))
    return BoundSpec(
        Operator.MAXIMAL_PLATE, D, b.k + 1, p_new, q_new,
        b.alpha * p_new / b.p, b.eps_loss,
    )


def interp_step(b: BoundSpec) -> BoundSpec:
    """Interpolate to L^(d+1) first, then lift: p -> (d+1)/2, alpha halves."""
    _require_xray_hypotheses("InterpStep", b)
    D = b.d + 1
    q_new = min((D + 1) * b.q / b.p, Fraction(D + 1))
    return BoundSpec(
        Operator.MAXIMAL_PLATE, D, b.k + 1, Fraction(D + 1, 2), q_new,
        b.alpha / 2, b.eps_loss,
    )


def q_restrict(b: BoundSpec, q_new) -> BoundSpec:
    """Lower the output exponent; free because G(d,k) carries a probability measure."""
    q_new = _exp(q_new)
    if not (1 <= q_new <= b.q):
        raise ValueError(f"q_restrict needs 1 <= q_new <= q={b.q}, got {q_new}")
    return replace(b, q=q_new)


def p_raise(b: BoundSpec, p_new) -> BoundSpec:
    """Interpolate with the trivial L^inf -> L^inf bound.

    Moving to a larger p keeps alpha fixed and scales q by p_new / p.
    """
    _require_plate("PRaise", b)
    p_new = _frac(p_new)
    if p_new < b.p:
        raise ValueError(f"p_raise cannot lower p (from {b.p} to {p_new})")
    q_new = b.q if b.q == INF else b.q * p_new / b.p
    return replace(b, p=p_new, q=q_new)


def weaken_alpha(b: BoundSpec, alpha_new) -> BoundSpec:
    """Replace alpha by a larger value (a weaker estimate since delta < 1)."""
    _require_plate("Weaken", b)
    alpha_new = _frac(alpha_new)
    if alpha_new < b.alpha:
        raise ValueError(f"weaken_alpha cannot lower alpha (from {b.alpha} to {alpha_new})")
    return replace(b, alpha=alpha_new)


def l2_step(b: BoundSpec) -> BoundSpec:
    """The L^2 cancellation step: alpha -> alpha - 1, or a plane bound when alpha < 1."""
    _require_plate("L2Step", b)
    if b.q != b.p:
        raise RuleInapplicable("L2Step", f"q = p (got q={b.q}, p={b.p}); apply q_restrict first")
    if b.p < 2:
        raise RuleInapplicable("L2Step", f"p >= 2 (got p={b.p})")
    D, K = b.d + 1, b.k + 1
    if b.alpha >= 1:
        return BoundSpec(Operator.MAXIMAL_PLATE, D, K, b.p, b.p, b.alpha - 1, b.eps_loss)
    return BoundSpec(Operator.MAXIMAL_PLANE, D, K, b.p, b.p, None, b.eps_loss,
                     support_unit_ball=True)


# ---------------------------------------------------------------------------
# pipelines


def _seeded(kind: SeedKind, n: int) -> DerivationTrace:
    t = DerivationTrace()
    t.append(Rule.SEED, {"kind": SeedKind(kind).value, "n": n}, seed_bound(kind, n))
    return t


def _check_dims(name: str, d: int, k: int):
    if not (2 <= k < d):
        raise RuleInapplicable(name, f"2 <= k < d (got d={d}, k={k})")


def sharp_p_trace(d: int, k: int) -> DerivationTrace:
    _check_dims("SharpP", d, k)
    t = _seeded(SeedKind.KATZ_TAO_WEAK, d - k + 1)
    for _ in range(k - 1):
        t.apply(Rule.XRAY_STEP, xray_step)
    return t


def nonl2_trace(d: int, k: int, seed: SeedKind = SeedKind.KATZ_TAO) -> DerivationTrace:
    """Seed on R^(d-k+1), then k-1 interpolated lifts.  k = 1 is the bare seed."""
    if not (1 <= k < d):
        raise RuleInapplicable("NonL2", f"1 <= k < d (got d={d}, k={k})")
    t = _seeded(seed, d - k + 1)
    for _ in range(k - 1):
        t.apply(Rule.INTERP_STEP, interp_step)
    return t


def _l2_once(t: DerivationTrace) -> None:
    b = t.final
    if b.p < 2:
        t.apply(Rule.P_RAISE, p_raise, 2)
    if t.final.q != t.final.p:
        t.apply(Rule.Q_RESTRICT, q_restrict, t.final.p)
    t.apply(Rule.L2_STEP, l2_step)


def l2_chain_trace(d: int, k: int, seed: SeedKind = SeedKind.KATZ_TAO) -> DerivationTrace:
    """NonL2 bound on R^(d-1) followed by one L^2 step, without range checks.

    When p falls below 2 (only for k = 2) p is first raised to 2 by
    interpolation with L^inf; that is one way to realize the larger p the
    k = 2 case needs.
    """
    _check_dims("L2", d, k)
    t = nonl2_trace(d - 1, k - 1, seed)
    _l2_once(t)
    return t


def l2_trace(d: int, k: int) -> DerivationTrace:
    _check_dims("L2", d, k)
    if k < 3:
        raise RuleInapplicable("L2", "3 <= k (the k = 2 case needs unspecified larger p, q)")
    if exceeds_kcrit(k, d):
        raise RuleInapplicable("L2", f"k <= kcrit(d) (k={k}, kcrit({d})={kcrit(d):.6f})")
    return l2_chain_trace(d, k)


def nak_trace(d: int, k: int, j: Optional[int] = None) -> DerivationTrace:
    """Derivation of the plane-operator bound with j spare iterations used on p."""
    name = "NakTheorem"
    j = 0 if j is None else j
    if not (4 <= k < d):
        raise RuleInapplicable(name, f"4 <= k < d (got d={d}, k={k})")
    if not exceeds_kcrit(k, d):
        raise RuleInapplicable(name, f"k > kcrit(d) (k={k}, kcrit({d})={kcrit(d):.6f})")
    if j != 0:
        if not (1 <= j <= k - 4):
            raise RuleInapplicable(name, f"j in [1, k-4] (got j={j}, k-4={k - 4})")
        if not exceeds_kcrit(k - j, d - j):
            raise RuleInapplicable(
                name, f"k-j > kcrit(d-j) (k-j={k - j}, kcrit({d - j})={kcrit(d - j):.6f})")
    d0, k0 = d - 2 - j, k - 2 - j
    t = nonl2_trace(d0, k0)
    alpha0, q0 = t.final.alpha, t.final.q
    for i in range(1, j + 1):
        t.apply(Rule.XRAY_STEP, xray_step)
        target = Fraction(t.final.d + 1, 2 + i)
        t.apply(Rule.P_RAISE, p_raise, target)
        t.apply(Rule.Q_RESTRICT, q_restrict, q0)
        t.apply(Rule.WEAKEN, weaken_alpha, alpha0)
    if t.final.alpha < 1:
        t.apply(Rule.WEAKEN, weaken_alpha, 1)
    _l2_once(t)
    _l2_once(t)
    if t.final.is_plate:
        raise RuleInapplicable(name, "final L2 step must reach the plane operator (alpha < 1)")
    return t


def dim_trace(d: int, k: int, seed: SeedKind = SeedKind.KATZ_TAO) -> DerivationTrace:
    """Best chain for a Hausdorff dimension bound, ending in an L^1 estimate."""
    _check_dims("Dim", d, k)
    candidates = [nonl2_trace(d, k, seed)]
    try:
        candidates.append(l2_chain_trace(d, k, seed))
    except RuleInapplicable:
        pass
    best = max(candidates, key=lambda t: dimension_from_bound(t.final))
    best.apply(Rule.Q_RESTRICT, q_restrict, 1)
    return best


def derive_pipeline(name, d: int, k: int, j: Optional[int] = None) -> DerivationTrace:
    name = Pipeline(name)
    if name is Pipeline.SHARP_P:
        t = sharp_p_trace(d, k)
    elif name is Pipeline.NON_L2:
        _check_dims("NonL2", d, k)
        t = nonl2_trace(d, k)
    elif name is Pipeline.L2:
        t = l2_trace(d, k)
    elif name is Pipeline.NAK_THEOREM:
        t = nak_trace(d, k, j)
    elif name is Pipeline.DIM_KT:
        t = dim_trace(d, k, SeedKind.KATZ_TAO)
    else:
        t = dim_trace(d, k, SeedKind.WOLFF)
    t.name = name.value
    t.check()
    return t


def closed_form(name, d: int, k: int, j: Optional[int] = None) -> dict:
    """The stated final exponents of each pipeline, epsilon dropped."""
    name = Pipeline(name)
    d, k = int(d), int(k)
    if name is Pipeline.SHARP_P:
        p = Fraction(d) / (k + Fraction(3, 4))
        return {"p": p, "alpha": d - k * p}
    if name is Pipeline.NON_L2:
        return {"p": Fraction(d + 1, 2), "q": Fraction(d + 1),
                "alpha": Fraction(3 * (d - k), 7 * 2 ** (k - 1))}
    if name is Pipeline.L2:
        return {"p": Fraction(d, 2), "q": Fraction(d, 2),
                "alpha": Fraction(3 * (d - k), 7 * 2 ** (k - 2)) - 1}
    if name is Pipeline.NAK_THEOREM:
        # the L^2 step needs p >= 2, which binds for small d
        return {"p": max(Fraction(2), Fraction(d - 1, 2 + (j or 0)))}
    return {"dim": hausdorff_bound(d, k, SeedKind.KATZ_TAO if name is Pipeline.DIM_KT
                                   else SeedKind.WOLFF)}


def matches_closed_form(trace: DerivationTrace) -> bool:
    b = trace.final
    target = closed_form(trace.name, b.d, b.k, _nak_j(trace))
    name = Pipeline(trace.name)
    if name in (Pipeline.DIM_KT, Pipeline.DIM_WOLFF):
        return dimension_from_bound(b) == target["dim"]
    got = {"p": b.p, "q": b.q, "alpha": b.alpha}
    return all(got[key] == val for key, val in target.items())


def _nak_j(trace: DerivationTrace) -> Optional[int]:
    if trace.name != Pipeline.NAK_THEOREM.value:
        return None
    return sum(1 for s in trace.steps if s.rule is Rule.XRAY_STEP)


# ---------------------------------------------------------------------------
# dimension bounds


def dimension_from_bound(b: BoundSpec) -> Fraction:
    """d - alpha, or d for a bounded plane operator (positive measure)."""
    if not b.is_plate:
        return Fraction(b.d)
    return min(Fraction(b.d), b.d - b.alpha)


def hausdorff_bound(d: int, k: int, seed: SeedKind = SeedKind.KATZ_TAO) -> Fraction:
    """Lower bound for the Hausdorff dimension of a (d,k) set."""
    seed = SeedKind(seed)
    if not (2 <= k < d):
        raise ValueError(f"need 2 <= k < d, got d={d}, k={k}")
    if seed is SeedKind.KATZ_TAO:
        a = Fraction(3 * (d - k), 7 * 2 ** (k - 2))
        b = Fraction(3 * (d - k), 7 * 2 ** (k - 1))
    elif seed is SeedKind.WOLFF:
        a = Fraction(d - k - 1, 2 ** (k - 1))
        b = Fraction(d - k - 1, 2 ** k)
    else:
        raise ValueError("dimension formulas exist for the KatzTao and Wolff seeds only")
    return min(Fraction(d), max(d - a + 1, d - b))
