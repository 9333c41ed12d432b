"""Experiment drivers: parameter sweeps with power-law fits, and numerical
checks of the inequalities and identities behind the exponent calculus.

Every driver is deterministic given its arguments (seeds included) and
returns a plain dataclass that :mod:`kplane.records` can serialize.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exponents import INF, conjugate_exponent
from .grassmann import Frame, HemisphereChart, _rng, haar_sample_batch, lifted_sample_batch, \
    moment_comparison, sphere_sample, split, probe_vectors
from .parallel import ordered_map
from .transforms import DEFAULT_HALF_WIDTH, GridFunction, PlateSpec, ball_volume, bump_mixture, \
    gaussian_mixture, highpass, indicator_ball, kplane_transform, lp_bands, maximal_plate, \
    plate_average, plate_volume, resample_fourier, sobolev_norm, xray, xray_l2_norm, \
    xray_plancherel_constant


# ---------------------------------------------------------------------------
# fits


def fit_power_law(xs, ys) -> tuple:
    """Least-squares line through (log x, log y): (slope, intercept, rms residual)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError(f"a power-law fit needs at least 3 points, got {len(xs)}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fits need positive data")
    lx, ly = np.log(xs), np.log(ys)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (slope * lx + intercept)
    return float(slope), float(intercept), float(math.sqrt(np.mean(res * res)))


@dataclass
class SweepResult:
    parameter: str
    points: list
    slope: float
    residual: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def fit(cls, parameter: str, values, measured, metadata=None) -> "SweepResult":
        slope, _, residual = fit_power_law(values, measured)
        pts = [(float(v), float(m)) for v, m in zip(values, measured)]
        return cls(parameter, pts, slope, residual, dict(metadata or {}))


def grid_spacing(resolution: int, half_width: float = DEFAULT_HALF_WIDTH) -> float:
    return 2.0 * half_width / resolution


# ---------------------------------------------------------------------------
# necessity examples for the maximal operator


class Family(enum.Enum):
    SMALL_BALL = "SmallBall"
    PLATE = "Plate"


def coordinate_frame(d: int, k: int) -> Frame:
    return Frame(np.eye(d)[:, :k])


def plate_indicator(d: int, n: int, frame: Frame, delta: float, center=None) -> GridFunction:
    a = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    plate = PlateSpec(frame, a, delta)
    return GridFunction.from_function(lambda x: plate.contains(x).astype(float), d, n)


def _odd(n: int) -> int:
    return n if n % 2 else n + 1


def lq_over_frames(values, q) -> float:
    """L^q norm for the probability measure sampled by ``values``."""
    v = np.asarray(values, dtype=float)
    if q == INF:
        return float(v.max())
    q = float(q)
    return float(np.mean(v ** q) ** (1.0 / q))


def necessity_sweep(family, d: int, k: int, p, q, deltas, resolution: int, n_frames: int = 512,
                    rng_seed=0, threads: int | None = None) -> SweepResult:
    """Fit the delta-exponent of ||M^k_delta f||_{L^q(G(d,k))} / ||f||_p for indicator inputs.

    ``SmallBall`` uses f = indicator of B(0, delta); ``Plate`` the indicator
    of the delta-plate through the origin along the first k coordinate axes.
    An even ``resolution`` is raised by one so that the origin is a node.
    The metadata records, per delta, the value at the input's own frame
    (the plate family's calibration row).
    """
    family = Family(family)
    deltas = [float(x) for x in deltas]
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")
    n = _odd(resolution)
    h = grid_spacing(n)
    if min(deltas) < 4 * h:
        raise ValueError(f"resolution {resolution} too coarse: need delta >= 4h = {4 * h:.4g}, "
                         f"smallest delta is {min(deltas)}")
    frames = haar_sample_batch(d, k, n_frames, rng_seed)
    own = coordinate_frame(d, k)
    measured, own_values, norms = [], [], []
    for delta in deltas:
        if family is Family.SMALL_BALL:
            f = indicator_ball(d, n, delta)
        else:
            f = plate_indicator(d, n, own, delta)
        vals = ordered_map(lambda F: maximal_plate(f, Frame(F), delta, method="grid"), frames, threads)
        num = lq_over_frames(vals, q)
        den = f.lp_norm(float(p))
        measured.append(num / den)
        norms.append(num)
        own_values.append(maximal_plate(f, own, delta, method="grid"))
    meta = {"family": family.value, "d": d, "k": k, "p": p, "q": q, "resolution": n,
            "n_frames": n_frames, "seed": rng_seed, "maximal_norms": norms,
            "own_frame_values": own_values}
    return SweepResult.fit("delta", deltas, measured, meta)


def conjectured_delta_exponent(d: int, k: int, p) -> Fraction:
    """k - d/p, the power of delta in the conjectured plate bound."""
    return k - Fraction(d) / Fraction(p)


# ---------------------------------------------------------------------------
# Hoelder inequality over k-planes


def holder_kplane_check(f: GridFunction, frame: Frame, delta: float, r: float = 2.0,
                        n_trials: int = 16, rng_seed=0, centers=None, n_samples: int = 16384,
                        center_radius: float = 0.5) -> list:
    """Ratios int_{L_delta(a)} f / (delta^((d-k)/r') ||y -> int_{L+y} f||_{L^r(L^perp)}).

    Plate centres a are ``centers`` if given, else ``n_trials`` uniform
    points of B(0, center_radius).
    """
    if r <= 1:
        raise ValueError(f"need r > 1, got {r}")
    if f.values.min() < 0:
        raise ValueError("f must be nonnegative")
    d, k = frame.d, frame.k
    g = kplane_transform(f, frame)
    r_conj = r / (r - 1)
    rhs = delta ** ((d - k) / r_conj) * g.lp_norm(r)
    if centers is None:
        rng = _rng(rng_seed, 0)
        u = rng.standard_normal((n_trials, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        centers = u * (center_radius * rng.random(n_trials) ** (1.0 / d))[:, None]
    vol = plate_volume(d, k, delta)
    out = []
    for i, a in enumerate(np.atleast_2d(centers)):
        lhs = vol * plate_average(f, PlateSpec(frame, a, delta), n_samples, _rng(rng_seed, i + 1))
        out.append(0.0 if lhs == 0 else lhs / rhs)
    return out


def random_smooth_nonnegative(d: int, n: int, rng, delta: float, n_bumps: int = 3,
                              width_range=(None, 0.3)) -> tuple:
    """Gaussian mixture with widths in [2 delta, 0.3] and centres in B(0, 0.4); also returns the centres."""
    lo = 2 * delta if width_range[0] is None else width_range[0]
    widths = rng.uniform(lo, width_range[1], n_bumps)
    g = rng.standard_normal((n_bumps, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    centers = g * (0.4 * rng.random(n_bumps) ** (1.0 / d))[:, None]
    weights = rng.uniform(0.2, 1.0, n_bumps)
    return gaussian_mixture(d, n, centers, widths, weights), centers


def holder_experiment(n_functions: int = 500, d: int = 3, k: int = 1, r: float = 2.0,
                      delta: float = 0.1, resolution: int = 40, trials_per_function: int = 4,
                      rng_seed=0, threads: int | None = None) -> list:
    """Ratios of :func:`holder_kplane_check` over random smooth nonnegative f.

    Plates sit at jittered bump centres, where the ratio is largest, and
    along a Haar-random frame per function.
    """
    def one(i):
        rng = _rng(rng_seed, i)
        f, centers = random_smooth_nonnegative(d, resolution, rng, delta)
        frame = Frame(haar_sample_batch(d, k, 1, _rng(rng_seed, n_functions + i))[0])
        pick = centers[rng.integers(0, len(centers), trials_per_function)]
        pick = pick + rng.normal(0.0, delta, pick.shape)
        return holder_kplane_check(f, frame, delta, r, centers=pick, rng_seed=_rng(rng_seed, 2 * n_functions + i))

    return [x for row in ordered_map(one, range(n_functions), threads) for x in row]


def holder_sharp_constant(d: int, k: int, r: float) -> float:
    """|B^(d-k)|^(1/r'): the best constant, approached by f = plate indicator as delta -> 0."""
    rp = r / (r - 1)
    return ball_volume(d - k) ** (1.0 / rp)


# ---------------------------------------------------------------------------
# x-ray L^2 identity


def mean_zero_mixture(d: int, n: int, rng, n_bumps: int = 4, width_range=(0.12, 0.25),
                      center_radius: float = 0.4) -> GridFunction:
    """Random Gaussian mixture whose integral vanishes.

    Widths at least ~3 grid cells keep the spectrum far below Nyquist at
    the default resolutions, so the functions are band-limited in practice.
    """
    widths = rng.uniform(*width_range, n_bumps)
    g = rng.standard_normal((n_bumps, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    centers = g * (center_radius * rng.random(n_bumps) ** (1.0 / d))[:, None]
    weights = rng.uniform(-1.0, 1.0, n_bumps)
    # the Gaussian with width s integrates to (2 pi)^(d/2) s^d
    weights[-1] = -np.dot(weights[:-1], widths[:-1] ** d) / widths[-1] ** d
    return gaussian_mixture(d, n, centers, widths, weights)


def radial_test_function(d: int, n: int, width: float = 0.2) -> GridFunction:
    """Mexican hat (mean zero, rotation invariant)."""
    def fn(x):
        s = np.sum(x * x, axis=-1) / (width * width)
        return (d - s) * np.exp(-s / 2)
    return GridFunction.from_function(fn, d, n)


def angular_test_function(d: int, n: int, width: float = 0.2) -> GridFunction:
    """x_1 times a Gaussian (odd, strongly direction dependent)."""
    def fn(x):
        return x[..., 0] / width * np.exp(-np.sum(x * x, axis=-1) / (2 * width * width))
    return GridFunction.from_function(fn, d, n)


def plancherel_ratio(f: GridFunction, directions, pad: int = 2, threads: int | None = None) -> float:
    """||f_xi||_{L^2(S x xi^perp)} / ||f||_{H^-1/2}."""
    num = xray_l2_norm(f, directions, support_radius=DEFAULT_HALF_WIDTH, threads=threads)
    return num / sobolev_norm(f, -0.5, pad=pad)


@dataclass
class PlancherelReport:
    ratios: list
    mean: float
    spread: float
    constant: float
    metadata: dict = field(default_factory=dict)


def plancherel_experiment(d: int = 3, resolution: int = 64, n_functions: int = 8,
                          n_directions: int = 256, rng_seed=0, pad: int = 2,
                          threads: int | None = None) -> PlancherelReport:
    if d < 3:
        raise ValueError("the x-ray L^2 identity needs d >= 3")
    dirs = sphere_sample(d, n_directions, "quasi_uniform", rng_seed=_rng(rng_seed, 0))
    ratios = []
    for i in range(n_functions):
        f = mean_zero_mixture(d, resolution, _rng(rng_seed, i + 1))
        ratios.append(plancherel_ratio(f, dirs, pad, threads))
    r = np.array(ratios)
    return PlancherelReport(ratios, float(r.mean()), float(r.std() / r.mean()),
                            xray_plancherel_constant(d),
                            {"d": d, "resolution": resolution, "n_functions": n_functions,
                             "n_directions": n_directions, "seed": rng_seed, "pad": pad})


# ---------------------------------------------------------------------------
# decay of the x-ray transform on high frequencies


def nyquist(resolution: int, half_width: float = DEFAULT_HALF_WIDTH) -> float:
    """Largest angular frequency pi / h of the grid."""
    return math.pi / grid_spacing(resolution, half_width)


def power_law_field(d: int, n: int, rng, exponent: float = 3.0, window: float = 0.4) -> GridFunction:
    """Gaussian random field with |F^(zeta)|^2 ~ max(|zeta|, 1)^-(exponent + 2), times a Gaussian window.

    After the high-pass at R the spectral mass sits at |zeta| ~ R with a
    power-law tail, so the x-ray ratio follows R^(-1/2) cleanly.
    """
    g = GridFunction.zeros(d, n)
    freqs = [2 * np.pi * np.fft.fftfreq(n, g.h)] * d
    grids = np.meshgrid(*freqs, indexing="ij", sparse=True)
    rad = np.sqrt(sum(x * x for x in grids))
    amp = np.where(rad > 0, np.maximum(rad, 1.0) ** (-(exponent + 2) / 2), 0.0)
    F = np.fft.ifftn(amp * np.fft.fftn(rng.standard_normal(g.shape))).real
    r2 = np.sum(g.points() ** 2, axis=-1)
    return g.like(np.exp(-r2 / (2 * window * window)) * F)


def shell_function(d: int, n: int, R0: float, envelope: float = 0.35) -> GridFunction:
    """sin(R0 |x|)/|x| under a Gaussian envelope: spectrum concentrated on |zeta| = R0."""
    def fn(x):
        r = np.linalg.norm(x, axis=-1)
        return np.sinc(R0 * r / np.pi) * R0 * np.exp(-r * r / (2 * envelope * envelope))
    return GridFunction.from_function(fn, d, n)


def highpass_ratios(f: GridFunction, radii, directions, pad: int = 2, threads: int | None = None) -> list:
    out = []
    for R in radii:
        fr = highpass(f, R, pad=pad, smooth=True)
        num = xray_l2_norm(fr, directions, support_radius=DEFAULT_HALF_WIDTH, threads=threads)
        out.append(num / fr.lp_norm(2))
    return out


def highpass_decay_experiment(d: int = 3, resolution: int = 128, radii=(2, 4, 8, 16),
                              n_functions: int = 4, n_directions: int = 32, rng_seed=0,
                              spectrum_exponent: float = 3.0, window: float = 0.4,
                              threads: int | None = None) -> SweepResult:
    """Fit the R-exponent of ||(f_R)_xi|| / ||f_R||_2, f_R = f with frequencies |zeta| <= R removed.

    The mask rises smoothly from 0 at R to 1 at 2R, applied with two-fold
    zero padding; ratios are averaged over ``n_functions`` random fields
    before fitting.
    """
    radii = [float(R) for R in radii]
    limit = nyquist(resolution) / 2
    if min(radii) <= 0 or max(radii) > limit:
        raise ValueError(f"radii must lie in (0, Nyquist/2] = (0, {limit:.4g}], got {radii}")
    dirs = sphere_sample(d, n_directions, "quasi_uniform", rng_seed=_rng(rng_seed, 0))
    table = []
    for i in range(n_functions):
        f = power_law_field(d, resolution, _rng(rng_seed, i + 1), spectrum_exponent, window)
        table.append(highpass_ratios(f, radii, dirs, threads=threads))
    mean = np.mean(table, axis=0)
    meta = {"d": d, "resolution": resolution, "n_functions": n_functions,
            "n_directions": n_directions, "seed": rng_seed, "spectrum_exponent": spectrum_exponent,
            "window": window, "per_function": [list(map(float, row)) for row in table]}
    return SweepResult.fit("R", radii, mean, meta)


# ---------------------------------------------------------------------------
# Littlewood-Paley control of the lower-dimensional maximal function


@dataclass
class LPMaximalReport:
    lhs: float
    rhs: float
    constant: float
    band_terms: list
    band_ratios: dict
    band_slope: float | None
    band_residual: float | None
    metadata: dict = field(default_factory=dict)


def _sliced_maximal(g: GridFunction, M: Frame, delta: float, upsample: int) -> float:
    fine = resample_fourier(g, upsample)
    return maximal_plate(fine, M, delta, method="grid")


def composition_constant(k: int) -> float:
    """2 |B^(k-1)| / |B^k|: a k-disc of radius 1/2 sits inside a unit segment times a (k-1)-disc."""
    return 2 * ball_volume(k - 1) / ball_volume(k)


def composition_check(f: GridFunction, frame: Frame, delta: float, upsample: int | None = None) -> tuple:
    """(M^k_delta[f](L), M^(k-1)_delta[f_xi](M)) for L = lift(xi, M), f >= 0.

    The first never exceeds :func:`composition_constant` times the second.
    """
    if f.values.min() < 0:
        raise ValueError("f must be nonnegative")
    if frame.k < 2:
        raise ValueError("need k >= 2 so that the slice carries a (k-1)-plane")
    chart = HemisphereChart(f.d)
    xi, M = split(frame, chart)
    if upsample is None:
        upsample = max(1, math.ceil(4 * f.h / delta))
    full = maximal_plate(f, frame, delta, method="grid")
    return full, _sliced_maximal(xray(f, xi, chart), M, delta, upsample)


def scale_comparison(f: GridFunction, frame: Frame, delta: float, j: int, upsample: int | None = None) -> float:
    """M^(k-1)_delta[|(f_j)_xi|](M) / M^(k-1)_(2^-j)[|(f_j)_xi|](M) for 2^-j >= delta."""
    wide = 2.0 ** -j
    if not delta <= wide <= 0.5:
        raise ValueError(f"need delta <= 2^-j <= 1/2, got delta={delta}, j={j}")
    chart = HemisphereChart(f.d)
    xi, M = split(frame, chart)
    if upsample is None:
        upsample = max(1, math.ceil(4 * f.h / delta))
    s = xray(lp_bands(f, [j])[0], xi, chart)
    if not np.any(s.values):
        raise ValueError(f"band {j} holds no grid frequencies")
    s = s.like(np.abs(s.values))
    return _sliced_maximal(s, M, delta, upsample) / _sliced_maximal(s, M, wide, upsample)


def lp_maximal_decomposition_check(f: GridFunction, frame: Frame, delta: float, upsample: int | None = None,
                                   band_directions: int = 0, rng_seed=0, require_nonnegative: bool = True,
                                   min_band_energy: float = 1e-6, threads: int | None = None) -> LPMaximalReport:
    """Compare M^(k-1)_delta[f_xi](M) with sum_j M^(k-1)_delta[|(f_j)_xi|](M), j = 0 .. |log2 delta| + 1.

    xi is the first column of ``frame`` and M the remaining plane in the
    chart coordinates of xi^perp.  The (d-1)-dimensional slices are
    resampled onto a grid fine enough for plates of thickness delta.

    With ``band_directions > 0`` also returns, for each band carrying more
    than ``min_band_energy`` of the energy, ||(f_j)_xi||_{L^2(S x xi^perp)}
    / ||f_j||_2 and its fitted slope against 2^j over the bands j >= 2
    whose frequencies stay below half the grid Nyquist frequency.
    """
    if require_nonnegative and f.values.min() < 0:
        raise ValueError("f must be nonnegative")
    if require_nonnegative:
        f.require_unit_ball_support()
    if frame.k < 2:
        raise ValueError("need k >= 2 so that the slice carries a (k-1)-plane")
    chart = HemisphereChart(f.d)
    xi, M = split(frame, chart)
    if upsample is None:
        upsample = max(1, math.ceil(4 * f.h / delta))
    jmax = int(math.floor(abs(math.log2(delta)))) + 1
    bands = lp_bands(f, range(jmax + 1))
    lhs = _sliced_maximal(xray(f, xi, chart), M, delta, upsample)

    def term(fj):
        s = xray(fj, xi, chart)
        return _sliced_maximal(s.like(np.abs(s.values)), M, delta, upsample)

    terms = ordered_map(term, bands, threads)
    rhs = math.fsum(terms)
    ratios, slope, residual, js = {}, None, None, []
    if band_directions:
        dirs = sphere_sample(f.d, band_directions, "quasi_uniform", rng_seed=_rng(rng_seed, 0))
        total = f.lp_norm(2) ** 2
        for j, fj in enumerate(lp_bands(f)):
            e = fj.lp_norm(2)
            if e * e > min_band_energy * total:
                ratios[j] = xray_l2_norm(fj, dirs, support_radius=DEFAULT_HALF_WIDTH, threads=threads) / e
        top = math.pi / f.h / 2
        js = [j for j in ratios if j >= 2 and 2.0 ** j <= top]
        if len(js) >= 3:
            slope, _, residual = fit_power_law([2.0 ** j for j in js], [ratios[j] for j in js])
    return LPMaximalReport(lhs, rhs, lhs / rhs if rhs > 0 else math.inf, terms, ratios, slope,
                           residual, {"delta": delta, "upsample": upsample, "jmax": jmax, "fit_bands": js})


def random_bump_function(d: int, n: int, rng, n_bumps: int = 3) -> GridFunction:
    """Nonnegative smooth function supported in the unit ball."""
    radii = rng.uniform(0.15, 0.4, n_bumps)
    g = rng.standard_normal((n_bumps, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    dist = (1.0 - radii) * rng.random(n_bumps) ** (1.0 / d) * 0.95
    return bump_mixture(d, n, g * dist[:, None], radii, rng.uniform(0.2, 1.0, n_bumps))


def lp_maximal_experiment(n_functions: int = 20, d: int = 3, k: int = 2, delta: float = 1 / 32,
                          resolution: int = 64, rng_seed=0, band_directions: int = 0,
                          threads: int | None = None) -> list:
    reports = []
    for i in range(n_functions):
        rng = _rng(rng_seed, i)
        f = random_bump_function(d, resolution, rng)
        frame = Frame(lifted_sample_batch(d, k, 1, _rng(rng_seed, n_functions + i))[0])
        reports.append(lp_maximal_decomposition_check(f, frame, delta, band_directions=band_directions,
                                                      rng_seed=rng_seed, threads=threads))
    return reports


# ---------------------------------------------------------------------------
# Grassmannian pushforward


def graproduct_experiment(d: int, k: int, n_samples: int = 100_000, rng_seed=0) -> list:
    """Moment z-scores of Haar frames against frames lifted from (xi, M)."""
    a = haar_sample_batch(d, k, n_samples, _rng(rng_seed, 0))
    b = lifted_sample_batch(d, k, n_samples, _rng(rng_seed, 1))
    return moment_comparison(a, b, probe_vectors(d))


# ---------------------------------------------------------------------------
# admissible mixed-norm exponents


def xray_conjecture_check(p, q, r, d: int) -> tuple:
    """(r < inf, p == r d / (d + r - 1), q <= r' d) with exact rationals."""
    if r != INF and r < 1:
        raise ValueError(f"need r >= 1, got {r}")
    p = Fraction(p)
    finite = r != INF
    if finite:
        r = Fraction(r)
        on_line = p == r * d / (d + r - 1)
    else:
        on_line = p == d
    rp = INF if r == 1 else conjugate_exponent(r)
    q_ok = True if rp == INF else (q != INF and Fraction(q) <= rp * d)
    return finite, on_line, q_ok
