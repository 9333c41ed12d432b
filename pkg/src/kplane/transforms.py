"""Grid functions and the operators acting on them.

Functions are sampled at the nodes of a regular grid and extended by zero
outside the grid box; between nodes they are multilinearly interpolated.
Frequencies are angular, ``zeta = 2*pi*m / (n*h)``, so the band
``|zeta| <= 1`` corresponds to the continuous Fourier multiplier
``chi_{B(0,1)}`` under ``f^(zeta) = int f(x) exp(-i x.zeta) dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import map_coordinates
from scipy.signal import fftconvolve, resample
from scipy.special import gamma

from .grassmann import Frame, HemisphereChart, _rng
from .parallel import ordered_map

DEFAULT_HALF_WIDTH = 1.25
_CHUNK = 1 << 20


def ball_volume(m: int, radius: float = 1.0) -> float:
    return math.pi ** (m / 2) / gamma(m / 2 + 1) * radius ** m


def sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^(m-1) in R^m."""
    return 2 * math.pi ** (m / 2) / gamma(m / 2)


@dataclass
class GridFunction:
    """Samples ``values[i]`` of a function at ``origin + h * i``."""

    values: np.ndarray
    h: float
    origin: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.origin = np.broadcast_to(np.asarray(self.origin, dtype=float), (self.values.ndim,)).copy()
        self.h = float(self.h)
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")

    @classmethod
    def zeros(cls, d: int, n: int, half_width: float = DEFAULT_HALF_WIDTH) -> "GridFunction":
        """Cell-centred grid with n nodes per axis on [-half_width, half_width]^d."""
        h = 2.0 * half_width / n
        return cls(np.zeros((n,) * d), h, np.full(d, -half_width + h / 2))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], d: int, n: int,
                      half_width: float = DEFAULT_HALF_WIDTH) -> "GridFunction":
        g = cls.zeros(d, n, half_width)
        g.values = np.asarray(fn(g.points()), dtype=float).reshape(g.shape)
        return g

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    def like(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(values, self.h, self.origin)

    def axes(self) -> list:
        return [self.origin[i] + self.h * np.arange(n) for i, n in enumerate(self.shape)]

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (d,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def box(self) -> tuple:
        lo = self.origin - self.h / 2
        hi = self.origin + self.h * (np.array(self.shape) - 0.5)
        return lo, hi

    def interp(self, x: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at points ``x`` (last axis d); zero outside."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        idx = ((x.reshape(-1, self.d) - self.origin) / self.h).T
        out = map_coordinates(self.values, idx, order=1, mode="constant", cval=0.0,
                              prefilter=False)
        return out.reshape(lead)

    def integral(self) -> float:
        return float(self.values.sum() * self.h ** self.d)

    def lp_norm(self, p: float = 2.0) -> float:
        a = np.abs(self.values)
        if p == math.inf:
            return float(a.max())
        return float((np.sum(a ** p) * self.h ** self.d) ** (1.0 / p))

    def support_outside_ball(self, radius: float = 1.0) -> float:
        """Largest |value| at nodes outside B(0, radius)."""
        r = np.linalg.norm(self.points(), axis=-1)
        outside = np.abs(self.values[r > radius])
        return float(outside.max()) if outside.size else 0.0

    def require_unit_ball_support(self, tol: float = 1e-12) -> None:
        scale = max(1.0, float(np.abs(self.values).max()))
        bad = self.support_outside_ball(1.0)
        if bad > tol * scale:
            raise ValueError(f"function is not supported in the unit ball (|f| = {bad:.3g} outside)")


def indicator_ball(d: int, n: int, radius: float = 1.0, center=None,
                   half_width: float = DEFAULT_HALF_WIDTH) -> GridFunction:
    c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    return GridFunction.from_function(
        lambda x: (np.linalg.norm(x - c, axis=-1) <= radius).astype(float), d, n, half_width)


def gaussian_mixture(d: int, n: int, centers, widths, weights,
                     half_width: float = DEFAULT_HALF_WIDTH) -> GridFunction:
    centers = np.atleast_2d(centers)

    def fn(x):
        out = np.zeros(x.shape[:-1])
        for c, s, w in zip(centers, widths, weights):
            out += w * np.exp(-np.sum((x - c) ** 2, axis=-1) / (2 * s * s))
        return out

    return GridFunction.from_function(fn, d, n, half_width)


def bump_mixture(d: int, n: int, centers, radii, weights,
                 half_width: float = DEFAULT_HALF_WIDTH) -> GridFunction:
    """Sum of compactly supported C-infinity bumps w * exp(1 - 1/(1 - |x-c|^2/r^2))."""
    centers = np.atleast_2d(centers)

    def fn(x):
        out = np.zeros(x.shape[:-1])
        for c, r, w in zip(centers, radii, weights):
            s = np.sum((x - c) ** 2, axis=-1) / (r * r)
            inside = s < 1
            out[inside] += w * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out

    return GridFunction.from_function(fn, d, n, half_width)


# ---------------------------------------------------------------------------
# plane integrals


def _subgrid_nodes(f: GridFunction, m: int) -> np.ndarray:
    """Nodes of the m-dimensional grid sharing the geometry of f's first m axes."""
    axes = f.axes()[:m]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _midpoints(T: float, step: float) -> np.ndarray:
    n = max(1, int(math.ceil(2 * T / step)))
    s = 2 * T / n
    return -T + s * (np.arange(n) + 0.5), s


def _default_radius(f: GridFunction) -> float:
    lo, hi = f.box()
    return float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))


def _plane_sums(f: GridFunction, plane: np.ndarray, perp: np.ndarray, offsets: np.ndarray,
                step: float, R: float) -> np.ndarray:
    """Midpoint-rule integrals over offset + span(plane), offsets in perp coordinates."""
    k = plane.shape[1]
    if step <= 0:
        raise ValueError("quadrature step must be positive")
    t, ts = _midpoints(R, step)
    tk = np.stack(np.meshgrid(*([t] * k), indexing="ij"), axis=-1).reshape(-1, k)
    tk = tk[np.sum(tk ** 2, axis=1) < R * R]
    along = tk @ plane.T
    base = offsets @ perp.T
    chunk = max(1, _CHUNK // max(1, len(along)))
    vals = np.empty(len(base))
    for s in range(0, len(base), chunk):
        pts = base[s:s + chunk, None, :] + along[None, :, :]
        vals[s:s + chunk] = f.interp(pts).sum(axis=1)
    return vals * ts ** k


def plane_integrals(f: GridFunction, plane: np.ndarray, perp: np.ndarray, step: float | None = None,
                    support_radius: float | None = None) -> GridFunction:
    """Integrals of f over the planes y + span(plane), y in span(perp).

    ``plane`` is d x k and ``perp`` is d x (d-k), both orthonormal.  The
    output lives on the (d-k)-grid with f's spacing over f's first d-k axes,
    its coordinates read in the ``perp`` basis.  Quadrature is the composite
    midpoint rule with spacing ``step`` on the k-ball of radius
    ``support_radius``; f is treated as zero beyond that radius.
    """
    d, k = f.d, plane.shape[1]
    step = f.h if step is None else step
    R = _default_radius(f) if support_radius is None else support_radius
    ys = _subgrid_nodes(f, d - k).reshape(-1, d - k)
    active = np.nonzero(np.sum(ys ** 2, axis=1) < R * R)[0]
    out = np.zeros(len(ys))
    out[active] = _plane_sums(f, plane, perp, ys[active], step, R)
    return GridFunction(out.reshape(f.shape[: d - k]), f.h, f.origin[: d - k])


def xray(f: GridFunction, xi, chart: HemisphereChart | None = None, step: float | None = None,
         support_radius: float | None = None) -> GridFunction:
    """f_xi(y) = int f(y + t xi) dt on the (d-1)-grid identified with xi^perp via T_xi^{-1}."""
    xi = np.asarray(xi, dtype=float)
    chart = chart or HemisphereChart(f.d)
    return plane_integrals(f, xi[:, None], chart.perp_basis(xi), step, support_radius)


def kplane_transform(f: GridFunction, frame: Frame, step: float | None = None,
                     support_radius: float | None = None) -> GridFunction:
    """Integrals over the translates x + L, x in the orthogonal complement of L."""
    return plane_integrals(f, frame.basis, frame.complement(), step, support_radius)


def xray_l2_norm(f: GridFunction, directions: Sequence, chart: HemisphereChart | None = None,
                 step: float | None = None, support_radius: float | None = None,
                 threads: int | None = None) -> float:
    """L^2 norm of the x-ray transform over S^(d-1) x xi^perp, sphere measure normalized.

    The direction loop may run on ``threads`` workers; the per-direction
    sums are added in direction order either way.
    """
    if f.d < 3:
        raise ValueError("the L^2 x-ray identity needs d >= 3")
    chart = chart or HemisphereChart(f.d)

    def sq(xi):
        g = xray(f, xi, chart, step, support_radius)
        return float(np.sum(g.values ** 2)) * g.h ** g.d

    parts = ordered_map(sq, directions, threads)
    return math.sqrt(math.fsum(parts) / len(parts))


# ---------------------------------------------------------------------------
# plates and maximal operators


@dataclass
class PlateSpec:
    """delta-neighbourhood of the k-disc B(a, 1/2) cap (L + a), taken as a cylinder."""

    frame: Frame
    center: np.ndarray
    delta: float

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if not 0 < self.delta <= 0.5:
            raise ValueError(f"plate thickness must lie in (0, 1/2], got {self.delta}")

    def volume(self) -> float:
        return plate_volume(self.frame.d, self.frame.k, self.delta)

    def contains(self, x: np.ndarray) -> np.ndarray:
        return _in_cylinder(np.asarray(x) - self.center, self.frame.basis, self.delta)


def plate_volume(d: int, k: int, delta: float) -> float:
    return ball_volume(k, 0.5) * ball_volume(d - k, delta)


def _in_cylinder(z: np.ndarray, basis: np.ndarray, delta: float) -> np.ndarray:
    u = z @ basis
    along2 = np.sum(u * u, axis=-1)
    perp2 = np.sum(z * z, axis=-1) - along2
    return (along2 <= 0.25) & (perp2 <= delta * delta)


def _uniform_ball(rng: np.random.Generator, n: int, m: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((n, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(n) ** (1.0 / m))[:, None]


def plate_offsets(frame: Frame, delta: float, n_samples: int, rng_seed=0) -> np.ndarray:
    """Uniform samples of the plate centred at the origin, shape (n_samples, d)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = _rng(rng_seed)
    u = _uniform_ball(rng, n_samples, frame.k, 0.5)
    w = _uniform_ball(rng, n_samples, frame.d - frame.k, delta)
    return u @ frame.basis.T + w @ frame.complement().T


def _require_center_in_box(f: GridFunction, a: np.ndarray):
    lo, hi = f.box()
    if np.any(a < lo) or np.any(a > hi):
        raise ValueError(f"plate centre {a} lies outside the grid box")


def plate_average(f: GridFunction, plate: PlateSpec, n_samples: int = 4096, rng_seed=0) -> float:
    """Monte-Carlo mean of f over the plate; f vanishes outside its box."""
    _require_center_in_box(f, plate.center)
    offs = plate_offsets(plate.frame, plate.delta, n_samples, rng_seed)
    return float(f.interp(plate.center + offs).mean())


def center_lattice(f: GridFunction, spacing: float) -> np.ndarray:
    """spacing * Z^d intersected with the grid box, shape (m, d)."""
    lo, hi = f.box()
    axes = [spacing * np.arange(math.ceil(l / spacing), math.floor(u / spacing) + 1)
            for l, u in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.d)


def _support_box(f: GridFunction):
    nz = np.nonzero(f.values)
    if len(nz[0]) == 0:
        return None
    lo = np.array([ax.min() for ax in nz]) * f.h + f.origin
    hi = np.array([ax.max() for ax in nz]) * f.h + f.origin
    return lo - f.h, hi + f.h


def maximal_plate(f: GridFunction, frame: Frame, delta: float, translation_spacing: float | None = None,
                  n_samples: int = 4096, rng_seed=0, method: str = "mc") -> float:
    """sup over plate centres of the plate average of f.

    ``method="mc"`` maximizes Monte-Carlo plate averages (one fixed sample
    set, reused for every centre) over ``translation_spacing * Z^d``.
    ``method="grid"`` instead correlates f with the rasterized plate on the
    grid itself, so centres run over the grid nodes.
    """
    if method == "grid":
        return float(plate_average_field(f, frame, delta).values.max())
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    spacing = delta if translation_spacing is None else translation_spacing
    if spacing > delta:
        raise ValueError("translation spacing must not exceed delta")
    centers = center_lattice(f, spacing)
    sb = _support_box(f)
    if sb is None:
        return 0.0
    reach = math.sqrt(0.25 + delta * delta)
    keep = np.all((centers >= sb[0] - reach) & (centers <= sb[1] + reach), axis=1)
    best = 0.0 if not keep.all() else -math.inf
    centers = centers[keep]
    offs = plate_offsets(frame, delta, n_samples, rng_seed)
    chunk = max(1, _CHUNK // n_samples)
    for s in range(0, len(centers), chunk):
        pts = centers[s:s + chunk, None, :] + offs[None, :, :]
        best = max(best, float(f.interp(pts).mean(axis=1).max()))
    return best


def plate_kernel(frame: Frame, delta: float, h: float, supersample: int = 4) -> np.ndarray:
    """Weights w(z) = int_plate phi(x - z) dx on the offsets z of an h-grid.

    ``phi`` is the tensor hat function of the multilinear interpolant, so
    ``sum_z f(a + z) w(z) / volume`` is the plate average of interpolated f,
    the quantity the Monte-Carlo estimator samples.  The integral over the
    hat's support is a ``2 * supersample`` point midpoint rule per axis.
    """
    d = frame.d
    reach = math.sqrt(0.25 + delta * delta)
    r = int(math.ceil(reach / h)) + 1
    offsets = h * np.arange(-r, r + 1)
    m = 2 * supersample
    u = h * (2 * (np.arange(m) + 0.5) / m - 1)
    sub = np.stack(np.meshgrid(*([u] * d), indexing="ij"), axis=-1).reshape(-1, d)
    hat = np.prod(1 - np.abs(sub) / h, axis=1)
    hat /= hat.sum()
    nodes = np.stack(np.meshgrid(*([offsets] * d), indexing="ij"), axis=-1).reshape(-1, d)
    K = np.zeros(len(nodes))
    near = np.nonzero(np.linalg.norm(nodes, axis=1) <= reach + h * math.sqrt(d))[0]
    chunk = max(1, _CHUNK // len(sub))
    for s in range(0, len(near), chunk):
        idx = near[s:s + chunk]
        inside = _in_cylinder(nodes[idx, None, :] + sub[None, :, :], frame.basis, delta)
        K[idx] = inside @ hat
    return K.reshape((len(offsets),) * d)


def plate_average_field(f: GridFunction, frame: Frame, delta: float, supersample: int = 4) -> GridFunction:
    """Plate averages of f centred at every grid node (FFT correlation)."""
    K = plate_kernel(frame, delta, f.h, supersample)
    K /= K.sum()
    flipped = K[(slice(None, None, -1),) * f.d]
    return f.like(fftconvolve(f.values, flipped, mode="same"))


def maximal_plane(f: GridFunction, frame: Frame, quad_spacing: float | None = None,
                  radius: float = 1.2) -> float:
    """sup over x in L^perp of int_{(x+L) cap B(0, radius)} f, for f supported in B(0,1).

    Offsets run over ``quad_spacing * Z^(d-k)`` in the complement; the same
    spacing is used for the k-dimensional midpoint rule.
    """
    f.require_unit_ball_support()
    s = f.h if quad_spacing is None else quad_spacing
    m = f.d - frame.k
    ticks = s * np.arange(-math.floor(radius / s), math.floor(radius / s) + 1)
    offs = np.stack(np.meshgrid(*([ticks] * m), indexing="ij"), axis=-1).reshape(-1, m)
    offs = offs[np.sum(offs ** 2, axis=1) <= 1.0 + s * s]
    vals = _plane_sums(f, frame.basis, frame.complement(), offs, s, radius)
    return float(max(vals.max(), 0.0)) if np.any(vals) else 0.0


# ---------------------------------------------------------------------------
# Fourier side


def angular_frequencies(f: GridFunction, pad: int = 1) -> np.ndarray:
    """|zeta| on the (optionally zero-padded) DFT grid, full (complex FFT) layout."""
    freqs = [2 * np.pi * np.fft.fftfreq(n * pad, f.h) for n in f.shape]
    grids = np.meshgrid(*freqs, indexing="ij", sparse=True)
    return np.sqrt(sum(g * g for g in grids))


def band_index(radius: np.ndarray) -> np.ndarray:
    """Littlewood-Paley index: 0 for |zeta| <= 1, j for 2^(j-1) < |zeta| <= 2^j."""
    j = np.zeros(radius.shape, dtype=int)
    big = radius > 1
    j[big] = np.ceil(np.log2(radius[big])).astype(int)
    # guard log2 rounding at exact powers of two
    j[big & (radius > 2.0 ** j)] += 1
    j[big & (radius <= 2.0 ** (j - 1))] -= 1
    return j


def n_bands(f: GridFunction) -> int:
    return int(band_index(angular_frequencies(f)).max()) + 1


def lp_band(f: GridFunction, j: int) -> GridFunction:
    """f_j: the Fourier multiplier chi of band j applied to f."""
    return lp_bands(f, [j])[0]


def lp_bands(f: GridFunction, js: Sequence[int] | None = None) -> list:
    js = range(n_bands(f)) if js is None else js
    fh = np.fft.fftn(f.values)
    idx = band_index(angular_frequencies(f))
    return [f.like(np.fft.ifftn(np.where(idx == j, fh, 0)).real) for j in js]


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def _rfft_radius(shape, h: float) -> np.ndarray:
    freqs = [2 * np.pi * np.fft.fftfreq(n, h) for n in shape[:-1]]
    freqs.append(2 * np.pi * np.fft.rfftfreq(shape[-1], h))
    grids = np.meshgrid(*freqs, indexing="ij", sparse=True)
    return np.sqrt(sum(g * g for g in grids))


def highpass(f: GridFunction, R: float, pad: int = 1, smooth: bool = False) -> GridFunction:
    """Remove the frequencies |zeta| <= R.

    The default is the sharp mask on the grid's own DFT lattice.  ``pad``
    zero-pads by that factor before masking (so the mask acts on the
    transform of f extended by zero) and crops back afterwards.  With
    ``smooth`` the multiplier rises from 0 at |zeta| = R to 1 at 2R along
    :func:`smooth_step`, which keeps the filtered function localized.
    """
    s = [n * pad for n in f.shape]
    axes = list(range(f.d))
    fh = np.fft.rfftn(f.values, s=s, axes=axes)
    rad = _rfft_radius(s, f.h)
    m = smooth_step(rad / R - 1.0) if smooth else (rad > R)
    out = np.fft.irfftn(fh * m, s=s, axes=axes)
    return f.like(out[tuple(slice(0, n) for n in f.shape)])


def resample_fourier(f: GridFunction, factor: int) -> GridFunction:
    """Band-limited (periodic) interpolation onto a grid ``factor`` times finer.

    The first node is kept, so the new origin equals the old one.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return f.like(f.values.copy())
    v = f.values
    for ax in range(f.d):
        v = resample(v, v.shape[ax] * factor, axis=ax)
    return GridFunction(v, f.h / factor, f.origin)


def sobolev_norm(f: GridFunction, s: float, pad: int = 1) -> float:
    """Homogeneous Sobolev norm (2 pi)^(-d) int |f^|^2 |zeta|^(2s), zero frequency omitted.

    ``pad`` zero-pads the grid by that factor per axis to refine the
    frequency lattice; f is taken to vanish outside its box either way.
    """
    if s <= -f.d / 2:
        raise ValueError(f"need s > -d/2 = {-f.d / 2}, got {s}")
    if pad > 1:
        fh = np.fft.fftn(f.values, s=[n * pad for n in f.shape], axes=list(range(f.d)))
    else:
        fh = np.fft.fftn(f.values)
    rad = angular_frequencies(f, pad)
    weight = np.zeros(rad.shape)
    nz = rad > 0
    weight[nz] = rad[nz] ** (2 * s)
    # |h^d DFT|^2 * (1 / box volume) is the Riemann sum for (2 pi)^(-d) dzeta
    n_total = np.prod([n * pad for n in f.shape])
    total = np.sum(np.abs(fh) ** 2 * weight) * f.h ** f.d / n_total
    return float(math.sqrt(total))


def xray_plancherel_constant(d: int) -> float:
    """C_d in |f_xi|_{L^2(S^(d-1) x xi^perp)} = C_d |f|_{H^(-1/2)}, sphere measure normalized.

    Fourier slice plus polar coordinates give C_d^2 = 2 pi |S^(d-2)| / |S^(d-1)|
    for the normalization of :func:`sobolev_norm`.
    """
    return math.sqrt(2 * math.pi * sphere_area(d - 1) / sphere_area(d))
