"""Points of the Grassmannian G(d,k) as orthonormal frames, and two samplers
for its rotation-invariant probability measure.

``haar_sample`` draws the span of the first k columns of a Haar orthogonal
matrix.  ``lift`` builds span(xi, T_xi^{-1} M) from a direction and a point
of G(d-1,k-1); pushing uniform xi and Haar M through it gives the same
measure, which is what ``moment_comparison`` checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _rng(seed, index=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = [seed] if index is None else [seed, index]
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class Frame:
    """k orthonormal columns in R^d spanning a point of G(d,k)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.ndim != 2 or b.shape[1] > b.shape[0]:
            raise ValueError(f"basis must be d x k with k <= d, got shape {b.shape}")
        object.__setattr__(self, "basis", b)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def gram_error(self) -> float:
        return float(np.abs(self.basis.T @ self.basis - np.eye(self.k)).max())

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def complement(self) -> np.ndarray:
        """Orthonormal basis (d x (d-k)) of the orthogonal complement."""
        q, _ = np.linalg.qr(np.hstack([self.basis, np.eye(self.d)]), mode="complete")
        return q[:, self.k:]

    def same_plane(self, other: "Frame", tol: float = 1e-10) -> bool:
        return bool(np.abs(self.projector() - other.projector()).max() < tol)

    def rotated(self, R: np.ndarray) -> "Frame":
        return Frame(R @ self.basis)

    def to_rows(self) -> list:
        """Row lists of 17-significant-digit decimal strings."""
        return [[format(float(x), ".17g") for x in row] for row in self.basis]

    @classmethod
    def from_rows(cls, rows) -> "Frame":
        return cls(np.array([[float(x) for x in row] for row in rows]))


def _haar_orthogonal(z: np.ndarray) -> np.ndarray:
    """Orthogonal factor of Gaussian matrices with the triangular diagonal made positive."""
    q, r = np.linalg.qr(z)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def haar_sample(d: int, k: int, rng_seed=0) -> Frame:
    if not 1 <= k < d:
        raise ValueError(f"need 1 <= k < d, got d={d}, k={k}")
    z = _rng(rng_seed).standard_normal((d, d))
    return Frame(_haar_orthogonal(z)[:, :k])


def haar_sample_batch(d: int, k: int, n: int, rng_seed=0) -> np.ndarray:
    """``n`` independent Haar frames as an (n, d, k) array."""
    if not 1 <= k < d:
        raise ValueError(f"need 1 <= k < d, got d={d}, k={k}")
    z = _rng(rng_seed).standard_normal((n, d, d))
    return _haar_orthogonal(z)[:, :, :k]


def random_rotation(d: int, rng_seed=0) -> np.ndarray:
    q = _haar_orthogonal(_rng(rng_seed).standard_normal((d, d)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class HemisphereChart:
    """Orthogonal identifications T_xi : xi^perp -> R^(d-1).

    For xi in the closed upper hemisphere (xi_d >= 0) use the Householder
    reflection H sending xi to -e_d; for the open lower hemisphere the one
    sending xi to e_d.  Either way H maps xi^perp onto e_d^perp = R^(d-1) x {0},
    and H depends continuously on xi within each hemisphere.
    """

    def __init__(self, d: int):
        if d < 2:
            raise ValueError("charts need d >= 2")
        self.d = d

    def reflection(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if abs(np.linalg.norm(xi) - 1.0) > 1e-10:
            raise ValueError("xi must be a unit vector")
        e = np.zeros(self.d)
        e[-1] = 1.0
        v = xi + e if xi[-1] >= 0 else xi - e
        return np.eye(self.d) - 2.0 * np.outer(v, v) / (v @ v)

    def forward(self, xi: np.ndarray, x: np.ndarray) -> np.ndarray:
        """T_xi applied to vectors ``x`` (last axis d) lying in xi^perp."""
        H = self.reflection(xi)
        return (np.asarray(x) @ H.T)[..., :-1]

    def inverse(self, xi: np.ndarray, y: np.ndarray) -> np.ndarray:
        """T_xi^{-1}: coordinates in R^(d-1) (last axis) to points of xi^perp."""
        H = self.reflection(xi)
        return np.asarray(y) @ H[:, :-1].T

    def perp_basis(self, xi: np.ndarray) -> np.ndarray:
        """d x (d-1) matrix whose columns are T_xi^{-1} e_1, ..., T_xi^{-1} e_(d-1)."""
        return self.reflection(xi)[:, :-1]


def lift(xi, M: Frame, chart: HemisphereChart | None = None) -> Frame:
    """span(xi, T_xi^{-1} M) as a (d, k) frame with xi first."""
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-10:
        raise ValueError(f"xi must be a unit vector, |xi| = {np.linalg.norm(xi)}")
    d = xi.shape[0]
    if M.d != d - 1:
        raise ValueError(f"M must live in R^{d - 1}, got R^{M.d}")
    chart = chart or HemisphereChart(d)
    return Frame(np.column_stack([xi, chart.perp_basis(xi) @ M.basis]))


def split(L: Frame, chart: HemisphereChart | None = None):
    """Inverse of ``lift`` for a frame whose first column is the direction."""
    xi = L.basis[:, 0]
    chart = chart or HemisphereChart(L.d)
    return xi, Frame(chart.perp_basis(xi).T @ L.basis[:, 1:])


def lift_batch(xis: np.ndarray, Ms: np.ndarray) -> np.ndarray:
    """Vectorized ``lift``: (n, d) directions and (n, d-1, k-1) frames -> (n, d, k)."""
    n, d = xis.shape
    e = np.zeros(d)
    e[-1] = 1.0
    upper = xis[:, -1] >= 0
    v = np.where(upper[:, None], xis + e, xis - e)
    H = np.eye(d) - 2.0 * v[:, :, None] * v[:, None, :] / np.einsum("ni,ni->n", v, v)[:, None, None]
    return np.concatenate([xis[:, :, None], H[:, :, :-1] @ Ms], axis=2)


def sphere_sample(d: int, n_points: int, mode: str = "random", rng_seed=0) -> np.ndarray:
    """Unit vectors in R^d, shape (n_points, d).

    ``quasi_uniform`` is a Fibonacci spiral for d = 3 and falls back to the
    seeded random sampler in other dimensions.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if mode == "quasi_uniform" and d == 3:
        i = np.arange(n_points) + 0.5
        z = 1.0 - 2.0 * i / n_points
        phi = np.pi * (3.0 - np.sqrt(5.0)) * i
        rho = np.sqrt(1.0 - z * z)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    if mode not in ("random", "quasi_uniform"):
        raise ValueError(f"unknown mode {mode!r}")
    g = _rng(rng_seed).standard_normal((n_points, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def projection_statistic(frames: np.ndarray, v: np.ndarray) -> np.ndarray:
    """|P_F v|^2 for a batch of frames (n, d, k)."""
    coeffs = np.einsum("ndk,d->nk", frames, v)
    return np.einsum("nk,nk->n", coeffs, coeffs)


def lifted_sample_batch(d: int, k: int, n: int, rng_seed=0) -> np.ndarray:
    """Frames T(xi, M) with xi uniform on S^(d-1) and M Haar on G(d-1,k-1)."""
    xis = sphere_sample(d, n, "random", rng_seed=_rng(rng_seed, 0))
    if k == 1:
        return xis[:, :, None]
    Ms = haar_sample_batch(d - 1, k - 1, n, _rng(rng_seed, 1))
    return lift_batch(xis, Ms)


def probe_vectors(d: int) -> list:
    e1 = np.eye(d)[0]
    ed = np.eye(d)[-1]
    diag = np.ones(d) / np.sqrt(d)
    return [e1, ed, diag]


def moment_comparison(a: np.ndarray, b: np.ndarray, vectors, moments=(1, 2)) -> list:
    """Compare moments of |P v|^2 between two frame samples.

    Returns one dict per (vector, moment) with the difference measured in
    Monte-Carlo standard errors of the difference.
    """
    rows = []
    for vi, v in enumerate(vectors):
        sa = projection_statistic(a, v)
        sb = projection_statistic(b, v)
        for m in moments:
            xa, xb = sa ** m, sb ** m
            se = np.sqrt(xa.var(ddof=1) / len(xa) + xb.var(ddof=1) / len(xb))
            diff = xa.mean() - xb.mean()
            rows.append({"vector": vi, "moment": m, "mean_a": float(xa.mean()),
                         "mean_b": float(xb.mean()), "z": float(diff / se)})
    return rows
