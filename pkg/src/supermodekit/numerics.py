"""Grids, quadrature weights, special functions and the symmetric eigensolver.

Everything in here is a pure function of its arguments; the other modules
build kernels on an :class:`Axis` and diagonalize them with
:func:`symmetric_eig`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


class InvalidArgument(ValueError):
    """Raised when an operation receives arguments outside its domain."""


@dataclass(frozen=True)
class Axis:
    """Ordered sample points with positive quadrature weights.

    Parameters
    ----------
    points : ndarray
        Strictly increasing sample coordinates.
    weights : ndarray
        Quadrature weight of each point (same length as ``points``).
    label : str
        Free-text description of the coordinate, e.g. ``"omega*tau1"``.
    """

    points: np.ndarray
    weights: np.ndarray
    label: str = "x"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        wts = np.asarray(self.weights, dtype=float)
        if pts.ndim != 1 or wts.shape != pts.shape:
            raise InvalidArgument("points and weights must be 1-d arrays of equal length")
        if pts.size < 2:
            raise InvalidArgument("an axis needs at least two points")
        if not np.all(np.isfinite(pts)) or not np.all(np.diff(pts) > 0):
            raise InvalidArgument("axis points must be finite and strictly increasing")
        if not np.all(wts > 0):
            raise InvalidArgument("quadrature weights must be positive")
        pts.setflags(write=False)
        wts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    def __len__(self):
        return self.points.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def scaled(self, factor: float) -> "Axis":
        """Dilate the axis by ``factor`` (points and weights both scale)."""
        if factor <= 0:
            raise InvalidArgument("dilation factor must be positive")
        return Axis(self.points * factor, self.weights * factor, self.label)


def make_uniform_axis(x_max: float, n: int, label: str = "x") -> Axis:
    """Uniform axis on ``[-x_max, x_max]`` with ``n`` points.

    All weights equal the spacing; endpoints are not halved because every
    kernel sampled here has decayed to ~1e-15 at the boundary.
    """
    if not x_max > 0:
        raise InvalidArgument(f"x_max must be positive, got {x_max}")
    if int(n) != n or n < 2:
        raise InvalidArgument(f"n must be an integer >= 2, got {n}")
    n = int(n)
    points = np.linspace(-x_max, x_max, n)
    spacing = 2.0 * x_max / (n - 1)
    return Axis(points, np.full(n, spacing), label)


def default_axis(sigma_min: float, n: int = 1024, label: str = "x") -> Axis:
    """Axis sized to six Gaussian 1/e half-widths of the narrowest envelope."""
    if not sigma_min > 0:
        raise InvalidArgument("sigma_min must be positive")
    return make_uniform_axis(6.0 / sigma_min, n, label)


def sinc(x):
    """Unnormalized sinc, sin(x)/x, with sinc(0) = 1."""
    # numpy's sinc is the normalized one
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def sine_integral(z):
    """Si(z) = integral of sin(u)/u from 0 to z; odd in z."""
    si, _ = special.sici(np.asarray(z, dtype=float))
    return si


def hermite(m: int, x):
    """Physicists' Hermite polynomial H_m(x) by the three-term recurrence."""
    if m < 0:
        raise InvalidArgument("Hermite order must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if m == 0:
        return h_prev
    h = 2.0 * x
    for k in range(1, m):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


def laguerre_assoc(p: int, l: int, x):
    """Associated Laguerre polynomial L_p^l(x) by the three-term recurrence."""
    if p < 0 or l < 0:
        raise InvalidArgument("Laguerre indices must be non-negative")
    x = np.asarray(x, dtype=float)
    lag_prev = np.ones_like(x)
    if p == 0:
        return lag_prev
    lag = 1.0 + l - x
    for k in range(1, p):
        lag_prev, lag = lag, ((2 * k + 1 + l - x) * lag - (k + l) * lag_prev) / (k + 1)
    return lag


def as_symmetric(a, *, tol: float | None = None) -> np.ndarray:
    """Return a float copy of ``a`` with exact symmetry enforced.

    With ``tol`` given, inputs whose antisymmetric part exceeds ``tol``
    (relative to the matrix max-norm) are rejected instead of symmetrized.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidArgument("matrix has non-finite entries")
    if tol is not None:
        scale = max(np.max(np.abs(a)), 1.0)
        if np.max(np.abs(a - a.T)) > tol * scale:
            raise InvalidArgument("matrix is not symmetric")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    ordering: str


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def symmetric_eig(a, ordering: str = "abs") -> EigenResult:
    """Full eigendecomposition of a real symmetric matrix.

    ``ordering`` is ``"abs"`` (descending absolute value) or ``"value"``
    (descending value). Eigenvectors are orthonormal columns, each with its
    largest-magnitude component made positive.
    """
    if ordering not in ("abs", "value"):
        raise InvalidArgument(f"unknown ordering {ordering!r}")
    sym = as_symmetric(a)
    values, vectors = np.linalg.eigh(sym)
    key = -np.abs(values) if ordering == "abs" else -values
    order = np.argsort(key, kind="stable")
    return EigenResult(values[order], _fix_signs(vectors[:, order]), ordering)
