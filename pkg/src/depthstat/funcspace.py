"""Discretized L2([0, 1]) primitives.

Functions live on a shared evaluation grid with trapezoid quadrature weights.
A :class:`Curve` holds one function, a :class:`FunctionalSample` holds an
``(n, p)`` block of functions on the same grid.  All containers are frozen and
their arrays are read-only, so they can be shared freely between threads.
"""

from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import (
    EmptySampleError,
    IncompatibleGridError,
    InvalidGridError,
    NegativeEigenvalueError,
    RankDeficiencyError,
)

__all__ = [
    "Grid",
    "Curve",
    "FunctionalSample",
    "CovOp",
    "make_grid",
    "grid_from_points",
    "inner_product",
    "norm",
    "sample_mean",
    "covariance_eig",
    "gram_schmidt",
    "gram_schmidt_functions",
    "check_same_grid",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered evaluation points on [0, 1] with positive quadrature weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        wts = _frozen(self.weights)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)
        if pts.ndim != 1 or pts.size < 2:
            raise InvalidGridError("a grid needs at least two points")
        if wts.shape != pts.shape:
            raise InvalidGridError("one weight per grid point is required")
        if not np.all(np.isfinite(pts)) or np.any(np.diff(pts) <= 0):
            raise InvalidGridError("grid points must be finite and strictly increasing")
        if pts[0] != 0.0 or pts[-1] != 1.0:
            raise InvalidGridError("grid must start at 0 and end at 1")
        if np.any(wts <= 0):
            raise InvalidGridError("quadrature weights must be positive")
        if abs(wts.sum() - 1.0) > 1e-12:
            raise InvalidGridError(f"quadrature weights sum to {wts.sum()!r}, not 1")

    @property
    def size(self):
        return self.points.size

    def same_as(self, other):
        return self is other or (
            np.array_equal(self.points, other.points) and np.array_equal(self.weights, other.weights)
        )

    def curve(self, values):
        return Curve(self, values)

    def evaluate(self, fn):
        """Curve with values ``fn(points)``."""
        return Curve(self, np.broadcast_to(np.asarray(fn(self.points), dtype=float), self.points.shape))

    def constant(self, c):
        return Curve(self, np.full(self.size, float(c)))


def check_same_grid(a, b):
    if not a.same_as(b):
        raise IncompatibleGridError("objects live on different grids")


@dataclass(frozen=True, eq=False)
class Curve:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.size,):
            raise InvalidGridError(
                f"curve has {v.size} values but the grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("curve values must be finite")

    def __add__(self, other):
        if isinstance(other, Curve):
            check_same_grid(self.grid, other.grid)
            return Curve(self.grid, self.values + other.values)
        return Curve(self.grid, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, Curve):
            check_same_grid(self.grid, other.grid)
            return Curve(self.grid, self.values - other.values)
        return Curve(self.grid, self.values - float(other))

    def __mul__(self, c):
        return Curve(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return Curve(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """``n`` curves on one grid, stored row-wise in ``values`` with shape ``(n, p)``."""

    grid: Grid
    values: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape[0] == 0:
            raise EmptySampleError("a functional sample needs at least one curve")
        if v.shape[1] != self.grid.size:
            raise InvalidGridError(
                f"sample has {v.shape[1]} columns but the grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != v.shape[0]:
                raise ValueError("labels must match the number of curves")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_curves(cls, curves, labels=None):
        curves = list(curves)
        if not curves:
            raise EmptySampleError("a functional sample needs at least one curve")
        grid = curves[0].grid
        for c in curves[1:]:
            check_same_grid(grid, c.grid)
        return cls(grid, np.stack([c.values for c in curves]), labels)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return Curve(self.grid, self.values[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def curves(self):
        return list(self)

    def subset(self, idx):
        idx = np.asarray(idx)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return FunctionalSample(self.grid, self.values[idx], labels)

    def groups(self):
        """Split by label, preserving first-appearance order of labels."""
        if self.labels is None:
            raise ValueError("sample has no labels")
        order = list(dict.fromkeys(self.labels))
        return {
            lab: self.subset([i for i, l in enumerate(self.labels) if l == lab]) for lab in order
        }


@dataclass(frozen=True, eq=False)
class CovOp:
    """Eigendecomposition of an empirical covariance operator.

    ``eigenfunctions`` has shape ``(k, p)``: row ``j`` is the values of the
    ``j``-th eigenfunction, orthonormal under the grid inner product.
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray

    def function(self, j):
        return Curve(self.grid, self.eigenfunctions[j])

    def positive_rank(self, tol=1e-12):
        return int(np.sum(self.eigenvalues > tol))


def make_grid(p):
    """Equispaced grid of ``p`` points on [0, 1] with normalized trapezoid weights.

    >>> make_grid(3).weights.tolist()
    [0.25, 0.5, 0.25]
    """
    if int(p) != p or p < 2:
        raise InvalidGridError(f"grid size must be an integer >= 2, got {p!r}")
    p = int(p)
    points = np.linspace(0.0, 1.0, p)
    return Grid(points, trapezoid_weights(points))


def trapezoid_weights(points):
    points = np.asarray(points, dtype=float)
    d = np.diff(points)
    w = np.zeros_like(points)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w / w.sum()


def grid_from_points(points):
    """Grid on arbitrary increasing points in [0, 1] (endpoints included) with trapezoid weights."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or points.size < 2 or np.any(np.diff(points) <= 0):
        raise InvalidGridError("grid points must be strictly increasing")
    return Grid(points, trapezoid_weights(points))


def inner_product(f, g):
    check_same_grid(f.grid, g.grid)
    return float(np.dot(f.grid.weights, f.values * g.values))


def norm(f):
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def sample_mean(s):
    if len(s) == 0:
        raise EmptySampleError("mean of an empty sample")
    return Curve(s.grid, s.values.mean(axis=0))


def _orient(vectors):
    """Flip rows so the largest-magnitude entry is positive (first one on ties)."""
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(vectors.shape[0]), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def covariance_eig(s, center, neg_tol=1e-10):
    """Eigenpairs of ``n^-1 sum (X_i - center) (x) (X_i - center)`` under the grid inner product.

    The operator is symmetrized by scaling values with ``sqrt(weights)``;
    eigenvectors are mapped back by dividing by the same factor.  Eigenvalues
    below ``-neg_tol * max(1, largest)`` raise, smaller negatives clamp to 0.
    """
    check_same_grid(s.grid, center.grid)
    sw = np.sqrt(s.grid.weights)
    z = (s.values - center.values) * sw
    cov = z.T @ z / z.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order].T
    floor = -neg_tol * max(1.0, float(evals[0]))
    if evals[-1] < floor:
        raise NegativeEigenvalueError(f"covariance eigenvalue {evals[-1]:.3e} is negative")
    evals = np.where(evals < 0, 0.0, evals)
    funcs = _orient(evecs / sw)
    return CovOp(s.grid, _frozen(evals), _frozen(funcs))


def gram_schmidt(fs, tol=1e-10, dps=None):
    """Orthonormalize curves in order under the grid inner product.

    Uses modified Gram-Schmidt with one re-orthogonalization pass.  A function
    whose residual norm, relative to its own norm, is at most ``tol`` raises
    :class:`RankDeficiencyError` naming its index.

    Passing ``dps`` runs the whole procedure in ``mpmath`` with that many
    decimal digits and rounds the result to float64.  Near-collinear input
    sets such as high-degree monomials need it: in double precision the
    outputs stay orthonormal but drift far from the exact Gram-Schmidt
    functions.  In that mode the rank threshold is ``10**(-dps / 3)`` unless
    ``tol`` is lowered further by the caller.
    """
    fs = list(fs)
    if not fs:
        return []
    grid = fs[0].grid
    for f in fs[1:]:
        check_same_grid(grid, f.grid)
    if dps is None:
        rows = _gram_schmidt_float(np.stack([f.values for f in fs]), grid.weights, tol)
    else:
        with mpmath.workdps(dps):
            mp_rows = [[mpmath.mpf(float(x)) for x in f.values] for f in fs]
            rows = _gram_schmidt_mp(mp_rows, grid.weights, min(tol, 10.0 ** (-dps / 3)))
    return [Curve(grid, r) for r in rows]


def gram_schmidt_functions(funcs, grid, dps=60, tol=None):
    """Gram-Schmidt of callables evaluated at the grid points in ``dps``-digit arithmetic.

    Each callable receives an ``mpmath.mpf`` point and must return an ``mpf``.
    Evaluating in high precision matters as much as orthogonalizing in it: a
    float64 rounding of ``t**20`` already moves the 20th monomial output by
    about 1e-5.
    """
    tol = 10.0 ** (-dps / 3) if tol is None else tol
    with mpmath.workdps(dps):
        pts = [mpmath.mpf(float(t)) for t in grid.points]
        mp_rows = [[f(t) for t in pts] for f in funcs]
        rows = _gram_schmidt_mp(mp_rows, grid.weights, tol)
    return [Curve(grid, r) for r in rows]


def _gram_schmidt_float(vals, w, tol):
    out = []
    for j, f in enumerate(vals):
        nf = np.sqrt(np.dot(w, f * f))
        r = f.copy()
        for _ in range(2):
            for q in out:
                r -= np.dot(w, r * q) * q
        nr = np.sqrt(np.dot(w, r * r))
        if nf == 0 or nr <= tol * nf:
            raise RankDeficiencyError(j, 0.0 if nf == 0 else nr / nf)
        out.append(r / nr)
    return np.array(out)


def _gram_schmidt_mp(rows, w, tol):
    # caller holds the mpmath precision context
    wm = [mpmath.mpf(float(x)) for x in w]

    def ip(a, b):
        return mpmath.fsum(wi * ai * bi for wi, ai, bi in zip(wm, a, b))

    out = []
    for j, f in enumerate(rows):
        r = list(f)
        nf = mpmath.sqrt(ip(r, r))
        for _ in range(2):
            for q in out:
                c = ip(r, q)
                r = [ri - c * qi for ri, qi in zip(r, q)]
        nr = mpmath.sqrt(ip(r, r))
        if nf == 0 or nr <= tol * nf:
            raise RankDeficiencyError(j, 0.0 if nf == 0 else float(nr / nf))
        out.append([ri / nr for ri in r])
    return np.array([[float(x) for x in q] for q in out])
