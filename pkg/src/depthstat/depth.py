"""Functional depths: kernel (KD), modified regularized halfspace (RHD),
integrated (ITD) and infimal (IFD).

Each depth has a per-curve entry point (``kd_depth``, ``rhd_depth``, ...) and
all of them share the batch evaluator :func:`evaluate_depths`, which scores
many query curves against one ensemble in a single vectorized pass.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import EmptySampleError, InsufficientSampleError, InvalidBasisError
from .funcspace import Curve, FunctionalSample, check_same_grid

__all__ = [
    "KERNELS",
    "DEPTH_KINDS",
    "DepthSpec",
    "DepthValue",
    "DirectionPool",
    "order_statistic",
    "kd_bandwidth",
    "kd_depth",
    "kd_gaussian_oracle",
    "draw_direction_pool",
    "rhd_directions",
    "rhd_depth",
    "univariate_halfspace",
    "itd_depth",
    "ifd_depth",
    "evaluate_depths",
    "ensemble_depths",
]

KERNELS = {
    "gaussian": lambda t: np.exp(-0.5 * t * t),
    "laplace": lambda t: np.exp(-t),
}
DEPTH_KINDS = ("KD", "RHD", "ITD", "IFD")


@dataclass(frozen=True)
class DepthSpec:
    """Depth choice and tuning.

    ``quantile_u`` sets the KD bandwidth (quantile of pairwise distances) or
    the RHD regularization level (quantile of projection dispersions).
    ``bandwidth``, when given, fixes the KD bandwidth and bypasses the
    quantile rule.
    """

    kind: str = "KD"
    quantile_u: float = 0.01
    kernel: str = "gaussian"
    projections_M: int = 500
    univariate: str = "halfspace"
    bandwidth: float = None

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in DEPTH_KINDS:
            raise ValueError(f"unknown depth kind {self.kind!r}; expected one of {DEPTH_KINDS}")
        if not 0.0 < self.quantile_u < 1.0:
            raise ValueError("quantile_u must lie in (0, 1)")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; expected one of {sorted(KERNELS)}")
        if int(self.projections_M) != self.projections_M or self.projections_M < 1:
            raise ValueError("projections_M must be a positive integer")
        if self.univariate != "halfspace":
            raise ValueError("only the univariate halfspace depth is supported")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DepthValue:
    """A depth with an optional tie-break key (larger key = more outlying)."""

    value: float
    tiebreak_key: float = None


def order_statistic(values, u):
    """The ``ceil(u * m)``-th smallest of ``m`` values (1-based, no interpolation).

    A relative slack of 1e-9 keeps products such as ``0.1 * 30`` from
    rounding up to the next index.

    >>> order_statistic([3, 1, 2, 2, 1, 3], 0.5)
    2.0
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    m = v.size
    if m == 0:
        raise EmptySampleError("quantile of an empty collection")
    k = math.ceil(u * m * (1 - 1e-9))
    k = min(max(k, 1), m)
    return float(v[k - 1])


def _distances(a, b, weights):
    # differences are formed before weighting so exact shifts cancel exactly
    return np.sqrt(cdist(a, b, "sqeuclidean", w=weights))


def _bandwidth_from_matrix(dmat, u):
    n = dmat.shape[0]
    off = dmat[~np.eye(n, dtype=bool)]
    h = order_statistic(off, u)
    if h == 0.0:
        pos = off[off > 0]
        h = float(pos.min()) if pos.size else 1.0
    return h


def kd_bandwidth(ensemble, u):
    """KD bandwidth: the ``u``-quantile of ordered pairwise distances.

    Falls back to the smallest positive distance when the quantile is zero,
    and to 1 when every distance is zero.
    """
    if len(ensemble) < 2:
        raise InsufficientSampleError("bandwidth needs at least two curves")
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    v = ensemble.values
    return _bandwidth_from_matrix(_distances(v, v, ensemble.grid.weights), u)


def _kd_from_distances(d, h, kernel):
    return KERNELS[kernel](d / h).mean(axis=-1) / h


def kd_depth(x, ensemble, spec):
    check_same_grid(x.grid, ensemble.grid)
    h = spec.bandwidth if spec.bandwidth is not None else kd_bandwidth(ensemble, spec.quantile_u)
    d = _distances(x.values[None, :], ensemble.values, ensemble.grid.weights)[0]
    return DepthValue(float(_kd_from_distances(d, h, spec.kernel)))


def kd_gaussian_oracle(x, eigenvalues, eigenfunctions, tol=1e-8):
    """Closed-form Gaussian-kernel depth (h = 1) of ``x`` under a centered Gaussian law.

    ``eigenvalues``/``eigenfunctions`` describe the covariance; the part of
    ``x`` outside their span is treated as a zero-variance direction.
    """
    sig = np.asarray(eigenvalues, dtype=float)
    if np.any(sig < 0):
        raise InvalidBasisError("eigenvalues must be non-negative")
    funcs = np.stack([f.values for f in eigenfunctions]) if len(eigenfunctions) else np.zeros((0, x.grid.size))
    if funcs.shape[0] != sig.size:
        raise InvalidBasisError("one eigenvalue per eigenfunction is required")
    for f in eigenfunctions:
        check_same_grid(x.grid, f.grid)
    w = x.grid.weights
    gram = (funcs * w) @ funcs.T
    if not np.allclose(gram, np.eye(sig.size), atol=tol, rtol=0):
        raise InvalidBasisError("eigenfunctions are not orthonormal")
    coef = (funcs * w) @ x.values
    resid2 = max(float(np.dot(w, x.values**2)) - float(np.sum(coef**2)), 0.0)
    quad = float(np.sum(coef**2 / (1.0 + sig))) + resid2
    return float(np.prod(1.0 + sig) ** -0.5 * np.exp(-0.5 * quad))


@dataclass(frozen=True, eq=False)
class DirectionPool:
    """Random unit directions with their dispersions and the retained subset."""

    directions: np.ndarray
    dispersions: np.ndarray
    threshold: float
    retained: np.ndarray

    @property
    def active(self):
        return self.directions[self.retained]


def _project(values, dw):
    """``values @ dw.T`` accumulated in a fixed order over grid points.

    BLAS may round the same row differently depending on its position in
    the operand, which would break exact ties between a query curve and an
    identical ensemble curve; elementwise accumulation cannot.
    """
    values = np.atleast_2d(values)
    out = np.zeros((values.shape[0], dw.shape[0]))
    for k in range(dw.shape[1]):
        out += values[:, k : k + 1] * dw[:, k]
    return out


def _dispersions(values, directions, weights):
    return _project(values, directions * weights).std(axis=0)


def draw_direction_pool(ensemble, M, u, rng):
    """Draw ``M`` directions and keep those with dispersion at or above the ``u``-quantile.

    Directions are iid standard normal values at the grid points, scaled to
    unit norm.  The dispersion of ``v`` is ``||Gamma^{1/2} v||``, i.e. the
    standard deviation (1/n convention) of the projections ``<X_i, v>``.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    w = ensemble.grid.weights
    v = rng.standard_normal((int(M), ensemble.grid.size))
    v /= np.sqrt(v**2 @ w)[:, None]
    disp = _dispersions(ensemble.values, v, w)
    lam = order_statistic(disp, u)
    keep = disp >= lam
    # the largest dispersion is always >= its own order statistic; guard anyway
    keep[np.argmax(disp)] = True
    return DirectionPool(v, disp, lam, keep)


def rhd_directions(ensemble, M, u, rng):
    """Retained directions paired with their dispersions, as ``(Curve, float)`` tuples."""
    pool = draw_direction_pool(ensemble, M, u, rng)
    g = ensemble.grid
    return [
        (Curve(g, pool.directions[m]), float(pool.dispersions[m]))
        for m in np.flatnonzero(pool.retained)
    ]


def _rhd_batch(queries, ens, weights, pool, self_excluded=False):
    n = ens.shape[0]
    dirs = pool.active
    dw = dirs * weights
    pe = _project(ens, dw)
    pq = _project(queries, dw)
    pe_sorted = np.sort(pe, axis=0)
    counts = np.empty(pq.shape, dtype=np.int64)
    for m in range(dirs.shape[0]):
        counts[:, m] = n - np.searchsorted(pe_sorted[:, m], pq[:, m], side="left")
    if self_excluded:
        # each query is an ensemble member whose own zero projection always counts
        counts -= 1
    cmin = counts.min(axis=1)
    depth = cmin / (n - 1 if self_excluded else n)

    mask = counts == cmin[:, None]
    wbar = (mask @ dirs) / mask.sum(axis=1)[:, None]
    ww = wbar * weights
    proj_e = _project(ens, ww)
    proj_q = np.zeros(queries.shape[0])
    for k in range(ww.shape[1]):  # same accumulation order as _project
        proj_q += queries[:, k] * ww[:, k]
    med = np.median(proj_e, axis=0)
    dev = np.abs(proj_e - med)
    scale = np.median(dev, axis=0)
    alt = dev.mean(axis=0)
    scale = np.where(scale > 0, scale, alt)
    num = np.abs(proj_q - med)
    key = np.where(scale > 0, num / np.where(scale > 0, scale, 1.0), num)
    return depth, key


def rhd_depth(x, ensemble, spec, rng, pool=None):
    """Random-projection RHD of ``x`` with the outlyingness tie-break key."""
    check_same_grid(x.grid, ensemble.grid)
    if len(ensemble) < 2:
        raise InsufficientSampleError("RHD needs at least two ensemble curves")
    if pool is None:
        pool = draw_direction_pool(ensemble, spec.projections_M, spec.quantile_u, rng)
    d, k = _rhd_batch(x.values[None, :], ensemble.values, ensemble.grid.weights, pool)
    return DepthValue(float(d[0]), float(k[0]))


def univariate_halfspace(x, sample):
    """Tukey depth of a real number: ``min(#{s <= x}, #{s >= x}) / n``."""
    s = np.asarray(sample, dtype=float)
    if s.size == 0:
        raise InsufficientSampleError("halfspace depth of an empty sample")
    return min(int(np.sum(s <= x)), int(np.sum(s >= x))) / s.size


def _pointwise_halfspace(queries, ens, self_excluded=False):
    n, p = ens.shape
    srt = np.sort(ens, axis=0)
    out = np.empty(queries.shape)
    drop = 1 if self_excluded else 0
    for k in range(p):
        le = np.searchsorted(srt[:, k], queries[:, k], side="right") - drop
        ge = n - np.searchsorted(srt[:, k], queries[:, k], side="left") - drop
        out[:, k] = np.minimum(le, ge) / (n - drop)
    return out


def _itd_from_pointwise(pw, weights):
    # fsum: correctly rounded, so the result does not depend on summation order
    return np.array([math.fsum(weights * row) for row in pw])


def itd_depth(x, ensemble):
    check_same_grid(x.grid, ensemble.grid)
    pw = _pointwise_halfspace(x.values[None, :], ensemble.values)
    return DepthValue(float(_itd_from_pointwise(pw, ensemble.grid.weights)[0]))


def _ifd_from_pointwise(pw, weights):
    """Infimum over the grid and the infimal area (weight of the set attaining it)."""
    inf = pw.min(axis=1)
    area = np.array([math.fsum(weights[row == m]) for row, m in zip(pw, inf)])
    return inf, area


def ifd_depth(x, ensemble):
    """Infimal depth; the tie-break key is the infimal area (larger = more outlying)."""
    check_same_grid(x.grid, ensemble.grid)
    pw = _pointwise_halfspace(x.values[None, :], ensemble.values)
    inf, area = _ifd_from_pointwise(pw, ensemble.grid.weights)
    return DepthValue(float(inf[0]), float(area[0]))


def _kd_bandwidth_for(spec, ens, w):
    if spec.bandwidth is not None:
        return spec.bandwidth
    if ens.shape[0] < 2:
        raise InsufficientSampleError("bandwidth needs at least two curves")
    return _bandwidth_from_matrix(_distances(ens, ens, w), spec.quantile_u)


def _resolve_pool(ensemble, spec, rng, pool):
    if ensemble.values.shape[0] < 2:
        raise InsufficientSampleError("RHD needs at least two ensemble curves")
    if pool is None:
        if rng is None:
            raise ValueError("RHD needs a direction pool or a random generator")
        pool = draw_direction_pool(ensemble, spec.projections_M, spec.quantile_u, rng)
    return pool


def evaluate_depths(queries, ensemble, spec, rng=None, pool=None):
    """Depths of every row of ``queries`` (an ``(q, p)`` array or a sample) w.r.t. ``ensemble``.

    Returns ``(values, keys)``; ``keys`` holds the tie-break keys (RHD
    outlyingness, IFD infimal area) and is ``None`` for KD and ITD.  For RHD
    either ``pool`` or ``rng`` must be given.  The ensemble itself may appear
    among the queries (leave-in evaluation).
    """
    if isinstance(queries, FunctionalSample):
        check_same_grid(queries.grid, ensemble.grid)
        queries = queries.values
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    ens = ensemble.values
    w = ensemble.grid.weights
    kind = spec.kind
    if kind == "KD":
        h = _kd_bandwidth_for(spec, ens, w)
        return _kd_from_distances(_distances(q, ens, w), h, spec.kernel), None
    if kind == "RHD":
        return _rhd_batch(q, ens, w, _resolve_pool(ensemble, spec, rng, pool))
    pw = _pointwise_halfspace(q, ens)
    if kind == "ITD":
        return _itd_from_pointwise(pw, w), None
    return _ifd_from_pointwise(pw, w)


def ensemble_depths(ensemble, spec, rng=None, pool=None, leave_one_out=False):
    """Depth of every ensemble member, optionally w.r.t. the other members only.

    With ``leave_one_out=True`` member ``i`` is scored against the remaining
    ``n - 1`` curves.  The KD bandwidth and the RHD direction pool are still
    computed from the full ensemble, so all members share one depth function
    up to the removed self-contribution.  Returns ``(values, keys)`` as
    :func:`evaluate_depths`.
    """
    if not leave_one_out:
        return evaluate_depths(ensemble.values, ensemble, spec, rng=rng, pool=pool)
    ens = ensemble.values
    n = ens.shape[0]
    if n < 2:
        raise InsufficientSampleError("leave-one-out depths need at least two curves")
    w = ensemble.grid.weights
    kind = spec.kind
    if kind == "KD":
        h = _kd_bandwidth_for(spec, ens, w)
        k = KERNELS[spec.kernel](_distances(ens, ens, w) / h)
        np.fill_diagonal(k, 0.0)
        return k.sum(axis=1) / ((n - 1) * h), None
    if kind == "RHD":
        return _rhd_batch(ens, ens, w, _resolve_pool(ensemble, spec, rng, pool), self_excluded=True)
    pw = _pointwise_halfspace(ens, ens, self_excluded=True)
    if kind == "ITD":
        return _itd_from_pointwise(pw, w), None
    return _ifd_from_pointwise(pw, w)
