"""Mean-response inference in function-on-function regression.

The slope operator is estimated by functional principal component
regression (FPCR): the cross-covariance operator composed with the
eigen-truncated inverse of the regressor covariance.  The test of
``mu(x0) = E[Y]`` scores the scaled prediction at ``x0`` against a residual
bootstrap that keeps the regressors fixed.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .depth import DEPTH_KINDS, DepthSpec
from .errors import DegenerateScalingError, InsufficientSampleError, RankError, SelectionError, UsageError
from .funcspace import Curve, FunctionalSample, check_same_grid, covariance_eig, sample_mean
from .inference import BootstrapEnsemble, _scalar_rows, depth_pvalue, scalar_pvalue
from .rng import stream

__all__ = [
    "FOFR_METHODS",
    "FoFRData",
    "FPCRFit",
    "fpcr_fit",
    "tau_scale",
    "fofr_statistic",
    "fofr_bootstrap",
    "select_J_res_cv",
    "select_J_fve",
    "fofr_tests",
    "fofr_test",
]

FOFR_METHODS = ("RHD", "KD", "L2", "SUP")
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FoFRData:
    X: FunctionalSample
    Y: FunctionalSample
    x0: Curve
    min_n: int = field(default=10, repr=False)

    def __post_init__(self):
        check_same_grid(self.X.grid, self.Y.grid)
        check_same_grid(self.X.grid, self.x0.grid)
        if len(self.X) != len(self.Y):
            raise ValueError("X and Y must hold the same number of curves")
        if len(self.X) < self.min_n:
            raise InsufficientSampleError(f"need at least {self.min_n} regressor/response pairs")

    @property
    def n(self):
        return len(self.X)

    @property
    def grid(self):
        return self.X.grid


@dataclass(frozen=True, eq=False)
class FPCRFit:
    """Truncated FPCR fit.

    ``delta[j]`` holds the curve ``Delta_hat phi_hat_j`` for every
    eigenfunction with a positive eigenvalue, so any truncation up to the
    numerical rank can be applied without refitting.
    """

    grid: object
    J: int
    J_res: int
    J_cen: int
    gamma_hat: np.ndarray
    phi_hat: np.ndarray
    delta: np.ndarray
    scores: np.ndarray
    xbar: np.ndarray
    ybar: np.ndarray

    @property
    def rank(self):
        return self.delta.shape[0]

    def coefficients(self, x_values, J=None):
        """``<x - xbar, phi_j> / gamma_j`` for ``j < J``; ``x_values`` may be ``(p,)`` or ``(m, p)``."""
        J = self.J if J is None else J
        if J > self.rank:
            raise RankError(f"truncation {J} exceeds numerical rank {self.rank}")
        w = self.grid.weights
        proj = (np.asarray(x_values) - self.xbar) @ (self.phi_hat[:J] * w).T
        return proj / self.gamma_hat[:J]

    def apply(self, x_values, J=None):
        """``B_hat_J (x - xbar)`` as raw values."""
        J = self.J if J is None else J
        return self.coefficients(x_values, J) @ self.delta[:J]

    def predict(self, x, J=None):
        return Curve(self.grid, self.apply(x.values, J))


def fpcr_fit(X, Y, J, J_res=None, J_cen=None):
    """FPCR fit with main truncation ``J`` (``J_res``/``J_cen`` default to ``J``)."""
    check_same_grid(X.grid, Y.grid)
    if len(X) != len(Y):
        raise ValueError("X and Y must hold the same number of curves")
    J_res = J if J_res is None else J_res
    J_cen = J if J_cen is None else J_cen
    xbar = sample_mean(X)
    ybar = sample_mean(Y)
    cov = covariance_eig(X, xbar)
    rank = cov.positive_rank(RANK_TOL)
    for name, j in (("J", J), ("J_res", J_res), ("J_cen", J_cen)):
        if j < 1 or j > rank:
            raise RankError(f"{name}={j} is outside 1..{rank} (numerical rank of the regressor covariance)")
    w = X.grid.weights
    phi = cov.eigenfunctions[:rank]
    scores = (X.values - xbar.values) @ (phi * w).T
    delta = scores.T @ (Y.values - ybar.values) / len(X)
    return FPCRFit(
        grid=X.grid,
        J=int(J),
        J_res=int(J_res),
        J_cen=int(J_cen),
        gamma_hat=cov.eigenvalues[:rank],
        phi_hat=phi,
        delta=delta,
        scores=scores,
        xbar=xbar.values,
        ybar=ybar.values,
    )


def tau_scale(fit, x, J=None):
    J = fit.J if J is None else J
    c = fit.coefficients(x.values, J)
    tau = float(np.sum(c * c * fit.gamma_hat[:J]))
    if tau < 1e-12:
        raise DegenerateScalingError(
            "scaling term vanishes: the new regressor coincides with the regressor mean"
        )
    return tau


def fofr_statistic(d, fit):
    """``sqrt(n / tau_J(x0)) * B_hat_J (x0 - xbar)``."""
    tau = tau_scale(fit, d.x0)
    return Curve(d.grid, np.sqrt(d.n / tau) * fit.apply(d.x0.values))


def fofr_bootstrap(d, fit, B, rng):
    """Residual bootstrap statistics with the regressors held fixed.

    Residuals come from the ``J_res`` fit, bootstrap responses are centered
    on the ``J_cen`` fit, and each replicate re-estimates the cross-covariance
    while reusing the original truncated inverse covariance at level ``J``.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    n = d.n
    xc = d.X.values
    fitted_res = fit.apply(xc, fit.J_res)
    fitted_cen = fit.apply(xc, fit.J_cen)
    resid = d.Y.values - fit.ybar - fitted_res

    idx = rng.integers(0, n, size=(int(B), n))
    y_star = fit.ybar + fitted_cen + resid[idx]
    y_star_c = y_star - y_star.mean(axis=1, keepdims=True)
    delta_star = np.einsum("nj,bnp->bjp", fit.scores[:, : fit.J], y_star_c) / n

    coef = fit.coefficients(d.x0.values)
    boot_pred = np.einsum("j,bjp->bp", coef, delta_star)
    center = fit.apply(d.x0.values, fit.J_cen)
    tau = tau_scale(fit, d.x0)
    stats = np.sqrt(n / tau) * (boot_pred - center)
    return BootstrapEnsemble(
        FunctionalSample(d.grid, stats), f"fofr-residual B={B} J={fit.J} J_res={fit.J_res} J_cen={fit.J_cen}"
    )


def _cv_folds(n, G, rng):
    perm = rng.permutation(n)
    return np.array_split(perm, G)


def select_J_res_cv(X, Y, candidates=range(1, 21), G=5, rng=0):
    """Truncation minimizing ``G``-fold cross-validated prediction error.

    Folds are contiguous near-equal blocks of a seeded shuffle.  A candidate
    above the numerical rank of any training fold is skipped; ties go to the
    smaller candidate.
    """
    n = len(X)
    if not 2 <= G <= n:
        raise ValueError(f"need 2 <= G <= n, got G={G}, n={n}")
    rng = rng if isinstance(rng, np.random.Generator) else stream(rng, "cv")
    candidates = sorted(set(int(c) for c in candidates))
    folds = _cv_folds(n, G, rng)
    w = X.grid.weights
    errors = {c: 0.0 for c in candidates}
    usable = set(candidates)
    for test in folds:
        train = np.setdiff1d(np.arange(n), test)
        xs, ys = X.values[train], Y.values[train]
        xbar, ybar = xs.mean(axis=0), ys.mean(axis=0)
        cov = covariance_eig(FunctionalSample(X.grid, xs), Curve(X.grid, xbar))
        rank = cov.positive_rank(RANK_TOL)
        phi = cov.eigenfunctions[:rank]
        s_tr = (xs - xbar) @ (phi * w).T
        delta = s_tr.T @ (ys - ybar) / len(train)
        s_te = (X.values[test] - xbar) @ (phi * w).T / cov.eigenvalues[:rank]
        target = Y.values[test] - ybar
        for c in candidates:
            if c > rank:
                usable.discard(c)
                continue
            pred = s_te[:, :c] @ delta[:c]
            errors[c] += float(np.mean(((target - pred) ** 2) @ w))
    if not usable:
        raise SelectionError("every candidate truncation exceeds the training rank")
    best = min(sorted(usable), key=lambda c: errors[c] / G)
    return best


def select_J_fve(gamma_hat, J_cen=1, rho=0.85):
    """Smallest ``J >= J_cen`` whose fraction of variance explained reaches ``rho``.

    >>> select_J_fve([4, 3, 2, 1], 1, 0.85)
    3
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    g = np.asarray(gamma_hat, dtype=float)
    g = g[g > RANK_TOL]
    if g.size == 0:
        raise SelectionError("no positive eigenvalues")
    fve = np.cumsum(g) / g.sum()
    for J in range(max(1, J_cen), g.size + 1):
        if fve[J - 1] >= rho:
            return J
    warnings.warn(
        f"no truncation >= {J_cen} reaches FVE {rho}; using the full positive rank {g.size}",
        RuntimeWarning,
        stacklevel=2,
    )
    return int(g.size)


def _streams(rng):
    if isinstance(rng, np.random.Generator):
        return rng.spawn(3)
    return stream(rng, "cv"), stream(rng, "boot"), stream(rng, "dirs")


def fofr_tests(d, methods, B, specs=None, rng=0, candidates=range(1, 21), G=5, rho=0.85, smoothed=False, seed=None,
               reference="leave-one-out"):
    """Full pipeline: CV for ``J_res``, ``J_cen = J_res``, FVE for ``J``, bootstrap, p-values.

    Returns ``(reports, fit)``; every method shares one bootstrap ensemble.
    """
    methods = [m.upper() for m in methods]
    for m in methods:
        if m not in FOFR_METHODS:
            raise UsageError(f"unknown FoFR method {m!r}; expected one of {FOFR_METHODS}")
    specs = {k.upper(): v for k, v in (specs or {}).items()}
    if seed is None and not isinstance(rng, np.random.Generator):
        seed = int(rng)
    cv_rng, boot_rng, dir_rng = _streams(rng)

    J_res = select_J_res_cv(d.X, d.Y, candidates, G, cv_rng)
    J_cen = J_res
    gamma = covariance_eig(d.X, sample_mean(d.X)).eigenvalues
    J = select_J_fve(gamma, J_cen, rho)
    fit = fpcr_fit(d.X, d.Y, J, J_res, J_cen)

    observed = fofr_statistic(d, fit)
    ens = fofr_bootstrap(d, fit, B, boot_rng)
    trunc = {"J": fit.J, "J_res": fit.J_res, "J_cen": fit.J_cen}
    reports = []
    for m in methods:
        if m in DEPTH_KINDS:
            spec = specs.get(m) or _default_spec(m)
            rep = depth_pvalue(observed, ens, spec, rng=dir_rng, smoothed=smoothed, seed=seed, method=m,
                               reference=reference)
        else:
            obs = float(_scalar_rows(observed.values, d.grid.weights, m))
            boot = _scalar_rows(ens.statistics.values, d.grid.weights, m)
            rep = scalar_pvalue(obs, boot, smoothed=smoothed, method=m, seed=seed)
        rep.extra.update(trunc)
        reports.append(rep)
    return reports, fit


def _default_spec(kind):
    if kind == "RHD":
        return DepthSpec("RHD", quantile_u=0.001)
    return DepthSpec("KD", quantile_u=0.01)


def fofr_test(d, method, B, spec=None, rng=0, **kwargs):
    specs = {method.upper(): spec} if spec is not None else None
    reports, _ = fofr_tests(d, [method], B, specs, rng=rng, **kwargs)
    return reports[0]
