"""Two-sample functional mean tests calibrated by a residual bootstrap.

Depth methods (ITD, IFD, RHD, KD) score the scaled mean difference against
the bootstrap law of its resampled versions; the classical competitors (L2,
SUP, FINT, FMAX) reduce each curve to a scalar first.  All methods of one
call share the same bootstrap resamples.
"""

from dataclasses import dataclass

import numpy as np

from .depth import DEPTH_KINDS, DepthSpec
from .errors import DegenerateDataError, InsufficientSampleError, UsageError
from .funcspace import Curve, FunctionalSample, check_same_grid
from .inference import BootstrapEnsemble, _scalar_rows, depth_pvalue, scalar_pvalue
from .rng import stream

__all__ = [
    "TWO_SAMPLE_METHODS",
    "TwoSampleData",
    "two_sample_statistic",
    "residual_bootstrap_two",
    "pointwise_F",
    "two_sample_test",
    "two_sample_tests",
    "default_depth_spec",
]

TWO_SAMPLE_METHODS = ("ITD", "IFD", "RHD", "KD", "L2", "SUP", "FINT", "FMAX")


@dataclass(frozen=True, eq=False)
class TwoSampleData:
    group1: FunctionalSample
    group2: FunctionalSample

    def __post_init__(self):
        check_same_grid(self.group1.grid, self.group2.grid)
        if len(self.group1) < 2 or len(self.group2) < 2:
            raise InsufficientSampleError("each group needs at least two curves")

    @classmethod
    def from_labeled(cls, sample):
        groups = sample.groups()
        if len(groups) != 2:
            raise UsageError(f"expected exactly two group labels, found {len(groups)}")
        g1, g2 = groups.values()
        return cls(g1, g2)

    @property
    def grid(self):
        return self.group1.grid

    @property
    def n1(self):
        return len(self.group1)

    @property
    def n2(self):
        return len(self.group2)

    @property
    def scale(self):
        return np.sqrt(self.n1 * self.n2 / (self.n1 + self.n2))


def _anchored(d):
    """Both groups relative to the first curve of group 1.

    Every statistic below is location-free, so working with differences
    changes nothing mathematically; it makes results bit-identical under any
    common shift that is applied exactly (the differences are then identical
    doubles, whatever the group sizes).
    """
    ref = d.group1.values[0]
    return d.group1.values - ref, d.group2.values - ref


def two_sample_statistic(d):
    """``sqrt(n1 n2 / (n1 + n2)) * (mean1 - mean2)``."""
    x1, x2 = _anchored(d)
    diff = x1.mean(axis=0) - x2.mean(axis=0)
    return Curve(d.grid, d.scale * diff)


def _split_streams(rng):
    if isinstance(rng, np.random.Generator):
        boot, dirs = rng.spawn(2)
        return boot, dirs
    return stream(rng, "boot"), stream(rng, "dirs")


def _bootstrap_groups(d, B, rng):
    """Resampled residuals ``e*_ki``, shapes ``(B, n_k, p)``.

    The resampled groups are ``pooled mean + e*_ki``; the common pooled mean
    cancels from the mean difference and from the pointwise F statistic, so
    it is never added (adding and removing it would only inject rounding).
    Residuals are taken from the anchored groups (see :func:`_anchored`).
    """
    x1, x2 = _anchored(d)
    r1, r2 = x1 - x1.mean(axis=0), x2 - x2.mean(axis=0)
    i1 = rng.integers(0, d.n1, size=(B, d.n1))
    i2 = rng.integers(0, d.n2, size=(B, d.n2))
    return r1[i1], r2[i2]


def _statistics_from_groups(d, g1, g2):
    return d.scale * (g1.mean(axis=-2) - g2.mean(axis=-2))


def residual_bootstrap_two(d, B, rng):
    """``B`` bootstrap two-sample statistics from within-group residual resampling."""
    if B < 1:
        raise ValueError("B must be at least 1")
    g1, g2 = _bootstrap_groups(d, int(B), _split_streams(rng)[0])
    stats = _statistics_from_groups(d, g1, g2)
    return BootstrapEnsemble(FunctionalSample(d.grid, stats), f"residual-two B={B}")


def _f_values(g1, g2, strict=True):
    """Pointwise one-way ANOVA F (K = 2) over trailing ``(n_k, p)`` axes.

    Points with zero within-group variance give 0 when the group means agree
    there.  A mean gap over zero variance raises when ``strict``; otherwise
    (bootstrap replicates, where tiny groups can resample one residual
    repeatedly) it gives ``inf``, which is as extreme as a statistic can be.
    """
    n1, n2 = g1.shape[-2], g2.shape[-2]
    n = n1 + n2
    m1, m2 = g1.mean(axis=-2), g2.mean(axis=-2)
    m = (n1 * m1 + n2 * m2) / n
    between = n1 * (m1 - m) ** 2 + n2 * (m2 - m) ** 2
    within = ((g1 - m1[..., None, :]) ** 2).sum(axis=-2) + ((g2 - m2[..., None, :]) ** 2).sum(axis=-2)
    within = within / (n - 2)
    zero = within == 0
    if strict:
        if np.all(zero):
            raise DegenerateDataError("within-group variance vanishes at every grid point")
        if np.any(zero & (between > 0)):
            raise DegenerateDataError("F statistic is infinite: zero within-group variance with a mean gap")
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(zero, np.where(between > 0, np.inf, 0.0), between / np.where(zero, 1.0, within))
    return f


def pointwise_F(d):
    if d.n1 + d.n2 < 3:
        raise InsufficientSampleError("pointwise F needs at least three curves")
    return Curve(d.grid, _f_values(*_anchored(d)))


def default_depth_spec(kind, problem="two-sample"):
    """Default depth tuning: KD u = 0.01; RHD u = 0.1 (two-sample) or 0.001 (regression)."""
    kind = kind.upper()
    if kind == "KD":
        return DepthSpec("KD", quantile_u=0.01)
    if kind == "RHD":
        return DepthSpec("RHD", quantile_u=0.1 if problem == "two-sample" else 0.001)
    return DepthSpec(kind)


def two_sample_tests(d, methods, B, specs=None, rng=0, smoothed=False, seed=None, reference="leave-one-out"):
    """Run several methods on one shared set of ``B`` bootstrap resamples.

    ``rng`` is a master seed (named streams ``boot`` and ``dirs`` are derived
    from it) or a ``Generator`` (two children are spawned).  ``specs`` maps a
    depth method to its :class:`DepthSpec`; missing entries use
    :func:`default_depth_spec`.
    """
    methods = [m.upper() for m in methods]
    for m in methods:
        if m not in TWO_SAMPLE_METHODS:
            raise UsageError(f"unknown two-sample method {m!r}; expected one of {TWO_SAMPLE_METHODS}")
    specs = {k.upper(): v for k, v in (specs or {}).items()}
    if seed is None and not isinstance(rng, np.random.Generator):
        seed = int(rng)
    boot_rng, dir_rng = _split_streams(rng)
    g1, g2 = _bootstrap_groups(d, int(B), boot_rng)
    observed = two_sample_statistic(d)
    ens = BootstrapEnsemble(FunctionalSample(d.grid, _statistics_from_groups(d, g1, g2)), f"residual-two B={B}")

    reports = []
    for m in methods:
        if m in DEPTH_KINDS:
            spec = specs.get(m) or default_depth_spec(m)
            if spec.kind != m:
                raise UsageError(f"depth spec for {m} has kind {spec.kind}")
            # only RHD consumes the direction stream, so the method list never shifts it
            rep = depth_pvalue(observed, ens, spec, rng=dir_rng, smoothed=smoothed, seed=seed, method=m,
                               reference=reference)
        elif m in ("L2", "SUP"):
            obs = float(_scalar_rows(observed.values, d.grid.weights, m))
            boot = _scalar_rows(ens.statistics.values, d.grid.weights, m)
            rep = scalar_pvalue(obs, boot, smoothed=smoothed, method=m, seed=seed)
        else:
            w = d.grid.weights
            f_obs = _f_values(*_anchored(d))
            f_boot = _f_values(g1, g2, strict=False)
            if m == "FINT":
                obs, boot = float(f_obs @ w), f_boot @ w
            else:
                obs, boot = float(f_obs.max()), f_boot.max(axis=-1)
            rep = scalar_pvalue(obs, boot, smoothed=smoothed, method=m, seed=seed)
        reports.append(rep)
    return reports


def two_sample_test(d, method, B, spec=None, rng=0, **kwargs):
    """Single-method wrapper around :func:`two_sample_tests`."""
    specs = {method.upper(): spec} if spec is not None else None
    return two_sample_tests(d, [method], B, specs, rng=rng, **kwargs)[0]
