"""Simulation scenarios: Karhunen-Loeve samples, orthonormal bases, shape
alternatives and the function-on-function regression design."""

import functools
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.interpolate import BSpline

from .errors import DivergentSeriesError
from .fofr import FoFRData
from .funcspace import Curve, FunctionalSample, gram_schmidt, gram_schmidt_functions

__all__ = [
    "SCORE_KINDS",
    "BASIS_KINDS",
    "SHAPES",
    "EigenProfile",
    "BasisSystem",
    "eigenvalues_from_decay",
    "basis_system",
    "draw_scores",
    "kl_sample",
    "alternative_mean",
    "SlopeOperator",
    "FoFRScenario",
    "make_fofr_scenario",
    "two_sample_scenario",
]

SCORE_KINDS = ("N1", "NN", "NE")
BASIS_KINDS = ("tri", "mono", "cheb", "spl")
SHAPES = ("Mag", "Jump", "Peak", "Lin", "Quad", "Cub", "Wig")

_TAIL_TERMS = 10**6
_GS_DPS = 60


def eigenvalues_from_decay(a, J=20):
    """Eigenvalues with gaps ``2 j^-a`` starting from ``2 * sum_j j^-a``.

    The infinite sum is a partial sum over ``10**6`` terms plus the midpoint
    of the integral bracket for the tail; the bracket half-width is below
    ``1e-15`` for any ``a > 2``.
    """
    if not a > 2:
        raise DivergentSeriesError(f"decay rate must exceed 2, got {a}")
    if J < 1:
        raise ValueError("J must be positive")
    N = _TAIL_TERMS
    j = np.arange(1, N + 1, dtype=float)
    partial = np.sum(j[::-1] ** -a)  # smallest terms first
    lo = (N + 1) ** (1 - a) / (a - 1)
    hi = N ** (1 - a) / (a - 1)
    total = partial + 0.5 * (lo + hi)
    gam = np.empty(J)
    gam[0] = 2 * total
    for k in range(1, J):
        gam[k] = gam[k - 1] - 2 * k**-a
    return gam


@dataclass(frozen=True)
class EigenProfile:
    decay_a: float
    J_true: int = 20

    @functools.cached_property
    def eigenvalues(self):
        return eigenvalues_from_decay(self.decay_a, self.J_true)


@dataclass(frozen=True, eq=False)
class BasisSystem:
    kind: str
    functions: np.ndarray  # (J, p)
    grid: object

    def __len__(self):
        return self.functions.shape[0]

    def __getitem__(self, j):
        return Curve(self.grid, self.functions[j])


def _tri_values(J, t):
    out = [np.ones_like(t)]
    m = 1
    while len(out) < J:
        out.append(np.sqrt(2) * np.sin(2 * m * np.pi * t))
        if len(out) < J:
            out.append(np.sqrt(2) * np.cos(2 * m * np.pi * t))
        m += 1
    return np.array(out[:J])


def _cheb_mp(j):
    """Shifted Chebyshev polynomial ``T_j(2t - 1)`` (first kind) evaluated in mpmath."""

    def f(t):
        s = 2 * t - 1
        prev, cur = mpmath.mpf(1), s
        if j == 0:
            return prev
        for _ in range(j - 1):
            prev, cur = cur, 2 * s * cur - prev
        return cur

    return f


def _spline_values(J, t):
    nb = max(J, 4)
    interior = np.linspace(0.0, 1.0, nb - 2)[1:-1]
    knots = np.r_[[0.0] * 4, interior, [1.0] * 4]
    return BSpline.design_matrix(t, knots, 3).toarray().T[:J]


@functools.lru_cache(maxsize=64)
def _basis_cached(kind, J, points, weights):
    from .funcspace import Grid

    grid = Grid(np.array(points), np.array(weights))
    t = grid.points
    if kind == "tri":
        vals = _tri_values(J, t)
    elif kind == "mono":
        funcs = [(lambda j: (lambda s: s**j))(j) for j in range(1, J + 1)]
        vals = np.array([c.values for c in gram_schmidt_functions(funcs, grid, dps=_GS_DPS)])
    elif kind == "cheb":
        funcs = [_cheb_mp(j) for j in range(1, J + 1)]
        vals = np.array([c.values for c in gram_schmidt_functions(funcs, grid, dps=_GS_DPS)])
    else:
        raw = [Curve(grid, v) for v in _spline_values(J, t)]
        vals = np.array([c.values for c in gram_schmidt(raw)])
    vals.setflags(write=False)
    return vals


def basis_system(kind, J, grid):
    """First ``J`` functions of an orthonormal system on ``grid``.

    ``tri`` is the trigonometric system; ``mono``, ``cheb`` and ``spl`` are
    Gram-Schmidt orthonormalizations of ``t^j`` (``j = 1..J``), shifted
    Chebyshev polynomials ``T_j(2t - 1)`` (``j = 1..J``) and cubic B-splines
    with equispaced interior knots.  Polynomial systems are orthonormalized
    in 60-digit arithmetic.
    """
    if kind not in BASIS_KINDS:
        raise ValueError(f"unknown basis {kind!r}; expected one of {BASIS_KINDS}")
    vals = _basis_cached(kind, int(J), tuple(grid.points.tolist()), tuple(grid.weights.tolist()))
    return BasisSystem(kind, vals, grid)


def draw_scores(kind, n, J, rng):
    """Scores ``xi_i * W_ij`` with one latent ``xi_i`` per curve shared over ``j``."""
    if kind not in SCORE_KINDS:
        raise ValueError(f"unknown score type {kind!r}; expected one of {SCORE_KINDS}")
    W = rng.standard_normal((n, J))
    if kind == "N1":
        return W
    if kind == "NN":
        xi = rng.standard_normal(n)
    else:
        xi = rng.exponential(1.0, n) - 1.0
    return xi[:, None] * W


def kl_sample(mu, profile, basis, score, n, rng, scores=None):
    """``n`` curves ``mu + sum_j sqrt(gamma_j) xi_ij phi_j``.

    ``scores`` overrides the random draw (shape ``(n, J_true)``).
    """
    J = profile.J_true
    if len(basis) < J:
        raise ValueError(f"basis has {len(basis)} functions, profile needs {J}")
    if scores is None:
        scores = draw_scores(score, n, J, rng)
    scores = np.asarray(scores, dtype=float)
    vals = mu.values + (scores * np.sqrt(profile.eigenvalues)) @ basis.functions[:J]
    return FunctionalSample(mu.grid, vals)


def _shape_fn(kind):
    return {
        "Mag": lambda t: np.ones_like(t),
        "Jump": lambda t: -2.0 * (t <= 0.2) + 1.0,
        "Peak": lambda t: -2.0 * ((t > 0.2) & (t <= 0.4)) + 1.0,
        "Lin": lambda t: 2 * t - 1,
        "Quad": lambda t: 8 * (t - 0.5) ** 2 - 1,
        "Cub": lambda t: 12 * np.sqrt(3) * t * (t - 0.5) * (t - 1),
        "Wig": lambda t: np.sin(10 * np.pi * (t - 0.05)),
    }[kind]


def alternative_mean(kind, c, grid):
    """``c`` times one of the seven shape alternatives."""
    if kind not in SHAPES:
        raise ValueError(f"unknown shape {kind!r}; expected one of {SHAPES}")
    if not 0.0 <= c <= 1.0:
        raise ValueError("scale c must lie in [0, 1]")
    return Curve(grid, c * _shape_fn(kind)(grid.points))


def two_sample_scenario(grid, n=50, shape="Cub", c=0.0, scores="NN", eigenvalues="equal",
                        eigenfunctions="equal", rng=None):
    """Two groups of ``n / 2`` curves; group 2 has mean ``c * shape``.

    ``eigenvalues="unequal"`` uses decay 5 for group 1 and 2.5 for group 2;
    ``eigenfunctions="unequal"`` uses the monomial system for group 1 and the
    Chebyshev system for group 2 (trigonometric for both otherwise).
    """
    from .twosample import TwoSampleData

    n1 = n // 2
    n2 = n - n1
    a1 = 5.0 if eigenvalues == "unequal" else 2.5
    b1, b2 = ("mono", "cheb") if eigenfunctions == "unequal" else ("tri", "tri")
    zero = grid.constant(0.0)
    g1 = kl_sample(zero, EigenProfile(a1), basis_system(b1, 20, grid), scores, n1, rng)
    g2 = kl_sample(alternative_mean(shape, c, grid), EigenProfile(2.5), basis_system(b2, 20, grid), scores, n2, rng)
    return TwoSampleData(g1, g2)


@dataclass(frozen=True, eq=False)
class SlopeOperator:
    """``(1-c) sum_{j=J0+1}^{2J0} s_j phi_mono,j (x) phi_mono,j + c sum_{j=1}^{2J0} s_j phi_tri,j (x) phi_tri,j``

    with ``s_j = 2 j^-b W_j``.  Coefficients are indexed from ``j = 1``.
    """

    c: float
    coef: np.ndarray  # s_1..s_{2 J0}
    J0: int
    mono: BasisSystem
    tri: BasisSystem

    def apply_values(self, x):
        w = self.mono.grid.weights
        x = np.asarray(x, dtype=float)
        out = 0.0
        if self.c != 1.0:
            lo, hi = self.J0, 2 * self.J0
            pm = self.mono.functions[lo:hi]
            out = out + (1 - self.c) * ((x @ (pm * w).T) * self.coef[lo:hi]) @ pm
        if self.c != 0.0:
            pt = self.tri.functions[: 2 * self.J0]
            out = out + self.c * ((x @ (pt * w).T) * self.coef[: 2 * self.J0]) @ pt
        return out

    def apply_to_mono_coordinates(self, coords):
        """Mono-basis coordinates of ``B x`` under the first term only, for ``x`` given by its
        mono coordinates; exact index arithmetic, no quadrature."""
        coords = np.asarray(coords, dtype=float)
        out = np.zeros(2 * self.J0)
        lo, hi = self.J0, 2 * self.J0
        k = min(hi, coords.size)
        out[lo:k] = (1 - self.c) * self.coef[lo:k] * coords[lo:k]
        return out


@dataclass(frozen=True, eq=False)
class FoFRScenario:
    data: FoFRData
    slope: SlopeOperator
    x0_coords: np.ndarray  # mono coordinates of x0 (length J_true)


def make_fofr_scenario(grid, aX=2.5, aE=2.5, b=1.5, c=0.0, n=50, scores="NN", rng=None,
                       J0=5, J_true=20, noise=True):
    """Regression design with regressors on the monomial system and errors on the Chebyshev one.

    ``noise=False`` sets every error curve to zero.
    """
    mono = basis_system("mono", J_true, grid)
    tri = basis_system("tri", 2 * J0, grid)
    cheb = basis_system("cheb", J_true, grid)
    signs = rng.choice(np.array([-1.0, 1.0]), size=2 * J0)
    j = np.arange(1, 2 * J0 + 1, dtype=float)
    slope = SlopeOperator(float(c), 2.0 * j**-b * signs, J0, mono, tri)

    zero = grid.constant(0.0)
    gx = EigenProfile(aX, J_true)
    X = kl_sample(zero, gx, mono, scores, n, rng)
    if noise:
        E = kl_sample(zero, EigenProfile(aE, J_true), cheb, scores, n, rng).values
    else:
        E = np.zeros((n, grid.size))
    Y = FunctionalSample(grid, slope.apply_values(X.values) + E)

    xi0 = draw_scores(scores, 1, J_true, rng)[0]
    coords = np.where(np.arange(J_true) < J0, np.sqrt(gx.eigenvalues) * xi0, 0.0)
    x0 = Curve(grid, coords @ mono.functions)
    return FoFRScenario(FoFRData(X, Y, x0), slope, coords)
