"""Monte Carlo size and power studies over a grid of alternative scales.

Every replicate ``r`` draws its data from the stream ``(seed, "data", r)``
and its bootstrap/direction randomness from ``(seed, "test", r)``; the same
streams are reused for every scale ``c`` (common random numbers), and no
stream depends on scheduling, so results are identical for any worker count.
"""

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .depth import DEPTH_KINDS, DepthSpec
from .fofr import FOFR_METHODS, fofr_tests
from .funcspace import make_grid
from .rng import stream
from .simgen import SCORE_KINDS, SHAPES, make_fofr_scenario, two_sample_scenario
from .twosample import TWO_SAMPLE_METHODS, default_depth_spec, two_sample_tests

__all__ = [
    "WORKERS_ENV",
    "PowerConfig",
    "PowerResult",
    "default_workers",
    "replicate_pvalues",
    "run_power",
    "power_table_csv",
]

WORKERS_ENV = "DEPTHSTAT_WORKERS"
PROBLEMS = ("two-sample", "fofr")


def default_workers():
    """Worker count from the ``DEPTHSTAT_WORKERS`` environment variable (default 1)."""
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class PowerConfig:
    """Scenario, methods and Monte Carlo sizes of a power study."""

    problem: str = "two-sample"
    methods: tuple = ("ITD", "IFD", "RHD", "KD", "L2", "SUP", "FINT", "FMAX")
    c_values: tuple = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    reps: int = 1000
    B: int = 1000
    alpha: float = 0.05
    seed: int = 0
    grid_size: int = 50
    n: int = 50
    scores: str = "NN"
    # two-sample knobs
    shape: str = "Cub"
    eigenvalues: str = "equal"
    eigenfunctions: str = "equal"
    # fofr knobs
    aX: float = 2.5
    aE: float = 2.5
    b: float = 1.5
    # depth tuning; None means the problem default
    u_kd: float = None
    u_rhd: float = None
    kernel: str = "gaussian"
    projections_M: int = 500
    reference: str = "leave-one-out"

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        methods = tuple(m.upper() for m in self.methods)
        object.__setattr__(self, "methods", methods)
        allowed = TWO_SAMPLE_METHODS if self.problem == "two-sample" else FOFR_METHODS
        for m in methods:
            if m not in allowed:
                raise ValueError(f"method {m!r} is not available for {self.problem}; expected one of {allowed}")
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        if self.reps < 1 or self.B < 1:
            raise ValueError("reps and B must be positive")
        if self.scores not in SCORE_KINDS:
            raise ValueError(f"unknown score type {self.scores!r}")
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def scenario(self):
        if self.problem == "two-sample":
            return (
                f"two-sample:{self.shape}:{self.scores}:val-{self.eigenvalues}:"
                f"fun-{self.eigenfunctions}:n{self.n}"
            )
        return f"fofr:aX{self.aX:g}:aE{self.aE:g}:b{self.b:g}:{self.scores}:n{self.n}"

    def depth_specs(self):
        specs = {}
        for m in self.methods:
            if m not in DEPTH_KINDS:
                continue
            spec = default_depth_spec(m, self.problem)
            u = {"KD": self.u_kd, "RHD": self.u_rhd}.get(m)
            specs[m] = DepthSpec(
                m,
                quantile_u=spec.quantile_u if u is None else u,
                kernel=self.kernel,
                projections_M=self.projections_M,
            )
        return specs

    def to_dict(self):
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["c_values"] = list(self.c_values)
        return d


@dataclass
class PowerResult:
    config: PowerConfig
    pvalues: dict = field(default_factory=dict)  # (c, method) -> array of length reps

    def rejections(self, c, method):
        return int(np.sum(self.pvalues[(c, method)] <= self.config.alpha))

    def rate(self, c, method):
        return self.rejections(c, method) / self.config.reps


def replicate_pvalues(cfg, c, r):
    """P-values of every configured method on replicate ``r`` at scale ``c``."""
    grid = make_grid(cfg.grid_size)
    data_rng = stream(cfg.seed, "data", r)
    test_rng = stream(cfg.seed, "test", r)
    specs = cfg.depth_specs()
    if cfg.problem == "two-sample":
        d = two_sample_scenario(
            grid, cfg.n, cfg.shape, c, cfg.scores, cfg.eigenvalues, cfg.eigenfunctions, rng=data_rng
        )
        reports = two_sample_tests(d, cfg.methods, cfg.B, specs, rng=test_rng, reference=cfg.reference)
    else:
        sc = make_fofr_scenario(grid, cfg.aX, cfg.aE, cfg.b, c, cfg.n, cfg.scores, rng=data_rng)
        reports, _ = fofr_tests(sc.data, cfg.methods, cfg.B, specs, rng=test_rng, reference=cfg.reference)
    return [rep.pvalue for rep in reports]


def _task(args):
    cfg, c, r = args
    return c, r, replicate_pvalues(cfg, c, r)


def run_power(cfg, workers=None):
    """Run ``reps`` replicates at every ``c``; ``workers > 1`` uses a process pool."""
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be positive")
    tasks = [(cfg, c, r) for c in cfg.c_values for r in range(cfg.reps)]
    if workers == 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    table = {(c, m): np.empty(cfg.reps) for c in cfg.c_values for m in cfg.methods}
    for c, r, pvals in results:
        for m, p in zip(cfg.methods, pvals):
            table[(c, m)][r] = p
    return PowerResult(cfg, table)


def power_table_csv(result):
    """CSV with columns scenario, method, c, rejections, replicates, rate."""
    cfg = result.config
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["scenario", "method", "c", "rejections", "replicates", "rate"])
    for m in cfg.methods:
        for c in cfg.c_values:
            k = result.rejections(c, m)
            # repr is the shortest string that parses back to the same double
            w.writerow([cfg.scenario, m, repr(c), k, cfg.reps, repr(k / cfg.reps)])
    return out.getvalue()
