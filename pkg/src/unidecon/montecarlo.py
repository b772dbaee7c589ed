"""Seeded replication studies comparing estimators with their asymptotics.

Replication ``r`` of a study with seed ``s`` draws its sample from
``StreamRNG(s, r)``: first ``n`` draws of ``Y`` from the model, then ``n``
uniforms for ``Z``.  Replications therefore do not depend on each other or
on the order in which worker threads run them, and every reduction walks
the replicate values in replication-index order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import theory
from .deconv import (CDF_ESTIMATORS, DENSITY_ESTIMATORS, ESTIMATORS, FixedT, Grid,
                     LogisticCdf, PivotH, PivotHalf, WeightSpec, evaluate_points)
from .errors import InvalidGrid
from .kde import Sample
from .kernels import get_kernel
from .quadrature import trapezoid_uniform
from .rng import StreamRNG

__all__ = ["McConfig", "McReport", "sample_convolution", "replicate_sample",
           "pointwise_study", "pointwise_studies", "mise_study", "pivot_mse_study",
           "default_mise_grid", "worker_count"]


def worker_count() -> int:
    env = os.environ.get("UNIDECON_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"UNIDECON_THREADS must be an integer, got {env!r}") from None
    return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class McConfig:
    model: str
    n: int
    reps: int
    h: float
    h_pivot: float | None = None
    estimator: str = "f-combined"
    weight: WeightSpec = PivotHalf()
    eval_points: tuple[float, ...] = ()
    grid: Grid | None = None
    seed: int = 0
    kernel: str = "biweight"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.reps < 2:
            raise ValueError("reps must be at least 2")
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.h_pivot is not None and not self.h_pivot > 0:
            raise ValueError("h_pivot must be positive")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        object.__setattr__(self, "eval_points", tuple(float(x) for x in self.eval_points))

    @property
    def hp(self) -> float:
        return self.h if self.h_pivot is None else self.h_pivot

    def echo(self) -> dict:
        d = asdict(self)
        d["weight"] = self.weight.describe()
        d["grid"] = None if self.grid is None else f"{self.grid.x0}:{self.grid.dx}:{self.grid.count}"
        d["eval_points"] = " ".join(repr(x) for x in self.eval_points)
        return d


@dataclass
class McReport:
    kind: str
    config: McConfig
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    # replicate-by-point matrix (pointwise) or per-replicate ISE (mise)
    values: np.ndarray | None = field(default=None, repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows])

    def row_at(self, x: float) -> dict:
        for row in self.rows:
            if row["x"] == x:
                return row
        raise KeyError(x)


def sample_convolution(model, n: int, rng: StreamRNG) -> Sample:
    """Draw ``X = Y + Z`` with ``Z ~ Uniform[0, 1)``, returned sorted."""
    y = np.asarray(model.sample_y(rng, n), dtype=float)
    z = rng.uniform(n)
    return Sample(y + z)


def replicate_sample(model, n: int, seed: int, rep: int) -> Sample:
    return sample_convolution(model, n, StreamRNG(seed, rep))


def _map_reps(reps: int, fn) -> list:
    workers = worker_count()
    if workers == 1 or reps < 8:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(reps)))


def _moments(vals: np.ndarray):
    """Mean, unbiased variance, skewness, excess kurtosis and standard errors
    of replicate values along axis 0."""
    M = vals.shape[0]
    mean = vals.mean(axis=0)
    c = vals - mean
    m2 = (c**2).mean(axis=0)
    m3 = (c**3).mean(axis=0)
    m4 = (c**4).mean(axis=0)
    var = m2 * M / (M - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        skew = np.where(m2 > 0, m3 / m2**1.5, 0.0)
        kurt = np.where(m2 > 0, m4 / m2**2 - 3.0, 0.0)
    se_mean = np.sqrt(var / M)
    se_var = np.sqrt(np.maximum(m4 - m2 * m2, 0.0) / M)
    return mean, var, skew, kurt, se_mean, se_var


def _theory_t(estimator: str, weight: WeightSpec, model, x: float):
    """Fixed weight ``t`` on the left-shift term implied by an estimator, or
    None for the optimally combined estimators."""
    if estimator in ("f-minus", "cdf-minus"):
        return 1.0
    if estimator in ("f-plus", "cdf-plus"):
        return 0.0
    if estimator == "pivot-half":
        return 0.5
    if estimator == "pivot-h":
        H = weight.H if isinstance(weight, PivotH) and weight.H is not None \
            else LogisticCdf(model.median, 1.0)
        return 1.0 - float(H(x))
    if estimator in ("f-weighted", "cdf-weighted"):
        return weight.t
    return None


def _theory_point(cfg: McConfig, model, k, x: float) -> dict:
    est, h, n = cfg.estimator, cfg.h, cfg.n
    t = _theory_t(est, cfg.weight, model, x)
    if est in DENSITY_ESTIMATORS:
        truth = float(model.f(x))
        bias = theory.asymp_bias_density(model, x, h, k)
        var = (theory.asymp_var_density_combined(model, x, n, h, k) if t is None
               else theory.asymp_var_density_t(model, x, t, n, h, k))
        exact = theory.expected_estimate(model, k, h, x)
    else:
        truth = float(model.F(x))
        bias = theory.asymp_bias_cdf(model, x, h, k)
        var = (theory.asymp_var_cdf_combined(model, x, n, h, k) if t is None
               else theory.asymp_var_cdf_t(model, x, t, n, h, k))
        exact = theory.expected_cdf_estimate(model, k, h, x)
    return {"truth": truth, "theory_bias": bias, "theory_var": var, "exact_mean": exact}


def _replicate_values(cfg: McConfig, points, estimators):
    model = theory.get_model(cfg.model)
    k = get_kernel(cfg.kernel)

    def one(r):
        s = replicate_sample(model, cfg.n, cfg.seed, r)
        return evaluate_points(s, k, cfg.h, points, cfg.estimator, cfg.weight,
                               cfg.hp, many=estimators)

    results = _map_reps(cfg.reps, one)
    return {name: np.stack([res[name] for res in results]) for name in estimators}


def pointwise_studies(cfg: McConfig, estimators) -> dict[str, McReport]:
    """Run :func:`pointwise_study` for several estimators on shared replicates.

    Each report equals the one :func:`pointwise_study` gives for
    ``cfg`` with that estimator substituted.
    """
    if not cfg.eval_points:
        raise ValueError("pointwise studies need eval_points")
    estimators = tuple(estimators)
    pts = np.array(cfg.eval_points)
    vals = _replicate_values(cfg, pts, estimators)
    model = theory.get_model(cfg.model)
    k = get_kernel(cfg.kernel)
    out = {}
    for name in estimators:
        sub = replace(cfg, estimator=name)
        if name in ("f-weighted", "cdf-weighted") and not isinstance(sub.weight, FixedT):
            raise ValueError(f"{name} needs a fixed weight")
        mean, var, skew, kurt, se_mean, se_var = _moments(vals[name])
        rows = []
        for i, x in enumerate(cfg.eval_points):
            th = _theory_point(sub, model, k, x)
            rows.append({
                "x": x,
                "mean": float(mean[i]),
                "bias": float(mean[i] - th["truth"]),
                "var": float(var[i]),
                "skew": float(skew[i]),
                "exkurt": float(kurt[i]),
                "se_mean": float(se_mean[i]),
                "se_var": float(se_var[i]),
                **th,
            })
        out[name] = McReport("pointwise", sub, rows, {"reps": cfg.reps}, vals[name])
    return out


def pointwise_study(cfg: McConfig) -> McReport:
    """Empirical mean, variance and shape of one estimator at ``cfg.eval_points``
    over ``cfg.reps`` replications, next to the asymptotic bias and variance."""
    return pointwise_studies(cfg, (cfg.estimator,))[cfg.estimator]


def default_mise_grid(model, h: float) -> Grid:
    """Grid with step ``1/P <= h/20`` over the support hint widened by ``1 + h + 0.5``.

    A step dividing one keeps integer shifts on the lattice.
    """
    P = math.ceil(20.0 / h)
    lo = model.support_hint[0] - (1.0 + h + 0.5)
    hi = model.support_hint[1] + (1.0 + h + 0.5)
    lo = math.floor(lo * P) / P
    count = int(math.ceil((hi - lo) * P)) + 1
    return Grid(lo, 1.0 / P, count)


def mise_study(cfg: McConfig) -> McReport:
    """Average integrated squared error of a density estimator on a grid."""
    if cfg.estimator not in DENSITY_ESTIMATORS:
        raise ValueError("mise_study needs a density estimator")
    model = theory.get_model(cfg.model)
    k = get_kernel(cfg.kernel)
    grid = cfg.grid or default_mise_grid(model, cfg.h)
    if grid.dx > cfg.h / 2.0:
        raise InvalidGrid(f"grid step {grid.dx} too coarse for h={cfg.h}")
    vals = _replicate_values(cfg, grid, (cfg.estimator,))[cfg.estimator]
    f = np.asarray(model.f(grid.x), dtype=float)
    ise = np.array([trapezoid_uniform((v - f) ** 2, grid.dx) for v in vals])
    mean_curve = vals.mean(axis=0)
    var_curve = vals.var(axis=0, ddof=1)
    mise = float(ise.mean())
    se = float(ise.std(ddof=1) / math.sqrt(cfg.reps))
    summary = {
        "reps": cfg.reps,
        "mise": mise,
        "mise_se": se,
        "int_sq_bias": trapezoid_uniform((mean_curve - f) ** 2, grid.dx),
        "int_var": trapezoid_uniform(var_curve, grid.dx),
        "grid": f"{grid.x0}:{grid.dx}:{grid.count}",
    }
    try:
        b, v, tot = theory.mise_expansion(model, cfg.n, cfg.h, k)
        summary.update(theory_bias_term=b, theory_var_term=v, theory_total=tot)
    except theory.DegenerateModel:
        pass
    rows = [{"x": float(x), "mean": float(m), "var": float(s), "truth": float(t)}
            for x, m, s, t in zip(grid.x, mean_curve, var_curve, f)]
    return McReport("mise", cfg, rows, summary, ise)


def pivot_mse_study(cfg: McConfig) -> McReport:
    """Second and fourth moments of a CDF estimator's error.

    Pointwise at ``cfg.eval_points``, or on ``cfg.grid`` where the integral
    of the root fourth moment is also reported.
    """
    if cfg.estimator not in CDF_ESTIMATORS:
        raise ValueError("pivot_mse_study needs a CDF estimator")
    model = theory.get_model(cfg.model)
    if cfg.grid is not None:
        points, xs = cfg.grid, cfg.grid.x
    elif cfg.eval_points:
        points = xs = np.array(cfg.eval_points)
    else:
        raise ValueError("pivot_mse_study needs eval_points or a grid")
    vals = _replicate_values(cfg, points, (cfg.estimator,))[cfg.estimator]
    err = vals - np.asarray(model.F(xs), dtype=float)
    mse = (err**2).mean(axis=0)
    m4 = (err**4).mean(axis=0)
    se_mse = (err**2).std(axis=0, ddof=1) / math.sqrt(cfg.reps)
    rows = [{"x": float(x), "mse": float(a), "fourth": float(b), "se_mse": float(c)}
            for x, a, b, c in zip(xs, mse, m4, se_mse)]
    summary = {"reps": cfg.reps}
    if cfg.grid is not None:
        summary["int_root_fourth"] = trapezoid_uniform(np.sqrt(m4), cfg.grid.dx)
        summary["int_mse"] = trapezoid_uniform(mse, cfg.grid.dx)
    return McReport("pivot-mse", cfg, rows, summary)
