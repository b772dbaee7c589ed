"""Asymptotic constants, bias/variance formulas and known ground-truth models.

Everything here is deterministic: closed forms where they exist, otherwise
fixed-node composite Simpson with one refinement pass.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateModel, ModelSupportError
from .kernels import Kernel, deriv_power_integral
from .quadrature import simpson_refined

__all__ = [
    "TrueModel", "MODELS", "get_model", "standard_normal", "uniform01", "beta22",
    "point_mass", "asymp_var_density_t", "asymp_var_density_combined",
    "asymp_bias_density", "asymp_var_cdf_t", "asymp_var_cdf_combined",
    "asymp_bias_cdf", "mise_expansion", "optimal_bandwidth_density",
    "optimal_bandwidth_cdf", "check_bandwidth_compat", "expected_estimate",
    "expected_cdf_estimate", "even_moment_U", "npmle_variance_integral",
    "true_g",
]

_SQRT_PI = math.sqrt(math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TrueModel:
    """Ground-truth law of the unobserved ``Y``.

    ``support`` is the true support (possibly infinite); ``support_hint`` is
    a finite range holding essentially all the mass, used to size grids.
    ``sample_y(rng, n)`` draws from the model with a :class:`~unidecon.rng.StreamRNG`.
    """

    name: str
    f: Callable = field(repr=False)
    F: Callable = field(repr=False)
    f1: Callable = field(repr=False)
    f2: Callable = field(repr=False)
    sample_y: Callable = field(repr=False)
    support: tuple[float, float]
    support_hint: tuple[float, float]
    int_f2_sq: float
    int_F1mF: float
    int_f1_sq: float
    median: float
    kinks: tuple[float, ...] = ()


def _vec(fn):
    def wrapped(x):
        out = fn(np.asarray(x, dtype=float))
        return out if np.ndim(out) else float(out)
    return wrapped


def standard_normal() -> TrueModel:
    phi = lambda x: np.exp(-0.5 * x * x) * _INV_SQRT_2PI
    return TrueModel(
        name="stdnormal",
        f=_vec(phi),
        F=_vec(ndtr),
        f1=_vec(lambda x: -x * phi(x)),
        f2=_vec(lambda x: (x * x - 1.0) * phi(x)),
        sample_y=lambda rng, n: rng.normal(n),
        support=(-math.inf, math.inf),
        support_hint=(-6.0, 6.0),
        int_f2_sq=3.0 / (8.0 * _SQRT_PI),
        int_F1mF=1.0 / _SQRT_PI,
        int_f1_sq=1.0 / (4.0 * _SQRT_PI),
        median=0.0,
    )


def uniform01() -> TrueModel:
    inside = lambda x: (x >= 0.0) & (x < 1.0)
    return TrueModel(
        name="uniform01",
        f=_vec(lambda x: np.where(inside(x), 1.0, 0.0)),
        F=_vec(lambda x: np.clip(x, 0.0, 1.0)),
        f1=_vec(lambda x: np.zeros_like(x)),
        f2=_vec(lambda x: np.zeros_like(x)),
        sample_y=lambda rng, n: rng.uniform(n),
        support=(0.0, 1.0),
        support_hint=(0.0, 1.0),
        # jumps at 0 and 1: the derivative functionals diverge
        int_f2_sq=math.inf,
        int_F1mF=1.0 / 6.0,
        int_f1_sq=math.inf,
        median=0.5,
        kinks=(0.0, 1.0),
    )


def _beta22_ppf(p):
    # root in [0, 1] of 3x^2 - 2x^3 = p (trigonometric cubic solution)
    return 0.5 + np.cos(np.arccos(1.0 - 2.0 * p) / 3.0 + 4.0 * math.pi / 3.0)


def beta22() -> TrueModel:
    inside = lambda x: (x >= 0.0) & (x <= 1.0)
    xc = lambda x: np.clip(x, 0.0, 1.0)
    return TrueModel(
        name="beta22",
        f=_vec(lambda x: np.where(inside(x), 6.0 * x * (1.0 - x), 0.0)),
        F=_vec(lambda x: 3.0 * xc(x) ** 2 - 2.0 * xc(x) ** 3),
        f1=_vec(lambda x: np.where(inside(x), 6.0 - 12.0 * x, 0.0)),
        f2=_vec(lambda x: np.where(inside(x), -12.0, 0.0)),
        sample_y=lambda rng, n: _beta22_ppf(rng.uniform(n)),
        support=(0.0, 1.0),
        support_hint=(0.0, 1.0),
        int_f2_sq=math.inf,
        int_F1mF=9.0 / 70.0,
        int_f1_sq=12.0,
        median=0.5,
        kinks=(0.0, 1.0),
    )


def point_mass(at: float = 0.0) -> TrueModel:
    """Degenerate model ``Y = at``; has no density, for sampler tests only."""
    return TrueModel(
        name="pointmass",
        f=_vec(lambda x: np.zeros_like(x)),
        F=_vec(lambda x: np.where(x >= at, 1.0, 0.0)),
        f1=_vec(lambda x: np.zeros_like(x)),
        f2=_vec(lambda x: np.zeros_like(x)),
        sample_y=lambda rng, n: np.full(n, float(at)),
        support=(at, at),
        support_hint=(at, at),
        int_f2_sq=math.nan,
        int_F1mF=0.0,
        int_f1_sq=math.nan,
        median=at,
        kinks=(at,),
    )


MODELS = {
    "stdnormal": standard_normal,
    "uniform01": uniform01,
    "beta22": beta22,
    "pointmass": point_mass,
}


def get_model(name: str) -> TrueModel:
    try:
        return MODELS[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


def true_g(model: TrueModel, x):
    """Observation density ``F(x) - F(x - 1)``."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(model.F(x)) - np.asarray(model.F(x - 1.0))
    return out if out.ndim else float(out)


# ------------------------------------------------------- pointwise theory

def _tweight(F, t):
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return t * t * F + (1.0 - t) ** 2 * (1.0 - F)


def asymp_var_density_t(model, x, t, n, h, k: Kernel) -> float:
    """``(t^2 F + (1-t)^2 (1-F)) * dl2 / (n h^3)``."""
    return _tweight(model.F(x), t) * k.dl2 / (n * h**3)


def asymp_var_density_combined(model, x, n, h, k: Kernel) -> float:
    """``F (1 - F) * dl2 / (n h^3)``, the minimum over ``t`` (at ``t = 1 - F``)."""
    Fx = model.F(x)
    return Fx * (1.0 - Fx) * k.dl2 / (n * h**3)


def asymp_bias_density(model, x, h, k: Kernel) -> float:
    return 0.5 * h * h * model.f2(x) * k.m2


def asymp_var_cdf_t(model, x, t, n, h, k: Kernel) -> float:
    return _tweight(model.F(x), t) * k.l2 / (n * h)


def asymp_var_cdf_combined(model, x, n, h, k: Kernel) -> float:
    Fx = model.F(x)
    return Fx * (1.0 - Fx) * k.l2 / (n * h)


def asymp_bias_cdf(model, x, h, k: Kernel) -> float:
    return 0.5 * h * h * model.f1(x) * k.m2


# ----------------------------------------------------------- global theory

def mise_expansion(model, n, h, k: Kernel):
    """Leading MISE terms of the combined density estimator.

    Returns ``(bias_term, var_term, total)`` with
    ``bias_term = h^4/4 * int f''^2 * m2^2`` and
    ``var_term = int F(1-F) dx * dl2 / (n h^3)``.
    """
    if not (math.isfinite(model.int_f2_sq) and math.isfinite(model.int_F1mF)):
        raise DegenerateModel(f"model {model.name} lacks finite MISE functionals")
    bias = 0.25 * h**4 * model.int_f2_sq * k.m2**2
    var = model.int_F1mF * k.dl2 / (n * h**3)
    return bias, var, bias + var


def check_bandwidth_compat(n: int, h: float, kind: str = "density") -> bool:
    """Warn when ``h`` is below the pivot compatibility scale.

    Density bandwidths should dominate ``n**(-9/35)``, CDF bandwidths
    ``n**(-9/25)``.  Returns True if the check passes.
    """
    expo = {"density": 9.0 / 35.0, "cdf": 9.0 / 25.0}[kind]
    floor = n ** (-expo)
    if h <= floor:
        warnings.warn(
            f"{kind} bandwidth h={h:.4g} is not above n^(-{expo:.4g})={floor:.4g}; "
            "pivot error may not be negligible",
            RuntimeWarning,
            stacklevel=2,
        )
        return False
    return True


def optimal_bandwidth_density(model, n, k: Kernel) -> float:
    """Minimizer ``(3B / (A n))^(1/7)`` of the MISE expansion."""
    if n < 2:
        raise ValueError("n must be at least 2")
    A = model.int_f2_sq * k.m2**2
    B = model.int_F1mF * k.dl2
    if not A > 0 or not math.isfinite(A):
        raise DegenerateModel(f"bias functional A={A} unusable for {model.name}")
    h = (3.0 * B / (A * n)) ** (1.0 / 7.0)
    check_bandwidth_compat(n, h, "density")
    return h


def optimal_bandwidth_cdf(model, n, k: Kernel) -> float:
    """Minimizer ``(B' / (A' n))^(1/5)`` of ``h^4 A'/4 + B'/(n h)``; also the pivot rule."""
    if n < 2:
        raise ValueError("n must be at least 2")
    A = model.int_f1_sq * k.m2**2
    B = model.int_F1mF * k.l2
    if not A > 0 or not math.isfinite(A):
        raise DegenerateModel(f"bias functional A'={A} unusable for {model.name}")
    h = (B / (A * n)) ** 0.2
    check_bandwidth_compat(n, h, "cdf")
    return h


def _smoothed(model, target, k, h, x, nodes):
    pts = tuple(model.kinks)
    integrand = lambda u: k.w((x - u) / h) * target(u)
    return simpson_refined(integrand, x - h, x + h, nodes, tol=1e-10,
                           breakpoints=pts) / h


def expected_estimate(model, k: Kernel, h, x, nodes: int = 513) -> float:
    """Exact mean ``(1/h) int w((x-u)/h) f(u) du`` shared by all density estimators
    with deterministic weights.

    Raises QuadratureDivergence when the refinement pass disagrees.
    """
    return _smoothed(model, model.f, k, h, x, nodes)


def expected_cdf_estimate(model, k: Kernel, h, x, nodes: int = 513) -> float:
    """Exact mean ``(1/h) int w((x-u)/h) F(u) du`` of the CDF estimators."""
    return _smoothed(model, model.F, k, h, x, nodes)


def even_moment_U(model, x, t, h, k: Kernel, m: int) -> float:
    """Leading term of ``E U^m`` for the per-observation summand of the
    weighted density estimator: ``h^-(2m-1) (t^m F + (1-t)^m (1-F)) int w'^m``.
    """
    if m < 2 or m % 2:
        raise ValueError("m must be an even integer >= 2")
    Fx = model.F(x)
    coef = t**m * Fx + (1.0 - t) ** m * (1.0 - Fx)
    return coef * deriv_power_integral(k, m) / h ** (2 * m - 1)


def npmle_variance_integral(model, h, t, k: Kernel, nodes: int = 2001) -> float:
    """``int theta_{h,t,F}^2 dG`` for a model supported on ``[0, M)``.

    ``theta`` is built from its piecewise definition on ``x + k``,
    ``x in [0, 1]``, ``k = 0..m`` with ``m`` the largest integer below ``M+1``::

        theta(x)     = sum_{i=0..m} (1 - F(x+i)) w_h'(t - x - i)
        theta(x + k) = theta(x) - sum_{i=0..k-1} w_h'(t - x - i)

    and integrated against ``g(x + k) = F(x+k) - F(x+k-1)``.  For small
    ``h``, ``h^3`` times the result approaches ``F(t)(1-F(t)) int w'^2``.
    """
    lo, M = model.support
    if lo < 0.0 or not math.isfinite(M) or M <= 0.0:
        raise ModelSupportError(f"model {model.name} is not supported on some [0, M)")
    if not 0.0 <= t < M:
        raise ModelSupportError(f"t={t} outside [0, {M})")
    m = math.ceil(M + 1.0) - 1

    def wh1(y):
        return k.w_deriv(y / h) / (h * h)

    def theta0(x):
        return sum((1.0 - model.F(x + i)) * wh1(t - x - i) for i in range(m + 1))

    def integrand_k(kk):
        def fn(x):
            th = theta0(x)
            for i in range(kk):
                th = th - wh1(t - x - i)
            return th * th * true_g(model, x + kk)
        return fn

    # kernel support edges and kinks of g split the panels
    bps = []
    for i in range(m + 1):
        bps += [t - i - h, t - i, t - i + h]
    total = 0.0
    for kk in range(m + 1):
        total += simpson_refined(integrand_k(kk), 0.0, 1.0, nodes, tol=1e-8,
                                 breakpoints=bps)
    return total
