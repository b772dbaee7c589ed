"""Inversion estimators for uniform deconvolution.

With ``X = Y + Z`` and ``Z ~ Uniform[0, 1)`` the observation density is
``g(x) = F(x) - F(x-1)``, which can be inverted in two ways::

    F(x) = sum_{j>=0} g(x-j)        f(x) =  sum_{j>=0} g'(x-j)
    F(x) = 1 - sum_{j>=1} g(x+j)    f(x) = -sum_{j>=1} g'(x+j)

Plugging a kernel estimate of ``g`` into the left-shift formulas gives
``f_minus``/``F_minus``; the right-shift formulas give ``f_plus``/``F_plus``.
The left-shift estimates vanish left of the data and become periodic to the
right of it, the right-shift estimates the other way around.  Weighting them
by ``1 - F`` and ``F`` respectively, with ``F`` replaced by a preliminary
("pivot") estimate, gives estimators that behave well in both tails.

Two evaluation paths exist.  The scalar functions (``f_minus`` etc.) are the
reference implementation and follow the shift-sum definitions literally.
:func:`evaluate_points` and :func:`evaluate_curve` are vectorized; on grids
whose step divides one they use a lattice cumulative sum, otherwise a
per-observation shift sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import InvalidGrid
from .kde import Sample, check_bandwidth, g_hat, g_hat_deriv
from .kernels import Kernel
from .quadrature import trapezoid_uniform

__all__ = [
    "FixedT", "PivotHalf", "PivotH", "PivotExternal", "WeightSpec",
    "LogisticCdf", "Curve", "Grid", "ESTIMATORS",
    "f_minus", "f_plus", "f_weighted", "F_minus", "F_plus", "F_weighted",
    "pivot_half", "pivot_H", "clip_weight", "pivot_value",
    "f_combined", "F_combined", "evaluate_points", "evaluate_curve",
    "normalize_density", "true_inversion_density", "true_inversion_cdf",
    "parse_grid",
]


# ---------------------------------------------------------------- weights

@dataclass(frozen=True)
class LogisticCdf:
    """Logistic distribution function, used as the default tail weight ``H``."""

    loc: float = 0.0
    scale: float = 1.0

    def __call__(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        out = 0.5 * (1.0 + np.tanh(0.5 * z))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class FixedT:
    """Constant weight ``t`` on the left-shift estimate."""

    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0 or math.isnan(self.t):
            raise ValueError(f"weight t must lie in [0, 1], got {self.t}")

    def describe(self):
        return f"fixed-t={self.t!r}"


@dataclass(frozen=True)
class PivotHalf:
    """Pivot ``(F_minus + F_plus) / 2`` with its own bandwidth."""

    def describe(self):
        return "pivot-half"


@dataclass(frozen=True)
class PivotH:
    """Pivot ``(1 - H) F_minus + H F_plus``.

    ``H=None`` means a logistic CDF with scale 1 centred at the sample
    median, resolved when the weight is evaluated.
    """

    H: Callable | None = None

    def resolve(self, s: Sample) -> Callable:
        if self.H is not None:
            return self.H
        return LogisticCdf(float(np.median(s.values)), 1.0)

    def describe(self):
        if self.H is None:
            return "pivot-H(logistic@median,1)"
        return f"pivot-H({self.H!r})"


@dataclass(frozen=True)
class PivotExternal:
    """Pivot read off a precomputed curve by linear interpolation."""

    curve: "Curve"

    def __call__(self, x):
        return np.interp(x, self.curve.x, self.curve.values)

    def describe(self):
        return f"pivot-external({self.curve.meta.get('estimator', '?')})"


WeightSpec = Union[FixedT, PivotHalf, PivotH, PivotExternal]


# ------------------------------------------------------------------ curve

@dataclass(frozen=True)
class Grid:
    x0: float
    dx: float
    count: int

    def __post_init__(self):
        if not (self.dx > 0 and math.isfinite(self.dx)):
            raise InvalidGrid(f"grid step must be positive, got {self.dx}")
        if int(self.count) < 2:
            raise InvalidGrid(f"grid needs at least 2 points, got {self.count}")
        if not math.isfinite(self.x0):
            raise InvalidGrid("grid origin must be finite")

    @property
    def x(self) -> np.ndarray:
        return self.x0 + np.arange(self.count) * self.dx


def parse_grid(text: str) -> Grid:
    """Parse ``lo:hi:step``; the last point is the largest ``lo + i*step <= hi``."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise InvalidGrid(f"grid must look like lo:hi:step, got {text!r}") from None
    if not step > 0:
        raise InvalidGrid(f"grid step must be positive, got {step}")
    if hi < lo:
        raise InvalidGrid(f"grid upper end {hi} below lower end {lo}")
    # small slack so that e.g. -4:4:0.01 keeps the endpoint 4
    count = int(math.floor((hi - lo) / step * (1 + 1e-12) + 1e-9)) + 1
    return Grid(lo, step, count)


@dataclass
class Curve:
    """Estimator values on the uniform grid ``x0 + i*dx``."""

    x0: float
    dx: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size < 2:
            raise InvalidGrid("a curve needs at least 2 values")
        if not self.dx > 0:
            raise InvalidGrid("curve step must be positive")

    @property
    def x(self) -> np.ndarray:
        return self.x0 + np.arange(self.values.size) * self.dx

    def integral(self) -> float:
        return trapezoid_uniform(self.values, self.dx)


# ------------------------------------------------------- scalar reference

def _minus_range(s: Sample, h: float, x: float) -> range:
    # x - j must fall inside (lo - h, hi + h) for a nonzero term
    J = max(0, math.ceil(x - (s.lo - h)))
    start = min(J, max(0, math.floor(x - (s.hi + h))))
    return range(start, J + 1)


def _plus_range(s: Sample, h: float, x: float) -> range:
    J = max(1, math.ceil((s.hi + h) - x))
    start = min(J, max(1, math.floor((s.lo - h) - x)))
    return range(start, J + 1)


def f_minus(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Left-shift density estimate ``sum_{j>=0} g_hat'(x - j)``."""
    h = check_bandwidth(h)
    total = 0.0
    for j in _minus_range(s, h, x):
        total += g_hat_deriv(s, k, h, x - j)
    return total


def f_plus(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Right-shift density estimate ``-sum_{j>=1} g_hat'(x + j)``."""
    h = check_bandwidth(h)
    total = 0.0
    for j in _plus_range(s, h, x):
        total += g_hat_deriv(s, k, h, x + j)
    return -total


def f_weighted(s: Sample, k: Kernel, h: float, x: float, t: float) -> float:
    t = FixedT(t).t
    return t * f_minus(s, k, h, x) + (1.0 - t) * f_plus(s, k, h, x)


def F_minus(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Left-shift CDF estimate ``sum_{j>=0} g_hat(x - j)``; may leave [0, 1]."""
    h = check_bandwidth(h)
    total = 0.0
    for j in _minus_range(s, h, x):
        total += g_hat(s, k, h, x - j)
    return total


def F_plus(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Right-shift CDF estimate ``1 - sum_{j>=1} g_hat(x + j)``."""
    h = check_bandwidth(h)
    total = 0.0
    for j in _plus_range(s, h, x):
        total += g_hat(s, k, h, x + j)
    return 1.0 - total


def F_weighted(s: Sample, k: Kernel, h: float, x: float, t: float) -> float:
    t = FixedT(t).t
    return t * F_minus(s, k, h, x) + (1.0 - t) * F_plus(s, k, h, x)


def clip_weight(v):
    """Clip a raw pivot value into [0, 1] so it can serve as a weight."""
    out = np.clip(v, 0.0, 1.0)
    return out if np.ndim(out) else float(out)


def pivot_half(s: Sample, k: Kernel, h_pivot: float, x: float) -> float:
    """Unclipped average of ``F_minus`` and ``F_plus``."""
    return 0.5 * (F_minus(s, k, h_pivot, x) + F_plus(s, k, h_pivot, x))


def pivot_H(s: Sample, k: Kernel, h_pivot: float, x: float, H: Callable) -> float:
    """Unclipped ``(1 - H(x)) F_minus(x) + H(x) F_plus(x)``."""
    hx = float(H(x))
    return (1.0 - hx) * F_minus(s, k, h_pivot, x) + hx * F_plus(s, k, h_pivot, x)


def pivot_value(s: Sample, k: Kernel, h_pivot: float, x: float,
                pivot: WeightSpec) -> float:
    """Clipped pivot estimate of ``F(x)`` used as the combination weight."""
    if isinstance(pivot, FixedT):
        return 1.0 - pivot.t
    if isinstance(pivot, PivotHalf):
        raw = pivot_half(s, k, h_pivot, x)
    elif isinstance(pivot, PivotH):
        raw = pivot_H(s, k, h_pivot, x, pivot.resolve(s))
    elif isinstance(pivot, PivotExternal):
        raw = float(pivot(x))
    else:
        raise TypeError(f"unsupported weight spec {pivot!r}")
    return clip_weight(raw)


def f_combined(s: Sample, k: Kernel, h: float, x: float,
               pivot: WeightSpec = PivotHalf(), h_pivot: float | None = None) -> float:
    """``(1 - Fhat) f_minus + Fhat f_plus`` with a clipped pivot ``Fhat``."""
    h_pivot = h if h_pivot is None else h_pivot
    fh = pivot_value(s, k, h_pivot, x, pivot)
    return (1.0 - fh) * f_minus(s, k, h, x) + fh * f_plus(s, k, h, x)


def F_combined(s: Sample, k: Kernel, h: float, x: float,
               pivot: WeightSpec = PivotHalf(), h_pivot: float | None = None) -> float:
    h_pivot = h if h_pivot is None else h_pivot
    fh = pivot_value(s, k, h_pivot, x, pivot)
    return (1.0 - fh) * F_minus(s, k, h, x) + fh * F_plus(s, k, h, x)


# ------------------------------------------------------ vectorized sums

_CHUNK = 1 << 21
_MAX_LATTICE = 20_000_000


def _pair_shift_sums(values, fn, h, xs):
    """Per point, ``(sum_{j>=0} fn((x-j-X)/h), sum_{j>=1} fn((x+j-X)/h))`` over X."""
    xs = np.asarray(xs, dtype=float)
    left = np.empty(xs.size)
    right = np.empty(xs.size)
    rows = max(1, _CHUNK // max(1, values.size))
    offsets = int(math.ceil(2.0 * h)) + 1
    for a in range(0, xs.size, rows):
        u = xs[a:a + rows, None] - values[None, :]
        j0 = np.ceil(u - h)
        lsum = np.zeros_like(u)
        rsum = np.zeros_like(u)
        for off in range(offsets + 1):
            j = j0 + off
            val = fn((u - j) / h)
            lsum += np.where(j >= 0, val, 0.0)
            rsum += np.where(j <= -1, val, 0.0)
        left[a:a + rows] = lsum.sum(axis=1)
        right[a:a + rows] = rsum.sum(axis=1)
    return left, right


def _lattice_period(grid: Grid):
    P = int(round(1.0 / grid.dx))
    if P >= 1 and abs(P * grid.dx - 1.0) <= 1e-12:
        return P
    return None


def _lattice_shift_sums(values, fn, h, grid: Grid, P: int):
    """Same sums as :func:`_pair_shift_sums` on a grid with ``dx = 1/P``.

    The kernel sum ``G`` is scattered onto an extended lattice once; shifts
    by integers are shifts by ``P`` lattice cells, so the one-sided series
    become column-wise cumulative sums.
    """
    dx, x0 = grid.dx, grid.x0
    lo = min(0, math.floor((values[0] - h - x0) / dx) - 1)
    hi = max(grid.count - 1, math.ceil((values[-1] + h - x0) / dx) + 1)
    L = hi - lo + 1
    pad = (-L) % P
    T = L + pad
    width = int(math.ceil(2.0 * h / dx)) + 3
    base = np.ceil((values - h - x0) / dx).astype(np.int64) - 1
    idx = base[:, None] + np.arange(width)[None, :]
    u = (x0 + idx * dx - values[:, None]) / h
    weights = np.asarray(fn(u), dtype=float)
    idx = idx - lo + pad
    keep = (idx >= 0) & (idx < T)
    G = np.bincount(idx[keep], weights=weights[keep], minlength=T)
    table = G.reshape(T // P, P)
    left = np.cumsum(table, axis=0)
    tail = np.cumsum(table[::-1], axis=0)[::-1] - table
    sl = slice(pad - lo, pad - lo + grid.count)
    return left.ravel()[sl], tail.ravel()[sl]


def _shift_sums(s: Sample, fn, h, points):
    if isinstance(points, Grid):
        P = _lattice_period(points)
        if P is not None:
            span = (max(points.x[-1], s.hi + h) - min(points.x0, s.lo - h)) / points.dx
            if span < _MAX_LATTICE:
                return _lattice_shift_sums(s.values, fn, h, points, P)
        points = points.x
    return _pair_shift_sums(s.values, fn, h, points)


DENSITY_ESTIMATORS = ("f-minus", "f-plus", "f-weighted", "f-combined")
CDF_ESTIMATORS = ("cdf-minus", "cdf-plus", "cdf-weighted", "pivot-half",
                  "pivot-h", "cdf-combined")
ESTIMATORS = DENSITY_ESTIMATORS + CDF_ESTIMATORS


class _Evaluator:
    """Caches shift sums of one sample at one set of points."""

    def __init__(self, s: Sample, k: Kernel, points):
        self.s, self.k, self.points = s, k, points
        self._cache = {}
        self.x = points.x if isinstance(points, Grid) else np.asarray(points, float)

    def _sums(self, h, deriv):
        key = (h, deriv)
        if key not in self._cache:
            fn = self.k.w_deriv if deriv else self.k.w
            self._cache[key] = _shift_sums(self.s, fn, h, self.points)
        return self._cache[key]

    def dens(self, h):
        left, right = self._sums(h, True)
        c = self.s.n * h * h
        return left / c, -right / c

    def cdf(self, h):
        left, right = self._sums(h, False)
        c = self.s.n * h
        return left / c, 1.0 - right / c

    def pivot(self, weight, h_pivot, raw=False):
        if isinstance(weight, FixedT):
            return np.full(self.x.shape, 1.0 - weight.t)
        if isinstance(weight, PivotHalf):
            Fm, Fp = self.cdf(h_pivot)
            val = 0.5 * (Fm + Fp)
        elif isinstance(weight, PivotH):
            Fm, Fp = self.cdf(h_pivot)
            H = np.asarray(weight.resolve(self.s)(self.x), dtype=float)
            val = (1.0 - H) * Fm + H * Fp
        elif isinstance(weight, PivotExternal):
            val = np.asarray(weight(self.x), dtype=float)
        else:
            raise TypeError(f"unsupported weight spec {weight!r}")
        return val if raw else np.clip(val, 0.0, 1.0)

    def estimate(self, estimator, h, weight, h_pivot):
        if estimator == "f-minus":
            return self.dens(h)[0]
        if estimator == "f-plus":
            return self.dens(h)[1]
        if estimator == "cdf-minus":
            return self.cdf(h)[0]
        if estimator == "cdf-plus":
            return self.cdf(h)[1]
        if estimator == "pivot-half":
            # pivot estimators are evaluated at their own bandwidth h
            return self.pivot(PivotHalf(), h, raw=True)
        if estimator == "pivot-h":
            w = weight if isinstance(weight, PivotH) else PivotH()
            return self.pivot(w, h, raw=True)
        if estimator in ("f-weighted", "cdf-weighted"):
            if not isinstance(weight, FixedT):
                raise ValueError(f"{estimator} needs a fixed weight t")
            lo, hi = self.dens(h) if estimator == "f-weighted" else self.cdf(h)
            return weight.t * lo + (1.0 - weight.t) * hi
        if estimator in ("f-combined", "cdf-combined"):
            fh = self.pivot(weight, h_pivot)
            lo, hi = self.dens(h) if estimator == "f-combined" else self.cdf(h)
            return (1.0 - fh) * lo + fh * hi
        raise ValueError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")


def evaluate_points(s: Sample, k: Kernel, h: float, points, estimator: str,
                    weight: WeightSpec = PivotHalf(), h_pivot: float | None = None,
                    many: tuple[str, ...] | None = None):
    """Vectorized estimator values at ``points`` (array or :class:`Grid`).

    If ``many`` is given, returns a dict of estimator name to values sharing
    one set of cached shift sums, and ``estimator`` is ignored.
    """
    h = check_bandwidth(h)
    h_pivot = h if h_pivot is None else check_bandwidth(h_pivot)
    ev = _Evaluator(s, k, points)
    if many is not None:
        return {name: ev.estimate(name, h, weight, h_pivot) for name in many}
    return ev.estimate(estimator, h, weight, h_pivot)


def normalize_density(values, dx):
    """Clip at zero and rescale to unit trapezoid integral."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, None)
    area = trapezoid_uniform(v, dx)
    return v / area if area > 0 else v


def evaluate_curve(s: Sample, k: Kernel, h: float, grid, estimator: str,
                   weight: WeightSpec = PivotHalf(), h_pivot: float | None = None,
                   normalize: bool = False) -> Curve:
    """Evaluate an estimator on ``grid`` (a :class:`Grid` or ``(x0, dx, count)``)."""
    if not isinstance(grid, Grid):
        x0, dx, count = grid
        grid = Grid(float(x0), float(dx), int(count))
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")
    h_pivot = h if h_pivot is None else h_pivot
    values = evaluate_points(s, k, h, grid, estimator, weight, h_pivot)
    if normalize:
        if estimator not in DENSITY_ESTIMATORS:
            raise ValueError("normalization applies to density estimators only")
        values = normalize_density(values, grid.dx)
    meta = {
        "estimator": estimator,
        "n": s.n,
        "h": h,
        "h_pivot": h_pivot,
        "kernel": k.name,
        "weight": weight.describe(),
        "normalized": normalize,
        # disjoint shifted kernel supports are assumed by the moment theory
        "h_below_half": h < 0.5,
    }
    return Curve(grid.x0, grid.dx, values, meta)


# ------------------------------------------------------- exact inversions

_FD_STEP = 1e-5


def _central_diff(g, x):
    return (g(x + _FD_STEP) - g(x - _FD_STEP)) / (2.0 * _FD_STEP)


def true_inversion_density(g: Callable, x, j_max: int = 50, side: str = "minus"):
    """Invert a known observation density ``g`` for ``f`` (finite truncation).

    ``side="minus"`` sums ``g'(x - j)`` for ``j = 0..j_max``; ``side="plus"``
    returns ``-sum g'(x + j)`` for ``j = 1..j_max``.  ``g'`` is a central
    difference with step 1e-5 so any callable ``g`` works.
    """
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    if side == "minus":
        for j in range(0, j_max + 1):
            total = total + _central_diff(g, x - j)
        return total
    if side == "plus":
        for j in range(1, j_max + 1):
            total = total + _central_diff(g, x + j)
        return -total
    raise ValueError("side must be 'minus' or 'plus'")


def true_inversion_cdf(g: Callable, x, j_max: int = 50, side: str = "minus"):
    """CDF counterpart of :func:`true_inversion_density`."""
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    if side == "minus":
        for j in range(0, j_max + 1):
            total = total + g(x - j)
        return total
    if side == "plus":
        for j in range(1, j_max + 1):
            total = total + g(x + j)
        return 1.0 - total
    raise ValueError("side must be 'minus' or 'plus'")
