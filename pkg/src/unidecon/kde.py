"""Direct kernel estimates of the observation density and its derivative.

Scalar evaluators restrict the sum to observations inside ``[x-h, x+h]``
found by binary search on the sorted sample, and accumulate sequentially
in ascending index order.  Adding the zero terms outside the window cannot
change a floating point sum, so the windowed result is bit-equal to the
naive full sum taken in the same order.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from .kernels import Kernel

__all__ = ["Sample", "check_bandwidth", "g_hat", "g_hat_deriv", "g_hat_naive",
           "g_hat_deriv_naive"]


@dataclass(frozen=True)
class Sample:
    """Sorted, finite observations ``X_1 <= ... <= X_n``."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        if vals.size < 1:
            raise ValueError("sample must contain at least one observation")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        # list copy for bisect; avoids numpy scalar overhead in scalar paths
        object.__setattr__(self, "_list", vals.tolist())

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def lo(self) -> float:
        return float(self.values[0])

    @property
    def hi(self) -> float:
        return float(self.values[-1])

    def window(self, a: float, b: float) -> tuple[int, int]:
        """Index range ``[i, j)`` of observations in the closed interval ``[a, b]``."""
        return bisect_left(self._list, a), bisect_right(self._list, b)


def check_bandwidth(h: float) -> float:
    h = float(h)
    if not (h > 0.0 and np.isfinite(h)):
        raise ValueError(f"bandwidth must be positive and finite, got {h}")
    return h


def _window_sum(s: Sample, fn, h: float, x: float) -> float:
    i, j = s.window(x - h, x + h)
    if i == j:
        return 0.0
    terms = fn((x - s.values[i:j]) / h)
    total = 0.0
    for term in terms.tolist():
        total += term
    return total


def g_hat(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Kernel density estimate ``(1/(n h)) sum_j w((x - X_j)/h)``."""
    h = check_bandwidth(h)
    return _window_sum(s, k.w, h, float(x)) / (s.n * h)


def g_hat_deriv(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Derivative of :func:`g_hat`, ``(1/(n h^2)) sum_j w'((x - X_j)/h)``."""
    h = check_bandwidth(h)
    return _window_sum(s, k.w_deriv, h, float(x)) / (s.n * h * h)


def _full_sum(s, fn, h, x):
    total = 0.0
    for term in np.atleast_1d(fn((x - s.values) / h)).tolist():
        total += term
    return total


def g_hat_naive(s: Sample, k: Kernel, h: float, x: float) -> float:
    """Unwindowed reference for :func:`g_hat` (same summation order)."""
    return _full_sum(s, k.w, h, float(x)) / (s.n * h)


def g_hat_deriv_naive(s: Sample, k: Kernel, h: float, x: float) -> float:
    return _full_sum(s, k.w_deriv, h, float(x)) / (s.n * h * h)
