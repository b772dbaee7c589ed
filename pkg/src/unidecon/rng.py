"""Counter-based random streams with a fixed derivation rule.

Stream ``(seed, index)`` is Philox4x64-10 with 128-bit key
``[seed, index]`` (two 64-bit words, low word first) and the counter
starting at zero.  Each raw 64-bit output ``r`` yields

* a uniform on [0, 1):    ``(r >> 11) * 2**-53``
* a uniform on (0, 1):    ``((r >> 11) + 0.5) * 2**-53``, fed to the
  inverse normal CDF below to produce a standard normal.

The inverse normal CDF is Acklam's rational approximation (relative error
below 1.15e-9), which uses only arithmetic, ``log`` and ``sqrt`` so other
implementations can reproduce the streams.
"""
from __future__ import annotations

import numpy as np

__all__ = ["StreamRNG", "norm_ppf", "MASK64"]

MASK64 = (1 << 64) - 1
_TWO53 = 2.0**-53

_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_ppf(p):
    """Acklam's approximation to the standard normal quantile, ``0 < p < 1``."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    q = p[mid] - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    out[mid] = num / den

    for mask, sign, pv in ((lo, 1.0, p[lo]), (hi, -1.0, 1.0 - p[hi])):
        q = np.sqrt(-2.0 * np.log(pv))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        out[mask] = sign * num / den
    return out if out.ndim else float(out)


class StreamRNG:
    """One reproducible stream, identified by ``(seed, index)``."""

    def __init__(self, seed: int, index: int = 0):
        if not (0 <= seed <= MASK64 and 0 <= index <= MASK64):
            raise ValueError("seed and stream index must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.index = int(index)
        key = np.array([self.seed, self.index], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)

    def raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(int(n))

    def uniform(self, n: int) -> np.ndarray:
        """``n`` uniforms on [0, 1)."""
        return (self.raw(n) >> np.uint64(11)).astype(float) * _TWO53

    def normal(self, n: int) -> np.ndarray:
        """``n`` standard normals by inverse CDF."""
        u = ((self.raw(n) >> np.uint64(11)).astype(float) + 0.5) * _TWO53
        return norm_ppf(u)
