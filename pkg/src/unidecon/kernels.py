"""Compactly supported smoothing kernels on [-1, 1].

Estimators that differentiate the observation density need a kernel that
is a continuously differentiable symmetric probability density supported
on [-1, 1].  The biweight (default) and triweight kernels satisfy this;
the Epanechnikov kernel is provided only as a negative example for
:func:`validate_w1`, its derivative jumps at the endpoints.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import simpson_refined

__all__ = [
    "Kernel",
    "ValidationReport",
    "make_biweight",
    "make_triweight",
    "make_epanechnikov",
    "get_kernel",
    "kernel_functionals",
    "deriv_power_integral",
    "validate_w1",
    "KERNELS",
]

QUAD_NODES = 2001


@dataclass(frozen=True)
class Kernel:
    """A kernel ``w`` with derivative and cached moment functionals.

    Attributes
    ----------
    m2 : float
        Second moment, the integral of ``v**2 * w(v)``.
    l2 : float
        Integral of ``w(v)**2``.
    dl2 : float
        Integral of ``w'(v)**2``.
    """

    name: str
    w: Callable = field(repr=False)
    w_deriv: Callable = field(repr=False)
    m2: float
    l2: float
    dl2: float
    support_radius: float = 1.0

    def __call__(self, v):
        return self.w(v)


def _poly_kernel(coef: float, power: int):
    """Return ``(w, w')`` for ``coef * (1 - v**2)**power`` on [-1, 1]."""

    def w(v):
        v = np.asarray(v, dtype=float)
        inside = np.abs(v) < 1.0
        base = np.where(inside, 1.0 - v * v, 0.0)
        out = coef * base**power
        return out if out.ndim else float(out)

    def w_deriv(v):
        v = np.asarray(v, dtype=float)
        inside = np.abs(v) < 1.0
        base = np.where(inside, 1.0 - v * v, 0.0)
        out = np.where(inside, -2.0 * power * coef * v * base ** (power - 1), 0.0)
        return out if out.ndim else float(out)

    return w, w_deriv


def make_biweight() -> Kernel:
    """Biweight kernel ``(15/16)(1 - v^2)^2``; m2, l2, dl2 = 1/7, 5/7, 15/7."""
    w, dw = _poly_kernel(15.0 / 16.0, 2)
    return Kernel("biweight", w, dw, m2=1.0 / 7.0, l2=5.0 / 7.0, dl2=15.0 / 7.0)


def make_triweight() -> Kernel:
    """Triweight kernel ``(35/32)(1 - v^2)^3``."""
    w, dw = _poly_kernel(35.0 / 32.0, 3)
    return Kernel("triweight", w, dw, m2=1.0 / 9.0, l2=350.0 / 429.0, dl2=35.0 / 11.0)


def make_epanechnikov() -> Kernel:
    # Violates W1 (w' jumps at +-1). Only for validation tests.
    w, dw = _poly_kernel(0.75, 1)
    return Kernel("epanechnikov", w, dw, m2=0.2, l2=0.6, dl2=float("inf"))


KERNELS = {
    "biweight": make_biweight,
    "triweight": make_triweight,
}


def get_kernel(name: str) -> Kernel:
    try:
        return KERNELS[name.lower()]()
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; choose from {sorted(KERNELS)}"
        ) from None


def kernel_functionals(k: Kernel, nodes: int = QUAD_NODES):
    """Compute ``(m2, l2, dl2)`` by composite Simpson quadrature on [-1, 1].

    Raises :class:`~unidecon.errors.QuadratureDivergence` when a refinement
    pass moves any value by more than 1e-8.
    """
    r = k.support_radius
    m2 = simpson_refined(lambda v: v * v * k.w(v), -r, r, nodes)
    l2 = simpson_refined(lambda v: k.w(v) ** 2, -r, r, nodes)
    dl2 = simpson_refined(lambda v: k.w_deriv(v) ** 2, -r, r, nodes)
    return m2, l2, dl2


def deriv_power_integral(k: Kernel, m: int, nodes: int = QUAD_NODES) -> float:
    """Integral of ``w'(v)**m`` over the kernel support."""
    r = k.support_radius
    return simpson_refined(lambda v: k.w_deriv(v) ** m, -r, r, nodes)


def power_integral(k: Kernel, m: int, nodes: int = QUAD_NODES) -> float:
    """Integral of ``w(v)**m`` over the kernel support."""
    r = k.support_radius
    return simpson_refined(lambda v: k.w(v) ** m, -r, r, nodes)


@dataclass
class ValidationReport:
    checks: dict[str, bool]
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]


def validate_w1(k: Kernel, grid_points: int = 2001, eps: float = 1e-7) -> ValidationReport:
    """Check the kernel conditions; failures are reported, never raised.

    Derivative continuity is probed at the support endpoints by comparing
    one-sided limits of ``w_deriv`` just inside and just outside +-1.
    """
    r = k.support_radius
    v = np.linspace(-r, r, grid_points)
    wv = np.asarray(k.w(v), dtype=float)
    checks = {}
    details = {}

    integral = simpson_refined(k.w, -r, r, QUAD_NODES, tol=1e-6)
    checks["unit_integral"] = abs(integral - 1.0) <= 1e-10
    details["unit_integral"] = f"integral={integral:.15g}"

    checks["nonnegative"] = bool(np.all(wv >= 0.0))

    asym = float(np.max(np.abs(wv - np.asarray(k.w(-v), dtype=float))))
    checks["symmetric"] = asym <= 1e-12
    details["symmetric"] = f"max|w(v)-w(-v)|={asym:.3e}"

    outside = np.concatenate([np.linspace(-3 * r, -r, 50), np.linspace(r, 3 * r, 50)])
    checks["compact_support"] = bool(
        np.all(np.asarray(k.w(outside)) == 0.0)
        and np.all(np.asarray(k.w_deriv(outside)) == 0.0)
    )

    jumps = []
    for end in (-r, r):
        inner = k.w_deriv(end - np.sign(end) * eps)
        outer = k.w_deriv(end + np.sign(end) * eps)
        jumps.append(abs(float(inner) - float(outer)))
    checks["derivative_continuous"] = max(jumps) <= 1e-5
    details["derivative_continuous"] = f"endpoint jumps={jumps[0]:.3e},{jumps[1]:.3e}"

    return ValidationReport(checks, details)
