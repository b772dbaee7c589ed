"""Fixed-node composite quadrature with a single refinement check.

All integrals in the package go through :func:`simpson_refined` so that
numbers are deterministic: no adaptive recursion, a fixed node count and
one doubling to estimate the error.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import simpson

from .errors import QuadratureDivergence


def simpson_nodes(f, a: float, b: float, nodes: int, open_ends=(False, False)) -> float:
    """Composite Simpson rule of ``f`` on ``[a, b]`` with an odd node count.

    ``open_ends`` moves the first/last node one ulp inward so that a jump
    sitting exactly on the endpoint contributes its one-sided limit.
    """
    if nodes < 3:
        raise ValueError("need at least 3 nodes")
    if nodes % 2 == 0:
        nodes += 1
    x = np.linspace(a, b, nodes)
    if open_ends[0]:
        x[0] = np.nextafter(a, b)
    if open_ends[1]:
        x[-1] = np.nextafter(b, a)
    return float(simpson(np.asarray(f(x), dtype=float) * np.ones_like(x), x=x))


def simpson_refined(f, a: float, b: float, nodes: int = 2001, tol: float = 1e-8,
                    breakpoints=()) -> float:
    """Integrate ``f`` over ``[a, b]``, splitting at ``breakpoints``.

    Panels are evaluated strictly inside at breakpoints, so piecewise
    integrands with jumps there are integrated exactly piece by piece.

    Each panel uses ``nodes`` Simpson nodes and is recomputed with
    ``2*nodes - 1`` nodes; the refined value is returned.

    Raises
    ------
    QuadratureDivergence
        If the two passes differ by more than ``tol`` (absolute, scaled up
        by the magnitude of the result when it exceeds one).
    """
    if b < a:
        return -simpson_refined(f, b, a, nodes, tol, breakpoints)
    bps = set(breakpoints)
    cuts = sorted({a, b, *(p for p in bps if a < p < b)})
    coarse = fine = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        ends = (lo in bps, hi in bps)
        coarse += simpson_nodes(f, lo, hi, nodes, ends)
        fine += simpson_nodes(f, lo, hi, 2 * nodes - 1, ends)
    if abs(fine - coarse) > tol * max(1.0, abs(fine)):
        raise QuadratureDivergence(
            f"refinement changed integral on [{a}, {b}] by {abs(fine - coarse):.3e}"
        )
    return fine


def trapezoid_uniform(values, dx: float) -> float:
    """Trapezoid rule for samples on a uniform grid."""
    values = np.asarray(values, dtype=float)
    return float(np.trapezoid(values, dx=dx))
