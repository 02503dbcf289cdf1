"""Small numerical helpers shared by the solvers."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

# Relative slack for indifference comparisons. Agents who are indifferent
# buy, and computed prices such as (1 - r) * v land one ulp either side of
# the tie, so "weakly greater" has to absorb rounding.
TIE_RTOL = 1e-12

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def weakly_geq(a, b):
    """``a >= b`` up to rounding at the scale of ``b``."""
    return np.asarray(a) >= np.asarray(b) - TIE_RTOL * np.maximum(1.0, np.abs(b))


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    max_iter: int = 300,
) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on ``[lo, hi]``.

    Endpoints are probed too, so a monotone ``f`` returns the better end.
    Returns ``(x, f(x))``.
    """
    a, b = float(lo), float(hi)
    if b < a:
        a, b = b, a
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > tol * max(1.0, abs(a) + abs(b)) and it < max_iter:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        it += 1
    best_x, best_f = (x1, f1) if f1 >= f2 else (x2, f2)
    for x in (float(lo), float(hi)):
        fx = f(x)
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def local_max_indices(values: np.ndarray) -> np.ndarray:
    """Indices of weak local maxima of a 1-D array, endpoints included."""
    v = np.asarray(values, dtype=float)
    if v.size == 1:
        return np.array([0])
    left = np.concatenate(([-np.inf], v[:-1]))
    right = np.concatenate((v[1:], [-np.inf]))
    return np.nonzero((v >= left) & (v >= right))[0]
