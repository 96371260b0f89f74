"""Deterministic 1-D search utilities.

The objectives optimized in this package are unimodal on their brackets,
so a plain golden-section search is sufficient and, unlike polished
general-purpose minimizers, is trivially reproducible bit for bit.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import DomainError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_maximize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xatol: float = 1e-9,
) -> tuple[float, float]:
    """Locate the maximum of a unimodal ``f`` on [lo, hi].

    Returns ``(x, f(x))`` with ``x`` within ``xatol`` of the true argmax.
    Deterministic: identical inputs always walk the identical bracket
    sequence.
    """
    if not hi > lo:
        raise DomainError(f"search interval must satisfy hi > lo (got [{lo!r}, {hi!r}])")
    if not xatol > 0:
        raise DomainError("xatol must be positive")

    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    while (b - a) > xatol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)
