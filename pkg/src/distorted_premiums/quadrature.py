"""Vectorised adaptive Gauss-Legendre quadrature on panels.

The integrands in this package are piecewise smooth on [0, 1] with known
break points (distortion kinks, quantile jumps).  Every panel between two
consecutive break points is integrated independently; a panel is accepted
when its 8-point estimate agrees with the sum of the 8-point estimates on
its two halves.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DivergenceError

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(8)


def _panel_rule(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return half * (fx @ _WEIGHTS)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breaks,
    atol: float = 1e-9,
    rtol: float = 1e-13,
    max_depth: int = 60,
) -> float:
    """Integrate ``f`` over ``[breaks[0], breaks[-1]]``.

    ``f`` must accept a 1-d array and return values of the same shape.
    ``breaks`` are sorted interior break points including both ends;
    duplicates are dropped.  Raises DivergenceError if a panel still fails
    the tolerance after ``max_depth`` bisections.
    """
    pts = np.unique(np.asarray(breaks, dtype=float))
    if pts.size < 2:
        return 0.0
    a, b = pts[:-1], pts[1:]
    total = 0.0
    for _ in range(max_depth):
        whole = _panel_rule(f, a, b)
        m = 0.5 * (a + b)
        left = _panel_rule(f, a, m)
        right = _panel_rule(f, m, b)
        fine = left + right
        err = np.abs(fine - whole)
        if not np.all(np.isfinite(fine)):
            raise DivergenceError("integrand is not finite on some panel")
        ok = err <= np.maximum(atol, rtol * np.abs(fine))
        total += float(np.sum(fine[ok]))
        if ok.all():
            return total
        bad = ~ok
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
    raise DivergenceError(
        f"quadrature did not converge on {a.size} panels near {a[:3]}"
    )


def unit_breaks(*groups) -> np.ndarray:
    """Merge break-point groups with 0 and 1, clipped to the unit interval."""
    parts = [np.array([0.0, 1.0])]
    for g in groups:
        g = np.atleast_1d(np.asarray(g, dtype=float))
        parts.append(g[(g > 0.0) & (g < 1.0)])
    return np.unique(np.concatenate(parts))
