"""Distorted premiums pi_sigma(L) = int_0^1 F^{-1}(u) sigma(u) du, computed several ways."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .distortion import Distortion, DistortionMeasure, measure_from_distortion
from .errors import DivergenceError, DomainError, UnboundedError
from .losses import DiscreteLoss, LossModel
from .quadrature import integrate, unit_breaks


def rel_gap(a: float, b: float) -> float:
    """|a - b| measured relative to max(1, |a|)."""
    return abs(a - b) / max(1.0, abs(a))


def premium_direct(sigma: Distortion, loss: LossModel) -> float:
    """Quantile integral against sigma; an exact sum for discrete losses."""
    if isinstance(loss, DiscreteLoss):
        dt = np.diff(np.concatenate([[0.0], sigma.tau(loss.cum)]))
        return float(dt @ loss.values)
    breaks = unit_breaks(sigma.kinks, loss.quantile_breaks)
    return integrate(lambda u: loss._quantile(u) * sigma(u), breaks, atol=1e-12)


def cte(alpha: float, loss: LossModel, check: bool = False) -> float:
    """Conditional tail expectation; ``check`` also runs the variational form."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError("CTE level must lie in [0, 1]")
    if alpha == 1.0:
        if np.isinf(loss.esssup):
            raise UnboundedError("CTE at level 1 of an unbounded loss")
        return loss.esssup
    value = float(np.atleast_1d(loss.tail_integral(alpha))[0]) / (1.0 - alpha)
    if check:
        alt, _ = cte_variational(alpha, loss)
        if abs(alt - value) > 1e-8 * max(1.0, abs(value)):
            raise DivergenceError(f"CTE forms disagree: {value!r} vs {alt!r}")
    return value


def expected_excess(loss: LossModel, q: float) -> float:
    """E (L - q)_+."""
    if isinstance(loss, DiscreteLoss):
        return float(loss.probs @ np.maximum(loss.values - q, 0.0))
    p = float(np.clip(loss.cdf(q), 0.0, 1.0))
    if p >= 1.0:
        return 0.0
    return float(np.atleast_1d(loss.tail_integral(p))[0]) - q * (1.0 - p)


def cte_variational(alpha: float, loss: LossModel, xtol: float = 1e-12):
    """inf_q q + E(L - q)_+ / (1 - alpha); returns (value, minimizer).

    The objective is convex in q, so a bounded scalar search on a bracket
    around the alpha-quantile suffices; the bracket is widened whenever the
    minimizer lands on one of its ends.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError("variational CTE needs 0 <= alpha < 1")

    def objective(q):
        return q + expected_excess(loss, q) / (1.0 - alpha)

    if alpha > 0:
        centre = loss.quantile(alpha)
    else:
        centre = loss.essinf if np.isfinite(loss.essinf) else loss.quantile(1e-12)
    scale = max(1.0, abs(centre))
    width = scale
    for _ in range(60):
        lo, hi = centre - width, centre + width
        res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                              options={"xatol": xtol * scale})
        q = float(res.x)
        value = objective(q)
        if isinstance(loss, DiscreteLoss):
            # piecewise linear objective: its minimum sits on an atom next to q
            k = np.searchsorted(loss.values, q)
            for x in loss.values[max(k - 1, 0):k + 1]:
                fx = objective(x)
                if fx <= value:
                    value, q = fx, float(x)
        edge = 1e-6 * width
        if alpha == 0 or (q - lo > edge and hi - q > edge):
            return value, q
        width *= 4.0
    raise DivergenceError("variational CTE bracket did not settle")


def _cte_at(levels: np.ndarray, loss: LossModel) -> np.ndarray:
    out = np.empty(levels.size)
    inner = levels < 1.0
    if inner.any():
        out[inner] = np.atleast_1d(loss.tail_integral(levels[inner])) / (1.0 - levels[inner])
    if (~inner).any():
        if np.isinf(loss.esssup):
            raise UnboundedError("measure charges level 1 but the loss is unbounded")
        out[~inner] = loss.esssup
    return out


def premium_kusuoka(mu: DistortionMeasure, loss: LossModel) -> float:
    """int CTE_a(L) mu(da): atom sum plus the density part.

    With density (1 - a) g(a) the continuous part is int T(a) g(a) da,
    T the tail integral, which stays bounded near a = 1.
    """
    total = float(mu.masses @ _cte_at(mu.locations, loss)) if mu.masses.size else 0.0
    if mu.has_density:
        breaks = unit_breaks(mu.cell_edges, loss.quantile_breaks)
        total += integrate(lambda a: loss.tail_integral(a) * mu.rate(a), breaks)
    return total


def premium_comonotone(sigma: Distortion, loss: LossModel, n: int = 100_000) -> float:
    """E[L sigma(U)] with U uniform on the midpoints (2i - 1) / 2n."""
    if n < 2:
        raise DomainError("comonotone grid needs n >= 2")
    u = (np.arange(n) + 0.5) / n
    return float(np.mean(loss._quantile(u) * sigma(u)))


@dataclass
class PremiumReport:
    direct: float
    kusuoka: float
    comonotone: float
    inf_rep: float = float("nan")
    zero_gap: float = float("nan")
    method_grid_size: int = 0
    truncated: bool = False
    max_pairwise_gap: float = 0.0

    def __post_init__(self):
        vals = [v for v in (self.direct, self.kusuoka, self.comonotone, self.inf_rep)
                if np.isfinite(v)]
        self.max_pairwise_gap = float(max(vals) - min(vals)) if vals else 0.0

    def pairs(self):
        """(name_a, name_b, absolute gap) for every filled pair."""
        named = [(k, getattr(self, k)) for k in ("direct", "kusuoka", "comonotone", "inf_rep")
                 if np.isfinite(getattr(self, k))]
        return [(a, b, abs(x - y)) for i, (a, x) in enumerate(named) for b, y in named[i + 1:]]

    def as_dict(self) -> dict:
        return asdict(self)


def premium_report(sigma: Distortion, loss: LossModel, n: int = 100_000) -> PremiumReport:
    from .conjugate import build_h_sigma, premium_inf, zero_gap

    h = build_h_sigma(sigma, loss)
    return PremiumReport(
        direct=premium_direct(sigma, loss),
        kusuoka=premium_kusuoka(measure_from_distortion(sigma), loss),
        comonotone=premium_comonotone(sigma, loss, n),
        inf_rep=premium_inf(sigma, loss, h),
        zero_gap=zero_gap(sigma, loss, h),
        method_grid_size=n,
        truncated=h.truncated,
    )
