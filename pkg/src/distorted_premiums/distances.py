"""Distances between distorted probabilities L_sigma and distorted outcomes h_sigma(L).

    F_{L_sigma}  = tau o F_L,            quantile F_L^{-1} o tau^{-1}
    F_{L'_sigma} = F_L o h^{-1},         quantile h o F_L^{-1}

Besides the standard Kolmogorov-Smirnov and Wasserstein-1 distances the
report evaluates two alternate closed-form expressions exactly as
written, so any disagreement with the standard definitions is visible:

    sup_y | F_L(y) - tau(F_L(h(y))) |
    int_0^1 | h(F_L^{-1}(tau(u))) - F_L^{-1}(u) | sigma(u) du
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .conjugate import HSigma, build_h_sigma
from .distortion import Distortion
from .errors import NoDensityError
from .losses import DiscreteLoss, LossModel
from .quadrature import integrate, unit_breaks

GRID = 2 ** 14


@dataclass
class DistanceReport:
    ks_standard: float
    ks_alternate: float
    w1_standard: float
    w1_alternate: float
    mean_distorted_probs: float
    mean_distorted_outcomes: float
    truncated: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def cdf_distorted_probs(sigma: Distortion, loss: LossModel, y):
    return sigma.tau(np.clip(loss.cdf(y), 0.0, 1.0))


def cdf_distorted_outcomes(h: HSigma, loss: LossModel, y):
    x = np.asarray(h.right_inverse(y), dtype=float)
    return np.where(np.isneginf(x), 0.0, np.clip(loss.cdf(np.where(np.isneginf(x), 0.0, x)), 0.0, 1.0))


def quantile_distorted_probs(sigma: Distortion, loss: LossModel, u):
    return loss._quantile(sigma.tau_inverse(u))


def quantile_distorted_outcomes(h: HSigma, loss: LossModel, u):
    return h(loss._quantile(u))


def _value_grid(h: HSigma, loss: LossModel, n: int) -> np.ndarray:
    if isinstance(loss, DiscreteLoss):
        return np.union1d(loss.values, h(loss.values))
    x = loss._quantile((np.arange(n) + 0.5) / n)
    x = np.union1d(x, [loss.essinf, loss.esssup])
    return np.union1d(x, h(x))


def _w1_discrete(sigma, h, loss: DiscreteLoss) -> float:
    cuts = np.union1d(loss.cum, sigma.tau(loss.cum))
    cuts = cuts[cuts > 0]
    lo = np.concatenate([[0.0], cuts[:-1]])
    keep = cuts > lo
    lo, cuts = lo[keep], cuts[keep]
    mid = 0.5 * (lo + cuts)
    gap = np.abs(quantile_distorted_probs(sigma, loss, mid) - quantile_distorted_outcomes(h, loss, mid))
    return float(np.sum((cuts - lo) * gap))


def distance_report(sigma: Distortion, loss: LossModel, h: HSigma | None = None,
                    grid: int = GRID) -> DistanceReport:
    h = build_h_sigma(sigma, loss) if h is None else h
    src = h.surrogate if h.surrogate is not None else loss
    y = _value_grid(h, src, grid)
    ks = float(np.max(np.abs(cdf_distorted_probs(sigma, src, y) - cdf_distorted_outcomes(h, src, y))))
    ks_alt = float(np.max(np.abs(np.clip(src.cdf(y), 0, 1)
                                   - sigma.tau(np.clip(src.cdf(h(y)), 0.0, 1.0)))))

    # cut points where either quantile function jumps or kinks
    qb = np.asarray(src.quantile_breaks)
    u_breaks = unit_breaks(qb, sigma.tau(qb) if qb.size else qb, sigma.kinks,
                           sigma.tau(sigma.kinks) if sigma.kinks.size else sigma.kinks,
                           sigma.tau_inverse(qb) if qb.size else qb)
    if isinstance(src, DiscreteLoss):
        w1 = _w1_discrete(sigma, h, src)
        mean_p = float(np.diff(np.concatenate([[0.0], sigma.tau(src.cum)])) @ src.values)
        mean_o = float(src.probs @ h(src.values))
    else:
        w1 = integrate(lambda u: np.abs(quantile_distorted_probs(sigma, src, u)
                                        - quantile_distorted_outcomes(h, src, u)), u_breaks)
        mean_p = integrate(lambda u: quantile_distorted_probs(sigma, src, u), u_breaks)
        mean_o = integrate(lambda u: quantile_distorted_outcomes(h, src, u),
                           unit_breaks(u_breaks, src.cdf(h.knots)))
    w1_alt = integrate(
        lambda u: np.abs(h(src._quantile(sigma.tau(u))) - src._quantile(u)) * sigma(u), u_breaks)
    return DistanceReport(ks, ks_alt, w1, w1_alt, mean_p, mean_o, h.truncated)


def density_distorted_outcomes(h: HSigma, loss: LossModel, y):
    """Density of h(L): f_L(x) / h'(x) at x = h^{-1}(y)."""
    if loss.discrete:
        raise NoDensityError("discrete and empirical losses have no density")
    y = np.asarray(y, dtype=float)
    x = np.asarray(h.right_inverse(y), dtype=float)
    finite = np.isfinite(x)
    xs = np.where(finite, x, 0.0)
    slope = np.asarray(h.derivative(xs), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(finite & (slope > 0), loss.pdf(xs) / slope, 0.0)
    return out


def figure_data(sigma: Distortion, loss: LossModel, n: int = 801, h: HSigma | None = None):
    """Columns y, F and density of L_sigma and of h_sigma(L) on a value grid."""
    from .losses import distorted_density

    h = build_h_sigma(sigma, loss) if h is None else h
    src = h.surrogate if h.surrogate is not None else loss
    lo = min(float(src._quantile(np.array(1e-6))), float(h(src._quantile(np.array(1e-6)))))
    hi = max(float(src._quantile(np.array(1 - 1e-6))), float(h(src._quantile(np.array(1 - 1e-6)))))
    y = np.linspace(lo, hi, n)
    cols = {
        "y": y,
        "cdf_distorted_probs": cdf_distorted_probs(sigma, src, y),
        "cdf_distorted_outcomes": cdf_distorted_outcomes(h, src, y),
    }
    if not loss.discrete:
        cols["density_distorted_probs"] = distorted_density(sigma, loss, y)
        cols["density_distorted_outcomes"] = density_distorted_outcomes(h, loss, y)
        cols["h_sigma"] = h(y)
    return cols
