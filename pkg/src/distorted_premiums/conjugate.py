"""Piecewise linear convex functions, their exact conjugates, and h_sigma.

The infimum representation writes the premium as E h_sigma(L) with

    h_sigma(y) = int_0^1 q(a) + (y - q(a))_+ / (1 - a) mu_sigma(da),

q the quantile of L.  An atom of mu_sigma at level 0 contributes
sigma(0) * y (the limit of the integrand as q -> -inf), so that sigma == 1
gives h = identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distortion import Distortion
from .errors import DistortionError, DomainError, UnsupportedError
from .losses import DiscreteLoss, LossModel, bounded_surrogate
from .quadrature import integrate, unit_breaks

H_CELLS = 2 ** 14
_CONVEX_TOL = 1e-9
_EDGE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewiseLinearConvex:
    """Convex function given by its values at ``knots`` and two tail slopes.

    A tail slope of -inf (left) or +inf (right) means the function is +inf
    beyond the outermost knot, i.e. the domain is bounded on that side.
    Interior slopes are the chords between consecutive knots unless given
    exactly in ``chords`` (closed-form constructions know them exactly, and
    recomputing them from values loses digits when knots crowd together).
    """

    knots: np.ndarray
    values: np.ndarray
    left_slope: float
    right_slope: float
    chords: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.knots, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "knots", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "left_slope", float(self.left_slope))
        object.__setattr__(self, "right_slope", float(self.right_slope))
        if x.size == 0 or x.shape != v.shape:
            raise DistortionError("need matching, nonempty knots and values")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DistortionError("knots and values must be finite")
        if np.any(np.diff(x) <= 0):
            raise DistortionError("knots must be strictly increasing")
        if self.left_slope == np.inf or self.right_slope == -np.inf:
            raise DistortionError("tail slopes point the wrong way")
        noise = np.zeros(x.size + 1)
        if self.chords is not None:
            c = np.asarray(self.chords, dtype=float).ravel()
            if c.size != x.size - 1 or not np.all(np.isfinite(c)):
                raise DistortionError("need one finite chord slope per gap between knots")
            object.__setattr__(self, "chords", c)
        elif x.size > 1:
            # derived chords carry rounding of order eps * |values| / spacing
            noise[1:-1] = 8 * np.finfo(float).eps * (np.abs(v[1:]) + np.abs(v[:-1])) / np.diff(x)
        s = self.slopes
        slack = _CONVEX_TOL * np.maximum(1.0, np.abs(s[1:])) + noise[1:] + noise[:-1]
        if np.any(np.diff(s) < -slack):
            raise DistortionError("convexity violated: slopes decrease")

    @classmethod
    def from_hinges(cls, slope0: float, const: float, knots, weights):
        """slope0 * y + const + sum_i weights_i (y - knots_i)_+ with weights >= 0."""
        k = np.asarray(knots, dtype=float)
        w = np.asarray(weights, dtype=float)
        if k.size == 0:
            return cls(np.array([0.0]), np.array([const]), slope0, slope0)
        order = np.argsort(k, kind="stable")
        k, w = k[order], w[order]
        uk, start = np.unique(k, return_index=True)
        uw = np.add.reduceat(w, start)
        cw = np.concatenate([[0.0], np.cumsum(uw)[:-1]])
        cwk = np.concatenate([[0.0], np.cumsum(uw * uk)[:-1]])
        values = slope0 * uk + const + uk * cw - cwk
        running = slope0 + np.cumsum(uw)
        return cls(uk, values, slope0, float(running[-1]), chords=running[:-1])

    @property
    def slopes(self) -> np.ndarray:
        """Left tail, chords between knots, right tail."""
        chords = self.chords
        if chords is None:
            chords = np.diff(self.values) / np.diff(self.knots)
        return np.concatenate([[self.left_slope], chords, [self.right_slope]])

    @property
    def domain(self):
        lo = self.knots[0] if np.isinf(self.left_slope) else -np.inf
        hi = self.knots[-1] if np.isinf(self.right_slope) else np.inf
        return lo, hi

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k, v = self.knots, self.values
        # a bounded domain edge reached through rounding counts as the edge
        if np.isinf(self.left_slope):
            x = np.where((x < k[0]) & (x >= k[0] - _EDGE_TOL * max(1.0, abs(k[0]))), k[0], x)
        if np.isinf(self.right_slope):
            x = np.where((x > k[-1]) & (x <= k[-1] + _EDGE_TOL * max(1.0, abs(k[-1]))), k[-1], x)
        out = np.interp(x, k, v)
        with np.errstate(invalid="ignore"):
            left = np.inf if np.isinf(self.left_slope) else v[0] + self.left_slope * (x - k[0])
            right = np.inf if np.isinf(self.right_slope) else v[-1] + self.right_slope * (x - k[-1])
        out = np.where(x < k[0], left, out)
        out = np.where(x > k[-1], right, out)
        return float(out) if out.ndim == 0 else out

    def derivative(self, x):
        """Right derivative."""
        idx = np.searchsorted(self.knots, np.asarray(x, dtype=float), side="right")
        out = self.slopes[idx]
        return float(out) if np.ndim(x) == 0 else out

    def right_inverse(self, y):
        """sup{x : f(x) <= y} for nondecreasing f; -inf when no x qualifies."""
        y = np.asarray(y, dtype=float)
        s = self.slopes
        if np.any(s < -_CONVEX_TOL * np.maximum(1.0, np.abs(s))):
            raise DomainError("right inverse needs a nondecreasing function")
        k, v = self.knots, self.values
        j = np.searchsorted(v, y, side="right") - 1
        jj = np.clip(j, 0, k.size - 1)
        seg = s[np.minimum(jj + 1, s.size - 1)]
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.where(seg > 0, k[jj] + (y - v[jj]) / seg, np.inf)
            below = (np.where(self.left_slope > 0, k[0] + (y - v[0]) / self.left_slope, -np.inf)
                     if np.isfinite(self.left_slope) else k[0])
        if np.isinf(self.right_slope):
            inner = np.where(j == k.size - 1, k[-1], inner)
        out = np.where(j < 0, below, inner)
        return float(out) if out.ndim == 0 else out


def legendre(f: PiecewiseLinearConvex) -> PiecewiseLinearConvex:
    """Exact convex conjugate f*(y) = sup_x x y - f(x).

    Slopes of f become the knots of f* and the knots of f its slopes.
    """
    x, v = f.knots, f.values
    s = np.maximum.accumulate(f.slopes)  # absorb rounding in the chords
    m = x.size
    finite = np.isfinite(s)
    if not finite.any():
        # f is finite at a single point: f* is affine with slope x_0
        return PiecewiseLinearConvex([0.0], [-v[0]], x[0], x[0])
    idx = np.flatnonzero(finite)
    t, first = np.unique(s[idx], return_index=True)
    j = idx[first]
    at = np.minimum(j, m - 1)
    values = x[at] * t - v[at]
    left = -np.inf if np.isfinite(f.left_slope) else x[0]
    right = np.inf if np.isfinite(f.right_slope) else x[-1]
    # between consecutive slopes of f the supremum sits at the knot they flank
    return PiecewiseLinearConvex(t, values, left, right, chords=x[j[1:] - 1])


def affine_transform(f: PiecewiseLinearConvex, alpha, beta, gamma, lam, c):
    """g(x) = alpha + beta x + gamma f(lam x + c) as a new function."""
    _check_affine(gamma, lam)
    knots = (f.knots - c) / lam
    values = alpha + beta * knots + gamma * f.values
    s = beta + gamma * lam * f.slopes
    if lam < 0:
        knots, values, s = knots[::-1], values[::-1], s[::-1]
    return PiecewiseLinearConvex(knots, values, s[0], s[-1], chords=s[1:-1])


def affine_conjugate(fstar, alpha, beta, gamma, lam, c):
    """Evaluator of g* for g(x) = alpha + beta x + gamma f(lam x + c), given f*.

    g*(y) = -alpha - c (y - beta) / lam + gamma f*((y - beta) / (lam gamma)).
    """
    _check_affine(gamma, lam)

    def gstar(y):
        y = np.asarray(y, dtype=float)
        return -alpha - c * (y - beta) / lam + gamma * np.asarray(fstar((y - beta) / (lam * gamma)))

    return gstar


def _check_affine(gamma, lam):
    if not gamma > 0 or lam == 0:
        raise DomainError("affine transform needs gamma > 0 and lambda != 0")


def fenchel_young_gap(h: PiecewiseLinearConvex, x: float, y: float,
                      hstar: PiecewiseLinearConvex | None = None) -> float:
    """h(x) + h*(y) - x y; +inf when y lies outside dom h*."""
    hstar = legendre(h) if hstar is None else hstar
    hy = hstar(y)
    if np.isinf(hy):
        return np.inf
    return float(h(x) + hy - x * y)


# -- h_sigma ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HSigma(PiecewiseLinearConvex):
    """h_sigma together with the (possibly clipped) loss it was built from."""

    surrogate: LossModel | None = field(default=None)
    truncated: bool = False


def _discrete_hinges(sigma: Distortion, loss: DiscreteLoss):
    p_hi, p_lo = loss.cum, loss.lower_cum
    # mu([0, p]) = (1 - p) sigma(p+) + tau(p)
    mass = lambda p: (1.0 - p) * sigma.right(p) + sigma.tau(p)  # noqa: E731
    d_mass = mass(p_hi) - mass(p_lo)
    d_sigma = sigma.right(p_hi) - sigma.right(p_lo)
    return float(loss.values @ d_mass), loss.values, d_sigma


def _cell_edges(sigma: Distortion, loss: LossModel, cells: int) -> np.ndarray:
    """Uniform cells refined where sigma's continuous part climbs fast."""
    fine = np.linspace(0.0, 1.0, 8 * cells + 1)
    sc = sigma.continuous(fine)
    span = sc[-1] - sc[0]
    parts = [np.linspace(0.0, 1.0, cells + 1), sigma.kinks, loss.quantile_breaks]
    if span > 0:
        targets = sc[0] + span * np.linspace(0.0, 1.0, cells + 1)
        parts.append(np.interp(targets, sc, fine))
    return unit_breaks(*parts)


def _continuous_hinges(sigma: Distortion, loss: LossModel, cells: int):
    const, knots, weights = 0.0, [], []
    for a, w in zip(sigma.levels, sigma.weights):
        if a > 0:
            q = float(loss._quantile(np.array(a)))
            const += w * q
            knots.append(q)
            weights.append(w / (1.0 - a))
    if sigma.coeffs.size > 1 or sigma.table.size:
        e = _cell_edges(sigma, loss, cells)
        sc = sigma.continuous(e)
        d_sigma = np.diff(sc)
        d_mass = np.diff((1.0 - e) * sc) + np.diff(sigma.tau_continuous(e))
        keep = d_sigma > 0
        q = loss._quantile(0.5 * (e[1:] + e[:-1])[keep])
        const += float(np.maximum(d_mass[keep], 0.0) @ q)
        knots.extend(q)
        weights.extend(d_sigma[keep])
    return const, np.asarray(knots), np.asarray(weights)


def build_h_sigma(sigma: Distortion, loss: LossModel, cells: int = H_CELLS) -> HSigma:
    """Assemble h_sigma exactly for discrete losses, on ``cells`` level cells otherwise.

    Unbounded losses are replaced by their winsorization at quantile levels
    (1e-9, 1 - 1e-9) and the result is flagged ``truncated``.
    """
    surrogate = bounded_surrogate(loss)
    if not surrogate.bounded:
        raise UnsupportedError("h_sigma needs a bounded loss")
    s0 = sigma.at(0.0)
    if isinstance(surrogate, DiscreteLoss):
        const, knots, weights = _discrete_hinges(sigma, surrogate)
    else:
        const, knots, weights = _continuous_hinges(sigma, surrogate, cells)
    keep = weights > 0
    plc = PiecewiseLinearConvex.from_hinges(s0, const, knots[keep], weights[keep])
    return HSigma(plc.knots, plc.values, plc.left_slope, plc.right_slope, plc.chords,
                  surrogate=surrogate, truncated=surrogate is not loss)


def premium_inf(sigma: Distortion, loss: LossModel, h: HSigma | None = None) -> float:
    """E h_sigma(L), evaluated on the loss h was built from."""
    h = build_h_sigma(sigma, loss) if h is None else h
    src = h.surrogate if h.surrogate is not None else loss
    if isinstance(src, DiscreteLoss):
        return float(src.probs @ h(src.values))
    breaks = unit_breaks(src.cdf(h.knots), src.quantile_breaks)
    return integrate(lambda u: h(src._quantile(u)), breaks)


def conjugate_integral(hstar: PiecewiseLinearConvex, sigma: Distortion) -> float:
    """int_0^1 hstar(sigma(u)) du, exact for piecewise linear hstar.

    The unit interval is cut where sigma crosses the knots of hstar; on each
    piece hstar is affine, so the integral reduces to increments of tau.
    """
    t = hstar.knots
    s = hstar.slopes
    u = np.concatenate([[0.0], sigma.level_inverse(t), [1.0]])
    u = np.maximum.accumulate(np.clip(u, 0.0, 1.0))
    tau_u = sigma.tau(u)
    du = np.diff(u)
    dtau = np.diff(tau_u)
    # piece i uses the affine branch anchored at knot max(i - 1, 0) with slope s[i]
    anchor = np.clip(np.arange(du.size) - 1, 0, t.size - 1)
    anchor[0] = 0
    tk = t[anchor]
    excess = dtau - tk * du  # int (sigma - t_anchor) over the piece
    total = float(hstar.values[anchor] @ du)
    live = du > 0.0
    finite = np.isfinite(s)
    total += float(np.sum(np.where(live & finite, np.where(finite, s, 0.0) * excess, 0.0)))
    tol = 1e-12 * np.maximum(1.0, np.abs(tk))
    outside = live & ~finite & (np.abs(excess) > tol)
    # sigma leaving dom hstar on a set of positive length
    if np.any(outside & (np.sign(s) == np.sign(excess))):
        return np.inf
    return total


def zero_gap(sigma: Distortion, loss: LossModel, h: HSigma | None = None) -> float:
    """int_0^1 h_sigma*(sigma(u)) du, zero when h_sigma is optimal."""
    h = build_h_sigma(sigma, loss) if h is None else h
    return conjugate_integral(legendre(h), sigma)
