"""Distortion densities, their antiderivatives and Kusuoka measures.

A distortion is a nonnegative, nondecreasing density ``sigma`` on [0, 1]
with unit integral.  It is stored as a sum of up to three components, each
nondecreasing on its own:

* steps: ``sum_j w_j / (1 - a_j) * 1{u > a_j}`` (a mixture of tail
  expectations; ``a_j = 0`` is read as the constant ``w_j``),
* poly: a polynomial in ``u``,
* table: nodal values on a uniform grid, linearly interpolated.

The conditional tail expectation at level ``alpha`` is a single step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DistortionError, DomainError, UnsupportedError

GRID_NODES = 1024
MASS_TOL = 1e-9
MONO_TOL = 1e-12

_EMPTY = np.zeros(0)


def _arr(x) -> np.ndarray:
    a = np.atleast_1d(np.asarray(x, dtype=float))
    a.setflags(write=False)
    return a


def _poly_min(p: Polynomial) -> float:
    """Minimum of a real polynomial over [0, 1]."""
    cand = [0.0, 1.0]
    if p.degree() >= 2:
        for r in p.deriv().roots():
            if abs(r.imag) < 1e-12 and 0.0 < r.real < 1.0:
                cand.append(r.real)
    return float(np.min(p(np.array(cand))))


def _check_unit(x, name: str, tol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < -tol) or np.any(x > 1.0 + tol):
        raise DomainError(f"{name} must lie in [0, 1]")
    return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Distortion:
    levels: np.ndarray = field(default_factory=lambda: _EMPTY)
    weights: np.ndarray = field(default_factory=lambda: _EMPTY)
    coeffs: np.ndarray = field(default_factory=lambda: _EMPTY)
    table: np.ndarray = field(default_factory=lambda: _EMPTY)
    name: str = ""

    def __post_init__(self):
        for attr in ("levels", "weights", "coeffs", "table"):
            object.__setattr__(self, attr, _arr(getattr(self, attr)))
        lv, w = self.levels, self.weights
        if lv.shape != w.shape:
            raise DistortionError("step levels and weights differ in length")
        if np.any((lv < 0) | (lv >= 1)):
            raise DistortionError("step levels must lie in [0, 1); level 1 is ess sup")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise DistortionError("step weights must be positive and finite")
        if lv.size:
            order = np.argsort(lv, kind="stable")
            object.__setattr__(self, "levels", _arr(lv[order]))
            object.__setattr__(self, "weights", _arr(w[order]))
        if self.coeffs.size and not np.all(np.isfinite(self.coeffs)):
            raise DistortionError("polynomial coefficients must be finite")
        if self.coeffs.size and _poly_min(self._poly.deriv()) < -MONO_TOL:
            raise DistortionError("monotonicity violated: polynomial decreases on [0, 1]")
        t = self.table
        if t.size:
            if t.size < 2 or not np.all(np.isfinite(t)):
                raise DistortionError("table needs at least two finite values")
            if np.any(np.diff(t) < -MONO_TOL):
                raise DistortionError("monotonicity violated: table decreases")
        if not (lv.size or self.coeffs.size or t.size):
            raise DistortionError("empty distortion")
        if self.at(0.0) < -MONO_TOL:
            raise DistortionError("nonnegativity violated: sigma(0) < 0")
        total = float(self._tau_raw(np.array([1.0]))[0])
        if abs(total - 1.0) > MASS_TOL:
            raise DistortionError(
                f"normalization violated: integral of sigma is {total:.12g}, not 1"
            )

    # -- components -----------------------------------------------------
    @cached_property
    def _poly(self) -> Polynomial:
        return Polynomial(self.coeffs if self.coeffs.size else [0.0])

    @cached_property
    def _nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.table.size)

    @cached_property
    def _table_cum(self) -> np.ndarray:
        t = self.table
        h = 1.0 / (t.size - 1)
        return np.concatenate([[0.0], np.cumsum(0.5 * h * (t[1:] + t[:-1]))])

    def _steps(self, u, right: bool) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        for a, w in zip(self.levels, self.weights):
            on = (u >= a) if (right or a == 0.0) else (u > a)
            out = out + np.where(on, w / (1.0 - a), 0.0)
        return out

    def continuous(self, u) -> np.ndarray:
        """Polynomial plus table part of sigma (the part without jumps)."""
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        if self.coeffs.size:
            out = out + self._poly(u)
        if self.table.size:
            out = out + np.interp(u, self._nodes, self.table)
        return out

    def rate(self, u) -> np.ndarray:
        """Derivative of the continuous part (table slopes are cellwise)."""
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        if self.coeffs.size:
            out = out + self._poly.deriv()(u)
        if self.table.size:
            n = self.table.size - 1
            i = np.clip(np.floor(u * n).astype(int), 0, n - 1)
            out = out + np.diff(self.table)[i] * n
        return out

    # -- evaluation -----------------------------------------------------
    def __call__(self, u) -> np.ndarray:
        return self._steps(u, right=False) + self.continuous(u)

    def right(self, u) -> np.ndarray:
        """Right limit sigma(u+); equals sigma except at step levels."""
        return self._steps(u, right=True) + self.continuous(u)

    def at(self, u: float) -> float:
        return float(self(np.array([u]))[0])

    @property
    def sup(self) -> float:
        """sigma(1) = ess sup sigma."""
        return float(self.right(np.array([1.0]))[0])

    @property
    def kind(self) -> str:
        parts = [k for k, a in (("steps", self.levels), ("poly", self.coeffs),
                                ("table", self.table)) if a.size]
        if parts == ["steps"] and self.levels.size == 1:
            return "cte"
        return parts[0] if len(parts) == 1 else "mixed"

    @property
    def kinks(self) -> np.ndarray:
        """Points in (0, 1) where sigma is not smooth."""
        pts = [self.levels]
        if self.table.size:
            pts.append(self._nodes)
        k = np.unique(np.concatenate(pts)) if pts else _EMPTY
        return k[(k > 0) & (k < 1)]

    def _tau_raw(self, p: np.ndarray) -> np.ndarray:
        out = np.zeros(p.shape)
        for a, w in zip(self.levels, self.weights):
            out = out + w * np.maximum(p - a, 0.0) / (1.0 - a)
        if self.coeffs.size:
            out = out + self._poly.integ(lbnd=0.0)(p)
        if self.table.size:
            t, n = self.table, self.table.size - 1
            h = 1.0 / n
            i = np.clip(np.floor(p * n).astype(int), 0, n - 1)
            d = p - i * h
            out = out + self._table_cum[i] + t[i] * d + (t[i + 1] - t[i]) * d * d / (2 * h)
        return out

    def tau_continuous(self, p) -> np.ndarray:
        """Antiderivative of ``continuous`` (the step part left out)."""
        p = np.asarray(p, dtype=float)
        out = self._tau_raw(p)
        for a, w in zip(self.levels, self.weights):
            out = out - w * np.maximum(p - a, 0.0) / (1.0 - a)
        return out

    def tau(self, p) -> np.ndarray:
        """Cumulative weight tau(p) = integral of sigma over [0, p]."""
        p = _check_unit(p, "p")
        return np.clip(self._tau_raw(p), 0.0, 1.0)

    @cached_property
    def _top_poly(self) -> Polynomial:
        # antiderivative in v of sigma(1 - v), from v = 0
        return self._poly(Polynomial([1.0, -1.0])).integ(lbnd=0.0)

    @cached_property
    def _top_table_cum(self) -> np.ndarray:
        t = self.table[::-1]
        h = 1.0 / (t.size - 1)
        return np.concatenate([[0.0], np.cumsum(0.5 * h * (t[1:] + t[:-1]))])

    def tail_tau(self, s) -> np.ndarray:
        """1 - tau(1 - s), the weight of the top s, computed without forming 1 - s."""
        s = _check_unit(s, "s")
        out = np.zeros(s.shape)
        for a, w in zip(self.levels, self.weights):
            out = out + w * np.minimum(s, 1.0 - a) / (1.0 - a)
        if self.coeffs.size:
            out = out + self._top_poly(s)
        if self.table.size:
            t, n = self.table[::-1], self.table.size - 1
            h = 1.0 / n
            i = np.clip(np.floor(s * n).astype(int), 0, n - 1)
            d = s - i * h
            out = out + self._top_table_cum[i] + t[i] * d + (t[i + 1] - t[i]) * d * d / (2 * h)
        return np.clip(out, 0.0, 1.0)

    def tau_inverse(self, u) -> np.ndarray:
        """Generalized inverse inf{p : tau(p) >= u}."""
        u = _check_unit(u, "u")
        if self.kind in ("cte", "steps"):
            knots = np.unique(np.concatenate([[0.0, 1.0], self.levels]))
            tk = self._tau_raw(knots)
            tk[-1] = 1.0
            k = np.clip(np.searchsorted(tk, u, side="left"), 1, knots.size - 1)
            t0, t1 = tk[k - 1], tk[k]
            with np.errstate(divide="ignore", invalid="ignore"):
                p = knots[k - 1] + (u - t0) * (knots[k] - knots[k - 1]) / (t1 - t0)
            return np.where(u <= 0.0, 0.0, np.clip(p, 0.0, 1.0))
        if self.kind == "table":
            t, n = self.table, self.table.size - 1
            h = 1.0 / n
            cum = self._table_cum.copy()
            cum[-1] = 1.0
            k = np.clip(np.searchsorted(cum, u, side="left"), 1, n)
            i = k - 1
            rem = np.maximum(u - cum[i], 0.0)
            a = (t[i + 1] - t[i]) / (2 * h)
            b = t[i]
            disc = np.sqrt(np.maximum(b * b + 4 * a * rem, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                d = np.where(b + disc > 0, 2 * rem / (b + disc), 0.0)
            p = i * h + np.minimum(d, h)
            return np.where(u <= 0.0, 0.0, np.clip(p, 0.0, 1.0))
        return _bisect_inf(lambda p: self._tau_raw(p) >= u, u.shape, zero=u <= 0.0)

    def level_inverse(self, t) -> np.ndarray:
        """inf{u in [0, 1] : sigma(u+) >= t}; 1 when t exceeds sigma(1)."""
        t = np.asarray(t, dtype=float)
        return _bisect_inf(lambda u: self.right(u) >= t, t.shape, zero=t <= self.at(0.0))

    def lq_norm(self, q: float) -> float:
        """L^q norm of sigma on [0, 1] for q in {1, 2, inf}."""
        if q == 1:
            return 1.0
        if np.isinf(q):
            return self.sup
        if q == 2:
            from .quadrature import integrate, unit_breaks

            return float(np.sqrt(integrate(lambda u: self(u) ** 2, unit_breaks(self.kinks))))
        raise DomainError("q must be 1, 2 or inf")

    def to_spec(self) -> dict:
        if self.kind == "cte":
            return {"kind": "cte", "alpha": float(self.levels[0])}
        spec: dict = {"kind": self.kind}
        if self.levels.size:
            spec["levels"] = self.levels.tolist()
            spec["weights"] = self.weights.tolist()
        if self.coeffs.size:
            spec["coeffs"] = self.coeffs.tolist()
        if self.table.size:
            spec["values"] = self.table.tolist()
        return spec

    def __repr__(self) -> str:
        return f"Distortion({self.name or self.kind})"


def _bisect_inf(pred, shape, zero, iters: int = 64) -> np.ndarray:
    """Smallest p in [0, 1] with pred(p) true, for a monotone predicate."""
    lo = np.zeros(shape)
    hi = np.ones(shape)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = pred(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return np.where(zero, 0.0, hi)


def make_cte_distortion(alpha: float) -> Distortion:
    """sigma_alpha = 1/(1-alpha) on (alpha, 1]; alpha = 0 is the net premium."""
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"invalid level alpha={alpha}: need 0 <= alpha < 1")
    return Distortion(levels=[alpha], weights=[1.0], name=f"cte({alpha:g})")


def make_poly_distortion(coeffs) -> Distortion:
    """Polynomial distortion ``sum_k coeffs[k] * u**k``."""
    c = [float(x) for x in np.atleast_1d(coeffs)]
    return Distortion(coeffs=c, name="poly(" + ",".join(f"{x:g}" for x in c) + ")")


def make_table_distortion(values, name: str = "") -> Distortion:
    return Distortion(table=values, name=name or f"table[{len(values)}]")


def make_steps_distortion(levels, weights, name: str = "") -> Distortion:
    return Distortion(levels=levels, weights=weights, name=name or "steps")


def tabulate(func, n: int = GRID_NODES, name: str = "") -> Distortion:
    """Sample ``func`` on ``n`` uniform nodes and rescale to unit trapezoid mass."""
    u = np.linspace(0.0, 1.0, n)
    v = np.asarray(func(u), dtype=float)
    mass = float(np.sum(0.5 * (v[1:] + v[:-1])) / (n - 1))
    return make_table_distortion(v / mass, name=name)


def tau(sigma: Distortion, p):
    out = sigma.tau(p)
    return float(out) if np.ndim(p) == 0 else out


def tau_inverse(sigma: Distortion, u):
    out = sigma.tau_inverse(u)
    return float(out) if np.ndim(u) == 0 else out


# -- Kusuoka measures ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """Probability measure on levels [0, 1].

    Atoms at ``locations`` with ``masses``; the absolutely continuous part
    has density ``(1 - a) * g(a)`` where ``g`` is a polynomial
    (``rate_coeffs``) plus a piecewise constant on uniform cells
    (``rate_cells``).
    """

    locations: np.ndarray = field(default_factory=lambda: _EMPTY)
    masses: np.ndarray = field(default_factory=lambda: _EMPTY)
    rate_coeffs: np.ndarray = field(default_factory=lambda: _EMPTY)
    rate_cells: np.ndarray = field(default_factory=lambda: _EMPTY)

    def __post_init__(self):
        for attr in ("locations", "masses", "rate_coeffs", "rate_cells"):
            object.__setattr__(self, attr, _arr(getattr(self, attr)))
        if self.locations.shape != self.masses.shape:
            raise DistortionError("atom locations and masses differ in length")
        if np.any((self.locations < 0) | (self.locations > 1)):
            raise DistortionError("atom locations must lie in [0, 1]")
        if np.any(self.masses <= 0):
            raise DistortionError("atom masses must be positive")
        if self.rate_coeffs.size and _poly_min(Polynomial(self.rate_coeffs)) < -MONO_TOL:
            raise DistortionError("density must be nonnegative")
        if np.any(self.rate_cells < -MONO_TOL):
            raise DistortionError("density must be nonnegative")
        if abs(self.total_mass - 1.0) > MASS_TOL:
            raise DistortionError(f"total mass {self.total_mass:.12g} is not 1")

    @property
    def cell_edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.rate_cells.size + 1) if self.rate_cells.size else _EMPTY

    def rate(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape)
        if self.rate_coeffs.size:
            out = out + Polynomial(self.rate_coeffs)(a)
        if self.rate_cells.size:
            n = self.rate_cells.size
            out = out + self.rate_cells[np.clip(np.floor(a * n).astype(int), 0, n - 1)]
        return out

    def density(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        return (1.0 - a) * self.rate(a)

    @property
    def continuous_mass(self) -> float:
        m = 0.0
        if self.rate_coeffs.size:
            m += float((Polynomial([1.0, -1.0]) * Polynomial(self.rate_coeffs)).integ(lbnd=0)(1.0))
        if self.rate_cells.size:
            n = self.rate_cells.size
            mid = (np.arange(n) + 0.5) / n
            m += float(np.sum(self.rate_cells * (1.0 - mid)) / n)
        return m

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses)) + self.continuous_mass

    @property
    def has_density(self) -> bool:
        return bool(self.rate_coeffs.size or self.rate_cells.size)


def dirac(alpha: float) -> DistortionMeasure:
    return DistortionMeasure(locations=[alpha], masses=[1.0])


def measure_from_distortion(sigma: Distortion) -> DistortionMeasure:
    """mu_sigma = sigma(0) delta_0 + (1 - a) d sigma(a)."""
    locs, masses = [], []
    s0 = sigma.at(0.0)
    if s0 > 0:
        locs.append(0.0)
        masses.append(s0)
    for a, w in zip(sigma.levels, sigma.weights):
        if a > 0:
            locs.append(float(a))
            masses.append(float(w))
    rate_coeffs = sigma._poly.deriv().coef if sigma.coeffs.size > 1 else _EMPTY
    rate_cells = np.diff(sigma.table) * (sigma.table.size - 1) if sigma.table.size else _EMPTY
    return DistortionMeasure(locs, masses, rate_coeffs, rate_cells)


def distortion_from_measure(mu: DistortionMeasure) -> Distortion:
    """sigma_mu(a) = integral over [0, a] of mu(dp) / (1 - p)."""
    if np.any(mu.locations >= 1.0):
        raise UnsupportedError("unsupported measure: atom at level 1 has no distortion")
    at0 = mu.locations == 0.0
    base = float(np.sum(mu.masses[at0]))
    levels = mu.locations[~at0]
    weights = mu.masses[~at0]
    coeffs = _EMPTY
    table = _EMPTY
    if mu.rate_coeffs.size:
        coeffs = Polynomial(mu.rate_coeffs).integ(lbnd=0).coef.copy()
        coeffs[0] += base
        base = 0.0
    if mu.rate_cells.size:
        n = mu.rate_cells.size
        table = np.concatenate([[0.0], np.cumsum(mu.rate_cells / n)]) + base
        base = 0.0
    if base > 0:
        levels = np.concatenate([[0.0], levels])
        weights = np.concatenate([[base], weights])
    if levels.size == 1 and not coeffs.size and not table.size:
        return make_cte_distortion(float(levels[0]))
    return Distortion(levels=levels, weights=weights, coeffs=coeffs, table=table)


def distortion_from_spec(spec: dict) -> Distortion:
    """Build a distortion from a parsed document such as ``{"kind":"cte","alpha":0.9}``."""
    kind = spec.get("kind")
    try:
        if kind == "cte":
            return make_cte_distortion(spec["alpha"])
        if kind == "poly":
            return make_poly_distortion(spec["coeffs"])
        if kind == "table":
            return make_table_distortion(spec["values"])
        if kind == "steps":
            return make_steps_distortion(spec["levels"], spec["weights"])
    except KeyError as exc:
        raise DistortionError(f"distortion spec of kind {kind!r} lacks field {exc}") from None
    raise DistortionError(f"unknown distortion kind {kind!r}")
