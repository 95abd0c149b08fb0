"""Loss distributions and the distorted loss L_sigma (distorted probabilities).

Every model exposes its cdf, the left-continuous quantile
``inf{x : F(x) >= u}``, and the tail integral ``int_a^1 F^{-1}(p) dp``,
which is what all tail expectations are built from.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy import special

from .distortion import Distortion
from .errors import DistortionError, DomainError, NoDensityError, UnboundedError
from .quadrature import integrate, unit_breaks

PROB_TOL = 1e-12
# Cumulative probabilities are compared with this slack so that rounding in
# cumsum never shifts a quantile onto the next atom.
_CUM_SLACK = 1e-13


class LossModel:
    """Base class; continuous subclasses override the distribution methods."""

    discrete = False

    def cdf(self, x):
        raise NotImplementedError

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quantile(self, u):
        """Generalized inverse of the cdf on (0, 1]."""
        arr = np.asarray(u, dtype=float)
        if np.any(~(arr > 0.0)) or np.any(arr > 1.0 + PROB_TOL):
            raise DomainError("quantile level must lie in (0, 1]")
        arr = np.minimum(arr, 1.0)
        if np.isinf(self.esssup) and np.any(arr == 1.0):
            raise UnboundedError("quantile at level 1 of an unbounded loss")
        out = self._quantile(arr)
        return float(out) if np.ndim(u) == 0 else out

    @property
    def esssup(self) -> float:
        return math.inf

    @property
    def essinf(self) -> float:
        return -math.inf

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.esssup) and math.isfinite(self.essinf)

    @property
    def quantile_breaks(self) -> np.ndarray:
        """Levels in (0, 1) where the quantile jumps or kinks."""
        return np.zeros(0)

    def tail_integral(self, alpha):
        """int_alpha^1 F^{-1}(p) dp, by quadrature unless a closed form exists."""
        out = []
        for a in np.atleast_1d(np.asarray(alpha, dtype=float)):
            pts = unit_breaks(self.quantile_breaks, a)
            out.append(integrate(self._quantile, pts[pts >= a]))
        return np.array(out)

    @property
    def mean(self) -> float:
        return float(np.atleast_1d(self.tail_integral(0.0))[0])

    def expectation(self, func, breaks=()) -> float:
        """E func(L) = int_0^1 func(F^{-1}(u)) du."""
        return integrate(lambda u: func(self._quantile(u)),
                         unit_breaks(self.quantile_breaks, breaks))

    def lp_norm(self, p: float) -> float:
        if math.isinf(p):
            return max(abs(self.essinf), abs(self.esssup))
        return self.expectation(lambda x: np.abs(x) ** p) ** (1.0 / p)

    def pdf(self, x):
        raise NoDensityError(f"{type(self).__name__} has no density")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._quantile(1.0 - rng.random(n))


class DiscreteLoss(LossModel):
    """Finitely many atoms ``values`` with probabilities ``probs``."""

    discrete = True

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=float).ravel()
        probs = np.asarray(probs, dtype=float).ravel()
        if values.shape != probs.shape or values.size == 0:
            raise DistortionError("discrete loss needs matching, nonempty values and probs")
        if not np.all(np.isfinite(values)):
            raise DistortionError("discrete loss values must be finite")
        if np.any(probs <= 0):
            raise DistortionError("discrete loss probabilities must be positive")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise DistortionError(f"probabilities sum to {probs.sum():.15g}, not 1")
        uniq, inv = np.unique(values, return_inverse=True)
        merged = np.bincount(inv, weights=probs)
        self.values = uniq
        self.probs = merged
        cum = np.cumsum(merged)
        cum[-1] = 1.0
        self.cum = cum

    @classmethod
    def from_atoms(cls, atoms) -> "DiscreteLoss":
        atoms = np.asarray(atoms, dtype=float)
        return cls(atoms[:, 0], atoms[:, 1])

    def __repr__(self) -> str:
        return f"DiscreteLoss(n={self.values.size})"

    @property
    def lower_cum(self) -> np.ndarray:
        return np.concatenate([[0.0], self.cum[:-1]])

    def cdf(self, x):
        idx = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right")
        out = np.where(idx > 0, self.cum[np.maximum(idx - 1, 0)], 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _quantile(self, u):
        k = np.searchsorted(self.cum, np.asarray(u) - _CUM_SLACK, side="left")
        return self.values[np.clip(k, 0, self.values.size - 1)]

    @property
    def esssup(self) -> float:
        return float(self.values[-1])

    @property
    def essinf(self) -> float:
        return float(self.values[0])

    @property
    def quantile_breaks(self):
        return self.cum[:-1]

    def tail_integral(self, alpha):
        a = np.atleast_1d(np.asarray(alpha, dtype=float))[:, None]
        lengths = np.maximum(self.cum[None, :] - np.maximum(a, self.lower_cum[None, :]), 0.0)
        return lengths @ self.values

    @property
    def mean(self) -> float:
        return float(self.probs @ self.values)

    def expectation(self, func, breaks=()) -> float:
        return float(self.probs @ np.asarray(func(self.values), dtype=float))

    def lp_norm(self, p: float) -> float:
        if math.isinf(p):
            return float(np.max(np.abs(self.values)))
        return float(self.probs @ np.abs(self.values) ** p) ** (1.0 / p)

    def sample(self, n, rng):
        return rng.choice(self.values, size=n, p=self.probs)


class EmpiricalLoss(DiscreteLoss):
    """Equally weighted samples; the cdf is the right-continuous step function."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0:
            raise DistortionError("empirical loss needs at least one sample")
        super().__init__(samples, np.full(samples.size, 1.0 / samples.size))
        self.n_samples = samples.size

    @classmethod
    def from_csv(cls, path) -> "EmpiricalLoss":
        text = Path(path).read_text().split()
        return cls([float(t) for t in text])

    def __repr__(self) -> str:
        return f"EmpiricalLoss(n={self.n_samples})"


def _phi(z):
    return np.exp(-0.5 * np.asarray(z) ** 2) / math.sqrt(2 * math.pi)


class Normal(LossModel):
    def __init__(self, mu: float = 0.0, sd: float = 1.0):
        if sd <= 0:
            raise DistortionError("normal sd must be positive")
        self.mu, self.sd = float(mu), float(sd)

    def __repr__(self):
        return f"Normal({self.mu:g}, {self.sd:g})"

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mu) / self.sd)

    def pdf(self, x):
        return _phi((np.asarray(x, dtype=float) - self.mu) / self.sd) / self.sd

    def _quantile(self, u):
        return self.mu + self.sd * special.ndtri(u)

    def tail_integral(self, alpha):
        a = np.asarray(alpha, dtype=float)
        return (1.0 - a) * self.mu + self.sd * _phi(special.ndtri(a))

    @property
    def mean(self):
        return self.mu


class LogNormal(LossModel):
    """exp(N(mu, sd^2))."""

    def __init__(self, mu: float = 0.0, sd: float = 1.0):
        if sd <= 0:
            raise DistortionError("lognormal sd must be positive")
        self.mu, self.sd = float(mu), float(sd)

    def __repr__(self):
        return f"LogNormal({self.mu:g}, {self.sd:g})"

    @property
    def essinf(self):
        return 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.mu) / self.sd
        return special.ndtr(z)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        xs = np.where(pos, x, 1.0)
        return np.where(pos, _phi((np.log(xs) - self.mu) / self.sd) / (self.sd * xs), 0.0)

    def _quantile(self, u):
        return np.exp(self.mu + self.sd * special.ndtri(u))

    def tail_integral(self, alpha):
        a = np.asarray(alpha, dtype=float)
        return math.exp(self.mu + 0.5 * self.sd ** 2) * special.ndtr(self.sd - special.ndtri(a))


class Exponential(LossModel):
    def __init__(self, rate: float = 1.0):
        if rate <= 0:
            raise DistortionError("exponential rate must be positive")
        self.rate = float(rate)

    def __repr__(self):
        return f"Exponential({self.rate:g})"

    @property
    def essinf(self):
        return 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * np.maximum(x, 0.0)), 0.0)

    def _quantile(self, u):
        return -np.log1p(-np.asarray(u)) / self.rate

    def tail_integral(self, alpha):
        s = 1.0 - np.asarray(alpha, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = s * (1.0 - np.log(s)) / self.rate
        return np.where(s > 0, out, 0.0)

    @property
    def mean(self):
        return 1.0 / self.rate


class Uniform(LossModel):
    def __init__(self, a: float = 0.0, b: float = 1.0):
        if not b > a:
            raise DistortionError("uniform needs a < b")
        self.a, self.b = float(a), float(b)

    def __repr__(self):
        return f"Uniform({self.a:g}, {self.b:g})"

    @property
    def esssup(self):
        return self.b

    @property
    def essinf(self):
        return self.a

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def _quantile(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def tail_integral(self, alpha):
        a = np.asarray(alpha, dtype=float)
        return (1.0 - a) * self.a + (self.b - self.a) * (1.0 - a * a) / 2.0


class Truncated(LossModel):
    """``base`` conditioned on ``lower <= L <= upper``."""

    def __init__(self, base: LossModel, lower: float, upper: float):
        self.base, self.lower, self.upper = base, float(lower), float(upper)
        self.p_lo = float(base.cdf(self.lower))
        self.p_hi = float(base.cdf(self.upper))
        self.mass = self.p_hi - self.p_lo
        if not self.mass > 0:
            raise DistortionError("truncation window carries no probability")

    def __repr__(self):
        return f"Truncated({self.base!r}, {self.lower:g}, {self.upper:g})"

    @property
    def esssup(self):
        return min(self.upper, self.base.esssup)

    @property
    def essinf(self):
        return max(self.lower, self.base.essinf)

    def cdf(self, x):
        return np.clip((self.base.cdf(x) - self.p_lo) / self.mass, 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        return np.where(inside, self.base.pdf(x) / self.mass, 0.0)

    def _quantile(self, u):
        return np.clip(self.base._quantile(self.p_lo + np.asarray(u) * self.mass),
                       self.essinf, self.esssup)

    def tail_integral(self, alpha):
        a = np.asarray(alpha, dtype=float)
        lo = self.base.tail_integral(self.p_lo + a * self.mass)
        return (lo - self.base.tail_integral(self.p_hi)) / self.mass


class Clipped(LossModel):
    """``base`` winsorized at its quantiles of level ``u_lo`` and ``u_hi``.

    Used as the bounded surrogate of an unbounded loss; the two clip points
    become atoms of mass ``u_lo`` and ``1 - u_hi``.
    """

    def __init__(self, base: LossModel, u_lo: float = 1e-9, u_hi: float = 1 - 1e-9):
        if not 0.0 <= u_lo < u_hi <= 1.0:
            raise DomainError("need 0 <= u_lo < u_hi <= 1")
        self.base, self.u_lo, self.u_hi = base, float(u_lo), float(u_hi)
        self.q_lo = base.essinf if u_lo == 0 else float(base._quantile(np.array(u_lo)))
        self.q_hi = base.esssup if u_hi == 1 else float(base._quantile(np.array(u_hi)))

    def __repr__(self):
        return f"Clipped({self.base!r}, {self.u_lo:g}, {self.u_hi:.12g})"

    @property
    def esssup(self):
        return self.q_hi

    @property
    def essinf(self):
        return self.q_lo

    @property
    def quantile_breaks(self):
        return np.array([self.u_lo, self.u_hi])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < self.q_lo, 0.0, np.where(x >= self.q_hi, 1.0, self.base.cdf(x)))

    def _quantile(self, u):
        return self.base._quantile(np.clip(u, self.u_lo, self.u_hi))

    def tail_integral(self, alpha):
        a = np.asarray(alpha, dtype=float)
        tb = self.base.tail_integral
        top = (1.0 - self.u_hi) * self.q_hi
        t_hi = tb(self.u_hi)
        mid = tb(np.clip(a, self.u_lo, self.u_hi)) - t_hi + top
        low = np.maximum(self.u_lo - a, 0.0) * self.q_lo
        return np.where(a >= self.u_hi, (1.0 - a) * self.q_hi, mid + low)


def bounded_surrogate(loss: LossModel, level: float = 1e-9) -> LossModel:
    """The loss itself if bounded, else its winsorization at (level, 1 - level)."""
    if loss.bounded:
        return loss
    u_lo = level if math.isinf(loss.essinf) else 0.0
    u_hi = 1.0 - level if math.isinf(loss.esssup) else 1.0
    return Clipped(loss, u_lo, u_hi)


# -- distorted probabilities ------------------------------------------------

def distorted_cdf(sigma: Distortion, loss: LossModel, y):
    """F_{L_sigma}(y) = tau_sigma(F_L(y))."""
    out = sigma.tau(np.clip(loss.cdf(y), 0.0, 1.0))
    return float(out) if np.ndim(y) == 0 else out


def distorted_quantile(sigma: Distortion, loss: LossModel, u):
    """F_{L_sigma}^{-1}(u) = F_L^{-1}(tau_sigma^{-1}(u))."""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 0.0)) or np.any(arr > 1.0 + PROB_TOL):
        raise DomainError("quantile level must lie in (0, 1]")
    return loss.quantile(sigma.tau_inverse(np.minimum(arr, 1.0)) if np.ndim(u) else
                         float(sigma.tau_inverse(min(float(u), 1.0))))


def distorted_density(sigma: Distortion, loss: LossModel, y):
    """f_{L_sigma}(y) = f_L(y) sigma(F_L(y))."""
    if loss.discrete:
        raise NoDensityError("discrete and empirical losses have no density")
    out = loss.pdf(y) * sigma(np.clip(loss.cdf(y), 0.0, 1.0))
    return float(out) if np.ndim(y) == 0 else out


def loss_from_spec(spec: dict, base_dir: Path | None = None) -> LossModel:
    """Build a loss from a parsed document such as ``{"kind":"normal","mu":0,"sd":1}``."""
    kind = spec.get("kind")
    try:
        if kind == "discrete":
            if "values" in spec:
                return DiscreteLoss(spec["values"], spec["probs"])
            return DiscreteLoss.from_atoms(spec["atoms"])
        if kind == "empirical":
            if "samples" in spec:
                return EmpiricalLoss(spec["samples"])
            path = Path(spec["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return EmpiricalLoss.from_csv(path)
        if kind == "normal":
            return Normal(spec.get("mu", 0.0), spec.get("sd", 1.0))
        if kind == "lognormal":
            return LogNormal(spec.get("mu", 0.0), spec.get("sd", 1.0))
        if kind == "exponential":
            return Exponential(spec.get("rate", 1.0))
        if kind == "uniform":
            return Uniform(spec.get("a", 0.0), spec.get("b", 1.0))
        if kind == "truncated":
            return Truncated(loss_from_spec(spec["base"], base_dir), spec["lower"], spec["upper"])
    except KeyError as exc:
        raise DistortionError(f"loss spec of kind {kind!r} lacks field {exc}") from None
    raise DistortionError(f"unknown loss kind {kind!r}")
