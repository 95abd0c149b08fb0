"""Dual (supremum) side: Z majorized by sigma, and a random-search oracle.

Z is feasible for sigma when E Z = 1 and, for every level a,

    G(a) = int_a^1 F_Z^{-1}(p) dp  <=  S(a) = int_a^1 sigma(p) dp.

On a finite space G is piecewise linear between the cumulative
probabilities of Z while S = 1 - tau is concave, so G - S is convex between
those nodes and checking the nodes is an exact certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distortion import Distortion, make_cte_distortion
from .errors import DistortionError, UnsupportedError
from .losses import DiscreteLoss, LossModel
from .premium import premium_direct

FEAS_TOL = 1e-9
# the random search only accepts points feasible up to rounding
ORACLE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class DualVariable:
    """Values of Z on the atoms of a finite probability space."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if v.shape != p.shape or v.size == 0:
            raise DistortionError("dual variable needs matching, nonempty values and probs")
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DistortionError("dual variable probabilities must be positive and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @property
    def mean(self) -> float:
        return float(self.probs @ self.values)

    def pair(self, loss: DiscreteLoss) -> float:
        """E[L Z] on the shared atoms."""
        return float(self.probs @ (loss.values * self.values))

    def tail(self, alpha) -> np.ndarray:
        """G(alpha) = (1 - alpha) CTE_alpha(Z)."""
        order = np.argsort(self.values, kind="stable")
        z, p = self.values[order], self.probs[order]
        cum = np.cumsum(p)
        cum[-1] = 1.0
        lower = np.concatenate([[0.0], cum[:-1]])
        a = np.atleast_1d(np.asarray(alpha, dtype=float))[:, None]
        return np.maximum(cum[None, :] - np.maximum(a, lower[None, :]), 0.0) @ z

    def nodes(self) -> np.ndarray:
        p = self.probs[np.argsort(self.values, kind="stable")]
        cum = np.concatenate([[0.0], np.cumsum(p)])
        cum[-1] = 1.0
        return cum


@dataclass(frozen=True)
class TailEnvelope:
    """S(alpha) = int_alpha^1 sigma = 1 - tau(alpha); concave and decreasing."""

    sigma: Distortion

    def __call__(self, alpha):
        return 1.0 - self.sigma.tau(np.clip(alpha, 0.0, 1.0))


@dataclass
class Feasibility:
    feasible: bool
    mean_defect: float
    worst_alpha: float | None = None
    worst_excess: float = 0.0
    binding: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.feasible


def _chebyshev_levels(k: int = 64) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(np.pi * (np.arange(k) + 0.5) / k)


def is_feasible(z: DualVariable, sigma: Distortion, tol: float = FEAS_TOL) -> Feasibility:
    """Check E Z = 1 and G <= S at the nodes of Z (plus Chebyshev levels for smooth sigma)."""
    alphas = z.nodes()
    if sigma.kind not in ("cte", "steps"):
        alphas = np.union1d(alphas, _chebyshev_levels())
    excess = z.tail(alphas) - TailEnvelope(sigma)(alphas)
    mean_defect = z.mean - 1.0
    k = int(np.argmax(excess))
    ok = abs(mean_defect) <= tol and excess[k] <= tol
    binding = alphas[np.abs(excess) <= tol].tolist()
    return Feasibility(bool(ok), float(mean_defect),
                       None if excess[k] <= tol else float(alphas[k]), float(excess[k]), binding)


def nonnegativity_check(z: DualVariable, sigma: Distortion) -> bool:
    """Feasible dual variables are nonnegative; True unless that fails for z."""
    if not is_feasible(z, sigma):
        return True
    return bool(z.values.min() >= -1e-12)


def comonotone_candidate(sigma: Distortion, loss: DiscreteLoss) -> DualVariable:
    """Z*_i = (tau(P_i) - tau(P_{i-1})) / p_i on the sorted atoms of L."""
    dt = np.diff(np.concatenate([[0.0], sigma.tau(loss.cum)]))
    return DualVariable(dt / loss.probs, loss.probs)


def dual_from_distortion(sigma: Distortion, n: int) -> DualVariable:
    """sigma(U) on n equal cells, as cell averages n (tau(i/n) - tau((i-1)/n))."""
    grid = np.linspace(0.0, 1.0, n + 1)
    return DualVariable(n * np.diff(sigma.tau(grid)), np.full(n, 1.0 / n))


def comonotone_value(loss: DiscreteLoss, z: DualVariable) -> float:
    """int_0^1 F_L^{-1} F_Z^{-1}: E[L Z] after co-monotone rearrangement."""
    zl = DiscreteLoss(z.values, z.probs)
    cuts = np.union1d(loss.cum, zl.cum)
    lo = np.concatenate([[0.0], cuts[:-1]])
    mid = 0.5 * (lo + cuts)
    return float(np.sum((cuts - lo) * loss.quantile(mid) * zl.quantile(mid)))


def _batch_feasible(zs: np.ndarray, p: np.ndarray, sigma: Distortion, tol: float) -> np.ndarray:
    """Row-wise feasibility of candidate values ``zs`` sharing probabilities ``p``."""
    order = np.argsort(-zs, axis=1, kind="stable")
    zd = np.take_along_axis(zs, order, axis=1)
    if np.all(p == p[0]):
        # equal weights: the envelope at the sorted nodes is shared by all rows
        pd = p[None, :]
        top_mass = np.cumsum(p)[None, :]
    else:
        pd = p[order]
        top_mass = np.cumsum(pd, axis=1)
    g = np.cumsum(zd * pd, axis=1)
    s = 1.0 - sigma.tau(np.clip(1.0 - top_mass, 0.0, 1.0))
    means = zs @ p
    return (np.abs(means - 1.0) <= tol) & np.all(g <= s + tol, axis=1)


@dataclass
class OracleResult:
    candidate: float
    best: float
    premium: float
    trials: int
    accepted: int
    improved: bool
    binding: list


def sup_oracle(sigma: Distortion, loss: LossModel, trials: int = 10_000,
               seed: int = 0, batch: int = 250, halvings: int = 24) -> OracleResult:
    """Random feasible search for sup E[L Z] over Z majorized by sigma.

    Starts at the co-monotone candidate and performs ``trials`` pairwise
    mass-preserving transfers; an infeasible transfer is halved until it
    re-enters the feasible set (or dropped).  The search walks through the
    feasible set, restarting at the candidate now and then, and reports the
    best value seen.  It should never beat the candidate.
    """
    if not isinstance(loss, DiscreteLoss):
        raise UnsupportedError("the dual oracle needs a discrete loss")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    star = comonotone_candidate(sigma, loss)
    check = is_feasible(star, sigma)
    if not check:
        raise ArithmeticError(f"co-monotone candidate infeasible at alpha={check.worst_alpha}")
    p, x = loss.probs, loss.values
    cand_value = star.pair(loss)
    best = cand_value
    current = star.values.copy()
    n = p.size
    done = accepted = 0
    scale = max(1.0, float(np.max(np.abs(star.values))))
    while done < trials and n > 1:
        b = min(batch, trials - done)
        i = rng.integers(0, n, b)
        j = (i + rng.integers(1, n, b)) % n
        delta = rng.exponential(0.1 * scale, b) * np.minimum(p[i], p[j])
        trial = np.repeat(current[None, :], b, axis=0)
        rows = np.arange(b)
        trial[rows, i] += delta / p[i]
        trial[rows, j] -= delta / p[j]
        feasible = np.zeros(b, dtype=bool)
        pending = rows
        for _ in range(halvings):
            ok = _batch_feasible(trial[pending], p, sigma, ORACLE_TOL)
            feasible[pending[ok]] = True
            pending = pending[~ok]
            if pending.size == 0:
                break
            delta[pending] *= 0.5
            trial[pending, i[pending]] -= delta[pending] / p[i[pending]]
            trial[pending, j[pending]] += delta[pending] / p[j[pending]]
        done += b
        if feasible.any():
            accepted += int(feasible.sum())
            vals = trial[feasible] @ (p * x)
            best = max(best, float(vals.max()))
            pick = rng.choice(np.flatnonzero(feasible))
            current = trial[pick]
        if rng.random() < 0.05:
            current = star.values.copy()
    return OracleResult(
        candidate=cand_value,
        best=best,
        premium=premium_direct(sigma, loss),
        trials=done,
        accepted=accepted,
        improved=best > cand_value + FEAS_TOL,
        binding=check.binding,
    )


def cte_dual_forms(alpha: float, loss: DiscreteLoss):
    """Both dual forms of CTE_alpha: the box-constrained greedy fill and the
    majorization form solved by the co-monotone candidate for sigma_alpha."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    if not isinstance(loss, DiscreteLoss):
        raise UnsupportedError("dual CTE forms need a discrete loss")
    cap = 1.0 / (1.0 - alpha)
    # greedy: Z = cap on the top atoms until E Z = 1
    p = loss.probs[::-1]
    room = 1.0 - alpha
    take = np.minimum(p, np.maximum(room - np.concatenate([[0.0], np.cumsum(p)[:-1]]), 0.0))
    z_top = take / p * cap
    greedy = DualVariable(z_top[::-1], loss.probs)
    sigma = make_cte_distortion(alpha)
    star = comonotone_candidate(sigma, loss)
    if not is_feasible(star, sigma):
        raise ArithmeticError("co-monotone CTE dual infeasible")
    return greedy.pair(loss), star.pair(loss)
