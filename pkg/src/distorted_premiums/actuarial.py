"""Life tables, curtate lifetimes, and expectancy (reserve) curves.

Two ways to put a safety loading on the further life expectancy:

* distorted probabilities: a new life table with death probabilities
  tau(_{k+1}q_x) - tau(_k q_x), built once at the issue age;
* distorted outcomes: the original probabilities with the lifetime K
  replaced by h_sigma(K), h_sigma built once at the issue age.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .conjugate import build_h_sigma
from .distortion import Distortion
from .errors import DistortionError, DomainError
from .losses import DiscreteLoss


@dataclass(frozen=True, eq=False)
class LifeTable:
    """One-year death probabilities q_x for ages base_age, base_age + 1, ..."""

    base_age: int
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        if q.size == 0:
            raise DistortionError("life table is empty")
        if np.any((q < 0) | (q > 1)) or not np.all(np.isfinite(q)):
            raise DistortionError("death probabilities must lie in [0, 1]")
        if q[-1] != 1.0:
            raise DistortionError("final death probability must be exactly 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "base_age", int(self.base_age))

    @property
    def omega(self) -> int:
        """Last age in the table."""
        return self.base_age + self.q.size - 1

    @property
    def ages(self) -> np.ndarray:
        return np.arange(self.base_age, self.omega + 1)

    def tail(self, x: int) -> np.ndarray:
        if not self.base_age <= x <= self.omega:
            raise DomainError(f"age {x} outside table range {self.base_age}..{self.omega}")
        return self.q[x - self.base_age:]

    @classmethod
    def from_csv(cls, path) -> "LifeTable":
        with open(path, newline="") as fh:
            rows = [(int(r["age"]), float(r["qx"])) for r in csv.DictReader(fh)]
        if not rows:
            raise DistortionError(f"no rows in {path}")
        ages = np.array([a for a, _ in rows])
        if np.any(np.diff(ages) != 1):
            raise DistortionError("ages must be consecutive")
        return cls(int(ages[0]), np.array([v for _, v in rows]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("age,qx\n")
            for a, v in zip(self.ages, self.q):
                fh.write(f"{a},{float(v)!r}\n")


def bundled_table() -> LifeTable:
    """Unisex Standard Ultimate Life Table (Makeham law), ages 20 to 120."""
    ref = resources.files("distorted_premiums") / "data" / "sult.csv"
    with resources.as_file(ref) as p:
        return LifeTable.from_csv(Path(p))


def death_probabilities(table: LifeTable, x: int) -> np.ndarray:
    """_k p_x q_{x+k} for k = 0 .. omega - x."""
    q = table.tail(x)
    survive = np.concatenate([[1.0], np.cumprod(1.0 - q[:-1])])
    return survive * q


def annuity_values(k, rate: float = 0.0) -> np.ndarray:
    """Present value of 1 paid at the end of each of k completed years."""
    k = np.asarray(k, dtype=float)
    if rate == 0.0:
        return k
    v = 1.0 / (1.0 + rate)
    return v * (1.0 - v ** k) / (1.0 - v)


def curtate_lifetime(table: LifeTable, x: int, rate: float = 0.0) -> DiscreteLoss:
    """Curtate future lifetime K_x (or its annuity value) as a discrete loss."""
    d = death_probabilities(table, x)
    k = np.arange(d.size)
    keep = d > 0
    probs = d[keep] / d[keep].sum()  # rounding only; the product telescopes to 1
    return DiscreteLoss(annuity_values(k[keep], rate), probs)


def distorted_life_table(sigma: Distortion, table: LifeTable, x: int) -> LifeTable:
    """Life table starting at age x whose deaths are tau-increments of the original."""
    q = table.tail(x)
    # survival s_k = P(K >= k); the distorted survival is the top weight
    # 1 - tau(1 - s_k), taken directly from s_k to avoid cancellation
    s = np.concatenate([[1.0], np.cumprod(1.0 - q)])
    alive = sigma.tail_tau(np.clip(s, 0.0, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        qt = np.where(alive[:-1] > 0, 1.0 - alive[1:] / alive[:-1], 1.0)
    qt = np.clip(qt, 0.0, 1.0)
    certain = np.flatnonzero(qt >= 1.0)
    end = int(certain[0]) if certain.size else qt.size - 1  # first certain death closes it
    qt = qt[: end + 1]
    qt[-1] = 1.0
    return LifeTable(x, qt)


def expectancy_net(table: LifeTable, x: int, rate: float = 0.0) -> float:
    return curtate_lifetime(table, x, rate).mean


def expectancy_distorted_probs(sigma: Distortion, table: LifeTable, x: int,
                               rate: float = 0.0) -> float:
    """Further expectancy computed from the distorted life table."""
    return curtate_lifetime(distorted_life_table(sigma, table, x), x, rate).mean


def expectancy_distorted_outcomes(sigma: Distortion, table: LifeTable, x: int,
                                  rate: float = 0.0) -> float:
    """sum_k h_sigma(k) _k p_x q_{x+k} under the original probabilities."""
    loss = curtate_lifetime(table, x, rate)
    h = build_h_sigma(sigma, loss)
    return float(loss.probs @ h(loss.values))


@dataclass
class ExpectancyCurve:
    ages: np.ndarray
    net: np.ndarray
    distorted_probs: np.ndarray
    distorted_outcomes: np.ndarray

    def rows(self):
        for r in zip(self.ages, self.net, self.distorted_probs, self.distorted_outcomes):
            yield int(r[0]), float(r[1]), float(r[2]), float(r[3])

    def to_csv(self) -> str:
        lines = ["age,net,distorted_probs,distorted_outcomes"]
        lines += [f"{a},{n!r},{p!r},{o!r}" for a, n, p, o in self.rows()]
        return "\n".join(lines) + "\n"


def reserve_curves(sigma: Distortion, table: LifeTable, x0: int, horizon: int,
                   rate: float = 0.0) -> ExpectancyCurve:
    """Further expectancies at attained ages x0 .. x0 + horizon.

    The distorted table and h_sigma are both fixed at the issue age x0.  At
    attained age x = x0 + t the distorted-outcome reserve is
    E[h(A(K_{x0})) | K_{x0} >= t] less the value A(t) already elapsed,
    rolled forward to age x (A the annuity value; A(k) = k at rate 0).
    """
    if horizon < 0 or x0 + horizon > table.omega:
        raise DomainError("x0 + horizon must stay inside the table")
    probs_all = death_probabilities(table, x0)
    lifetimes = np.arange(probs_all.size)
    h = build_h_sigma(sigma, curtate_lifetime(table, x0, rate))
    new_table = distorted_life_table(sigma, table, x0)
    ages = np.arange(x0, x0 + horizon + 1)
    net, dprob, dout = [], [], []
    for x in ages:
        t = x - x0
        net.append(expectancy_net(table, x, rate))
        if x <= new_table.omega:
            dprob.append(curtate_lifetime(new_table, x, rate).mean)
        else:
            dprob.append(0.0)
        alive = lifetimes >= t
        w = probs_all[alive]
        if w.sum() <= 0:
            dout.append(0.0)
            continue
        hv = h(annuity_values(lifetimes[alive], rate))
        roll = (1.0 + rate) ** t
        dout.append(float((w @ hv / w.sum() - annuity_values(t, rate)) * roll))
    return ExpectancyCurve(ages, np.array(net), np.array(dprob), np.array(dout))
