"""The fixed (distortion, loss) battery shared by the tests and scripts.

Discrete probabilities are multiples of 1e-5 so that the co-monotone
midpoint grid with n = 10^5 lines up with the atoms of every discrete loss.
"""

from __future__ import annotations

import numpy as np

from .distortion import Distortion, make_cte_distortion, make_poly_distortion, tabulate
from .losses import DiscreteLoss, EmpiricalLoss, Exponential, LossModel, Normal, Truncated, Uniform


def battery_distortions() -> dict[str, Distortion]:
    out = {f"cte{a:g}": make_cte_distortion(a) for a in (0.0, 0.5, 0.8, 0.95)}
    out["poly"] = make_poly_distortion([0.7, 0.0, 0.9])
    out["table_quad"] = tabulate(lambda u: 0.2 + 2.4 * u ** 2, name="table_quad")
    out["table_logistic"] = tabulate(lambda u: 1.0 / (1.0 + np.exp(-40.0 * (u - 0.7))),
                                     name="table_logistic")
    out["table_ramp"] = tabulate(lambda u: np.maximum(0.0, u - 0.3), name="table_ramp")
    return out


def _lattice_probs(rng: np.random.Generator, n: int) -> np.ndarray:
    counts = rng.multinomial(100_000 - n, np.full(n, 1.0 / n)) + 1
    return counts / 100_000


def battery_losses(seed: int = 20240611) -> dict[str, LossModel]:
    rng = np.random.default_rng(seed)
    d10_values = np.round(rng.gamma(2.0, 50.0, 10), 3)
    return {
        "two_point": DiscreteLoss([0.0, 100.0], [0.9, 0.1]),
        "five_point": DiscreteLoss([-2.0, 0.5, 1.0, 3.0, 10.0], [0.1, 0.25, 0.3, 0.2, 0.15]),
        "ten_point": DiscreteLoss(d10_values, _lattice_probs(rng, 10)),
        "empirical50": EmpiricalLoss(np.round(rng.lognormal(0.0, 0.8, 50), 6)),
        "empirical200": EmpiricalLoss(np.round(rng.normal(1.0, 2.0, 200), 6)),
        "uniform": Uniform(0.0, 1.0),
        "truncnorm": Truncated(Normal(0.0, 1.0), -3.0, 3.0),
        "exponential": Exponential(1.0),
    }


def battery(seed: int = 20240611):
    """All (sigma name, sigma, loss name, loss) pairs."""
    sigmas = battery_distortions()
    losses = battery_losses(seed)
    return [(sn, s, ln, loss) for sn, s in sigmas.items() for ln, loss in losses.items()]
