"""Distorted premiums and reserves, computed and cross-checked several ways."""

from .actuarial import (
    ExpectancyCurve,
    LifeTable,
    bundled_table,
    curtate_lifetime,
    distorted_life_table,
    expectancy_distorted_outcomes,
    expectancy_distorted_probs,
    reserve_curves,
)
from .conjugate import (
    HSigma,
    PiecewiseLinearConvex,
    affine_conjugate,
    affine_transform,
    build_h_sigma,
    fenchel_young_gap,
    legendre,
    premium_inf,
    zero_gap,
)
from .distances import DistanceReport, distance_report
from .distortion import (
    Distortion,
    DistortionMeasure,
    dirac,
    distortion_from_measure,
    distortion_from_spec,
    make_cte_distortion,
    make_poly_distortion,
    make_steps_distortion,
    make_table_distortion,
    measure_from_distortion,
    tabulate,
    tau,
    tau_inverse,
)
from .dual import (
    DualVariable,
    TailEnvelope,
    cte_dual_forms,
    is_feasible,
    nonnegativity_check,
    sup_oracle,
)
from .losses import (
    Clipped,
    DiscreteLoss,
    EmpiricalLoss,
    Exponential,
    LogNormal,
    LossModel,
    Normal,
    Truncated,
    Uniform,
    distorted_cdf,
    distorted_density,
    distorted_quantile,
    loss_from_spec,
)
from .premium import (
    PremiumReport,
    cte,
    cte_variational,
    premium_comonotone,
    premium_direct,
    premium_kusuoka,
    premium_report,
)

__version__ = "0.1.0"
