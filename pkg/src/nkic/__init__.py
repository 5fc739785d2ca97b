"""Degrees of freedom of the (n,K)-user interference channel.

Channel sampling, single-user-decoding rates, exponential-order statistics
and their tail laws, active-set selection and the Monte Carlo experiments
built on them.
"""

from .errors import ConfigError, NumericError
from .netmodel import (
    ActiveSet,
    ChannelRealization,
    NetworkConfig,
    PathLoss,
    active_set_partition,
    antenna_pairing_transform,
    sample_network,
)
from .rates import RateReport, rate_sd_mimo, rate_sd_mimo_lb, rate_sd_siso, sinr_siso, sum_rate
from .exporders import (
    AnalyticLaw,
    EigenOrders,
    OrderSample,
    TheoremBounds,
    analytic_tail_exponent,
    beta_set,
    dmt_exponent,
    eigen_orders,
    exp_order,
    order_sample,
    partition_limit,
    theorem_bounds,
    x_of_set,
    z_mimo,
    z_siso,
)
from .scheduling import SelectionResult, select_exhaustive, select_partitioned, select_random
from .experiments import (
    DofEstimate,
    ExchangeRecord,
    Latent,
    ScalingResult,
    TailEstimate,
    dof_run,
    estimate_dof,
    exchangeability_check,
    fit_tail_exponent,
    scaling_run,
    tail_sweep,
    wishart_tail_run,
)

__version__ = "0.1.0"
