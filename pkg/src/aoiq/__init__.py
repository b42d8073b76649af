"""Mean age of information for single-server LIFO-pushout buffers.

Exact stationary mean-AoI formulas for buffer sizes 1..3 under Poisson
arrivals and general service, plus a discrete-event simulator for any buffer
size that the formulas are cross-validated against.
"""

from .analytic import (
    AoiEstimate,
    ChainModel,
    CycleMoments,
    Step1Table,
    SystemParams,
    aoi_given_k0,
    chain_model,
    conditional_aoi_table,
    cycle_moments,
    mean_aoi,
    mean_aoi_m1,
    mean_aoi_m2,
    mean_aoi_m3,
    stationary_distribution,
    step1_table,
    transition_matrix,
)
from .distributions import (
    ServiceDistribution,
    TransformCheckReport,
    deterministic,
    erlang,
    exponential,
    gamma,
    parse_distribution,
    transform_checks,
)
from .errors import (
    DegenerateRegimeError,
    NoDataError,
    ProtocolViolation,
    UnsupportedConfigurationError,
)
from .simulator import (
    Arrival,
    BufferState,
    CycleDiagnostics,
    Departure,
    Message,
    SamplePath,
    SimConfig,
    SimResult,
    cycle_diagnostics,
    empirical_chain,
    run,
    step,
)

__version__ = "0.1.0"
