"""feemarket: simulation and analysis of EIP-1559-style base-fee update rules.

The package is organized as a small numpy/scipy library:

* :mod:`feemarket.core` -- domain types, one-step dispatch, properness checks
* :mod:`feemarket.demand` -- valuation distributions and block-size generation
* :mod:`feemarket.mechanisms` -- the concrete update rules
* :mod:`feemarket.analysis` -- closed-form bounds and convergence diagnostics
* :mod:`feemarket.engine` -- trajectory runner
* :mod:`feemarket.sweep` -- bifurcation grid sweeps
* :mod:`feemarket.chaindata` -- historical gas-data batch analysis
* :mod:`feemarket.cli` -- command-line front end
"""

from .analysis import (
    BoundReport,
    GapSeries,
    amm_steady_excess_gas,
    amm_sufficient_condition,
    convergence_gap,
    lemma2_coeffs,
    theorem1_upper_bound,
    time_average,
)
from .chaindata import (
    BatchSummary,
    BlockRecord,
    ColumnMap,
    ComparisonReport,
    batch_averages,
    bound_comparison,
    ingest_csv,
)
from .core import (
    DEFAULT_FEE_FLOOR,
    DistKind,
    FeeState,
    MarketParams,
    MechanismSpec,
    PropernessReport,
    Rule,
    Trajectory,
    ValuationDist,
    check_properness,
    step,
)
from .demand import (
    ArrivalKind,
    BlockDraw,
    DemandMode,
    MEAN_FIELD,
    Mode,
    market_clearing_price,
    mean_field_block_size,
    stochastic_block_size,
    survival,
)
from .engine import RunAverages, SimConfig, make_rng, run, run_average
from .errors import (
    ConfigError,
    DomainError,
    EmptyWindow,
    FeeMarketError,
    InvalidBlockSize,
    InvariantError,
    MissingValuations,
    NoClearingPrice,
    ParseError,
    UnsupportedRule,
)
from .mechanisms import (
    step_amm,
    step_egpcure,
    step_eip1559,
    step_exp1559,
    step_twel,
    step_wel,
)
from .sweep import (
    SweepDataset,
    SweepParameter,
    SweepSpec,
    run_sweep,
    write_attractors_csv,
    write_averages_csv,
)

__version__ = "0.1.0"
