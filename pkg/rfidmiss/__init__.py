__version__ = "0.1.0"

from .utils import (
    UNDEFINED,
    DegenerateWindowError,
    EstimationError,
    InvalidConfigError,
    MarginTruncatedWarning,
    OracleRangeError,
    is_undefined,
)
from .tallies import (
    MultiplicityVector,
    NormalizedMultiplicityVector,
    SchnabelTallies,
    Tally,
)
from .estimators import (
    expected_multiplicity,
    expected_multiplicity_coefficient,
    general_n,
    lemma1_bias,
    lemma1_expected_p,
    lincoln_petersen_n,
    p_missing,
    required_sessions,
    schnabel_n,
    schnabel_p,
    true_p_missing_curve,
    two_session_n,
    two_session_p,
)
from .windows import (
    WindowPair,
    ratio_solve_p,
    regm_windows,
    rme_windows,
    tail_windows,
)
from .history import ReadHistory, tally, tally_reads
from .simulation import (
    CorrelatedSessions,
    CorrelationParams,
    IndependentSessions,
    PopulationParams,
    SessionSource,
    derive_correlation,
    make_source,
    simulate_correlated,
    simulate_independent,
)
from .report import EstimateReport, Estimator, estimate
from .controller import SessionLog, StopPolicy, run_sequential, should_continue
from .oracle import (
    enumerate_outcomes,
    exact_expected_n,
    exact_expected_p,
    lemma_sweep,
    monte_carlo_expected_p,
)
from .config import ExperimentConfig, resolve_config
