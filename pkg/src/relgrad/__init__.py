"""First-order optimization under relative gradient inexactness.

The toolkit runs inexact gradient descent and inexact fast gradient
descent against compression-based and adversarial oracles, and computes
their tight worst-case rates by building and solving the associated
performance-estimation semidefinite programs.
"""

from .oracle import (
    CompressedValue,
    InexactnessModel,
    OracleKind,
    RoundingMode,
    apply_inexactness,
    bit_cost,
    certified_delta,
    certified_delta_of,
    compress_array,
    compress_component,
    exhaustive_max_relative_error,
    paper_compression_delta,
    verify_relative_inexactness,
)
from .pep import (
    CvxpySolver,
    PepInstance,
    PepInvariantError,
    PepWitness,
    SolveReport,
    TAU_ZERO,
    build_pep,
    export_sdpa,
    extract_witness,
    rate_sweep,
    read_sdpa,
    solve_pep,
    to_sdpa,
    verify_witness,
)
from .problems import (
    Dataset,
    LogisticParams,
    LogisticProblem,
    QuadraticProblem,
    SmoothnessEstimate,
    accuracy,
    estimate_smoothness,
    load_dataset,
    logistic_gradient,
    logistic_loss,
    synthetic_dataset,
    train_test_split,
)
from .schedules import (
    SILVER_RATIO,
    ScheduleKind,
    StepSchedule,
    constant_schedule,
    dynamic_schedule,
    fgm_step_schedule,
    schedule_from_text,
    schedule_to_text,
    shorten,
    silver_schedule,
)
from .solvers import (
    RateEstimate,
    Trajectory,
    best_gradient_iterate,
    empirical_rate,
    export_trajectory_csv,
    reference_minimize,
    run_inexact_fgm,
    run_inexact_gd,
)

__version__ = "0.1.0"
