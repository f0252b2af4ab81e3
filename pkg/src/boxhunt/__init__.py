"""Non-coordinating parallel search for a treasure hidden in one of m ordered boxes."""

from .bounds import adversarial_bound, asymptotic_gap, gamma_product_check, memoryless_bound, uniform_bound
from .core import (
    Placement,
    ProblemInstance,
    SelectionSchedule,
    SpeedupReport,
    StrategyId,
    UNIFORM,
    build_schedule,
    validate_instance,
)
from .exact import (
    NonVisitMatrix,
    build_matrix,
    column_requirement_check,
    compare_to_bound,
    exact_report,
    expected_visit_time,
    theta,
)
from .montecarlo import SimConfig, crash_experiment, estimate_theta, inverse_stderr

__version__ = "0.1.0"
