"""Fair and system-optimal single-machine scheduling."""
from .adjust import (
    Adjustment,
    SawtoothCurve,
    adjusted_instance,
    area_schedule,
    budget_adjust,
    single_agent_curve,
    water_level,
)
from .bilevel import TargetSpec, enforce_nonneg, enforce_signed, ratio_dp, verify_target
from .core import (
    AreaParam,
    ContractViolation,
    Infeasible,
    Instance,
    InvalidSchedule,
    Job,
    Linear,
    PiecewiseLinear,
    Schedule,
    SchedulingError,
    SizeLimitExceeded,
    SolveReport,
    UnsupportedVariant,
    due_date_for,
    eval_utility,
    evaluate_schedule,
    inverse_utility,
    normalize_and_ranges,
)
from .duedates import LateReport, bounded_late_maxmin, moore_hodgson
from .maxmin import (
    BinarySearchConfig,
    binary_search_maxmin,
    binary_search_solve,
    edd_feasibility,
    greedy_order,
    max_min_greedy,
    system_optimal_linear,
)
from .oracle import OracleConfig, brute_force, brute_force_discard, brute_force_resched
from .release import dp_single_release, equal_time_feasible, equal_time_maxmin, unit_time_solve
from .resched import ReschedProblem, disruption, resched_lexicographic, resched_solve

__version__ = "0.1.0"
