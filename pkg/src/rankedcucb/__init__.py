"""Online effort allocation with ranked group prioritization."""

from .errors import ConfigurationError, GenerationError, InstanceFormatError
from .model import (
    EffortVector,
    GroupBenefit,
    ProblemInstance,
    gamma,
    group_benefit,
    kendall_tau,
    mu_at,
    objective_value,
    prioritization_metric,
    rank_coefficients,
    validate_effort,
)
from .oracle import Allocation, solve_brute, solve_dp
from .policies import (
    POLICY_KINDS,
    ArmStats,
    Lizard,
    NaiveRank,
    OptimalPolicy,
    RandomPolicy,
    RankedCUCB,
    confidence_radius,
    lipschitz_ucb,
    make_policy,
    self_ucb,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    ParetoPoint,
    RunRecord,
    StreamKey,
    average_regret,
    coverage_violation_rate,
    pareto_sweep,
    run,
    smooth,
    write_final,
    write_pareto,
    write_timeseries,
)
from .sim import (
    RewardModel,
    generate_instance,
    load_instance,
    reward_model_violations,
    sample_observations,
    save_instance,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ArmStats",
    "ConfigurationError",
    "EffortVector",
    "ExperimentConfig",
    "ExperimentResult",
    "GenerationError",
    "GroupBenefit",
    "InstanceFormatError",
    "Lizard",
    "NaiveRank",
    "OptimalPolicy",
    "ParetoPoint",
    "POLICY_KINDS",
    "ProblemInstance",
    "RandomPolicy",
    "RankedCUCB",
    "RewardModel",
    "RunRecord",
    "StreamKey",
    "average_regret",
    "confidence_radius",
    "coverage_violation_rate",
    "gamma",
    "generate_instance",
    "group_benefit",
    "kendall_tau",
    "lipschitz_ucb",
    "load_instance",
    "make_policy",
    "mu_at",
    "objective_value",
    "pareto_sweep",
    "prioritization_metric",
    "rank_coefficients",
    "reward_model_violations",
    "run",
    "sample_observations",
    "save_instance",
    "self_ucb",
    "smooth",
    "solve_brute",
    "solve_dp",
    "validate_effort",
    "write_final",
    "write_pareto",
    "write_timeseries",
]
