"""Deterministic simulator for strategic activation and migration in a
multi-zone SAIRU epidemic.

Agents choose how much to go out (activation degree) and where to live
(zone) under lockdown rules, weighing infection risk against activity
benefits; the population distribution and the shared boundedly rational
policy evolve together, day by day, with no randomness anywhere.
"""

__version__ = "0.1.0"

from .core import (
    BehaviorClass,
    InfectionState,
    ModelParams,
    NumericsError,
    Policy,
    SocialState,
    StateDistribution,
    ValidationError,
    uniform_no_move_policy,
    validate_params,
)
from .decision import (
    best_response,
    feasible_actions,
    logit_choice,
    policy_update,
    q_function,
    value_function,
)
from .dynamics import (
    EpidemicMetrics,
    SimulationResult,
    Trajectory,
    detect_second_wave,
    infection_waves,
    metrics,
    simulate,
    step,
)
from .epidemic import (
    ActivityMasses,
    EncounterProbs,
    TransitionKernel,
    activity_masses,
    encounter_probs,
    infection_transition,
    state_transition,
    transition_matrix,
)
from .equilibrium import (
    EquilibriumReport,
    ZoneClassification,
    check_equilibrium,
    classify_zones,
    construct_equilibrium,
    dominant_activation,
)
from .rewards import (
    RewardConfig,
    expected_reward,
    immediate_reward,
    linear_benefit,
    lockdown_cost,
)
from .scenarios import (
    FIG3_FAMILIES,
    PRESET_NAMES,
    ScenarioConfig,
    fig3_points,
    preset,
    preset_description,
    scenario_from_dict,
    sweep,
)

__all__ = [
    "__version__",
    "ActivityMasses",
    "BehaviorClass",
    "EncounterProbs",
    "EpidemicMetrics",
    "EquilibriumReport",
    "InfectionState",
    "ModelParams",
    "NumericsError",
    "Policy",
    "PRESET_NAMES",
    "RewardConfig",
    "ScenarioConfig",
    "SimulationResult",
    "SocialState",
    "StateDistribution",
    "Trajectory",
    "TransitionKernel",
    "ValidationError",
    "ZoneClassification",
    "activity_masses",
    "best_response",
    "check_equilibrium",
    "classify_zones",
    "construct_equilibrium",
    "detect_second_wave",
    "dominant_activation",
    "encounter_probs",
    "expected_reward",
    "feasible_actions",
    "immediate_reward",
    "infection_transition",
    "infection_waves",
    "linear_benefit",
    "lockdown_cost",
    "logit_choice",
    "metrics",
    "policy_update",
    "preset",
    "preset_description",
    "q_function",
    "scenario_from_dict",
    "simulate",
    "state_transition",
    "step",
    "sweep",
    "fig3_points",
    "FIG3_FAMILIES",
    "transition_matrix",
    "uniform_no_move_policy",
    "validate_params",
    "value_function",
]
