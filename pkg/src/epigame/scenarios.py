"""Scenario configuration and the built-in presets.

A scenario bundles the model parameters, the lockdown policy (one allowed
degree per behavior class and zone, overshooting fined at a multiple of
the benefit), the initial population, and run controls. Presets cover a
single-zone epidemic under myopic and farsighted agents, lockdown-level
sweeps of those, and a two-zone setup with asymmetric lockdowns where
migration dynamics emerge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import (
    NUM_CLASSES,
    NUM_STATES,
    BehaviorClass,
    InfectionState,
    ModelParams,
    Policy,
    SocialState,
    StateDistribution,
    ValidationError,
    action_degrees,
    uniform_no_move_policy,
    validate_params,
)
from .decision import HEALTHY_Q_MODES
from .rewards import RewardConfig, linear_benefit, lockdown_cost

DEFAULT_HORIZON = 300
EXTINCTION_THRESHOLD = 1e-6
POLICY_SETTLE_THRESHOLD = 1e-6

# Shared by all presets; fictitious activity and the healthy-class Q mode
# are the two calibration knobs (see README reproduction notes).
PRESET_EPSILON = 0.1
PRESET_HEALTHY_Q = "assume_susceptible"
PRESET_HORIZON = 2000  # generous cap; runs stop at epidemic extinction


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Everything needed to reproduce one simulation run."""

    name: str
    params: ModelParams
    lockdown_degrees: np.ndarray  # (3, Z) allowed degree per behavior class
    initial_dist: np.ndarray  # (5, Z)
    lockdown_multiplier: float = 3.0
    benefit: np.ndarray | None = None  # None selects the linear benefit
    horizon: int = DEFAULT_HORIZON
    extinction_threshold: float = EXTINCTION_THRESHOLD
    policy_settle_threshold: float = POLICY_SETTLE_THRESHOLD
    infected_forced_home: bool = True
    healthy_q: str = "belief"
    subtract_initial_immune: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("scenario name must be nonempty")
        validate_params(self.params)
        ld = np.array(self.lockdown_degrees, dtype=int)
        ld.setflags(write=False)
        object.__setattr__(self, "lockdown_degrees", ld)
        init = np.array(self.initial_dist, dtype=float)
        init.setflags(write=False)
        object.__setattr__(self, "initial_dist", init)
        if self.benefit is not None:
            o = np.array(self.benefit, dtype=float)
            o.setflags(write=False)
            object.__setattr__(self, "benefit", o)
        if self.horizon < 1:
            raise ValidationError(f"horizon must be >= 1; got {self.horizon}")
        if self.extinction_threshold <= 0.0:
            raise ValidationError("extinction_threshold must be positive")
        if self.policy_settle_threshold <= 0.0:
            raise ValidationError("policy_settle_threshold must be positive")
        if self.healthy_q not in HEALTHY_Q_MODES:
            raise ValidationError(
                f"healthy_q must be one of {HEALTHY_Q_MODES}; got {self.healthy_q!r}"
            )
        # Fail fast on inconsistent tables.
        self.reward_config()
        StateDistribution(self.initial_dist)

    def reward_config(self) -> RewardConfig:
        o = self.benefit if self.benefit is not None else linear_benefit(self.params.a_max)
        cost = lockdown_cost(self.lockdown_degrees, o, self.lockdown_multiplier)
        return RewardConfig(
            benefit=o,
            activation_cost=cost,
            migration_cost=self.params.migration_cost,
            illness_cost=self.params.illness_cost,
            lockdown_degrees=self.lockdown_degrees,
        )

    def initial_social(self) -> SocialState:
        """Uniform stay-home policy over degrees plus the initial distribution.

        With ``infected_forced_home`` the symptomatic row is projected onto
        degree 0 so every policy the scenario produces respects the support
        restriction, including the initial one.
        """
        policy = uniform_no_move_policy(self.params)
        if self.infected_forced_home:
            rows = np.array(policy.class_rows)
            keep = action_degrees(self.params.a_max, self.params.num_zones) == 0
            srow = rows[BehaviorClass.SYMPTOMATIC] * keep
            rows[BehaviorClass.SYMPTOMATIC] = srow / srow.sum(axis=-1, keepdims=True)
            policy = Policy(rows, self.params.a_max)
        return SocialState(policy, StateDistribution(self.initial_dist))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": {f.name: getattr(self.params, f.name) for f in fields(ModelParams)},
            "lockdown_degrees": {
                cls.name.lower(): [int(x) for x in self.lockdown_degrees[cls]]
                for cls in BehaviorClass
            },
            "lockdown_multiplier": self.lockdown_multiplier,
            "benefit": "linear" if self.benefit is None else [float(x) for x in self.benefit],
            "initial_dist": {
                s.name: [float(x) for x in self.initial_dist[s]] for s in InfectionState
            },
            "horizon": self.horizon,
            "extinction_threshold": self.extinction_threshold,
            "policy_settle_threshold": self.policy_settle_threshold,
            "infected_forced_home": self.infected_forced_home,
            "healthy_q": self.healthy_q,
            "subtract_initial_immune": self.subtract_initial_immune,
        }


_SCENARIO_KEYS = {
    "name",
    "params",
    "lockdown_degrees",
    "lockdown_multiplier",
    "benefit",
    "initial_dist",
    "horizon",
    "extinction_threshold",
    "policy_settle_threshold",
    "infected_forced_home",
    "healthy_q",
    "subtract_initial_immune",
}


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Inverse of :meth:`ScenarioConfig.to_dict`; rejects unknown keys."""
    if not isinstance(data, dict):
        raise ValidationError("scenario document must be a key-value mapping")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ValidationError(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("name", "params", "lockdown_degrees", "initial_dist"):
        if key not in data:
            raise ValidationError(f"scenario document is missing required key {key!r}")
    param_names = {f.name for f in fields(ModelParams)}
    raw_params = data["params"]
    if not isinstance(raw_params, dict) or set(raw_params) != param_names:
        raise ValidationError(
            f"params must define exactly the fields {sorted(param_names)}"
        )
    params = ModelParams(**raw_params)

    ld_doc = data["lockdown_degrees"]
    try:
        lockdown = np.array(
            [ld_doc[cls.name.lower()] for cls in BehaviorClass], dtype=int
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad lockdown_degrees table: {exc}") from exc

    init_doc = data["initial_dist"]
    try:
        init = np.array([init_doc[s.name] for s in InfectionState], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad initial_dist table: {exc}") from exc

    benefit = data.get("benefit", "linear")
    benefit_arr = None if benefit == "linear" else np.array(benefit, dtype=float)

    kwargs = {
        key: data[key]
        for key in (
            "lockdown_multiplier",
            "horizon",
            "extinction_threshold",
            "policy_settle_threshold",
            "infected_forced_home",
            "healthy_q",
            "subtract_initial_immune",
        )
        if key in data
    }
    return ScenarioConfig(
        name=data["name"],
        params=params,
        lockdown_degrees=lockdown,
        initial_dist=init,
        benefit=benefit_arr,
        **kwargs,
    )


# --- presets ---------------------------------------------------------------


def _base_params(
    *,
    num_zones: int,
    alpha: float,
    delta_U_R: float,
    inertia: float,
    epsilon: float = PRESET_EPSILON,
) -> ModelParams:
    return ModelParams(
        beta_A=0.2,
        beta_I=0.2,
        delta_A_I=0.08,
        delta_A_U=0.08,
        delta_I_R=0.04,
        delta_U_R=delta_U_R,
        epsilon=epsilon,
        num_zones=num_zones,
        a_max=6,
        alpha=alpha,
        rationality=10.0,
        inertia=inertia,
        migration_cost=2.0,
        illness_cost=10.0,
    )


def _single_zone_dist() -> np.ndarray:
    init = np.zeros((NUM_STATES, 1))
    init[InfectionState.S, 0] = 0.97
    init[InfectionState.A, 0] = 0.02
    init[InfectionState.I, 0] = 0.01
    return init


def _single_zone(
    name: str,
    *,
    alpha: float,
    a_lock: int,
    exempt_recovered: bool,
    delta_U_R: float = 0.0,
) -> ScenarioConfig:
    params = _base_params(num_zones=1, alpha=alpha, delta_U_R=delta_U_R, inertia=0.2)
    recovered_lock = params.a_max if exempt_recovered else a_lock
    lockdown = np.array([[a_lock], [a_lock], [recovered_lock]])
    return ScenarioConfig(
        name=name,
        params=params,
        lockdown_degrees=lockdown,
        initial_dist=_single_zone_dist(),
        horizon=PRESET_HORIZON,
        healthy_q=PRESET_HEALTHY_Q,
    )


def _fig2a() -> ScenarioConfig:
    return _single_zone("fig2a", alpha=0.0, a_lock=2, exempt_recovered=False)


def _fig2b() -> ScenarioConfig:
    return _single_zone("fig2b", alpha=0.9, a_lock=2, exempt_recovered=False)


def _fig2c() -> ScenarioConfig:
    return _single_zone("fig2c", alpha=0.9, a_lock=2, exempt_recovered=True)


def _fig4_migration() -> ScenarioConfig:
    params = _base_params(num_zones=2, alpha=0.9, delta_U_R=0.01, inertia=0.1)
    lockdown = np.array([[4, 2], [4, 2], [6, 6]])
    init = np.zeros((NUM_STATES, 2))
    init[InfectionState.S] = (0.873, 0.1)
    init[InfectionState.A] = (0.018, 0.0)
    init[InfectionState.I] = (0.009, 0.0)
    return ScenarioConfig(
        name="fig4_migration",
        params=params,
        lockdown_degrees=lockdown,
        initial_dist=init,
        horizon=PRESET_HORIZON,
        healthy_q=PRESET_HEALTHY_Q,
    )


#: The four lockdown-sweep families: (name, alpha, recovered exempt, delta_U_R).
FIG3_FAMILIES = (
    ("myopic-full", 0.0, False, 0.0),
    ("farsighted-full", 0.9, False, 0.0),
    ("farsighted-exempt", 0.9, True, 0.0),
    ("farsighted-exempt-serology", 0.9, True, 0.05),
)


def fig3_points() -> list[tuple[dict, ScenarioConfig]]:
    """All 28 lockdown-sweep runs with their identifying fields."""
    points = []
    for family, alpha, exempt, d_ur in FIG3_FAMILIES:
        for a_lock in range(7):
            cfg = _single_zone(
                f"fig3-{family}-lock{a_lock}",
                alpha=alpha,
                a_lock=a_lock,
                exempt_recovered=exempt,
                delta_U_R=d_ur,
            )
            points.append(({"family": family, "a_lock": a_lock}, cfg))
    return points


_PRESETS = {
    "fig2a": (_fig2a, "single zone, myopic agents, lockdown degree 2 for everyone"),
    "fig2b": (_fig2b, "single zone, farsighted agents, lockdown degree 2 for everyone"),
    "fig2c": (_fig2c, "single zone, farsighted agents, recovered exempt from lockdown"),
    "fig3_sweep": (
        lambda: [cfg for _, cfg in fig3_points()],
        "28 runs: four scenario families swept over lockdown degrees 0..6",
    ),
    "fig4_migration": (
        _fig4_migration,
        "two zones with asymmetric lockdowns; strategic migration and second wave",
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str):
    """Named scenario; ``fig3_sweep`` yields a list of configurations."""
    try:
        builder, _ = _PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    return builder()


def preset_description(name: str) -> str:
    try:
        return _PRESETS[name][1]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None


# --- sweeps ----------------------------------------------------------------

_TOP_LEVEL_SWEEPABLE = {
    "horizon",
    "lockdown_multiplier",
    "extinction_threshold",
    "policy_settle_threshold",
    "infected_forced_home",
    "healthy_q",
    "subtract_initial_immune",
}


def _override(cfg: ScenarioConfig, path: str, value) -> ScenarioConfig:
    if path.startswith("params."):
        field = path[len("params.") :]
        if field not in {f.name for f in fields(ModelParams)}:
            raise ValidationError(f"unknown model parameter in sweep path {path!r}")
        return replace(cfg, params=replace(cfg.params, **{field: value}))
    if path.startswith("lockdown."):
        key = path[len("lockdown.") :]
        ld = np.array(cfg.lockdown_degrees)
        if key == "all":
            ld[:] = value
        elif key.upper() in BehaviorClass.__members__:
            ld[BehaviorClass[key.upper()]] = value
        else:
            raise ValidationError(
                f"unknown behavior class in sweep path {path!r}; "
                "use healthy, symptomatic, recovered or all"
            )
        return replace(cfg, lockdown_degrees=ld)
    if path in _TOP_LEVEL_SWEEPABLE:
        return replace(cfg, **{path: value})
    raise ValidationError(f"unknown sweep field path {path!r}")


def sweep(grid, base: ScenarioConfig) -> list[ScenarioConfig]:
    """Cartesian product of field overrides applied to ``base``.

    ``grid`` is a sequence of ``(field_path, values)`` pairs; paths address
    model parameters (``params.alpha``), lockdown rows
    (``lockdown.healthy``) or plain scenario fields (``horizon``). An empty
    grid yields just the base configuration.
    """
    grid = list(grid)
    if not grid:
        return [base]
    paths = [path for path, _ in grid]
    value_lists = [list(values) for _, values in grid]
    out = []
    for combo in itertools.product(*value_lists):
        cfg = base
        for path, value in zip(paths, combo):
            cfg = _override(cfg, path, value)
        label = ",".join(f"{path}={value}" for path, value in zip(paths, combo))
        out.append(replace(cfg, name=f"{base.name}[{label}]"))
    return out
