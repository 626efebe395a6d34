"""Stationary equilibria: closed-form construction and numerical checking.

Once nobody is infected, only the activation rewards matter. Every zone
then has a best achievable activation reward per state; a zone is worth
leaving when the shortfall against the best zone exceeds what the
migration cost amounts to as a perpetuity, ``(1 - alpha) / alpha *
migration_cost``. Placing all mass on S and R in zones not worth leaving,
activating on the dominant degrees, and migrating only out of zones worth
leaving yields a stationary equilibrium; ``check_equilibrium`` verifies
the two defining conditions numerically for any social state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CLASS_OF_STATE,
    NUM_CLASSES,
    NUM_STATES,
    PROB_TOL,
    BehaviorClass,
    InfectionState,
    ModelParams,
    Policy,
    SocialState,
    StateDistribution,
    ValidationError,
    flatten_action,
    validate_params,
)
from .decision import TIE_TOL, feasible_actions, q_function, value_function
from .epidemic import transition_matrix
from .rewards import RewardConfig, expected_reward

# Representative infection state of each behavior class (cost tables of the
# healthy states are identical by the RewardConfig invariant).
_CLASS_STATE = {
    BehaviorClass.HEALTHY: InfectionState.S,
    BehaviorClass.SYMPTOMATIC: InfectionState.I,
    BehaviorClass.RECOVERED: InfectionState.R,
}


@dataclass(frozen=True, eq=False)
class ZoneClassification:
    """Per-state activation optima and the induced partition of zones."""

    activation_value: np.ndarray  # (5, Z) best achievable activation reward
    best_degrees: tuple[tuple[tuple[int, ...], ...], ...]  # [s][z] -> tied degrees
    best_value: np.ndarray  # (5,) best activation reward over zones
    best_zones: tuple[tuple[int, ...], ...]  # [s] -> zones achieving it
    leave_zones: tuple[tuple[int, ...], ...]  # [s] -> zones worth leaving
    neutral_zones: tuple[tuple[int, ...], ...]  # [s] -> remaining zones

    @property
    def num_zones(self) -> int:
        return self.activation_value.shape[1]


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    """Numerical slack of the two stationary-equilibrium conditions."""

    se1_gap: float  # best achievable one-day deviation gain, occupied states
    se1_gap_unoccupied: float  # same over zero-mass states (informational)
    se2_gap: float  # sup-norm distance of the distribution from stationarity
    tol: float
    verdict: bool
    gaps: np.ndarray  # (5, Z) per-state deviation gains
    occupied: np.ndarray  # (5, Z) boolean mask of states carrying mass


def _split_zones(
    values: np.ndarray, alpha: float, migration_cost: float, tie_tol: float
) -> tuple[float, tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Partition zones by one state's activation values."""
    best = float(values.max())
    best_zones = tuple(int(z) for z in np.flatnonzero(values >= best - tie_tol))
    threshold = math.inf if alpha == 0.0 else (1.0 - alpha) / alpha * migration_cost
    leave = tuple(
        int(z)
        for z in range(values.size)
        if z not in best_zones and best - values[z] > threshold
    )
    neutral = tuple(z for z in range(values.size) if z not in best_zones and z not in leave)
    return best, best_zones, leave, neutral


def classify_zones(
    cfg: RewardConfig, p: ModelParams, tie_tol: float = TIE_TOL
) -> ZoneClassification:
    """Activation optima per (state, zone) and the zone partition per state.

    A zone lands in ``leave_zones[s]`` when the best zone's activation
    reward exceeds the zone's own by strictly more than
    ``(1 - alpha) / alpha * migration_cost``; with ``alpha = 0`` no zone is
    ever worth leaving.
    """
    validate_params(p)
    if cfg.migration_cost < 0.0:
        raise ValidationError(f"migration_cost must be >= 0; got {cfg.migration_cost}")
    net = cfg.benefit[None, None, :] - cfg.activation_cost  # (5, Z, a_max+1)
    act_value = net.max(axis=2)
    best_degrees = tuple(
        tuple(
            tuple(int(a) for a in np.flatnonzero(net[s, z] >= act_value[s, z] - tie_tol))
            for z in range(cfg.num_zones)
        )
        for s in range(NUM_STATES)
    )
    best_value = np.empty(NUM_STATES)
    best_zones, leave, neutral = [], [], []
    for s in range(NUM_STATES):
        bv, bz, lv, nt = _split_zones(act_value[s], p.alpha, cfg.migration_cost, tie_tol)
        best_value[s] = bv
        best_zones.append(bz)
        leave.append(lv)
        neutral.append(nt)
    act_value.setflags(write=False)
    best_value.setflags(write=False)
    return ZoneClassification(
        activation_value=act_value,
        best_degrees=best_degrees,
        best_value=best_value,
        best_zones=tuple(best_zones),
        leave_zones=tuple(leave),
        neutral_zones=tuple(neutral),
    )


def dominant_activation(
    cfg: RewardConfig,
    z: int,
    s: InfectionState | int = InfectionState.R,
    tie_tol: float = TIE_TOL,
) -> tuple[int, ...]:
    """Degrees maximizing the activation reward for state ``s`` in zone ``z``."""
    if not 0 <= z < cfg.num_zones:
        raise ValidationError(f"zone {z} out of range for {cfg.num_zones} zones")
    net = cfg.benefit - cfg.activation_cost[int(s), z]
    return tuple(int(a) for a in np.flatnonzero(net >= net.max() - tie_tol))


def construct_equilibrium(
    cfg: RewardConfig,
    p: ModelParams,
    mass_split: np.ndarray,
    *,
    infected_forced_home: bool = True,
    tie_tol: float = TIE_TOL,
) -> SocialState:
    """Build a stationary equilibrium carrying the requested mass.

    ``mass_split`` is a (5, Z) table of population mass. It may only load
    states S and R, and only in zones those states do not prefer to leave;
    anything else is rejected with the violated condition named. The
    returned policy activates uniformly over the tied dominant degrees,
    stays put outside leave zones, and migrates uniformly to the best
    zones from inside them.
    """
    validate_params(p)
    if cfg.num_zones != p.num_zones or cfg.a_max != p.a_max:
        raise ValidationError("reward config dimensions do not match the parameters")

    # Per-class activation optima; the symptomatic class may be support
    # restricted to degree 0.
    class_best_degrees: list[tuple[tuple[int, ...], ...]] = []
    class_leave: list[tuple[int, ...]] = []
    class_best_zones: list[tuple[int, ...]] = []
    for cls in BehaviorClass:
        state = _CLASS_STATE[cls]
        net = cfg.benefit[:, None] - cfg.activation_cost[state].T  # (a_max+1, Z)
        if cls == BehaviorClass.SYMPTOMATIC and infected_forced_home:
            net = net[:1]  # only degree 0 is available
        values = net.max(axis=0)
        class_best_degrees.append(
            tuple(
                tuple(int(a) for a in np.flatnonzero(net[:, z] >= values[z] - tie_tol))
                for z in range(p.num_zones)
            )
        )
        _, bz, lv, _ = _split_zones(values, p.alpha, cfg.migration_cost, tie_tol)
        class_best_zones.append(bz)
        class_leave.append(lv)

    split = np.array(mass_split, dtype=float)
    if split.shape != (NUM_STATES, p.num_zones):
        raise ValidationError(
            f"mass split must have shape (5, {p.num_zones}); got {split.shape}"
        )
    for s in (InfectionState.A, InfectionState.I, InfectionState.U):
        if np.any(split[s] != 0.0):
            z = int(np.flatnonzero(split[s])[0])
            raise ValidationError(
                f"stationary equilibria carry no mass on state {s.name}: "
                f"condition d[{s.name}, z] = 0 violated in zone {z}"
            )
    for s, cls in ((InfectionState.S, BehaviorClass.HEALTHY), (InfectionState.R, BehaviorClass.RECOVERED)):
        for z in class_leave[cls]:
            if split[s, z] != 0.0:
                raise ValidationError(
                    f"condition 'd[{s.name}, z] = 0 for zones worth leaving' violated: "
                    f"zone {z} has mass {split[s, z]} but its activation shortfall "
                    f"exceeds the discounted migration cost"
                )

    rows = np.zeros((NUM_CLASSES, p.num_zones, p.num_actions))
    for cls in BehaviorClass:
        for z in range(p.num_zones):
            degrees = class_best_degrees[cls][z]
            targets = class_best_zones[cls] if z in class_leave[cls] else (z,)
            share = 1.0 / (len(degrees) * len(targets))
            for a in degrees:
                for t in targets:
                    rows[cls, z, flatten_action(a, t, p.a_max, p.num_zones)] = share
    return SocialState(Policy(rows, p.a_max), StateDistribution(split))


def check_equilibrium(
    social: SocialState,
    cfg: RewardConfig,
    p: ModelParams,
    tol: float = 1e-8,
    *,
    healthy_q: str = "belief",
    infected_forced_home: bool = True,
) -> EquilibriumReport:
    """Measure how far a social state is from a stationary equilibrium.

    The first condition (no profitable one-day deviation) is evaluated for
    every state but the verdict only counts states that carry mass, since
    zero-mass states never bind; their worst gap is reported separately.
    The second condition is stationarity of the distribution under one
    application of the kernel.
    """
    if tol <= 0.0:
        raise ValidationError(f"tolerance must be positive; got {tol}")
    validate_params(p)
    kernel = transition_matrix(social, p)
    rewards = expected_reward(social.policy, cfg)
    values = value_function(kernel, rewards, p)
    q = q_function(social, values, cfg, p)

    rows = social.policy.state_rows()  # (5, Z, J)
    averaged = np.einsum("szj,szj->sz", rows, q)
    feasible = feasible_actions(p, infected_forced_home)[CLASS_OF_STATE]  # (5, J)
    allowed = feasible[:, None, :] | (rows > 0.0)
    best = np.where(allowed, q, -np.inf).max(axis=2)
    gaps = best - averaged

    occupied = social.dist.d > 0.0
    se1 = float(gaps[occupied].max()) if occupied.any() else 0.0
    se1_un = float(gaps[~occupied].max()) if (~occupied).any() else 0.0
    se2 = float(np.abs(kernel.propagate(social.dist) - social.dist.d).max())
    gaps.setflags(write=False)
    occupied.setflags(write=False)
    return EquilibriumReport(
        se1_gap=se1,
        se1_gap_unoccupied=se1_un,
        se2_gap=se2,
        tol=tol,
        verdict=bool(se1 <= tol and se2 <= tol),
        gaps=gaps,
        occupied=occupied,
    )
