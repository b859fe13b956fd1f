"""Per-junction signal policies.

The backpressure family picks the split plan that maximizes "pressure
relief": per-movement service capacity weighted by the upstream-minus-
downstream queue difference. For the linear flow model that objective is
linear in the split, so the optimum has a closed form:

* unconstrained bounds (0, 1): all green to the single phase with the
  largest per-unit-green pressure relief;
* general bounds: phases sorted by descending pressure relief, each greedily
  filled to its maximum while reserving the minimums still owed to the rest.

A grid-search solver over the split lattice acts as the oracle for both and
as the only solver for nonlinear flow models. Fixed-time and queue-
proportional policies are the comparison baselines.

Policies are pure functions of a LocalObservation, so junctions can be
evaluated concurrently and in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol

import numpy as np

from .errors import ContractViolation
from .flow import FlowEvaluator, FlowTable, xi
from .lattice import simplex_lattice
from .network import (
    Junction,
    LinkId,
    Movement,
    PhaseId,
    SplitPlan,
    StateId,
    project_box_simplex,
    waterfill_split,
)

GRID_MAX_PHASES = 6


@dataclass(frozen=True)
class LocalObservation:
    """Everything a junction controller may look at: its own id, its traffic
    state, the queue lengths of the links its movements touch (sinks report
    0), and the slot index."""

    junction: int
    state: StateId
    queues: Mapping[LinkId, float]
    slot: int = 0

    def queue(self, a: LinkId) -> float:
        try:
            return self.queues[a]
        except KeyError:
            raise ContractViolation(f"observation has no queue for link {a}") from None


@dataclass(frozen=True)
class MovementWeight:
    movement: Movement
    weight: float


@dataclass(frozen=True)
class PhasePressure:
    phase: PhaseId
    pr: float


def weight(q_from: float, q_to: float) -> float:
    """Backpressure weight of a movement: upstream queue minus downstream
    queue. May be negative."""
    return q_from - q_to


def movement_weights(junction: Junction, obs: LocalObservation) -> list[MovementWeight]:
    return [
        MovementWeight(m, weight(obs.queue(m.from_link), obs.queue(m.to_link)))
        for m in junction.movements()
    ]


def phase_pressures(
    junction: Junction,
    ft: FlowTable,
    obs: LocalObservation,
    demand_limited: bool = False,
) -> list[PhasePressure]:
    """Per-unit-green pressure relief of each phase: the weight-rate product
    summed over the phase's movements.

    With ``demand_limited`` the saturation rate of each movement is capped by
    its upstream queue, a variant for networks where saturation capacity far
    exceeds what short queues can supply. Off by default: the plant applies
    the availability limit, the controller optimizes saturation flow.
    """
    out: list[PhasePressure] = []
    for phase in junction.phases:
        pr = 0.0
        for m in phase.movements:
            rate = ft.rate(junction.id, obs.state, phase.id, m)
            if demand_limited:
                rate = min(rate, obs.queue(m.from_link))
            pr += weight(obs.queue(m.from_link), obs.queue(m.to_link)) * rate
        out.append(PhasePressure(phase.id, pr))
    return out


def pressure_relief(
    junction: Junction, ft: FlowTable, obs: LocalObservation, s: SplitPlan
) -> float:
    """Pressure relief of a split plan: weight-capacity product summed over
    the junction's movements. Linear in ``s`` for the linear flow model."""
    total = 0.0
    for m in junction.movements():
        w = weight(obs.queue(m.from_link), obs.queue(m.to_link))
        total += w * xi(ft, junction, s, obs.state, m)
    return total


def pressure_relief_general(
    junction: Junction, evaluate: FlowEvaluator, obs: LocalObservation, s: SplitPlan
) -> float:
    """Pressure relief under an arbitrary flow evaluator."""
    rates = evaluate(junction, s, obs.state)
    total = 0.0
    for m, rate in rates.items():
        total += weight(obs.queue(m.from_link), obs.queue(m.to_link)) * rate
    return total


def _pressure_order(pressures: list[PhasePressure]) -> list[int]:
    # descending pressure relief, ties broken by ascending phase id
    return sorted(range(len(pressures)), key=lambda p: (-pressures[p].pr, p))


def solve_split_ubp(
    junction: Junction, ft: FlowTable, obs: LocalObservation, demand_limited: bool = False
) -> SplitPlan:
    """Exact pressure-relief maximizer for trivial green bounds (0, 1): all
    green to the phase with maximal per-unit-green pressure relief, ties to
    the lowest phase id."""
    for phase in junction.phases:
        if phase.t_min != 0.0 or phase.t_max != 1.0:
            raise ContractViolation(
                f"junction {junction.id} has non-trivial green bounds; use the constrained solver"
            )
    pressures = phase_pressures(junction, ft, obs, demand_limited)
    best = _pressure_order(pressures)[0]
    fractions = [0.0] * len(junction.phases)
    fractions[best] = 1.0
    return SplitPlan(junction.id, tuple(fractions))


def solve_split_cbp(
    junction: Junction, ft: FlowTable, obs: LocalObservation, demand_limited: bool = False
) -> SplitPlan:
    """Exact pressure-relief maximizer under general green bounds.

    Greedy fill in descending pressure order: each phase receives
    min(t_max, 1 - already allocated - minimums still owed to later phases).
    Exact because the objective is linear over the box-constrained simplex.
    Requires sum t_min <= 1 <= sum t_max.
    """
    s_min = junction.sum_t_min()
    s_max = junction.sum_t_max()
    if s_min > 1.0 + 1e-12 or s_max < 1.0 - 1e-12:
        raise ContractViolation(
            f"junction {junction.id}: infeasible green bounds "
            f"(sum t_min = {s_min:.6g}, sum t_max = {s_max:.6g})"
        )
    pressures = phase_pressures(junction, ft, obs, demand_limited)
    order = _pressure_order(pressures)
    fractions = [0.0] * len(junction.phases)
    allocated = 0.0
    remaining_min = sum(junction.phases[p].t_min for p in order)
    for p in order:
        phase = junction.phases[p]
        remaining_min -= phase.t_min
        share = min(phase.t_max, 1.0 - allocated - remaining_min)
        fractions[p] = share
        allocated += share
    if abs(allocated - 1.0) > 1e-9:
        raise ContractViolation(
            f"junction {junction.id}: greedy split sums to {allocated!r}, bounds inconsistent"
        )
    return SplitPlan(junction.id, tuple(fractions))


def solve_split_grid(
    junction: Junction,
    flow: FlowTable | FlowEvaluator,
    obs: LocalObservation,
    step: float,
) -> SplitPlan:
    """Pressure-relief maximizer by exhaustive enumeration of the split
    lattice at resolution ``step``.

    Works with any flow model; for a FlowTable the evaluation vectorizes to a
    dot product with the per-phase pressures. Ties go to the lexicographically
    smallest fraction vector. Guarded to at most ``GRID_MAX_PHASES`` phases.
    """
    if len(junction.phases) > GRID_MAX_PHASES:
        raise ContractViolation(
            f"grid search limited to {GRID_MAX_PHASES} phases; junction {junction.id} "
            f"has {len(junction.phases)}"
        )
    points = simplex_lattice(junction, step)
    if isinstance(flow, FlowTable):
        pp = np.array([p.pr for p in phase_pressures(junction, flow, obs)])
        scores = points @ pp
        best = int(np.argmax(scores))  # first max = lexicographically smallest
    else:
        best = 0
        best_score = -np.inf
        for idx in range(points.shape[0]):
            s = SplitPlan(junction.id, tuple(points[idx]))
            score = pressure_relief_general(junction, flow, obs, s)
            if score > best_score:
                best, best_score = idx, score
    return SplitPlan(junction.id, tuple(points[best]))


class Policy(Protocol):
    """A named decision rule mapping a LocalObservation to a valid split."""

    name: str

    def __call__(self, obs: LocalObservation) -> SplitPlan: ...


@dataclass(frozen=True)
class BackpressurePolicy:
    """UBP/CBP: per-slot pressure-relief maximization."""

    junction: Junction
    table: FlowTable
    constrained: bool = True
    demand_limited: bool = False
    name: str = "cbp"

    def __call__(self, obs: LocalObservation) -> SplitPlan:
        if self.constrained:
            return solve_split_cbp(self.junction, self.table, obs, self.demand_limited)
        return solve_split_ubp(self.junction, self.table, obs, self.demand_limited)


@dataclass(frozen=True)
class GridPolicy:
    """Backpressure via lattice enumeration; the slow-but-general solver."""

    junction: Junction
    table: FlowTable
    step: float
    name: str = "grid"

    def __call__(self, obs: LocalObservation) -> SplitPlan:
        return solve_split_grid(self.junction, self.table, obs, self.step)


@dataclass(frozen=True)
class FixedTimePolicy:
    """Returns the same split every slot, regardless of traffic."""

    junction: Junction
    split: SplitPlan
    name: str = "fixed"

    def __call__(self, obs: LocalObservation) -> SplitPlan:
        return self.split


@dataclass(frozen=True)
class ProportionalPolicy:
    """Green proportional to the total upstream queue of each phase, clipped
    and water-filled onto the feasible box-simplex. With no queued traffic it
    degenerates to the uniform water-filling split."""

    junction: Junction
    name: str = "proportional"

    def __call__(self, obs: LocalObservation) -> SplitPlan:
        raw = [
            sum(obs.queue(m.from_link) for m in phase.movements)
            for phase in self.junction.phases
        ]
        total = sum(raw)
        if total <= 0.0:
            return waterfill_split(self.junction)
        targets = [w / total for w in raw]
        return project_box_simplex(self.junction, targets)


def baseline_fixed_time(junction: Junction, schedule: SplitPlan, name: str = "fixed") -> Policy:
    return FixedTimePolicy(junction, schedule, name)


def baseline_proportional(junction: Junction) -> Policy:
    return ProportionalPolicy(junction)


def make_policy(
    spec: str,
    junction: Junction,
    ft: FlowTable,
    named_splits: Mapping[str, Mapping[int, SplitPlan]] | None = None,
) -> Policy:
    """Build a policy from its scenario name.

    Recognized names: ``ubp``, ``cbp``, ``grid:<step>``, ``fixed:<split-name>``,
    ``proportional``.
    """
    named_splits = named_splits or {}
    if spec == "ubp":
        for phase in junction.phases:
            if phase.t_min != 0.0 or phase.t_max != 1.0:
                raise ContractViolation(
                    f"policy 'ubp' requires bounds (0, 1) on every phase of junction {junction.id}"
                )
        return BackpressurePolicy(junction, ft, constrained=False, name="ubp")
    if spec == "cbp":
        return BackpressurePolicy(junction, ft, constrained=True, name="cbp")
    if spec == "proportional":
        return ProportionalPolicy(junction)
    if spec.startswith("grid:"):
        try:
            step = float(spec.split(":", 1)[1])
        except ValueError:
            raise ContractViolation(f"bad grid step in policy name {spec!r}") from None
        return GridPolicy(junction, ft, step, name=spec)
    if spec.startswith("fixed:"):
        split_name = spec.split(":", 1)[1]
        by_junction = named_splits.get(split_name)
        if by_junction is None or junction.id not in by_junction:
            raise ContractViolation(
                f"no named split {split_name!r} for junction {junction.id}"
            )
        return FixedTimePolicy(junction, by_junction[junction.id], name=spec)
    raise ContractViolation(f"unknown policy name {spec!r}")
