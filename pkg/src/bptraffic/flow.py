"""Service-capacity model: how a split plan turns green time into flow.

The built-in model is linear: each (junction, state, phase, movement) has a
constant saturation rate alpha, and a movement's per-slot capacity is the
alpha-weighted sum of the green fractions of the phases containing it.
Nonlinear models plug in through the ``FlowEvaluator`` callable interface,
which maps (junction, split, state) to per-movement rates.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping

from .errors import ContractViolation
from .network import (
    Diagnostic,
    Junction,
    LinkId,
    Movement,
    RoadNetwork,
    SplitPlan,
    StateId,
)

#: per-movement service capacity for one slot, keyed by the network's movements
ServiceVector = dict[Movement, float]

#: pluggable flow model: (junction, split, state) -> movement -> rate
FlowEvaluator = Callable[[Junction, SplitPlan, StateId], Mapping[Movement, float]]


class FlowTable:
    """Saturation rates for the linear flow model.

    ``rates`` maps (junction id, state id, phase id) to a movement->rate
    mapping covering exactly that phase's movements. Missing entries are a
    validation error, never an implicit zero.
    """

    def __init__(self, rates: Mapping[tuple[int, int, int], Mapping[Movement, float]]):
        self._rates = {key: dict(val) for key, val in rates.items()}

    def rate(self, junction: int, state: int, phase: int, m: Movement) -> float:
        try:
            return self._rates[(junction, state, phase)][m]
        except KeyError:
            raise ContractViolation(
                f"no saturation rate for junction {junction}, state {state}, "
                f"phase {phase}, {m}"
            ) from None

    def entries(self) -> dict[tuple[int, int, int], dict[Movement, float]]:
        return {key: dict(val) for key, val in self._rates.items()}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FlowTable) and self._rates == other._rates


def validate_flow_table(net: RoadNetwork, ft: FlowTable) -> list[Diagnostic]:
    """Check that the table covers every (junction, state, phase, movement)
    exactly, with finite nonnegative rates."""
    out: list[Diagnostic] = []
    entries = ft.entries()
    expected: set[tuple[int, int, int]] = set()
    for junction in net.junctions:
        for z in junction.states:
            for phase in junction.phases:
                key = (junction.id, z, phase.id)
                expected.add(key)
                path = f"alpha[junction={junction.id}, state={z}, phase={phase.id}]"
                got = entries.get(key)
                if got is None:
                    out.append(Diagnostic("error", "ALPHA_MISSING", path, "no entries for this phase"))
                    continue
                for m in phase.movements:
                    if m not in got:
                        out.append(
                            Diagnostic("error", "ALPHA_MISSING", path, f"missing rate for {m}")
                        )
                for m, rate in got.items():
                    if not phase.contains(m):
                        out.append(
                            Diagnostic(
                                "error", "ALPHA_EXTRA", path, f"{m} is not a movement of this phase"
                            )
                        )
                    elif not math.isfinite(rate) or rate < 0:
                        out.append(
                            Diagnostic("error", "ALPHA_VALUE", path, f"rate {rate!r} for {m} invalid")
                        )
    for key in entries:
        if key not in expected:
            out.append(
                Diagnostic(
                    "error",
                    "ALPHA_EXTRA",
                    f"alpha[junction={key[0]}, state={key[1]}, phase={key[2]}]",
                    "entry does not match any (junction, state, phase) of the network",
                )
            )
    return out


def xi(ft: FlowTable, junction: Junction, s: SplitPlan, z: StateId, m: Movement) -> float:
    """Per-slot service capacity of movement ``m`` under split ``s`` in traffic
    state ``z``: the sum over phases containing ``m`` of rate * green fraction.

    Linear in ``s``; zero if the movement appears in no phase.
    """
    if z not in junction.states:
        raise ContractViolation(f"state {z} unknown at junction {junction.id}")
    if s.junction != junction.id or len(s.fractions) != len(junction.phases):
        raise ContractViolation(f"split does not match junction {junction.id}")
    if m not in junction.movements():
        raise ContractViolation(f"{m} is not a movement of junction {junction.id}")
    total = 0.0
    for phase in junction.phases:
        if phase.contains(m):
            total += ft.rate(junction.id, z, phase.id, m) * s.fractions[phase.id]
    return total


def linear_evaluator(ft: FlowTable) -> FlowEvaluator:
    """Wrap a FlowTable as a generic flow evaluator."""

    def evaluate(junction: Junction, s: SplitPlan, z: StateId) -> dict[Movement, float]:
        return {m: xi(ft, junction, s, z, m) for m in junction.movements()}

    return evaluate


def service_vector(
    ft: FlowTable,
    net: RoadNetwork,
    splits: Mapping[int, SplitPlan],
    states: Mapping[int, StateId],
) -> ServiceVector:
    """Componentwise capacity of every network movement, in canonical movement
    order, given one split plan and one traffic state per junction."""
    out: ServiceVector = {}
    for junction in net.junctions:
        if junction.id not in splits:
            raise ContractViolation(f"no split plan for junction {junction.id}")
        if junction.id not in states:
            raise ContractViolation(f"no traffic state for junction {junction.id}")
    for m in net.movements():
        j = net.junctions[net.junction_of(m)]
        out[m] = xi(ft, j, splits[j.id], states[j.id], m)
    return out


def v_out(
    ft: FlowTable,
    net: RoadNetwork,
    splits: Mapping[int, SplitPlan],
    states: Mapping[int, StateId],
    a: LinkId,
) -> float:
    """Total service capacity leaving link ``a`` across all its movements."""
    total = 0.0
    for m in net.out_movements(a):
        j = net.junctions[net.junction_of(m)]
        total += xi(ft, j, splits[j.id], states[j.id], m)
    return total


def v_in(
    ft: FlowTable,
    net: RoadNetwork,
    splits: Mapping[int, SplitPlan],
    states: Mapping[int, StateId],
    a: LinkId,
) -> float:
    """Total service capacity entering link ``a`` across all its movements."""
    total = 0.0
    for m in net.in_movements(a):
        j = net.junctions[net.junction_of(m)]
        total += xi(ft, j, splits[j.id], states[j.id], m)
    return total
