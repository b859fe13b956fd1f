"""Capacity-region analysis of a road network under the linear flow model.

The supportable-arrival region is characterized by flow variables: an arrival
vector lies inside it iff there are per-movement flows, nonnegative and
conserved at every non-sink link, that the time-averaged service capacities
can cover. For the linear flow model the achievable average-service set is
the affine image of a product of split-plan polytopes (one block per junction
state, weighted by that state's long-run frequency), so membership is a
single LP. ``check_capacity`` maximizes the throughput factor theta: the
largest scaling of the arrival vector that stays supportable.

``brute_force_capacity`` is the independent oracle: it enumerates per-state
split plans on a lattice and, for each resulting average service vector,
computes the exact throughput factor by max-flow/min-cut ratio enumeration —
no shared machinery with the LP route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

import numpy as np

from .errors import ContractViolation, SolverError
from .flow import FlowTable
from .lattice import simplex_lattice
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve_lp
from .network import (
    Junction,
    LinkId,
    Movement,
    RoadNetwork,
    SplitPlan,
    StateId,
    waterfill_split,
)

LP_TOL = 1e-7

BRUTE_MAX_JUNCTIONS = 2
BRUTE_MAX_PHASES = 4
BRUTE_MAX_JOINT_STATES = 2
BRUTE_MAX_COMBINATIONS = 500_000
_BRUTE_CHUNK = 32_768


@dataclass(frozen=True)
class StateDistribution:
    """Long-run state frequencies, one marginal per junction (junction state
    processes are independent, so the joint distribution factorizes)."""

    marginals: dict[int, tuple[float, ...]]
    source: str = "iid"

    def __post_init__(self) -> None:
        for j, pi in self.marginals.items():
            if any(p < 0 for p in pi):
                raise ContractViolation(f"negative state probability at junction {j}")
            if abs(sum(pi) - 1.0) > 1e-12:
                raise ContractViolation(
                    f"state probabilities at junction {j} sum to {sum(pi)!r} != 1"
                )

    def pi(self, junction: int, state: int) -> float:
        return self.marginals[junction][state]


#: arrival rates in vehicles per slot, keyed by link id; missing links mean 0
ArrivalRateVector = Mapping[LinkId, float]


@dataclass(frozen=True)
class FlowAssignment:
    """A feasibility certificate: per-movement flows plus the per-state split
    plans whose averaged capacities cover them."""

    flows: dict[Movement, float]
    splits: dict[tuple[int, StateId], SplitPlan]


@dataclass(frozen=True)
class CapacityVerdict:
    """Outcome of a capacity check. ``theta_star`` is the largest factor by
    which the arrival vector can be scaled while staying supportable
    (math.inf when there are no arrivals at all)."""

    theta_star: float
    feasible: bool
    certificate: FlowAssignment
    margin: float
    binding_movements: tuple[Movement, ...]
    pi_source: str

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.theta_star)


def _check_inputs(net: RoadNetwork, pi: StateDistribution, lam: ArrivalRateVector) -> None:
    for junction in net.junctions:
        if junction.id not in pi.marginals:
            raise ContractViolation(f"no state distribution for junction {junction.id}")
        if len(pi.marginals[junction.id]) != len(junction.states):
            raise ContractViolation(
                f"state distribution for junction {junction.id} has wrong length"
            )
    for a, rate in lam.items():
        if not 0 <= a < net.num_links:
            raise ContractViolation(f"arrival rate for unknown link {a}")
        if rate < 0 or not math.isfinite(rate):
            raise ContractViolation(f"arrival rate {rate!r} on link {a} invalid")
        if rate > 0 and net.is_sink(a):
            raise ContractViolation(f"nonzero arrival rate on sink link {a}")


def _trivial_certificate(net: RoadNetwork) -> FlowAssignment:
    flows = {m: 0.0 for m in net.movements()}
    splits = {
        (j.id, z): waterfill_split(j) for j in net.junctions for z in j.states
    }
    return FlowAssignment(flows, splits)


def check_capacity(
    net: RoadNetwork,
    ft: FlowTable,
    pi: StateDistribution,
    lam: ArrivalRateVector,
) -> CapacityVerdict:
    """Maximum throughput factor of an arrival vector, with certificate.

    Solves: max theta such that there exist flows f >= 0 and per-state valid
    split plans with

    * theta * lambda_a = (flow out of a) - (flow into a) at every non-sink a,
      sinks absorbing freely;
    * f on each movement at most the pi-averaged service capacity of the
      chosen splits (capacity may idle: serving less than the saturation rate
      is always possible).

    Returns theta* = +inf when lambda is identically zero.
    """
    _check_inputs(net, pi, lam)
    movements = net.movements()
    lam_vec = np.array([float(lam.get(a, 0.0)) for a in range(net.num_links)])
    if not lam_vec.any():
        return CapacityVerdict(
            theta_star=math.inf,
            feasible=True,
            certificate=_trivial_certificate(net),
            margin=math.inf,
            binding_movements=(),
            pi_source=pi.source,
        )

    n_f = len(movements)
    split_offset: dict[tuple[int, int], int] = {}
    col = 1 + n_f
    for junction in net.junctions:
        for z in junction.states:
            split_offset[(junction.id, z)] = col
            col += len(junction.phases)
    n_vars = col

    bounds: list[tuple[float | None, float | None]] = [(0.0, None)] * (1 + n_f)
    for junction in net.junctions:
        for _z in junction.states:
            bounds.extend((p.t_min, p.t_max) for p in junction.phases)

    eq_rows: list[np.ndarray] = []
    eq_b: list[float] = []
    for a in range(net.num_links):
        if net.is_sink(a):
            continue
        row = np.zeros(n_vars)
        row[0] = lam_vec[a]
        for m in net.out_movements(a):
            row[1 + net.movement_index(m)] -= 1.0
        for m in net.in_movements(a):
            row[1 + net.movement_index(m)] += 1.0
        eq_rows.append(row)
        eq_b.append(0.0)
    for junction in net.junctions:
        for z in junction.states:
            row = np.zeros(n_vars)
            off = split_offset[(junction.id, z)]
            row[off : off + len(junction.phases)] = 1.0
            eq_rows.append(row)
            eq_b.append(1.0)

    ub_rows: list[np.ndarray] = []
    for k, m in enumerate(movements):
        junction = net.junctions[net.junction_of(m)]
        row = np.zeros(n_vars)
        row[1 + k] = 1.0
        for z in junction.states:
            weight_z = pi.pi(junction.id, z)
            off = split_offset[(junction.id, z)]
            for phase in junction.phases:
                if phase.contains(m):
                    row[off + phase.id] -= weight_z * ft.rate(junction.id, z, phase.id, m)
        ub_rows.append(row)

    c = np.zeros(n_vars)
    c[0] = -1.0
    program = LinearProgram(
        c=c,
        A_ub=np.vstack(ub_rows),
        b_ub=np.zeros(len(ub_rows)),
        A_eq=np.vstack(eq_rows),
        b_eq=np.array(eq_b),
        bounds=bounds,
    )
    sol = solve_lp(program)
    if sol.status == UNBOUNDED:
        raise SolverError("throughput LP unbounded with nonzero arrivals; inputs inconsistent")
    if sol.status == INFEASIBLE:
        raise SolverError("throughput LP infeasible; inputs inconsistent")
    assert sol.status == OPTIMAL and sol.x is not None
    x = sol.x
    theta = float(x[0])
    flows = {m: float(x[1 + k]) for k, m in enumerate(movements)}
    splits: dict[tuple[int, StateId], SplitPlan] = {}
    for junction in net.junctions:
        for z in junction.states:
            off = split_offset[(junction.id, z)]
            fractions = tuple(float(x[off + p.id]) for p in junction.phases)
            splits[(junction.id, z)] = SplitPlan(junction.id, fractions)
    binding = tuple(
        m
        for row, m in zip(ub_rows, movements)
        if flows[m] > LP_TOL and abs(float(row @ x)) <= LP_TOL
    )
    return CapacityVerdict(
        theta_star=theta,
        feasible=theta >= 1.0,
        certificate=FlowAssignment(flows, splits),
        margin=theta - 1.0,
        binding_movements=binding,
        pi_source=pi.source,
    )


def _cut_structure(
    net: RoadNetwork, lam_vec: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Boundary incidence and arrival mass of every relevant source-side cut.

    A throughput factor theta is feasible iff for every subset U of non-sink
    links, theta * lambda(U) <= capacity of the movements leaving U (max-flow/
    min-cut on the network with a super-source feeding theta*lambda and sinks
    draining freely). Returns (B, lamU): B[s, k] = 1 if movement k crosses out
    of subset s, over all subsets with lambda(U) > 0.
    """
    relevant = [
        a
        for a in range(net.num_links)
        if not net.is_sink(a)
        and (lam_vec[a] > 0 or net.out_movements(a) or net.in_movements(a))
    ]
    if len(relevant) > 16:
        raise ContractViolation(
            f"brute-force capacity limited to 16 relevant links, got {len(relevant)}"
        )
    movements = net.movements()
    rows: list[np.ndarray] = []
    masses: list[float] = []
    for size in range(1, len(relevant) + 1):
        for subset in combinations(relevant, size):
            mass = float(lam_vec[list(subset)].sum())
            if mass <= 0.0:
                continue
            inside = set(subset)
            row = np.zeros(len(movements))
            for k, m in enumerate(movements):
                if m.from_link in inside and m.to_link not in inside:
                    row[k] = 1.0
            rows.append(row)
            masses.append(mass)
    return np.vstack(rows), np.array(masses)


def theta_for_service(
    net: RoadNetwork, service: Mapping[Movement, float], lam: ArrivalRateVector
) -> float:
    """Exact throughput factor for one fixed average service vector, by
    min-cut ratio enumeration."""
    lam_vec = np.array([float(lam.get(a, 0.0)) for a in range(net.num_links)])
    if not lam_vec.any():
        return math.inf
    B, masses = _cut_structure(net, lam_vec)
    c = np.array([float(service.get(m, 0.0)) for m in net.movements()])
    return float(np.min((B @ c) / masses))


def brute_force_capacity(
    net: RoadNetwork,
    ft: FlowTable,
    pi: StateDistribution,
    lam: ArrivalRateVector,
    step: float,
    max_combinations: int = BRUTE_MAX_COMBINATIONS,
) -> float:
    """Lattice lower bound on the throughput factor.

    Enumerates every combination of per-(junction, state) split plans on the
    resolution-``step`` lattice; for each, averages the service capacities
    under ``pi`` and computes the exact throughput factor of that service
    vector via min-cut ratios. The maximum over the lattice is at most the
    LP optimum and within O(step) of it.
    """
    _check_inputs(net, pi, lam)
    if len(net.junctions) > BRUTE_MAX_JUNCTIONS:
        raise ContractViolation(f"brute force limited to {BRUTE_MAX_JUNCTIONS} junctions")
    joint_states = 1
    for junction in net.junctions:
        if len(junction.phases) > BRUTE_MAX_PHASES:
            raise ContractViolation(f"brute force limited to {BRUTE_MAX_PHASES} phases per junction")
        joint_states *= len(junction.states)
    if joint_states > BRUTE_MAX_JOINT_STATES:
        raise ContractViolation(
            f"brute force limited to {BRUTE_MAX_JOINT_STATES} joint states, got {joint_states}"
        )

    lam_vec = np.array([float(lam.get(a, 0.0)) for a in range(net.num_links)])
    if not lam_vec.any():
        return math.inf

    movements = net.movements()
    n_mov = len(movements)
    # one block per (junction, state): lattice points mapped to pi-weighted
    # contributions to the average service vector
    contribs: list[np.ndarray] = []
    total_combos = 1
    for junction in net.junctions:
        for z in junction.states:
            points = simplex_lattice(junction, step)
            alpha = np.zeros((len(junction.phases), n_mov))
            for phase in junction.phases:
                for m in phase.movements:
                    alpha[phase.id, net.movement_index(m)] = ft.rate(
                        junction.id, z, phase.id, m
                    )
            contribs.append(pi.pi(junction.id, z) * (points @ alpha))
            total_combos *= points.shape[0]
    if total_combos > max_combinations:
        raise ContractViolation(
            f"{total_combos} lattice combinations exceed the cap of {max_combinations}"
        )

    # broadcast-sum the block contributions into the full combination grid
    shape = [c.shape[0] for c in contribs]
    service = np.zeros((*shape, n_mov))
    for axis, contrib in enumerate(contribs):
        expand = [1] * len(shape) + [n_mov]
        expand[axis] = shape[axis]
        service = service + contrib.reshape(expand)
    service = service.reshape(-1, n_mov)

    B, masses = _cut_structure(net, lam_vec)
    best = 0.0
    for start in range(0, service.shape[0], _BRUTE_CHUNK):
        chunk = service[start : start + _BRUTE_CHUNK]
        ratios = (chunk @ B.T) / masses
        best = max(best, float(ratios.min(axis=1).max()))
    return best
