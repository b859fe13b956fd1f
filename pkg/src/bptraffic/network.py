"""Road network model: links, junctions, phases, movements, and split plans.

Identifiers are dense 0-based integers assigned in declaration order, so a
tuple indexed by id is equivalent to a mapping and iteration order is always
reproducible. All types are immutable after construction and safe to share
across workers; validation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ContractViolation

LinkId = int
JunctionId = int
StateId = int
PhaseId = int

#: absolute tolerance for split-plan simplex and box checks
SPLIT_TOL = 1e-9


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: where, what, and how bad."""

    severity: str  # "error" or "warning"
    code: str
    path: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


@dataclass(frozen=True, slots=True)
class Movement:
    """An ordered link pair: traffic entering a junction from one link and
    leaving on another."""

    from_link: LinkId
    to_link: LinkId

    def __repr__(self) -> str:
        return f"Movement({self.from_link}->{self.to_link})"


@dataclass(frozen=True)
class Phase:
    """A set of movements that receive right-of-way together, with min/max
    green-time fractions of a slot."""

    id: PhaseId
    movements: tuple[Movement, ...]
    t_min: float = 0.0
    t_max: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "movements", tuple(self.movements))

    def contains(self, m: Movement) -> bool:
        return m in self.movements


@dataclass(frozen=True)
class Junction:
    """A signalized junction: its phases, its traffic states, and (optionally)
    declared movements that appear in no phase."""

    id: JunctionId
    phases: tuple[Phase, ...]
    states: tuple[StateId, ...] = (0,)
    extra_movements: tuple[Movement, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "extra_movements", tuple(self.extra_movements))

    def movements(self) -> tuple[Movement, ...]:
        """All movements through this junction, in first-appearance order
        (phase declaration order, then extra declared movements)."""
        seen: dict[Movement, None] = {}
        for phase in self.phases:
            for m in phase.movements:
                seen.setdefault(m)
        for m in self.extra_movements:
            seen.setdefault(m)
        return tuple(seen)

    def phases_containing(self, m: Movement) -> tuple[Phase, ...]:
        return tuple(p for p in self.phases if p.contains(m))

    def sum_t_min(self) -> float:
        return sum(p.t_min for p in self.phases)

    def sum_t_max(self) -> float:
        return sum(p.t_max for p in self.phases)


@dataclass(frozen=True)
class Link:
    """A road link. Vehicles that complete a movement into a sink link leave
    the system; a sink's queue is identically zero."""

    id: LinkId
    is_sink: bool = False
    label: str = ""


@dataclass(frozen=True)
class RoadNetwork:
    """The static topology: links plus junctions.

    Movement sets of distinct junctions must be disjoint, so every movement
    has a unique owning junction.
    """

    links: tuple[Link, ...]
    junctions: tuple[Junction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "junctions", tuple(self.junctions))
        movements: list[Movement] = []
        owner: dict[Movement, JunctionId] = {}
        for j in self.junctions:
            for m in j.movements():
                if m not in owner:
                    owner[m] = j.id
                    movements.append(m)
        out_map: dict[LinkId, list[Movement]] = {link.id: [] for link in self.links}
        in_map: dict[LinkId, list[Movement]] = {link.id: [] for link in self.links}
        for m in movements:
            if m.from_link in out_map:
                out_map[m.from_link].append(m)
            if m.to_link in in_map:
                in_map[m.to_link].append(m)
        object.__setattr__(self, "_movements", tuple(movements))
        object.__setattr__(self, "_owner", owner)
        object.__setattr__(self, "_out", {a: tuple(v) for a, v in out_map.items()})
        object.__setattr__(self, "_in", {a: tuple(v) for a, v in in_map.items()})
        object.__setattr__(self, "_movement_index", {m: k for k, m in enumerate(movements)})

    @property
    def num_links(self) -> int:
        return len(self.links)

    def movements(self) -> tuple[Movement, ...]:
        """All network movements in canonical (declaration) order."""
        return self._movements  # type: ignore[attr-defined]

    def movement_index(self, m: Movement) -> int:
        return self._movement_index[m]  # type: ignore[attr-defined]

    def junction_of(self, m: Movement) -> JunctionId:
        try:
            return self._owner[m]  # type: ignore[attr-defined]
        except KeyError:
            raise ContractViolation(f"{m} is not a movement of this network") from None

    def out_movements(self, a: LinkId) -> tuple[Movement, ...]:
        self._check_link(a)
        return self._out[a]  # type: ignore[attr-defined]

    def in_movements(self, a: LinkId) -> tuple[Movement, ...]:
        self._check_link(a)
        return self._in[a]  # type: ignore[attr-defined]

    def is_sink(self, a: LinkId) -> bool:
        self._check_link(a)
        return self.links[a].is_sink

    def _check_link(self, a: LinkId) -> None:
        if not 0 <= a < len(self.links):
            raise ContractViolation(f"unknown link id {a}")


@dataclass(frozen=True)
class SplitPlan:
    """Fraction of a slot allocated to each phase of one junction.

    ``fractions`` is indexed by phase id (phases are dense 0-based), sums to 1
    and respects the per-phase green bounds; ``validate_split`` checks both.
    """

    junction: JunctionId
    fractions: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "fractions", tuple(float(x) for x in self.fractions))

    def fraction(self, p: PhaseId) -> float:
        return self.fractions[p]


def _check_movement(
    m: Movement, num_links: int, path: str, out: list[Diagnostic]
) -> None:
    if m.from_link == m.to_link:
        out.append(
            Diagnostic("error", "NET_MOVEMENT_LOOP", path, f"{m} enters and exits on the same link")
        )
    for end, role in ((m.from_link, "from"), (m.to_link, "to")):
        if not 0 <= end < num_links:
            out.append(
                Diagnostic(
                    "error",
                    "NET_MOVEMENT_LINK",
                    path,
                    f"{m}: {role}-link {end} is not a declared link",
                )
            )


def validate_network(net: RoadNetwork) -> list[Diagnostic]:
    """Check every structural invariant of the network.

    Returns an empty list iff the network is valid. Pure and deterministic:
    identical input yields the identical diagnostic list, order included.
    """
    out: list[Diagnostic] = []
    n = net.num_links

    for i, link in enumerate(net.links):
        if link.id != i:
            out.append(
                Diagnostic("error", "NET_ID_ORDER", f"links[{i}]", f"link id {link.id} != position {i}")
            )

    if not net.junctions:
        out.append(Diagnostic("error", "NET_NO_JUNCTIONS", "junctions", "network has no junctions"))

    for i, junction in enumerate(net.junctions):
        jpath = f"junctions[{i}]"
        if junction.id != i:
            out.append(
                Diagnostic("error", "NET_ID_ORDER", jpath, f"junction id {junction.id} != position {i}")
            )
        if not junction.states:
            out.append(Diagnostic("error", "NET_NO_STATES", jpath, "junction declares no traffic states"))
        if not junction.phases:
            out.append(Diagnostic("error", "NET_NO_PHASES", jpath, "junction declares no phases"))
        for k, phase in enumerate(junction.phases):
            ppath = f"{jpath}.phases[{k}]"
            if phase.id != k:
                out.append(
                    Diagnostic("error", "NET_ID_ORDER", ppath, f"phase id {phase.id} != position {k}")
                )
            if not phase.movements:
                out.append(Diagnostic("error", "NET_EMPTY_PHASE", ppath, "phase has no movements"))
            if len(set(phase.movements)) != len(phase.movements):
                out.append(
                    Diagnostic("error", "NET_DUPLICATE_MOVEMENT", ppath, "movement listed twice in one phase")
                )
            for m in phase.movements:
                _check_movement(m, n, ppath, out)
            if not 0.0 <= phase.t_min <= 1.0 or not 0.0 <= phase.t_max <= 1.0:
                out.append(
                    Diagnostic(
                        "error",
                        "NET_BOUNDS_RANGE",
                        ppath,
                        f"green bounds ({phase.t_min}, {phase.t_max}) outside [0, 1]",
                    )
                )
            if phase.t_min > phase.t_max:
                out.append(
                    Diagnostic(
                        "error",
                        "NET_BOUNDS_ORDER",
                        ppath,
                        f"t_min {phase.t_min} > t_max {phase.t_max}",
                    )
                )
        s_min = junction.sum_t_min()
        s_max = junction.sum_t_max()
        if s_min > 1.0 + SPLIT_TOL:
            out.append(
                Diagnostic(
                    "error",
                    "NET_TMIN_SUM",
                    jpath,
                    f"no valid split plan: sum of t_min = {s_min:.6g} > 1",
                )
            )
        if junction.phases and s_max < 1.0 - SPLIT_TOL:
            out.append(
                Diagnostic(
                    "error",
                    "NET_TMAX_SUM",
                    jpath,
                    f"no valid split plan: sum of t_max = {s_max:.6g} < 1",
                )
            )
        phased = {m for p in junction.phases for m in p.movements}
        for m in junction.extra_movements:
            _check_movement(m, n, f"{jpath}.movements", out)
            if m not in phased:
                out.append(
                    Diagnostic(
                        "warning",
                        "NET_UNPHASED_MOVEMENT",
                        f"{jpath}.movements",
                        f"{m} appears in no phase and can never flow",
                    )
                )

    seen: dict[Movement, int] = {}
    for i, junction in enumerate(net.junctions):
        for m in junction.movements():
            if m in seen and seen[m] != i:
                out.append(
                    Diagnostic(
                        "error",
                        "NET_MOVEMENTS_NOT_DISJOINT",
                        f"junctions[{i}]",
                        f"movement sets not disjoint: {m} already belongs to junction {seen[m]}",
                    )
                )
            else:
                seen.setdefault(m, i)

    for m in seen:
        if 0 <= m.from_link < n and net.links[m.from_link].is_sink:
            out.append(
                Diagnostic(
                    "error",
                    "NET_SINK_OUTFLOW",
                    f"links[{m.from_link}]",
                    f"sink link {m.from_link} is the from-side of {m}",
                )
            )

    return out


def validate_split(net: RoadNetwork, s: SplitPlan) -> list[Diagnostic]:
    """Check the simplex-sum and box constraints of a split plan (within
    ``SPLIT_TOL``)."""
    out: list[Diagnostic] = []
    if not 0 <= s.junction < len(net.junctions):
        out.append(
            Diagnostic("error", "SPLIT_UNKNOWN_JUNCTION", "split", f"unknown junction id {s.junction}")
        )
        return out
    junction = net.junctions[s.junction]
    path = f"split[junction={s.junction}]"
    if len(s.fractions) != len(junction.phases):
        out.append(
            Diagnostic(
                "error",
                "SPLIT_SHAPE",
                path,
                f"{len(s.fractions)} fractions for {len(junction.phases)} phases",
            )
        )
        return out
    total = sum(s.fractions)
    if abs(total - 1.0) > SPLIT_TOL:
        out.append(Diagnostic("error", "SPLIT_SUM", path, f"fractions sum to {total!r} != 1"))
    for phase, f in zip(junction.phases, s.fractions):
        if f < phase.t_min - SPLIT_TOL or f > phase.t_max + SPLIT_TOL:
            out.append(
                Diagnostic(
                    "error",
                    "SPLIT_BOUNDS",
                    f"{path}.phase[{phase.id}]",
                    f"fraction {f!r} outside [{phase.t_min}, {phase.t_max}]",
                )
            )
    return out


def waterfill_split(junction: Junction) -> SplitPlan:
    """The canonical feasible split: every phase gets its t_min, and the
    remaining slack is spread proportionally to each phase's bound width.

    Defined for every junction with a nonempty split-plan set
    (sum t_min <= 1 <= sum t_max).
    """
    s_min = junction.sum_t_min()
    slack = 1.0 - s_min
    if slack < -SPLIT_TOL or junction.sum_t_max() < 1.0 - SPLIT_TOL:
        raise ContractViolation(f"junction {junction.id} has an empty split-plan set")
    widths = [p.t_max - p.t_min for p in junction.phases]
    total_width = sum(widths)
    if total_width <= 0.0:
        fractions = [p.t_min for p in junction.phases]
    else:
        fractions = [p.t_min + slack * w / total_width for p, w in zip(junction.phases, widths)]
    return SplitPlan(junction.id, tuple(fractions))


def project_box_simplex(junction: Junction, targets: Sequence[float]) -> SplitPlan:
    """Clip target fractions to the green bounds, then renormalize onto the
    box-constrained simplex by water-filling the residual.

    The scaling step moves every non-pinned phase proportionally to its
    remaining slack, so the output always satisfies both constraint families.
    """
    phases = junction.phases
    if len(targets) != len(phases):
        raise ContractViolation(
            f"{len(targets)} targets for {len(phases)} phases at junction {junction.id}"
        )
    f = [min(p.t_max, max(p.t_min, float(g))) for p, g in zip(phases, targets)]
    total = sum(f)
    if total > 1.0 + SPLIT_TOL:
        s_min = junction.sum_t_min()
        denom = total - s_min
        c = (1.0 - s_min) / denom if denom > 0 else 0.0
        f = [p.t_min + (x - p.t_min) * c for p, x in zip(phases, f)]
    elif total < 1.0 - SPLIT_TOL:
        s_max = junction.sum_t_max()
        denom = s_max - total
        c = (1.0 - total) / denom if denom > 0 else 0.0
        f = [x + (p.t_max - x) * c for p, x in zip(phases, f)]
    return SplitPlan(junction.id, tuple(f))
