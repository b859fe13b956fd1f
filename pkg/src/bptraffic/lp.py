"""Thin, deterministic wrapper around the HiGHS linear-programming backend.

The capacity analyzer assembles its programs in the standard bounded-variable
form below; this module owns status mapping and tolerance policy so verdicts
are reproducible and solver failures always surface as exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import SolverError

FEASIBILITY_TOL = 1e-9
OPTIMALITY_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """min c.x  s.t.  A_ub.x <= b_ub,  A_eq.x = b_eq,  bounds[i][0] <= x_i <= bounds[i][1]."""

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    bounds: list[tuple[float | None, float | None]] = field(default_factory=list)


@dataclass
class LPSolution:
    status: str
    x: np.ndarray | None
    value: float | None
    message: str = ""


def solve_lp(program: LinearProgram) -> LPSolution:
    """Solve a bounded-variable LP; status is one of optimal / infeasible /
    unbounded. Any numerical failure raises SolverError."""
    res = linprog(
        c=program.c,
        A_ub=program.A_ub,
        b_ub=program.b_ub,
        A_eq=program.A_eq,
        b_eq=program.b_eq,
        bounds=program.bounds or None,
        method="highs",
        options={
            "primal_feasibility_tolerance": FEASIBILITY_TOL,
            "dual_feasibility_tolerance": OPTIMALITY_TOL,
        },
    )
    if res.status == 0:
        return LPSolution(OPTIMAL, np.asarray(res.x), float(res.fun), res.message)
    if res.status == 2:
        return LPSolution(INFEASIBLE, None, None, res.message)
    if res.status == 3:
        return LPSolution(UNBOUNDED, None, None, res.message)
    raise SolverError(f"LP backend failed (status {res.status}): {res.message}")
