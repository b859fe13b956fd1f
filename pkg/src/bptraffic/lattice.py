"""Lattice enumeration of box-constrained simplices.

Shared by the grid-search split solver and the brute-force capacity oracle.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation
from .network import Junction

_EPS = 1e-9


def resolution_steps(step: float) -> int:
    """Number of lattice steps per unit; ``step`` must divide 1."""
    if not 0 < step <= 1:
        raise ContractViolation(f"step {step} outside (0, 1]")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > _EPS:
        raise ContractViolation(f"step {step} does not divide 1")
    return n


def compositions(total: int, parts: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``,
    in ascending lexicographic order. Shape (C(total+parts-1, parts-1), parts)."""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total + 1):
        rest = compositions(total - first, parts - 1)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def simplex_lattice(junction: Junction, step: float) -> np.ndarray:
    """All split plans of ``junction`` on the resolution-``step`` lattice.

    Returns an array of shape (num_points, num_phases) of fractions in
    ascending lexicographic order. Raises if no lattice point satisfies the
    green bounds.
    """
    n = resolution_steps(step)
    parts = len(junction.phases)
    counts = compositions(n, parts)
    fractions = counts.astype(np.float64) * step
    mask = np.ones(fractions.shape[0], dtype=bool)
    for k, phase in enumerate(junction.phases):
        mask &= fractions[:, k] >= phase.t_min - _EPS
        mask &= fractions[:, k] <= phase.t_max + _EPS
    points = fractions[mask]
    if points.shape[0] == 0:
        raise ContractViolation(
            f"no lattice point at step {step} satisfies the bounds of junction {junction.id}"
        )
    return points
