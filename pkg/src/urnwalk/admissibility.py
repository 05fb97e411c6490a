"""Closedness checks for reinforcement laws on the count lattice.

A law is admissible when the log-probability 1-form on the oriented lattice
of count vectors is closed: going around any elementary square

    p -> p + e_i -> p + e_i + e_j    versus    p -> p + e_j -> p + e_i + e_j

accumulates the same log probability.  Elementary squares generate every
cycle of the lattice graph, so scanning them over a finite box certifies
closedness on that box.  Admissible laws give move sequences whose
probability depends only on how often each move was taken, which is what
makes the path products of :func:`path_product` well defined per endpoint.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError
from .laws import Counts, ReinforcementLaw, as_counts

DEFAULT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class SquareViolation:
    """One elementary square whose two edge orderings disagree."""

    counts: Counts
    i: int
    j: int
    lhs: float
    rhs: float
    gap: float

    def to_dict(self) -> dict:
        return {
            "p": list(self.counts),
            "i": self.i,
            "j": self.j,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    """Result of scanning all elementary squares inside a box."""

    admissible: bool
    violations: tuple[SquareViolation, ...]
    box_size: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "violations": [v.to_dict() for v in self.violations],
            "box_size": self.box_size,
            "tolerance": self.tolerance,
        }


def square_defect(law: ReinforcementLaw, counts: Sequence[int], i: int, j: int) -> float:
    """Log defect of the elementary square at ``counts`` spanned by moves i, j.

    Returns ``ln V_i(p) + ln V_j(p+e_i) - ln V_j(p) - ln V_i(p+e_j)``; zero
    exactly when the square relation V_i(p) V_j(p+e_i) = V_j(p) V_i(p+e_j)
    holds.  Move indices are 0-based.
    """
    d = law.dimension
    if i == j or not (0 <= i < d) or not (0 <= j < d):
        raise ValueError(f"need two distinct move indices in 0..{d - 1}, got {i}, {j}")
    p = as_counts(counts)
    p_i = p[:i] + (p[i] + 1,) + p[i + 1 :]
    p_j = p[:j] + (p[j] + 1,) + p[j + 1 :]
    lhs = float(law.log_weights(p)[i] + law.log_weights(p_i)[j])
    rhs = float(law.log_weights(p)[j] + law.log_weights(p_j)[i])
    return lhs - rhs


def _scan_chunk(
    law: ReinforcementLaw,
    points: Sequence[Counts],
    pairs: Sequence[tuple[int, int]],
    tolerance: float,
) -> list[SquareViolation]:
    found = []
    for p in points:
        logw_p = law.log_weights(p)
        for i, j in pairs:
            p_i = p[:i] + (p[i] + 1,) + p[i + 1 :]
            p_j = p[:j] + (p[j] + 1,) + p[j + 1 :]
            lhs = float(logw_p[i] + law.log_weights(p_i)[j])
            rhs = float(logw_p[j] + law.log_weights(p_j)[i])
            gap = lhs - rhs
            if abs(gap) > tolerance:
                found.append(SquareViolation(p, i, j, lhs, rhs, gap))
    return found


def check_admissible(
    law: ReinforcementLaw,
    box_size: int,
    tolerance: float = DEFAULT_TOLERANCE,
    threads: int | None = None,
) -> AdmissibilityReport:
    """Scan every elementary square with corner in {0..box_size-1}^d.

    Certification is box-local: nothing is claimed beyond the scanned box.
    ``threads`` partitions the scan; evaluation is pure so any partition
    yields the same report.
    """
    if box_size < 1:
        raise ValueError("box_size must be >= 1")
    d = law.dimension
    pairs = list(combinations(range(d), 2))
    points = [p for p in product(range(box_size), repeat=d)]
    if d < 2:
        # a 1-dimensional lattice has no squares; trivially closed
        return AdmissibilityReport(True, (), box_size, tolerance)
    if threads and threads > 1:
        chunks = [points[k::threads] for k in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(
                lambda ch: _scan_chunk(law, ch, pairs, tolerance), chunks
            )
        violations = [v for part in parts for v in part]
        violations.sort(key=lambda v: (v.counts, v.i, v.j))
    else:
        violations = _scan_chunk(law, points, pairs, tolerance)
    return AdmissibilityReport(
        admissible=not violations,
        violations=tuple(violations),
        box_size=box_size,
        tolerance=tolerance,
    )


def path_endpoint(steps: Sequence[int], dimension: int) -> Counts:
    """Endpoint of a monotone lattice path: how often each move appears."""
    counts = [0] * dimension
    for s in steps:
        if not (0 <= s < dimension):
            raise DimensionMismatchError(
                f"step index {s} out of range for dimension {dimension}"
            )
        counts[s] += 1
    return tuple(counts)


def path_product(law: ReinforcementLaw, steps: Sequence[int]) -> float:
    """Log probability of a move sequence starting from zero counts.

    Accumulates ``sum_t ln V_{s(t)}(counts before step t)``.  For admissible
    laws the result depends only on :func:`path_endpoint` of the sequence.
    The empty path returns 0 (product 1).
    """
    counts = [0] * law.dimension
    total = 0.0
    for s in steps:
        if not (0 <= s < law.dimension):
            raise DimensionMismatchError(
                f"step index {s} out of range for dimension {law.dimension}"
            )
        total += float(law.log_weights(tuple(counts))[s])
        counts[s] += 1
    return total


def random_monotone_path(endpoint: Sequence[int], rng: np.random.Generator) -> list[int]:
    """A uniformly shuffled monotone path from the origin to ``endpoint``."""
    target = as_counts(endpoint)
    steps = [i for i, k in enumerate(target) for _ in range(k)]
    rng.shuffle(steps)
    return steps
