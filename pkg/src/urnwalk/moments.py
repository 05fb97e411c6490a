"""Candidate moment sequences built from admissible laws, and their checks.

For an admissible law, the log probability of reaching a count vector ``k``
is the same along every monotone path, so ``v_k := exp(path product)`` is a
well-defined sequence indexed by count vectors.  This module builds that
sequence on the total-degree ball ``|k| <= order``, applies the signed
multidimensional finite-difference test of Hildebrandt and Schoenberg (the
sequence is the moment family of a probability measure on the unit cube iff
``(-1)^{|h|} Delta^h(v)(k) >= 0`` for all h, k), and evaluates the
multinomial-weighted slice sums whose value 1 certifies that the measure
lives on the probability simplex.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Sequence

from scipy.special import gammaln

from .admissibility import path_product
from .errors import MomentOrderError, NotAdmissibleError
from .laws import Counts, ReinforcementLaw, as_counts

DEFAULT_TOLERANCE = 1e-10

#: Signed differences below this multiple of eps * sum|terms| are treated
#: as zero: inclusion-exclusion cancels catastrophically for large |h|.
NOISE_FLOOR_FACTOR = 1e3


def ball_indices(dimension: int, order: int) -> list[Counts]:
    """All count vectors with total degree <= order, graded lexicographic."""
    out = [k for k in product(range(order + 1), repeat=dimension) if sum(k) <= order]
    out.sort(key=lambda k: (sum(k), k))
    return out


def slice_indices(dimension: int, degree: int) -> list[Counts]:
    """All count vectors with total degree == degree, lexicographic."""
    return [k for k in product(range(degree + 1), repeat=dimension) if sum(k) == degree]


def multinomial(counts: Sequence[int]) -> int:
    """Number of move sequences with the given per-move counts; exact."""
    c = as_counts(counts)
    total = 0
    out = 1
    for k in c:
        total += k
        out *= math.comb(total, k)
    return out


def log_multinomial(counts: Sequence[int]) -> float:
    """Log of :func:`multinomial` via log-gamma, for large totals."""
    c = as_counts(counts)
    return float(gammaln(sum(c) + 1) - sum(gammaln(k + 1) for k in c))


@dataclass(frozen=True)
class MomentTable:
    """Log-space table of candidate mixed moments on a total-degree ball.

    Tables produced by :func:`build_moment_table` satisfy ``v_0 = 1``,
    strict positivity, and coordinatewise monotonicity
    ``v_{k+e_i} <= v_k``; hand-edited tables (see :meth:`with_value`) may
    break monotonicity, which is exactly what the positivity check detects.
    """

    dimension: int
    order: int
    log_values: Mapping[Counts, float]

    def __post_init__(self) -> None:
        expected = ball_indices(self.dimension, self.order)
        missing = [k for k in expected if k not in self.log_values]
        if missing:
            raise ValueError(f"table is missing {len(missing)} entries, e.g. {missing[0]}")
        origin = (0,) * self.dimension
        if self.log_values[origin] != 0.0:
            raise ValueError("v at the origin must be exactly 1 (log 0)")
        for k, lv in self.log_values.items():
            if not math.isfinite(lv):
                raise ValueError(f"log value at {k} is not finite")

    @cached_property
    def linear_values(self) -> dict[Counts, float]:
        """One-time conversion to linear space for differencing."""
        return {k: math.exp(lv) for k, lv in self.log_values.items()}

    def log_value(self, counts: Sequence[int]) -> float:
        return self.log_values[as_counts(counts)]

    def value(self, counts: Sequence[int]) -> float:
        return self.linear_values[as_counts(counts)]

    def with_value(self, counts: Sequence[int], value: float) -> "MomentTable":
        """Copy with one entry overwritten (test hook for corrupt tables)."""
        if value <= 0:
            raise ValueError("moment values must be positive")
        values = dict(self.log_values)
        values[as_counts(counts)] = math.log(value)
        return MomentTable(self.dimension, self.order, values)

    def to_rows(self) -> list[tuple[Counts, float]]:
        """(index, linear value) pairs in graded lexicographic order."""
        return [(k, self.linear_values[k]) for k in ball_indices(self.dimension, self.order)]


@dataclass(frozen=True)
class HSReport:
    """Outcome of the signed finite-difference positivity scan."""

    passed: bool
    max_negativity: float
    worst_case: tuple[Counts, Counts]
    order_checked: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_negativity": self.max_negativity,
            "worst_case": {"h": list(self.worst_case[0]), "k": list(self.worst_case[1])},
            "order_checked": self.order_checked,
            "tolerance": self.tolerance,
        }


def build_moment_table(
    law: ReinforcementLaw,
    order: int,
    path_tolerance: float = DEFAULT_TOLERANCE,
) -> MomentTable:
    """Build ``v_k`` for ``|k| <= order`` from monotone path products.

    Each value is computed along the staircase path (all moves in direction
    0 first, then direction 1, ...) and cross-checked along the reverse
    staircase; disagreement beyond ``path_tolerance`` in log space means the
    law is not admissible on the ball and raises :class:`NotAdmissibleError`.
    The caller should have certified admissibility on a box of size >= order.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    d = law.dimension
    origin = (0,) * d
    stair: dict[Counts, float] = {origin: 0.0}
    reverse: dict[Counts, float] = {origin: 0.0}
    for k in ball_indices(d, order):
        if k == origin:
            continue
        hi = max(i for i in range(d) if k[i] > 0)
        parent_hi = k[:hi] + (k[hi] - 1,) + k[hi + 1 :]
        stair[k] = stair[parent_hi] + float(law.log_weights(parent_hi)[hi])
        lo = min(i for i in range(d) if k[i] > 0)
        parent_lo = k[:lo] + (k[lo] - 1,) + k[lo + 1 :]
        reverse[k] = reverse[parent_lo] + float(law.log_weights(parent_lo)[lo])
        gap = stair[k] - reverse[k]
        if abs(gap) > path_tolerance:
            raise NotAdmissibleError(
                f"path products to {k} disagree by {gap:.3e} in log space; "
                "the law is not admissible on this ball"
            )
    return MomentTable(d, order, stair)


def _difference_terms(
    table: MomentTable, h: Counts, k: Counts
) -> tuple[float, float]:
    """Inclusion-exclusion expansion of Delta^h(v)(k).

    Returns (value, sum of |terms|) with Neumaier-compensated summation;
    the scale is used by callers to recognize results at the noise floor.
    """
    values = table.linear_values
    total = 0.0
    comp = 0.0
    scale = 0.0
    h_total = sum(h)
    for m in product(*(range(hi + 1) for hi in h)):
        coeff = 1.0 if (h_total - sum(m)) % 2 == 0 else -1.0
        for hi, mi in zip(h, m):
            coeff *= math.comb(hi, mi)
        term = coeff * values[tuple(a + b for a, b in zip(k, m))]
        scale += abs(term)
        fresh = total + term
        if abs(total) >= abs(term):
            comp += (total - fresh) + term
        else:
            comp += (term - fresh) + total
        total = fresh
    return total + comp, scale


def finite_difference(table: MomentTable, h: Sequence[int], k: Sequence[int]) -> float:
    """``Delta^h(v)(k)`` by inclusion-exclusion with compensated summation.

    The one-step operators commute, so the expansion
    ``sum_{0<=m<=h} (-1)^{|h|-|m|} C(h,m) v_{k+m}`` is order-independent.
    Requires ``|h| + |k| <= order``.
    """
    hc = as_counts(h)
    kc = as_counts(k)
    if len(hc) != table.dimension or len(kc) != table.dimension:
        raise MomentOrderError("h and k must match the table dimension")
    if sum(hc) + sum(kc) > table.order:
        raise MomentOrderError(
            f"|h| + |k| = {sum(hc) + sum(kc)} exceeds table order {table.order}"
        )
    value, _ = _difference_terms(table, hc, kc)
    return value


def _scan_pairs(
    table: MomentTable, pairs: Iterable[tuple[Counts, Counts]]
) -> tuple[float, tuple[Counts, Counts]]:
    eps = math.ulp(1.0)
    best = math.inf
    worst = ((0,) * table.dimension, (0,) * table.dimension)
    for h, k in pairs:
        value, scale = _difference_terms(table, h, k)
        signed = value if sum(h) % 2 == 0 else -value
        if abs(signed) < NOISE_FLOOR_FACTOR * eps * scale:
            signed = 0.0
        if signed < best:
            best = signed
            worst = (h, k)
    return best, worst


def hildebrandt_schoenberg_check(
    table: MomentTable,
    tolerance: float = DEFAULT_TOLERANCE,
    threads: int | None = None,
) -> HSReport:
    """Scan ``(-1)^{|h|} Delta^h(v)(k)`` over all ``|h| + |k| <= order``.

    Passes when the minimum signed difference is >= -tolerance; the report
    records the most negative value and where it occurred.  Signed values
    within the cancellation noise floor are clamped to zero rather than
    reported as violations.
    """
    d = table.dimension
    pairs = [
        (h, k)
        for h in ball_indices(d, table.order)
        for k in ball_indices(d, table.order - sum(h))
    ]
    if threads and threads > 1:
        chunks = [pairs[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ch: _scan_pairs(table, ch), chunks))
        best, worst = min(results, key=lambda r: r[0])
    else:
        best, worst = _scan_pairs(table, pairs)
    return HSReport(
        passed=best >= -tolerance,
        max_negativity=best,
        worst_case=worst,
        order_checked=table.order,
        tolerance=tolerance,
    )


def simplex_mass(table: MomentTable, degree: int) -> float:
    """Multinomial-weighted sum over the degree-n slice of the table.

    This is the n-th moment of the coordinate sum of the represented
    variable; it equals 1 exactly when the law's weights sum to 1 at every
    count vector, i.e. when the measure is supported by the simplex.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if degree > table.order:
        raise MomentOrderError(f"degree {degree} exceeds table order {table.order}")
    return math.fsum(
        multinomial(k) * table.linear_values[k]
        for k in slice_indices(table.dimension, degree)
    )
