#!/usr/bin/env python3
"""
Machine checks for the combinatorial and information identities behind the
communication lower bound on t-uniform PIN models:

- the hyperedge allocation procedure that distributes the chain-rule terms Q_e
  to the receivers R(i), i = m-t+2..m, with its no-error and exhaustion claims
- Σ_i I(X_i; L) <= t H(L) for explicit functions L of a PIN model
- I(X_M) = I(X_M|L) + H(L) - Σ_B λ*_B H(L | X_{B^c}) for explicit L
- H(L) >= I(X_M) - I(X_M|L)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

from model_core import (
    TOLERANCE,
    DomainError,
    FunctionL,
    PinSource,
    PmfSource,
    compare_values,
    expand_pin,
    full_set,
)
from partition_engine import (
    conditional_multipartite_report,
    delta,
    fractional_partition_of,
    label_entropy,
    label_given_set,
)

logger = logging.getLogger(__name__)

MAX_ALLOCATION_TERMINALS = 10

Edge = tuple[int, ...]


def _check_range(m: int, t: int) -> None:
    if not 2 <= t <= m <= MAX_ALLOCATION_TERMINALS:
        raise DomainError(f"needs 2 <= t <= m <= {MAX_ALLOCATION_TERMINALS} (got m={m}, t={t})")


@dataclass(frozen=True)
class LexOrder:
    m: int
    t: int
    edges: tuple[Edge, ...]

    def index(self, edge: Edge) -> int:
        """1-based position of an ascending t-tuple."""
        return self.edges.index(tuple(edge)) + 1

    def __getitem__(self, j: int) -> Edge:
        return self.edges[j - 1]

    def __len__(self):
        return len(self.edges)


def lex_index(m: int, t: int) -> LexOrder:
    _check_range(m, t)
    return LexOrder(m, t, tuple(combinations(range(1, m + 1), t)))


def edge_label(edge: Edge) -> str:
    return "(" + "".join(str(i) for i in edge) + ")"


def edge_classes(m: int, t: int, i: int) -> tuple[list[Edge], list[Edge]]:
    """(E_{>=i}, E_{≯i}): edges through i whose smallest terminal is i, and the rest through i."""
    if not 1 <= i <= m:
        raise DomainError(f"terminal {i} outside 1..{m}")
    order = lex_index(m, t)
    through = [e for e in order.edges if i in e]
    return [e for e in through if e[0] == i], [e for e in through if e[0] < i]


@dataclass(frozen=True)
class Allocation:
    receiver: int
    j: int
    donor: int


@dataclass
class AllocationTable:
    m: int
    t: int
    order: LexOrder
    initial: dict[int, list[int]]
    table: dict[int, list[int]]
    log: list[Allocation] = field(default_factory=list)
    failed_at: tuple[int, int] | None = None

    @property
    def donors(self) -> range:
        return range(2, self.m - self.t + 2)

    @property
    def receivers(self) -> range:
        return range(self.m - self.t + 2, self.m + 1)

    def received_by(self, i: int) -> list[Allocation]:
        return [a for a in self.log if a.receiver == i]


def run_allocation(m: int, t: int) -> AllocationTable:
    """
    Allocate each Q_{e_j} needed by R(i) (i not in e_j) from the smallest donor Q(k)
    still holding it, receivers in ascending i and edges in ascending j.

    T(k, j) = 1 initially iff e_j is in E_{≯k}. Reaching a needed edge with no
    donor left stops the run with failed_at = (i, j).
    """
    _check_range(m, t)
    order = lex_index(m, t)
    n = len(order)
    top = m - t + 1
    initial = {k: [1 if k in e and e[0] < k else 0 for e in order.edges] for k in range(2, top + 1)}
    result = AllocationTable(m, t, order, initial, {k: list(row) for k, row in initial.items()})
    table = result.table

    i, j = m - t + 2, 1
    while i <= m:
        if i not in order[j]:
            k = 2
            while k <= top:
                if table[k][j - 1] == 1:
                    result.log.append(Allocation(i, j, k))
                    table[k][j - 1] = 0
                    break
                if table[k][j - 1] == 0 and k == top:
                    result.failed_at = (i, j)
                    logger.debug("allocation (%d,%d) failed at R(%d), e_%d", m, t, i, j)
                    return result
                k += 1
        j += 1
        if j == n + 1:
            i += 1
            j = 1
    return result


@dataclass
class ClaimsReport:
    m: int
    t: int
    no_error: bool
    total: int
    expected_total: int
    per_receiver: dict[int, int]
    expected_per_receiver: int
    receivers_avoid_edges: bool
    exhausted: bool

    @property
    def passed(self) -> bool:
        return (
            self.no_error
            and self.total == self.expected_total
            and all(c == self.expected_per_receiver for c in self.per_receiver.values())
            and self.receivers_avoid_edges
            and self.exhausted
        )


def verify_claims(m: int, t: int) -> ClaimsReport:
    alloc = run_allocation(m, t)
    per = {i: len(alloc.received_by(i)) for i in alloc.receivers}
    avoid = all(a.receiver not in alloc.order[a.j] for a in alloc.log)
    exhausted = all(v == 0 for row in alloc.table.values() for v in row)
    return ClaimsReport(
        m, t,
        no_error=alloc.failed_at is None,
        total=len(alloc.log),
        expected_total=(t - 1) * math.comb(m - 1, t),
        per_receiver=per,
        expected_per_receiver=math.comb(m - 1, t),
        receivers_avoid_edges=avoid,
        exhausted=exhausted,
    )


def render_allocation(alloc: AllocationTable) -> str:
    """Each donor's chain-rule terms tagged with the receiver they were allocated to."""
    lines = [f"allocation for K_{{{alloc.m},{alloc.t}}}"]
    for k in alloc.donors:
        terms = []
        for j, flag in enumerate(alloc.initial[k], start=1):
            if not flag:
                continue
            taker = next((a.receiver for a in alloc.log if a.donor == k and a.j == j), None)
            tag = f"R({taker})" if taker is not None else "unallocated"
            terms.append(f"Q_{edge_label(alloc.order[j])}->{tag}")
        lines.append(f"Q({k}) <= " + " + ".join(terms) if terms else f"Q({k}) = 0")
    for i in alloc.receivers:
        got = ", ".join(f"Q{a.donor}{edge_label(alloc.order[a.j])}" for a in alloc.received_by(i))
        lines.append(f"R({i}) receives {got}")
    if alloc.failed_at is not None:
        i, j = alloc.failed_at
        lines.append(f"ERROR at R({i}), e_{j}={edge_label(alloc.order[j])}")
    return "\n".join(lines)


def render_table(alloc: AllocationTable, initial: bool = False) -> str:
    table = alloc.initial if initial else alloc.table
    header = "k\\j " + " ".join(f"{j:>2}" for j in range(1, len(alloc.order) + 1))
    rows = [f"{k:>3} " + " ".join(f"{v:>2}" for v in table[k]) for k in alloc.donors]
    return "\n".join([header] + rows)


# ---------- Information checks on explicit functions L

@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def mi_bound_check(pin: PinSource, labels: FunctionL, pmf: PmfSource | None = None) -> BoundCheck:
    """Σ_i I(X_i; L) against t H(L); L is tabulated on expand_pin(pin)."""
    t = pin.graph.uniformity()
    if t is None:
        raise DomainError("PIN model is not uniform")
    pmf = pmf if pmf is not None else expand_pin(pin)
    labels.check(pmf)
    h_l = label_entropy(pmf, labels)
    lhs = sum(pmf._h(1 << i) + h_l - pmf.entropy_with_label(1 << i, labels.labels) for i in range(pmf.m))
    rhs = t * h_l
    return BoundCheck(lhs, rhs, lhs <= rhs + TOLERANCE)


@dataclass
class IdentityCheck:
    lhs: float
    rhs: float
    residual: float

    @property
    def holds(self) -> bool:
        return abs(self.residual) <= TOLERANCE


def ci_identity_check(source: PmfSource, labels: FunctionL, tol: float = TOLERANCE) -> IdentityCheck:
    """I(X_M) against I(X_M|L) + H(L) - Σ_B λ*_B H(L | X_{B^c}) with λ* from the maximising minimiser."""
    report = conditional_multipartite_report(source, labels, tol)
    lam = fractional_partition_of(report.partition)
    full = full_set(source.m)
    penalty = sum(float(w) * label_given_set(source, labels, full & ~b) for b, w in lam.weights.items())
    # I(X_M) evaluated at the chosen minimiser
    lhs = float(delta(source, report.partition))
    rhs = report.value + label_entropy(source, labels) - penalty
    return IdentityCheck(lhs, rhs, lhs - rhs)


def wyner_gap_check(source: PmfSource, labels: FunctionL, tol: float = TOLERANCE) -> BoundCheck:
    """H(L) >= I(X_M) - I(X_M | L)."""
    report = conditional_multipartite_report(source, labels, tol)
    h_l = label_entropy(source, labels)
    gap = float(report.info.value) - report.value
    return BoundCheck(gap, h_l, compare_values(gap, h_l, tol) <= 0)
