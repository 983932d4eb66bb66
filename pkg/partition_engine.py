#!/usr/bin/env python3
"""
Partition lattice machinery: enumeration, Δ(P), multipartite information I(X_M),
Type-S classification over the restricted partitions P_B, fractional partitions
and multipartite information conditioned on a function L of the source.

Brute force over all partitions is limited to MAX_ENUMERATION_TERMINALS terminals;
Type-S classification only scans the 2^m - m - 2 restricted partitions and so
works on every model the entropy oracle accepts.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterator

from model_core import (
    TOLERANCE,
    DomainError,
    FunctionL,
    PinSource,
    PmfSource,
    Source,
    TerminalSet,
    Value,
    compare_values,
    format_set,
    format_value,
    full_set,
    is_exact,
    members,
    popcount,
    terminal_set,
)

logger = logging.getLogger(__name__)

MAX_ENUMERATION_TERMINALS = 12
MAX_CONDITIONAL_TERMINALS = 8
MAX_CONDITIONAL_POINTS = 2 ** 20


def bell_number(m: int) -> int:
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@dataclass(frozen=True)
class Partition:
    """Blocks as masks, ordered by their lowest terminal."""

    m: int
    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(sorted(self.blocks, key=lambda b: b & -b))
        object.__setattr__(self, "blocks", blocks)
        union = 0
        for b in blocks:
            if b == 0 or union & b:
                raise DomainError("partition blocks must be nonempty and disjoint")
            union |= b
        if union != full_set(self.m):
            raise DomainError(f"blocks do not cover {{1..{self.m}}}")

    @classmethod
    def of(cls, m: int, blocks) -> "Partition":
        """From 1-indexed block lists, e.g. Partition.of(4, [[1, 4], [2], [3]])."""
        return cls(m, tuple(terminal_set(m, b) for b in blocks))

    @classmethod
    def singleton(cls, m: int) -> "Partition":
        return cls(m, tuple(1 << i for i in range(m)))

    def __len__(self):
        return len(self.blocks)

    @property
    def is_singleton(self) -> bool:
        return len(self.blocks) == self.m

    def cells_hit(self, mask: TerminalSet) -> int:
        return sum(1 for b in self.blocks if b & mask)

    def __str__(self):
        return "{" + ",".join(format_set(b) for b in self.blocks) + "}"


def enumerate_partitions(m: int) -> Iterator[Partition]:
    """Every partition of {1..m} with at least two blocks, in restricted-growth order."""
    if m > MAX_ENUMERATION_TERMINALS:
        raise DomainError(
            f"enumerating all {bell_number(m)} partitions of {m} terminals is refused "
            f"(limit {MAX_ENUMERATION_TERMINALS}); use the restricted-partition Type-S check instead"
        )
    if m < 1:
        return
    blocks: list[int] = []

    def place(i: int) -> Iterator[Partition]:
        if i == m:
            if len(blocks) >= 2:
                yield Partition(m, tuple(blocks))
            return
        bit = 1 << i
        for j in range(len(blocks)):
            blocks[j] |= bit
            yield from place(i + 1)
            blocks[j] ^= bit
        blocks.append(bit)
        yield from place(i + 1)
        blocks.pop()

    yield from place(0)


def restricted_partition(m: int, b: TerminalSet) -> Partition:
    """P_B = {B^c, {b_1}, ..., {b_|B|}}."""
    if b == 0 or popcount(b) > m - 1:
        raise DomainError(f"B must be nonempty with at most {m - 1} terminals")
    rest = full_set(m) & ~b
    return Partition(m, (rest,) + tuple(1 << (i - 1) for i in members(b)))


def delta(source: Source, partition: Partition) -> Value:
    """Δ(P) = (Σ_A H(X_A) - H(X_M)) / (|P| - 1)."""
    if len(partition) < 2:
        raise DomainError("Δ needs a partition with at least two blocks")
    total = sum((source._h(b) for b in partition.blocks), Fraction(0) if source.exact else 0.0)
    return (total - source._h(full_set(source.m))) / (len(partition) - 1)


@dataclass
class MultiInfoReport:
    value: Value
    argmin: list[Partition]
    delta_singleton: Value

    @property
    def singleton_minimizes(self) -> bool:
        return any(p.is_singleton for p in self.argmin)


def multipartite_info(source: Source, tol: float = TOLERANCE) -> MultiInfoReport:
    """I(X_M) by brute force over all partitions, with every minimiser listed."""
    if source.m < 2:
        raise DomainError("multipartite information needs at least 2 terminals")
    best = None
    candidates: list[tuple[Partition, Value]] = []
    for p in enumerate_partitions(source.m):
        d = delta(source, p)
        if best is None or d < best:
            best = d
            candidates = [(q, dq) for q, dq in candidates if compare_values(dq, best, tol) == 0]
            candidates.append((p, d))
        elif compare_values(d, best, tol) == 0:
            candidates.append((p, d))
    argmin = [p for p, _ in candidates]
    logger.debug("I(X_M)=%s over %d minimisers", best, len(argmin))
    return MultiInfoReport(best, argmin, delta(source, Partition.singleton(source.m)))


class TypeSKind(enum.Enum):
    NOT_TYPE_S = "NotTypeS"
    TYPE_S = "TypeS"
    STRICT_TYPE_S = "StrictTypeS"

    def __str__(self):
        return self.value


@dataclass
class TypeSVerdict:
    kind: TypeSKind
    margin: Value
    delta_singleton: Value
    witness: TerminalSet | None = None
    tie: bool = False
    scanned: int = 0

    @property
    def is_type_s(self) -> bool:
        return self.kind is not TypeSKind.NOT_TYPE_S

    def describe(self, m: int) -> str:
        line = f"{self.kind} margin={format_value(self.margin)}"
        if self.witness is not None and self.kind is not TypeSKind.STRICT_TYPE_S:
            line += f" at P_B={restricted_partition(m, self.witness)}"
        return line


def omega(m: int) -> Iterator[TerminalSet]:
    """Sets B with 1 <= |B| <= m-2, by size then lexicographically."""
    for size in range(1, m - 1):
        for combo in combinations(range(1, m + 1), size):
            yield terminal_set(m, combo)


def _verdict(margin: Value, ds: Value, witness, scanned: int, exact: bool, tol: float) -> TypeSVerdict:
    if exact:
        sign = (margin > 0) - (margin < 0)
        tie = sign == 0
    else:
        sign = compare_values(margin, 0.0, tol)
        tie = sign == 0
        if tie and margin != 0:
            warnings.warn(
                f"Type-S margin {float(margin):.3g} is within tolerance {tol:g}; reported as a tie",
                RuntimeWarning,
                stacklevel=3,
            )
    kind = {1: TypeSKind.STRICT_TYPE_S, 0: TypeSKind.TYPE_S, -1: TypeSKind.NOT_TYPE_S}[sign]
    return TypeSVerdict(kind, margin, ds, witness, tie, scanned)


def classify_type_s(source: Source, tol: float = TOLERANCE) -> TypeSVerdict:
    """Compare Δ(S) with Δ(P_B) for every B in Ω; margin = min_B Δ(P_B) - Δ(S)."""
    m = source.m
    if m < 3:
        raise DomainError("Type-S classification needs m >= 3")
    ds = delta(source, Partition.singleton(m))
    margin, witness, scanned = None, None, 0
    for b in omega(m):
        gap = delta(source, restricted_partition(m, b)) - ds
        scanned += 1
        if margin is None or gap < margin:
            margin, witness = gap, b
    return _verdict(margin, ds, witness, scanned, source.exact, tol)


def pin_singleton_check(pin: PinSource) -> TypeSVerdict:
    """Type-S test for t-uniform PIN models, straight from hyperedge counts."""
    m = pin.m
    t = pin.graph.uniformity()
    if t is None:
        raise DomainError("PIN model is not uniform")
    if m < 3:
        raise DomainError("Type-S classification needs m >= 3")
    total = pin.graph.total_multiplicity
    ds = Fraction((t - 1) * total, m - 1)
    margin, witness, scanned = None, None, 0
    for b in omega(m):
        p_b = restricted_partition(m, b)
        cells = sum(k * (p_b.cells_hit(e) - 1) for e, k in pin.graph.edges)
        gap = Fraction(cells, popcount(b)) - ds
        scanned += 1
        if margin is None or gap < margin:
            margin, witness = gap, b
    return _verdict(margin, ds, witness, scanned, True, TOLERANCE)


@dataclass
class FractionalPartition:
    """Weights λ_B on nonempty proper subsets B with Σ_{B∋i} λ_B = 1 for every i."""

    m: int
    weights: dict[TerminalSet, Value] = field(default_factory=dict)

    def coverage(self, i: int) -> Value:
        return sum((w for b, w in self.weights.items() if b >> (i - 1) & 1), Fraction(0))

    def is_valid(self, tol: float = TOLERANCE) -> bool:
        full = full_set(self.m)
        if any(b == 0 or b == full for b in self.weights):
            return False
        if any(compare_values(w, 0, tol) < 0 for w in self.weights.values()):
            return False
        return all(compare_values(self.coverage(i), 1, tol) == 0 for i in range(1, self.m + 1))


def fractional_partition_of(partition: Partition) -> FractionalPartition:
    """λ^(P)_B = 1/(|P|-1) when B^c is a block of P, else 0."""
    if len(partition) < 2:
        raise DomainError("needs a partition with at least two blocks")
    full = full_set(partition.m)
    w = Fraction(1, len(partition) - 1)
    return FractionalPartition(partition.m, {full & ~a: w for a in partition.blocks})


def fractional_delta(source: Source, lam: FractionalPartition) -> Value:
    """H(X_M) - Σ_B λ_B H(X_B | X_{B^c})."""
    full = full_set(source.m)
    h_full = source._h(full)
    return h_full - sum((w * (h_full - source._h(full & ~b)) for b, w in lam.weights.items()), Fraction(0))


# ---------- Conditioning on a function L

def _check_conditional(source: Source, labels: FunctionL) -> PmfSource:
    if not isinstance(source, PmfSource):
        raise DomainError("conditioning on L needs an explicit pmf (use expand_pin for PIN models)")
    if source.m > MAX_CONDITIONAL_TERMINALS:
        raise DomainError(f"conditioning on L is limited to {MAX_CONDITIONAL_TERMINALS} terminals")
    if source.n_points > MAX_CONDITIONAL_POINTS:
        raise DomainError(f"support of {source.n_points} points exceeds {MAX_CONDITIONAL_POINTS}")
    labels.check(source)
    return source


def label_entropy(source: PmfSource, labels: FunctionL) -> float:
    """H(L)."""
    labels.check(source)
    return source.entropy_with_label(0, labels.labels)


def entropy_given_label(source: PmfSource, a: TerminalSet, labels: FunctionL) -> float:
    """H(X_A | L), zero for empty A."""
    if a == 0:
        return 0.0
    return source.entropy_with_label(a, labels.labels) - label_entropy(source, labels)


def label_given_set(source: PmfSource, labels: FunctionL, b: TerminalSet) -> float:
    """H(L | X_B)."""
    return source.entropy_with_label(b, labels.labels) - source._h(b)


def conditional_delta(source: PmfSource, partition: Partition, labels: FunctionL) -> float:
    """Δ(P | L) = (Σ_A H(X_A|L) - H(X_M|L)) / (|P| - 1)."""
    _check_conditional(source, labels)
    if len(partition) < 2:
        raise DomainError("Δ needs a partition with at least two blocks")
    total = sum(entropy_given_label(source, b, labels) for b in partition.blocks)
    return (total - entropy_given_label(source, full_set(source.m), labels)) / (len(partition) - 1)


@dataclass
class ConditionalInfoReport:
    value: float
    partition: Partition
    info: MultiInfoReport
    sensitivity: bool = False


def conditional_multipartite_report(source: PmfSource, labels: FunctionL, tol: float = TOLERANCE) -> ConditionalInfoReport:
    """I(X_M | L): maximum of Δ(P* | L) over the minimisers P* of the unconditioned problem."""
    _check_conditional(source, labels)
    info = multipartite_info(source, tol)
    scored = [(conditional_delta(source, p, labels), p) for p in info.argmin]
    value, best = max(scored, key=lambda vp: vp[0])
    spread = max(v for v, _ in scored) - min(v for v, _ in scored)
    # near-tied minimisers on float sources can move the maximum
    sensitivity = not is_exact(info.value) and len(scored) > 1 and spread > tol
    return ConditionalInfoReport(max(value, 0.0), best, info, sensitivity)


def conditional_multipartite_info(source: PmfSource, labels: FunctionL, tol: float = TOLERANCE) -> float:
    return conditional_multipartite_report(source, labels, tol).value
