#!/usr/bin/env python3
"""
Exact linear programming over rationals and the silent-terminal key capacity.

LinearProgram is always "minimise c.x subject to Ax >= b, x >= 0". It is solved
through its dual (maximise b.y subject to A^T y <= c, y >= 0), which has one row
per variable instead of one row per constraint; the primal optimum is read off
the final dual tableau and re-checked against every constraint row.

All arithmetic is fractions.Fraction with Bland's rule. Floating inputs are lifted
to dyadic rationals with LIFT_BITS fractional bits before solving.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from model_core import (
    TOLERANCE,
    DomainError,
    InconsistencyError,
    Source,
    TerminalSet,
    Value,
    compare_values,
    format_set,
    format_value,
    full_set,
    members,
    popcount,
)
from partition_engine import TypeSKind, classify_type_s, multipartite_info

logger = logging.getLogger(__name__)

LIFT_BITS = 40
MAX_LP_TERMINALS = 10
# float sources: cross-checks only raise when the Type-S margin clears this
TIE_GUARD = 1e-6


class LPError(RuntimeError):
    pass


class LPInfeasibleError(LPError):
    pass


class LPUnboundedError(LPError):
    pass


def lift(v: Value) -> Fraction:
    """Exact values pass through; floats become round(v * 2^LIFT_BITS) / 2^LIFT_BITS."""
    if isinstance(v, (Fraction, int)):
        return Fraction(v)
    return Fraction(round(float(v) * (1 << LIFT_BITS)), 1 << LIFT_BITS)


@dataclass
class LinearProgram:
    n_vars: int
    rows: list[tuple[tuple[Value, ...], Value]]
    objective: tuple[Value, ...]
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.objective) != self.n_vars:
            raise DomainError("objective length differs from the variable count")
        for coeffs, _ in self.rows:
            if len(coeffs) != self.n_vars:
                raise DomainError("constraint row length differs from the variable count")
        if not self.labels:
            self.labels = tuple(range(1, self.n_vars + 1))

    def describe_row(self, index: int) -> str:
        coeffs, rhs = self.rows[index]
        terms = []
        for c, lab in zip(coeffs, self.labels):
            if c == 0:
                continue
            terms.append(f"R{lab}" if c == 1 else f"{format_value(c)}*R{lab}")
        return f"{' + '.join(terms) or '0'} >= {format_value(rhs)}"

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        if any(v < 0 for v in x):
            return False
        return all(sum(lift(c) * v for c, v in zip(coeffs, x)) >= lift(rhs) for coeffs, rhs in self.rows)


@dataclass
class LPSolution:
    optimum: Fraction
    witness: tuple[Fraction, ...]
    pivots: int = 0


class _Tableau:
    """Dense maximisation tableau; reduced[j] > 0 means column j can improve."""

    def __init__(self, a: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.a = a
        self.rhs = rhs
        self.basis = basis
        self.reduced: list[Fraction] = []
        self.value = Fraction(0)
        self.pivots = 0

    def set_objective(self, cost: Sequence[Fraction]) -> None:
        self.reduced = list(cost)
        self.value = Fraction(0)
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.a[i]
                self.reduced = [r - cb * v for r, v in zip(self.reduced, row)]
                self.value += cb * self.rhs[i]

    def pivot(self, i: int, j: int) -> None:
        p = self.a[i][j]
        row = [v / p for v in self.a[i]]
        self.a[i] = row
        self.rhs[i] /= p
        for r in range(len(self.a)):
            f = self.a[r][j]
            if r != i and f:
                self.a[r] = [v - f * w for v, w in zip(self.a[r], row)]
                self.rhs[r] -= f * self.rhs[i]
        f = self.reduced[j]
        if f:
            self.reduced = [v - f * w for v, w in zip(self.reduced, row)]
            self.value += f * self.rhs[i]
        self.basis[i] = j
        self.pivots += 1

    def run(self) -> str:
        while True:
            entering = next((j for j, r in enumerate(self.reduced) if r > 0), None)
            if entering is None:
                return "optimal"
            ratios = [(self.rhs[i] / self.a[i][entering], self.basis[i], i)
                      for i in range(len(self.a)) if self.a[i][entering] > 0]
            if not ratios:
                return "unbounded"
            _, _, leaving = min(ratios)
            self.pivot(leaving, entering)

    def drive_out(self, first_artificial: int) -> None:
        i = 0
        while i < len(self.a):
            if self.basis[i] >= first_artificial:
                j = next((j for j in range(first_artificial) if self.a[i][j] != 0), None)
                if j is None:
                    # redundant row
                    del self.a[i], self.rhs[i], self.basis[i]
                    continue
                self.pivot(i, j)
            i += 1
        self.a = [row[:first_artificial] for row in self.a]
        self.reduced = self.reduced[:first_artificial]


def _maximize(g: list[list[Fraction]], h: list[Fraction], d: list[Fraction]) -> tuple[Fraction, list[Fraction], int]:
    """max d.y s.t. g y <= h, y >= 0; returns (value, shadow prices of the rows, pivots)."""
    n_rows, k = len(g), len(d)
    n_cols = k + n_rows
    n_art = sum(1 for v in h if v < 0)
    zero = Fraction(0)
    a, rhs, basis = [], [], []
    art = n_cols
    for i in range(n_rows):
        row = list(g[i]) + [zero] * (n_rows + n_art)
        row[k + i] = Fraction(1)
        b = h[i]
        if b < 0:
            row = [-v for v in row]
            b = -b
            row[art] = Fraction(1)
            basis.append(art)
            art += 1
        else:
            basis.append(k + i)
        a.append(row)
        rhs.append(b)
    tab = _Tableau(a, rhs, basis)

    if n_art:
        tab.set_objective([zero] * n_cols + [Fraction(-1)] * n_art)
        tab.run()
        if tab.value < 0:
            raise LPUnboundedError("primal has no finite optimum (its dual is infeasible)")
        tab.drive_out(n_cols)

    tab.set_objective(list(d) + [zero] * n_rows)
    if tab.run() == "unbounded":
        raise LPInfeasibleError("primal constraints are infeasible (its dual is unbounded)")
    shadow = [-tab.reduced[k + j] for j in range(n_rows)]
    return tab.value, shadow, tab.pivots


def simplex_min(lp: LinearProgram) -> LPSolution:
    """Exact optimum and witness of min c.x s.t. Ax >= b, x >= 0."""
    a = [[lift(c) for c in coeffs] for coeffs, _ in lp.rows]
    b = [lift(rhs) for _, rhs in lp.rows]
    c = [lift(v) for v in lp.objective]
    transposed = [[a[r][j] for r in range(len(a))] for j in range(lp.n_vars)]
    value, witness, pivots = _maximize(transposed, c, b)
    if not lp.satisfied_by(witness) or sum(cj * xj for cj, xj in zip(c, witness)) != value:
        raise InconsistencyError("LP witness failed re-verification against its constraint rows")
    logger.debug("LP with %d rows solved in %d pivots, optimum %s", len(lp.rows), pivots, value)
    return LPSolution(value, tuple(witness), pivots)


# ---------- Silent-terminal regions

def _check_t(source: Source, t: TerminalSet) -> None:
    if t == 0:
        raise DomainError("T must be nonempty")
    if t >= 1 << source.m:
        raise DomainError(f"T is not a subset of {{1..{source.m}}}")


def rt_constraints(source: Source, t: TerminalSet, reduced: bool = False) -> LinearProgram:
    """
    Rate region for the terminals of T (every other terminal is silent).

    Full form: for every B ⊊ M meeting T, Σ_{i∈B∩T} R_i >= H(X_{B∩T} | X_{B^c}),
    keeping the largest right-hand side per support set. Reduced form (|T| = m-1,
    silent terminal u): Σ_{i∈B} R_i >= H(X_B | X_{T∖B}) for B ⊊ T, plus
    Σ_{i∈T} R_i >= H(X_T | X_u).
    """
    _check_t(source, t)
    m = source.m
    full = full_set(m)
    terminals = members(t)
    pos = {lab: k for k, lab in enumerate(terminals)}

    def coeffs(support: TerminalSet) -> tuple[int, ...]:
        row = [0] * len(terminals)
        for lab in members(support):
            row[pos[lab]] = 1
        return tuple(row)

    best: dict[TerminalSet, Value] = {}
    if reduced:
        if popcount(t) != m - 1:
            raise DomainError("the reduced region needs |T| = m-1")
        for b in range(1, t + 1):
            if b & ~t or b == t:
                continue
            best[b] = source._h(t) - source._h(t & ~b)
        u = full & ~t
        best[t] = source._h(full) - source._h(u)
    else:
        for b in range(1, full):
            support = b & t
            if not support:
                continue
            rest = full & ~b
            rhs = source._h(support | rest) - source._h(rest)
            if support not in best or rhs > best[support]:
                best[support] = rhs
    rows = [(coeffs(s), rhs) for s, rhs in sorted(best.items(), key=lambda kv: (popcount(kv[0]), members(kv[0])))]
    return LinearProgram(len(terminals), rows, tuple([1] * len(terminals)), tuple(terminals))


def rt_min(source: Source, t: TerminalSet, reduced: bool = False) -> Fraction:
    return simplex_min(rt_constraints(source, t, reduced)).optimum


def silent_capacity(source: Source, t: TerminalSet) -> Value:
    """I_T(X_M) = H(X_T) - R_T^min."""
    opt = rt_min(source, t)
    if source.exact:
        return source._h(t) - opt
    return float(source._h(t)) - float(opt)


def _check_codim_one(source: Source, t: TerminalSet) -> None:
    _check_t(source, t)
    if source.m < 3 or popcount(t) != source.m - 1:
        raise DomainError("needs m >= 3 and |T| = m-1")


def rt_min_lower_bound(source: Source, t: TerminalSet) -> Value:
    """(1/(m-2)) Σ_{j∈T} H(X_{T∖j} | X_j)."""
    _check_codim_one(source, t)
    total = sum((source._h(t) - source._h(1 << (j - 1)) for j in members(t)), Fraction(0))
    return total / (source.m - 2)


def delta_t_singleton(source: Source, t: TerminalSet) -> Value:
    """Δ_T(S) = (Σ_{i∈T} H(X_i) - H(X_T)) / (m-2)."""
    _check_codim_one(source, t)
    total = sum((source._h(1 << (j - 1)) for j in members(t)), Fraction(0))
    return (total - source._h(t)) / (source.m - 2)


# ---------- Omnivocality

class OmnivocalityKind(enum.Enum):
    REQUIRED = "OmnivocalityRequired"
    SILENCE_POSSIBLE = "SilencePossible"

    def __str__(self):
        return self.value


@dataclass
class SilentEntry:
    silent: int
    talkers: TerminalSet
    capacity: Value
    gap: Value
    rt_min: Fraction
    lower_bound: Value
    delta_t: Value


@dataclass
class SilentReport:
    m: int
    sk_capacity: Value
    entries: list[SilentEntry]
    verdict: OmnivocalityKind
    silent_terminals: list[int]
    type_s: TypeSKind
    lifted: bool = False
    notes: list[str] = field(default_factory=list)

    def render(self) -> str:
        head = f"{self.verdict}"
        if self.verdict is OmnivocalityKind.SILENCE_POSSIBLE:
            head += ": " + ", ".join(f"terminal {u} may stay silent" for u in self.silent_terminals)
        lines = [head, f"I(X_M)={format_value(self.sk_capacity)} ({self.type_s})"]
        for e in self.entries:
            rel = "<" if compare_values(e.gap, 0) > 0 else "="
            lines.append(
                f"  I_{{M∖{e.silent}}}={format_value(e.capacity)} {rel} {format_value(self.sk_capacity)}"
                f"  R_T^min={format_value(e.rt_min)} >= {format_value(e.lower_bound)}"
                f"  Δ_T(S)={format_value(e.delta_t)}"
            )
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _cross_check(source: Source, margin: Value, message: str) -> None:
    if source.exact or abs(float(margin)) > TIE_GUARD:
        raise InconsistencyError(message)
    warnings.warn(message + " (float source near a Type-S tie)", RuntimeWarning, stacklevel=3)


def omnivocality_report(source: Source, tol: float = TOLERANCE) -> SilentReport:
    """Silent-terminal capacity for every (m-1)-subset and the omnivocality verdict."""
    m = source.m
    if m < 3:
        raise DomainError(f"omnivocality analysis requires m >= 3 (got m={m})")
    if m > MAX_LP_TERMINALS:
        raise DomainError(f"omnivocality analysis is limited to {MAX_LP_TERMINALS} terminals")
    full = full_set(m)
    cap = multipartite_info(source, tol).value
    entries = []
    for u in range(1, m + 1):
        t = full & ~(1 << (u - 1))
        opt = rt_min(source, t)
        i_t = source._h(t) - opt if source.exact else float(source._h(t)) - float(opt)
        entries.append(SilentEntry(u, t, i_t, cap - i_t, opt, rt_min_lower_bound(source, t), delta_t_singleton(source, t)))

    silent = [e.silent for e in entries if compare_values(e.gap, 0, tol) <= 0]
    verdict = OmnivocalityKind.SILENCE_POSSIBLE if silent else OmnivocalityKind.REQUIRED
    type_s = classify_type_s(source, tol)
    report = SilentReport(m, cap, entries, verdict, silent, type_s.kind, lifted=not source.exact)

    for e in entries:
        if compare_values(e.capacity, cap, tol) > 0:
            raise InconsistencyError(f"I_T for T={format_set(e.talkers)} exceeds I(X_M)")
        if compare_values(e.lower_bound, e.rt_min, tol) > 0:
            raise InconsistencyError(f"R_T^min lower bound exceeds the LP optimum for T={format_set(e.talkers)}")
        if compare_values(e.capacity, e.delta_t, tol) > 0:
            raise InconsistencyError(f"I_T exceeds Δ_T(S) for T={format_set(e.talkers)}")

    strict = type_s.kind is TypeSKind.STRICT_TYPE_S
    if strict and silent:
        _cross_check(source, type_s.margin, "strict Type-S source admits a silent terminal")
    if m == 3 and not strict and not silent:
        _cross_check(source, type_s.margin, "3-terminal source needs omnivocality but is not strict Type S")
    if m == 3:
        report.notes.append("m=3: omnivocality is required exactly when the source is strict Type S")
    elif not strict and not silent:
        report.notes.append("omnivocality required although the source is not strict Type S")
    if report.lifted:
        report.notes.append(f"entropies lifted to rationals with {LIFT_BITS} fractional bits")
    return report
