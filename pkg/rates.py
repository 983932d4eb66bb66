#!/usr/bin/env python3
"""
Secret-key capacity, communication for omniscience, and what can be said about
R_SK (the least public communication rate of a capacity-achieving protocol).

RskReport only states an exact R_SK where it is known in closed form: t-uniform Type-S PIN
models, graph PIN models (maximal iff Type S), and two terminals. Everything else
gets bounds.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from model_core import (
    TOLERANCE,
    ClubbedSource,
    DomainError,
    InconsistencyError,
    PinSource,
    Source,
    Value,
    compare_values,
    format_value,
    full_set,
    value_to_json,
)
from partition_engine import (
    TypeSKind,
    TypeSVerdict,
    classify_type_s,
    multipartite_info,
    pin_singleton_check,
)
from silent_lp import MAX_LP_TERMINALS, rt_constraints, rt_min, silent_capacity, simplex_min
from tree_protocol import Multigraph, sigma_rate

logger = logging.getLogger(__name__)


class NotTypeSError(DomainError):
    def __init__(self, verdict: TypeSVerdict):
        self.verdict = verdict
        super().__init__(f"source is {verdict.kind} (margin {format_value(verdict.margin)})")


class Maximality(enum.Enum):
    MAXIMAL = "Maximal"
    NOT_MAXIMAL = "NotMaximal"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


def sk_capacity(source: Source, tol: float = TOLERANCE) -> Value:
    """C(M) = I(X_M)."""
    return multipartite_info(source, tol).value


def r_co(source: Source, tol: float = TOLERANCE) -> Value:
    """R_CO = H(X_M) - I(X_M)."""
    return source._h(full_set(source.m)) - sk_capacity(source, tol)


def r_co_lp(source: Source) -> Value:
    """Minimum sum rate over the omniscience region, by exact LP."""
    if source.m > MAX_LP_TERMINALS:
        raise DomainError(f"the omniscience LP is limited to {MAX_LP_TERMINALS} terminals")
    opt = simplex_min(rt_constraints(source, full_set(source.m))).optimum
    return opt if source.exact else float(opt)


def r_sk_exact_uniform_pin(pin: PinSource) -> Fraction:
    """R_SK = R_CO = (m-t)/(m-1) |E| for a t-uniform Type-S PIN model."""
    t = pin.graph.uniformity()
    if t is None:
        raise DomainError("PIN model is not uniform")
    verdict = pin_singleton_check(pin)
    if not verdict.is_type_s:
        raise NotTypeSError(verdict)
    return Fraction((pin.m - t) * pin.graph.total_multiplicity, pin.m - 1)


@dataclass
class RskReport:
    m: int
    capacity: Value
    r_co: Value
    r_sk_exact: Value | None = None
    exact_tag: str | None = None
    upper_bounds: list[tuple[Value, str]] = field(default_factory=list)
    lower_bounds: list[tuple[Value, str]] = field(default_factory=list)
    maximality: Maximality = Maximality.UNKNOWN
    type_s: TypeSKind | None = None
    notes: list[str] = field(default_factory=list)

    def validate(self, tol: float = TOLERANCE) -> None:
        if self.r_sk_exact is None:
            return
        for bound, origin in self.upper_bounds:
            if compare_values(self.r_sk_exact, bound, tol) > 0:
                raise InconsistencyError(f"R_SK {format_value(self.r_sk_exact)} exceeds upper bound {origin}")
        for bound, origin in self.lower_bounds:
            if compare_values(self.r_sk_exact, bound, tol) < 0:
                raise InconsistencyError(f"R_SK {format_value(self.r_sk_exact)} below lower bound {origin}")

    def render(self) -> str:
        lines = [f"C(M)={format_value(self.capacity)}  R_CO={format_value(self.r_co)}"]
        if self.type_s is not None:
            lines.append(f"classification: {self.type_s}")
        if self.r_sk_exact is not None:
            lines.append(f"R_SK={format_value(self.r_sk_exact)} [{self.exact_tag}]")
        for bound, origin in self.upper_bounds:
            lines.append(f"  R_SK <= {format_value(bound)}  ({origin})")
        for bound, origin in self.lower_bounds:
            lines.append(f"  R_SK >= {format_value(bound)}  ({origin})")
        lines.append(f"maximality: {self.maximality}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "capacity": value_to_json(self.capacity),
            "r_co": value_to_json(self.r_co),
            "r_sk_exact": None if self.r_sk_exact is None else value_to_json(self.r_sk_exact),
            "exact_tag": self.exact_tag,
            "upper_bounds": [{"value": value_to_json(v), "origin": o} for v, o in self.upper_bounds],
            "lower_bounds": [{"value": value_to_json(v), "origin": o} for v, o in self.lower_bounds],
            "maximality": str(self.maximality),
            "type_s": None if self.type_s is None else str(self.type_s),
            "notes": list(self.notes),
        }


@dataclass
class OneTalkerBound:
    rate: Value
    talker: int | None

    @property
    def origin(self) -> str:
        if self.talker is None:
            return "omniscience (every terminal talks)"
        return f"terminal {self.talker} talks alone"


def one_talker_bound(source: Source, tol: float = TOLERANCE) -> OneTalkerBound:
    """
    Cheapest capacity-achieving protocol among "one terminal talks" and omniscience.

    A terminal i qualifies when I_{i}(X_M) = I(X_M); its minimum rate R_{i}^min is
    then achievable. Larger silent families are not searched.
    """
    if source.m > MAX_LP_TERMINALS:
        raise DomainError(f"limited to {MAX_LP_TERMINALS} terminals")
    cap = sk_capacity(source, tol)
    best = OneTalkerBound(r_co(source, tol), None)
    for i in range(1, source.m + 1):
        t = 1 << (i - 1)
        if compare_values(silent_capacity(source, t), cap, tol) < 0:
            continue
        rate = rt_min(source, t)
        rate = rate if source.exact else float(rate)
        if compare_values(rate, best.rate, tol) < 0:
            best = OneTalkerBound(rate, i)
    return best


def _two_terminal_report(source: Source) -> RskReport:
    h1, h2, h12 = source._h(1), source._h(2), source._h(3)
    cond12, cond21 = h12 - h2, h12 - h1
    cap = h1 + h2 - h12
    one_way = min(cond12, cond21)
    report = RskReport(2, cap, cond12 + cond21, one_way, "two-terminal one-way protocol")
    report.upper_bounds.append((one_way, "one terminal communicating suffices"))
    report.maximality = Maximality.MAXIMAL if compare_values(report.r_co, 0) == 0 else Maximality.NOT_MAXIMAL
    report.notes.append("one-way rate is an achievable upper bound that attains capacity")
    return report


def graph_rsk_report(pin: PinSource, tol: float = TOLERANCE) -> RskReport:
    """Graph PIN models: capacity is the tree packing rate and R_SK is maximal iff Type S."""
    if pin.graph.uniformity() != 2:
        raise DomainError("graph report needs a 2-uniform PIN model")
    m = pin.m
    if m < 3:
        raise DomainError("graph report needs m >= 3")
    graph = Multigraph.from_pin(pin)
    sigma_bar = sigma_rate(graph)
    info = multipartite_info(pin, tol)
    if sigma_bar != info.value:
        raise InconsistencyError(f"tree packing rate {sigma_bar} differs from I(X_M) {info.value}")
    total = pin.graph.total_multiplicity
    report = RskReport(m, sigma_bar, total - sigma_bar)
    report.upper_bounds.append((report.r_co, "R_CO"))
    report.upper_bounds.append(((m - 2) * sigma_bar, "tree packing protocol (m-2)σ̄"))
    verdict = pin_singleton_check(pin)
    report.type_s = verdict.kind
    if verdict.is_type_s:
        report.r_sk_exact = r_sk_exact_uniform_pin(pin)
        report.exact_tag = "Type-S uniform PIN: (m-t)/(m-1)|E|"
        report.lower_bounds.append((report.r_co, "CI(X_M) - I(X_M) with CI(X_M) = H(X_M)"))
        report.maximality = Maximality.MAXIMAL
    else:
        report.maximality = Maximality.NOT_MAXIMAL
        report.notes.append("not Type S, so R_SK <= (m-2)σ̄ < R_CO")
    report.validate(tol)
    return report


def _pin_t(source: Source) -> int | None:
    return source.graph.uniformity() if isinstance(source, PinSource) else None


def rsk_report(source: Source, tol: float = TOLERANCE) -> RskReport:
    """Everything known about R_SK for the given source."""
    m = source.m
    if m == 2:
        return _two_terminal_report(source)
    if m < 2:
        raise DomainError("needs at least 2 terminals")
    t = _pin_t(source)
    info = multipartite_info(source, tol)
    if compare_values(info.value, 0, tol) == 0:
        # no key to agree on, so no communication is needed
        report = RskReport(m, info.value, source._h(full_set(m)) - info.value, 0, "zero capacity")
        report.upper_bounds.append((report.r_co, "R_CO"))
        report.maximality = Maximality.MAXIMAL if compare_values(report.r_co, 0, tol) == 0 else Maximality.NOT_MAXIMAL
        report.notes.append("I(X_M) = 0")
        return report
    if t == 2:
        report = graph_rsk_report(source, tol)
    else:
        report = RskReport(m, info.value, source._h(full_set(m)) - info.value)
        report.upper_bounds.append((report.r_co, "R_CO"))
        if t is not None:
            verdict = pin_singleton_check(source)
            report.type_s = verdict.kind
            if verdict.is_type_s:
                report.r_sk_exact = r_sk_exact_uniform_pin(source)
                report.exact_tag = "Type-S uniform PIN: (m-t)/(m-1)|E|"
                report.lower_bounds.append((report.r_co, "CI(X_M) - I(X_M) with CI(X_M) = H(X_M)"))
                report.maximality = Maximality.MAXIMAL
            else:
                report.notes.append("maximality of non-Type-S hypergraph PIN models is open")
        else:
            report.type_s = classify_type_s(source, tol).kind
            report.notes.append("CI(X_M) - I(X_M) lower bound is not computable for this source")
    if m <= MAX_LP_TERMINALS:
        bound = one_talker_bound(source, tol)
        if bound.talker is not None:
            report.upper_bounds.append((bound.rate, bound.origin))
            if report.maximality is Maximality.UNKNOWN and compare_values(bound.rate, report.r_co, tol) < 0:
                report.maximality = Maximality.NOT_MAXIMAL
    report.validate(tol)
    return report


@dataclass
class ClubReport:
    i_left: Value
    i_right: Value
    i_club: Value
    argmin_intersect: bool
    equality: bool
    split_rate: Value
    r_co_club: Value
    type_s: TypeSKind | None

    @property
    def split_below_r_co(self) -> bool:
        return compare_values(self.split_rate, self.r_co_club) < 0


def _best_upper(report: RskReport) -> Value:
    if report.r_sk_exact is not None:
        return report.r_sk_exact
    return min((b for b, _ in report.upper_bounds), key=float)


def club_report(z: ClubbedSource, tol: float = TOLERANCE) -> ClubReport:
    """
    Superadditivity of I under clubbing, and the rate of running the two parts'
    protocols side by side compared with R_CO of the clubbed source.
    """
    left, right = multipartite_info(z.left, tol), multipartite_info(z.right, tol)
    both = multipartite_info(z, tol)
    intersect = bool({p.blocks for p in left.argmin} & {p.blocks for p in right.argmin})
    equality = compare_values(both.value, left.value + right.value, tol) == 0
    if compare_values(both.value, left.value + right.value, tol) < 0:
        raise InconsistencyError("I of the clubbed source is below the sum of its parts")
    if equality != intersect:
        message = "clubbing equality does not match argmin intersection"
        if z.exact:
            raise InconsistencyError(message)
        warnings.warn(message + " (float near-tie)", RuntimeWarning, stacklevel=2)
    split = _best_upper(rsk_report(z.left, tol)) + _best_upper(rsk_report(z.right, tol))
    r_co_club = z._h(full_set(z.m)) - both.value
    return ClubReport(left.value, right.value, both.value, intersect, equality, split, r_co_club,
                      classify_type_s(z, tol).kind if z.m >= 3 else None)
