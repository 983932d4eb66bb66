#!/usr/bin/env python3
"""
Source models and the entropy oracle every other module consumes.

Three source representations share one interface (`Source.entropy(mask)`):
- PinSource: hypergraph PIN model, exact integer entropies computed combinatorially
- PmfSource: explicit joint pmf over a finite product alphabet (floating point)
- ClubbedSource: two independent sources observed side by side (entropies add)

Subsets of terminals are int bitmasks (terminal i <-> bit i-1). Terminals are
1-indexed in documents and printed output, 0-indexed bit positions internally.

Scalars ("values") are either fractions.Fraction (exact) or float. Python's own
mixed arithmetic gives the degrade-to-float rule for free; float comparisons go
through the tolerance helpers below.
"""

from __future__ import annotations

import json
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
PMF_MASS_TOLERANCE = 1e-12
MAX_TERMINALS = 20
MAX_EXPANSION_BITS = 20
DENSE_SERIALIZE_LIMIT = 2 ** 16

Value = Union[Fraction, float]
TerminalSet = int


class DomainError(ValueError):
    """An operation was called outside its precondition."""


class InconsistencyError(RuntimeError):
    """A cross-check that theory guarantees has failed."""


class ModelParseError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedDocumentError(ModelParseError):
    pass


class TerminalLimitError(ModelParseError):
    pass


class PmfMassError(ModelParseError):
    pass


class EmptyHyperedgeError(ModelParseError):
    pass


# ---------- Values

def is_exact(v: Value) -> bool:
    return isinstance(v, (Fraction, int))


def compare_values(a: Value, b: Value, tol: float = TOLERANCE) -> int:
    """Three-way compare; exact pairs compare exactly, anything float uses tol."""
    if is_exact(a) and is_exact(b):
        return (a > b) - (a < b)
    diff = float(a) - float(b)
    if abs(diff) <= tol:
        return 0
    return 1 if diff > 0 else -1


def values_close(a: Value, b: Value, tol: float = TOLERANCE) -> bool:
    return compare_values(a, b, tol) == 0


def format_value(v: Value) -> str:
    """Rationals print as "p/q (≈ float)", integers bare, floats with 9 digits."""
    if is_exact(v):
        v = Fraction(v)
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator} (≈ {float(v):.6g})"
    return f"{float(v):.9g}"


def value_to_json(v: Value) -> int | str | float:
    if is_exact(v):
        v = Fraction(v)
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return float(v)


def value_from_json(raw: int | str | float) -> Value:
    if isinstance(raw, float):
        return raw
    return Fraction(raw)


# ---------- Terminal sets

def full_set(m: int) -> TerminalSet:
    return (1 << m) - 1


def terminal_set(m: int, members: Iterable[int]) -> TerminalSet:
    """Bitmask from 1-indexed terminal labels."""
    mask = 0
    for i in members:
        if not 1 <= i <= m:
            raise DomainError(f"terminal {i} outside 1..{m}")
        mask |= 1 << (i - 1)
    return mask


def members(mask: TerminalSet) -> list[int]:
    """1-indexed terminal labels in ascending order."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def bit_positions(mask: TerminalSet) -> list[int]:
    return [i - 1 for i in members(mask)]


def popcount(mask: TerminalSet) -> int:
    return bin(mask).count("1")


def format_set(mask: TerminalSet) -> str:
    return "{" + ",".join(str(i) for i in members(mask)) + "}"


def _check_subset(m: int, mask: TerminalSet, name: str = "A") -> None:
    if mask < 0 or mask >= 1 << m:
        raise DomainError(f"{name} is not a subset of {{1..{m}}}")


# ---------- Hypergraphs

@dataclass(frozen=True)
class Hypergraph:
    """Multiset of hyperedges; each entry is (members mask, multiplicity)."""

    m: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not 1 <= self.m <= MAX_TERMINALS:
            raise DomainError(f"m={self.m} outside 1..{MAX_TERMINALS}")
        merged: dict[int, int] = {}
        for mask, mult in self.edges:
            if mask == 0:
                raise DomainError("empty hyperedge")
            _check_subset(self.m, mask, "hyperedge")
            if mult < 1:
                raise DomainError(f"multiplicity {mult} of {format_set(mask)} must be positive")
            merged[mask] = merged.get(mask, 0) + mult
        object.__setattr__(self, "edges", tuple(merged.items()))

    @classmethod
    def from_lists(cls, m: int, edge_lists: Iterable[Iterable[int]], mults: Optional[Iterable[int]] = None) -> "Hypergraph":
        edge_lists = [list(e) for e in edge_lists]
        mults = list(mults) if mults is not None else [1] * len(edge_lists)
        if len(mults) != len(edge_lists):
            raise DomainError("one multiplicity per hyperedge required")
        return cls(m, tuple((terminal_set(m, e), k) for e, k in zip(edge_lists, mults)))

    @property
    def total_multiplicity(self) -> int:
        return sum(k for _, k in self.edges)

    def uniformity(self) -> int | None:
        """t if every hyperedge has cardinality t, else None."""
        sizes = {popcount(mask) for mask, _ in self.edges}
        return sizes.pop() if len(sizes) == 1 else None

    def is_uniform(self, t: int) -> bool:
        return self.uniformity() == t

    def edge_instances(self, n: int = 1) -> list[int]:
        """Edge copies of the n-fold hypergraph, copy-major then input order."""
        return [mask for _ in range(n) for mask, k in self.edges for _ in range(k)]


# ---------- Sources

class Source(ABC):
    m: int

    @property
    @abstractmethod
    def exact(self) -> bool:
        ...

    @abstractmethod
    def _h(self, mask: TerminalSet) -> Value:
        """Joint entropy of X_mask in bits; 0 for the empty set."""

    def entropy(self, mask: TerminalSet) -> Value:
        if mask == 0:
            raise DomainError("entropy of the empty set is not defined here")
        _check_subset(self.m, mask)
        return self._h(mask)


class PinSource(Source):
    def __init__(self, graph: Hypergraph):
        self.graph = graph
        self.m = graph.m

    @property
    def exact(self) -> bool:
        return True

    def _h(self, mask: TerminalSet) -> Fraction:
        return Fraction(sum(k for e, k in self.graph.edges if e & mask))

    def __repr__(self):
        parts = [f"{format_set(e)}x{k}" if k > 1 else format_set(e) for e, k in self.graph.edges]
        return f"PinSource(m={self.m}, edges=[{', '.join(parts)}])"


class PmfSource(Source):
    """
    Joint pmf stored sparsely: one row per support point.

    outcomes: (N, m) int array, column i is the symbol of terminal i+1
    probs: (N,) float array
    """

    def __init__(self, alphabets: Iterable[int], outcomes: np.ndarray, probs: np.ndarray, edge_bits: int | None = None):
        self.alphabets = tuple(int(a) for a in alphabets)
        self.m = len(self.alphabets)
        if not 1 <= self.m <= MAX_TERMINALS:
            raise DomainError(f"m={self.m} outside 1..{MAX_TERMINALS}")
        self.outcomes = np.asarray(outcomes, dtype=np.int64).reshape(-1, self.m)
        self.probs = np.asarray(probs, dtype=np.float64).ravel()
        if self.outcomes.shape[0] != self.probs.shape[0]:
            raise DomainError("outcomes and probs disagree in length")
        if (self.probs < 0).any():
            raise DomainError("negative probability")
        mass = float(self.probs.sum())
        if abs(mass - 1.0) > PMF_MASS_TOLERANCE:
            raise DomainError(f"pmf mass {mass:g} ≠ 1")
        if (self.outcomes < 0).any() or (self.outcomes >= np.array(self.alphabets)).any():
            raise DomainError("outcome symbol outside its alphabet")
        # set by expand_pin: row r <-> edge-bit assignment r
        self.edge_bits = edge_bits
        self._cache: dict[int, float] = {}

    @classmethod
    def from_table(cls, table: np.ndarray) -> "PmfSource":
        """Dense table of shape alphabets (last terminal fastest when raveled)."""
        table = np.asarray(table, dtype=np.float64)
        idx = np.argwhere(table > 0)
        return cls(table.shape, idx, table[tuple(idx.T)])

    @property
    def exact(self) -> bool:
        return False

    @property
    def n_points(self) -> int:
        return self.probs.shape[0]

    def _joint_entropy(self, cols: list[int], labels: np.ndarray | None = None) -> float:
        keys = self.outcomes[:, cols]
        if labels is not None:
            keys = np.column_stack([keys, labels])
        if keys.shape[1] == 0:
            return 0.0
        _, inverse = np.unique(keys, axis=0, return_inverse=True)
        marginal = np.bincount(inverse.ravel(), weights=self.probs)
        marginal = marginal[marginal > 0]
        return float(max(0.0, -(marginal * np.log2(marginal)).sum()))

    def _h(self, mask: TerminalSet) -> float:
        if mask == 0:
            return 0.0
        if mask not in self._cache:
            self._cache[mask] = self._joint_entropy(bit_positions(mask))
        return self._cache[mask]

    def entropy_with_label(self, mask: TerminalSet, labels: np.ndarray) -> float:
        """H(X_mask, L) for a label column aligned with the support rows."""
        return self._joint_entropy(bit_positions(mask), labels)

    def table(self) -> np.ndarray:
        table = np.zeros(self.alphabets)
        np.add.at(table, tuple(self.outcomes.T), self.probs)
        return table

    def __repr__(self):
        return f"PmfSource(m={self.m}, alphabets={self.alphabets}, support={self.n_points})"


class ClubbedSource(Source):
    def __init__(self, left: Source, right: Source):
        self.left = left
        self.right = right
        self.m = left.m

    @property
    def exact(self) -> bool:
        return self.left.exact and self.right.exact

    def _h(self, mask: TerminalSet) -> Value:
        return self.left._h(mask) + self.right._h(mask)

    def __repr__(self):
        return f"ClubbedSource({self.left!r}, {self.right!r})"


# ---------- Entropy oracle

def entropy(source: Source, a: TerminalSet) -> Value:
    return source.entropy(a)


def conditional_entropy(source: Source, a: TerminalSet, b: TerminalSet) -> Value:
    """H(X_A | X_B) = H(X_{A∪B}) - H(X_B)."""
    if a == 0:
        raise DomainError("A must be nonempty")
    _check_subset(source.m, a)
    _check_subset(source.m, b, "B")
    if a & b:
        raise DomainError(f"A={format_set(a)} and B={format_set(b)} overlap")
    return source._h(a | b) - source._h(b)


def mutual_information(source: Source, a: TerminalSet, b: TerminalSet) -> Value:
    if a == 0 or b == 0:
        raise DomainError("A and B must be nonempty")
    _check_subset(source.m, a)
    _check_subset(source.m, b, "B")
    if a & b:
        raise DomainError(f"A={format_set(a)} and B={format_set(b)} overlap")
    return source._h(a) + source._h(b) - source._h(a | b)


def club(left: Source, right: Source) -> ClubbedSource:
    if left.m != right.m:
        raise DomainError(f"cannot club sources on {left.m} and {right.m} terminals")
    return ClubbedSource(left, right)


def is_isentropic(source: Source, tol: float = TOLERANCE) -> bool:
    """True if H(X_A) depends only on |A|."""
    by_size: dict[int, Value] = {}
    for mask in range(1, 1 << source.m):
        h = source._h(mask)
        k = popcount(mask)
        if k in by_size:
            if not values_close(by_size[k], h, tol):
                return False
        else:
            by_size[k] = h
    return True


def expand_pin(pin: PinSource, n: int = 1) -> PmfSource:
    """
    Explicit joint pmf of a PIN model's n-fold realisation.

    Row r of the support is the edge-bit assignment r: bit j of r is the bit
    carried by edge instance j (order of Hypergraph.edge_instances). Terminal i
    observes its incident edge bits packed low-id-first into one symbol.
    """
    instances = pin.graph.edge_instances(n)
    n_bits = len(instances)
    if n_bits > MAX_EXPANSION_BITS:
        raise DomainError(f"{n_bits} edge bits exceed the expansion limit of {MAX_EXPANSION_BITS}")
    rows = np.arange(1 << n_bits, dtype=np.int64)
    outcomes = np.zeros((rows.shape[0], pin.m), dtype=np.int64)
    alphabets = []
    for i in range(pin.m):
        incident = [j for j, mask in enumerate(instances) if mask >> i & 1]
        for k, j in enumerate(incident):
            outcomes[:, i] |= ((rows >> j) & 1) << k
        alphabets.append(1 << len(incident))
    probs = np.full(rows.shape[0], 1.0 / rows.shape[0])
    return PmfSource(alphabets, outcomes, probs, edge_bits=n_bits)


# ---------- Functions of the source

@dataclass(frozen=True)
class FunctionL:
    """A finite-valued function of X_M, tabulated on the support rows of a PmfSource."""

    labels: np.ndarray
    name: str = "L"

    @classmethod
    def constant(cls, source: PmfSource) -> "FunctionL":
        return cls(np.zeros(source.n_points, dtype=np.int64), "constant")

    @classmethod
    def identity(cls, source: PmfSource) -> "FunctionL":
        return cls(np.arange(source.n_points, dtype=np.int64), "identity")

    @classmethod
    def from_rows(cls, source: PmfSource, fn: Callable[[int, tuple[int, ...]], int], name: str = "L") -> "FunctionL":
        labels = [fn(r, tuple(int(x) for x in row)) for r, row in enumerate(source.outcomes)]
        return cls(np.asarray(labels, dtype=np.int64), name)

    @classmethod
    def edge_bits(cls, source: PmfSource, ids: Iterable[int], combine: str = "xor") -> "FunctionL":
        """Function of edge bits of an expanded PIN model (see expand_pin)."""
        if source.edge_bits is None:
            raise DomainError("edge-bit functions need a source built by expand_pin")
        ids = list(ids)
        if any(not 0 <= j < source.edge_bits for j in ids):
            raise DomainError(f"edge ids must lie in 0..{source.edge_bits - 1}")
        rows = np.arange(source.n_points, dtype=np.int64)
        bits = [(rows >> j) & 1 for j in ids]
        if combine == "xor":
            labels = np.bitwise_xor.reduce(bits, axis=0) if bits else np.zeros_like(rows)
        elif combine == "tuple":
            labels = sum((b << k for k, b in enumerate(bits)), np.zeros_like(rows))
        else:
            raise DomainError(f"unknown combine rule {combine!r}")
        return cls(labels, f"{combine}({','.join(map(str, ids))})")

    @classmethod
    def random_surjection(cls, source: PmfSource, size: int, rng: np.random.Generator) -> "FunctionL":
        labels = rng.integers(0, size, source.n_points)
        head = min(size, source.n_points)
        labels[:head] = rng.permutation(size)[:head]
        return cls(labels.astype(np.int64), f"random/{size}")

    def check(self, source: PmfSource) -> None:
        if self.labels.shape != (source.n_points,):
            raise DomainError(f"{self.name} is not tabulated on the {source.n_points} support rows")


# ---------- Model documents

def _line_of(text: str, needle: str, start: int = 0) -> int | None:
    pos = text.find(needle, start)
    return text.count("\n", 0, pos) + 1 if pos >= 0 else None


def _next_offset(text: str, needle: str, after: int) -> int:
    """Offset of the first needle past `after`, or `after` itself when none is left."""
    pos = text.find(needle, after + 1)
    return pos if pos >= 0 else after


def _parse_node(doc, text: str):
    if not isinstance(doc, dict):
        raise MalformedDocumentError("model document must be a JSON object", 1)
    kind = doc.get("type")
    m = doc.get("m")
    if kind not in ("pin", "pmf", "club"):
        raise MalformedDocumentError(f"unknown model type {kind!r}", _line_of(text, '"type"'))
    if not isinstance(m, int) or isinstance(m, bool):
        raise MalformedDocumentError("m must be an integer", _line_of(text, '"m"'))
    if m > MAX_TERMINALS:
        raise TerminalLimitError(f"m={m} > {MAX_TERMINALS}", _line_of(text, '"m"'))
    if m < 1:
        raise MalformedDocumentError(f"m={m} must be positive", _line_of(text, '"m"'))

    if kind == "pin":
        edges = doc.get("edges")
        if not isinstance(edges, list):
            raise MalformedDocumentError("pin model needs an edges list", _line_of(text, '"edges"'))
        entries = []
        cursor = text.find('"edges"')
        for j, edge in enumerate(edges):
            cursor = _next_offset(text, '"members"', cursor)
            line = _line_of(text, '"members"', cursor)
            if not isinstance(edge, dict) or not isinstance(edge.get("members"), list):
                raise MalformedDocumentError(f"edges[{j}] needs a members list", line)
            if not edge["members"]:
                raise EmptyHyperedgeError(f"edges[{j}] is an empty hyperedge", line)
            mult = edge.get("mult", 1)
            if not isinstance(mult, int) or mult < 1:
                raise MalformedDocumentError(f"edges[{j}] mult must be a positive integer", _line_of(text, '"mult"', cursor))
            try:
                entries.append((terminal_set(m, edge["members"]), mult))
            except (DomainError, TypeError) as e:
                raise MalformedDocumentError(f"edges[{j}]: {e}", line) from e
        return PinSource(Hypergraph(m, tuple(entries)))

    if kind == "pmf":
        alphabets = doc.get("alphabets")
        if not isinstance(alphabets, list) or len(alphabets) != m or any(not isinstance(a, int) or a < 1 for a in alphabets):
            raise MalformedDocumentError(f"alphabets must list {m} positive sizes", _line_of(text, '"alphabets"'))
        if "probs" in doc:
            probs = doc["probs"]
            size = math.prod(alphabets)
            if not isinstance(probs, list) or len(probs) != size:
                raise MalformedDocumentError(f"probs must hold {size} entries", _line_of(text, '"probs"'))
            table = np.asarray(probs, dtype=np.float64).reshape(alphabets)
            line = _line_of(text, '"probs"')
        elif "points" in doc:
            line = _line_of(text, '"points"')
            cursor = text.find('"points"')
            for j, pt in enumerate(doc["points"] if isinstance(doc["points"], list) else []):
                cursor = _next_offset(text, '"x"', cursor)
                x = pt.get("x") if isinstance(pt, dict) else None
                if not isinstance(x, list) or len(x) != m:
                    raise MalformedDocumentError(f"points[{j}].x must list {m} symbols", _line_of(text, '"x"', cursor))
            try:
                outcomes = np.asarray([list(pt["x"]) for pt in doc["points"]], dtype=np.int64)
                weights = np.asarray([pt["p"] for pt in doc["points"]], dtype=np.float64)
            except (KeyError, TypeError, ValueError) as e:
                raise MalformedDocumentError(f"points entries need x and p: {e}", line) from e
            table = None
        else:
            raise MalformedDocumentError("pmf model needs probs or points", _line_of(text, '"pmf"'))
        if table is not None:
            weights = table
        if (np.asarray(weights) < 0).any():
            raise MalformedDocumentError("negative probability", line)
        mass = float(np.asarray(weights).sum())
        if abs(mass - 1.0) > PMF_MASS_TOLERANCE:
            raise PmfMassError(f"pmf mass {mass:g} ≠ 1", line)
        try:
            if table is not None:
                return PmfSource.from_table(table)
            return PmfSource(alphabets, outcomes, weights)
        except ValueError as e:
            raise MalformedDocumentError(str(e), line) from e

    left = _parse_node(doc.get("left"), text)
    right = _parse_node(doc.get("right"), text)
    if left.m != m or right.m != m:
        raise MalformedDocumentError(f"clubbed parts must both have m={m}", _line_of(text, '"club"'))
    return club(left, right)


def parse_model(text: str) -> Source:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedDocumentError(f"invalid JSON: {e.msg}", e.lineno) from e
    return _parse_node(doc, text)


def model_to_dict(source: Source) -> dict:
    if isinstance(source, PinSource):
        edges = []
        for mask, k in source.graph.edges:
            entry = {"members": members(mask)}
            if k > 1:
                entry["mult"] = k
            edges.append(entry)
        return {"type": "pin", "m": source.m, "edges": edges}
    if isinstance(source, PmfSource):
        doc = {"type": "pmf", "m": source.m, "alphabets": list(source.alphabets)}
        if math.prod(source.alphabets) <= DENSE_SERIALIZE_LIMIT:
            doc["probs"] = [float(p) for p in source.table().ravel()]
        else:
            doc["points"] = [{"x": [int(x) for x in row], "p": float(p)} for row, p in zip(source.outcomes, source.probs)]
        return doc
    if isinstance(source, ClubbedSource):
        return {"type": "club", "m": source.m, "left": model_to_dict(source.left), "right": model_to_dict(source.right)}
    raise DomainError(f"cannot serialize {type(source).__name__}")


def serialize_model(source: Source) -> str:
    return json.dumps(model_to_dict(source), indent=1)


def load_model(path: str | Path) -> Source:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Model not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        return parse_model(text)
    except ModelParseError as e:
        raise type(e)(f"{path}: {e.message}", e.line) from e

