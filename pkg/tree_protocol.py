#!/usr/bin/env python3
"""
Spanning-tree packing and the XOR key-agreement protocol on graph PIN models.

Every edge instance of G^(n) carries one uniform bit. Each spanning tree of a
packing yields one key bit (the bit of its lowest-id edge); every vertex of tree
degree d broadcasts the d-1 XORs of consecutive incident edge bits (ascending id),
which is m-2 public bits per tree. Agreement and secrecy are checked exactly by
GF(2) linear algebra over the edge bits.
"""

from __future__ import annotations

import logging
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import networkx as nx
import numpy as np

from model_core import DomainError, PinSource, members
from partition_engine import enumerate_partitions

logger = logging.getLogger(__name__)

MAX_EDGE_INSTANCES = 64
MAX_PACKING_TERMINALS = 10


class GraphNotConnectedError(DomainError):
    pass


class PackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Multigraph:
    """Edge instances as 0-based vertex pairs; the list index is the edge id."""

    m: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_pin(cls, pin: PinSource) -> "Multigraph":
        if pin.graph.uniformity() != 2:
            raise DomainError("the tree protocol needs a 2-uniform PIN model (a graph)")
        pairs = []
        for mask in pin.graph.edge_instances(1):
            u, v = members(mask)
            pairs.append((u - 1, v - 1))
        return cls(pin.m, tuple(pairs))

    def incident(self, v: int) -> list[int]:
        return [j for j, e in enumerate(self.edges) if v in e]

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.m))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        return self.m > 0 and nx.is_connected(self.to_networkx())

    def require_connected(self) -> None:
        if self.m < 2:
            raise DomainError("needs at least 2 terminals")
        if not self.is_connected():
            raise GraphNotConnectedError("graph not connected")


def expand(graph: Multigraph, n: int) -> Multigraph:
    """G^(n): n copies of every edge, ids copy-major then original order."""
    if n < 1:
        raise DomainError(f"n must be positive (got {n})")
    if n * len(graph.edges) > MAX_EDGE_INSTANCES:
        raise DomainError(f"{n * len(graph.edges)} edge instances exceed {MAX_EDGE_INSTANCES}")
    return Multigraph(graph.m, graph.edges * n)


def _cut_ratios(graph: Multigraph) -> Iterator[tuple[int, int]]:
    """(edges crossing P, |P|-1) for every partition P of the vertices."""
    graph.require_connected()
    if graph.m > MAX_PACKING_TERMINALS:
        raise DomainError(f"packing numbers are limited to {MAX_PACKING_TERMINALS} terminals")
    weights: dict[tuple[int, int], int] = {}
    for e in graph.edges:
        weights[e] = weights.get(e, 0) + 1
    for p in enumerate_partitions(graph.m):
        block_of = [0] * graph.m
        for k, b in enumerate(p.blocks):
            for i in members(b):
                block_of[i - 1] = k
        crossing = sum(w for (u, v), w in weights.items() if block_of[u] != block_of[v])
        yield crossing, len(p) - 1


def nash_williams_sigma(graph: Multigraph) -> int:
    """Maximum number of edge-disjoint spanning trees, min_P floor(e_P / (|P|-1))."""
    return min(c // k for c, k in _cut_ratios(graph))


def sigma_rate(graph: Multigraph) -> Fraction:
    """Spanning-tree packing rate min_P e_P / (|P|-1), without the floor."""
    return min(Fraction(c, k) for c, k in _cut_ratios(graph))


@dataclass
class TreePacking:
    trees: list[tuple[int, ...]]

    def __len__(self):
        return len(self.trees)

    def is_valid(self, graph: Multigraph) -> bool:
        used: set[int] = set()
        for tree in self.trees:
            if len(tree) != graph.m - 1 or used & set(tree):
                return False
            used |= set(tree)
            if not Multigraph(graph.m, tuple(graph.edges[j] for j in tree)).is_connected():
                return False
        return True


def pack_trees(graph: Multigraph) -> TreePacking:
    """
    Edge-disjoint spanning trees of maximum cardinality by backtracking.

    Edges are taken in id order and either placed in a tree where they close no
    cycle or skipped; at most |E| - σ(m-1) edges may be skipped, and among empty
    trees only the first may receive an edge.
    """
    sigma = nash_williams_sigma(graph)
    m, n_edges = graph.m, len(graph.edges)
    need = m - 1
    slack = n_edges - sigma * need
    comps = [list(range(m)) for _ in range(sigma)]
    trees: list[list[int]] = [[] for _ in range(sigma)]

    def place(j: int, skipped: int) -> bool:
        if all(len(t) == need for t in trees):
            return True
        if j == n_edges:
            return False
        u, v = graph.edges[j]
        seen_empty = False
        for k in range(sigma):
            if len(trees[k]) == need:
                continue
            if not trees[k]:
                if seen_empty:
                    continue
                seen_empty = True
            cu, cv = comps[k][u], comps[k][v]
            if cu == cv:
                continue
            saved = comps[k]
            comps[k] = [cu if c == cv else c for c in saved]
            trees[k].append(j)
            if place(j + 1, skipped):
                return True
            trees[k].pop()
            comps[k] = saved
        if skipped < slack:
            return place(j + 1, skipped + 1)
        return False

    if not place(0, 0):
        raise PackingError(f"no packing of {sigma} spanning trees found")
    packing = TreePacking([tuple(t) for t in trees])
    if not packing.is_valid(graph):
        raise PackingError("constructed packing failed verification")
    logger.debug("packed %d trees into %d edges", sigma, n_edges)
    return packing


class Gf2Matrix:
    """Rows are linear forms over the edge bits, stored as int bitsets."""

    def __init__(self, rows: Iterable[int], width: int):
        self.rows = list(rows)
        self.width = width
        if any(r >> width for r in self.rows):
            raise DomainError(f"row wider than {width} bits")

    @staticmethod
    def _insert(basis: dict[int, int], v: int) -> bool:
        while v:
            lead = v.bit_length() - 1
            if lead not in basis:
                basis[lead] = v
                return True
            v ^= basis[lead]
        return False

    def _basis(self) -> dict[int, int]:
        basis: dict[int, int] = {}
        for r in self.rows:
            self._insert(basis, r)
        return basis

    def rank(self) -> int:
        return len(self._basis())

    def spans(self, v: int) -> bool:
        basis = self._basis()
        return not self._insert(basis, v)

    def stacked(self, other: "Gf2Matrix") -> "Gf2Matrix":
        return Gf2Matrix(self.rows + other.rows, max(self.width, other.width))


def _form(ids: Iterable[int]) -> int:
    out = 0
    for j in ids:
        out |= 1 << j
    return out


def _ids(form: int) -> list[int]:
    return [j for j in range(form.bit_length()) if form >> j & 1]


@dataclass(frozen=True)
class TranscriptBit:
    form: int
    value: int
    terminal: int
    tree: int


@dataclass
class ProtocolRun:
    seed: int
    n: int
    graph: Multigraph
    edge_bits: tuple[int, ...]
    trees: list[tuple[int, ...]]
    key_forms: list[int]
    key_values: list[int]
    transcript: list[TranscriptBit]
    recovered: dict[int, list[int]] = field(default_factory=dict)

    @property
    def key_length(self) -> int:
        return len(self.key_forms)

    @property
    def transcript_length(self) -> int:
        return len(self.transcript)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "m": self.graph.m,
            "edges": [[u + 1, v + 1] for u, v in self.graph.edges],
            "edge_bits": list(self.edge_bits),
            "trees": [list(t) for t in self.trees],
            "key": [{"form": _ids(f), "value": b} for f, b in zip(self.key_forms, self.key_values)],
            "transcript": [
                {"terminal": t.terminal, "tree": t.tree, "form": _ids(t.form), "value": t.value}
                for t in self.transcript
            ],
            "recovered": {str(k): v for k, v in self.recovered.items()},
        }


def _recover(graph: Multigraph, tree: tuple[int, ...], chains: dict[int, list[int]], observer: int, bits) -> dict[int, int]:
    """Edge values of one tree as learned by `observer` from its own edges and the XOR chains."""
    incident = {v: sorted(j for j in tree if v in graph.edges[j]) for v in range(graph.m)}
    known = {j: int(bits[j]) for j in incident[observer]}
    queue = deque([observer])
    seen = {observer}
    while queue:
        w = queue.popleft()
        chain = incident[w]
        xors = chains[w]
        start = next(k for k, j in enumerate(chain) if j in known)
        for k in range(start, len(chain) - 1):
            known.setdefault(chain[k + 1], known[chain[k]] ^ xors[k])
        for k in range(start, 0, -1):
            known.setdefault(chain[k - 1], known[chain[k]] ^ xors[k - 1])
        for j in chain:
            u, v = graph.edges[j]
            other = v if u == w else u
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return known


def run_protocol(graph: Multigraph, n: int, seed: int) -> ProtocolRun:
    """Sample edge bits, pack trees of G^(n), broadcast the XOR chains and recover keys."""
    g = expand(graph, n)
    g.require_connected()
    packing = pack_trees(g)
    rng = np.random.Generator(np.random.Philox(seed))
    bits = tuple(int(b) for b in rng.integers(0, 2, len(g.edges)))

    key_forms, key_values, transcript = [], [], []
    chains_per_tree = []
    for k, tree in enumerate(packing.trees):
        ref = min(tree)
        key_forms.append(1 << ref)
        key_values.append(bits[ref])
        chains: dict[int, list[int]] = {}
        for v in range(g.m):
            chain = sorted(j for j in tree if v in g.edges[j])
            chains[v] = []
            for a, b in zip(chain, chain[1:]):
                value = bits[a] ^ bits[b]
                chains[v].append(value)
                transcript.append(TranscriptBit(_form((a, b)), value, v + 1, k))
        chains_per_tree.append(chains)

    recovered = {}
    for v in range(g.m):
        recovered[v + 1] = [
            _recover(g, tree, chains, v, bits)[min(tree)]
            for tree, chains in zip(packing.trees, chains_per_tree)
        ]
    run = ProtocolRun(seed, n, g, bits, packing.trees, key_forms, key_values, transcript, recovered)
    logger.debug("protocol run: %d key bits, %d transcript bits", run.key_length, run.transcript_length)
    return run


def replay(doc: dict, graph: Multigraph) -> bool:
    """True if rerunning with the recorded seed and n reproduces the report bit for bit."""
    return run_protocol(graph, doc["n"], doc["seed"]).to_json() == doc


def verify_agreement(run: ProtocolRun) -> dict[int, bool]:
    """Terminal -> True iff every key form lies in the span of its edge bits and the transcript."""
    width = len(run.graph.edges)
    public = [t.form for t in run.transcript]
    verdict = {}
    for v in range(run.graph.m):
        own = [1 << j for j in run.graph.incident(v)]
        view = Gf2Matrix(own + public, width)
        verdict[v + 1] = all(view.spans(f) for f in run.key_forms)
    return verdict


@dataclass
class SecrecyAudit:
    h_key: int
    h_transcript: int
    joint_rank: int
    key_bits: int

    @property
    def independent(self) -> bool:
        return self.joint_rank == self.h_key + self.h_transcript

    @property
    def secure(self) -> bool:
        """I(K;F) = 0 and K uniform."""
        return self.independent and self.h_key == self.key_bits


def verify_secrecy(run: ProtocolRun) -> SecrecyAudit:
    width = len(run.graph.edges)
    k = Gf2Matrix(run.key_forms, width)
    f = Gf2Matrix([t.form for t in run.transcript], width)
    return SecrecyAudit(k.rank(), f.rank(), k.stacked(f).rank(), len(run.key_forms))


def floor_rate_check(graph: Multigraph, n: int) -> tuple[int, int, bool]:
    """Compare σ(G^(n)) with floor(n σ̄); a mismatch is reported, never raised."""
    sigma_n = nash_williams_sigma(expand(graph, n))
    expected = math.floor(n * sigma_rate(graph))
    ok = sigma_n == expected
    if not ok:
        warnings.warn(f"σ(G^({n}))={sigma_n} differs from floor(n·σ̄)={expected}", RuntimeWarning, stacklevel=2)
    return sigma_n, expected, ok
