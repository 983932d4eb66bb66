#!/usr/bin/env python3
"""
Generators for the concrete model families used throughout the analysis.

Graph and hypergraph families come back as PinSource; the conditionally
independent example source comes back as a PmfSource. Constructions whose
defining property matters (Harary connectivity, Steiner pair coverage) are
verified after they are built rather than trusted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import networkx as nx
import numpy as np

from model_core import (
    DomainError,
    Hypergraph,
    InconsistencyError,
    PinSource,
    PmfSource,
    members,
    popcount,
)

logger = logging.getLogger(__name__)

CUT_ENUMERATION_LIMIT = 12


def _pin(m: int, edge_lists, mults=None) -> PinSource:
    return PinSource(Hypergraph.from_lists(m, edge_lists, mults))


def gen_complete_uniform(m: int, t: int) -> PinSource:
    """K_{m,t}: one hyperedge per t-subset, in lexicographic order."""
    if not 2 <= t <= m:
        raise DomainError(f"complete t-uniform hypergraph needs 2 <= t <= m (got m={m}, t={t})")
    return _pin(m, combinations(range(1, m + 1), t))


def gen_cycle(m: int) -> PinSource:
    if m < 3:
        raise DomainError(f"cycle needs m >= 3 (got {m})")
    return _pin(m, [(i, i + 1) for i in range(1, m)] + [(1, m)])


def gen_path(m: int) -> PinSource:
    if m < 2:
        raise DomainError(f"path needs m >= 2 (got {m})")
    return _pin(m, [(i, i + 1) for i in range(1, m)])


def degrees(pin: PinSource) -> list[int]:
    """Degree of each terminal 1..m counted with multiplicity."""
    return [sum(k for e, k in pin.graph.edges if e >> i & 1) for i in range(pin.m)]


def to_networkx(pin: PinSource) -> nx.Graph:
    """Weighted simple graph; capacity carries the edge multiplicity."""
    if pin.graph.uniformity() != 2:
        raise DomainError("only 2-uniform PIN models are graphs")
    g = nx.Graph()
    g.add_nodes_from(range(1, pin.m + 1))
    for mask, k in pin.graph.edges:
        u, v = members(mask)
        g.add_edge(u, v, capacity=k)
    return g


def _cut_weight(pin: PinSource, side: int) -> int:
    return sum(k for e, k in pin.graph.edges if e & side and e & ~side)


def edge_connectivity(pin: PinSource, method: str = "auto") -> int:
    """
    Minimum total multiplicity of hyperedges crossing a cut of the terminals.

    Args:
        pin: PIN model; the flow method only accepts graphs
        method: "enumerate" (all 2^(m-1)-1 cuts), "flow" (max-flow min-cut via
            networkx), or "auto" (enumerate up to CUT_ENUMERATION_LIMIT terminals)

    Returns:
        edge connectivity (0 for a disconnected model)
    """
    if pin.m < 2:
        raise DomainError("edge connectivity needs at least 2 terminals")
    if method == "auto":
        method = "enumerate" if pin.m <= CUT_ENUMERATION_LIMIT else "flow"
    if method == "enumerate":
        full = (1 << pin.m) - 1
        # terminal 1 on the fixed side
        return min(_cut_weight(pin, side) for side in range(1, full, 2))
    if method == "flow":
        g = to_networkx(pin)
        if not nx.is_connected(g):
            return 0
        return min(int(nx.minimum_cut_value(g, 1, v)) for v in range(2, pin.m + 1))
    raise DomainError(f"unknown connectivity method {method!r}")


def gen_harary(m: int, k: int) -> PinSource:
    """Circulant k-regular, k-edge-connected graph on m vertices."""
    if not 2 <= k < m:
        raise DomainError(f"Harary graph needs 2 <= k < m (got m={m}, k={k})")
    if k * m % 2:
        raise DomainError(f"no k-regular graph exists for k={k}, m={m} (k*m is odd)")
    pairs = set()
    for i in range(m):
        for d in range(1, k // 2 + 1):
            pairs.add(tuple(sorted((i, (i + d) % m))))
        if k % 2:
            pairs.add(tuple(sorted((i, (i + m // 2) % m))))
    pin = _pin(m, [(u + 1, v + 1) for u, v in sorted(pairs)])

    degs = degrees(pin)
    if any(d != k for d in degs):
        raise InconsistencyError(f"Harary({m},{k}) degrees {degs} are not all {k}")
    lam = edge_connectivity(pin)
    if lam != k:
        raise InconsistencyError(f"Harary({m},{k}) has edge connectivity {lam}, expected {k}")
    return pin


def is_sts(triples: list[int], m: int) -> bool:
    """True if every pair of 1..m lies in exactly one of the triple masks."""
    if any(popcount(t) != 3 for t in triples):
        return False
    cover = {}
    for t in triples:
        for pair in combinations(members(t), 2):
            cover[pair] = cover.get(pair, 0) + 1
    return len(cover) == math.comb(m, 2) and all(c == 1 for c in cover.values())


def _bose_triples(n: int) -> list[tuple[int, ...]]:
    # m = 3n, n odd; (x, i) -> 1 + x + n*i
    half = (n + 1) // 2

    def lab(x, i):
        return 1 + x + n * (i % 3)

    triples = [(lab(x, 0), lab(x, 1), lab(x, 2)) for x in range(n)]
    for x, y in combinations(range(n), 2):
        z = (x + y) * half % n
        for i in range(3):
            triples.append((lab(x, i), lab(y, i), lab(z, i + 1)))
    return triples


def _skolem_triples(n: int) -> list[tuple[int, ...]]:
    # m = 6n + 1 over Z_2n x Z_3 plus a point at infinity
    order = 2 * n
    inf = 6 * n + 1

    def lab(x, i):
        return 1 + x + order * (i % 3)

    def op(x, y):
        s = (x + y) % order
        return s // 2 if s % 2 == 0 else (s - 1) // 2 + n

    triples = [(lab(x, 0), lab(x, 1), lab(x, 2)) for x in range(n)]
    for x in range(n):
        for i in range(3):
            triples.append((inf, lab(x + n, i), lab(x, i + 1)))
    for x, y in combinations(range(order), 2):
        for i in range(3):
            triples.append((lab(x, i), lab(y, i), lab(op(x, y), i + 1)))
    return triples


def gen_sts(m: int) -> PinSource:
    """Steiner triple system on m points (Bose for m = 3 mod 6, Skolem for m = 1 mod 6)."""
    if m < 3 or math.gcd(m - 2, 6) != 1:
        raise DomainError(f"no Steiner triple system on {m} points: requires gcd(m-2,6)=1")
    triples = _bose_triples(m // 3) if m % 6 == 3 else _skolem_triples((m - 1) // 6)
    pin = _pin(m, triples)
    if len(pin.graph.edges) != m * (m - 1) // 6 or not is_sts([e for e, _ in pin.graph.edges], m):
        raise InconsistencyError(f"STS({m}) construction failed pair-coverage verification")
    return pin


def gen_chan(m: int) -> PinSource:
    """Path edges with m-2 copies each, closed by m-1 copies of {1,m}."""
    if m < 4:
        raise DomainError(f"this multigraph needs m >= 4 (got {m})")
    edges = [(i, i + 1) for i in range(1, m)] + [(1, m)]
    return _pin(m, edges, [m - 2] * (m - 1) + [m - 1])


def gen_omni_example(m: int, p: float) -> PmfSource:
    """
    X_i = (W, U_i) with W ~ Ber(p) shared and U_i independent uniform bits.

    Symbol of terminal i is 2*W + U_i, so every alphabet is {0,1,2,3} and
    H(X_A) = |A| + h(p).
    """
    if m < 2:
        raise DomainError(f"needs m >= 2 (got {m})")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p={p} outside [0,1]")
    u = np.arange(1 << m, dtype=np.int64)
    u_bits = (u[:, None] >> np.arange(m)) & 1
    outcomes, probs = [], []
    for w, pw in ((0, 1.0 - p), (1, p)):
        if pw > 0:
            outcomes.append(2 * w + u_bits)
            probs.append(np.full(u.shape[0], pw / u.shape[0]))
    return PmfSource([4] * m, np.vstack(outcomes), np.concatenate(probs))


def gen_random_graph(m: int, n_edges: int, rng: np.random.Generator) -> PinSource:
    """Connected random multigraph: random spanning tree plus uniformly drawn extra edges."""
    if m < 2:
        raise DomainError(f"needs m >= 2 (got {m})")
    if n_edges < m - 1:
        raise DomainError(f"a connected graph on {m} vertices needs at least {m - 1} edges")
    order = rng.permutation(m) + 1
    edges = [(int(order[j]), int(order[rng.integers(0, j)])) for j in range(1, m)]
    while len(edges) < n_edges:
        u, v = rng.choice(m, size=2, replace=False) + 1
        edges.append((int(u), int(v)))
    return _pin(m, edges)


@dataclass(frozen=True)
class FamilySpec:
    family: str
    m: int
    t: int | None = None
    k: int | None = None
    p: float | None = None
    n_edges: int | None = None
    seed: int = 0


def _need(spec: FamilySpec, name: str):
    value = getattr(spec, name)
    if value is None:
        raise DomainError(f"family {spec.family!r} needs parameter {name}")
    return value


FAMILIES: dict[str, Callable[[FamilySpec], object]] = {
    "complete": lambda s: gen_complete_uniform(s.m, _need(s, "t")),
    "cycle": lambda s: gen_cycle(s.m),
    "path": lambda s: gen_path(s.m),
    "harary": lambda s: gen_harary(s.m, _need(s, "k")),
    "sts": lambda s: gen_sts(s.m),
    "chan": lambda s: gen_chan(s.m),
    "omni": lambda s: gen_omni_example(s.m, _need(s, "p")),
    "random": lambda s: gen_random_graph(s.m, _need(s, "n_edges"), np.random.default_rng(s.seed)),
}


def generate(spec: FamilySpec):
    if spec.family not in FAMILIES:
        raise DomainError(f"unknown family {spec.family!r}; choose from {', '.join(FAMILIES)}")
    logger.debug("generating %s", spec)
    return FAMILIES[spec.family](spec)
