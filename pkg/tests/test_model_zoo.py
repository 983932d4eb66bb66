import json

import numpy as np
import pytest

from model_core import DomainError, full_set, parse_model, serialize_model, terminal_set
from model_zoo import (
    FamilySpec,
    degrees,
    edge_connectivity,
    gen_chan,
    gen_complete_uniform,
    gen_cycle,
    gen_harary,
    gen_omni_example,
    gen_path,
    gen_random_graph,
    gen_sts,
    generate,
    is_sts,
    to_networkx,
)


@pytest.mark.parametrize("m,t,count", [(5, 3, 10), (4, 2, 6), (4, 4, 1), (6, 3, 20)])
def test_complete_uniform_edge_count(m, t, count):
    pin = gen_complete_uniform(m, t)
    assert len(pin.graph.edges) == count
    assert pin.graph.is_uniform(t)


def test_complete_uniform_is_lexicographic():
    pin = gen_complete_uniform(4, 3)
    assert [e for e, _ in pin.graph.edges] == [0b0111, 0b1011, 0b1101, 0b1110]


def test_complete_uniform_rejects_bad_t():
    with pytest.raises(DomainError):
        gen_complete_uniform(3, 4)


def test_cycle_and_path():
    assert [e for e, _ in gen_cycle(4).graph.edges] == [0b0011, 0b0110, 0b1100, 0b1001]
    assert degrees(gen_cycle(6)) == [2] * 6
    assert degrees(gen_path(4)) == [1, 2, 2, 1]


@pytest.mark.parametrize("m,k", [(6, 3), (6, 2), (8, 4), (7, 4), (5, 4)])
def test_harary_is_regular_and_k_connected(m, k):
    pin = gen_harary(m, k)
    assert degrees(pin) == [k] * m
    assert pin.graph.total_multiplicity == k * m // 2
    assert edge_connectivity(pin, "enumerate") == k
    assert edge_connectivity(pin, "flow") == k


def test_harary_two_is_the_cycle():
    assert set(gen_harary(5, 2).graph.edges) == set(gen_cycle(5).graph.edges)


@pytest.mark.parametrize("m", [4, 5, 6, 7])
def test_harary_full_degree_is_the_complete_graph(m):
    assert set(gen_harary(m, m - 1).graph.edges) == set(gen_complete_uniform(m, 2).graph.edges)


def test_harary_odd_degree_sum_rejected():
    with pytest.raises(DomainError, match="no k-regular graph exists"):
        gen_harary(5, 3)


@pytest.mark.parametrize("m", [3, 7, 9, 13, 15])
def test_sts_covers_every_pair_once(m):
    pin = gen_sts(m)
    triples = [e for e, _ in pin.graph.edges]
    assert len(triples) == m * (m - 1) // 6
    assert is_sts(triples, m)


@pytest.mark.parametrize("m", [4, 6, 8, 11])
def test_sts_rejects_inadmissible_orders(m):
    with pytest.raises(DomainError, match="gcd"):
        gen_sts(m)


def test_is_sts_detects_missing_pair():
    triples = [terminal_set(7, t) for t in [(1, 2, 3), (1, 4, 5), (1, 6, 7), (2, 4, 6), (2, 5, 7), (3, 4, 7)]]
    assert not is_sts(triples, 7)


def test_chan_multiplicities():
    pin = gen_chan(4)
    assert [k for _, k in pin.graph.edges] == [2, 2, 2, 3]
    assert pin.entropy(full_set(4)) == 9
    assert pin.entropy(0b0001) == 5
    assert gen_chan(5).graph.total_multiplicity == 16
    assert gen_chan(5).entropy(full_set(5)) == 16


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 1.0])
def test_omni_example_entropy_is_size_plus_binary_entropy(p):
    src = gen_omni_example(3, p)
    hp = 0.0 if p in (0.0, 1.0) else -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
    for mask in range(1, 8):
        assert src.entropy(mask) == pytest.approx(bin(mask).count("1") + hp)


def test_omni_example_rejects_bad_p():
    with pytest.raises(DomainError):
        gen_omni_example(3, 1.5)


def test_random_graph_is_connected(rng):
    for m in range(3, 8):
        pin = gen_random_graph(m, m + 2, rng)
        assert pin.graph.total_multiplicity == m + 2
        assert edge_connectivity(pin) >= 1


def test_connectivity_methods_agree_on_random_graphs(rng):
    for _ in range(10):
        pin = gen_random_graph(6, 9, rng)
        assert edge_connectivity(pin, "enumerate") == edge_connectivity(pin, "flow")


def test_networkx_view_carries_multiplicity():
    g = to_networkx(gen_chan(4))
    assert g[1][4]["capacity"] == 3
    with pytest.raises(DomainError):
        to_networkx(gen_sts(7))


@pytest.mark.parametrize("spec", [
    FamilySpec("complete", 5, t=3),
    FamilySpec("cycle", 5),
    FamilySpec("path", 4),
    FamilySpec("harary", 6, k=3),
    FamilySpec("sts", 7),
    FamilySpec("chan", 4),
    FamilySpec("omni", 3, p=0.5),
    FamilySpec("random", 5, n_edges=7, seed=3),
])
def test_generated_documents_reload(spec):
    src = generate(spec)
    back = parse_model(serialize_model(src))
    assert json.loads(serialize_model(back)) == json.loads(serialize_model(src))


def test_generate_validates_family_and_parameters():
    with pytest.raises(DomainError, match="unknown family"):
        generate(FamilySpec("petersen", 10))
    with pytest.raises(DomainError, match="needs parameter t"):
        generate(FamilySpec("complete", 5))
