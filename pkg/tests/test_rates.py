import warnings
from fractions import Fraction

import pytest

from model_core import DomainError, Hypergraph, PinSource, club
from model_zoo import (
    gen_chan,
    gen_complete_uniform,
    gen_cycle,
    gen_harary,
    gen_omni_example,
    gen_path,
    gen_random_graph,
    gen_sts,
)
from partition_engine import TypeSKind
from rates import (
    Maximality,
    NotTypeSError,
    club_report,
    graph_rsk_report,
    one_talker_bound,
    r_co,
    r_co_lp,
    r_sk_exact_uniform_pin,
    rsk_report,
    sk_capacity,
)
from tree_protocol import Multigraph, sigma_rate


def triangle():
    return PinSource(Hypergraph.from_lists(3, [[1, 2], [2, 3], [1, 3]]))


def pendant_triangle():
    return PinSource(Hypergraph.from_lists(4, [[1, 2], [2, 3], [1, 3], [3, 4]]))


def test_capacities():
    assert sk_capacity(gen_cycle(4)) == Fraction(4, 3)
    assert sk_capacity(gen_chan(5)) == 4
    assert sk_capacity(gen_complete_uniform(5, 3)) == 5
    assert sk_capacity(gen_omni_example(5, 0.5)) == pytest.approx(1.0)


def test_communication_for_omniscience():
    assert r_co(gen_complete_uniform(5, 3)) == 5
    assert r_co(gen_cycle(4)) == Fraction(8, 3)
    assert r_co(gen_omni_example(4, 0.5)) == pytest.approx(4.0)


@pytest.mark.parametrize("src", [triangle(), gen_complete_uniform(4, 2), gen_chan(4), gen_sts(7), pendant_triangle()])
def test_omniscience_lp_matches_closed_form(src):
    assert r_co_lp(src) == r_co(src)


def test_omniscience_lp_on_random_pmfs(rng, random_pmf):
    for _ in range(5):
        src = random_pmf(rng, 3)
        assert r_co_lp(src) == pytest.approx(r_co(src), abs=1e-7)


@pytest.mark.parametrize("pin,expected", [
    (gen_complete_uniform(5, 3), Fraction(5)),
    (gen_sts(7), Fraction(14, 3)),
    (gen_cycle(4), Fraction(8, 3)),
])
def test_exact_rate_for_type_s_uniform_pins(pin, expected):
    assert r_sk_exact_uniform_pin(pin) == expected


def test_exact_rate_refuses_other_models():
    with pytest.raises(NotTypeSError) as info:
        r_sk_exact_uniform_pin(pendant_triangle())
    assert info.value.verdict.kind is TypeSKind.NOT_TYPE_S
    with pytest.raises(DomainError, match="not uniform"):
        r_sk_exact_uniform_pin(PinSource(Hypergraph.from_lists(3, [[1, 2], [1, 2, 3]])))


def test_cycle_is_maximal():
    report = graph_rsk_report(gen_cycle(4))
    assert report.capacity == Fraction(4, 3)
    assert report.r_sk_exact == Fraction(8, 3)
    assert report.maximality is Maximality.MAXIMAL
    assert report.type_s is TypeSKind.STRICT_TYPE_S


def test_chan_graph_report():
    report = graph_rsk_report(gen_chan(4))
    assert report.capacity == 3
    assert report.r_co == 6
    assert (Fraction(6), "tree packing protocol (m-2)σ̄") in report.upper_bounds
    assert report.r_sk_exact == 6


def test_non_type_s_graph_is_not_maximal():
    report = graph_rsk_report(pendant_triangle())
    assert report.capacity == 1
    assert report.r_co == 3
    assert report.r_sk_exact is None
    assert report.maximality is Maximality.NOT_MAXIMAL
    assert min(b for b, _ in report.upper_bounds) == 2


def test_path_rate():
    report = rsk_report(gen_path(3))
    assert report.capacity == 1
    assert report.r_sk_exact == 1


def test_two_terminal_report():
    pin = PinSource(Hypergraph.from_lists(2, [[1, 2], [1]]))
    report = rsk_report(pin)
    assert report.capacity == 1
    assert report.r_co == 1
    assert report.r_sk_exact == 0
    assert report.exact_tag == "two-terminal one-way protocol"
    assert report.maximality is Maximality.NOT_MAXIMAL


def test_one_talker_bound_in_omni_example():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        bound = one_talker_bound(gen_omni_example(3, 0.5))
        report = rsk_report(gen_omni_example(3, 0.5))
    assert bound.talker == 1
    assert bound.rate == pytest.approx(1.0)
    assert report.maximality is Maximality.NOT_MAXIMAL
    assert report.r_sk_exact is None


def test_one_talker_bound_falls_back_to_omniscience():
    bound = one_talker_bound(gen_chan(4))
    assert bound.talker is None
    assert bound.rate == 6


def test_report_rendering_and_dict():
    report = rsk_report(gen_sts(7))
    text = report.render()
    assert "R_SK=14/3" in text
    assert "maximality: Maximal" in text
    doc = report.to_dict()
    assert doc["r_sk_exact"] == "14/3"
    assert doc["type_s"] == "StrictTypeS"


def test_graph_capacity_is_tree_packing_rate(rng):
    graphs = [gen_cycle(m) for m in range(3, 7)]
    graphs += [gen_harary(6, 3), gen_complete_uniform(5, 2), gen_chan(5)]
    graphs += [gen_random_graph(int(rng.integers(3, 7)), 8, rng) for _ in range(6)]
    for pin in graphs:
        rate = sigma_rate(Multigraph.from_pin(pin))
        assert sk_capacity(pin) == rate
        assert r_co(pin) == pin.graph.total_multiplicity - rate


def test_clubbing_is_superadditive(rng, random_pin):
    for _ in range(20):
        m = int(rng.integers(3, 6))
        z = club(random_pin(rng, m), random_pin(rng, m))
        report = club_report(z)
        assert report.i_club >= report.i_left + report.i_right
        assert report.equality == report.argmin_intersect


def test_clubbing_omni_example_with_triangle():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = club_report(club(gen_omni_example(3, 0.5), triangle()))
    assert report.i_club == pytest.approx(2.5)
    assert report.argmin_intersect
    assert report.split_rate == pytest.approx(2.5)
    assert report.r_co_club == pytest.approx(4.5)
    assert report.split_below_r_co
    assert report.type_s is TypeSKind.STRICT_TYPE_S
