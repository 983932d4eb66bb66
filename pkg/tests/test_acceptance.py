"""End-to-end checks on the reference models and randomized property sweeps."""

import warnings
from fractions import Fraction

import pytest

from certifier import Allocation, ci_identity_check, mi_bound_check, run_allocation, verify_claims, wyner_gap_check
from model_core import FunctionL, Hypergraph, PinSource, club, expand_pin, full_set
from model_zoo import (
    gen_chan,
    gen_complete_uniform,
    gen_cycle,
    gen_harary,
    gen_omni_example,
    gen_random_graph,
    gen_sts,
)
from partition_engine import (
    Partition,
    TypeSKind,
    classify_type_s,
    delta,
    enumerate_partitions,
    multipartite_info,
    pin_singleton_check,
)
from rates import club_report, r_co, rsk_report, sk_capacity
from silent_lp import (
    OmnivocalityKind,
    delta_t_singleton,
    omnivocality_report,
    rt_min,
    rt_min_lower_bound,
    silent_capacity,
)
from tree_protocol import Multigraph, run_protocol, sigma_rate, verify_agreement, verify_secrecy


@pytest.fixture(autouse=True)
def quiet_ties():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def test_complete_five_three_golden():
    pin = gen_complete_uniform(5, 3)
    assert sk_capacity(pin) == 5
    assert r_co(pin) == 5
    report = rsk_report(pin)
    assert report.r_sk_exact == 5
    assert classify_type_s(pin).kind is TypeSKind.STRICT_TYPE_S
    assert pin_singleton_check(pin).kind is TypeSKind.STRICT_TYPE_S


def test_steiner_seven_golden():
    pin = gen_sts(7)
    assert delta(pin, Partition.singleton(7)) == Fraction(7, 3)
    assert sk_capacity(pin) == Fraction(7, 3)
    report = rsk_report(pin)
    assert report.r_sk_exact == Fraction(14, 3)
    assert report.r_co == Fraction(14, 3)
    assert report.type_s is TypeSKind.STRICT_TYPE_S
    assert omnivocality_report(pin).verdict is OmnivocalityKind.REQUIRED


@pytest.mark.parametrize("m", [4, 5])
def test_chan_multigraph(m):
    pin = gen_chan(m)
    assert pin.entropy(full_set(m)) == m * (m - 2) + 1
    info = multipartite_info(pin)
    assert info.value == m - 1
    verdict = classify_type_s(pin)
    assert verdict.kind is TypeSKind.TYPE_S
    assert verdict.margin == 0
    merged = Partition.of(m, [[1, m]] + [[i] for i in range(2, m)])
    assert merged.blocks in {p.blocks for p in info.argmin}
    report = omnivocality_report(pin)
    assert report.verdict is OmnivocalityKind.REQUIRED
    assert all(e.capacity <= m - 2 for e in report.entries)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_omni_example_golden(m):
    src = gen_omni_example(m, 0.5)
    assert sk_capacity(src) == pytest.approx(1.0, abs=1e-9)
    assert r_co(src) == pytest.approx(m, abs=1e-9)
    for p in enumerate_partitions(m):
        assert delta(src, p) == pytest.approx(1.0, abs=1e-9)
    if m == 3:
        assert omnivocality_report(src).verdict is OmnivocalityKind.SILENCE_POSSIBLE


def test_graph_capacity_equals_packing_rate(rng):
    corpus = [gen_cycle(m) for m in range(3, 8)]
    corpus += [gen_harary(6, 3), gen_harary(7, 2), gen_harary(5, 4)]
    corpus += [gen_complete_uniform(m, 2) for m in range(3, 5)]
    for _ in range(12):
        m = int(rng.integers(3, 8))
        corpus.append(gen_random_graph(m, int(rng.integers(m - 1, 11)), rng))
    for pin in corpus:
        rate = sigma_rate(Multigraph.from_pin(pin))
        assert sk_capacity(pin) == rate
        assert r_co(pin) == pin.graph.total_multiplicity - rate


def test_cycle_protocol_end_to_end():
    c4 = Multigraph.from_pin(gen_cycle(4))
    for seed in range(10):
        run = run_protocol(c4, 3, seed)
        assert (run.key_length, run.transcript_length) == (4, 8)
        assert all(verify_agreement(run).values())
        audit = verify_secrecy(run)
        assert audit.h_key + audit.h_transcript == audit.joint_rank == 12


def test_allocation_certification():
    for m in range(3, 9):
        for t in range(2, m):
            assert verify_claims(m, t).passed
    log = run_allocation(5, 3).log
    for a in (Allocation(4, 1, 2), Allocation(5, 1, 3), Allocation(5, 7, 3)):
        assert a in log


def test_restricted_scan_matches_full_enumeration(rng, random_pmf, random_pin):
    for _ in range(200):
        src = random_pmf(rng, 4)
        assert classify_type_s(src).is_type_s == multipartite_info(src).singleton_minimizes
    for _ in range(100):
        src = random_pin(rng, int(rng.integers(3, 7)))
        verdict = classify_type_s(src)
        report = multipartite_info(src)
        assert verdict.is_type_s == report.singleton_minimizes
        unique = len(report.argmin) == 1 and report.argmin[0].is_singleton
        assert (verdict.kind is TypeSKind.STRICT_TYPE_S) == unique


def test_silent_regions_on_random_pins(rng, random_pin):
    for _ in range(20):
        m = int(rng.integers(4, 6))
        src = random_pin(rng, m)
        strict = classify_type_s(src).kind is TypeSKind.STRICT_TYPE_S
        ds = delta(src, Partition.singleton(m))
        for u in range(m):
            t = full_set(m) & ~(1 << u)
            opt = rt_min(src, t)
            assert opt == rt_min(src, t, reduced=True)
            assert rt_min_lower_bound(src, t) <= opt
            dt = delta_t_singleton(src, t)
            assert dt >= silent_capacity(src, t)
            if strict:
                assert dt < ds


def test_three_terminal_silence_matches_strictness(rng, random_pmf):
    checked = 0
    while checked < 100:
        src = random_pmf(rng, 3)
        verdict = classify_type_s(src)
        if abs(verdict.margin) <= 1e-6:
            continue
        required = omnivocality_report(src).verdict is OmnivocalityKind.REQUIRED
        assert required == (verdict.kind is TypeSKind.STRICT_TYPE_S)
        checked += 1


def test_function_bounds_on_uniform_pins(rng):
    pins = [
        PinSource(Hypergraph.from_lists(3, [[1, 2], [2, 3], [1, 3]])),
        gen_complete_uniform(4, 3),
        gen_complete_uniform(4, 2),
        gen_cycle(5),
    ]
    pmfs = [expand_pin(pin) for pin in pins]
    for k in range(500):
        pin, pmf = pins[k % len(pins)], pmfs[k % len(pins)]
        labels = FunctionL.random_surjection(pmf, int(rng.integers(2, 9)), rng)
        assert mi_bound_check(pin, labels, pmf).holds
        identity = ci_identity_check(pmf, labels)
        assert abs(identity.residual) <= 1e-9
        assert wyner_gap_check(pmf, labels).holds


def test_clubbing_on_random_pairs(rng, random_pin):
    for _ in range(50):
        m = int(rng.integers(3, 6))
        report = club_report(club(random_pin(rng, m), random_pin(rng, m)))
        assert report.i_club >= report.i_left + report.i_right
        assert report.equality == report.argmin_intersect


def test_clubbing_omni_example_with_triangle():
    triangle = PinSource(Hypergraph.from_lists(3, [[1, 2], [2, 3], [1, 3]]))
    report = club_report(club(gen_omni_example(3, 0.5), triangle))
    assert report.i_right == Fraction(3, 2)
    assert float(report.i_club) == pytest.approx(1 + float(report.i_right))
    assert report.type_s is TypeSKind.STRICT_TYPE_S
    assert report.split_below_r_co


@pytest.mark.parametrize("m", [4, 5])
def test_clubbing_omni_example_with_complete_graph(m):
    report = club_report(club(gen_omni_example(m, 0.5), gen_harary(m, m - 1)))
    assert float(report.i_left) == pytest.approx(1.0)
    assert float(report.i_club) == pytest.approx(1 + float(report.i_right))
    assert report.type_s is TypeSKind.STRICT_TYPE_S
