import warnings
from fractions import Fraction

import pytest

from model_core import DomainError, Hypergraph, PinSource, full_set
from model_zoo import gen_chan, gen_complete_uniform, gen_omni_example, gen_sts
from partition_engine import TypeSKind, classify_type_s, multipartite_info
from silent_lp import (
    LinearProgram,
    LPInfeasibleError,
    LPUnboundedError,
    OmnivocalityKind,
    delta_t_singleton,
    lift,
    omnivocality_report,
    rt_constraints,
    rt_min,
    rt_min_lower_bound,
    silent_capacity,
    simplex_min,
)


def triangle():
    return PinSource(Hypergraph.from_lists(3, [[1, 2], [2, 3], [1, 3]]))


def test_single_variable_program():
    sol = simplex_min(LinearProgram(1, [((1,), 3)], (1,)))
    assert sol.optimum == 3
    assert sol.witness == (Fraction(3),)


def test_two_variable_program():
    lp = LinearProgram(2, [((1, 0), 1), ((0, 1), 1), ((1, 1), 3)], (1, 1))
    sol = simplex_min(lp)
    assert sol.optimum == 3
    assert lp.satisfied_by(sol.witness)


def test_negative_right_hand_side_needs_phase_one():
    sol = simplex_min(LinearProgram(1, [((-1,), -5)], (-1,)))
    assert sol.optimum == -5
    assert sol.witness == (Fraction(5),)


def test_infeasible_and_unbounded_programs():
    with pytest.raises(LPInfeasibleError):
        simplex_min(LinearProgram(1, [((-1,), 1)], (1,)))
    with pytest.raises(LPUnboundedError):
        simplex_min(LinearProgram(1, [((1,), 1)], (-1,)))


def test_program_shape_is_checked():
    with pytest.raises(DomainError):
        LinearProgram(2, [((1,), 1)], (1, 1))


def test_lift_is_dyadic():
    assert lift(0.5) == Fraction(1, 2)
    assert lift(Fraction(7, 3)) == Fraction(7, 3)
    assert (lift(0.1) * (1 << 40)).denominator == 1


def test_reduced_region_of_triangle():
    lp = rt_constraints(triangle(), 0b011, reduced=True)
    assert lp.rows == [((1, 0), 1), ((0, 1), 1), ((1, 1), 1)]
    assert lp.labels == (1, 2)


def test_omniscience_region_has_one_row_per_proper_subset():
    lp = rt_constraints(triangle(), full_set(3))
    assert len(lp.rows) == 6
    assert rt_min(triangle(), full_set(3)) == Fraction(3, 2)
    assert silent_capacity(triangle(), full_set(3)) == Fraction(3, 2)


def test_chan_silent_region():
    src = gen_chan(4)
    t = 0b1110
    lp = rt_constraints(src, t)
    described = [lp.describe_row(i) for i in range(len(lp.rows))]
    assert "R2 + R3 >= 4" in described
    assert "R4 >= 3" in described
    assert rt_min(src, t) == 7
    assert silent_capacity(src, t) == 2
    assert rt_min_lower_bound(src, t) == 7
    assert delta_t_singleton(src, t) == 2


def test_complete_graph_lower_bound():
    src = gen_complete_uniform(4, 2)
    t = 0b0111
    assert rt_min_lower_bound(src, t) == Fraction(9, 2)
    assert rt_min(src, t) == Fraction(9, 2)
    assert silent_capacity(src, t) == Fraction(3, 2)


def test_full_and_reduced_regions_agree(rng, random_pin):
    for _ in range(15):
        m = int(rng.integers(4, 6))
        src = random_pin(rng, m)
        for u in range(m):
            t = full_set(m) & ~(1 << u)
            assert rt_min(src, t) == rt_min(src, t, reduced=True)


def test_full_and_reduced_regions_agree_on_pmfs(rng, random_pmf):
    for _ in range(5):
        src = random_pmf(rng, 4, 2)
        for u in range(4):
            t = full_set(4) & ~(1 << u)
            assert float(rt_min(src, t)) == pytest.approx(float(rt_min(src, t, reduced=True)), abs=1e-7)


def test_reduced_region_needs_codimension_one():
    with pytest.raises(DomainError):
        rt_constraints(gen_chan(4), 0b0011, reduced=True)


def test_one_talker_in_omni_example():
    assert silent_capacity(gen_omni_example(3, 0.5), 0b001) == pytest.approx(1.0)


def test_chan_requires_omnivocality():
    report = omnivocality_report(gen_chan(4))
    assert report.verdict is OmnivocalityKind.REQUIRED
    assert report.type_s is TypeSKind.TYPE_S
    assert [e.capacity for e in report.entries] == [2, 2, 2, 2]
    assert all(e.gap == 1 for e in report.entries)
    assert "OmnivocalityRequired" in report.render()


def test_sts_requires_omnivocality():
    report = omnivocality_report(gen_sts(7))
    assert report.verdict is OmnivocalityKind.REQUIRED
    assert report.type_s is TypeSKind.STRICT_TYPE_S


def test_omni_example_allows_silence():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = omnivocality_report(gen_omni_example(3, 0.5))
    assert report.verdict is OmnivocalityKind.SILENCE_POSSIBLE
    assert report.silent_terminals == [1, 2, 3]
    assert report.lifted
    assert "terminal 1 may stay silent" in report.render()


def test_omnivocality_needs_three_terminals():
    with pytest.raises(DomainError, match="requires m >= 3"):
        omnivocality_report(gen_complete_uniform(2, 2))


def test_codimension_one_bounds_on_random_pins(rng, random_pin):
    for _ in range(15):
        m = int(rng.integers(3, 6))
        src = random_pin(rng, m)
        cap = multipartite_info(src).value
        for u in range(m):
            t = full_set(m) & ~(1 << u)
            i_t = silent_capacity(src, t)
            assert i_t <= cap
            assert i_t <= delta_t_singleton(src, t)
            assert rt_min_lower_bound(src, t) <= rt_min(src, t)


def test_three_terminal_omnivocality_matches_strict_type_s(rng, random_pmf):
    checked = 0
    while checked < 40:
        src = random_pmf(rng, 3)
        verdict = classify_type_s(src)
        if abs(verdict.margin) <= 1e-6:
            continue
        report = omnivocality_report(src)
        strict = verdict.kind is TypeSKind.STRICT_TYPE_S
        assert (report.verdict is OmnivocalityKind.REQUIRED) == strict
        checked += 1
