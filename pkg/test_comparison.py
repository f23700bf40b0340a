#!/usr/bin/env python3
"""
Test script for generalized zeros and the Sturm comparison checks
Tests node detection, both predicates, pair construction and the classical suite
"""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comparison import (
    ComparisonProblem, NodeKind, NodeSet, Orientation, Placement, Status,
    build_comparison_pair, check_first_comparison, check_second_comparison, classical_suite,
    find_generalized_zeros, kth_order_flags, run_comparison,
)
from dfsl import Variant
from errors import DomainError, HypothesisUnmet, TrivialSolutionError
from frackernel import FracOrder
from numeric import Backend
from operators import GridFunction, GridSpec

F = Fraction


def grid_function(values):
    return GridFunction.from_values(GridSpec.of_size(len(values)), values)


def nodes(*positions):
    return NodeSet.from_positions(positions)


def classical_problem(k1, k2, q1=0, q2=0, n=9, **options):
    grid = GridSpec.of_size(n)
    mu = FracOrder(1, Backend.FLOAT)

    def constant(value):
        return GridFunction.constant(grid, value, Backend.FLOAT)

    return ComparisonProblem(
        Variant.GL, grid, mu, constant(1), constant(q1), constant(q2), constant(1), k1, k2, **options,
    )


# find_generalized_zeros

def test_alternating_signs_give_two_sign_changes():
    found = find_generalized_zeros(grid_function([1, -1, 1]))
    assert [node.kind for node in found] == [NodeKind.SIGN_CHANGE, NodeKind.SIGN_CHANGE]
    assert found.positions == [1.5, 2.5]


def test_exact_zero_suppresses_flanking_sign_change():
    found = find_generalized_zeros(grid_function([1, 0, -1]), tol=1e-10)
    assert len(found) == 1
    node = next(iter(found))
    assert node.kind is NodeKind.EXACT_ZERO
    assert node.position == 2.0


def test_no_zeros():
    assert len(find_generalized_zeros(grid_function([2, 1, 3]))) == 0


def test_interpolated_placement():
    found = find_generalized_zeros(grid_function([3, -1, 1]), placement=Placement.INTERPOLATED)
    assert found.positions == pytest.approx([1.75, 2.5])


def test_relative_tolerance():
    u = grid_function([F(1, 10 ** 12), 1, -1])
    assert next(iter(find_generalized_zeros(u, tol=1e-10))).kind is NodeKind.EXACT_ZERO
    assert next(iter(find_generalized_zeros(u, tol=0))).kind is NodeKind.SIGN_CHANGE


def test_trivial_function_rejected():
    with pytest.raises(TrivialSolutionError):
        find_generalized_zeros(grid_function([0, 0, 0]))


def test_negative_tolerance_rejected():
    with pytest.raises(DomainError):
        find_generalized_zeros(grid_function([1, -1, 1]), tol=-1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(min_value=-3, max_value=3), min_size=2, max_size=20))
def test_nodes_are_ordered_and_within_grid(values):
    if not any(values):
        return
    u = grid_function(values)
    found = find_generalized_zeros(u, tol=0)
    positions = found.positions
    assert positions == sorted(set(positions))
    assert all(u.grid.a < x < u.grid.b for x in positions)
    zeros = sum(1 for value in values if value == 0)
    assert sum(1 for node in found if node.kind is NodeKind.EXACT_ZERO) == zeros


# NodeSet

def test_node_set_requires_strict_order():
    with pytest.raises(DomainError):
        nodes(3, 2)
    with pytest.raises(DomainError):
        nodes(2, 2)


def test_from_positions_kinds():
    found = nodes(2, 4.5)
    assert [node.kind for node in found] == [NodeKind.EXACT_ZERO, NodeKind.SIGN_CHANGE]
    assert [node.to_dict()['points'] for node in found] == [[2], [4, 5]]


# First comparison

def test_first_comparison_holds():
    assert check_first_comparison(nodes(2, 5), nodes(3)).status is Status.HOLDS


def test_first_comparison_violated_with_witness():
    verdict = check_first_comparison(nodes(2, 5), nodes(6))
    assert verdict.status is Status.VIOLATED
    assert verdict.witness == {'pair': [2.0, 5.0]}
    assert not verdict.holds


def test_first_comparison_vacuous():
    verdict = check_first_comparison(nodes(4), nodes())
    assert verdict.status is Status.VACUOUSLY_HOLDS
    assert verdict.holds


def test_first_comparison_is_strict():
    assert check_first_comparison(nodes(2, 5), nodes(5)).status is Status.VIOLATED
    assert check_first_comparison(nodes(2, 5), nodes(2)).status is Status.VIOLATED


# Second comparison

def test_second_comparison_holds():
    assert check_second_comparison(nodes(3, 6), nodes(2, 5)).status is Status.HOLDS


def test_second_comparison_count_deficit():
    verdict = check_second_comparison(nodes(3, 6), nodes(2))
    assert verdict.status is Status.VIOLATED
    assert verdict.witness == {'count_u': 2, 'count_v': 1}


def test_second_comparison_strict_order():
    verdict = check_second_comparison(nodes(3), nodes(3))
    assert verdict.status is Status.VIOLATED
    assert verdict.witness['k'] == 1


def test_kth_order_flags():
    assert kth_order_flags(nodes(3, 6), nodes(2, 7)) == [True, False]


# Comparison pairs

def test_lower_index_first_is_unmet():
    with pytest.raises(HypothesisUnmet) as excinfo:
        build_comparison_pair(classical_problem(1, 2))
    assert excinfo.value.k_value > excinfo.value.m_value


def test_identical_problems_are_unmet():
    with pytest.raises(HypothesisUnmet):
        build_comparison_pair(classical_problem(3, 3))


def test_shifted_potential_same_index_is_unmet():
    """q2 = q1 + c moves lambda2 by c as well, so k == m"""
    with pytest.raises(HypothesisUnmet):
        build_comparison_pair(classical_problem(2, 2, q1=0.0, q2=0.5))


def test_classical_pair_oscillation_counts():
    pair = build_comparison_pair(classical_problem(3, 1))
    assert np.all(pair.k < pair.m)
    assert pair.lambda1 > pair.lambda2
    assert len(find_generalized_zeros(pair.u)) == 2
    assert len(find_generalized_zeros(pair.v)) == 0


def test_classical_report_verdicts():
    report = run_comparison(classical_problem(3, 1))
    assert report.verdict_first.holds
    assert report.verdict_second.status is Status.HOLDS
    as_stated = report.verdicts[Orientation.AS_STATED]
    assert as_stated['first'].status is Status.VIOLATED
    assert as_stated['second'].status is Status.VIOLATED


def test_as_stated_orientation_reports_literal_reading():
    report = run_comparison(classical_problem(3, 1, orientation=Orientation.AS_STATED))
    assert report.verdict_first is report.verdicts[Orientation.AS_STATED]['first']
    assert not report.verdict_first.holds


def test_report_json_is_deterministic():
    problem = classical_problem(5, 3)
    first = run_comparison(problem).to_json()
    second = run_comparison(problem).to_json()
    assert first == second
    record = json.loads(first)
    assert record['digest'] == problem.digest()
    assert record['counts'] == {'n_u': 4, 'n_v': 2}
    assert record['verdict_first']['status'] == 'Holds'
    assert 'runtime' not in first
    assert set(record['verdicts']) == {'oscillation', 'as_stated'}


def test_digest_tracks_problem():
    assert classical_problem(4, 2).digest() != classical_problem(4, 1).digest()
    assert classical_problem(4, 2).digest() == classical_problem(4, 2).digest()


# Classical conformance

def test_classical_suite_conformance():
    problems = classical_suite(100, seed=2024)
    assert len(problems) == 100
    for problem in problems:
        report = run_comparison(problem)
        assert report.verdict_first.holds, report.problem.to_dict()
        assert report.verdict_second.status is Status.HOLDS, report.problem.to_dict()
        assert len(report.zeros_u) >= len(report.zeros_v)


def test_classical_suite_is_seeded():
    first = [problem.digest() for problem in classical_suite(5, seed=1)]
    second = [problem.digest() for problem in classical_suite(5, seed=1)]
    assert first == second


def test_midpoint_placement_still_separates_classical_pairs():
    report = run_comparison(classical_problem(6, 3, placement=Placement.MIDPOINT))
    assert report.verdict_first.holds


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, '-v']))
