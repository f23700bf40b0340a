#!/usr/bin/env python3
"""
Test script for the operator matrices
Tests grid handling, matrix construction, application and the by-parts identities
"""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import config
from errors import DomainError, GridMismatchError, PairMismatchError, SizeLimitError
from frackernel import FracOrder
from numeric import Backend
from operators import (
    GridFunction, GridSpec, OperatorKind, apply, build_operator, composition_defect, matrix_rows,
    partner, transpose_defect, verify_by_parts,
)

F = Fraction
ORDERS = [F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4)]
PAIRS = [
    (OperatorKind.NABLA_LEFT_DIFF, OperatorKind.NABLA_RIGHT_DIFF),
    (OperatorKind.DELTA_LEFT_DIFF, OperatorKind.DELTA_RIGHT_DIFF),
]


def exact(mu):
    return FracOrder(F(mu), Backend.EXACT)


def floating(mu):
    return FracOrder(F(mu), Backend.FLOAT)


def as_lists(matrix):
    return [list(row) for row in matrix.entries]


# Grid

def test_grid_points():
    grid = GridSpec(0, 4)
    assert grid.n == 3
    assert grid.points == [1, 2, 3]
    assert grid.index_of(3) == 2
    assert GridSpec.of_size(8) == GridSpec(0, 9)


def test_grid_rejects_too_few_points():
    with pytest.raises(DomainError):
        GridSpec(0, 2)


def test_grid_rejects_nonpositive_step():
    with pytest.raises(DomainError):
        GridSpec(0, 5, 0)


def test_grid_function_length_checked():
    with pytest.raises(GridMismatchError):
        GridFunction.from_values(GridSpec(0, 4), [1, 2])


# build_operator

def test_delta_left_difference_classical():
    matrix = build_operator(OperatorKind.DELTA_LEFT_DIFF, exact(1), GridSpec(0, 4))
    assert as_lists(matrix) == [[1, 0, 0], [-1, 1, 0], [0, -1, 1]]


def test_nabla_left_sum_classical():
    matrix = build_operator(OperatorKind.NABLA_LEFT_SUM, exact(1), GridSpec(0, 4))
    assert as_lists(matrix) == [[1, 0, 0], [1, 1, 0], [1, 1, 1]]


def test_nabla_left_difference_half():
    matrix = build_operator(OperatorKind.NABLA_LEFT_DIFF, exact('1/2'), GridSpec(0, 4))
    assert as_lists(matrix) == [[1, 0, 0], [F(-1, 2), 1, 0], [F(-1, 8), F(-1, 2), 1]]


def test_right_kinds_are_transposes():
    grid = GridSpec(0, 7)
    for left_kind in (OperatorKind.NABLA_LEFT_SUM, OperatorKind.NABLA_LEFT_DIFF, OperatorKind.DELTA_LEFT_DIFF):
        left = build_operator(left_kind, exact('2/3'), grid)
        right = build_operator(partner(left_kind), exact('2/3'), grid)
        assert not right.kind.is_left
        assert transpose_defect(left, right) == 0
        assert np.array_equal(right.entries, left.entries.T)


def test_gl_scaling_by_step():
    grid = GridSpec(0, 4, F(1, 4))
    matrix = build_operator(OperatorKind.DELTA_LEFT_DIFF, exact('1/2'), grid)
    # (1/4) ** (-1/2) = 2
    assert matrix.entries[0, 0] == 2
    assert matrix.entries[1, 0] == -1


def test_gl_scaling_irrational_in_exact_backend():
    with pytest.raises(DomainError, match='float backend'):
        build_operator(OperatorKind.DELTA_LEFT_DIFF, exact('1/2'), GridSpec(0, 4, 2))
    matrix = build_operator(OperatorKind.DELTA_LEFT_DIFF, floating('1/2'), GridSpec(0, 4, 2))
    assert matrix.entries[0, 0] == pytest.approx(2 ** -0.5)


def test_rl_operators_ignore_step():
    coarse = build_operator(OperatorKind.NABLA_LEFT_DIFF, exact('1/2'), GridSpec(0, 5, 3))
    unit = build_operator(OperatorKind.NABLA_LEFT_DIFF, exact('1/2'), GridSpec(0, 5))
    assert np.array_equal(coarse.entries, unit.entries)


def test_size_limit(monkeypatch):
    monkeypatch.setattr(config, 'DENSE_LIMIT', 5)
    with pytest.raises(SizeLimitError):
        build_operator(OperatorKind.NABLA_LEFT_SUM, exact('1/2'), GridSpec.of_size(6))


def test_entries_are_read_only():
    matrix = build_operator(OperatorKind.NABLA_LEFT_SUM, exact('1/2'), GridSpec(0, 4))
    with pytest.raises(ValueError):
        matrix.entries[0, 0] = 3


# apply

def test_apply_examples():
    grid = GridSpec(0, 4)
    ones = GridFunction.constant(grid, 1)
    total = apply(build_operator(OperatorKind.NABLA_LEFT_SUM, exact(1), grid), ones)
    assert list(total.values) == [1, 2, 3]
    half_sum = apply(build_operator(OperatorKind.NABLA_LEFT_SUM, exact('1/2'), grid), ones)
    assert half_sum.at(3) == F(15, 8)
    half_diff = apply(build_operator(OperatorKind.DELTA_LEFT_DIFF, exact('1/2'), grid), ones)
    assert half_diff.at(3) == F(3, 8)


def test_apply_grid_mismatch():
    matrix = build_operator(OperatorKind.NABLA_LEFT_SUM, exact(1), GridSpec(0, 4))
    with pytest.raises(GridMismatchError):
        apply(matrix, GridFunction.constant(GridSpec(0, 5), 1))


# Integration by parts

@pytest.mark.parametrize('mu', ORDERS + [F(1)])
@pytest.mark.parametrize('n', [4, 8, 32])
@pytest.mark.parametrize('kinds', PAIRS)
def test_by_parts_exact(mu, n, kinds):
    grid = GridSpec.of_size(n)
    left = build_operator(kinds[0], exact(mu), grid)
    right = build_operator(kinds[1], exact(mu), grid)
    assert verify_by_parts(left, right, trials=20, seed=n) == 0


@pytest.mark.parametrize('mu', ORDERS)
@pytest.mark.parametrize('kinds', PAIRS)
def test_by_parts_float(mu, kinds):
    grid = GridSpec.of_size(32)
    left = build_operator(kinds[0], floating(mu), grid)
    right = build_operator(kinds[1], floating(mu), grid)
    assert verify_by_parts(left, right, trials=20, seed=3) <= 1e-12


def test_by_parts_sum_pair():
    grid = GridSpec.of_size(8)
    left = build_operator(OperatorKind.NABLA_LEFT_SUM, exact('1/3'), grid)
    right = build_operator(OperatorKind.NABLA_RIGHT_SUM, exact('1/3'), grid)
    assert verify_by_parts(left, right, trials=5, seed=0) == 0


def test_by_parts_rejects_mismatched_pairs():
    grid = GridSpec.of_size(4)
    left = build_operator(OperatorKind.NABLA_LEFT_DIFF, exact('1/2'), grid)
    with pytest.raises(PairMismatchError):
        verify_by_parts(left, build_operator(OperatorKind.DELTA_RIGHT_DIFF, exact('1/2'), grid), 3, 0)
    with pytest.raises(PairMismatchError):
        verify_by_parts(left, build_operator(OperatorKind.NABLA_RIGHT_DIFF, exact('1/3'), grid), 3, 0)
    with pytest.raises(GridMismatchError):
        verify_by_parts(left, build_operator(OperatorKind.NABLA_RIGHT_DIFF, exact('1/2'), GridSpec.of_size(4, a=1)), 3, 0)


def test_by_parts_seed_determinism():
    grid = GridSpec.of_size(16)
    left = build_operator(OperatorKind.DELTA_LEFT_DIFF, floating('3/4'), grid)
    right = build_operator(OperatorKind.DELTA_RIGHT_DIFF, floating('3/4'), grid)
    assert verify_by_parts(left, right, 10, 42) == verify_by_parts(left, right, 10, 42)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(ORDERS),
    st.lists(st.integers(min_value=-5, max_value=5), min_size=6, max_size=6),
    st.lists(st.integers(min_value=-5, max_value=5), min_size=6, max_size=6),
)
def test_by_parts_brute_force_sums(mu, u_values, v_values):
    """sum_s u(s) (left v)(s) == sum_s v(s) (right u)(s) by direct double summation"""
    grid = GridSpec.of_size(6)
    left = build_operator(OperatorKind.DELTA_LEFT_DIFF, exact(mu), grid)
    right = build_operator(OperatorKind.DELTA_RIGHT_DIFF, exact(mu), grid)
    lhs = sum(u_values[s] * left.entries[s, j] * v_values[j] for s in range(6) for j in range(6))
    rhs = sum(v_values[s] * right.entries[s, j] * u_values[j] for s in range(6) for j in range(6))
    assert lhs == rhs


# Composition

@pytest.mark.parametrize('mu', [F(1, 4), F(1, 2), F(3, 4), F(1)])
@pytest.mark.parametrize('n', [4, 16, 32])
def test_difference_after_sum_is_identity(mu, n):
    assert composition_defect(exact(mu), GridSpec.of_size(n)) == 0


# Rendering

def test_matrix_rows():
    matrix = build_operator(OperatorKind.NABLA_LEFT_DIFF, exact('1/2'), GridSpec(0, 4))
    assert matrix_rows(matrix) == [
        ['1', '1', '0', '0'],
        ['2', '-1/2', '1', '0'],
        ['3', '-1/8', '-1/2', '1'],
    ]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, '-v']))
