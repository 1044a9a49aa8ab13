import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oakernel import (
    NULL, HierarchyMismatch, InstanceError, UnknownObject, assignment_kernel,
    brute_force_assignment, greedy_assignment, histogram, induced_kernel, intersect,
    pad, random_hierarchy, solve_hungarian,
)
from oakernel.assignment import assignment_weight, cross_matrix, node_pair_counts, subtree_counts
from oakernel.hierarchy import Hierarchy, star_hierarchy

from oracles import all_bijections_value, max_assignment

seeds = st.integers(0, 2**32 - 1)


def random_sets(seed, h, max_size=8):
    rng = random.Random(seed)
    objs = h.objects
    X = [rng.choice(objs) for _ in range(rng.randint(0, max_size))]
    Y = [rng.choice(objs) for _ in range(rng.randint(0, max_size))]
    return X, Y


def test_pad_equal_sizes():
    assert pad([1, 2, 3], [4, 5, 6]) == ([1, 2, 3], [4, 5, 6])


def test_pad_adds_nulls():
    X, Y = pad([1, 2], [3, 4, 5, 6, 7])
    assert len(X) == len(Y) == 5
    assert X[2:] == [NULL] * 3


def test_hungarian_small():
    value, pairs = solve_hungarian([[3, 1], [2, 4]])
    assert value == 7
    assert set(pairs) == {(0, 0), (1, 1)}


def test_hungarian_empty_and_errors():
    assert solve_hungarian([]) == (0, [])
    with pytest.raises(InstanceError):
        solve_hungarian([[1, 2], [3]])
    with pytest.raises(InstanceError):
        solve_hungarian(np.ones((2, 3)))


def test_hungarian_fractions():
    M = [[Fraction(1, 3), Fraction(1, 2)], [Fraction(1, 4), Fraction(1, 5)]]
    value, _ = solve_hungarian(M)
    assert value == Fraction(1, 2) + Fraction(1, 4)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 9).flatmap(lambda n: st.lists(
    st.lists(st.integers(-20, 50), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_hungarian_matches_scipy(M):
    value, pairs = solve_hungarian(M)
    assert value == max_assignment(M)
    assert sorted(i for i, _ in pairs) == list(range(len(M)))
    assert sorted(j for _, j in pairs) == list(range(len(M)))
    assert sum(M[i][j] for i, j in pairs) == value


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(
    st.lists(st.floats(0, 10, allow_nan=False), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_hungarian_float_matches_brute_force(M):
    value, _ = solve_hungarian(M)
    assert value == pytest.approx(brute_force_assignment(M), abs=1e-9)


def test_hungarian_identity_optimal_for_strong_self():
    h = random_hierarchy(3)
    X = h.objects[:7]
    value, _ = solve_hungarian(cross_matrix(h, X, X))
    assert value == sum(induced_kernel(h, x, x) for x in X)
    assert value == all_bijections_value(cross_matrix(h, X, X))


def test_cross_matrix_padding_is_zero():
    h = star_hierarchy([2, 3])
    assert cross_matrix(h, [0], [0, 1]) == [[2, 0], [0, 0]]


# -- histograms ----------------------------------------------------------------

def test_empty_histogram():
    h = random_hierarchy(1)
    assert dict(histogram(h, [])) == {}


def test_single_histogram_is_root_path():
    h = Hierarchy([0, 0, 0, 1], [1, 2, 3, 5], {"x": 3, "y": 2})
    assert dict(histogram(h, ["x"])) == {0: 1, 1: 1, 3: 3}
    assert histogram(h, ["x"]).mass() == 5


def test_histogram_unknown_object():
    with pytest.raises(UnknownObject):
        histogram(star_hierarchy([1]), [7])


def test_figure_value():
    assert intersect([5, 8, 3, 2, 1], [5, 6, 1, 4, 2]) == 15


def test_intersect_disjoint_and_self():
    assert intersect({1: 3, 2: 4}, {5: 1}) == 0
    assert intersect({1: 3, 2: 4}, {1: 3, 2: 4}) == 7


def test_intersect_mismatch():
    a = histogram(star_hierarchy([1, 1]), [0])
    b = histogram(star_hierarchy([1, 1]), [0])
    with pytest.raises(HierarchyMismatch):
        intersect(a, b)
    with pytest.raises(HierarchyMismatch):
        intersect([1, 2], [1, 2, 3])


def test_subtree_counts():
    h = Hierarchy([0, 0, 0, 1, 1], [0, 1, 1, 2, 2], {"a": 3, "b": 4, "c": 2})
    assert subtree_counts(h, ["a", "a", "b", "c"]) == {0: 4, 1: 3, 2: 1, 3: 2, 4: 1}


# -- the assignment kernel -----------------------------------------------------

def test_assignment_self():
    h = random_hierarchy(5, max_multiplicity=2)
    X = h.objects
    assert assignment_kernel(h, X, X) == sum(induced_kernel(h, x, x) for x in X)


def test_assignment_singletons():
    h = random_hierarchy(9)
    for x in h.objects:
        for y in h.objects:
            assert assignment_kernel(h, [x], [y]) == induced_kernel(h, x, y)


@settings(max_examples=150, deadline=None)
@given(seeds, seeds)
def test_assignment_equals_hungarian(hseed, sseed):
    h = random_hierarchy(hseed, max_multiplicity=2)
    X, Y = random_sets(sseed, h)
    cross = cross_matrix(h, X, Y)
    value = assignment_kernel(h, X, Y)
    assert value == solve_hungarian(cross)[0] == max_assignment(cross)
    assert value == assignment_kernel(h, Y, X)


@settings(max_examples=150, deadline=None)
@given(seeds, seeds)
def test_greedy_is_optimal(hseed, sseed):
    h = random_hierarchy(hseed, max_multiplicity=2)
    X, Y = random_sets(sseed, h)
    pairs = greedy_assignment(h, X, Y)
    n = max(len(X), len(Y))
    assert sorted(i for i, _ in pairs) == list(range(n))
    assert sorted(j for _, j in pairs) == list(range(n))
    assert assignment_weight(h, X, Y, pairs) == assignment_kernel(h, X, Y)
    # every subtree matches as many pairs internally as it possibly can
    cx, cy = subtree_counts(h, X), subtree_counts(h, Y)
    inside = node_pair_counts(h, X, Y, pairs)
    for v in set(cx) & set(cy):
        assert inside.get(v, 0) == min(cx[v], cy[v])


def test_greedy_identical_sets_pair_on_leaves():
    h = random_hierarchy(21, max_multiplicity=2)
    X = h.objects
    Y = list(reversed(X))
    for i, j in greedy_assignment(h, X, Y):
        assert h.leaf(X[i]) == h.leaf(Y[j])


def test_greedy_disjoint_supports():
    h = star_hierarchy([1, 1, 1, 1])
    pairs = greedy_assignment(h, [0, 1], [2, 3])
    assert len(pairs) == 2
    assert assignment_weight(h, [0, 1], [2, 3], pairs) == 0
