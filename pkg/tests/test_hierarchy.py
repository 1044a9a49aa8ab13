import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oakernel import (
    Hierarchy, InvalidKernelMatrix, NotStrongError, UnknownNode, UnknownObject,
    build_hierarchy, canonicalize, feature_map, image_size_bound, induced_kernel,
    induced_matrix, is_strong, lowest_common_ancestor, random_hierarchy,
)
from oakernel.hierarchy import Sqrt, dot, dumps, image_size, loads, star_hierarchy

from oracles import strong_violation

seeds = st.integers(0, 2**32 - 1)


# -- is_strong ---------------------------------------------------------------

def test_identity_is_strong():
    assert is_strong(np.eye(3, dtype=int)) == (True, None)


def test_constant_is_strong():
    assert is_strong([[1, 1], [1, 1]]) == (True, None)


def test_not_strong_witness():
    K = [[1, 0.2, 0.9], [0.2, 1, 0.8], [0.9, 0.8, 1]]
    ok, witness = is_strong(K)
    assert not ok
    assert witness == (0, 1, 2)


@pytest.mark.parametrize("K", [
    [[1, 2], [3, 1]],
    [[1, -1], [-1, 1]],
    [[1, 2, 3]],
])
def test_is_strong_rejects_invalid(K):
    with pytest.raises(InvalidKernelMatrix):
        is_strong(K)


def test_is_strong_exact_fractions():
    third = Fraction(1, 3)
    K = [[1, third, third], [third, 1, third], [third, third, 1]]
    assert is_strong(K)[0]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=6, max_size=6), st.lists(st.integers(0, 4), min_size=3, max_size=3))
def test_is_strong_matches_brute_force(upper, diag):
    # symmetric 3x3 with diagonal dominating each row
    a, b, c = upper[:3]
    d = [max(diag[0], a, b), max(diag[1], a, c), max(diag[2], b, c)]
    K = [[d[0], a, b], [a, d[1], c], [b, c, d[2]]]
    ok, witness = is_strong(K)
    expected = strong_violation(K)
    assert ok == (expected is None)
    if not ok:
        x, y, z = witness
        assert K[x][y] < min(K[x][z], K[z][y])


# -- induced kernel and LCA --------------------------------------------------

def test_star_induces_dirac():
    h = star_hierarchy([1, 1])
    assert induced_matrix(h).tolist() == [[1, 0], [0, 1]]


def test_induced_self_is_leaf_weight():
    h = random_hierarchy(7)
    for x in h.objects:
        assert induced_kernel(h, x, x) == h.weight[h.leaf(x)]


def test_unknown_object():
    h = star_hierarchy([1, 1])
    with pytest.raises(UnknownObject):
        induced_kernel(h, 0, 99)
    with pytest.raises(UnknownObject):
        feature_map(h, "nope")


def test_lca_examples():
    h = Hierarchy([0, 0, 1, 0], [1, 1, 2, 3], {"x": 2, "y": 3})
    assert lowest_common_ancestor(h, 2, 2) == 2
    assert lowest_common_ancestor(h, 2, 3) == 0
    assert lowest_common_ancestor(h, 1, 2) == 1
    assert lowest_common_ancestor(h, 2, 0) == 0
    with pytest.raises(UnknownNode):
        lowest_common_ancestor(h, 0, 4)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_random_induced_is_strong(seed):
    h = random_hierarchy(seed, max_multiplicity=2)
    K = induced_matrix(h).tolist()
    assert strong_violation(K) is None
    assert is_strong(K)[0]


def test_hierarchy_validation():
    with pytest.raises(ValueError):
        Hierarchy([0, 0], [2, 1], {0: 1})  # weight decreases
    with pytest.raises(ValueError):
        Hierarchy([0, 1], [0, 1], {0: 1})  # two roots
    with pytest.raises(ValueError):
        Hierarchy([0, 0, 0], [0, 1, 1], {0: 1})  # leaf without an object
    with pytest.raises(ValueError):
        Hierarchy([0, 0, 1], [0, 1, 1], {0: 1})  # object on an inner node


# -- build_hierarchy ---------------------------------------------------------

def test_build_single():
    h = build_hierarchy([[3]])
    assert h.node_count == 1
    assert h.root == h.leaf(0)
    assert h.weight == (3,)


def test_build_pair():
    h = build_hierarchy([[2, 1], [1, 3]])
    assert h.weight[h.root] == 1
    assert sorted(h.weight[h.leaf(x)] for x in (0, 1)) == [2, 3]
    assert h.parent[h.leaf(0)] == h.root == h.parent[h.leaf(1)]


def test_build_rejects_non_strong():
    K = [[1, 0.2, 0.9], [0.2, 1, 0.8], [0.9, 0.8, 1]]
    with pytest.raises(NotStrongError) as exc:
        build_hierarchy(K)
    x, y, z = exc.value.witness
    assert K[x][y] < min(K[x][z], K[z][y])


def test_build_merges_indistinguishable():
    h = build_hierarchy([[2, 2, 0], [2, 2, 0], [0, 0, 1]])
    assert h.leaf(0) == h.leaf(1)
    assert h.multiplicity[h.leaf(0)] == 2
    assert induced_matrix(h).tolist() == [[2, 2, 0], [2, 2, 0], [0, 0, 1]]


def test_build_with_object_names():
    h = build_hierarchy([[2, 1], [1, 3]], objects=["a", "b"])
    assert induced_kernel(h, "a", "b") == 1


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_build_round_trip(seed):
    h = random_hierarchy(seed, max_multiplicity=2)
    K = induced_matrix(h)
    rebuilt = build_hierarchy(K, objects=h.objects)
    assert np.array_equal(induced_matrix(rebuilt, h.objects), K)


def test_build_round_trip_floats():
    h = Hierarchy([0, 0, 0, 1, 1], [0.5, 1.25, 2.0, 1.5, 3.75], {0: 2, 1: 3, 2: 4})
    K = induced_matrix(h)
    assert np.array_equal(induced_matrix(build_hierarchy(K)), K)


# -- canonicalize ------------------------------------------------------------

def test_canonicalize_chain():
    h = Hierarchy([0, 0, 1], [1, 1, 2], {"x": 2})
    c = canonicalize(h)
    assert c.node_count == 2
    assert c.weight == (1, 2)
    assert c.parent == (0, 0)
    assert induced_kernel(c, "x", "x") == 2


def test_canonicalize_idempotent():
    h = Hierarchy([0, 0, 0], [0, 1, 2], {0: 1, 1: 2})
    c = canonicalize(h)
    assert c.parent == h.parent and c.weight == h.weight and c.leaf_of == h.leaf_of


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_canonicalize_preserves_kernel(seed):
    h = random_hierarchy(seed, chain_prob=0.3, max_multiplicity=2)
    c = canonicalize(h)
    assert np.array_equal(induced_matrix(c, h.objects), induced_matrix(h, h.objects))
    root = c.root
    for v in range(c.node_count):
        if c.children[v]:
            assert v == root or len(c.children[v]) > 1
            if v != root:
                assert c.weight[v] != c.weight[c.parent[v]]
    again = canonicalize(c)
    assert again.parent == c.parent and again.weight == c.weight


# -- feature map -------------------------------------------------------------

def test_feature_map_example():
    h = Hierarchy([0, 0, 0], [1, 2, 3], {"x": 1, "y": 2})
    fx, fy = feature_map(h, "x"), feature_map(h, "y")
    dense = lambda f: [float(f.get(v, 0)) for v in range(3)]
    assert dense(fx) == [1.0, 1.0, 0.0]
    assert dense(fy) == pytest.approx([1.0, 0.0, math.sqrt(2)])
    assert dot(fx, fy) == 1 == induced_kernel(h, "x", "y")
    assert dot(fx, fx) == 2 == induced_kernel(h, "x", "x")
    assert dot(fy, fy) == 3


def test_feature_map_support_is_root_path():
    h = random_hierarchy(11)
    for x in h.objects:
        f = feature_map(h, x)
        assert len(f) == h.depth[h.leaf(x)] + 1


def test_zero_omega_contributes_nothing():
    h = Hierarchy([0, 0, 1, 1], [0, 2, 2, 5], {0: 2, 1: 3})
    f = feature_map(h, 0)
    assert float(f[2]) == 0.0
    assert dot(f, feature_map(h, 1)) == 2


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_feature_map_dots_exact(seed):
    h = random_hierarchy(seed)
    objs = h.objects
    maps = {x: feature_map(h, x) for x in objs}
    for x in objs:
        for y in objs:
            assert dot(maps[x], maps[y]) == induced_kernel(h, x, y)


def test_sqrt_exactness():
    assert Sqrt(2) * Sqrt(2) == 2
    assert Sqrt(2) * Sqrt(8) == 4
    assert Sqrt(Fraction(1, 4)) * Sqrt(Fraction(1, 9)) == Fraction(1, 6)


# -- image size, PSD, serialization -------------------------------------------

def test_image_size_dirac():
    h = star_hierarchy([1] * 5)
    assert image_size(h) == 2
    assert image_size_bound(h)


def test_image_size_single():
    h = build_hierarchy([[4]])
    assert image_size(h) == 1
    assert image_size_bound(h)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_induced_matrix_is_psd(seed):
    h = random_hierarchy(seed, max_multiplicity=2)
    K = induced_matrix(h).astype(float)
    assert np.linalg.eigvalsh(K).min() >= -1e-9 * max(1.0, np.abs(K).max())
    assert image_size_bound(h)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_dumps_loads(seed):
    h = random_hierarchy(seed, max_multiplicity=3)
    back = loads(dumps(h))
    assert back.parent == h.parent and back.weight == h.weight and back.leaf_of == h.leaf_of


def test_dumps_format():
    h = Hierarchy([0, 0, 0], [0, 1, 1], {0: 1, 1: 2, 2: 2})
    assert dumps(h) == "0 0 0\n1 0 1 0 1\n2 0 1 1,2 2\n"
    with pytest.raises(ValueError):
        loads("0 0 0\n1 0 1 0 2\n")
