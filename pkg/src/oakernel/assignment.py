"""Optimal assignment kernels: the general Hungarian route and the histogram route.

For a strong base kernel given by a hierarchy, the best total similarity over
all bijections between two sets equals the histogram intersection of their
hierarchy histograms, ``sum_v min(omega(v) |X_v|, omega(v) |Y_v|)``.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Callable, Iterable, Sequence

import numpy as np

from oakernel.errors import HierarchyMismatch, InstanceError
from oakernel.hierarchy import Hierarchy, induced_kernel


class _Null:
    """Padding object; its kernel value with anything is zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NULL"

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()


def pad(X: Iterable, Y: Iterable):
    """Fill up the smaller multiset with ``NULL`` objects so both have equal size."""
    X, Y = list(X), list(Y)
    if len(X) < len(Y):
        X += [NULL] * (len(Y) - len(X))
    else:
        Y += [NULL] * (len(X) - len(Y))
    return X, Y


def _base_function(base) -> Callable:
    if isinstance(base, Hierarchy):
        return lambda x, y: induced_kernel(base, x, y)
    if callable(base):
        return base
    m = np.asarray(base)
    if m.ndim != 2:
        raise InstanceError("base kernel must be a hierarchy, a matrix, or a callable")
    rows = m.tolist()
    return lambda x, y: rows[x][y]


def cross_matrix(base, X: Iterable, Y: Iterable) -> list:
    """Square matrix ``[k(x, y)]`` over the padded sets; ``NULL`` rows/columns are zero.

    ``base`` is a :class:`Hierarchy`, a kernel matrix indexed by object id, or a
    callable ``k(x, y)``.
    """
    k = _base_function(base)
    X, Y = pad(X, Y)
    return [[0 if (x is NULL or y is NULL) else k(x, y) for y in Y] for x in X]


def solve_hungarian(weights) -> tuple:
    """Maximum-weight perfect matching on a square matrix.

    Returns ``(value, pairs)`` with ``pairs`` a list of ``(row, column)``. Uses the
    potential-based O(n^3) shortest augmenting path method on negated weights.
    Integer input stays integral and rational input (``Fraction`` entries) is
    solved in exact arithmetic.
    """
    if isinstance(weights, np.ndarray) and weights.dtype.kind in "iuf":
        m = weights
    else:
        rows = [list(r) for r in weights]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise InstanceError("assignment instance must be square")
        if all(isinstance(x, (int, np.integer)) for r in rows for x in r):
            m = np.array(rows, dtype=np.int64).reshape(n, n)
        elif all(isinstance(x, (int, float, np.integer, np.floating)) for r in rows for x in r):
            m = np.array(rows, dtype=np.float64).reshape(n, n)
        else:
            assignment = _hungarian_exact([[-x for x in r] for r in rows])
            pairs = list(enumerate(assignment))
            return sum((rows[i][j] for i, j in pairs), 0), pairs
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InstanceError(f"assignment instance must be square, got shape {m.shape}")
    assignment = _hungarian_numpy(-m)
    pairs = list(enumerate(assignment))
    value = sum((m[i, j].item() for i, j in pairs), 0)
    return value, pairs


def _hungarian_numpy(cost: np.ndarray) -> list:
    n = cost.shape[0]
    if n == 0:
        return []
    if cost.dtype.kind in "iu":
        cost = cost.astype(np.int64)
        inf = np.iinfo(np.int64).max // 4
    else:
        cost = cost.astype(np.float64)
        inf = np.inf
    u = np.zeros(n + 1, dtype=cost.dtype)
    v = np.zeros(n + 1, dtype=cost.dtype)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, inf, dtype=cost.dtype)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = [0] * n
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment


def _hungarian_exact(cost: list) -> list:
    n = len(cost)
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta, j1 = None, 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assignment = [0] * n
    for j in range(1, n + 1):
        assignment[p[j] - 1] = j - 1
    return assignment


class Histogram(Mapping):
    """Sparse nonnegative vector indexed by hierarchy nodes."""

    __slots__ = ("entries", "hierarchy_uid")

    def __init__(self, entries: dict, hierarchy_uid=None):
        self.entries = entries
        self.hierarchy_uid = hierarchy_uid

    def __getitem__(self, node):
        return self.entries[node]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def mass(self):
        return sum(self.entries.values(), 0)

    def __repr__(self):
        return f"Histogram({self.entries!r})"


def subtree_counts(h: Hierarchy, X: Iterable) -> dict:
    """``|X_v|`` for every node whose subtree holds an element of ``X``.

    One bottom-up pass over the touched nodes, deepest first.
    """
    counts = {}
    for x in X:
        if x is NULL:
            continue
        leaf = h.leaf(x)
        counts[leaf] = counts.get(leaf, 0) + 1
    if not counts:
        return counts
    depth, parent = h.depth, h.parent
    buckets = {}
    for leaf in counts:
        buckets.setdefault(depth[leaf], []).append(leaf)
    for d in range(max(buckets), 0, -1):
        for v in buckets.pop(d, ()):
            p = parent[v]
            if p in counts:
                counts[p] += counts[v]
            else:
                counts[p] = counts[v]
                buckets.setdefault(d - 1, []).append(p)
    return counts


def histogram(h: Hierarchy, X: Iterable) -> Histogram:
    """Entries ``omega(v) * |X_v|`` on touched nodes with positive ``omega``."""
    omega = h.omega
    entries = {v: omega[v] * c for v, c in subtree_counts(h, X).items() if omega[v] > 0}
    return Histogram(entries, h.uid)


def intersect(g, h):
    """Histogram intersection ``sum_v min(g[v], h[v])``.

    Accepts two :class:`Histogram` objects over the same hierarchy, two mappings,
    or two equal-length sequences.
    """
    if isinstance(g, Histogram) and isinstance(h, Histogram):
        if g.hierarchy_uid != h.hierarchy_uid:
            raise HierarchyMismatch("histograms come from different hierarchies")
    if isinstance(g, Mapping) and isinstance(h, Mapping):
        if len(h) < len(g):
            g, h = h, g
        total = 0
        for key, a in g.items():
            b = h.get(key)
            if b is not None:
                total += a if a < b else b
        return total
    if isinstance(g, Mapping) or isinstance(h, Mapping):
        raise HierarchyMismatch("cannot intersect a histogram with a dense vector")
    g, h = list(g), list(h)
    if len(g) != len(h):
        raise HierarchyMismatch(f"vector lengths differ: {len(g)} != {len(h)}")
    return sum((min(a, b) for a, b in zip(g, h)), 0)


def assignment_kernel(h: Hierarchy, X: Iterable, Y: Iterable):
    """Optimal assignment value between ``X`` and ``Y`` under the kernel induced by ``h``."""
    return intersect(histogram(h, X), histogram(h, Y))


def greedy_assignment(h: Hierarchy, X: Sequence, Y: Sequence) -> list:
    """An optimal bijection between the padded sets, as ``(i, j)`` index pairs.

    Bottom-up over the hierarchy, each node pairs the still unmatched elements of
    ``X`` and ``Y`` in its subtree, lowest indices first. Whatever reaches the
    root unmatched is paired with padding.
    """
    Xp, Yp = pad(X, Y)
    depth, parent = h.depth, h.parent
    xs, ys = {}, {}
    for i, x in enumerate(Xp):
        if x is not NULL:
            xs.setdefault(h.leaf(x), []).append(i)
    for j, y in enumerate(Yp):
        if y is not NULL:
            ys.setdefault(h.leaf(y), []).append(j)

    pairs = []
    buckets = {}
    for v in set(xs) | set(ys):
        buckets.setdefault(depth[v], set()).add(v)
    left_x, left_y = [], []
    for d in range(max(buckets, default=0), -1, -1):
        for v in sorted(buckets.pop(d, ())):
            px = sorted(xs.pop(v, []))
            py = sorted(ys.pop(v, []))
            m = min(len(px), len(py))
            pairs.extend(zip(px[:m], py[:m]))
            px, py = px[m:], py[m:]
            if d == 0:
                left_x, left_y = px, py
            elif px or py:
                p = parent[v]
                xs.setdefault(p, []).extend(px)
                ys.setdefault(p, []).extend(py)
                buckets.setdefault(d - 1, set()).add(p)

    null_x = [i for i, x in enumerate(Xp) if x is NULL]
    null_y = [j for j, y in enumerate(Yp) if y is NULL]
    pairs.extend(zip(left_x, null_y))
    pairs.extend(zip(null_x, left_y))
    pairs.sort()
    return pairs


def assignment_weight(base, X: Sequence, Y: Sequence, pairs) -> object:
    """Total base-kernel weight of a bijection over the padded sets."""
    k = _base_function(base)
    Xp, Yp = pad(X, Y)
    total = 0
    for i, j in pairs:
        x, y = Xp[i], Yp[j]
        if x is not NULL and y is not NULL:
            total += k(x, y)
    return total


def node_pair_counts(h: Hierarchy, X: Sequence, Y: Sequence, pairs) -> dict:
    """For every node, how many pairs of the bijection lie entirely within its subtree."""
    Xp, Yp = pad(X, Y)
    counts = {}
    for i, j in pairs:
        x, y = Xp[i], Yp[j]
        if x is NULL or y is NULL:
            continue
        px = set(h.path_to_root(h.leaf(x)))
        for v in h.path_to_root(h.leaf(y)):
            if v in px:
                counts[v] = counts.get(v, 0) + 1
    return counts

