"""Strong kernels and the weighted hierarchies that induce them.

A hierarchy is a rooted tree whose leaves carry objects and whose node weights
never decrease from the root towards the leaves. It induces the kernel
``k(x, y) = w(LCA(x, y))``; a kernel matrix arises this way exactly when it is
strong, i.e. ``k(x, y) >= min(k(x, z), k(z, y))`` for every triple.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from oakernel.errors import InvalidKernelMatrix, NotStrongError, UnknownNode, UnknownObject

DEFAULT_RTOL = 1e-12

_uid = itertools.count()


class Hierarchy:
    """Rooted weighted tree over a set of objects.

    ``parent[root] == root``. ``leaf_of`` maps each object to the leaf node that
    represents it; several objects sharing one leaf are indistinguishable under
    the induced kernel and count as that leaf's multiplicity.
    """

    def __init__(self, parent: Sequence[int], weight: Sequence, leaf_of: Mapping[Hashable, int]):
        self.parent = tuple(int(p) for p in parent)
        self.weight = tuple(weight)
        self.leaf_of = dict(leaf_of)
        self.uid = next(_uid)
        self._validate()

    def _validate(self):
        n = len(self.parent)
        if n == 0:
            raise ValueError("hierarchy needs at least one node")
        if len(self.weight) != n:
            raise ValueError("one weight per node required")
        roots = [v for v, p in enumerate(self.parent) if p == v]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        for v, p in enumerate(self.parent):
            if not 0 <= p < n:
                raise ValueError(f"parent of node {v} out of range")
            if self.weight[v] < 0:
                raise ValueError(f"negative weight at node {v}")
            if self.weight[v] < self.weight[p]:
                raise ValueError(f"weight decreases from node {p} to child {v}")
        depth = self.depth  # raises on cycles
        assert len(depth) == n
        children = self.children
        for obj, leaf in self.leaf_of.items():
            if not 0 <= leaf < n or children[leaf]:
                raise ValueError(f"object {obj!r} is not attached to a leaf")
        counts = self.multiplicity
        for v in range(n):
            if not children[v] and counts.get(v, 0) == 0 and n > 1:
                raise ValueError(f"leaf {v} carries no object")

    def __repr__(self):
        return f"Hierarchy(nodes={self.node_count}, objects={len(self.leaf_of)}, root={self.root})"

    @property
    def node_count(self) -> int:
        return len(self.parent)

    @cached_property
    def root(self) -> int:
        return next(v for v, p in enumerate(self.parent) if p == v)

    @cached_property
    def children(self) -> tuple:
        kids = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p != v:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> tuple:
        n = len(self.parent)
        depth = [-1] * n
        depth[self.root] = 0
        for v in range(n):
            path = []
            u = v
            while depth[u] < 0:
                path.append(u)
                u = self.parent[u]
                if len(path) > n:
                    raise ValueError("parent links contain a cycle")
            d = depth[u]
            for u in reversed(path):
                d += 1
                depth[u] = d
        return tuple(depth)

    @cached_property
    def omega(self) -> tuple:
        """Additive weights: ``w(v) - w(parent(v))``, and ``w(root)`` at the root."""
        r = self.root
        return tuple(
            self.weight[v] if v == r else self.weight[v] - self.weight[self.parent[v]]
            for v in range(len(self.parent))
        )

    @cached_property
    def multiplicity(self) -> dict:
        counts = {}
        for leaf in self.leaf_of.values():
            counts[leaf] = counts.get(leaf, 0) + 1
        return counts

    @cached_property
    def objects_below(self) -> tuple:
        """Frozen set of objects in the subtree of every node."""
        below = [set() for _ in self.parent]
        for obj, leaf in self.leaf_of.items():
            below[leaf].add(obj)
        for v in sorted(range(len(self.parent)), key=self.depth.__getitem__, reverse=True):
            p = self.parent[v]
            if p != v:
                below[p] |= below[v]
        return tuple(frozenset(s) for s in below)

    def leaf(self, obj) -> int:
        try:
            return self.leaf_of[obj]
        except (KeyError, TypeError):
            raise UnknownObject(obj) from None

    def path_to_root(self, node: int) -> list:
        self._check_node(node)
        path = [node]
        while self.parent[node] != node:
            node = self.parent[node]
            path.append(node)
        return path

    def _check_node(self, node):
        if not isinstance(node, (int, np.integer)) or not 0 <= node < len(self.parent):
            raise UnknownNode(node)

    @property
    def objects(self) -> list:
        return list(self.leaf_of)


def lowest_common_ancestor(h: Hierarchy, u: int, v: int) -> int:
    h._check_node(u)
    h._check_node(v)
    depth, parent = h.depth, h.parent
    while depth[u] > depth[v]:
        u = parent[u]
    while depth[v] > depth[u]:
        v = parent[v]
    while u != v:
        u, v = parent[u], parent[v]
    return u


def induced_kernel(h: Hierarchy, x, y):
    return h.weight[lowest_common_ancestor(h, h.leaf(x), h.leaf(y))]


def induced_matrix(h: Hierarchy, objects: Sequence | None = None) -> np.ndarray:
    """Matrix of induced kernel values; object dtype keeps exact arithmetic."""
    if objects is None:
        objects = h.objects
    n = len(objects)
    m = np.empty((n, n), dtype=object)
    for i in range(n):
        m[i, i] = induced_kernel(h, objects[i], objects[i])
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = induced_kernel(h, objects[i], objects[j])
    if all(isinstance(x, (int, np.integer)) for x in m.flat):
        return m.astype(np.int64)
    if all(isinstance(x, (int, float, np.integer, np.floating)) for x in m.flat):
        return m.astype(np.float64)
    return m


def _as_kernel_matrix(k) -> np.ndarray:
    m = np.asarray(k)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidKernelMatrix(f"expected a square matrix, got shape {m.shape}")
    if m.dtype.kind == "b":
        m = m.astype(np.int64)
    if m.dtype.kind not in "iufO":
        raise InvalidKernelMatrix(f"unsupported dtype {m.dtype}")
    if not (m == m.T).all():
        raise InvalidKernelMatrix("matrix is not symmetric")
    if (m < 0).any():
        raise InvalidKernelMatrix("matrix has negative entries")
    return m


def _is_exact(m: np.ndarray) -> bool:
    return m.dtype.kind in "iu" or (m.dtype.kind == "O" and all(
        isinstance(x, (int, Fraction, np.integer)) for x in m.flat))


def is_strong(k, rtol: float = DEFAULT_RTOL):
    """Test the strong-kernel inequality on every triple.

    Returns ``(True, None)`` or ``(False, (x, y, z))`` for the first violation with
    ``k[x, y] < min(k[x, z], k[z, y])``, scanning ``z`` in ascending order and
    ``(x, y)`` row-major. Integer and rational input is compared exactly; floating
    input tolerates a relative slack of ``rtol``.
    """
    m = _as_kernel_matrix(k)
    exact = _is_exact(m)
    n = m.shape[0]
    for z in range(n):
        bound = np.minimum(m[:, z][:, None], m[z, :][None, :])
        if exact:
            bad = m < bound
        else:
            bad = (bound - m) > rtol * np.abs(bound.astype(float))
        if bad.any():
            x, y = np.argwhere(bad)[0]
            return False, (int(x), int(y), z)
    return True, None


def _close(a, b, exact, rtol):
    if exact:
        return a == b
    return abs(a - b) <= rtol * max(abs(a), abs(b))


def build_hierarchy(k, objects: Sequence | None = None, rtol: float = DEFAULT_RTOL) -> Hierarchy:
    """Construct a hierarchy inducing the strong kernel matrix ``k``.

    Objects are inserted in input order. Each new object ``z`` hangs off a fresh
    node of weight ``kmax = max_y k(y, z)`` spliced directly above the node whose
    leaf set is exactly ``{y : k(y, z) = kmax}``. An object that is
    indistinguishable from an existing leaf joins that leaf instead.
    """
    m = _as_kernel_matrix(k)
    n = m.shape[0]
    if n == 0:
        raise InvalidKernelMatrix("empty kernel matrix")
    if objects is None:
        objects = list(range(n))
    if len(objects) != n:
        raise ValueError("one object per matrix row required")
    ok, witness = is_strong(m, rtol)
    if not ok:
        raise NotStrongError(witness)
    exact = _is_exact(m)
    vals = m.tolist()

    parent = [0]
    weight = [vals[0][0]]
    children = [set()]
    leaf_objs = [[0]]  # row indices held by each leaf node
    leaf_of = [0]  # row index -> leaf node

    def rows_below(v):
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            if children[u]:
                stack.extend(children[u])
            else:
                out.extend(leaf_objs[u])
        return out

    def lca(u, v):
        anc = set()
        while True:
            anc.add(u)
            if parent[u] == u:
                break
            u = parent[u]
        while v not in anc:
            v = parent[v]
        return v

    for z in range(1, n):
        row = vals[z]
        kmax = max(row[:z])
        argmax = [y for y in range(z) if _close(row[y], kmax, exact, rtol)]
        b = leaf_of[argmax[0]]
        for y in argmax[1:]:
            b = lca(b, leaf_of[y])
        if sorted(rows_below(b)) != argmax:
            raise NotStrongError(_find_witness(m, z))

        if not children[b] and _close(weight[b], kmax, exact, rtol) and _close(row[z], kmax, exact, rtol):
            leaf_objs[b].append(z)
            leaf_of.append(b)
            continue

        p = len(parent)
        old_parent = parent[b]
        parent.append(p if old_parent == b else old_parent)
        weight.append(kmax)
        children.append({b})
        leaf_objs.append([])
        if old_parent != b:
            children[old_parent].discard(b)
            children[old_parent].add(p)
        parent[b] = p

        leaf = len(parent)
        parent.append(p)
        weight.append(row[z])
        children.append(set())
        leaf_objs.append([z])
        children[p].add(leaf)
        leaf_of.append(leaf)

    return Hierarchy(parent, weight, {objects[i]: leaf_of[i] for i in range(n)})


def _find_witness(m, z):
    # Only reachable when float noise slipped through the tolerant check.
    ok, witness = is_strong(m[: z + 1, : z + 1], rtol=0.0)
    if ok:
        raise NotStrongError((0, 0, 0), "hierarchy construction failed on a matrix within tolerance of strong")
    return witness


def canonicalize(h: Hierarchy) -> Hierarchy:
    """Remove redundant inner nodes without changing the induced kernel.

    Inner nodes with a single child are spliced out, and an inner child carrying
    its parent's weight is merged into the parent. The root is always kept so
    that its weight survives.
    """
    n = h.node_count
    root = h.root
    removed = [False] * n
    new_parent = list(h.parent)

    def kept_ancestor(v):
        u = new_parent[v]
        while removed[u]:
            u = new_parent[u]
        return u

    for v in sorted(range(n), key=h.depth.__getitem__):
        if v == root or not h.children[v]:
            continue
        p = kept_ancestor(v)
        new_parent[v] = p
        if len(h.children[v]) == 1 or h.weight[v] == h.weight[p]:
            removed[v] = True
    for v in range(n):
        if v != root and not removed[v]:
            new_parent[v] = kept_ancestor(v)

    keep = [v for v in range(n) if not removed[v]]
    index = {v: i for i, v in enumerate(keep)}
    parent = [index[new_parent[v]] if v != root else index[root] for v in keep]
    weight = [h.weight[v] for v in keep]
    leaf_of = {obj: index[leaf] for obj, leaf in h.leaf_of.items()}
    return Hierarchy(parent, weight, leaf_of)


class Sqrt:
    """Square root of a nonnegative number, kept symbolic.

    Multiplying two equal radicands returns the radicand itself, so inner
    products of feature vectors stay exact for integer and rational weights.
    """

    __slots__ = ("radicand",)

    def __init__(self, radicand):
        if radicand < 0:
            raise ValueError("negative radicand")
        self.radicand = radicand

    def __float__(self):
        return math.sqrt(self.radicand)

    def __mul__(self, other):
        if isinstance(other, Sqrt):
            if self.radicand == other.radicand:
                return self.radicand
            return _sqrt_exact(self.radicand * other.radicand)
        return float(self) * other

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Sqrt):
            return self.radicand == other.radicand
        return float(self) == other

    def __hash__(self):
        return hash(float(self))

    def __repr__(self):
        return f"Sqrt({self.radicand!r})"


def _sqrt_exact(x):
    if isinstance(x, (int, np.integer)):
        r = math.isqrt(int(x))
        return r if r * r == x else math.sqrt(x)
    if isinstance(x, Fraction):
        a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if a * a == x.numerator and b * b == x.denominator:
            return Fraction(a, b)
    return math.sqrt(x)


def feature_map(h: Hierarchy, x) -> dict:
    """Sparse feature vector of ``x``: ``Sqrt(omega(v))`` for every node on its root path."""
    omega = h.omega
    return {v: Sqrt(omega[v]) for v in h.path_to_root(h.leaf(x))}


def dot(u: Mapping, v: Mapping):
    if len(v) < len(u):
        u, v = v, u
    return sum((u[key] * v[key] for key in u if key in v), 0)


def image_size(h: Hierarchy) -> int:
    """Number of distinct induced values over all object pairs."""
    objs = h.objects
    return len({induced_kernel(h, a, b) for i, a in enumerate(objs) for b in objs[i:]})


def image_size_bound(h: Hierarchy) -> bool:
    return image_size(h) <= 2 * len(h.leaf_of) - 1


def dumps(h: Hierarchy) -> str:
    """Text form, one node per line: ``id parentId weight [objectIds multiplicity]``.

    Leaf lines list their objects comma-separated; the root's parent is itself.
    """
    by_leaf = {}
    for obj, leaf in h.leaf_of.items():
        by_leaf.setdefault(leaf, []).append(obj)
    lines = []
    for v in range(h.node_count):
        line = f"{v} {h.parent[v]} {h.weight[v]}"
        if v in by_leaf:
            objs = by_leaf[v]
            line += f" {','.join(str(o) for o in objs)} {len(objs)}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        return Fraction(text)
    return float(text)


def loads(text: str) -> Hierarchy:
    parent, weight, leaf_of = {}, {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) not in (3, 5):
            raise ValueError(f"line {lineno}: expected 3 or 5 fields")
        v, p = int(fields[0]), int(fields[1])
        parent[v] = p
        weight[v] = _parse_number(fields[2])
        if len(fields) == 5:
            objs = [int(o) for o in fields[3].split(",")]
            if len(objs) != int(fields[4]):
                raise ValueError(f"line {lineno}: multiplicity does not match object list")
            for o in objs:
                leaf_of[o] = v
    n = len(parent)
    if sorted(parent) != list(range(n)):
        raise ValueError("node ids must be 0..n-1")
    return Hierarchy([parent[v] for v in range(n)], [weight[v] for v in range(n)], leaf_of)


def star_hierarchy(weights: Iterable, root_weight=0, objects: Sequence | None = None) -> Hierarchy:
    """Root with one leaf per object; with unit leaves and root 0 this induces the Dirac kernel."""
    weights = list(weights)
    if objects is None:
        objects = list(range(len(weights)))
    parent = [0] + [0] * len(weights)
    return Hierarchy(parent, [root_weight] + weights, {o: i + 1 for i, o in enumerate(objects)})
