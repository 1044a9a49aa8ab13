"""Oracles, random generators and numeric checks used to test the kernels."""

from __future__ import annotations

import gc
import itertools
import random
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from oakernel.assignment import intersect, histogram, solve_hungarian
from oakernel.errors import InvalidMatrix, TooLarge
from oakernel.hierarchy import Hierarchy

DEFAULT_PSD_TOL = 1e-8
BRUTE_FORCE_LIMIT = 7


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    max_eigenvalue: float
    tolerance: float
    passed: bool

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} min_eigenvalue={self.min_eigenvalue:.6g} "
                f"max_eigenvalue={self.max_eigenvalue:.6g} tolerance={self.tolerance:g}")


def check_psd(M, tolerance: float = DEFAULT_PSD_TOL) -> PsdReport:
    """Eigenvalue test ``min_eig >= -tolerance * max(1, max_eig)``."""
    m = np.asarray(getattr(M, "values", M), dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {m.shape}")
    if m.size == 0:
        return PsdReport(0.0, 0.0, tolerance, True)
    scale = max(1.0, float(np.abs(m).max()))
    if np.abs(m - m.T).max() > 1e-12 * scale:
        raise InvalidMatrix("matrix is not symmetric")
    eig = np.linalg.eigvalsh((m + m.T) / 2)
    lo, hi = float(eig[0]), float(eig[-1])
    return PsdReport(lo, hi, tolerance, lo >= -tolerance * max(1.0, hi))


def random_hierarchy(seed: int, max_leaves: int = 12, max_weight: int = 10,
                     max_multiplicity: int = 1, chain_prob: float = 0.1) -> Hierarchy:
    """Random hierarchy with integer weights in ``[0, max_weight]`` that never
    decrease towards the leaves. Objects are ``0..n-1``.

    Leaves hold between 1 and ``max_multiplicity`` objects; with probability
    ``chain_prob`` an inner node gets a single child.
    """
    if max_leaves < 1:
        raise ValueError("max_leaves must be at least 1")
    rng = random.Random(seed)
    n_leaves = rng.randint(1, max_leaves)
    parent, weight, leaves = [], [], []

    def grow(par, floor, k):
        v = len(parent)
        parent.append(v if par is None else par)
        w = rng.randint(floor, max_weight)
        weight.append(w)
        if k == 1 and (rng.random() >= chain_prob or w == max_weight):
            leaves.append(v)
            return
        if k == 1:
            parts = [1]
        else:
            c = rng.randint(2, min(k, 4))
            cuts = sorted(rng.sample(range(1, k), c - 1))
            parts = [b - a for a, b in zip([0] + cuts, cuts + [k])]
        for part in parts:
            grow(v, w, part)

    grow(None, 0, n_leaves)
    leaf_of = {}
    obj = 0
    for leaf in leaves:
        for _ in range(rng.randint(1, max_multiplicity)):
            leaf_of[obj] = leaf
            obj += 1
    return Hierarchy(parent, weight, leaf_of)


def brute_force_assignment(K, limit: int = BRUTE_FORCE_LIMIT) -> object:
    """Maximum of ``sum_i K[i, perm[i]]`` over all ``n!`` permutations.

    Refuses ``n > limit``. Integer and float input is enumerated with numpy; other
    entries (e.g. ``Fraction``) fall back to exact Python sums.
    """
    rows = [list(r) for r in K]
    n = len(rows)
    if n > limit:
        raise TooLarge(f"brute force limited to n <= {limit}, got {n}")
    if any(len(r) != n for r in rows):
        raise InvalidMatrix("cross kernel matrix must be square")
    if n == 0:
        return 0
    if all(isinstance(x, (int, float, np.integer, np.floating)) for r in rows for x in r):
        m = np.array(rows)
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
        return m[np.arange(n), perms].sum(axis=1).max().item()
    return max(sum((rows[i][p[i]] for i in range(n)), 0) for p in itertools.permutations(range(n)))


def ancestor_table(h: Hierarchy, objects: Sequence) -> np.ndarray:
    """``table[i, d]``: ancestor at depth ``d`` of the leaf of ``objects[i]``, or -1."""
    paths = [h.path_to_root(h.leaf(x))[::-1] for x in objects]
    width = max((len(p) for p in paths), default=1)
    table = np.full((len(objects), width), -1, dtype=np.int64)
    for i, p in enumerate(paths):
        table[i, : len(p)] = p
    return table


def induced_cross_matrix(h: Hierarchy, X: Sequence, Y: Sequence) -> np.ndarray:
    """Vectorised ``[w(LCA(x, y))]`` for numeric weights."""
    ax, ay = ancestor_table(h, X), ancestor_table(h, Y)
    w = np.asarray(h.weight)
    K = np.full((len(X), len(Y)), w[h.root], dtype=w.dtype)
    for d in range(1, min(ax.shape[1], ay.shape[1])):
        cx, cy = ax[:, d], ay[:, d]
        same = (cx[:, None] == cy[None, :]) & (cx[:, None] >= 0)
        K = np.where(same, w[np.maximum(cx, 0)][:, None], K)
    return K


def layered_hierarchy(fanout: Sequence[int], seed: int = 0, max_step: int = 3) -> Hierarchy:
    """Complete tree with the given fan-out per level and random integer weights."""
    rng = random.Random(seed)
    parent, weight = [0], [rng.randint(0, max_step)]
    level = [0]
    for f in fanout:
        nxt = []
        for p in level:
            for _ in range(f):
                parent.append(p)
                weight.append(weight[p] + rng.randint(0, max_step))
                nxt.append(len(parent) - 1)
        level = nxt
    return Hierarchy(parent, weight, {i: leaf for i, leaf in enumerate(level)})


def _time_once(fn) -> int:
    t0 = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - t0


def benchmark_linear_time(h: Hierarchy, sizes: Sequence[int], seed: int = 0, repeats: int = 5,
                          hungarian_max: int | None = 1024) -> list:
    """Time one assignment-kernel evaluation per set size.

    Returns rows ``{"size", "histogram_ns", "hungarian_ns"}``; the Hungarian
    column is ``None`` above ``hungarian_max``. Histogram time covers building
    both histograms and intersecting them; Hungarian time covers solving the
    dense instance. Each value is the best of ``repeats`` runs. Repeats cycle
    through all sizes so that load changes on the machine hit every size alike,
    and garbage collection is paused while timing.
    """
    rng = random.Random(seed)
    objects = h.objects
    sets = []
    for size in sizes:
        X = [rng.choice(objects) for _ in range(size)]
        Y = [rng.choice(objects) for _ in range(size)]
        sets.append((X, Y))
    hist = [float("inf")] * len(sizes)
    hung = [None] * len(sizes)
    crosses = [induced_cross_matrix(h, X, Y) if hungarian_max is None or len(X) <= hungarian_max else None
               for X, Y in sets]
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for r in range(max(1, repeats)):
            for i, (X, Y) in enumerate(sets):
                t = _time_once(lambda: intersect(histogram(h, X), histogram(h, Y)))
                hist[i] = min(hist[i], t)
                if crosses[i] is not None and r < max(1, repeats // 2):
                    t = _time_once(lambda: solve_hungarian(crosses[i]))
                    hung[i] = t if hung[i] is None else min(hung[i], t)
    finally:
        if gc_was_enabled:
            gc.enable()
    return [{"size": s, "histogram_ns": hist[i], "hungarian_ns": hung[i]} for i, s in enumerate(sizes)]


def doubling_ratios(rows: Sequence[dict], column: str) -> list:
    out = []
    for a, b in zip(rows, rows[1:]):
        if a[column] and b[column] is not None:
            out.append(b[column] / a[column])
    return out


def benchmark_csv(rows: Sequence[dict]) -> str:
    lines = ["size,histogram_ns,hungarian_ns"]
    for r in rows:
        hung = "" if r["hungarian_ns"] is None else str(r["hungarian_ns"])
        lines.append(f"{r['size']},{r['histogram_ns']},{hung}")
    return "\n".join(lines) + "\n"
