"""Graph kernels and Gram-matrix assembly.

Convolution-style kernels (V, E, WL, GL, SP) are dot products of explicit count
vectors. The optimal assignment kernels (V-OA, E-OA, WL-OA) are histogram
intersections over a hierarchy that induces their base kernel.
"""

from __future__ import annotations

from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from oakernel.assignment import assignment_kernel, histogram
from oakernel.errors import UnknownKernel
from oakernel.graph import Dataset, Graph
from oakernel.hierarchy import Hierarchy, star_hierarchy
from oakernel.wl import ColourSequence, refine, wl_feature_vector

KERNELS = ("V", "E", "V-OA", "E-OA", "WL", "WL-OA", "GL", "SP")
WL_KERNELS = ("WL", "WL-OA")


def kernel_name(name: str) -> str:
    key = str(name).strip().upper().replace("_", "-")
    if key not in KERNELS:
        raise UnknownKernel(f"unknown kernel {name!r}; choose from {', '.join(KERNELS)}")
    return key


@dataclass
class GramMatrix:
    values: np.ndarray
    kernel_name: str
    params: dict = field(default_factory=dict)
    normalized: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]


# Explicit count vectors.

def vertex_label_counts(g: Graph) -> Counter:
    return Counter(g.labels)


def edge_label_pair(g: Graph, u: int, v: int) -> tuple:
    a, b = g.labels[u], g.labels[v]
    return (a, b) if a <= b else (b, a)


def edge_label_counts(g: Graph) -> Counter:
    return Counter(edge_label_pair(g, u, v) for u, v in g.edges)


def graphlet_counts(g: Graph) -> Counter:
    """Connected induced 3-vertex subgraphs keyed by shape and labels.

    Paths are keyed ``("path", centre, (end, end))`` and triangles
    ``("triangle", (l1, l2, l3))`` with the label tuples sorted.
    """
    counts = Counter()
    lab = g.labels
    adj = g.adjacency
    neighbours = [set(a) for a in adj]
    for v in range(g.vertex_count):
        nv = adj[v]
        for i, a in enumerate(nv):
            for b in nv[i + 1:]:
                if b in neighbours[a]:
                    if v < a:
                        counts["triangle", tuple(sorted((lab[v], lab[a], lab[b])))] += 1
                else:
                    ends = (lab[a], lab[b]) if lab[a] <= lab[b] else (lab[b], lab[a])
                    counts["path", lab[v], ends] += 1
    return counts


def bfs_distances(g: Graph, source: int) -> list:
    dist = [-1] * g.vertex_count
    dist[source] = 0
    queue = deque([source])
    adj = g.adjacency
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def shortest_path_counts(g: Graph) -> Counter:
    """Unordered vertex pairs at finite distance ``d >= 1`` keyed by (sorted end labels, d)."""
    counts = Counter()
    lab = g.labels
    for u in range(g.vertex_count):
        dist = bfs_distances(g, u)
        for v in range(u + 1, g.vertex_count):
            d = dist[v]
            if d > 0:
                a, b = lab[u], lab[v]
                counts[(a, b) if a <= b else (b, a), d] += 1
    return counts


def _dot(a: Counter, b: Counter) -> int:
    if len(b) < len(a):
        a, b = b, a
    return sum(c * b[key] for key, c in a.items() if key in b)


# Pairwise kernels.

def vertex_kernel(G: Graph, H: Graph) -> int:
    return _dot(vertex_label_counts(G), vertex_label_counts(H))


def edge_kernel(G: Graph, H: Graph) -> int:
    return _dot(edge_label_counts(G), edge_label_counts(H))


def dirac_hierarchy(objects) -> Hierarchy:
    """Depth-one hierarchy: root of weight 0, one unit-weight leaf per object."""
    objects = sorted(set(objects))
    return star_hierarchy([1] * len(objects), root_weight=0, objects=objects)


def vertex_oa_kernel(G: Graph, H: Graph) -> int:
    """Optimal assignment between vertex sets under the Dirac kernel on labels."""
    labels = set(G.labels) | set(H.labels)
    if not labels:
        return 0
    return assignment_kernel(dirac_hierarchy(labels), G.labels, H.labels)


def edge_oa_kernel(G: Graph, H: Graph) -> int:
    """Optimal assignment between edge sets; two edges match when some endpoint
    mapping preserves labels, i.e. their sorted endpoint label pairs agree."""
    eg = [edge_label_pair(G, u, v) for u, v in G.edges]
    eh = [edge_label_pair(H, u, v) for u, v in H.edges]
    if not eg and not eh:
        return 0
    return assignment_kernel(dirac_hierarchy(eg + eh), eg, eh)


def wl_kernel(C: ColourSequence, i: int, j: int) -> int:
    return _dot(wl_feature_vector(C, i), wl_feature_vector(C, j))


def wl_oa_kernel(C: ColourSequence, i: int, j: int) -> int:
    """Optimal assignment between the vertex sets of graphs ``i`` and ``j`` with
    base kernel = number of rounds in which two vertices share a colour."""
    return assignment_kernel(C.hierarchy, C.vertex_ids(i), C.vertex_ids(j))


def graphlet_kernel(G: Graph, H: Graph) -> int:
    return _dot(graphlet_counts(G), graphlet_counts(H))


def shortest_path_kernel(G: Graph, H: Graph) -> int:
    return _dot(shortest_path_counts(G), shortest_path_counts(H))


# Gram matrices.

def _column_gram(rows: Sequence[dict], combine: Callable, threads: int = 1) -> np.ndarray:
    """``K[i, j] = sum_f combine(rows[i][f], rows[j][f])`` over shared keys ``f``.

    Accumulates feature by feature, so each feature costs the square of the
    number of graphs that have it.
    """
    n = len(rows)
    columns = {}
    for i, row in enumerate(rows):
        for key, val in row.items():
            if val:
                columns.setdefault(key, ([], []))
                columns[key][0].append(i)
                columns[key][1].append(val)
    cols = list(columns.values())
    is_int = all(isinstance(v, (int, np.integer)) for _, vals in cols for v in vals)
    dtype = np.int64 if is_int else np.float64

    def accumulate(chunk):
        K = np.zeros((n, n), dtype=dtype)
        for idx, vals in chunk:
            if len(idx) == 1:
                K[idx[0], idx[0]] += combine(vals[0], vals[0])
            else:
                a = np.asarray(vals, dtype=dtype)
                ix = np.asarray(idx)
                K[np.ix_(ix, ix)] += combine.outer(a, a)
        return K

    threads = max(1, int(threads))
    if threads == 1 or len(cols) < 2 * threads:
        return accumulate(cols)
    chunks = [cols[t::threads] for t in range(threads)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(accumulate, chunks))
    K = parts[0]
    for part in parts[1:]:
        K += part
    return K


def _dataset_histograms(h: Hierarchy, sets: Sequence) -> list:
    return [histogram(h, X).entries for X in sets]


def feature_rows(dataset: Dataset, name: str, h: int = 3, colours: ColourSequence | None = None) -> tuple:
    """Per-graph sparse rows and the combining operation for kernel ``name``.

    Dot-product kernels use count vectors with multiplication; assignment
    kernels use hierarchy histograms with minimum.
    """
    name = kernel_name(name)
    graphs = dataset.graphs
    if name == "V":
        return [vertex_label_counts(g) for g in graphs], np.multiply
    if name == "E":
        return [edge_label_counts(g) for g in graphs], np.multiply
    if name == "GL":
        return [graphlet_counts(g) for g in graphs], np.multiply
    if name == "SP":
        return [shortest_path_counts(g) for g in graphs], np.multiply
    if name == "V-OA":
        labels = {lab for g in graphs for lab in g.labels}
        if not labels:
            return [{} for _ in graphs], np.minimum
        hier = dirac_hierarchy(labels)
        return _dataset_histograms(hier, [g.labels for g in graphs]), np.minimum
    if name == "E-OA":
        edge_sets = [[edge_label_pair(g, u, v) for u, v in g.edges] for g in graphs]
        pairs = {e for es in edge_sets for e in es}
        if not pairs:
            return [{} for _ in graphs], np.minimum
        return _dataset_histograms(dirac_hierarchy(pairs), edge_sets), np.minimum
    if colours is None:
        colours = refine(graphs, h)
    if name == "WL":
        return [wl_feature_vector(colours, i) for i in range(len(graphs))], np.multiply
    hier = colours.hierarchy
    return _dataset_histograms(hier, [colours.vertex_ids(i) for i in range(len(graphs))]), np.minimum


def gram(dataset: Dataset, name: str, h: int = 3, normalized: bool = False, threads: int = 1) -> GramMatrix:
    """Kernel matrix over all graphs of ``dataset``.

    ``h`` is the number of refinement rounds and only used by WL and WL-OA.
    Shared preprocessing (refinement, hierarchy, histograms) happens once.
    """
    name = kernel_name(name)
    rows, combine = feature_rows(dataset, name, h)
    K = _column_gram(rows, combine, threads).astype(np.float64)
    params = {"h": h} if name in WL_KERNELS else {}
    M = GramMatrix(K, name, params, False)
    return normalize(M) if normalized else M


def normalize(M):
    """Cosine normalisation ``K[i, j] / sqrt(K[i, i] K[j, j])``; zero-diagonal rows become 0."""
    values = M.values if isinstance(M, GramMatrix) else np.asarray(M, dtype=np.float64)
    diag = np.diag(values).astype(np.float64)
    scale = np.zeros_like(diag)
    positive = diag > 0
    scale[positive] = 1.0 / np.sqrt(diag[positive])
    out = values * scale[:, None] * scale[None, :]
    idx = np.flatnonzero(positive)
    out[idx, idx] = 1.0
    if isinstance(M, GramMatrix):
        return GramMatrix(out, M.kernel_name, dict(M.params), True)
    return out


def pairwise(name: str, G: Graph, H: Graph, h: int = 3) -> int:
    """Kernel value for a single pair; WL variants refine the two graphs jointly."""
    name = kernel_name(name)
    simple = {
        "V": vertex_kernel,
        "E": edge_kernel,
        "V-OA": vertex_oa_kernel,
        "E-OA": edge_oa_kernel,
        "GL": graphlet_kernel,
        "SP": shortest_path_kernel,
    }
    if name in simple:
        return simple[name](G, H)
    C = refine([G, H], h)
    return wl_kernel(C, 0, 1) if name == "WL" else wl_oa_kernel(C, 0, 1)
