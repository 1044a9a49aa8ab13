"""Labelled simple graphs, datasets, and the graph-benchmark text format.

A dataset ``DS`` lives in a directory holding

    DS_A.txt                comma-separated 1-indexed edge list (global vertex ids)
    DS_graph_indicator.txt  graph id of vertex i on line i
    DS_graph_labels.txt     class label of graph j on line j
    DS_node_labels.txt      optional; label of vertex i on line i
    DS_edge_labels.txt      optional; ignored
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from oakernel.errors import ParseError


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with one categorical label per vertex.

    Edges are stored once as ``(u, v)`` with ``u < v``, sorted.
    """

    vertex_count: int
    edges: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        n = self.vertex_count
        if n < 0:
            raise ValueError("vertex_count must be nonnegative")
        labels = tuple(int(x) for x in self.labels) if self.labels else (0,) * n
        if len(labels) != n:
            raise ValueError(f"expected {n} labels, got {len(labels)}")
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable, labels: Sequence[int] | None = None) -> "Graph":
        """Build a graph, collapsing ``(u, v)``/``(v, u)`` duplicates into one edge."""
        unique = {(min(u, v), max(u, v)) for u, v in edges}
        return cls(vertex_count, tuple(unique), tuple(labels) if labels is not None else ())

    @cached_property
    def adjacency(self) -> tuple:
        adj = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def permuted(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic copy in which vertex ``v`` becomes ``perm[v]``."""
        n = self.vertex_count
        if sorted(perm) != list(range(n)):
            raise ValueError("not a permutation of the vertex set")
        labels = [0] * n
        for v in range(n):
            labels[perm[v]] = self.labels[v]
        return Graph.from_edges(n, ((perm[u], perm[v]) for u, v in self.edges), labels)


@dataclass(frozen=True)
class Dataset:
    graphs: tuple
    class_labels: tuple
    name: str = ""
    label_names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        object.__setattr__(self, "class_labels", tuple(int(c) for c in self.class_labels))
        if len(self.graphs) != len(self.class_labels):
            raise ValueError("one class label per graph required")

    def __len__(self):
        return len(self.graphs)


def _read_lines(path: Path):
    """Yield ``(line_number, stripped_text)`` for non-blank lines."""
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            text = raw.strip()
            if text:
                yield lineno, text


def _read_ints(path: Path, width: int | None = None) -> list:
    rows = []
    for lineno, text in _read_lines(path):
        tokens = [t.strip() for t in text.split(",")]
        if width is not None and len(tokens) != width:
            raise ParseError(f"expected {width} comma-separated values, got {len(tokens)}", path.name, lineno)
        try:
            values = [int(t) for t in tokens]
        except ValueError:
            raise ParseError(f"non-integer token in {text!r}", path.name, lineno) from None
        rows.append((lineno, values))
    return rows


def _ds_file(directory: Path, name: str, suffix: str, required=True) -> Path | None:
    path = directory / f"{name}_{suffix}.txt"
    if not path.is_file():
        if required:
            raise ParseError("missing mandatory file", path.name)
        return None
    return path


def _guess_name(directory: Path) -> str:
    found = sorted(directory.glob("*_graph_indicator.txt"))
    if len(found) == 1:
        return found[0].name[: -len("_graph_indicator.txt")]
    return directory.name


def parse_dataset(directory, name: str | None = None) -> Dataset:
    """Read a dataset in the graph-benchmark text format.

    ``name`` defaults to the prefix of the single ``*_graph_indicator.txt`` file
    in ``directory``, else the directory's base name. Node labels are remapped to a
    dense 0-based dictionary (sorted by original value); class labels pass through.
    """
    directory = Path(directory)
    if name is None:
        name = _guess_name(directory)
    a_path = _ds_file(directory, name, "A")
    ind_path = _ds_file(directory, name, "graph_indicator")
    gl_path = _ds_file(directory, name, "graph_labels")
    nl_path = _ds_file(directory, name, "node_labels", required=False)

    indicator = [row[0] for _, row in _read_ints(ind_path, 1)]
    class_labels = [row[0] for _, row in _read_ints(gl_path, 1)]
    n_total = len(indicator)

    graph_ids = sorted(set(indicator))
    gindex = {g: i for i, g in enumerate(graph_ids)}
    if len(graph_ids) != len(class_labels):
        raise ParseError(f"{len(graph_ids)} graphs in indicator but {len(class_labels)} class labels", gl_path.name)

    owner = [0] * n_total
    local = [0] * n_total
    sizes = [0] * len(graph_ids)
    for v, g in enumerate(indicator):
        gi = gindex[g]
        owner[v] = gi
        local[v] = sizes[gi]
        sizes[gi] += 1

    if nl_path is not None:
        raw_labels = [row[0] for _, row in _read_ints(nl_path, 1)]
        if len(raw_labels) != n_total:
            raise ParseError(f"{len(raw_labels)} node labels for {n_total} vertices", nl_path.name)
    else:
        raw_labels = [0] * n_total
    label_names = tuple(sorted(set(raw_labels)))
    remap = {lab: i for i, lab in enumerate(label_names)}

    edge_sets = [set() for _ in graph_ids]
    for lineno, (u, v) in _read_ints(a_path, 2):
        if not (1 <= u <= n_total and 1 <= v <= n_total):
            raise ParseError(f"vertex id out of range 1..{n_total}", a_path.name, lineno)
        u -= 1
        v -= 1
        if owner[u] != owner[v]:
            raise ParseError("edge joins vertices of different graphs", a_path.name, lineno)
        if u == v:
            raise ParseError("self-loop", a_path.name, lineno)
        lu, lv = local[u], local[v]
        edge_sets[owner[u]].add((min(lu, lv), max(lu, lv)))

    labels_per_graph = [[] for _ in graph_ids]
    for v in range(n_total):
        labels_per_graph[owner[v]].append(remap[raw_labels[v]])

    graphs = tuple(
        Graph(sizes[i], tuple(edge_sets[i]), tuple(labels_per_graph[i])) for i in range(len(graph_ids))
    )
    return Dataset(graphs, class_labels, name, label_names)


def write_dataset(dataset: Dataset, directory, name: str | None = None) -> Path:
    """Write ``dataset`` in the benchmark text format; returns the directory."""
    name = name or dataset.name or "DS"
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    offset = 0
    with open(directory / f"{name}_A.txt", "w") as fa, \
            open(directory / f"{name}_graph_indicator.txt", "w") as fi, \
            open(directory / f"{name}_node_labels.txt", "w") as fn:
        for gid, g in enumerate(dataset.graphs, 1):
            for u, v in g.edges:
                fa.write(f"{u + offset + 1}, {v + offset + 1}\n")
                fa.write(f"{v + offset + 1}, {u + offset + 1}\n")
            for lab in g.labels:
                fi.write(f"{gid}\n")
                fn.write(f"{lab}\n")
            offset += g.vertex_count
    with open(directory / f"{name}_graph_labels.txt", "w") as fg:
        fg.writelines(f"{c}\n" for c in dataset.class_labels)
    return directory


def synthetic_graph(seed: int, n: int, p: float, alphabet: int = 1) -> Graph:
    """Erdos-Renyi graph ``G(n, p)`` with labels drawn uniformly from ``range(alphabet)``."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if alphabet < 1:
        raise ValueError("alphabet must be positive")
    rng = random.Random(seed)
    labels = [rng.randrange(alphabet) for _ in range(n)]
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph(n, tuple(edges), tuple(labels))


def synthetic_dataset(seed: int, count: int, max_vertices: int = 20, p: float = 0.2,
                      alphabet: int = 3, classes: int = 2, name: str = "SYNTH") -> Dataset:
    rng = random.Random(seed)
    graphs = []
    for _ in range(count):
        n = rng.randint(1, max_vertices)
        graphs.append(synthetic_graph(rng.randrange(2**31), n, p, alphabet))
    class_labels = [rng.randrange(classes) for _ in range(count)]
    return Dataset(graphs, class_labels, name)

