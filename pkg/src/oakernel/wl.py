"""1-dimensional Weisfeiler-Lehman colour refinement over a whole dataset.

Colours are assigned from one dictionary shared by all graphs, so equal colours
mean equal refinement histories regardless of the graph a vertex lives in.
Colour ids of different iterations never overlap.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from oakernel.errors import InvalidParameter, UnknownGraph
from oakernel.graph import Graph
from oakernel.hierarchy import Hierarchy


@dataclass(frozen=True)
class ColourSequence:
    """``colours[i][g][v]`` is the colour of vertex ``v`` of graph ``g`` after ``i`` rounds."""

    h: int
    colours: tuple
    vertex_counts: tuple

    @property
    def graph_count(self) -> int:
        return len(self.vertex_counts)

    @cached_property
    def offsets(self) -> tuple:
        """Global index of the first vertex of every graph."""
        out, total = [], 0
        for n in self.vertex_counts:
            out.append(total)
            total += n
        return tuple(out)

    def vertex_ids(self, g: int) -> range:
        """Objects of the WL hierarchy that belong to graph ``g``."""
        self._check(g)
        start = self.offsets[g]
        return range(start, start + self.vertex_counts[g])

    def _check(self, g):
        if not isinstance(g, int) or not 0 <= g < self.graph_count:
            raise UnknownGraph(g)

    @cached_property
    def hierarchy(self) -> Hierarchy:
        return wl_hierarchy(self)


def refine(graphs: Sequence[Graph], h: int) -> ColourSequence:
    """Run ``h`` refinement rounds on all ``graphs`` at once.

    A vertex's new colour identifies the pair (its colour, sorted colours of its
    neighbours). Round 0 colours are the vertex labels.
    """
    if not isinstance(h, int) or h < 0:
        raise InvalidParameter(f"h must be a nonnegative integer, got {h!r}")
    current = tuple(tuple(g.labels) for g in graphs)
    rounds = [current]
    next_id = 1 + max((c for cols in current for c in cols), default=-1)
    adjacency = [g.adjacency for g in graphs]
    for _ in range(h):
        dictionary = {}
        new = []
        for cols, adj in zip(current, adjacency):
            out = []
            for v, c in enumerate(cols):
                key = (c, tuple(sorted(cols[u] for u in adj[v])))
                colour = dictionary.get(key)
                if colour is None:
                    colour = dictionary[key] = next_id
                    next_id += 1
                out.append(colour)
            new.append(tuple(out))
        current = tuple(new)
        rounds.append(current)
    return ColourSequence(h, tuple(rounds), tuple(g.vertex_count for g in graphs))


def wl_feature_vector(C: ColourSequence, g: int) -> Counter:
    """Colour counts of graph ``g`` over all rounds ``0..h``, keyed by colour id."""
    C._check(g)
    counts = Counter()
    for rnd in C.colours:
        counts.update(rnd[g])
    return counts


def wl_hierarchy(C: ColourSequence) -> Hierarchy:
    """Hierarchy over every vertex of every graph induced by the colour classes.

    Node 0 is the root with weight 0. Each colour of round ``i`` is a node of
    weight ``i + 1`` under the node of its round ``i - 1`` colour, so every node
    but the root adds 1. Round ``h`` colours are the leaves; a vertex's object id
    is its global index (see :attr:`ColourSequence.offsets`).
    """
    node_of = {}
    parent = [0]
    weight = [0]
    for i, rnd in enumerate(C.colours):
        prev = C.colours[i - 1] if i else None
        for g, cols in enumerate(rnd):
            for v, c in enumerate(cols):
                if c in node_of:
                    continue
                node_of[c] = len(parent)
                parent.append(node_of[prev[g][v]] if prev is not None else 0)
                weight.append(i + 1)
    leaf_of = {}
    offsets = C.offsets
    for g, cols in enumerate(C.colours[-1]):
        base = offsets[g]
        for v, c in enumerate(cols):
            leaf_of[base + v] = node_of[c]
    return Hierarchy(parent, weight, leaf_of)


def wl_base_kernel(C: ColourSequence, g1: int, v1: int, g2: int, v2: int) -> int:
    """Number of rounds in which the two vertices share a colour."""
    return sum(rnd[g1][v1] == rnd[g2][v2] for rnd in C.colours)
