"""Graphs, decision orderings and the orientation an ordering induces."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

MAX_ENUMERATION_N = 10


class GraphError(ValueError):
    """Base class for graph validation failures."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class VertexRangeError(GraphError):
    pass


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``adjacency[v]`` is the sorted tuple of neighbours of ``v``; ``labels``
    maps vertex ids to free-form role strings.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    labels: Mapping[int, str] = field(default_factory=dict)

    @property
    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def vertices_with_label(self, label: str) -> list[int]:
        return sorted(v for v, lab in self.labels.items() if lab == label)

    def neighbor_masks(self) -> list[int]:
        return [sum(1 << u for u in a) for a in self.adjacency]

    def key(self) -> tuple[int, tuple[tuple[int, int], ...]]:
        """Hashable identity of the unlabelled structure."""
        return (self.n, tuple(self.edges()))

    def to_json(self) -> dict:
        out: dict = {"n": self.n, "edges": [list(e) for e in self.edges()]}
        if self.labels:
            out["labels"] = {str(v): lab for v, lab in sorted(self.labels.items())}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        labels = {int(k): str(v) for k, v in (data.get("labels") or {}).items()}
        return build_graph(int(data["n"]), [tuple(e) for e in data["edges"]], labels)


def build_graph(
    n: int,
    edges: Iterable[Sequence[int]],
    labels: Mapping[int, str] | None = None,
) -> Graph:
    if n < 0:
        raise VertexRangeError(f"vertex count must be non-negative, got {n}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        if len(e) != 2:
            raise GraphError(f"edge {e!r} is not a pair")
        u, v = int(e[0]), int(e[1])
        if not (0 <= u < n and 0 <= v < n):
            raise VertexRangeError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}")
        if v in nbrs[u]:
            raise DuplicateEdgeError(f"duplicate edge ({u}, {v})")
        nbrs[u].add(v)
        nbrs[v].add(u)
    labs = dict(labels or {})
    for v in labs:
        if not 0 <= v < n:
            raise VertexRangeError(f"label for vertex {v} out of range for n={n}")
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs), labs)


@dataclass(frozen=True)
class Ordering:
    """A decision ordering.

    ``order[i]`` is the vertex acting at (0-based) step ``i`` and
    ``position[v]`` is the step of vertex ``v``.
    """

    order: tuple[int, ...]
    position: tuple[int, ...]

    @classmethod
    def from_sequence(cls, seq: Sequence[int]) -> "Ordering":
        order = tuple(int(v) for v in seq)
        n = len(order)
        position = [-1] * n
        for i, v in enumerate(order):
            if not 0 <= v < n or position[v] != -1:
                raise ValueError(f"{list(seq)} is not a permutation of 0..{n - 1}")
            position[v] = i
        return cls(order, tuple(position))

    @classmethod
    def identity(cls, n: int) -> "Ordering":
        return cls(tuple(range(n)), tuple(range(n)))

    def __len__(self) -> int:
        return len(self.order)

    def index(self, v: int) -> int:
        """1-based index of ``v``."""
        return self.position[v] + 1


def sample_ordering(n: int, rng: np.random.Generator) -> Ordering:
    # Generator.permutation is an in-place Fisher-Yates shuffle.
    return Ordering.from_sequence(rng.permutation(n).tolist())


def enumerate_orderings(n: int) -> Iterator[Ordering]:
    if n > MAX_ENUMERATION_N:
        raise EnumerationCapError(f"refusing to enumerate {n}! orderings (cap n <= {MAX_ENUMERATION_N})")
    for perm in itertools.permutations(range(n)):
        yield Ordering.from_sequence(perm)


@dataclass(frozen=True)
class OrientedView:
    """``graph`` with every edge pointing from the earlier to the later agent."""

    graph: Graph
    ordering: Ordering

    def __post_init__(self) -> None:
        if len(self.ordering) != self.graph.n:
            raise ValueError("ordering length does not match graph size")

    @property
    def n(self) -> int:
        return self.graph.n

    def prior_neighbors(self, v: int) -> list[int]:
        pos = self.ordering.position
        return [u for u in self.graph.adjacency[v] if pos[u] < pos[v]]

    def later_neighbors(self, v: int) -> list[int]:
        pos = self.ordering.position
        return [u for u in self.graph.adjacency[v] if pos[u] > pos[v]]

    def ancestor_cone(self, v: int) -> set[int]:
        seen: set[int] = set()
        queue = deque([v])
        while queue:
            x = queue.popleft()
            for u in self.prior_neighbors(x):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen

    def reachable_set(self, sources: Iterable[int]) -> set[int]:
        seen = set(sources)
        queue = deque(seen)
        while queue:
            x = queue.popleft()
            for u in self.later_neighbors(x):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen


def prior_neighbors(view: OrientedView, v: int) -> set[int]:
    return set(view.prior_neighbors(v))


def ancestor_cone(view: OrientedView, v: int) -> set[int]:
    return view.ancestor_cone(v)


def reachable_set(view: OrientedView, sources: Iterable[int]) -> set[int]:
    return view.reachable_set(sources)


@dataclass(frozen=True)
class Modification:
    """A single edit. ``kind`` is one of ``add-edge``, ``delete-edge``,
    ``add-vertex-with-edges`` or ``delete-vertex``.

    Payloads: an ``(u, v)`` pair for edge edits, a list of neighbours of the
    new vertex for insertions, a vertex id for deletions.
    """

    kind: str
    payload: object

    KINDS = ("add-edge", "delete-edge", "add-vertex-with-edges", "delete-vertex")

    @property
    def is_vertex_mod(self) -> bool:
        return self.kind in ("add-vertex-with-edges", "delete-vertex")


def apply_modification(g: Graph, m: Modification) -> tuple[Graph, dict[int, int]]:
    """Return the edited graph and the old-id -> new-id map of surviving vertices."""
    identity = {v: v for v in range(g.n)}
    edges = set(g.edges())
    if m.kind in ("add-edge", "delete-edge"):
        u, v = (int(x) for x in m.payload)  # type: ignore[union-attr]
        if not (0 <= u < g.n and 0 <= v < g.n) or u == v:
            raise GraphError(f"invalid edge payload {m.payload!r}")
        e = (min(u, v), max(u, v))
        if m.kind == "add-edge":
            if e in edges:
                raise DuplicateEdgeError(f"edge {e} already present")
            edges.add(e)
        else:
            if e not in edges:
                raise GraphError(f"edge {e} not present")
            edges.remove(e)
        return build_graph(g.n, sorted(edges), g.labels), identity
    if m.kind == "add-vertex-with-edges":
        new = g.n
        nbrs = [int(x) for x in m.payload]  # type: ignore[union-attr]
        if len(set(nbrs)) != len(nbrs) or any(not 0 <= u < g.n for u in nbrs):
            raise GraphError(f"invalid neighbour list {m.payload!r}")
        edges.update((u, new) for u in nbrs)
        return build_graph(g.n + 1, sorted(edges), g.labels), identity
    if m.kind == "delete-vertex":
        d = int(m.payload)  # type: ignore[arg-type]
        if not 0 <= d < g.n:
            raise VertexRangeError(f"cannot delete vertex {d} from graph with n={g.n}")
        relabel = {v: (v if v < d else v - 1) for v in range(g.n) if v != d}
        new_edges = [(relabel[u], relabel[v]) for u, v in edges if d not in (u, v)]
        labels = {relabel[v]: lab for v, lab in g.labels.items() if v != d}
        return build_graph(g.n - 1, new_edges, labels), relabel
    raise GraphError(f"unknown modification kind {m.kind!r}")


def apply_modifications(g: Graph, mods: Sequence[Modification]) -> tuple[Graph, dict[int, int]]:
    mapping = {v: v for v in range(g.n)}
    for m in mods:
        g, step = apply_modification(g, m)
        mapping = {old: step[new] for old, new in mapping.items() if new in step}
    return g, mapping


def induced_subgraph(g: Graph, vertices: Sequence[int]) -> tuple[Graph, dict[int, int]]:
    index = {v: i for i, v in enumerate(vertices)}
    edges = [(index[u], index[v]) for u, v in g.edges() if u in index and v in index]
    labels = {index[v]: lab for v, lab in g.labels.items() if v in index}
    return build_graph(len(vertices), edges, labels), index


def disjoint_union(graphs: Sequence[Graph]) -> Graph:
    edges: list[tuple[int, int]] = []
    labels: dict[int, str] = {}
    offset = 0
    for g in graphs:
        edges.extend((u + offset, v + offset) for u, v in g.edges())
        labels.update({v + offset: lab for v, lab in g.labels.items()})
        offset += g.n
    return build_graph(offset, edges, labels)


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    seen = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for u in g.adjacency[x]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == g.n


def _canonical_key(n: int, edges: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in edges))
        if best is None or key < best:
            best = key
    return best  # type: ignore[return-value]


def all_graphs(n: int, connected: bool = False) -> list[Graph]:
    """One representative per isomorphism class of graphs on ``n`` vertices (n <= 5)."""
    if n > 5:
        raise EnumerationCapError("isomorphism-class enumeration is capped at n <= 5")
    pairs = list(itertools.combinations(range(n), 2))
    classes: dict[tuple, Graph] = {}
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        key = _canonical_key(n, edges)
        if key in classes:
            continue
        g = build_graph(n, key)
        if connected and not is_connected(g):
            continue
        classes[key] = g
    return sorted(classes.values(), key=lambda g: (g.num_edges, g.edges()))


def save_graph(g: Graph, path: str, extra: Mapping | None = None) -> None:
    data = g.to_json()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_graph(path: str) -> Graph:
    with open(path) as fh:
        return Graph.from_json(json.load(fh))
