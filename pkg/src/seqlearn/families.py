"""Network constructions with role labels and, where one exists, the
designer-chosen decision ordering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import Graph, Ordering, build_graph


@dataclass(frozen=True)
class FamilyInstance:
    graph: Graph
    strategic_order: Ordering | None = None
    params: dict = field(default_factory=dict)

    @property
    def roles(self) -> dict[int, str]:
        return dict(self.graph.labels)

    def role(self, name: str) -> list[int]:
        return self.graph.vertices_with_label(name)

    def sidecar(self) -> dict:
        return {
            "roles": {str(v): r for v, r in sorted(self.graph.labels.items())},
            "params": dict(self.params),
            "strategic_order": None if self.strategic_order is None else list(self.strategic_order.order),
        }


@dataclass(frozen=True)
class Gadget:
    """A small graph with an ordering under which ``apex`` (acting last)
    learns well."""

    graph: Graph
    internal_order: Ordering
    apex: int

    def __post_init__(self) -> None:
        if self.internal_order.order[-1] != self.apex:
            raise ValueError("gadget apex must act last in its internal order")

    @property
    def body(self) -> list[int]:
        return [v for v in self.internal_order.order if v != self.apex]


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def complete(n: int) -> FamilyInstance:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return FamilyInstance(build_graph(n, _pairs(n)), params={"family": "complete", "n": n})


def path(n: int) -> FamilyInstance:
    if n < 1:
        raise ValueError("path needs n >= 1")
    return FamilyInstance(build_graph(n, [(i, i + 1) for i in range(n - 1)]), params={"family": "path", "n": n})


def star(leaves: int) -> FamilyInstance:
    """Centre 0 joined to ``leaves`` leaves."""
    if leaves < 0:
        raise ValueError("star needs leaves >= 0")
    labels = {0: "center", **{i: "leaf" for i in range(1, leaves + 1)}}
    g = build_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], labels)
    return FamilyInstance(g, params={"family": "star", "leaves": leaves})


def star_forest(sizes: list[int]) -> FamilyInstance:
    """Disjoint stars; ``sizes[i]`` is the leaf count of star ``i``."""
    edges, labels, base = [], {}, 0
    for s in sizes:
        if s < 1:
            raise ValueError("each star needs at least one leaf")
        labels[base] = "center"
        for j in range(1, s + 1):
            edges.append((base, base + j))
            labels[base + j] = "leaf"
        base += s + 1
    return FamilyInstance(build_graph(base, edges, labels), params={"family": "star-forest", "sizes": list(sizes)})


def erdos_renyi(n: int, p: float, rng: np.random.Generator | int | None = None) -> FamilyInstance:
    if n < 0 or not 0 <= p <= 1:
        raise ValueError("erdos_renyi needs n >= 0 and p in [0, 1]")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    pairs = _pairs(n)
    keep = gen.random(len(pairs)) < p
    return FamilyInstance(build_graph(n, [e for e, k in zip(pairs, keep) if k]), params={"family": "erdos-renyi", "n": n, "p": p})


def celebrity(n: int, k: int) -> FamilyInstance:
    """Complete bipartite graph between ``k`` celebrities (ids ``0..k-1``)
    and ``n - k`` commoners."""
    if not 1 <= k < n:
        raise ValueError(f"celebrity count k={k} must satisfy 1 <= k < n={n}")
    labels = {v: ("celebrity" if v < k else "commoner") for v in range(n)}
    edges = [(c, v) for c in range(k) for v in range(k, n)]
    return FamilyInstance(build_graph(n, edges, labels), params={"family": "celebrity", "n": n, "k": k})


def guinea_boosted_complete(n: int, g: int, h: int) -> FamilyInstance:
    """``K_n`` whose first ``g`` vertices each carry ``h`` pendant guinea pigs.

    Guinea pig ``j`` of special ``i`` has id ``n + i*h + j``.
    """
    if n < 1 or not 0 <= g <= n or h < 1:
        raise ValueError(f"invalid guinea-pig parameters n={n}, g={g}, h={h}")
    edges = _pairs(n)
    labels = {v: ("special" if v < g else "plain") for v in range(n)}
    for i in range(g):
        for j in range(h):
            z = n + i * h + j
            edges.append((i, z))
            labels[z] = "guinea"
    return FamilyInstance(build_graph(n + g * h, edges, labels), params={"family": "guinea", "n": n, "g": g, "h": h})


def binary_tree_gadget(depth: int) -> Gadget:
    """Complete binary tree of the given depth; leaves act first, root last.

    Vertex ids follow the internal order, so the root is the largest id.
    """
    if depth < 1:
        raise ValueError("tree depth must be >= 1")
    size = (1 << depth) - 1
    # heap index h (root 0) -> id so that deeper levels come first
    levels = [list(range((1 << d) - 1, (1 << (d + 1)) - 1)) for d in range(depth)]
    heap_order = [h for lvl in reversed(levels) for h in lvl]
    ident = {h: i for i, h in enumerate(heap_order)}
    edges = [(ident[h], ident[(h - 1) // 2]) for h in range(1, size)]
    labels = {v: "body" for v in range(size)}
    labels[ident[0]] = "apex"
    g = build_graph(size, edges, labels)
    return Gadget(g, Ordering.identity(size), ident[0])


def embedded_boosted_complete(n: int, copies: int, gadget: Gadget) -> FamilyInstance:
    """``K_n`` in which each of the vertices ``0..copies-1`` becomes the apex
    of a private copy of the gadget body.

    Strategic order: every body in internal order followed by its apex, then
    the remaining clique vertices.
    """
    if n < 1 or not 0 <= copies <= n:
        raise ValueError(f"copies={copies} must lie in 0..n={n}")
    body = gadget.body
    edges = _pairs(n)
    labels = {v: "plain" for v in range(n)}
    order: list[int] = []
    next_id = n
    for c in range(copies):
        ids = {gadget.apex: c}
        for b in body:
            ids[b] = next_id
            labels[next_id] = "body"
            next_id += 1
        labels[c] = "apex"
        for u, v in gadget.graph.edges():
            edges.append((ids[u], ids[v]))
        order.extend(ids[b] for b in body)
        order.append(c)
    order.extend(range(copies, n))
    g = build_graph(next_id, edges, labels)
    params = {"family": "embedded", "n": n, "copies": copies, "gadget_size": gadget.graph.n}
    return FamilyInstance(g, Ordering.from_sequence(order), params)


def fragile_low_q(k_w: int, tail: int = 0) -> FamilyInstance:
    """Network that learns for low signal quality but herds for high.

    Ids follow the strategic order: four sources (0-3), ``v`` (4), then for
    each ``i`` the private source ``w_i'`` and ``w_i``, then ``u0`` and the
    chain.
    """
    if k_w < 1 or tail < 0:
        raise ValueError("fragile_low_q needs k_w >= 1 and tail >= 0")
    labels = {s: "source" for s in range(4)}
    v = 4
    labels[v] = "v"
    edges = [(s, v) for s in range(4)]
    ws = []
    for i in range(k_w):
        wp, w = 5 + 2 * i, 6 + 2 * i
        labels[wp], labels[w] = "w_prime", "w"
        edges += [(v, w), (wp, w)]
        ws.append(w)
    u0 = 5 + 2 * k_w
    labels[u0] = "u0"
    edges += [(w, u0) for w in ws]
    for j in range(tail):
        labels[u0 + 1 + j] = "chain"
        edges.append((u0 + j, u0 + 1 + j))
    size = u0 + 1 + tail
    g = build_graph(size, edges, labels)
    return FamilyInstance(g, Ordering.identity(size), {"family": "fragile-low-q", "k_w": k_w, "tail": tail})


def fragile_high_q(k_w: int, tail: int = 0) -> FamilyInstance:
    """Network that learns for high signal quality but herds for low.

    Ids follow the strategic order: shared sources ``x1..x3`` (0-2); then per
    ``i`` the four gadget sources, the gadget head ``v_i0`` and ``w_i``; then
    ``u0`` and the chain.
    """
    if k_w < 1 or tail < 0:
        raise ValueError("fragile_high_q needs k_w >= 1 and tail >= 0")
    labels = {x: "x" for x in range(3)}
    edges = []
    ws = []
    base = 3
    for _ in range(k_w):
        leaves = list(range(base, base + 4))
        head, w = base + 4, base + 5
        for s in leaves:
            labels[s] = "gadget_source"
            edges.append((s, head))
        labels[head], labels[w] = "v_head", "w"
        edges += [(x, w) for x in range(3)] + [(head, w)]
        ws.append(w)
        base += 6
    u0 = base
    labels[u0] = "u0"
    edges += [(w, u0) for w in ws]
    for j in range(tail):
        labels[u0 + 1 + j] = "chain"
        edges.append((u0 + j, u0 + 1 + j))
    size = u0 + 1 + tail
    g = build_graph(size, edges, labels)
    return FamilyInstance(g, Ordering.identity(size), {"family": "fragile-high-q", "k_w": k_w, "tail": tail})


def preset_k_w(n: int) -> int:
    """Concrete stand-in for a logarithmic layer width at size ``n``."""
    return max(3, int(math.floor(math.log2(n)))) if n > 1 else 3


def _int_args(*names: str) -> Callable[[list[str]], dict]:
    def parse(args: list[str]) -> dict:
        if len(args) != len(names):
            raise ValueError(f"expected parameters: {' '.join(names)}")
        return {k: int(a) for k, a in zip(names, args)}

    return parse


# name -> (argument parser, constructor taking those keywords)
GENERATORS: dict[str, tuple[Callable[[list[str]], dict], Callable[..., FamilyInstance]]] = {
    "complete": (_int_args("n"), complete),
    "path": (_int_args("n"), path),
    "star": (_int_args("leaves"), star),
    "celebrity": (_int_args("n", "k"), celebrity),
    "guinea": (_int_args("n", "g", "h"), guinea_boosted_complete),
    "fragile-low-q": (_int_args("k_w", "tail"), fragile_low_q),
    "fragile-high-q": (_int_args("k_w", "tail"), fragile_high_q),
    "embedded": (
        _int_args("n", "copies", "depth"),
        lambda n, copies, depth: embedded_boosted_complete(n, copies, binary_tree_gadget(depth)),
    ),
}


def generate(name: str, args: list[str], rng: np.random.Generator | int | None = None) -> FamilyInstance:
    if name == "erdos-renyi":
        if len(args) != 2:
            raise ValueError("expected parameters: n p")
        return erdos_renyi(int(args[0]), float(args[1]), rng)
    if name == "star-forest":
        return star_forest([int(a) for a in args])
    if name not in GENERATORS:
        raise KeyError(name)
    parse, build = GENERATORS[name]
    return build(**parse(args))


FAMILY_NAMES = sorted([*GENERATORS, "erdos-renyi", "star-forest"])
