"""Fixed, seeded graph collections shared by the test suites and the CLI."""

from __future__ import annotations

from .families import (
    FamilyInstance,
    binary_tree_gadget,
    celebrity,
    complete,
    embedded_boosted_complete,
    erdos_renyi,
    guinea_boosted_complete,
    path,
    star,
    star_forest,
)
from .graph import Graph, all_graphs, build_graph
from .seeding import derive_rng

CORPUS_SEED = 20240611


def small_graphs(max_n: int = 5, connected: bool = True) -> list[Graph]:
    """One graph per isomorphism class on 1..max_n vertices."""
    return [g for n in range(1, max_n + 1) for g in all_graphs(n, connected=connected)]


def random_graphs(count: int, n_min: int, n_max: int, seed: int = CORPUS_SEED, label: str = "random") -> list[Graph]:
    """Erdos-Renyi graphs with ``n`` and ``p`` drawn per index from a labelled stream."""
    out = []
    for i in range(count):
        rng = derive_rng(seed, label, i)
        n = int(rng.integers(n_min, n_max + 1))
        p = float(rng.uniform(0.15, 0.7))
        out.append(erdos_renyi(n, p, rng).graph)
    return out


def cover_corpus(seed: int = CORPUS_SEED) -> list[Graph]:
    """Thirty graphs on at most 12 vertices for seed-set search checks."""
    named = [
        star(11).graph,
        star_forest([3, 3, 3]).graph,
        star_forest([5, 4]).graph,
        star_forest([2, 2, 2, 2]).graph,
        path(8).graph,
        path(12).graph,
        complete(6).graph,
        celebrity(10, 2).graph,
        celebrity(12, 3).graph,
        build_graph(10, [(i, (i + 1) % 10) for i in range(10)]),
    ]
    return named + random_graphs(30 - len(named), 6, 12, seed, "cover")


def family_corpus() -> list[tuple[str, FamilyInstance]]:
    """Desk-scale instances of every family."""
    return [
        ("complete-40", complete(40)),
        ("celebrity-40-5", celebrity(40, 5)),
        ("guinea-20-3-7", guinea_boosted_complete(20, 3, 7)),
        ("guinea-60-5-20", guinea_boosted_complete(60, 5, 20)),
        ("star-20", star(20)),
        ("star-forest-12-16", star_forest([12, 16])),
        ("embedded-40-6-3", embedded_boosted_complete(40, 6, binary_tree_gadget(3))),
        ("erdos-renyi-60", erdos_renyi(60, 0.1, derive_rng(CORPUS_SEED, "family", 0))),
        ("path-30", path(30)),
    ]
