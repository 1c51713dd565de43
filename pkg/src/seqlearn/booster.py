"""Boosting non-learners: coverage of a target set under random orderings,
the greedy seed-set search, and the celebrity/guinea-pig scaffold attached
to the chosen seeds."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, GraphError, Ordering, build_graph, enumerate_orderings
from .rates import OracleConfig, non_learners
from .engine import EngineConfig
from .seeding import as_master_seed, derive_rng

log = logging.getLogger(__name__)

EXACT_COVERAGE_MAX_N = 12
ENUMERATED_COVERAGE_MAX_N = 8
DEFAULT_SAMPLE_CAP = 1_000_000


@dataclass
class BoostPlan:
    seed_set: tuple[int, ...]
    k: int
    added_vertices: dict[int, str]
    added_edges: list[tuple[int, int]]
    resulting_graph: Graph
    targets: tuple[int, ...] = ()
    tolerance: int = 0
    gains: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "seed_set": list(self.seed_set),
            "k": self.k,
            "targets": list(self.targets),
            "tolerance": self.tolerance,
            "added_vertices": {str(v): r for v, r in sorted(self.added_vertices.items())},
            "added_edges": [list(e) for e in self.added_edges],
            "gains": self.gains,
        }


@dataclass(frozen=True)
class CoverageEstimate:
    value: float
    half_width: float
    samples: int
    targets: tuple[int, ...]


def boost_agents(graph: Graph, seeds: Iterable[int], k: int) -> BoostPlan:
    """Attach ``k`` celebrities, each with ``k`` pendant guinea pigs, to every
    vertex of ``seeds``.

    Celebrity ``i`` gets id ``n + i*(k+1)``; its guinea pigs follow it.
    """
    S = tuple(sorted(set(int(v) for v in seeds)))
    if k < 1:
        raise ValueError("k must be >= 1")
    if any(not 0 <= v < graph.n for v in S):
        raise GraphError(f"seed set {list(S)} not within 0..{graph.n - 1}")
    added: dict[int, str] = {}
    new_edges: list[tuple[int, int]] = []
    for i in range(k):
        w = graph.n + i * (k + 1)
        added[w] = "celebrity"
        for j in range(1, k + 1):
            added[w + j] = "guinea"
            new_edges.append((w + j, w))
        new_edges.extend((v, w) for v in S)
    labels = {**graph.labels, **added}
    boosted = build_graph(graph.n + k * (k + 1), graph.edges() + new_edges, labels)
    return BoostPlan(S, k, added, new_edges, boosted)


def _mask(vs: Iterable[int]) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def reach_masks(graph: Graph, ordering: Ordering) -> list[int]:
    """``masks[u]``: bitset of vertices reachable from ``u`` (itself included)
    along edges directed by ``ordering``."""
    pos = ordering.position
    masks = [0] * graph.n
    for u in reversed(ordering.order):
        m = 1 << u
        for w in graph.adjacency[u]:
            if pos[w] > pos[u]:
                m |= masks[w]
        masks[u] = m
    return masks


def coverage_of_ordering(graph: Graph, ordering: Ordering, targets: Iterable[int], seeds: Iterable[int]) -> int:
    masks = reach_masks(graph, ordering)
    covered = 0
    for s in seeds:
        covered |= masks[s]
    return (covered & _mask(targets)).bit_count()


def coverage_enumerated(graph: Graph, targets: Iterable[int], seeds: Iterable[int]) -> float:
    """Average covered count over every ordering (n <= 8)."""
    if graph.n > ENUMERATED_COVERAGE_MAX_N:
        raise ValueError(f"ordering enumeration is capped at n <= {ENUMERATED_COVERAGE_MAX_N}")
    targets, seeds = list(targets), list(seeds)
    total = count = 0
    for o in enumerate_orderings(graph.n):
        total += coverage_of_ordering(graph, o, targets, seeds)
        count += 1
    return total / count if count else 0.0


def coverage_exact(graph: Graph, targets: Iterable[int], seeds: Iterable[int]) -> float:
    """Expected number of ``targets`` reachable from ``seeds`` under a uniform
    ordering, computed exactly.

    Places agents one at a time in uniformly random order. An agent is reached
    when it is a seed or has an earlier reached neighbour, so the state is the
    set of placed agents plus the unplaced agents adjacent to a reached one.
    """
    n = graph.n
    if n > EXACT_COVERAGE_MAX_N:
        raise ValueError(f"exact coverage is capped at n <= {EXACT_COVERAGE_MAX_N}")
    smask, tmask = _mask(seeds), _mask(targets)
    if not smask or not tmask:
        return 0.0
    return _coverage_dp(tuple(graph.neighbor_masks()), smask, tmask)


@lru_cache(maxsize=65536)
def _coverage_dp(nbrs: tuple[int, ...], smask: int, tmask: int) -> float:
    full = (1 << len(nbrs)) - 1

    @lru_cache(maxsize=None)
    def expect(placed: int, frontier: int) -> float:
        rest = full & ~placed
        k = rest.bit_count()
        if k == 0:
            return 0.0
        total = 0.0
        r = rest
        while r:
            low = r & -r
            r ^= low
            v = low.bit_length() - 1
            nxt = placed | low
            if (smask | frontier) & low:
                total += bool(tmask & low) + expect(nxt, (frontier | nbrs[v]) & ~nxt)
            else:
                total += expect(nxt, frontier & ~low)
        return total / k

    return expect(0, 0)


def hoeffding_samples(n: int, abs_tol: float, fail_prob: float) -> int:
    return math.ceil(n * n * math.log(2.0 / fail_prob) / (2.0 * abs_tol * abs_tol))


def _sample_budget(n: int, abs_tol: float | None, fail_prob: float, cap: int) -> int:
    if abs_tol is None:
        abs_tol = 0.05 * n
    if abs_tol <= 0:
        raise ValueError("coverage tolerance must be positive")
    N = hoeffding_samples(n, abs_tol, fail_prob)
    if N > cap:
        log.warning("coverage sample size %d capped at %d; the Hoeffding guarantee no longer holds", N, cap)
        N = cap
    return max(N, 1)


def _sampled_masks(graph: Graph, N: int, master: int, label: str) -> list[list[int]]:
    out = []
    for i in range(N):
        rng = derive_rng(master, label, i)
        o = Ordering.from_sequence(rng.permutation(graph.n).tolist())
        out.append(reach_masks(graph, o))
    return out


def coverage_mc(
    graph: Graph,
    targets: Iterable[int],
    seeds: Iterable[int],
    abs_tol: float | None = None,
    fail_prob: float = 0.01,
    rng: np.random.Generator | int | None = None,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> CoverageEstimate:
    """Monte-Carlo coverage with the Hoeffding sample size for the given
    absolute tolerance (default ``0.05 n``) and failure probability."""
    targets = tuple(sorted(set(targets)))
    seeds = list(seeds)
    N = _sample_budget(graph.n, abs_tol, fail_prob, sample_cap)
    if not seeds or not targets:
        return CoverageEstimate(0.0, 0.0, N, targets)
    tmask = _mask(targets)
    vals = np.empty(N)
    master = as_master_seed(rng)
    for i, masks in enumerate(_sampled_masks(graph, N, master, "coverage")):
        covered = 0
        for s in seeds:
            covered |= masks[s]
        vals[i] = (covered & tmask).bit_count()
    hw = 1.959963984540054 * float(vals.std(ddof=1)) / math.sqrt(N) if N > 1 else float(len(targets))
    return CoverageEstimate(float(vals.mean()), hw, N, targets)


def greedy_boost(
    graph: Graph,
    oracle: OracleConfig,
    k: int,
    tolerance: int | None = None,
    abs_tol: float | None = None,
    fail_prob: float = 0.01,
    rng: np.random.Generator | int | None = None,
    engine_cfg: EngineConfig | None = None,
    targets: Sequence[int] | None = None,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> BoostPlan:
    """Greedy seed selection maximizing sampled coverage of the non-learners,
    followed by the celebrity scaffold on the chosen seeds.

    ``targets`` overrides the oracle-derived non-learner set. The tolerance
    defaults to ``ceil(sqrt(n))``. Orderings are re-sampled every iteration.
    """
    master = as_master_seed(rng)
    T = math.ceil(math.sqrt(graph.n)) if tolerance is None else int(tolerance)
    if T < 0:
        raise ValueError("tolerance must be >= 0")
    if targets is None:
        targets = non_learners(graph, oracle, engine_cfg, derive_rng(master, "oracle", 0))
    V = tuple(sorted(set(targets)))
    if not V:
        return BoostPlan((), k, {}, [], graph, V, T)
    tmask = _mask(V)
    N = _sample_budget(graph.n, abs_tol, fail_prob, sample_cap)
    S: list[int] = []
    current = 0.0
    gains: list[dict] = []
    iteration = 0
    while current < len(V) - T:
        if iteration >= len(V):
            raise RuntimeError("greedy loop exceeded |V'| iterations; coverage estimates are inconsistent")
        samples = _sampled_masks(graph, N, master, f"greedy/{iteration}")
        base = [0] * N
        for i, masks in enumerate(samples):
            for s in S:
                base[i] |= masks[s]
        before = sum((b & tmask).bit_count() for b in base) / N
        best_v, best_val = -1, -1.0
        for v in V:
            val = sum(((b | masks[v]) & tmask).bit_count() for b, masks in zip(base, samples)) / N
            if val > best_val:
                best_v, best_val = v, val
        S.append(best_v)
        gains.append({"iteration": iteration, "vertex": best_v, "coverage": best_val, "gain": best_val - before, "samples": N})
        current = best_val
        iteration += 1
    plan = boost_agents(graph, S, k)
    plan.targets = V
    plan.tolerance = T
    plan.gains = gains
    return plan


def brute_force_min_cover(
    graph: Graph,
    targets: Iterable[int],
    tolerance: int,
    candidates: Iterable[int] | None = None,
) -> tuple[int, ...]:
    """Smallest seed set (drawn from ``candidates``, default the targets)
    whose exact coverage reaches ``|targets| - tolerance``."""
    V = tuple(sorted(set(targets)))
    if graph.n > EXACT_COVERAGE_MAX_N:
        raise ValueError(f"brute-force cover is capped at n <= {EXACT_COVERAGE_MAX_N}")
    need = len(V) - tolerance
    if need <= 0:
        return ()
    pool = tuple(sorted(set(V if candidates is None else candidates)))
    single = {v: coverage_exact(graph, V, [v]) for v in pool}
    eps = 1e-9
    for size in range(1, len(pool) + 1):
        for S in itertools.combinations(pool, size):
            # subadditivity: the union can cover no more than the parts
            if sum(single[v] for v in S) < need - eps:
                continue
            if coverage_exact(graph, V, S) >= need - eps:
                return S
    raise ValueError("no seed set from the candidate pool reaches the required coverage")
