"""Exhaustive and statistical property checks over small-graph corpora.

Every suite returns a ``SuiteReport`` listing the cases checked and any
violations; the ``verify`` command exits non-zero when one is found.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import engine
from .analytics import chernoff_floor, chebyshev_window_bound, majority_tail
from .booster import brute_force_min_cover, coverage_exact, greedy_boost
from .corpus import cover_corpus, random_graphs, small_graphs
from .engine import EngineConfig
from .graph import Graph, Modification, OrientedView, apply_modification, build_graph, enumerate_orderings
from .rates import OracleConfig, enumerated_rates, exact_positional_rates, exact_random_rates
from .robustness import degradation_floor
from .seeding import as_master_seed, derive_rng

TOL = 1e-12


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    violations: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} ({self.checked} checks, {len(self.violations)} violations)"


def monotonicity(max_n: int = 5, q: float = 0.7) -> SuiteReport:
    """Positional rates are nondecreasing in the agent's index."""
    cfg = EngineConfig(q=q)
    rep = SuiteReport("monotonicity")
    for g in small_graphs(max_n):
        table = exact_positional_rates(g, cfg)
        for v in range(g.n):
            for i in range(1, g.n):
                rep.checked += 1
                if table[v, i] < table[v, i - 1] - TOL:
                    rep.violations.append(f"{g.edges()} v={v} index {i}->{i + 1}: {table[v, i - 1]:.12f} > {table[v, i]:.12f}")
    return rep


def _without_edges(g: Graph, v: int, drop: tuple[int, ...]) -> Graph:
    gone = {(min(v, u), max(v, u)) for u in drop}
    return build_graph(g.n, [e for e in g.edges() if e not in gone])


def improvement(max_n: int = 5, q: float = 0.7) -> SuiteReport:
    """Under every ordering an agent does at least as well as each prior
    neighbour, and deleting edges at the agent never helps it."""
    cfg = EngineConfig(q=q)
    rep = SuiteReport("improvement")
    cache: dict[tuple, np.ndarray] = {}

    def rates(g: Graph, o) -> np.ndarray:
        key = (g.key(), o.order)
        if key not in cache:
            cache[key] = engine.exact_rates_fixed(OrientedView(g, o), cfg)
        return cache[key]

    for g in small_graphs(max_n, connected=False):
        cache.clear()
        for o in enumerate_orderings(g.n):
            base = rates(g, o)
            view = OrientedView(g, o)
            for v in range(g.n):
                for u in view.prior_neighbors(v):
                    rep.checked += 1
                    if base[v] < base[u] - TOL:
                        rep.violations.append(f"{g.edges()} order={o.order}: l({v})={base[v]:.12f} < l({u})={base[u]:.12f}")
                nbrs = g.adjacency[v]
                for size in range(1, len(nbrs) + 1):
                    for drop in itertools.combinations(nbrs, size):
                        rep.checked += 1
                        after = rates(_without_edges(g, v, drop), o)[v]
                        if after > base[v] + TOL:
                            rep.violations.append(f"{g.edges()} order={o.order} v={v} drop {drop}: {after:.12f} > {base[v]:.12f}")
    return rep


def _edits(g: Graph, v: int) -> list[list[Modification]]:
    others = [u for u in range(g.n) if u != v]
    out: list[list[Modification]] = [[Modification("delete-vertex", d)] for d in others]
    # delete the larger id first so the second id is unaffected by compaction
    out += [[Modification("delete-vertex", b), Modification("delete-vertex", a)] for a, b in itertools.combinations(others, 2)]
    for a, b in itertools.combinations(range(g.n), 2):
        kind = "delete-edge" if g.has_edge(a, b) else "add-edge"
        out.append([Modification(kind, (a, b))])
    return out


def robustness(max_n: int = 5, q: float = 0.7) -> SuiteReport:
    """Exact random-order rates after one or two vertex deletions, or one
    edge edit, respect the degradation floors."""
    cfg = EngineConfig(q=q)
    rep = SuiteReport("robustness")
    for g in small_graphs(max_n, connected=False):
        before = exact_random_rates(g, cfg)
        for v in range(g.n):
            for mods in _edits(g, v):
                h, mapping = g, {u: u for u in range(g.n)}
                for m in mods:
                    h, step = apply_modification(h, m)
                    mapping = {a: step[b] for a, b in mapping.items() if b in step}
                if h.n == 0:
                    continue
                after = exact_random_rates(h, cfg)[mapping[v]]
                floor = degradation_floor(float(before[v]), mods)
                rep.checked += 1
                if after < floor - TOL:
                    rep.violations.append(f"{g.edges()} v={v} {[(m.kind, m.payload) for m in mods]}: {after:.12f} < {floor:.12f}")
    return rep


def conditional_bound(max_n: int = 4, q: float = 0.7) -> SuiteReport:
    """``l(v | A) >= 1 - (1 - l(v)) / Pr(A)`` for position and precedence events."""
    cfg = EngineConfig(q=q)
    rep = SuiteReport("conditional-bound")
    for g in small_graphs(max_n, connected=False):
        orders, table = enumerated_rates(g, cfg)
        pos = np.array([o.position for o in orders])
        for v in range(g.n):
            lv = table[:, v].mean()
            events = [pos[:, v] <= i for i in range(g.n)]
            events += [pos[:, v] < pos[:, u] for u in range(g.n) if u != v]
            for hit in events:
                pa = hit.mean()
                rep.checked += 1
                cond = table[hit, v].mean()
                if cond < 1 - (1 - lv) / pa - TOL:
                    rep.violations.append(f"{g.edges()} v={v}: {cond:.12f} below bound")
    return rep


def submodularity(tuples: int = 200, max_n: int = 6, seed: int = 7) -> SuiteReport:
    """Exact coverage is nonnegative, monotone and submodular on random
    ``(graph, V', S subset T, x)`` tuples."""
    rep = SuiteReport("submodularity")
    graphs = random_graphs(tuples, 2, max_n, seed, "submodular")
    for i, g in enumerate(graphs):
        rng = derive_rng(seed, "submodular-sets", i)
        V = [u for u in range(g.n) if rng.random() < 0.7] or [int(rng.integers(g.n))]
        T = [u for u in V if rng.random() < 0.6]
        S = [u for u in T if rng.random() < 0.5]
        x = int(rng.choice(V))

        def C(seeds: list[int]) -> float:
            return coverage_exact(g, V, seeds)

        cs, ct, csx, ctx = C(S), C(T), C(S + [x]), C(T + [x])
        rep.checked += 1
        if min(cs, ct) < -TOL or csx < cs - 1e-9 or ctx < ct - 1e-9 or ct < cs - 1e-9:
            rep.violations.append(f"case {i}: not monotone/nonnegative ({cs}, {ct}, {csx}, {ctx})")
        if csx - cs < ctx - ct - 1e-9:
            rep.violations.append(f"case {i}: gain {csx - cs:.12f} < {ctx - ct:.12f}")
    return rep


def greedy_ratio(seed: int = 11, oracle: OracleConfig | None = None) -> SuiteReport:
    """Greedy seed sets are within ``ceil(ln(|V'| / max(T, 1)) + 2)`` of the
    brute-force minimum on the cover corpus."""
    rep = SuiteReport("greedy")
    oracle = oracle or OracleConfig()
    ratios = []
    for i, g in enumerate(cover_corpus()):
        plan = greedy_boost(g, oracle, k=2, rng=derive_rng(seed, "greedy", i))
        V, T = plan.targets, plan.tolerance
        opt = brute_force_min_cover(g, V, T)
        factor = math.ceil(math.log(len(V) / max(T, 1)) + 2) if V else 0
        rep.checked += 1
        ratios.append((len(plan.seed_set), len(opt)))
        if len(plan.seed_set) > factor * len(opt):
            rep.violations.append(f"graph {i}: greedy {len(plan.seed_set)} > {factor} * {len(opt)}")
    rep.details["sizes"] = ratios
    return rep


def concentration(
    params: tuple[tuple[int, int, float], ...] = ((100, 20, 0.2), (200, 30, 0.1)),
    samples: int = 10_000,
    seed: int = 3,
) -> SuiteReport:
    """The number of ``k`` marked agents among the first ``n eps`` lands in
    ``[k eps / 2, 3 k eps / 2]`` at least as often as the Chebyshev bound,
    up to three binomial standard errors."""
    rep = SuiteReport("concentration")
    for n, k, eps in params:
        freq = concentration_frequency(n, k, eps, samples, seed)
        bound = chebyshev_window_bound(k, eps)
        sigma = math.sqrt(max(freq * (1 - freq), 1e-12) / samples)
        rep.checked += 1
        rep.details[f"{n},{k},{eps}"] = {"frequency": freq, "bound": bound, "sigma": sigma}
        if freq < bound - 3 * sigma:
            rep.violations.append(f"(n={n}, k={k}, eps={eps}): {freq:.4f} < {bound:.4f} - 3*{sigma:.4f}")
    return rep


def concentration_frequency(n: int, k: int, eps: float, samples: int, seed: int | np.random.Generator | None = 0) -> float:
    master = as_master_seed(seed)
    cutoff = math.floor(n * eps + 1e-9)
    lo, hi = k * eps / 2, 3 * k * eps / 2
    hits = 0
    for i in range(samples):
        order = derive_rng(master, f"concentration/{n}/{k}", i).permutation(n)
        # marked agents are 0..k-1; count those at 1-based index <= n eps
        y = int(np.count_nonzero(order[:cutoff] < k))
        hits += lo <= y <= hi
    return hits / samples


def chernoff(max_m: int = 25, qs: tuple[float, ...] = (0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)) -> SuiteReport:
    """Compares the ``1 - exp(-m / (8 q^2))`` floor with the exact majority
    tail. The floor is not a valid lower bound for small ``q``, so this suite
    reports violations by design."""
    rep = SuiteReport("chernoff")
    for m in range(1, max_m + 1, 2):
        for q in qs:
            rep.checked += 1
            floor, tail = chernoff_floor(m, q), majority_tail(m, q)
            if floor > tail + TOL:
                rep.violations.append(f"m={m} q={q}: floor {floor:.6f} > tail {tail:.6f}")
    return rep


SUITES: dict[str, Callable[[], SuiteReport]] = {
    "monotonicity": monotonicity,
    "improvement": improvement,
    "robustness": robustness,
    "bounds": conditional_bound,
    "submodularity": submodularity,
    "greedy": greedy_ratio,
    "concentration": concentration,
    "chernoff": chernoff,
}
