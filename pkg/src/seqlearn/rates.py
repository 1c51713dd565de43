"""Learning-rate estimation under fixed, random, positional and conditioned
orderings, plus learning oracles."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from . import engine
from .analytics import first_learner_score
from .engine import EngineConfig
from .graph import Graph, Ordering, OrientedView, build_graph, enumerate_orderings, sample_ordering
from .seeding import as_master_seed, derive_rng

EXACT_ENUM_MAX_N = 6
Z95 = 1.959963984540054


@dataclass(frozen=True)
class RateEstimate:
    mean: float
    half_width: float
    samples: int
    method: str  # exact-enum | mc-orderings | mc-full

    @property
    def lo(self) -> float:
        return self.mean - self.half_width

    @property
    def hi(self) -> float:
        return self.mean + self.half_width

    def separated_above(self, other: "RateEstimate") -> bool:
        """True when this interval lies strictly above ``other``'s."""
        return self.lo > other.hi

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class OracleConfig:
    kind: str = "heuristic"  # exact | mc | heuristic | labels
    t: float = 0.9
    tau: float = 8.0
    trials: int = 200
    labels: frozenset[int] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "mc", "heuristic", "labels"):
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if not 0 < self.t < 1:
            raise ValueError("threshold t must lie in (0, 1)")
        if self.kind == "heuristic" and self.tau <= 0:
            raise ValueError("heuristic oracle needs tau > 0")
        if self.kind == "labels" and self.labels is None:
            raise ValueError("labels oracle needs an explicit learner set")


def wilson_half_width(p: float, n: int, z: float = Z95) -> float:
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    spread = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # half-width of the interval re-centred on the point estimate
    return max(centre + spread - p, p - (centre - spread))


def summarize(values: Sequence[float], method: str) -> RateEstimate:
    x = np.asarray(values, dtype=float)
    n = x.size
    mean = float(x.mean())
    if n < 2:
        return RateEstimate(mean, 1.0, n, method)
    binary = bool(np.all((x == 0) | (x == 1)))
    if binary and (n * mean < 5 or n * (1 - mean) < 5):
        hw = wilson_half_width(mean, n)
    else:
        hw = Z95 * float(x.std(ddof=1)) / math.sqrt(n)
    return RateEstimate(mean, hw, n, method)


@lru_cache(maxsize=8192)
def _enumerated_rates(key: tuple, cfg: EngineConfig) -> tuple[tuple[Ordering, ...], np.ndarray]:
    """All orderings of the graph and ``l_sigma(v)`` for each of them."""
    graph = build_graph(key[0], key[1])
    orders = tuple(enumerate_orderings(graph.n))
    rates = np.array([engine.exact_rates_fixed(OrientedView(graph, o), cfg) for o in orders]).reshape(len(orders), graph.n)
    return orders, rates


def enumerated_rates(graph: Graph, cfg: EngineConfig) -> tuple[tuple[Ordering, ...], np.ndarray]:
    if graph.n > EXACT_ENUM_MAX_N:
        raise ValueError(f"exact enumeration over orderings is capped at n <= {EXACT_ENUM_MAX_N}")
    return _enumerated_rates(graph.key(), _exact_cfg(cfg))


def _exact_cfg(cfg: EngineConfig) -> EngineConfig:
    return cfg if cfg.mode == "exact" else dataclasses.replace(cfg, mode="exact")


def exact_random_rates(graph: Graph, cfg: EngineConfig) -> np.ndarray:
    """Random-order rate ``l(v)`` of every vertex, by full enumeration."""
    if graph.n == 0:
        return np.zeros(0)
    _, rates = enumerated_rates(graph, cfg)
    return rates.mean(axis=0)


def exact_positional_rates(graph: Graph, cfg: EngineConfig) -> np.ndarray:
    """``l(v | sigma(v) = i)`` as an ``(n, n)`` array indexed ``[v, i - 1]``."""
    orders, rates = enumerated_rates(graph, cfg)
    n = graph.n
    out = np.zeros((n, n))
    count = np.zeros((n, n))
    for o, row in zip(orders, rates):
        for v in range(n):
            out[v, o.position[v]] += row[v]
            count[v, o.position[v]] += 1
    return out / count


def _trial_value(graph: Graph, v: int | None, cfg: EngineConfig, rng: np.random.Generator) -> tuple[float, bool]:
    """One sampled ordering: the agent's (or graph's) score and whether it was exact."""
    sigma = sample_ordering(graph.n, rng)
    view = OrientedView(graph, sigma)
    targets = None if v is None else [v]
    if cfg.mode == "exact":
        try:
            tables = engine.build_tables_exact(view, cfg, targets)
        except engine.ConeCapError:
            pass
        else:
            if v is None:
                return float(np.mean([t.rate() for t in tables])), True
            return tables[v].rate(), True
    tables = engine.build_tables_tabulated(view, cfg, rng, targets)
    theta = int(rng.integers(2))
    signals = engine.sample_signals(graph.n, theta, cfg.q, rng)
    agents = engine._needed_agents(view, targets)
    acts = engine.simulate_batch(view, tables, signals, agents)[0]
    if v is None:
        return float(np.mean(acts == theta)), False
    return float(acts[v] == theta), False


def _mc(graph: Graph, v: int | None, cfg: EngineConfig, trials: int, rng, label: str) -> RateEstimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    master = as_master_seed(rng)
    values = []
    all_exact = True
    for i in range(trials):
        val, exact = _trial_value(graph, v, cfg, derive_rng(master, label, i))
        values.append(val)
        all_exact &= exact
    return summarize(values, "mc-orderings" if all_exact else "mc-full")


def rate_random(
    graph: Graph,
    v: int,
    cfg: EngineConfig,
    trials: int = 1000,
    rng: np.random.Generator | int | None = None,
    method: str = "auto",
) -> RateEstimate:
    """Random-order learning rate of ``v``.

    ``method='auto'`` enumerates all orderings when the engine is exact and
    ``n <= 6``; otherwise orderings are sampled.
    """
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    want_exact = method == "exact" or (method == "auto" and cfg.mode == "exact" and graph.n <= EXACT_ENUM_MAX_N)
    if want_exact:
        value = float(exact_random_rates(graph, cfg)[v])
        return RateEstimate(value, 0.0, math.factorial(graph.n), "exact-enum")
    return _mc(graph, v, cfg, trials, rng, f"rate_random/{v}")


def graph_rate(
    graph: Graph,
    cfg: EngineConfig,
    trials: int = 1000,
    rng: np.random.Generator | int | None = None,
    method: str = "auto",
) -> RateEstimate:
    """``L(G)``: expected fraction of correct agents under a uniform ordering."""
    want_exact = method == "exact" or (method == "auto" and cfg.mode == "exact" and graph.n <= EXACT_ENUM_MAX_N)
    if want_exact:
        value = float(exact_random_rates(graph, cfg).mean()) if graph.n else 0.0
        return RateEstimate(value, 0.0, math.factorial(graph.n), "exact-enum")
    return _mc(graph, None, cfg, trials, rng, "graph_rate")


def positional_rate(
    graph: Graph,
    v: int,
    cfg: EngineConfig,
    index: int,
    trials: int = 1000,
    rng: np.random.Generator | int | None = None,
) -> RateEstimate:
    """``l(v | sigma(v) = index)`` with a 1-based ``index``."""
    n = graph.n
    if not 1 <= index <= n:
        raise ValueError(f"index must lie in 1..{n}")
    if cfg.mode == "exact" and n <= EXACT_ENUM_MAX_N:
        value = float(exact_positional_rates(graph, cfg)[v, index - 1])
        return RateEstimate(value, 0.0, math.factorial(n - 1), "exact-enum")
    master = as_master_seed(rng)
    others = [u for u in range(n) if u != v]
    values = []
    all_exact = True
    for i in range(trials):
        r = derive_rng(master, f"positional/{v}/{index}", i)
        rest = [others[j] for j in r.permutation(n - 1)]
        seq = rest[: index - 1] + [v] + rest[index - 1 :]
        val, exact = _fixed_order_value(graph, v, Ordering.from_sequence(seq), cfg, r)
        values.append(val)
        all_exact &= exact
    return summarize(values, "mc-orderings" if all_exact else "mc-full")


def _fixed_order_value(graph: Graph, v: int, sigma: Ordering, cfg: EngineConfig, rng) -> tuple[float, bool]:
    view = OrientedView(graph, sigma)
    if cfg.mode == "exact" and engine.cone_fits(view, v, cfg):
        return engine.exact_rate_fixed(view, v, cfg), True
    tables = engine.build_tables_tabulated(view, cfg, rng, [v])
    theta = int(rng.integers(2))
    signals = engine.sample_signals(graph.n, theta, cfg.q, rng)
    acts = engine.simulate_batch(view, tables, signals, engine._needed_agents(view, [v]))[0]
    return float(acts[v] == theta), False


def vertex_rates(
    graph: Graph,
    vertices: Sequence[int],
    cfg: EngineConfig,
    trials: int = 1000,
    rng: np.random.Generator | int | None = None,
) -> dict[int, RateEstimate]:
    """Random-order rates of several agents scored on shared sampled orderings."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    vs = sorted(set(int(v) for v in vertices))
    master = as_master_seed(rng)
    values = np.zeros((trials, len(vs)))
    all_exact = True
    for i in range(trials):
        r = derive_rng(master, "vertex_rates", i)
        view = OrientedView(graph, sample_ordering(graph.n, r))
        if cfg.mode == "exact":
            try:
                tables = engine.build_tables_exact(view, cfg, vs)
            except engine.ConeCapError:
                pass
            else:
                values[i] = [tables[v].rate() for v in vs]
                continue
        all_exact = False
        tables = engine.build_tables_tabulated(view, cfg, r, vs)
        theta = int(r.integers(2))
        signals = engine.sample_signals(graph.n, theta, cfg.q, r)
        acts = engine.simulate_batch(view, tables, signals, engine._needed_agents(view, vs))[0]
        values[i] = acts[vs] == theta
    method = "mc-orderings" if all_exact else "mc-full"
    return {v: summarize(values[:, j], method) for j, v in enumerate(vs)}


@dataclass(frozen=True)
class ConditionalRate:
    estimate: RateEstimate
    event_probability: float


def conditional_rate(
    graph: Graph,
    v: int,
    cfg: EngineConfig,
    event: Callable[[Ordering], bool],
    trials: int = 1000,
    rng: np.random.Generator | int | None = None,
    max_attempts: int | None = None,
    method: str = "sample",
) -> ConditionalRate:
    """``l(v | A)`` for an event ``A`` on orderings, with ``Pr(A)``.

    ``method='sample'`` rejection-samples orderings; ``method='enumerate'``
    is exact for ``n <= 6``.
    """
    n = graph.n
    if method == "enumerate":
        orders, rates = enumerated_rates(graph, cfg)
        hits = np.array([bool(event(o)) for o in orders])
        if not hits.any():
            raise ValueError("event has probability zero")
        value = float(rates[hits, v].mean())
        return ConditionalRate(RateEstimate(value, 0.0, int(hits.sum()), "exact-enum"), float(hits.mean()))
    master = as_master_seed(rng)
    budget = max_attempts if max_attempts is not None else 100 * trials
    values = []
    attempts = 0
    all_exact = True
    while len(values) < trials and attempts < budget:
        r = derive_rng(master, f"conditional/{v}", attempts)
        attempts += 1
        sigma = sample_ordering(n, r)
        if not event(sigma):
            continue
        val, exact = _fixed_order_value(graph, v, sigma, cfg, r)
        values.append(val)
        all_exact &= exact
    if not values:
        raise ValueError(f"event never occurred in {attempts} sampled orderings")
    est = summarize(values, "mc-orderings" if all_exact else "mc-full")
    return ConditionalRate(est, len(values) / attempts)


def learning_oracle(
    graph: Graph,
    v: int,
    ocfg: OracleConfig,
    cfg: EngineConfig | None = None,
    rng: np.random.Generator | int | None = None,
    scores: Sequence[float] | None = None,
) -> int:
    """1 when ``v`` is judged to learn at rate ``>= t`` under random orderings."""
    if ocfg.kind == "labels":
        return int(v in ocfg.labels)  # type: ignore[operator]
    if ocfg.kind == "heuristic":
        if scores is None:
            scores = [first_learner_score(graph, u) for u in range(graph.n)]
        if scores[v] >= ocfg.tau:
            return 1
        strong = sum(1 for u in graph.adjacency[v] if scores[u] >= ocfg.tau)
        return int(strong >= ocfg.tau)
    cfg = cfg or EngineConfig()
    if ocfg.kind == "exact":
        if graph.n > EXACT_ENUM_MAX_N:
            raise ValueError(f"exact oracle requires n <= {EXACT_ENUM_MAX_N}")
        return int(exact_random_rates(graph, cfg)[v] >= ocfg.t)
    est = rate_random(graph, v, cfg, ocfg.trials, rng, method="mc")
    return int(est.mean - est.half_width >= ocfg.t)


def non_learners(graph: Graph, ocfg: OracleConfig, cfg: EngineConfig | None = None, rng=None) -> list[int]:
    master = as_master_seed(rng)
    scores = [first_learner_score(graph, u) for u in range(graph.n)]
    out = []
    for v in range(graph.n):
        r = derive_rng(master, "oracle", v)
        if not learning_oracle(graph, v, ocfg, cfg, r, scores):
            out.append(v)
    return out


ESTIMATE_COLUMNS = ("vertex", "method", "mean", "half_width", "samples", "q", "seed")


def estimates_to_csv(rows: Iterable[tuple[object, RateEstimate]], q: float, seed: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ESTIMATE_COLUMNS)
    for vertex, est in rows:
        w.writerow([vertex, est.method, f"{est.mean:.10f}", f"{est.half_width:.10f}", est.samples, q, seed])
    return buf.getvalue()
