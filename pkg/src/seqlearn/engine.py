"""Bayesian agent decisions.

Each agent's decision is a deterministic function of its own signal bit and
the action bits of the prior neighbours it observes. A ``DecisionTable``
stores that function as a flat array indexed by ``key = own + 2 * obs``,
where bit ``k`` of ``obs`` is the action of ``observed[k]``. Tabulated
tables may also pool pendant neighbours; their count of 1-actions is added
above the observed bits.

Two builders are provided. The exact builder computes posteriors by
enumerating signal profiles of each agent's ancestor cone; the tabulated
builder estimates them from forward simulation and scales to large graphs.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .analytics import first_learner_score
from .graph import Graph, Ordering, OrientedView

log = logging.getLogger(__name__)

# Graphs up to this size are enumerated over whole signal profiles in one
# pass instead of cone by cone; the arithmetic is identical.
FULL_PROFILE_MAX_N = 14
_CHUNK_ROWS = 1 << 16


class ConeCapError(ValueError):
    def __init__(self, vertex: int, size: int, cap: int):
        super().__init__(f"ancestor cone of vertex {vertex} has {size} agents (cap {cap})")
        self.vertex = vertex
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class EngineConfig:
    q: float = 0.7
    mode: str = "exact"
    cone_cap: int = 22
    obs_cap: int = 10
    forward_samples: int = 20000
    tie_epsilon: float = 1e-12
    # tabulated mode: posteriors within tie_z standard errors of 1/2 are ties
    tie_z: float = 3.0

    def __post_init__(self) -> None:
        if not 0.5 < self.q < 1.0:
            raise ValueError(f"signal quality q must lie in (1/2, 1), got {self.q}")
        if self.mode not in ("exact", "tabulated"):
            raise ValueError(f"unknown engine mode {self.mode!r}")
        if not 1 <= self.cone_cap <= 26:
            raise ValueError("cone_cap must be in [1, 26]")
        if not 0 <= self.obs_cap <= 16:
            raise ValueError("obs_cap must be in [0, 16]")
        if self.forward_samples < 1:
            raise ValueError("forward_samples must be positive")
        if self.tie_z < 0:
            raise ValueError("tie_z must be non-negative")

    def with_q(self, q: float) -> "EngineConfig":
        return dataclasses.replace(self, q=q)

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "mode": self.mode,
            "cone_cap": self.cone_cap,
            "obs_cap": self.obs_cap,
            "forward_samples": self.forward_samples,
            "tie_epsilon": self.tie_epsilon,
            "tie_z": self.tie_z,
        }


@dataclass
class DecisionTable:
    vertex: int
    observed: tuple[int, ...]
    actions: np.ndarray
    posteriors: np.ndarray
    # Pr(cell | theta) for exact tables; raw cell counts for tabulated ones
    like1: np.ndarray | None = None
    like0: np.ndarray | None = None
    # pendant prior neighbours seen only through their number of 1-actions
    pooled: tuple[int, ...] = ()

    @staticmethod
    def key(own: int, observed_actions: Sequence[int], pooled_ones: int = 0) -> int:
        k = int(own)
        for i, a in enumerate(observed_actions):
            k |= int(a) << (i + 1)
        return k + (int(pooled_ones) << (len(observed_actions) + 1))

    def act(self, own: int, observed_actions: Sequence[int], pooled_actions: Sequence[int] = ()) -> int:
        return int(self.actions[self.key(own, observed_actions, sum(pooled_actions))])

    def posterior(self, own: int, observed_actions: Sequence[int], pooled_actions: Sequence[int] = ()) -> float:
        return float(self.posteriors[self.key(own, observed_actions, sum(pooled_actions))])

    def rate(self) -> float:
        """Pr(action == theta) from the stored exact likelihoods."""
        if self.like1 is None or self.like0 is None:
            raise ValueError("table carries no exact likelihoods")
        ones = self.actions == 1
        return 0.5 * float(self.like1[ones].sum() + self.like0[~ones].sum())


@dataclass
class DecisionTrace:
    theta: int
    signals: list[int]
    actions: list[int]
    posteriors: list[float]

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "signals": list(self.signals),
            "actions": list(self.actions),
            "posteriors": list(self.posteriors),
        }


def decide(posterior: float, own_signal: int, tie_epsilon: float = 1e-12) -> int:
    if posterior > 0.5 + tie_epsilon:
        return 1
    if posterior < 0.5 - tie_epsilon:
        return 0
    return int(own_signal)


def _decide_cells(posteriors: np.ndarray, tie_epsilon: float) -> np.ndarray:
    own = np.arange(posteriors.size, dtype=np.int64) & 1
    out = own.astype(np.uint8)
    out[posteriors > 0.5 + tie_epsilon] = 1
    out[posteriors < 0.5 - tie_epsilon] = 0
    return out


def _posteriors_from(like1: np.ndarray, like0: np.ndarray) -> np.ndarray:
    total = like1 + like0
    post = np.full(like1.shape, 0.5)
    seen = total > 0
    post[seen] = like1[seen] / total[seen]
    return post


def _cell_keys(actions: np.ndarray, own: np.ndarray, observed: Sequence[int]) -> np.ndarray:
    keys = own.astype(np.int64)
    for k, u in enumerate(observed):
        keys |= actions[:, u].astype(np.int64) << (k + 1)
    return keys


def _signal_weights(ones: np.ndarray, m: int, q: float) -> tuple[np.ndarray, np.ndarray]:
    ones = np.asarray(ones, dtype=np.int64)
    up = q ** np.arange(m + 1)
    down = (1 - q) ** np.arange(m + 1)
    return up[ones] * down[m - ones], down[ones] * up[m - ones]


def _needed_agents(view: OrientedView, targets: Sequence[int] | None) -> list[int]:
    """Agents whose tables are needed to decide ``targets``, in decision order."""
    if targets is None:
        return list(view.ordering.order)
    need: set[int] = set()
    for v in targets:
        need.add(v)
        need |= view.ancestor_cone(v)
    pos = view.ordering.position
    return sorted(need, key=pos.__getitem__)


def _check_cones(view: OrientedView, agents: Sequence[int], cap: int) -> dict[int, set[int]]:
    cones = {}
    for v in agents:
        cone = view.ancestor_cone(v)
        if len(cone) + 1 > cap:
            raise ConeCapError(v, len(cone) + 1, cap)
        cones[v] = cone
    return cones


def _exact_table(v: int, observed: tuple[int, ...], like1: np.ndarray, like0: np.ndarray, cfg: EngineConfig) -> DecisionTable:
    post = _posteriors_from(like1, like0)
    return DecisionTable(v, observed, _decide_cells(post, cfg.tie_epsilon), post, like1, like0)


def _build_full_profile(view: OrientedView, agents: Sequence[int], cfg: EngineConfig) -> list[DecisionTable | None]:
    n = view.n
    q = cfg.q
    rows = np.arange(1 << n, dtype=np.int64)
    bits = ((rows[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    ones = bits.sum(axis=1)
    w1, w0 = _signal_weights(ones, n, q)
    actions = np.zeros_like(bits)
    pos = view.ordering.position
    tables: list[DecisionTable | None] = [None] * n
    for v in agents:
        observed = tuple(sorted(view.prior_neighbors(v), key=pos.__getitem__))
        keys = _cell_keys(actions, bits[:, v], observed)
        size = 1 << (len(observed) + 1)
        like1 = np.bincount(keys, weights=w1, minlength=size)
        like0 = np.bincount(keys, weights=w0, minlength=size)
        table = _exact_table(v, observed, like1, like0, cfg)
        actions[:, v] = table.actions[keys]
        tables[v] = table
    return tables


def _components(graph: Graph, members: set[int]) -> list[set[int]]:
    left = set(members)
    comps = []
    while left:
        start = left.pop()
        comp = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for u in graph.adjacency[x]:
                if u in left:
                    left.remove(u)
                    comp.add(u)
                    stack.append(u)
        comps.append(comp)
    return comps


def _component_likelihoods(
    view: OrientedView,
    comp: set[int],
    observed_bits: dict[int, int],
    tables: list[DecisionTable | None],
    q: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Enumerate every signal profile of one cone component.

    Returns the global observation-key contribution of each distinct local
    observation and its likelihood under theta = 1 and theta = 0.
    """
    pos = view.ordering.position
    members = sorted(comp, key=pos.__getitem__)
    col = {u: j for j, u in enumerate(members)}
    m = len(members)
    local_obs = [u for u in members if u in observed_bits]
    nloc = len(local_obs)
    counts = np.zeros((1 << nloc) * (m + 1), dtype=np.int64)
    total = 1 << m
    for start in range(0, total, _CHUNK_ROWS):
        rows = np.arange(start, min(total, start + _CHUNK_ROWS), dtype=np.int64)
        bits = ((rows[:, None] >> np.arange(m)) & 1).astype(np.uint8)
        acts = np.zeros_like(bits)
        for j, u in enumerate(members):
            t = tables[u]
            keys = bits[:, j].astype(np.int64)
            for k, w in enumerate(t.observed):
                keys |= acts[:, col[w]].astype(np.int64) << (k + 1)
            acts[:, j] = t.actions[keys]
        local = np.zeros(rows.size, dtype=np.int64)
        for k, u in enumerate(local_obs):
            local |= acts[:, col[u]].astype(np.int64) << k
        ones = bits.sum(axis=1).astype(np.int64)
        counts += np.bincount(local * (m + 1) + ones, minlength=counts.size)
    counts = counts.reshape(1 << nloc, m + 1).astype(float)
    ks = np.arange(m + 1)
    p1 = counts @ (q**ks * (1 - q) ** (m - ks))
    p0 = counts @ ((1 - q) ** ks * q ** (m - ks))
    locs = np.arange(1 << nloc, dtype=np.int64)
    glob = np.zeros(1 << nloc, dtype=np.int64)
    for k, u in enumerate(local_obs):
        glob |= ((locs >> k) & 1) << observed_bits[u]
    return glob, p1, p0


def _build_by_cones(view: OrientedView, agents: Sequence[int], cones: dict[int, set[int]], cfg: EngineConfig) -> list[DecisionTable | None]:
    q = cfg.q
    pos = view.ordering.position
    tables: list[DecisionTable | None] = [None] * view.n
    for v in agents:
        observed = tuple(sorted(view.prior_neighbors(v), key=pos.__getitem__))
        bit_of = {u: k for k, u in enumerate(observed)}
        keys = np.zeros(1, dtype=np.int64)
        p1 = np.ones(1)
        p0 = np.ones(1)
        # signals are independent given theta, so likelihoods factor over
        # the connected components of the cone
        for comp in _components(view.graph, cones[v]):
            g, c1, c0 = _component_likelihoods(view, comp, bit_of, tables, q)
            keys = (keys[:, None] + g[None, :]).ravel()
            p1 = (p1[:, None] * c1[None, :]).ravel()
            p0 = (p0[:, None] * c0[None, :]).ravel()
        nobs = 1 << len(observed)
        o1 = np.zeros(nobs)
        o0 = np.zeros(nobs)
        np.add.at(o1, keys, p1)
        np.add.at(o0, keys, p0)
        like1 = np.empty(2 * nobs)
        like0 = np.empty(2 * nobs)
        like1[0::2], like1[1::2] = o1 * (1 - q), o1 * q
        like0[0::2], like0[1::2] = o0 * q, o0 * (1 - q)
        tables[v] = _exact_table(v, observed, like1, like0, cfg)
    return tables


def build_tables_exact(
    view: OrientedView,
    cfg: EngineConfig,
    targets: Sequence[int] | None = None,
    method: str = "auto",
) -> list[DecisionTable | None]:
    """Exact Bayesian decision tables for every agent (or for the agents that
    ``targets`` depend on; other entries are ``None``).

    ``method`` is ``cones`` (enumerate each agent's ancestor cone, factored
    over connected components), ``profiles`` (enumerate whole-graph profiles
    once) or ``auto``.
    """
    agents = _needed_agents(view, targets)
    cones = _check_cones(view, agents, cfg.cone_cap)
    if method == "auto":
        method = "profiles" if view.n <= FULL_PROFILE_MAX_N else "cones"
    if method == "profiles":
        return _build_full_profile(view, agents, cfg)
    if method == "cones":
        return _build_by_cones(view, agents, cones, cfg)
    raise ValueError(f"unknown method {method!r}")


def cone_fits(view: OrientedView, v: int, cfg: EngineConfig) -> bool:
    return len(view.ancestor_cone(v)) + 1 <= cfg.cone_cap


def exact_rate_fixed(view: OrientedView, v: int, cfg: EngineConfig) -> float:
    tables = build_tables_exact(view, cfg, targets=[v])
    return tables[v].rate()  # type: ignore[union-attr]


def exact_rates_fixed(view: OrientedView, cfg: EngineConfig) -> np.ndarray:
    """``l_sigma(v)`` for every agent."""
    tables = build_tables_exact(view, cfg)
    return np.array([t.rate() for t in tables])  # type: ignore[union-attr]


def select_observed(view: OrientedView, v: int, obs_cap: int, scores: Sequence[float]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Prior neighbours ``v`` attends to in the tabulated engine.

    Returns ``(observed, pooled)``. Without truncation every prior neighbour
    is observed individually. Otherwise pendant prior neighbours, whose
    actions are independent copies of their signals, are pooled into a count
    of 1-actions, and the ``obs_cap`` remaining neighbours with the highest
    first-learner score are observed individually.
    """
    prior = view.prior_neighbors(v)
    pooled: list[int] = []
    if len(prior) > obs_cap:
        deg = view.graph.degree
        pooled = [u for u in prior if deg(u) == 1]
        rest = [u for u in prior if deg(u) != 1]
        prior = sorted(rest, key=lambda u: (-scores[u], u))[:obs_cap]
    pos = view.ordering.position
    return tuple(sorted(prior, key=pos.__getitem__)), tuple(pooled)


def _source_table(v: int, q: float) -> DecisionTable:
    # no observations: the posterior is the signal's own reliability
    return DecisionTable(v, (), np.array([0, 1], dtype=np.uint8), np.array([1 - q, q]))


def build_tables_tabulated(
    view: OrientedView,
    cfg: EngineConfig,
    rng: np.random.Generator,
    targets: Sequence[int] | None = None,
    scores: Sequence[float] | None = None,
) -> list[DecisionTable | None]:
    """Decision tables estimated from ``forward_samples`` simulated runs per
    ground-truth value.

    Agents are processed in decision order. Each agent's cell counts come
    from the runs already propagated through the earlier agents' tables, and
    posteriors use add-one smoothing. The runs under theta = 0 reuse the
    theta = 1 signal draws with every bit flipped.
    """
    agents = _needed_agents(view, targets)
    n = view.n
    if scores is None:
        scores = [first_learner_score(view.graph, u) for u in range(n)]
    chosen = {v: select_observed(view, v, cfg.obs_cap, scores) for v in agents}
    observed = {v: c[0] for v, c in chosen.items()}
    pooled = {v: c[1] for v, c in chosen.items()}
    packed = _pack(n, observed, pooled)
    sig = (rng.random((n, cfg.forward_samples)) < cfg.q).astype(np.uint8)
    actions, post, c1, c0 = _kernels.tabulate(
        np.asarray(agents, dtype=np.int64), *packed, sig, cfg.q, cfg.tie_epsilon, cfg.tie_z
    )
    offsets = packed[-1]
    tables: list[DecisionTable | None] = [None] * n
    for v in agents:
        cells = slice(offsets[v], offsets[v + 1])
        if observed[v] or pooled[v]:
            tables[v] = DecisionTable(v, observed[v], actions[cells], post[cells], c1[cells], c0[cells], pooled[v])
        else:
            tables[v] = _source_table(v, cfg.q)
    return tables


def _pack(n: int, observed: dict[int, tuple[int, ...]], pooled: dict[int, tuple[int, ...]]) -> tuple[np.ndarray, ...]:
    """Padded neighbour arrays and per-agent offsets into flat cell arrays."""
    width = max([len(o) for o in observed.values()] + [1])
    pwidth = max([len(p) for p in pooled.values()] + [1])
    obs = np.zeros((n, width), dtype=np.int64)
    nobs = np.zeros(n, dtype=np.int64)
    pool = np.zeros((n, pwidth), dtype=np.int64)
    npool = np.zeros(n, dtype=np.int64)
    sizes = np.zeros(n, dtype=np.int64)
    for v, o in observed.items():
        p = pooled.get(v, ())
        obs[v, : len(o)] = o
        nobs[v] = len(o)
        pool[v, : len(p)] = p
        npool[v] = len(p)
        sizes[v] = (1 << (len(o) + 1)) * (len(p) + 1)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    return obs, nobs, pool, npool, offsets


def build_tables(view: OrientedView, cfg: EngineConfig, rng: np.random.Generator | None = None, targets=None):
    if cfg.mode == "exact":
        return build_tables_exact(view, cfg, targets)
    if rng is None:
        raise ValueError("tabulated tables need a random generator")
    return build_tables_tabulated(view, cfg, rng, targets)


def simulate_sequence(
    view: OrientedView,
    tables: Sequence[DecisionTable | None],
    theta: int,
    profile: Sequence[int],
) -> DecisionTrace:
    n = view.n
    if len(profile) != n or any(b not in (0, 1) for b in profile):
        raise ValueError("signal profile must hold one bit per agent")
    actions = [0] * n
    posts = [0.0] * n
    for v in view.ordering.order:
        t = tables[v]
        if t is None:
            raise ValueError(f"no decision table for agent {v}")
        key = t.key(profile[v], [actions[u] for u in t.observed], sum(actions[u] for u in t.pooled))
        actions[v] = int(t.actions[key])
        posts[v] = float(t.posteriors[key])
    return DecisionTrace(int(theta), [int(b) for b in profile], actions, posts)


def simulate_batch(view: OrientedView, tables: Sequence[DecisionTable | None], signals: np.ndarray, agents: Sequence[int] | None = None) -> np.ndarray:
    """Actions for many signal profiles at once (rows of ``signals``)."""
    order = list(view.ordering.order if agents is None else agents)
    observed = {v: tables[v].observed for v in order}  # type: ignore[union-attr]
    pooled = {v: tables[v].pooled for v in order}  # type: ignore[union-attr]
    packed = _pack(view.n, observed, pooled)
    offsets = packed[-1]
    flat = np.zeros(offsets[-1], dtype=np.uint8)
    for v in order:
        flat[offsets[v] : offsets[v + 1]] = tables[v].actions  # type: ignore[union-attr]
    sig = np.ascontiguousarray(signals, dtype=np.uint8)
    return _kernels.replay(np.asarray(order, dtype=np.int64), *packed, flat, sig)


def sample_signals(n: int, theta: int, q: float, rng: np.random.Generator, rows: int = 1) -> np.ndarray:
    correct = rng.random((rows, n)) < q
    return np.where(correct, theta, 1 - theta).astype(np.uint8)


def policy_rates(view: OrientedView, tables: Sequence[DecisionTable | None], q: float) -> np.ndarray:
    """Exact ``Pr(a_v = theta)`` of every agent under arbitrary tables, by
    enumerating all ``2^n`` signal profiles."""
    n = view.n
    if n > 22:
        raise ValueError("policy_rates enumerates 2^n profiles; n too large")
    rows = np.arange(1 << n, dtype=np.int64)
    bits = ((rows[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    w1, w0 = _signal_weights(bits.sum(axis=1), n, q)
    acts = simulate_batch(view, tables, bits)
    return 0.5 * (w1 @ (acts == 1) + w0 @ (acts == 0))
