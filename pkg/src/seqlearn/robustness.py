"""How learning rates respond to adversarial edits, and how strategically
ordered networks respond to the signal quality."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import engine
from .engine import EngineConfig
from .families import FamilyInstance, celebrity
from .graph import Graph, Modification, OrientedView, apply_modifications
from .rates import RateEstimate, graph_rate, rate_random
from .seeding import as_master_seed, derive_rng


class TargetDeletedError(ValueError):
    pass


@dataclass
class ExperimentResult:
    before: RateEstimate
    after: RateEstimate
    bound: float
    mods: list[Modification] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.after.mean >= self.bound - 1e-12


def degradation_floor(before: float, mods: Sequence[Modification]) -> float:
    """Lower bound on the post-edit rate.

    ``k`` vertex edits give ``1 - (k+1) eps``; ``k`` edge edits give
    ``1 - (k + 1/2) eps``. A mixed list counts every edit as a vertex edit.
    """
    eps = 1.0 - before
    k = len(mods)
    if k == 0:
        return before
    if any(m.is_vertex_mod for m in mods):
        return 1.0 - (k + 1) * eps
    return 1.0 - (2 * k + 1) / 2.0 * eps


def degradation(
    graph: Graph,
    v: int,
    cfg: EngineConfig,
    mods: Sequence[Modification],
    trials: int = 1000,
    rng: np.random.Generator | int | None = None,
) -> ExperimentResult:
    edited, mapping = apply_modifications(graph, list(mods))
    if v not in mapping:
        raise TargetDeletedError(f"target vertex {v} is deleted by the modifications")
    master = as_master_seed(rng)
    before = rate_random(graph, v, cfg, trials, derive_rng(master, "before", 0))
    if not mods:
        after = before
    else:
        after = rate_random(edited, mapping[v], cfg, trials, derive_rng(master, "after", 0))
    params = {"q": cfg.q, "seed": master, "trials": trials, "vertex": v}
    return ExperimentResult(before, after, degradation_floor(before.mean, mods), list(mods), params)


def celebrity_worstcase(
    n: int,
    k: int,
    q: float,
    trials: int = 2000,
    rng: np.random.Generator | int | None = None,
    cfg: EngineConfig | None = None,
) -> ExperimentResult:
    """Graph-level rate of ``celebrity(n, k)`` before and after deleting all
    celebrities; the remainder is edgeless, so its rate is exactly ``q``."""
    inst = celebrity(n, k)
    cfg = (cfg or EngineConfig(q=q, mode="tabulated")).with_q(q)
    master = as_master_seed(rng)
    before = graph_rate(inst.graph, cfg, trials, derive_rng(master, "celebrity", 0))
    after = RateEstimate(q, 0.0, 0, "exact-enum")
    mods = [Modification("delete-vertex", c) for c in reversed(range(k))]
    params = {"family": "celebrity", "n": n, "k": k, "q": q, "seed": master, "trials": trials}
    return ExperimentResult(before, after, degradation_floor(before.mean, mods), mods, params)


ROBUSTNESS_COLUMNS = ("family", "params", "q", "vertex", "before", "after", "bound", "trials", "seed")


def robustness_csv(results: Iterable[tuple[str, ExperimentResult]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROBUSTNESS_COLUMNS)
    for family, r in results:
        p = r.params
        w.writerow([
            family,
            json.dumps({k: v for k, v in p.items() if k not in ("q", "seed", "trials", "vertex")}, sort_keys=True),
            p.get("q"),
            p.get("vertex", ""),
            f"{r.before.mean:.10f}",
            f"{r.after.mean:.10f}",
            f"{r.bound:.10f}",
            p.get("trials"),
            p.get("seed"),
        ])
    return buf.getvalue()


@dataclass(frozen=True)
class SweepPoint:
    q: float
    vertex: int
    rate: float
    half_width: float
    method: str
    tables: tuple = ()


def strategic_rate(
    inst: FamilyInstance,
    v: int,
    cfg: EngineConfig,
    trials: int = 20000,
    rng: np.random.Generator | int | None = None,
) -> SweepPoint:
    """Rate of ``v`` under the instance's strategic ordering: exact when the
    engine is exact and the cone fits, otherwise tables are tabulated once and
    scored on ``trials`` fresh signal profiles."""
    if inst.strategic_order is None:
        raise ValueError("instance has no strategic ordering")
    view = OrientedView(inst.graph, inst.strategic_order)
    if cfg.mode == "exact" and engine.cone_fits(view, v, cfg):
        tables = engine.build_tables_exact(view, cfg)
        return SweepPoint(cfg.q, v, tables[v].rate(), 0.0, "exact", tuple(tables))
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    tables = engine.build_tables_tabulated(view, cfg, gen)
    theta = gen.integers(2, size=trials)
    correct = gen.random((trials, inst.graph.n)) < cfg.q
    signals = np.where(correct, theta[:, None], 1 - theta[:, None]).astype(np.uint8)
    acts = engine.simulate_batch(view, tables, signals)
    hits = (acts[:, v] == theta).astype(float)
    hw = 1.959963984540054 * float(hits.std(ddof=1)) / np.sqrt(trials)
    return SweepPoint(cfg.q, v, float(hits.mean()), hw, "mc-full", tuple(tables))


def q_sweep(
    build: Callable[[], FamilyInstance],
    qs: Sequence[float],
    select: Callable[[FamilyInstance], int],
    cfg: EngineConfig,
    trials: int = 20000,
    rng: np.random.Generator | int | None = None,
) -> list[SweepPoint]:
    if any(not 0.5 < q < 1 for q in qs):
        raise ValueError("every q must lie in (1/2, 1)")
    inst = build()
    v = select(inst)
    master = as_master_seed(rng)
    return [strategic_rate(inst, v, cfg.with_q(q), trials, derive_rng(master, "sweep", i)) for i, q in enumerate(qs)]


def sweep_csv(points: Sequence[SweepPoint], family: str, params: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("family", "params", "q", "vertex", "rate", "half_width", "method"))
    for p in points:
        w.writerow([family, json.dumps(params, sort_keys=True), p.q, p.vertex, f"{p.rate:.10f}", f"{p.half_width:.10f}", p.method])
    return buf.getvalue()


def follows(table: engine.DecisionTable, u: int) -> bool:
    """True when the agent's action always equals the observed action of ``u``."""
    j = table.observed.index(u)
    keys = np.arange(table.actions.size)
    return bool(np.all(table.actions == ((keys >> (j + 1)) & 1)))

