"""Command-line experiment runner.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 property
violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from typing import Sequence

from . import __version__
from .booster import greedy_boost
from .engine import EngineConfig
from .families import FAMILY_NAMES, generate
from .graph import Graph, GraphError, Modification, load_graph
from .rates import OracleConfig, estimates_to_csv, graph_rate, rate_random
from .robustness import celebrity_worstcase, degradation, q_sweep, robustness_csv, sweep_csv
from .seeding import derive_rng
from .suites import SUITES

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_VIOLATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        raise UsageError(message)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {"seed": args.seed, "config_hash": config_hash(cfg), "version": __version__}


def _csv_with_header(body: str, prov: dict) -> str:
    return f"# seqlearn {prov['version']} seed={prov['seed']} config={prov['config_hash']}\n" + body


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _engine(args: argparse.Namespace) -> EngineConfig:
    return EngineConfig(q=args.q, mode=args.engine)


def _load(path: str) -> Graph:
    try:
        return load_graph(path)
    except OSError as exc:
        raise GraphError(f"cannot read graph file {path}: {exc}") from exc
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise GraphError(f"malformed graph file {path}: {exc}") from exc


def cmd_generate(args: argparse.Namespace) -> int:
    if args.family not in FAMILY_NAMES:
        raise UsageError(f"unknown family {args.family!r}; choose from {', '.join(FAMILY_NAMES)}")
    try:
        inst = generate(args.family, args.params, derive_rng(args.seed, "generate", 0))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    prov = provenance(args)
    data = {**inst.graph.to_json(), "provenance": prov}
    side = {**inst.sidecar(), "provenance": prov}
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if args.out:
        _emit(text, args.out)
        stem = args.out[:-5] if args.out.endswith(".json") else args.out
        _emit(json.dumps(side, indent=2, sort_keys=True) + "\n", stem + ".sidecar.json")
    else:
        _emit(json.dumps({"graph": data, "sidecar": side}, indent=2, sort_keys=True) + "\n", None)
    return EXIT_OK


def cmd_rate(args: argparse.Namespace) -> int:
    g = _load(args.graph)
    cfg = _engine(args)
    if args.vertex is not None and not 0 <= args.vertex < g.n:
        raise GraphError(f"vertex {args.vertex} out of range")
    vertices = [args.vertex] if args.vertex is not None else list(range(g.n))
    rows = []
    for v in vertices:
        rows.append((v, rate_random(g, v, cfg, args.trials, derive_rng(args.seed, "rate", v))))
    if args.graph_level:
        rows.append(("graph", graph_rate(g, cfg, args.trials, derive_rng(args.seed, "graph-rate", 0))))
    _emit(_csv_with_header(estimates_to_csv(rows, cfg.q, args.seed), provenance(args)), args.out)
    return EXIT_OK


def _oracle(args: argparse.Namespace, g: Graph) -> OracleConfig:
    labels = None
    if args.labels:
        with open(args.labels) as fh:
            data = json.load(fh)
        learners = data.get("learners", []) if isinstance(data, dict) else data
        labels = frozenset(int(v) for v in learners)
        return OracleConfig(kind="labels", labels=labels, t=args.t)
    return OracleConfig(kind=args.oracle, t=args.t, tau=args.tau, trials=args.trials)


def cmd_boost(args: argparse.Namespace) -> int:
    g = _load(args.graph)
    plan = greedy_boost(
        g,
        _oracle(args, g),
        k=args.k,
        tolerance=args.tolerance,
        abs_tol=args.eps_c,
        fail_prob=args.delta_c,
        rng=args.seed,
        engine_cfg=_engine(args),
    )
    prov = provenance(args)
    out = {"plan": plan.to_json(), "boosted_graph": plan.resulting_graph.to_json(), "provenance": prov}
    _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _parse_mod(text: str) -> Modification:
    kind, _, payload = text.partition(":")
    if kind in ("add-edge", "delete-edge"):
        u, _, v = payload.partition("-")
        return Modification(kind, (int(u), int(v)))
    if kind == "delete-vertex":
        return Modification(kind, int(payload))
    if kind == "add-vertex-with-edges":
        return Modification(kind, [int(x) for x in payload.split("-") if x])
    raise UsageError(f"unknown modification {text!r}")


def cmd_robustness(args: argparse.Namespace) -> int:
    prov = provenance(args)
    if args.celebrity:
        n, k = args.celebrity
        res = celebrity_worstcase(n, k, args.q, args.trials, args.seed)
        rows = [("celebrity", res)]
    else:
        if not args.graph or args.vertex is None:
            raise UsageError("robustness needs GRAPH and --vertex, or --celebrity N K")
        g = _load(args.graph)
        mods = [_parse_mod(m) for m in args.mods.split(",") if m] if args.mods else []
        res = degradation(g, args.vertex, _engine(args), mods, args.trials, args.seed)
        rows = [("graph", res)]
    _emit(_csv_with_header(robustness_csv(rows), prov), args.out)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        qs = [float(x) for x in args.qs.split(",")]
        inst = generate(args.family, args.params)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from exc
    members = inst.role(args.role)
    if not members:
        raise UsageError(f"family has no vertex with role {args.role!r}")
    points = q_sweep(lambda: inst, qs, lambda _: members[0], _engine(args), args.trials, args.seed)
    _emit(_csv_with_header(sweep_csv(points, args.family, inst.params), provenance(args)), args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    rep = SUITES[args.suite]()
    lines = [rep.line(), *rep.violations]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def read_table(path: str) -> tuple[list[str], list[dict[str, str]]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if len(rows) < 2 or not rows[0]:
        raise ValueError(f"{path} has no data rows")
    header = rows[0]
    if any(len(r) != len(header) for r in rows[1:]):
        raise ValueError(f"{path} has rows of inconsistent width")
    return header, [dict(zip(header, r)) for r in rows[1:]]


def cmd_plot(args: argparse.Namespace) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, rows = read_table(args.csv)
    x = args.x or header[0]
    y = args.y or next((c for c in ("rate", "mean", "after") if c in header), header[-1])
    for c in (x, y):
        if c not in header:
            raise ValueError(f"column {c!r} not in {header}")
    series: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        key = r.get(args.series, "") if args.series in header else ""
        series.setdefault(key, []).append((float(r[x]), float(r[y])))
    matplotlib.rcParams["svg.hashsalt"] = "seqlearn"
    # keep labels as text so the SVG stays searchable
    matplotlib.rcParams["svg.fonttype"] = "none"
    fig, ax = plt.subplots(figsize=(6, 4))
    for key in sorted(series):
        pts = sorted(series[key])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{args.series}={key}" if key else y)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.legend()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    prov = provenance(args)
    text = buf.getvalue().replace(
        "<svg ", f"<!-- seqlearn {prov['version']} seed={prov['seed']} config={prov['config_hash']} -->\n<svg ", 1
    )
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--q", type=float, default=0.7)
    common.add_argument("--engine", choices=("exact", "tabulated"), default="exact")
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--out", default=None)

    p = _Parser(prog="seqlearn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("generate", parents=[common], help="write a family instance as graph JSON")
    s.add_argument("family")
    s.add_argument("params", nargs="*")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("rate", parents=[common], help="random-order learning rates as CSV")
    s.add_argument("graph")
    group = s.add_mutually_exclusive_group()
    group.add_argument("--vertex", type=int)
    group.add_argument("--all", action="store_true")
    s.add_argument("--graph-level", action="store_true", help="append a row for the graph-level rate")
    s.set_defaults(func=cmd_rate)

    s = sub.add_parser("boost", parents=[common], help="greedy seed selection plus celebrity scaffold")
    s.add_argument("graph")
    s.add_argument("--k", type=int, default=8)
    s.add_argument("--tolerance", "-T", type=int, default=None)
    s.add_argument("--oracle", choices=("heuristic", "mc", "exact"), default="heuristic")
    s.add_argument("--labels", help="JSON list of learner ids (uses the labels oracle)")
    s.add_argument("--t", type=float, default=0.9)
    s.add_argument("--tau", type=float, default=8.0)
    s.add_argument("--eps-c", type=float, default=None)
    s.add_argument("--delta-c", type=float, default=0.01)
    s.set_defaults(func=cmd_boost)

    s = sub.add_parser("robustness", parents=[common], help="rates before and after edits")
    s.add_argument("graph", nargs="?")
    s.add_argument("--vertex", type=int)
    s.add_argument("--mods", help="comma list such as delete-vertex:3,add-edge:1-2")
    s.add_argument("--celebrity", type=int, nargs=2, metavar=("N", "K"))
    s.set_defaults(func=cmd_robustness)

    s = sub.add_parser("sweep-q", parents=[common], help="strategic-order rate of one vertex across q")
    s.add_argument("family")
    s.add_argument("params", nargs="*")
    s.add_argument("--qs", default="0.6,0.65,0.7,0.75,0.8,0.85,0.9")
    s.add_argument("--role", default="u0")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("verify", parents=[common], help="run a property suite")
    s.add_argument("suite")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("plot", parents=[common], help="render a CSV as an SVG line chart")
    s.add_argument("csv")
    s.add_argument("--x")
    s.add_argument("--y")
    s.add_argument("--series", default="vertex")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
