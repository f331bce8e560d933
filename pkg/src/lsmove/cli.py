"""Command-line entry point: ``lsmove {gen,compile,bench,sweep,verify}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from lsmove import bench
from lsmove.circuit import CircuitError, logical_depth, parse_circuit, random_circuit, serialize_circuit
from lsmove.protocol_verifier import DEFAULT_PROTOCOLS, PROTOCOLS, verify_protocol
from lsmove.router import UnroutableError, route_static
from lsmove.routing_graph import LAYOUTS, Mapping, build_layout
from lsmove.teleport_optimizer import AnnealConfig, compile_optimized

log = logging.getLogger("lsmove")

PROTOCOL_ALIASES = {"all": DEFAULT_PROTOCOLS, **{name: (name,) for name in PROTOCOLS}}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _layout_list(text: str) -> list[str]:
    names = [x.strip().lower() for x in text.split(",") if x.strip()]
    unknown = [n for n in names if n not in LAYOUTS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown layouts {unknown}; choose from {sorted(LAYOUTS)}")
    return names


def _add_anneal_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=None, help="lookahead layers (default 5)")
    p.add_argument("--r", type=int, default=None, help="neighborhood radius in edges (default 10)")
    p.add_argument("--iters", type=int, default=None, help="annealing iterations per layer (default 200)")
    p.add_argument("--jump", action="store_true", help="skip the search for k layers after a successful window")
    p.add_argument("--perturb", choices=("all", "one"), default=None, help="annealing move: re-sample all trees or one")
    p.add_argument("--config", type=Path, default=None, help="JSON file with annealing parameters")


def _anneal_config(args: argparse.Namespace) -> AnnealConfig:
    cfg = AnnealConfig.from_json(args.config) if args.config else AnnealConfig()
    overrides = {"seed": args.seed}
    for flag, name in (("k", "k"), ("r", "r"), ("iters", "iterations"), ("perturb", "perturb")):
        if getattr(args, flag) is not None:
            overrides[name] = getattr(args, flag)
    if args.jump:
        overrides["jump"] = True
    return replace(cfg, **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsmove", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit a random layered CNOT circuit")
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--g", type=int, required=True, help="gates per layer")
    p.add_argument("--depth", type=int, required=True, help="number of logical layers")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--independent", action="store_true", help="do not chain consecutive layers")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("compile", help="route a circuit file")
    p.add_argument("--circuit", type=Path, required=True)
    p.add_argument("--layout", default="pair", choices=sorted(LAYOUTS))
    p.add_argument("--qubits", type=int, default=None, help="data qubits of the layout (default: circuit width)")
    p.add_argument("--mode", choices=("static", "optimized"), default="optimized")
    p.add_argument("--mapping", type=Path, default=None, help="JSON object label -> vertex id")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    _add_anneal_flags(p)

    p = sub.add_parser("bench", help="layout x depth grid")
    p.add_argument("--layouts", type=_layout_list, default=["single", "pair", "triple", "hex"])
    p.add_argument("--depths", type=_int_list, default=[40, 80, 160, 320])
    p.add_argument("--qubits", type=int, default=120)
    p.add_argument("--g", type=int, default=8)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--json", type=Path, help="raw run records")
    _add_anneal_flags(p)

    p = sub.add_parser("sweep", help="gates-per-layer sweep at fixed gate count")
    p.add_argument("--g", type=_int_list, default=[2, 5, 10, 20, 25])
    p.add_argument("--total-gates", type=int, default=500)
    p.add_argument("--qubits", type=int, default=60)
    p.add_argument("--layout", default="triple", choices=sorted(LAYOUTS))
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path)
    p.add_argument("--json", type=Path, help="raw run records")
    _add_anneal_flags(p)

    p = sub.add_parser("verify", help="check the measurement-based CNOT protocols")
    p.add_argument("--protocol", default="all", choices=sorted(PROTOCOL_ALIASES))
    p.add_argument("--json", type=Path, help="write the reports as JSON")
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_gen(args) -> int:
    # the circuit itself may go to stdout
    print(f"seed: {args.seed}", file=sys.stdout if args.out else sys.stderr)
    try:
        circuit = random_circuit(args.qubits, args.g, args.depth, args.seed, dependent=not args.independent)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(serialize_circuit(circuit), args.out)
    return 0


def _load_mapping(path: Path, q: int) -> Mapping:
    try:
        raw = json.loads(path.read_text())
        mapping = Mapping.from_positions({int(k): int(v) for k, v in raw.items()})
    except (OSError, ValueError, AttributeError) as exc:
        raise UsageError(f"cannot read mapping {path}: {exc}") from None
    missing = set(range(q)) - set(mapping.position)
    if missing:
        raise UsageError(f"mapping lacks labels {sorted(missing)[:5]}")
    return mapping


def _cmd_compile(args) -> int:
    print(f"seed: {args.seed}")
    try:
        circuit = parse_circuit(args.circuit.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read circuit: {exc}") from None
    except CircuitError as exc:
        raise UsageError(f"{args.circuit}: {exc}") from None
    q = args.qubits or circuit.q
    if q < circuit.q:
        raise UsageError(f"layout has {q} qubits but the circuit uses {circuit.q}")
    graph, mapping = build_layout(args.layout, q, args.seed)
    if args.mapping:
        mapping = _load_mapping(args.mapping, circuit.q)
        bad = [v for v in mapping.occupant if v not in graph]
        if bad:
            raise UsageError(f"mapping uses unknown vertices {bad[:5]}")
    cfg = _anneal_config(args)
    if args.mode == "static":
        schedule = route_static(graph, mapping, circuit)
    else:
        schedule = compile_optimized(graph, mapping, circuit, cfg)
    print(f"d_L: {logical_depth(circuit)}")
    print(f"depth: {schedule.depth}")
    if args.out:
        args.out.write_text(schedule.dumps() + "\n")
    return 0


def _progress(rec: bench.RunRecord) -> None:
    log.info("%s q=%d g=%d dL=%d seed=%d: st=%d opt=%d (%.1fs)", rec.layout, rec.q, rec.g, rec.d_L, rec.seed, rec.d_st, rec.d_opt, rec.time_opt)


def _print_rows(rows) -> None:
    print(",".join(bench.CSV_HEADER))
    for row in rows:
        print(",".join(row.csv_row()))


def _cmd_bench(args) -> int:
    print(f"seed: {args.seed}")
    cfg = _anneal_config(args)
    rows, records = bench.run_grid(
        args.layouts, args.depths, args.qubits, args.g, args.samples, cfg, args.seed, args.jobs, _progress
    )
    _finish_table(args, rows, records)
    for layout in args.layouts:
        mine = [r for r in rows if r.layout == layout]
        if len({r.d_L for r in mine}) >= 2:
            st = bench.linear_fit([(r.d_L, r.dst_mean) for r in mine])
            opt = bench.linear_fit([(r.d_L, r.dopt_mean) for r in mine])
            print(f"fit {layout}: d_st = {st[0]:.2f} dL {st[1]:+.2f}; d_opt = {opt[0]:.2f} dL {opt[1]:+.2f}")
    return 0


def _cmd_sweep(args) -> int:
    print(f"seed: {args.seed}")
    cfg = _anneal_config(args)
    try:
        rows, records = bench.run_density_sweep(
            args.g, args.total_gates, args.qubits, args.layout, args.samples, cfg, args.seed, args.jobs, _progress
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _finish_table(args, rows, records)
    for row in rows:
        if row.note:
            print(f"note g={row.g}: {row.note}")
    return 0


def _finish_table(args, rows, records) -> None:
    if args.out:
        bench.write_csv(rows, args.out)
    _print_rows(rows)
    if args.json:
        bench.write_records(records, args.json, rows)


def _cmd_verify(args) -> int:
    print("seed: none (deterministic)")
    reports = [verify_protocol(PROTOCOLS[name]) for name in PROTOCOL_ALIASES[args.protocol]]
    for rep in reports:
        status = "pass" if rep.passed else "FAIL"
        line = f"{rep.label} ({rep.protocol}): {status}"
        if rep.first_failure is not None:
            line += f", first failing branch {rep.first_failure.outcomes}"
        print(line)
    if args.json:
        args.json.write_text(json.dumps([r.to_json() for r in reports], indent=1) + "\n")
    return 0 if all(r.passed for r in reports) else 1


COMMANDS = {
    "gen": _cmd_gen,
    "compile": _cmd_compile,
    "bench": _cmd_bench,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lsmove: error: {exc}", file=sys.stderr)
        return 2
    except (UnroutableError, bench.BenchError) as exc:
        print(f"lsmove: compilation failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # invalid parameter values (e.g. k < 1) surface from config validation
        print(f"lsmove: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
