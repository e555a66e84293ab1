"""Command-line front end: run scenarios, sweeps, and config validation."""

from __future__ import annotations

import argparse
import os
import sys

from . import config as cfg
from . import engine, experiments
from .errors import ConfigError, DomainError, InvariantViolation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _summary(metrics: engine.ScenarioMetrics) -> str:
    lines = [
        "== scenario summary ==",
        f"protocol: {metrics.protocol}",
        f"recovery_time_steps: {metrics.recovery_time_steps}",
        f"recovered: {'true' if metrics.recovered else 'false'}",
        f"final_coverage_fraction: {metrics.final_coverage_fraction:.10g}",
        f"mean_distance_moved_m: {metrics.mean_distance_moved:.10g}",
        "mean_node_energy_spent_fraction: "
        f"{metrics.mean_node_energy_spent_fraction:.10g}",
        f"node_computational_cost: {metrics.total_computational_cost:.10g}",
        "network_computational_cost: "
        f"{metrics.network_computational_cost:.10g}",
        f"registrations: intra={metrics.registrations_intra} "
        f"inter={metrics.registrations_inter}",
        f"registration_latency_ms: {metrics.total_latency_ms:.10g}",
        f"protocol_bytes: {metrics.protocol_bytes}",
    ]
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    try:
        values = cfg.load_config(args.config)
        if args.seed is not None:
            values["scenario"]["seed"] = args.seed
        if args.protocol is not None:
            values["scenario"]["protocol"] = args.protocol
        scenario = cfg.build_scenario(values)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    trace_rows: list[str] = []
    sink = trace_rows.append if values["run"]["trace"] else None
    try:
        metrics = engine.run_scenario(scenario, trace_sink=sink)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    out_path = args.out or "metrics.csv"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(engine.results_to_csv([metrics]))
    if sink is not None:
        trace_path = os.path.splitext(out_path)[0] + "_trace.csv"
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("step,node_id,x,y,holes_remaining\n")
            fh.write("\n".join(trace_rows) + ("\n" if trace_rows else ""))

    sys.stdout.write("== effective config ==\n")
    sys.stdout.write(cfg.render_effective(values))
    sys.stdout.write(_summary(metrics))
    sys.stdout.write(f"metrics csv: {out_path}\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        base, axis, values, protocols = experiments.preset(args.name)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        rows = engine.sweep(base, axis, values, protocols)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, f"{args.name}.csv")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(engine.results_to_csv(rows))
    print(f"wrote {out_path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        values = cfg.load_config(args.config)
        cfg.build_scenario(values)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write("== effective config ==\n")
    sys.stdout.write(cfg.render_effective(values))
    print("config ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsnheal",
        description="Clustered sensor-field hole recovery simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--protocol", choices=list(engine.PROTOCOLS),
                       default=None)
    p_run.add_argument("--out", default=None, help="metrics CSV path")
    p_run.set_defaults(func=cmd_run)

    p_exp = sub.add_parser("experiment", help="run a named preset sweep")
    p_exp.add_argument("name")
    p_exp.add_argument("--out", default=".", help="output directory")
    p_exp.set_defaults(func=cmd_experiment)

    p_val = sub.add_parser("validate",
                           help="check a config file without running")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
