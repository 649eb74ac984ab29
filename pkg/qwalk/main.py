"""
main.py - Command-line entry point

Quantum-walk search experiments: single runs, size sweeps, marked-coin
parameter scans, scaling fits and the classical spreading comparison.

Exit codes: 0 success, 2 config or input errors, 3 invariant violations
raised while building or running.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from . import __version__
from . import storage
from .analysis import fit_points, kink_edge_report, position_std, spread_comparison
from .config import SETTINGS, configure_logging
from .errors import AnalysisError, ConfigError, QwalkError
from .models import ExperimentConfig, FitModel, GraphKind, ScalingFit, SpreadConfig
from .search import (
    amplification_estimate,
    build_coin_assignment,
    parameter_scan,
    run_search,
    run_sweep,
    sweep_instances,
)
from .walk.graphs import build_graph

logger = logging.getLogger(__name__)
console = Console()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


# =============================================================================
# Helpers
# =============================================================================

def _experiment(args: argparse.Namespace, expected: str) -> ExperimentConfig:
    if not args.config:
        raise ConfigError(f"'{expected}' needs --config")
    experiment = storage.load_experiment(args.config)
    if experiment.kind != expected:
        raise ConfigError(f"{args.config} holds a '{experiment.kind}' experiment, not '{expected}'")
    return experiment


def _out_path(args: argparse.Namespace, suffix: str = ".csv") -> Path:
    if args.out:
        return Path(args.out)
    stem = Path(args.config).stem if getattr(args, "config", None) else args.command
    return Path(SETTINGS.output_dir) / f"{stem}{suffix}"


def _fit_line(fit: ScalingFit) -> str:
    """model c1 [c2 breakpoint] residual"""
    parts = [fit.model.value, f"{fit.prefactors[0]:.6g}"]
    if fit.model == FitModel.PIECEWISE_SQRT_N:
        parts += [f"{fit.prefactors[1]:.6g}", f"{fit.breakpoint:.6g}"]
    parts.append(f"{fit.rms_residual:.6g}")
    return " ".join(parts)


# =============================================================================
# Subcommands
# =============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    experiment = _experiment(args, "run")
    config = experiment.run
    run = run_search(config)
    out = _out_path(args)

    storage.atomic_write_text(out, storage.series_csv(run))
    storage.atomic_write_text(storage.sibling(out, ".peaks.csv"), storage.peaks_csv(run))
    if run.snapshots:
        storage.atomic_write_text(storage.sibling(out, ".snapshots.csv"), storage.snapshots_csv(run))
    if args.gnuplot:
        storage.write_gnuplot(out, "run", ["t", "p_marked"])

    peak = run.first_significant_peak()
    table = Table(title=f"Search on {config.graph.kind.value}, marked {config.marked_vertex}")
    table.add_column("N", justify="right")
    table.add_column("steps", justify="right")
    table.add_column("peak t", justify="right")
    table.add_column("peak p", justify="right")
    table.add_column("repetitions", justify="right")
    if peak is None:
        table.add_row(str(run.vertex_count), str(run.steps), "-", "-", "-")
    else:
        table.add_row(
            str(run.vertex_count), str(run.steps), str(peak.time),
            f"{peak.probability:.4f}", str(amplification_estimate(peak.probability)),
        )
    console.print(table)

    storage.write_sidecar(out, experiment, time.perf_counter() - started, {
        "first_significant_peak": peak.model_dump() if peak else None,
    })
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    experiment = _experiment(args, "sweep")
    parallel = args.parallel or SETTINGS.parallel
    results = run_sweep(experiment.sweep, parallel)
    out = _out_path(args)

    storage.atomic_write_text(out, storage.sweep_csv(results))
    if args.gnuplot:
        storage.write_gnuplot(out, "sweep", ["n", "peak_prob"])

    table = Table(title=f"Sweep over {experiment.sweep.kind.value}")
    for name in ("instance", "N", "edges", "peak t", "peak p", "significant"):
        table.add_column(name, justify="left" if name == "instance" else "right")
    for r in results:
        table.add_row(
            r.label, str(r.point.n), str(r.point.edges), str(r.point.peak_time),
            f"{r.point.peak_prob:.4f}", "yes" if r.significant else "no",
        )
    console.print(table)

    storage.write_sidecar(out, experiment, time.perf_counter() - started, {
        "parallel": parallel,
        "instances": [
            {"label": r.label, "marked_vertex": r.marked_vertex, "significant": r.significant}
            for r in results
        ],
    })
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    experiment = _experiment(args, "scan")
    scan = experiment.scan
    runs = parameter_scan(scan.base, scan.parameter, scan.values, args.parallel or SETTINGS.parallel)
    labels = [f"{scan.parameter}={v:g}" for v in scan.values]
    out = _out_path(args)

    storage.atomic_write_text(out, storage.wide_csv(labels, runs))
    if args.gnuplot:
        storage.write_gnuplot(out, "scan", ["t"] + [f"p[{label}]" for label in labels])

    table = Table(title=f"Marked-coin {scan.parameter} scan")
    table.add_column(scan.parameter, justify="right")
    table.add_column("peak t", justify="right")
    table.add_column("peak p", justify="right")
    for v, run in zip(scan.values, runs):
        peak = run.first_significant_peak()
        table.add_row(f"{v:g}", str(peak.time) if peak else "-", f"{peak.probability:.4f}" if peak else "-")
    console.print(table)

    storage.write_sidecar(out, experiment, time.perf_counter() - started)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    if args.config:
        experiment = _experiment(args, "fit")
        input_path, model = experiment.fit.input, experiment.fit.model
    else:
        if not args.input or not args.model:
            raise ConfigError("'fit' needs --config, or both --input and --model")
        input_path, model = args.input, FitModel(args.model)

    points = storage.read_sweep_csv(input_path)
    fit = fit_points(points, model)
    out = Path(args.out) if args.out else storage.sibling(input_path, f".{model.value}.json")
    storage.atomic_write_text(out, storage.fit_report_json(fit))
    console.print(_fit_line(fit))
    return EXIT_OK


def cmd_kink(args: argparse.Namespace) -> int:
    if not args.input:
        raise ConfigError("'kink' needs one or more --input kind=path entries")
    fits = {}
    for entry in args.input:
        kind, sep, path = entry.partition("=")
        if not sep:
            raise ConfigError(f"--input for 'kink' must be kind=path, got '{entry}'")
        try:
            graph_kind = GraphKind(kind)
        except ValueError as e:
            raise ConfigError(f"Unknown structure '{kind}'") from e
        fits[kind] = (graph_kind, fit_points(storage.read_sweep_csv(path), FitModel.PIECEWISE_SQRT_N))

    report = kink_edge_report(fits)
    table = Table(title=f"Breakpoints against {report.reference_edges:g} edges")
    for name in ("structure", "sqrt N", "N", "edges", "ports"):
        table.add_column(name, justify="left" if name == "structure" else "right")
    for row, edge_ok, port_ok in zip(report.rows, report.edges_match_reference, report.ports_match_reference):
        table.add_row(
            row.structure, f"{row.breakpoint_side:g}", f"{row.breakpoint_n:g}",
            f"{row.edges:g}{' *' if edge_ok else ''}", f"{row.ports:g}{' *' if port_ok else ''}",
        )
    console.print(table)
    console.print(f"edges agree: {report.edges_agree}  ports agree: {report.ports_agree}")

    if args.out:
        storage.atomic_write_text(args.out, report.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def cmd_spread(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.config:
        experiment = _experiment(args, "spread")
    else:
        experiment = ExperimentConfig(spread=SpreadConfig(steps=args.steps))
    t = experiment.spread.steps
    positions, classical, quantum = spread_comparison(t)
    out = _out_path(args)

    storage.atomic_write_text(out, storage.spread_csv(positions, classical, quantum))
    if args.gnuplot:
        storage.write_gnuplot(out, "spread", ["x", "classical", "quantum"])

    sigma_c = position_std(positions, classical)
    sigma_q = position_std(positions, quantum)
    console.print(f"t={t}  classical sigma={sigma_c:.4f}  quantum sigma={sigma_q:.4f}  ratio={sigma_q / sigma_c:.3f}")
    storage.write_sidecar(out, experiment, time.perf_counter() - started, {
        "classical_std": sigma_c,
        "quantum_std": sigma_q,
    })
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    """Parse a config and build every graph and coin it names, without evolving."""
    if not args.config:
        raise ConfigError("'validate' needs --config")
    experiment = storage.load_experiment(args.config)

    if experiment.kind == "run":
        configs = [experiment.run]
    elif experiment.kind == "sweep":
        configs = [config for _, config in sweep_instances(experiment.sweep)]
    elif experiment.kind == "scan":
        scan = experiment.scan
        configs = [
            scan.base.model_copy(update={"marked_coin": scan.base.marked_coin.with_parameter(scan.parameter, v)})
            for v in scan.values
        ]
    elif experiment.kind == "fit":
        storage.read_sweep_csv(experiment.fit.input)
        configs = []
    else:
        configs = []

    for config in configs:
        graph = build_graph(config.graph)
        if config.marked_vertex >= graph.vertex_count:
            raise ConfigError(f"marked_vertex {config.marked_vertex} out of range for {graph!r}")
        build_coin_assignment(config, graph)
        logger.debug("Validated %r", graph)

    console.print(f"[green]OK[/green] {args.config}: {experiment.kind} experiment, {len(configs)} graph(s) checked")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "scan": cmd_scan,
    "fit": cmd_fit,
    "kink": cmd_kink,
    "spread": cmd_spread,
    "validate": cmd_validate,
}


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk",
        description="Coined quantum-walk spatial search experiments",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool = True) -> None:
        p.add_argument("--config", required=needs_config, help="Experiment config (JSON)")
        p.add_argument("--out", help="Output path (defaults to <output_dir>/<config stem>.csv)")
        p.add_argument("--gnuplot", action="store_true", help="Also write a gnuplot script next to the CSV")

    p = sub.add_parser("run", help="Single search run")
    common(p)

    p = sub.add_parser("sweep", help="Search over a range of structure sizes")
    common(p)
    p.add_argument("--parallel", type=int, default=None, help="Instances to run at once")

    p = sub.add_parser("scan", help="Marked-coin delta or phi scan")
    common(p)
    p.add_argument("--parallel", type=int, default=None, help="Runs to execute at once")

    p = sub.add_parser("fit", help="Fit a scaling law to a sweep CSV")
    p.add_argument("--config", help="Fit experiment config (JSON)")
    p.add_argument("--input", help="Sweep CSV")
    p.add_argument("--model", choices=[m.value for m in FitModel])
    p.add_argument("--out", help="Fit report path (JSON)")

    p = sub.add_parser("kink", help="Compare piecewise-fit breakpoints across structures")
    p.add_argument("--input", action="append", help="kind=path of a sweep CSV, repeatable")
    p.add_argument("--out", help="Report path (JSON)")

    p = sub.add_parser("spread", help="Quantum vs classical spreading on the line")
    common(p, needs_config=False)
    p.add_argument("--steps", type=int, default=100)

    p = sub.add_parser("validate", help="Check a config and build its graphs and coins")
    p.add_argument("--config", required=True, help="Experiment config (JSON)")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging("DEBUG" if args.verbose else None)
    if getattr(args, "parallel", None) is not None and args.parallel < 1:
        logger.error("--parallel must be a positive integer, got %d", args.parallel)
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](args)
    except (ConfigError, AnalysisError, ValidationError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except QwalkError as e:
        logger.error("%s", e)
        return EXIT_INVARIANT


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
