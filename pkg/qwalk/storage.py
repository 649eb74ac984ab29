"""
storage.py - File interface module

All experiment-config reads and result writes are isolated in this module.
Data files are byte-deterministic: floats use the shortest round-trip
decimal and timestamps live only in the sidecar metadata file.
"""

import csv
import io
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config import SETTINGS
from .errors import ConfigError
from .models import ExperimentConfig, ScalingFit, ScalingPoint
from .search import SearchRun, SweepResult
from .walk.graphs import build_graph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SWEEP_COLUMNS = ["n", "edges", "peak_prob", "peak_time"]


def format_float(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def atomic_write_text(path: PathLike, text: str) -> Path:
    """
    Write a file so that it appears only once complete.

    Args:
        path: Destination path (parent directories are created)
        text: File contents

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        with open(tmp_path, "w", newline="", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp_path, path)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()
    logger.info("Wrote %s", path)
    return path


def sibling(path: PathLike, suffix: str) -> Path:
    """<stem><suffix> next to path, e.g. run.csv -> run.peaks.csv."""
    path = Path(path)
    return path.with_name(path.stem + suffix)


# =============================================================================
# Experiment configs
# =============================================================================

def load_experiment(path: PathLike) -> ExperimentConfig:
    """
    Parse an experiment config file.

    Raises:
        ConfigError: Missing file, malformed JSON, or a field that fails validation
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON in {path}: {e}") from e

    if isinstance(raw, dict):
        raw.pop("comment", None)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise ConfigError(f"Invalid config field '{field}' in {path}: {first['msg']}") from e


# =============================================================================
# CSV renderers
# =============================================================================

def series_csv(run: SearchRun) -> str:
    """t,p_marked for every step."""
    return _csv_text(["t", "p_marked"], ((t, format_float(p)) for t, p in enumerate(run.p_marked)))


def peaks_csv(run: SearchRun) -> str:
    return _csv_text(
        ["time", "probability", "significant"],
        ((p.time, format_float(p.probability), str(p.significant).lower()) for p in run.peaks),
    )


def wide_csv(labels: Sequence[str], runs: Sequence[SearchRun]) -> str:
    """t,p[label1],p[label2],... with blanks where a shorter series has ended."""
    length = max(len(r.p_marked) for r in runs)
    header = ["t"] + [f"p[{label}]" for label in labels]
    rows = []
    for t in range(length):
        row = [t]
        for r in runs:
            row.append(format_float(r.p_marked[t]) if t < len(r.p_marked) else "")
        rows.append(row)
    return _csv_text(header, rows)


def snapshots_csv(run: SearchRun) -> str:
    """t,vertex,probability per requested step, with row,col on lattices."""
    graph = build_graph(run.config.graph)
    lattice = "width" in graph.metadata
    header = ["t", "vertex", "probability"] + (["row", "col"] if lattice else [])
    rows = []
    for t in sorted(run.snapshots):
        for v, p in enumerate(run.snapshots[t]):
            row = [t, v, format_float(p)]
            if lattice:
                row.extend(graph.coordinates(v))
            rows.append(row)
    return _csv_text(header, rows)


def sweep_csv(results: Sequence[Union[SweepResult, ScalingPoint]]) -> str:
    points = [r.point if isinstance(r, SweepResult) else r for r in results]
    return _csv_text(
        SWEEP_COLUMNS,
        ((p.n, p.edges, format_float(p.peak_prob), p.peak_time) for p in points),
    )


def spread_csv(positions: np.ndarray, classical: np.ndarray, quantum: np.ndarray) -> str:
    return _csv_text(
        ["x", "classical", "quantum"],
        ((int(x), format_float(c), format_float(q)) for x, c, q in zip(positions, classical, quantum)),
    )


# =============================================================================
# Readers
# =============================================================================

def read_sweep_csv(path: PathLike) -> List[ScalingPoint]:
    """
    Load sweep points from an n,edges,peak_prob,peak_time CSV.

    Raises:
        ConfigError: Missing file, wrong header, or a row that does not parse
    """
    path = Path(path)
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or list(reader.fieldnames) != SWEEP_COLUMNS:
                raise ConfigError(
                    f"{path}: expected header {','.join(SWEEP_COLUMNS)}, got {reader.fieldnames}"
                )
            points = []
            for line_no, row in enumerate(reader, start=2):
                try:
                    points.append(ScalingPoint(
                        n=int(row["n"]),
                        edges=int(row["edges"]),
                        peak_prob=float(row["peak_prob"]),
                        peak_time=int(row["peak_time"]),
                    ))
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"{path}:{line_no}: malformed sweep row {row}: {e}") from e
    except FileNotFoundError as e:
        raise ConfigError(f"Sweep file not found: {path}") from e
    logger.debug("Read %d sweep points from %s", len(points), path)
    return points


# =============================================================================
# JSON outputs
# =============================================================================

def fit_report_json(fit: ScalingFit) -> str:
    return json.dumps(fit.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def write_sidecar(out: PathLike, experiment: ExperimentConfig, elapsed_seconds: float,
                  extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write <out>.meta.json with the config echo, version, settings and timing.

    Args:
        out: Primary output path the metadata describes
        experiment: Parsed experiment config
        elapsed_seconds: Wall time of the experiment
        extra: Additional experiment-specific fields

    Returns:
        Sidecar path
    """
    out = Path(out)
    meta = {
        "version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": elapsed_seconds,
        "output": out.name,
        "experiment": experiment.model_dump(mode="json", exclude_none=True),
        "settings": SETTINGS.model_dump(mode="json"),
        "seed": SETTINGS.seed,
    }
    if extra:
        meta.update(extra)
    return atomic_write_text(out.with_name(out.name + ".meta.json"), json.dumps(meta, indent=2) + "\n")


# =============================================================================
# Gnuplot
# =============================================================================

GNUPLOT_LAYOUTS = {
    "run": ("t", "p_marked", "lines"),
    "scan": ("t", "p", "lines"),
    "sweep": ("n", "peak_prob", "linespoints"),
    "spread": ("x", "probability", "points"),
}


def gnuplot_script(data_path: PathLike, kind: str, columns: Sequence[str]) -> str:
    """Plot every non-x column of a CSV against its first column."""
    data_path = Path(data_path)
    xlabel, ylabel, style = GNUPLOT_LAYOUTS[kind]
    plots = [
        f"'{data_path.name}' using 1:{i + 1} with {style} title '{name}'"
        for i, name in enumerate(columns) if i > 0
    ]
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set terminal pngcairo size 900,600",
        f"set output '{data_path.stem}.png'",
        "plot " + ", \\\n     ".join(plots),
    ]
    return "\n".join(lines) + "\n"


def write_gnuplot(data_path: PathLike, kind: str, columns: Sequence[str]) -> Path:
    return atomic_write_text(sibling(data_path, ".gp"), gnuplot_script(data_path, kind, columns))
