"""
analysis.py - Scaling fits, kink report and the classical line baseline

All fits are unweighted least squares through the origin. Sweep points carry
both the peak probability and the peak time; each fit takes the column to
fit as `field`.
"""

import logging
import math
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.stats import binom

from .errors import AnalysisError
from .models import (
    CoinFamily,
    CoinSpec,
    FitModel,
    GraphKind,
    KinkReport,
    KinkRow,
    ScalingFit,
    ScalingPoint,
)
from .walk.core import CoinAssignment, WalkState, evolve, position_distribution
from .walk.graphs import build_line

logger = logging.getLogger(__name__)

# Column each model is fitted to when the caller does not say
DEFAULT_FIELDS = {
    FitModel.INVERSE_LOG2: "peak_prob",
    FitModel.SQRT_N: "peak_time",
    FitModel.PIECEWISE_SQRT_N: "peak_time",
    FitModel.LINEAR: "peak_time",
}

# Undirected edges and ports per vertex on the periodic lattices
EDGES_PER_VERTEX = {GraphKind.TORUS: 2.0, GraphKind.TORUS_DIAGONAL: 4.0, GraphKind.HEX_TORUS: 1.5}
PORTS_PER_VERTEX = {GraphKind.TORUS: 4.0, GraphKind.TORUS_DIAGONAL: 8.0, GraphKind.HEX_TORUS: 3.0}
AGREEMENT_RATIO = 1.25

MIN_POINTS = 3
MIN_PIECEWISE_POINTS = 6


def _columns(points: Sequence[ScalingPoint], field: str) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    if field not in ("peak_prob", "peak_time"):
        raise AnalysisError(f"Can only fit peak_prob or peak_time, got '{field}'")
    n = np.array([p.n for p in points], dtype=np.float64)
    y = np.array([getattr(p, field) for p in points], dtype=np.float64)
    return n, y


def _through_origin(x: NDArray[np.float64], y: NDArray[np.float64]) -> Tuple[float, float]:
    """Least-squares c for y = c x, and its sum of squared residuals."""
    c = float(np.dot(x, y) / np.dot(x, x))
    resid = y - c * x
    return c, float(np.dot(resid, resid))


def _require(points: Sequence[ScalingPoint], minimum: int, model: FitModel) -> None:
    if len(points) < minimum:
        raise AnalysisError(f"{model.value} fit needs at least {minimum} points, got {len(points)}")
    if len({p.n for p in points}) < 2:
        raise AnalysisError(f"{model.value} fit needs at least two distinct sizes")


# =============================================================================
# Fits
# =============================================================================

def fit_inverse_log(points: Sequence[ScalingPoint], field: str = "peak_prob") -> ScalingFit:
    """
    Fit y = c / log2(N).

    Args:
        points: Sweep points (at least 3, not all the same N, every N >= 2)
        field: Column to fit

    Returns:
        ScalingFit with c = sum(y/L) / sum(1/L^2), L = log2 N

    Raises:
        AnalysisError: Too few points, a single size, or N = 1
    """
    _require(points, MIN_POINTS, FitModel.INVERSE_LOG2)
    n, y = _columns(points, field)
    if np.any(n < 2):
        raise AnalysisError("inverse_log2 fit needs every N >= 2")
    c, sse = _through_origin(1.0 / np.log2(n), y)
    return ScalingFit(model=FitModel.INVERSE_LOG2, prefactors=[c], rms_residual=math.sqrt(sse / n.size))


def fit_sqrt(points: Sequence[ScalingPoint], field: str = "peak_time") -> ScalingFit:
    """Fit y = c sqrt(N)."""
    _require(points, MIN_POINTS, FitModel.SQRT_N)
    n, y = _columns(points, field)
    c, sse = _through_origin(np.sqrt(n), y)
    return ScalingFit(model=FitModel.SQRT_N, prefactors=[c], rms_residual=math.sqrt(sse / n.size))


def fit_linear(points: Sequence[ScalingPoint], field: str = "peak_time") -> ScalingFit:
    """Fit y = c N."""
    _require(points, MIN_POINTS, FitModel.LINEAR)
    n, y = _columns(points, field)
    c, sse = _through_origin(n, y)
    return ScalingFit(model=FitModel.LINEAR, prefactors=[c], rms_residual=math.sqrt(sse / n.size))


def fit_piecewise_sqrt(points: Sequence[ScalingPoint], field: str = "peak_time") -> ScalingFit:
    """
    Fit c1 sqrt(N) below a breakpoint and c2 sqrt(N) from it upward.

    Candidate breakpoints sit between consecutive distinct sqrt(N) values and
    each segment keeps at least two distinct sizes. The reported breakpoint is
    the smallest sqrt(N) of the upper segment.

    Raises:
        AnalysisError: Fewer than 6 points, or fewer than 4 distinct sizes
    """
    if len(points) < MIN_PIECEWISE_POINTS:
        raise AnalysisError(
            f"piecewise_sqrt_n fit needs at least {MIN_PIECEWISE_POINTS} points, got {len(points)}"
        )
    n, y = _columns(points, field)
    x = np.sqrt(n)
    distinct = np.unique(x)
    if distinct.size < 4:
        raise AnalysisError(
            f"piecewise_sqrt_n fit needs at least 4 distinct sizes to place a breakpoint, got {distinct.size}"
        )

    best = None
    for k in range(2, distinct.size - 1):
        upper = x >= distinct[k]
        c1, sse1 = _through_origin(x[~upper], y[~upper])
        c2, sse2 = _through_origin(x[upper], y[upper])
        total = sse1 + sse2
        if best is None or total < best[0]:
            best = (total, c1, c2, float(distinct[k]))

    sse, c1, c2, breakpoint = best
    logger.debug("Piecewise breakpoint at sqrt(N)=%g, SSE=%.4g", breakpoint, sse)
    return ScalingFit(
        model=FitModel.PIECEWISE_SQRT_N,
        prefactors=[c1, c2],
        breakpoint=breakpoint,
        rms_residual=math.sqrt(sse / n.size),
    )


def fit_points(points: Sequence[ScalingPoint], model: FitModel, field: Optional[str] = None) -> ScalingFit:
    """Dispatch to the fit for `model`, on its default column unless told otherwise."""
    model = FitModel(model)
    field = field or DEFAULT_FIELDS[model]
    fitters = {
        FitModel.INVERSE_LOG2: fit_inverse_log,
        FitModel.SQRT_N: fit_sqrt,
        FitModel.PIECEWISE_SQRT_N: fit_piecewise_sqrt,
        FitModel.LINEAR: fit_linear,
    }
    return fitters[model](points, field)


# =============================================================================
# Kink report
# =============================================================================

def kink_edge_report(fits: Mapping[str, Tuple[GraphKind, ScalingFit]]) -> KinkReport:
    """
    Edge and port counts at each structure's breakpoint.

    Undirected edges and ports are both reported and compared with the
    4 * 32^2 figure, since a degree-4 torus at N = 32^2 has 2 * 32^2 edges but
    4 * 32^2 ports.

    Args:
        fits: structure label -> (lattice kind, piecewise fit)

    Raises:
        AnalysisError: A fit without a breakpoint or a kind with no per-vertex edge count
    """
    rows: List[KinkRow] = []
    for structure, (kind, fit) in fits.items():
        kind = GraphKind(kind)
        if fit.breakpoint is None:
            raise AnalysisError(f"{structure}: fit has no breakpoint")
        if kind not in EDGES_PER_VERTEX:
            raise AnalysisError(f"{structure}: no edge density for {kind.value}")
        n = fit.breakpoint ** 2
        rows.append(KinkRow(
            structure=structure,
            breakpoint_side=fit.breakpoint,
            breakpoint_n=n,
            edges=EDGES_PER_VERTEX[kind] * n,
            ports=PORTS_PER_VERTEX[kind] * n,
        ))

    reference = KinkReport.model_fields["reference_edges"].default

    def agree(values: List[float]) -> bool:
        return bool(values) and max(values) <= AGREEMENT_RATIO * min(values)

    def matches(value: float) -> bool:
        return max(value, reference) <= AGREEMENT_RATIO * min(value, reference)

    return KinkReport(
        rows=rows,
        edges_agree=agree([r.edges for r in rows]),
        ports_agree=agree([r.ports for r in rows]),
        edges_match_reference=[matches(r.edges) for r in rows],
        ports_match_reference=[matches(r.ports) for r in rows],
    )


# =============================================================================
# Line baselines
# =============================================================================

def classical_line_distribution(t: int) -> NDArray[np.float64]:
    """
    Unbiased classical random walk after t steps, over positions -t..t.

    P(x) = C(t, (t+x)/2) / 2^t when x has the parity of t, zero otherwise.
    """
    if t < 0:
        raise AnalysisError(f"steps must be >= 0, got {t}")
    out = np.zeros(2 * t + 1, dtype=np.float64)
    out[::2] = binom.pmf(np.arange(t + 1), t, 0.5)
    return out


def position_std(positions: NDArray, probabilities: NDArray) -> float:
    """Standard deviation of a position distribution."""
    x = np.asarray(positions, dtype=np.float64)
    p = np.asarray(probabilities, dtype=np.float64)
    mean = float(np.dot(x, p))
    return math.sqrt(max(float(np.dot(x * x, p)) - mean * mean, 0.0))


def spread_comparison(t: int) -> Tuple[NDArray[np.int64], NDArray[np.float64], NDArray[np.float64]]:
    """
    Classical and Hadamard-walk position distributions after t steps.

    The quantum walker starts at the centre of a (2t+1)-cycle in
    (|L> + i|R>)/sqrt 2, which never wraps in t steps.

    Returns:
        (positions -t..t, classical probabilities, quantum probabilities)
    """
    if t < 1:
        raise AnalysisError(f"spread comparison needs t >= 1, got {t}")
    graph = build_line(2 * t + 1, boundary="periodic")
    coins = CoinAssignment.from_specs(graph, CoinSpec(family=CoinFamily.HADAMARD))
    start = WalkState.localized(graph, t, 0, coin_state=np.array([1.0, 1j]))
    quantum = position_distribution(evolve(start, coins, t))
    positions = np.arange(-t, t + 1, dtype=np.int64)
    return positions, classical_line_distribution(t), quantum


def dominant_period(series: NDArray) -> float:
    """
    Period in steps of the strongest non-constant Fourier component.

    Raises:
        AnalysisError: Fewer than 4 samples or a flat series
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size < 4:
        raise AnalysisError(f"dominant period needs at least 4 samples, got {x.size}")
    spectrum = np.abs(np.fft.rfft(x - x.mean()))
    if not np.any(spectrum[1:] > 1e-12):
        raise AnalysisError("series is flat; no dominant period")
    k = int(np.argmax(spectrum[1:])) + 1
    return float(x.size / k)
