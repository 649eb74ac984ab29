"""
search.py - Quantum-walk spatial search runs, scans and sweeps

A run starts from a state matched to the default coin, swaps in the marked
coin at the marked vertex (and the boundary coin at reflecting line ends),
and records the marked vertex's probability after every step.
"""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.signal import find_peaks

from .config import SETTINGS
from .errors import ConfigError, QwalkError, SearchError
from .models import (
    CoinFamily,
    CoinSpec,
    GraphKind,
    GraphSpec,
    InitialStateKind,
    PeakRecord,
    ScalingPoint,
    SearchConfig,
    SweepConfig,
)
from .walk.core import CoinAssignment, WalkOperator, WalkState
from .walk.graphs import PortedGraph, build_graph

logger = logging.getLogger(__name__)

# A peak is significant at >= max(SIGNIFICANCE_MULTIPLE * baseline, PROMINENCE_FLOOR * global max)
SIGNIFICANCE_MULTIPLE = 2.0
PROMINENCE_FLOOR = 0.5
# Local maxima smaller than this are floating-point ripple on a flat series
RIPPLE = 1e-12
# Probabilities are compared at this many decimals, so equal steps form one plateau
PLATEAU_DECIMALS = 12

LINE_KINDS = (GraphKind.LINE, GraphKind.CYCLE)


@dataclass
class SearchRun:
    """
    Result of one search.

    Attributes:
        config: The config that produced the run
        p_marked: Marked-vertex probability at t = 0..steps
        peaks: Every local maximum, flagged against the significance rule
        baseline: Uniform-guess probability 1/N of the graph
        vertex_count: N
        edge_count: Undirected edges of the graph
        snapshots: step -> position distribution, for the requested steps
    """
    config: SearchConfig
    p_marked: NDArray[np.float64]
    peaks: List[PeakRecord]
    baseline: float
    vertex_count: int
    edge_count: int
    snapshots: Dict[int, NDArray[np.float64]] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return int(self.p_marked.shape[0]) - 1

    def first_significant_peak(self) -> Optional[PeakRecord]:
        return first_significant_peak(self, self.baseline)


def default_step_budget(vertex_count: int) -> int:
    """Four quarter-periods of the (pi/2) sqrt(N) first peak."""
    return math.ceil(4 * (math.pi / 2) * math.sqrt(vertex_count))


# =============================================================================
# Initial states and coins
# =============================================================================

def initial_state(config: SearchConfig, graph: Optional[PortedGraph] = None) -> WalkState:
    """
    Build the starting state a config asks for.

    Args:
        config: Search config
        graph: Prebuilt graph (built from config.graph when omitted)

    Returns:
        Normalized WalkState

    Raises:
        SearchError: Line-specific state on a non-line graph, or a bad localized label
    """
    graph = graph if graph is not None else build_graph(config.graph)
    kind = config.initial_state.kind
    L = graph.label_count

    if kind == InitialStateKind.UNIFORM_ALL_PORTS:
        return WalkState(graph, np.full(L, 1.0 / math.sqrt(L), dtype=np.complex128))

    if kind in (InitialStateKind.LINE_HADAMARD_SYMMETRIC, InitialStateKind.LINE_SYMMETRIC_COIN):
        if graph.kind not in LINE_KINDS:
            raise SearchError(f"initial state '{kind.value}' needs a line or cycle, got {graph.kind.value}")
        amps = np.ones(L, dtype=np.complex128)
        if kind == InitialStateKind.LINE_HADAMARD_SYMMETRIC:
            amps[1::2] = 1j
        return WalkState(graph, amps / math.sqrt(L))

    spec = config.initial_state
    if spec.vertex >= graph.vertex_count or spec.port >= graph.degree(spec.vertex):
        raise SearchError(
            f"localized start (vertex {spec.vertex}, port {spec.port}) is not a label of this graph"
        )
    return WalkState.localized(graph, spec.vertex, spec.port)


def build_coin_assignment(config: SearchConfig, graph: PortedGraph) -> CoinAssignment:
    """Default coin everywhere, boundary coin on reflecting ends, marked coin at the marked vertex."""
    overrides: Dict[int, CoinSpec] = {}
    if graph.boundary_vertices:
        boundary = config.boundary_coin or CoinSpec(family=CoinFamily.SIGMA_X)
        for v in graph.boundary_vertices:
            overrides[v] = boundary
    overrides[config.marked_vertex] = config.marked_coin
    return CoinAssignment.from_specs(graph, config.default_coin, overrides)


# =============================================================================
# Peaks
# =============================================================================

def significance_threshold(series: NDArray[np.float64], baseline: float) -> float:
    return max(SIGNIFICANCE_MULTIPLE * baseline, PROMINENCE_FLOOR * float(np.max(series)))


def detect_peaks(series: NDArray[np.float64], baseline: float) -> List[PeakRecord]:
    """
    All interior local maxima of the series, flagged against the significance rule.

    A maximum held over several consecutive steps is one peak timed at its
    last step. Bipartite flip-flop walks repeat every value twice, so the
    plateau's right edge is the step where the probability starts to fall.
    """
    series = np.asarray(series, dtype=np.float64)
    if series.size < 3:
        return []
    _, props = find_peaks(np.round(series, PLATEAU_DECIMALS), prominence=RIPPLE, plateau_size=1)
    threshold = significance_threshold(series, baseline)
    return [
        PeakRecord(time=int(t), probability=float(series[t]), significant=bool(series[t] >= threshold))
        for t in props["right_edges"]
    ]


def first_significant_peak(run: SearchRun, baseline: Optional[float] = None) -> Optional[PeakRecord]:
    """
    Earliest local maximum with probability >= max(2 * baseline, half the global maximum).

    The half-maximum floor skips the short transients some lattices show in
    their first few steps, before the first broad peak builds up.

    Args:
        run: Completed search run
        baseline: Reference probability (1/N of the run's graph by default)

    Returns:
        The peak, or None when no local maximum qualifies
    """
    baseline = run.baseline if baseline is None else baseline
    for peak in detect_peaks(run.p_marked, baseline):
        if peak.significant:
            return peak
    return None


def amplification_estimate(peak_probability: float) -> int:
    """
    Amplitude-amplification repetitions needed to lift p to a constant: ceil(1/sqrt(p)).

    This is the standard scale estimate, not a simulated procedure.

    Raises:
        SearchError: If p is not in (0, 1]
    """
    if not 0.0 < peak_probability <= 1.0:
        raise SearchError(f"peak probability must be in (0, 1], got {peak_probability}")
    return math.ceil(1.0 / math.sqrt(peak_probability) - 1e-12)


# =============================================================================
# Runs
# =============================================================================

def run_search(config: SearchConfig) -> SearchRun:
    """
    Evolve a search and record the marked-vertex probability at every step.

    Raises:
        SearchError: Marked vertex out of range or incompatible initial state
        GraphError, CoinError, WalkError: Propagated from graph and coin construction
    """
    graph = build_graph(config.graph)
    m = config.marked_vertex
    if m >= graph.vertex_count:
        raise SearchError(f"marked_vertex {m} out of range for {graph.vertex_count} vertices")

    steps = config.steps if config.steps is not None else default_step_budget(graph.vertex_count)
    op = WalkOperator(graph, build_coin_assignment(config, graph))
    psi = initial_state(config, graph).amplitudes
    lo, hi = int(graph.offsets[m]), int(graph.offsets[m + 1])

    wanted = set(config.snapshots)
    late = sorted(t for t in wanted if t > steps)
    if late:
        logger.warning("Snapshots %s fall after the last step %d and are skipped", late, steps)

    p_marked = np.empty(steps + 1, dtype=np.float64)
    snapshots: Dict[int, NDArray[np.float64]] = {}
    for t in range(steps + 1):
        if t:
            psi = op.step(psi)
        block = psi[lo:hi]
        p_marked[t] = np.vdot(block, block).real
        if t in wanted:
            snapshots[t] = np.add.reduceat(np.abs(psi) ** 2, graph.offsets[:-1])

    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > SETTINGS.norm_tol:
        logger.warning("Norm drifted by %.3g after %d steps", drift, steps)

    # 1/N even where the start is not uniform over vertices (Bethe leaves, localized starts)
    baseline = 1.0 / graph.vertex_count

    run = SearchRun(
        config=config,
        p_marked=p_marked,
        peaks=detect_peaks(p_marked, baseline),
        baseline=baseline,
        vertex_count=graph.vertex_count,
        edge_count=graph.edge_count,
        snapshots=snapshots,
    )
    logger.debug("Search on %r finished: %d steps, max p=%.4f", graph, steps, float(p_marked.max()))
    return run


def run_many(configs: Sequence[SearchConfig], parallel: int = 1) -> List[SearchRun]:
    """Run independent searches, up to `parallel` at a time; results keep input order."""
    if parallel <= 1 or len(configs) <= 1:
        return [run_search(c) for c in configs]
    with Pool(min(parallel, len(configs))) as pool:
        return pool.map(run_search, configs)


def parameter_scan(base: SearchConfig, parameter: str, values: Sequence[float],
                   parallel: int = 1) -> List[SearchRun]:
    """
    One run per value of the marked coin's delta or phi.

    Raises:
        SearchError: Empty value list
    """
    if not values:
        raise SearchError("parameter scan needs at least one value")
    configs = [
        base.model_copy(update={"marked_coin": base.marked_coin.with_parameter(parameter, v)})
        for v in values
    ]
    return run_many(configs, parallel)


def delta_sweep_line(template: SearchConfig, deltas: Sequence[float], parallel: int = 1) -> List[SearchRun]:
    """
    Vary the bias of a symmetric-Hadamard marked coin on a line.

    The marked coin is H_sym(delta) itself, so delta = 0.5 coincides with the
    default symmetric coin and the distribution stays uniform.

    Raises:
        SearchError: Template is not on a line or cycle
    """
    if template.graph.kind not in LINE_KINDS:
        raise SearchError(f"delta sweep runs on a line or cycle, got {template.graph.kind.value}")
    base = template.model_copy(update={
        "marked_coin": CoinSpec(family=CoinFamily.SYMMETRIC_HADAMARD, delta=0.5),
    })
    return parameter_scan(base, "delta", deltas, parallel)


# =============================================================================
# Sweeps
# =============================================================================

@dataclass(frozen=True)
class SweepResult:
    """One sweep instance reduced to its scaling point."""
    label: str
    point: ScalingPoint
    significant: bool
    marked_vertex: int
    amplification: int


def resolve_marked(rule: str, graph: PortedGraph) -> int:
    """
    Apply a marked-position rule to a built graph.

    Rules: center, index:k, fraction:f, shell:s, row_col:r,c

    Raises:
        ConfigError: Unparseable rule
        SearchError: Rule does not fit the graph
    """
    name, _, arg = rule.partition(":")
    N = graph.vertex_count
    try:
        if name == "center":
            return 0 if graph.kind == GraphKind.BETHE else N // 2
        if name == "index":
            v = int(arg)
        elif name == "fraction":
            v = int(math.floor(float(arg) * N))
        elif name == "shell":
            members = graph.shell_vertices(int(arg))
            if members.size == 0:
                raise SearchError(f"graph has no shell {arg}")
            v = int(members[0])
        elif name == "row_col":
            r, c = (int(x) for x in arg.split(","))
            v = graph.vertex_at(r, c)
        else:
            raise ConfigError(f"Unknown marked-position rule '{rule}'")
    except ValueError as e:
        if isinstance(e, QwalkError):
            raise
        raise ConfigError(f"Malformed marked-position rule '{rule}': {e}") from e
    if not 0 <= v < N:
        raise SearchError(f"marked-position rule '{rule}' gives vertex {v}, outside [0, {N})")
    return v


def sweep_instances(sweep: SweepConfig) -> List[Tuple[str, SearchConfig]]:
    """Expand a sweep into labelled search configs, smallest structure first."""
    instances = []
    if sweep.kind == GraphKind.BETHE:
        specs = [
            (f"bethe d={sweep.base_degree} S={s}",
             GraphSpec(kind=sweep.kind, base_degree=sweep.base_degree, shells=s, shift=sweep.shift))
            for s in sweep.shells.values()
        ]
    elif sweep.kind in LINE_KINDS:
        specs = [
            (f"{sweep.kind.value} n={n}",
             GraphSpec(kind=sweep.kind, n=n, boundary=sweep.boundary, shift=sweep.shift))
            for n in sweep.sides.values()
        ]
    else:
        specs = [
            (f"{sweep.kind.value} {side}x{side}",
             GraphSpec(kind=sweep.kind, width=side, height=side, diagonals=sweep.diagonals, shift=sweep.shift))
            for side in sweep.sides.values()
        ]

    for label, graph_spec in specs:
        try:
            marked = resolve_marked(sweep.marked, build_graph(graph_spec))
        except SearchError as e:
            raise SearchError(f"sweep instance {label}: {e}") from e
        instances.append((label, SearchConfig(
            graph=graph_spec,
            marked_vertex=marked,
            default_coin=sweep.default_coin,
            marked_coin=sweep.marked_coin,
            boundary_coin=sweep.boundary_coin,
            initial_state=sweep.initial_state,
            steps=sweep.steps,
        )))
    return instances


def summarize_run(label: str, run: SearchRun) -> SweepResult:
    """First significant peak, or the highest point after t=0 when none qualifies."""
    peak = run.first_significant_peak()
    significant = peak is not None
    if peak is None:
        if run.steps < 1:
            raise SearchError(f"sweep instance {label} has no steps to take a peak from")
        t = int(np.argmax(run.p_marked[1:])) + 1
        peak = PeakRecord(time=t, probability=float(run.p_marked[t]), significant=False)
        logger.warning("%s: no significant peak, using the maximum at t=%d", label, t)
    point = ScalingPoint(
        n=run.vertex_count,
        edges=run.edge_count,
        peak_prob=peak.probability,
        peak_time=peak.time,
    )
    return SweepResult(
        label=label,
        point=point,
        significant=significant,
        marked_vertex=run.config.marked_vertex,
        amplification=amplification_estimate(peak.probability),
    )


def _run_instance(item: Tuple[str, SearchConfig]) -> SweepResult:
    label, config = item
    try:
        return summarize_run(label, run_search(config))
    except QwalkError as e:
        raise SearchError(f"sweep instance {label} failed: {e}") from e


def run_sweep(sweep: SweepConfig, parallel: int = 1) -> List[SweepResult]:
    """
    Run every sweep instance and return results ordered by vertex count.

    Raises:
        SearchError: Naming the first instance that failed
    """
    instances = sweep_instances(sweep)
    logger.info("Sweep over %d %s instances (parallel=%d)", len(instances), sweep.kind.value, parallel)
    if parallel <= 1 or len(instances) <= 1:
        results = [_run_instance(item) for item in instances]
    else:
        with Pool(min(parallel, len(instances))) as pool:
            results = pool.map(_run_instance, instances)
    return sorted(results, key=lambda r: r.point.n)
