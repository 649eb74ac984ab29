"""
Tests for search runs, peak detection, scans and sweeps.
"""

import math

import numpy as np
import pytest

from qwalk.errors import ConfigError, SearchError
from qwalk.models import (
    BetheSpec,
    CoinFamily,
    CoinSpec,
    GraphKind,
    GraphSpec,
    InitialStateKind,
    InitialStateSpec,
    SearchConfig,
    ShiftStyle,
    SideRange,
    SweepConfig,
)
from qwalk.search import (
    SearchRun,
    amplification_estimate,
    build_coin_assignment,
    default_step_budget,
    delta_sweep_line,
    detect_peaks,
    first_significant_peak,
    initial_state,
    parameter_scan,
    resolve_marked,
    run_search,
    run_sweep,
    sweep_instances,
)
from qwalk.walk.graphs import build_bethe, build_graph, build_hex_torus, build_torus


def series_run(series, baseline):
    config = SearchConfig(
        graph=GraphSpec(kind=GraphKind.CYCLE, n=4),
        marked_vertex=0,
        default_coin=CoinSpec(family=CoinFamily.HADAMARD),
        marked_coin=CoinSpec(family=CoinFamily.HADAMARD),
    )
    arr = np.asarray(series, dtype=float)
    return SearchRun(config=config, p_marked=arr, peaks=detect_peaks(arr, baseline),
                     baseline=baseline, vertex_count=4, edge_count=4)


@pytest.mark.unit
class TestInitialState:
    """Starting states."""

    def test_uniform_on_torus(self, torus_search):
        """Every amplitude is 1/40 on 20x20."""
        state = initial_state(torus_search)
        assert np.allclose(state.amplitudes, 1 / 40)

    def test_uniform_on_hex(self):
        """Every amplitude is 1/sqrt 48 on a 4x4 hex torus."""
        config = SearchConfig(
            graph=GraphSpec(kind=GraphKind.HEX_TORUS, width=4, height=4),
            marked_vertex=0,
            default_coin=CoinSpec(family=CoinFamily.GROVER),
            marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
        )
        assert np.allclose(initial_state(config).amplitudes, 1 / math.sqrt(48))

    def test_line_hadamard_symmetric(self, line_search):
        """Port 1 carries i/sqrt(2N)."""
        config = line_search.model_copy(update={
            "initial_state": InitialStateSpec(kind=InitialStateKind.LINE_HADAMARD_SYMMETRIC),
        })
        state = initial_state(config)
        assert state.amplitude(7, 0) == pytest.approx(1 / math.sqrt(202))
        assert state.amplitude(7, 1) == pytest.approx(1j / math.sqrt(202))

    def test_line_state_on_torus_rejected(self, torus_search):
        """Line-specific starts need a line."""
        config = torus_search.model_copy(update={
            "initial_state": InitialStateSpec(kind=InitialStateKind.LINE_SYMMETRIC_COIN),
        })
        with pytest.raises(SearchError):
            initial_state(config)

    def test_localized_start(self, torus_search):
        """A localized start puts the walker on one label."""
        config = torus_search.model_copy(update={
            "initial_state": InitialStateSpec(kind=InitialStateKind.LOCALIZED, vertex=3, port=2),
        })
        state = initial_state(config)
        assert state.amplitude(3, 2) == 1.0

    def test_localized_bad_port(self, torus_search):
        """A port beyond the vertex degree is rejected."""
        config = torus_search.model_copy(update={
            "initial_state": InitialStateSpec(kind=InitialStateKind.LOCALIZED, vertex=3, port=4),
        })
        with pytest.raises(SearchError):
            initial_state(config)


@pytest.mark.unit
class TestCoinAssignment:
    """Marked and boundary coin placement."""

    def test_reflecting_ends_get_sigma_x(self):
        """Line ends take sigma_x unless a boundary coin is given."""
        config = SearchConfig(
            graph=GraphSpec(kind=GraphKind.LINE, n=10),
            marked_vertex=4,
            default_coin=CoinSpec(family=CoinFamily.HADAMARD),
            marked_coin=CoinSpec(family=CoinFamily.NEGATED_HADAMARD),
        )
        graph = build_graph(config.graph)
        coins = build_coin_assignment(config, graph)
        assert set(coins.overrides) == {0, 4, 9}
        assert np.allclose(coins.overrides[0].entries, [[0, 1], [1, 0]])

    def test_marked_end_wins(self):
        """A marked end vertex carries the marked coin."""
        config = SearchConfig(
            graph=GraphSpec(kind=GraphKind.LINE, n=10),
            marked_vertex=0,
            default_coin=CoinSpec(family=CoinFamily.HADAMARD),
            marked_coin=CoinSpec(family=CoinFamily.NEGATED_HADAMARD),
        )
        coins = build_coin_assignment(config, build_graph(config.graph))
        assert coins.overrides[0].entries[0, 0] == pytest.approx(-1 / math.sqrt(2))

    def test_torus_has_only_marked_override(self, torus_search):
        """No boundary vertices on a torus."""
        coins = build_coin_assignment(torus_search, build_graph(torus_search.graph))
        assert set(coins.overrides) == {190}


@pytest.mark.unit
class TestPeaks:
    """Peak detection and significance."""

    def test_constant_series_has_no_peak(self):
        """Flat series never qualifies."""
        run = series_run([0.01] * 20, 0.01)
        assert first_significant_peak(run) is None

    def test_earliest_significant_peak(self):
        """Small early bumps below the threshold are skipped."""
        series = [0.01, 0.015, 0.012, 0.05, 0.2, 0.1, 0.3, 0.1]
        peak = first_significant_peak(series_run(series, 0.01))
        assert peak.time == 4
        assert peak.probability == 0.2

    def test_start_is_never_a_peak(self):
        """t=0 is excluded even when it is the largest value."""
        peak = first_significant_peak(series_run([0.5, 0.1, 0.3, 0.1], 0.01))
        assert peak.time == 2

    def test_baseline_override(self):
        """A larger baseline can disqualify every peak."""
        run = series_run([0.01, 0.03, 0.01, 0.02, 0.01], 0.01)
        assert first_significant_peak(run).time == 1
        assert first_significant_peak(run, baseline=0.02) is None

    def test_detect_marks_significance(self):
        """All local maxima are reported with their flag."""
        peaks = detect_peaks(np.array([0.0, 0.02, 0.0, 0.4, 0.0]), 0.01)
        assert [(p.time, p.significant) for p in peaks] == [(1, False), (3, True)]

    def test_plateau_reported_at_right_edge(self):
        """A maximum held for two steps is timed at the second."""
        series = [0.0025, 0.05, 0.05, 0.2256, 0.2256, 0.2364, 0.2364, 0.231, 0.231, 0.2242]
        peak = first_significant_peak(series_run(series, 0.0025))
        assert peak.time == 6
        assert peak.probability == 0.2364

    def test_plateau_with_rounding_noise(self):
        """Values equal up to floating-point noise still form one plateau."""
        series = np.array([0.01, 0.1, 0.3, 0.3 + 1e-16, 0.3 - 1e-16, 0.2])
        peaks = detect_peaks(series, 0.01)
        assert [p.time for p in peaks] == [4]

    def test_early_transient_skipped(self):
        """A short early bump well below the broad peak is not the first peak."""
        series = [0.01, 0.05, 0.125, 0.04, 0.02, 0.1, 0.3, 0.44, 0.3, 0.1, 0.05]
        peaks = detect_peaks(np.array(series), 0.01)
        assert [(p.time, p.significant) for p in peaks] == [(2, False), (7, True)]
        assert first_significant_peak(series_run(series, 0.01)).time == 7


@pytest.mark.unit
class TestAmplification:
    """Repetition estimate."""

    @pytest.mark.parametrize("p,expected", [(1.0, 1), (0.23, 3), (0.01, 10), (0.25, 2)])
    def test_values(self, p, expected):
        """ceil(1/sqrt p)."""
        assert amplification_estimate(p) == expected

    @pytest.mark.parametrize("p", [0.0, -0.1, 1.5])
    def test_out_of_range(self, p):
        """p must lie in (0, 1]."""
        with pytest.raises(SearchError):
            amplification_estimate(p)

    def test_default_budget(self):
        """ceil(2 pi sqrt N)."""
        assert default_step_budget(400) == 126


@pytest.mark.integration
class TestRunSearch:
    """End-to-end runs."""

    def test_unmarked_is_stationary(self, small_torus_search):
        """marked coin = default coin keeps p_marked at 1/N."""
        config = small_torus_search.model_copy(update={"marked_coin": CoinSpec(family=CoinFamily.GROVER)})
        run = run_search(config)
        assert np.allclose(run.p_marked, 1 / 100, atol=1e-12)
        assert first_significant_peak(run) is None

    def test_zero_steps(self, small_torus_search):
        """steps=0 gives the single t=0 sample."""
        run = run_search(small_torus_search.model_copy(update={"steps": 0}))
        assert run.p_marked.shape == (1,)
        assert run.p_marked[0] == pytest.approx(1 / 100)
        assert run.peaks == []

    def test_marked_out_of_range(self, small_torus_search):
        """Marked vertex must exist."""
        with pytest.raises(SearchError):
            run_search(small_torus_search.model_copy(update={"marked_vertex": 100}))

    def test_default_budget_used(self, small_torus_search):
        """Omitted steps fall back to ceil(2 pi sqrt N)."""
        run = run_search(small_torus_search.model_copy(update={"steps": None}))
        assert run.steps == default_step_budget(100)

    def test_snapshots_recorded(self, small_torus_search):
        """Requested steps are stored as position distributions."""
        run = run_search(small_torus_search.model_copy(update={"snapshots": [0, 10, 999]}))
        assert sorted(run.snapshots) == [0, 10]
        assert run.snapshots[10].sum() == pytest.approx(1.0)
        assert run.snapshots[10][45] == pytest.approx(run.p_marked[10])

    def test_marked_search_amplifies(self, small_torus_search):
        """The marked vertex rises well above 1/N."""
        run = run_search(small_torus_search)
        peak = run.first_significant_peak()
        assert peak is not None
        assert peak.probability > 5 / 100

    @pytest.mark.parametrize("side", [10, 20, 30])
    def test_first_peak_near_half_pi_sqrt_n(self, side):
        """The torus first peak falls within 15% of (pi/2) sqrt N."""
        config = SearchConfig(
            graph=GraphSpec(kind=GraphKind.TORUS, width=side, height=side),
            marked_vertex=side * side // 2,
            default_coin=CoinSpec(family=CoinFamily.GROVER),
            marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
        )
        peak = run_search(config).first_significant_peak()
        expected = (math.pi / 2) * side
        assert peak is not None
        assert abs(peak.time - expected) <= 0.15 * expected

    def test_edge_count_recorded(self, small_torus_search):
        """Runs carry the graph's undirected edge count."""
        assert run_search(small_torus_search.model_copy(update={"steps": 1})).edge_count == 200

    def test_flip_flop_cycle_lifts_marked(self, line_search):
        """On the default flip-flop cycle the marked site rises above twice 1/N."""
        run = run_search(line_search)
        assert run.config.graph.resolved_shift == ShiftStyle.FLIP_FLOP
        assert run.p_marked.max() > 2 / 101

    def test_moving_cycle_stays_near_uniform(self, line_search):
        """With the moving shift the same search never leaves 1/N behind."""
        graph = GraphSpec(kind=GraphKind.CYCLE, n=101, shift=ShiftStyle.DIRECTION_PRESERVING)
        run = run_search(line_search.model_copy(update={"graph": graph}))
        assert run.p_marked.max() < 1.5 / 101

    def test_baseline_is_uniform_guess_on_bethe(self):
        """The significance baseline is 1/N even where the start is not."""
        config = SearchConfig(
            graph=GraphSpec(kind=GraphKind.BETHE, base_degree=3, shells=3),
            marked_vertex=0,
            default_coin=CoinSpec(family=CoinFamily.GROVER),
            marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
            steps=5,
        )
        run = run_search(config)
        assert run.baseline == pytest.approx(1 / 22)
        assert run.p_marked[0] == pytest.approx(3 / 42)


@pytest.mark.integration
class TestScans:
    """Marked-coin parameter scans."""

    def test_delta_half_is_uniform(self, line_search):
        """delta = 0.5 makes the marked coin the default coin."""
        config = line_search.model_copy(update={"graph": GraphSpec(kind=GraphKind.CYCLE, n=50), "steps": 40})
        (run,) = delta_sweep_line(config, [0.5])
        assert np.allclose(run.p_marked, 1 / 50, atol=1e-12)

    def test_delta_above_half_unfinds(self, line_search):
        """delta = 0.65 pushes the marked vertex below uniform."""
        config = line_search.model_copy(update={"steps": 100})
        (run,) = delta_sweep_line(config, [0.65])
        assert run.p_marked.min() < 1 / 101

    def test_delta_sweep_needs_line(self, torus_search):
        """delta sweeps are a line experiment."""
        with pytest.raises(SearchError):
            delta_sweep_line(torus_search, [0.5])

    def test_scan_preserves_order(self, small_torus_search):
        """One run per value, in value order."""
        base = small_torus_search.model_copy(update={
            "marked_coin": CoinSpec(family=CoinFamily.BIASED_GROVER, delta=0.5),
            "steps": 10,
        })
        runs = parameter_scan(base, "delta", [1.0, 0.5])
        assert [r.config.marked_coin.delta for r in runs] == [1.0, 0.5]
        assert np.allclose(runs[0].p_marked, 1 / 100, atol=1e-12)

    def test_empty_scan_rejected(self, small_torus_search):
        """At least one value is needed."""
        with pytest.raises(SearchError):
            parameter_scan(small_torus_search, "phi", [])


@pytest.mark.unit
class TestMarkedRules:
    """Marked-position rules."""

    def test_center(self):
        """floor(N/2) on lattices, vertex 0 on Bethe lattices."""
        assert resolve_marked("center", build_torus(10, 10)) == 50
        assert resolve_marked("center", build_bethe(BetheSpec(base_degree=3, shells=3))) == 0

    def test_index_and_fraction(self):
        """Explicit index and fraction of N."""
        g = build_torus(10, 10)
        assert resolve_marked("index:17", g) == 17
        assert resolve_marked("fraction:0.45", g) == 45

    def test_shell(self):
        """First vertex of a Bethe shell."""
        g = build_bethe(BetheSpec(base_degree=3, shells=4))
        v = resolve_marked("shell:2", g)
        assert g.shells[v] == 2

    def test_row_col(self):
        """Lattice coordinates."""
        assert resolve_marked("row_col:2,3", build_hex_torus(6, 6)) == 15

    def test_unknown_rule(self):
        """Unknown rule names are config errors."""
        with pytest.raises(ConfigError):
            resolve_marked("corner", build_torus(4, 4))

    def test_malformed_argument(self):
        """Unparseable arguments are config errors."""
        with pytest.raises(ConfigError):
            resolve_marked("index:x", build_torus(4, 4))

    def test_out_of_range(self):
        """Index beyond N is a search error."""
        with pytest.raises(SearchError):
            resolve_marked("index:99", build_torus(4, 4))


@pytest.mark.integration
class TestSweeps:
    """Size sweeps."""

    def sweep(self, **kwargs):
        data = dict(
            kind=GraphKind.TORUS,
            sides=SideRange(start=6, stop=12, step=2),
            default_coin=CoinSpec(family=CoinFamily.GROVER),
            marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
        )
        data.update(kwargs)
        return SweepConfig(**data)

    def test_instances(self):
        """One config per side, centre-marked."""
        instances = sweep_instances(self.sweep())
        assert [label for label, _ in instances] == ["torus 6x6", "torus 8x8", "torus 10x10", "torus 12x12"]
        assert instances[0][1].marked_vertex == 18

    def test_rows_ordered_by_n(self):
        """Results come back in ascending N."""
        results = run_sweep(self.sweep())
        ns = [r.point.n for r in results]
        assert ns == sorted(ns) == [36, 64, 100, 144]
        assert all(r.point.edges == 2 * r.point.n for r in results)

    def test_parallel_matches_serial(self):
        """Parallelism does not change the output."""
        serial = run_sweep(self.sweep(steps=40), parallel=1)
        parallel = run_sweep(self.sweep(steps=40), parallel=2)
        assert [r.point for r in serial] == [r.point for r in parallel]

    def test_bethe_instances(self):
        """Bethe sweeps range over shell counts."""
        sweep = SweepConfig(
            kind=GraphKind.BETHE,
            base_degree=3,
            shells=SideRange(start=2, stop=4),
            default_coin=CoinSpec(family=CoinFamily.GROVER),
            marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
        )
        results = run_sweep(sweep)
        assert [r.point.n for r in results] == [10, 22, 46]
        assert all(r.marked_vertex == 0 for r in results)

    def test_failing_instance_named(self):
        """A bad instance aborts the sweep and is named."""
        with pytest.raises(SearchError) as exc_info:
            run_sweep(self.sweep(marked="index:40"))
        assert "torus" in str(exc_info.value)
