"""
Pytest configuration and fixtures for testing
"""

import json
import math

import pytest

from qwalk.models import (
    CoinFamily,
    CoinSpec,
    GraphKind,
    GraphSpec,
    InitialStateKind,
    InitialStateSpec,
    ScalingPoint,
    SearchConfig,
)


@pytest.fixture(scope="function")
def grover():
    return CoinSpec(family=CoinFamily.GROVER)


@pytest.fixture(scope="function")
def marked_grover():
    return CoinSpec(family=CoinFamily.MARKED_GROVER)


@pytest.fixture(scope="function")
def torus_search():
    """
    20x20 torus, marked 190, Grover coins, 200 steps.
    """
    return SearchConfig(
        graph=GraphSpec(kind=GraphKind.TORUS, width=20, height=20),
        marked_vertex=190,
        default_coin=CoinSpec(family=CoinFamily.GROVER),
        marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
        steps=200,
    )


@pytest.fixture(scope="function")
def small_torus_search():
    """
    10x10 torus, marked 45, Grover coins.
    """
    return SearchConfig(
        graph=GraphSpec(kind=GraphKind.TORUS, width=10, height=10),
        marked_vertex=45,
        default_coin=CoinSpec(family=CoinFamily.GROVER),
        marked_coin=CoinSpec(family=CoinFamily.MARKED_GROVER),
        steps=60,
    )


@pytest.fixture(scope="function")
def line_search():
    """
    Flip-flop cycle of 101 vertices with the symmetric coin, marked 20 with H_sym(0).
    """
    return SearchConfig(
        graph=GraphSpec(kind=GraphKind.CYCLE, n=101),
        marked_vertex=20,
        default_coin=CoinSpec(family=CoinFamily.SYMMETRIC_HADAMARD),
        marked_coin=CoinSpec(family=CoinFamily.SYMMETRIC_HADAMARD, delta=0.0),
        initial_state=InitialStateSpec(kind=InitialStateKind.LINE_SYMMETRIC_COIN),
        steps=50,
    )


@pytest.fixture(scope="function")
def inverse_log_points():
    """
    Exact peak_prob = 2 / log2 N points.
    """
    return [
        ScalingPoint(n=s * s, edges=2 * s * s, peak_prob=2.0 / math.log2(s * s), peak_time=s)
        for s in range(4, 20, 2)
    ]


@pytest.fixture(scope="function")
def piecewise_points():
    """
    Exact peak_time = 1.5 sqrt N below side 30 and 2.0 sqrt N from 30 upward.
    """
    return [
        ScalingPoint(n=s * s, edges=2 * s * s, peak_prob=0.2, peak_time=int(1.5 * s) if s < 30 else 2 * s)
        for s in range(20, 42, 2)
    ]


@pytest.fixture(scope="function")
def write_config(tmp_path):
    """
    Write an experiment config dict to a temporary JSON file.
    """
    def _write(data, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path
    return _write


@pytest.fixture(scope="function")
def run_config_data():
    """
    Small torus run as raw config JSON.
    """
    return {
        "run": {
            "graph": {"kind": "torus", "width": 6, "height": 6},
            "marked_vertex": 14,
            "default_coin": {"family": "grover"},
            "marked_coin": {"family": "marked_grover"},
            "steps": 20,
        }
    }
