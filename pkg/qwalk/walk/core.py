"""
Walker state and time evolution.

The state is one flat complex128 vector over the graph's basis labels.
A step applies the coin block of every vertex, then the shift permutation:
U = S . C, matching the (SH)^t grouping of the line walk.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from ..errors import WalkError
from ..models import CoinSpec
from .coins import CoinMatrix, realize_coin
from .graphs import PortedGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WalkState:
    """Amplitudes indexed by the graph's flat (vertex, port) labels."""
    graph: PortedGraph
    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.graph.label_count,):
            raise WalkError(
                f"State has {amps.shape} amplitudes, graph has {self.graph.label_count} labels"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def localized(cls, graph: PortedGraph, vertex: int, port: int,
                  coin_state: Optional[NDArray] = None) -> "WalkState":
        """|vertex, port>, or an arbitrary normalized coin vector at one vertex."""
        amps = np.zeros(graph.label_count, dtype=np.complex128)
        if coin_state is None:
            amps[graph.label(vertex, port)] = 1.0
        else:
            coin_state = np.asarray(coin_state, dtype=np.complex128)
            if coin_state.shape != (graph.degree(vertex),):
                raise WalkError(f"Coin state needs {graph.degree(vertex)} entries, got {coin_state.shape}")
            lo = graph.offsets[vertex]
            amps[lo:lo + coin_state.shape[0]] = coin_state / np.linalg.norm(coin_state)
        return cls(graph, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, vertex: int, port: int) -> complex:
        return complex(self.amplitudes[self.graph.label(vertex, port)])


@dataclass(frozen=True)
class CoinAssignment:
    """
    Coins per vertex: a default for every occurring degree, plus per-vertex overrides.

    Attributes:
        default_coins: degree -> coin for vertices without an override
        overrides: vertex -> coin (marked vertex, boundary vertices)
    """
    default_coins: Mapping[int, CoinMatrix]
    overrides: Mapping[int, CoinMatrix] = field(default_factory=dict)

    @classmethod
    def from_specs(cls, graph: PortedGraph, default: CoinSpec,
                   overrides: Optional[Mapping[int, CoinSpec]] = None) -> "CoinAssignment":
        """Realize a default coin at each degree the graph uses and each override at its vertex's degree."""
        defaults = {}
        for d in sorted(set(graph.degrees.tolist())):
            defaults[d] = realize_coin(default.with_degree(d))
        realized = {}
        for v, spec in (overrides or {}).items():
            realized[int(v)] = realize_coin(spec.with_degree(graph.degree(v)))
        assignment = cls(defaults, realized)
        assignment.validate(graph)
        return assignment

    def validate(self, graph: PortedGraph) -> None:
        """
        Raises:
            WalkError: A degree without a default coin, or a coin of the wrong dimension
        """
        for d in sorted(set(graph.degrees.tolist())):
            coin = self.default_coins.get(d)
            if coin is None:
                raise WalkError(f"No default coin for degree {d}")
            if coin.dimension != d:
                raise WalkError(f"Default coin for degree {d} has dimension {coin.dimension}")
        for v, coin in self.overrides.items():
            if coin.dimension != graph.degree(v):
                raise WalkError(
                    f"Coin for vertex {v} has dimension {coin.dimension}, vertex degree is {graph.degree(v)}"
                )

    def coin_for(self, graph: PortedGraph, v: int) -> CoinMatrix:
        return self.overrides.get(v) or self.default_coins[graph.degree(v)]


class WalkOperator:
    """
    Compiled U = S . C for one graph and coin assignment.

    Vertices sharing a coin are gathered into (count, d) label-index blocks so
    each block is a single matrix product. Blocks write disjoint labels.
    """

    def __init__(self, graph: PortedGraph, coins: CoinAssignment):
        coins.validate(graph)
        self.graph = graph
        self.coins = coins
        self._blocks = self._compile_blocks(graph, coins)
        self._adjoint_blocks = [(idx, m.conj().T.copy()) for idx, m in self._blocks]
        # new[pairing[a]] = old[a]  <=>  new = old[source]
        self._source = np.empty_like(graph.pairing)
        self._source[graph.pairing] = np.arange(graph.label_count)

    @staticmethod
    def _compile_blocks(graph: PortedGraph, coins: CoinAssignment) -> List[Tuple[NDArray, NDArray]]:
        blocks = []
        overridden = np.zeros(graph.vertex_count, dtype=bool)
        overridden[np.fromiter(coins.overrides, dtype=np.int64, count=len(coins.overrides))] = True
        for d, coin in sorted(coins.default_coins.items()):
            verts = np.flatnonzero((graph.degrees == d) & ~overridden)
            if verts.size:
                idx = graph.offsets[verts][:, None] + np.arange(d)
                blocks.append((idx, coin.entries.T.copy()))
        for v, coin in sorted(coins.overrides.items()):
            idx = graph.offsets[v] + np.arange(coin.dimension)
            blocks.append((idx[None, :], coin.entries.T.copy()))
        return blocks

    def coin(self, psi: NDArray[np.complex128], adjoint: bool = False) -> NDArray[np.complex128]:
        out = np.empty_like(psi)
        # Row-vector form: block @ C^T applies C to each vertex's coin vector
        for idx, m_t in (self._adjoint_blocks if adjoint else self._blocks):
            out[idx] = psi[idx] @ m_t
        return out

    def shift(self, psi: NDArray[np.complex128], inverse: bool = False) -> NDArray[np.complex128]:
        if inverse:
            return psi[self.graph.pairing]
        return psi[self._source]

    def step(self, psi: NDArray[np.complex128]) -> NDArray[np.complex128]:
        return self.shift(self.coin(psi))

    def step_adjoint(self, psi: NDArray[np.complex128]) -> NDArray[np.complex128]:
        return self.coin(self.shift(psi, inverse=True), adjoint=True)


# =============================================================================
# Operations
# =============================================================================

def apply_coin(state: WalkState, coins: CoinAssignment) -> WalkState:
    """Multiply each vertex's coin sub-vector by its assigned coin."""
    return WalkState(state.graph, WalkOperator(state.graph, coins).coin(state.amplitudes))


def apply_shift(state: WalkState) -> WalkState:
    """Move the amplitude at every label to its shift pairing."""
    source = np.empty_like(state.graph.pairing)
    source[state.graph.pairing] = np.arange(state.graph.label_count)
    return WalkState(state.graph, state.amplitudes[source])


def step(state: WalkState, coins: CoinAssignment) -> WalkState:
    """One time step: coin, then shift."""
    return WalkState(state.graph, WalkOperator(state.graph, coins).step(state.amplitudes))


def step_adjoint(state: WalkState, coins: CoinAssignment) -> WalkState:
    """Inverse of step(): inverse shift, then conjugate-transposed coins."""
    return WalkState(state.graph, WalkOperator(state.graph, coins).step_adjoint(state.amplitudes))


def evolve(state: WalkState, coins: CoinAssignment, t: int) -> WalkState:
    """
    Apply step() t times.

    Raises:
        WalkError: If t is negative
    """
    if t < 0:
        raise WalkError(f"Step count must be >= 0, got {t}")
    op = WalkOperator(state.graph, coins)
    psi = state.amplitudes.copy()
    for _ in range(t):
        psi = op.step(psi)
    return WalkState(state.graph, psi)


def step_matrix(graph: PortedGraph, coins: CoinAssignment) -> NDArray[np.complex128]:
    """Dense matrix of one step, built column by column from basis states. Small graphs only."""
    op = WalkOperator(graph, coins)
    L = graph.label_count
    u = np.empty((L, L), dtype=np.complex128)
    basis = np.zeros(L, dtype=np.complex128)
    for j in range(L):
        basis[:] = 0.0
        basis[j] = 1.0
        u[:, j] = op.step(basis)
    return u


def vertex_probability(state: WalkState, v: int) -> float:
    """
    Probability of finding the walker at vertex v (coin register traced out).

    Raises:
        WalkError: If v is out of range
    """
    g = state.graph
    if not 0 <= v < g.vertex_count:
        raise WalkError(f"Vertex {v} out of range [0, {g.vertex_count})")
    block = state.amplitudes[g.offsets[v]:g.offsets[v + 1]]
    return float(np.vdot(block, block).real)


def position_distribution(state: WalkState) -> NDArray[np.float64]:
    """Probability of each vertex."""
    weights = np.abs(state.amplitudes) ** 2
    return np.add.reduceat(weights, state.graph.offsets[:-1])
