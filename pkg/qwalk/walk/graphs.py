"""
Ported graphs for the coined walk.

A PortedGraph numbers its basis labels (vertex, port) in one flat range,
vertex-major and port-minor, and stores the shift as a permutation of that
range: amplitude at label a moves to label pairing[a].

Builders
--------
- build_line(n, boundary, shift_style): line segment with reflecting ends, or cycle
- build_torus(width, height, diagonals): square torus, degree 4 or 8
- build_hex_torus(width, height): brick-wall honeycomb torus, degree 3
- build_bethe(spec): finite Bethe lattice with degree-1 leaves
- build_graph(spec): dispatch on a GraphSpec from a config file

Every builder validates its output and raises GraphInvariantError on failure.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from ..errors import GraphError, GraphInvariantError
from ..models import BetheSpec, Boundary, GraphKind, GraphSpec, ShiftStyle

logger = logging.getLogger(__name__)

# Torus port order and (d_row, d_col) moves; rows grow southwards
TORUS_PORTS = ("N", "E", "S", "W", "NE", "SE", "SW", "NW")
TORUS_MOVES = ((-1, 0), (0, 1), (1, 0), (0, -1), (-1, 1), (1, 1), (1, -1), (-1, -1))
TORUS_OPPOSITE = (2, 3, 0, 1, 6, 7, 4, 5)

LINE_PORTS = ("L", "R")
HEX_PORTS = ("E", "W", "V")


@dataclass(frozen=True, eq=False)
class PortedGraph:
    """
    Immutable vertex set with ordered ports and a shift pairing.

    Attributes:
        kind: Structure type
        shift_style: Whether the shift keeps the port (moving) or flips it
        degrees: Degree of each vertex
        pairing: Flat label -> flat label the amplitude moves to
        metadata: Structure parameters (width, height, n, shells, base_degree, ...)
        boundary_vertices: Vertices that take the boundary coin (reflecting line ends)
        port_exempt_labels: Labels allowed to change port under a moving shift
        shells: Shell index of each vertex (Bethe lattices only)
    """
    kind: GraphKind
    shift_style: ShiftStyle
    degrees: NDArray[np.int64]
    pairing: NDArray[np.int64]
    metadata: Dict[str, Any] = field(default_factory=dict)
    boundary_vertices: Tuple[int, ...] = ()
    port_exempt_labels: Tuple[int, ...] = ()
    shells: Optional[NDArray[np.int64]] = None

    def __post_init__(self):
        degrees = np.asarray(self.degrees, dtype=np.int64)
        pairing = np.asarray(self.pairing, dtype=np.int64)
        degrees.setflags(write=False)
        pairing.setflags(write=False)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "pairing", pairing)
        if self.shells is not None:
            shells = np.asarray(self.shells, dtype=np.int64)
            shells.setflags(write=False)
            object.__setattr__(self, "shells", shells)

    def __repr__(self) -> str:
        return (f"<PortedGraph {self.kind.value}: |V|={self.vertex_count}, "
                f"labels={self.label_count}, shift={self.shift_style.value}>")

    # -------------------------------------------------------------------------
    # Label arithmetic
    # -------------------------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return int(self.degrees.shape[0])

    @property
    def label_count(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def offsets(self) -> NDArray[np.int64]:
        """offsets[v] is the first flat label of vertex v; offsets[-1] is the label count."""
        out = np.zeros(self.vertex_count + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=out[1:])
        return out

    @cached_property
    def label_vertices(self) -> NDArray[np.int64]:
        return np.repeat(np.arange(self.vertex_count, dtype=np.int64), self.degrees)

    @cached_property
    def label_ports(self) -> NDArray[np.int64]:
        return np.arange(self.label_count, dtype=np.int64) - self.offsets[self.label_vertices]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.degrees[v])

    def label(self, v: int, p: int) -> int:
        """Flat index of (v, p)."""
        if not 0 <= p < self.degree(v):
            raise GraphError(f"Port {p} out of range for vertex {v} of degree {self.degrees[v]}")
        return int(self.offsets[v] + p)

    def vertex_port(self, label: int) -> Tuple[int, int]:
        """Inverse of label()."""
        if not 0 <= label < self.label_count:
            raise GraphError(f"Label {label} out of range [0, {self.label_count})")
        return int(self.label_vertices[label]), int(self.label_ports[label])

    def shift_pairing(self, v: int, p: int) -> Tuple[int, int]:
        """(vertex, port) that the amplitude at (v, p) moves to under the shift."""
        return self.vertex_port(int(self.pairing[self.label(v, p)]))

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise GraphError(f"Vertex {v} out of range [0, {self.vertex_count})")

    # -------------------------------------------------------------------------
    # Topology
    # -------------------------------------------------------------------------

    @cached_property
    def edge_count(self) -> int:
        """Undirected edges; every edge carries two labels that leave their vertex."""
        crossing = self.label_vertices != self.label_vertices[self.pairing]
        return int(np.count_nonzero(crossing)) // 2

    def to_networkx(self) -> nx.MultiGraph:
        """Undirected multigraph view (parallel edges kept for side-2 tori)."""
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.vertex_count))
        src = self.label_vertices
        dst = self.label_vertices[self.pairing]
        mask = src != dst
        counts = Counter(
            (min(u, w), max(u, w)) for u, w in zip(src[mask].tolist(), dst[mask].tolist())
        )
        for (u, w), c in sorted(counts.items()):
            g.add_edges_from([(u, w)] * (c // 2))
        return g

    def coordinates(self, v: int) -> Tuple[int, int]:
        """(row, col) of a lattice vertex under row-major indexing."""
        self._check_vertex(v)
        if "width" not in self.metadata:
            raise GraphError(f"{self.kind.value} graphs have no lattice coordinates")
        return divmod(int(v), int(self.metadata["width"]))

    def vertex_at(self, row: int, col: int) -> int:
        if "width" not in self.metadata:
            raise GraphError(f"{self.kind.value} graphs have no lattice coordinates")
        width, height = int(self.metadata["width"]), int(self.metadata["height"])
        return (row % height) * width + (col % width)

    def shell_vertices(self, s: int) -> NDArray[np.int64]:
        """Vertices of Bethe shell s in breadth-first order."""
        if self.shells is None:
            raise GraphError(f"{self.kind.value} graphs have no shells")
        return np.flatnonzero(self.shells == s)


# =============================================================================
# Validation
# =============================================================================

def validate_graph(g: PortedGraph) -> List[str]:
    """
    Check every PortedGraph invariant.

    Checks degree positivity, that every port maps to an existing label,
    bijectivity of the pairing, involution for flip-flop graphs, and port
    preservation for moving-shift graphs. Checks that depend on the pairing
    being in range are skipped when dangling ports are found.

    Args:
        g: Graph to check

    Returns:
        List of human-readable violations (empty when valid)
    """
    violations: List[str] = []

    if g.vertex_count == 0:
        return ["graph has no vertices"]
    for v in np.flatnonzero(g.degrees < 1).tolist():
        violations.append(f"vertex {v} has non-positive degree {int(g.degrees[v])}")
    if violations:
        return violations

    L = g.label_count
    if g.pairing.shape != (L,):
        return [f"pairing has {g.pairing.shape[0]} entries for {L} labels"]

    dangling = np.flatnonzero((g.pairing < 0) | (g.pairing >= L))
    for a in dangling.tolist():
        v, p = g.vertex_port(a)
        violations.append(f"dangling port (vertex {v}, port {p}) -> label {int(g.pairing[a])}")
    if violations:
        return violations

    hits = np.bincount(g.pairing, minlength=L)
    for a in np.flatnonzero(hits != 1).tolist():
        v, p = g.vertex_port(a)
        violations.append(f"label (vertex {v}, port {p}) is the image of {int(hits[a])} labels")

    if g.shift_style == ShiftStyle.FLIP_FLOP:
        bad = np.flatnonzero(g.pairing[g.pairing] != np.arange(L))
        for a in bad.tolist():
            v, p = g.vertex_port(a)
            violations.append(f"flip-flop pairing is not an involution at (vertex {v}, port {p})")
    else:
        moved = g.label_ports[g.pairing] != g.label_ports
        if g.port_exempt_labels:
            moved[list(g.port_exempt_labels)] = False
        for a in np.flatnonzero(moved).tolist():
            v, p = g.vertex_port(a)
            w, q = g.vertex_port(int(g.pairing[a]))
            violations.append(f"port not preserved: (vertex {v}, port {p}) -> (vertex {w}, port {q})")

    return violations


def _checked(g: PortedGraph) -> PortedGraph:
    violations = validate_graph(g)
    if violations:
        raise GraphInvariantError(violations)
    logger.debug("Built %r", g)
    return g


# =============================================================================
# Builders
# =============================================================================

def build_line(
    n: int,
    boundary: Boundary = Boundary.REFLECTING,
    shift_style: ShiftStyle = ShiftStyle.DIRECTION_PRESERVING,
) -> PortedGraph:
    """
    Line segment or cycle with port 0 stepping left and port 1 stepping right.

    Moving shift: on a reflecting segment an end vertex's outward port pairs
    with itself, and the neighbour's inward-moving amplitude lands on the end
    vertex's inward-facing port, so the shift stays a bijection and nothing
    escapes.

    Flip-flop shift: a step right lands on the neighbour's left port and vice
    versa. Reflecting ends pair their outward port with itself, which keeps
    the pairing an involution.
    """
    if n < 2:
        raise GraphError(f"line needs n >= 2, got {n}")
    boundary = Boundary(boundary)
    shift_style = ShiftStyle(shift_style)
    flip_flop = shift_style == ShiftStyle.FLIP_FLOP

    x = np.arange(n, dtype=np.int64)
    pairing = np.empty(2 * n, dtype=np.int64)
    pairing[2 * x] = 2 * ((x - 1) % n) + (1 if flip_flop else 0)
    pairing[2 * x + 1] = 2 * ((x + 1) % n) + (0 if flip_flop else 1)
    metadata = {"n": n, "boundary": boundary.value, "ports": LINE_PORTS}

    if boundary == Boundary.PERIODIC:
        return _checked(PortedGraph(
            kind=GraphKind.CYCLE,
            shift_style=shift_style,
            degrees=np.full(n, 2),
            pairing=pairing,
            metadata=metadata,
        ))

    last = n - 1
    pairing[0] = 0
    pairing[2 * last + 1] = 2 * last + 1
    exempt: Tuple[int, ...] = ()
    if not flip_flop:
        pairing[2 * 1] = 1
        pairing[2 * (last - 1) + 1] = 2 * last
        exempt = (2 * 1, 2 * (last - 1) + 1)
    return _checked(PortedGraph(
        kind=GraphKind.LINE,
        shift_style=shift_style,
        degrees=np.full(n, 2),
        pairing=pairing,
        metadata=metadata,
        boundary_vertices=(0, last),
        port_exempt_labels=exempt,
    ))


def build_torus(
    width: int,
    height: int,
    diagonals: bool = False,
    shift_style: ShiftStyle = ShiftStyle.DIRECTION_PRESERVING,
) -> PortedGraph:
    """
    Periodic square lattice, vertex = row * width + col.

    Ports are N, E, S, W and, with diagonals, NE, SE, SW, NW. The flip-flop
    variant lands on the opposite port of the neighbour.
    """
    if width < 2 or height < 2:
        raise GraphError(f"torus needs width, height >= 2, got {width}x{height}")
    shift_style = ShiftStyle(shift_style)

    d = 8 if diagonals else 4
    v = np.arange(width * height, dtype=np.int64)
    row, col = np.divmod(v, width)
    pairing = np.empty(width * height * d, dtype=np.int64)
    for p in range(d):
        dr, dc = TORUS_MOVES[p]
        nbr = ((row + dr) % height) * width + (col + dc) % width
        target = p if shift_style == ShiftStyle.DIRECTION_PRESERVING else TORUS_OPPOSITE[p]
        pairing[v * d + p] = nbr * d + target

    return _checked(PortedGraph(
        kind=GraphKind.TORUS_DIAGONAL if diagonals else GraphKind.TORUS,
        shift_style=shift_style,
        degrees=np.full(width * height, d),
        pairing=pairing,
        metadata={"width": width, "height": height, "diagonals": diagonals, "ports": TORUS_PORTS[:d]},
    ))


def build_hex_torus(width: int, height: int) -> PortedGraph:
    """
    Honeycomb lattice as a brick wall on a width x height torus.

    Ports are E, W and one vertical port: north when (row + col) is even,
    south otherwise. Both sides must be even for the parity to close.
    """
    if width < 2 or height < 2 or width % 2 or height % 2:
        raise GraphError(f"hex torus needs even width, height >= 2, got {width}x{height}")

    v = np.arange(width * height, dtype=np.int64)
    row, col = np.divmod(v, width)
    east = row * width + (col + 1) % width
    west = row * width + (col - 1) % width
    vertical_row = np.where((row + col) % 2 == 0, row - 1, row + 1) % height
    vertical = vertical_row * width + col

    pairing = np.empty(width * height * 3, dtype=np.int64)
    pairing[3 * v] = 3 * east + 1
    pairing[3 * v + 1] = 3 * west
    pairing[3 * v + 2] = 3 * vertical + 2

    return _checked(PortedGraph(
        kind=GraphKind.HEX_TORUS,
        shift_style=ShiftStyle.FLIP_FLOP,
        degrees=np.full(width * height, 3),
        pairing=pairing,
        metadata={"width": width, "height": height, "ports": HEX_PORTS},
    ))


def build_bethe(spec: BetheSpec) -> PortedGraph:
    """
    Finite Bethe lattice numbered breadth-first from the central vertex.

    The centre has d child ports. Interior vertices have port 0 to the parent
    and ports 1..d-1 to children. Leaves in the outer shell have only the
    parent port.
    """
    d, S = spec.base_degree, spec.shells
    if d < 3 or S < 1:
        raise GraphError(f"bethe lattice needs base_degree >= 3 and shells >= 1, got d={d}, S={S}")

    degrees = [d]
    shells = [0]
    links = []  # (parent, parent port, child)
    frontier = [0]
    for s in range(1, S + 1):
        child_degree = d if s < S else 1
        next_frontier = []
        for u in frontier:
            first_port = 0 if u == 0 else 1
            for k in range(first_port, d):
                child = len(degrees)
                degrees.append(child_degree)
                shells.append(s)
                links.append((u, k, child))
                next_frontier.append(child)
        frontier = next_frontier

    degrees_arr = np.asarray(degrees, dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(degrees_arr)))
    pairing = np.empty(int(offsets[-1]), dtype=np.int64)
    for u, k, child in links:
        a, b = offsets[u] + k, offsets[child]
        pairing[a] = b
        pairing[b] = a

    return _checked(PortedGraph(
        kind=GraphKind.BETHE,
        shift_style=ShiftStyle.FLIP_FLOP,
        degrees=degrees_arr,
        pairing=pairing,
        metadata={"base_degree": d, "shells": S},
        shells=np.asarray(shells, dtype=np.int64),
    ))


def build_graph(spec: GraphSpec) -> PortedGraph:
    """
    Build the graph a config describes.

    Raises:
        GraphError: Parameters the builder rejects, or a shift style the kind cannot use
    """
    shift = spec.resolved_shift
    if spec.kind in (GraphKind.LINE, GraphKind.CYCLE):
        return build_line(spec.n, spec.resolved_boundary, shift)
    if spec.kind in (GraphKind.TORUS, GraphKind.TORUS_DIAGONAL):
        return build_torus(spec.width, spec.height, spec.has_diagonals, shift)
    if shift != ShiftStyle.FLIP_FLOP:
        raise GraphError(f"{spec.kind.value} graphs only support the flip-flop shift")
    if spec.kind == GraphKind.HEX_TORUS:
        return build_hex_torus(spec.width, spec.height)
    return build_bethe(BetheSpec(base_degree=spec.base_degree, shells=spec.shells))
