"""
models.py - Pydantic models for experiment configs and result records
"""

import math
from enum import Enum
from typing import Optional, List, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# =============================================================================
# Coin Models
# =============================================================================

class CoinFamily(str, Enum):
    """Coin families that can be realized as concrete matrices."""
    HADAMARD = "hadamard"
    BIASED_HADAMARD = "biased_hadamard"
    SYMMETRIC_HADAMARD = "symmetric_hadamard"
    SIGMA_X = "sigma_x"
    GROVER = "grover"
    MARKED_GROVER = "marked_grover"
    PHASED_MARKED_GROVER = "phased_marked_grover"
    BIASED_GROVER = "biased_grover"
    IDENTITY = "identity"
    NEGATED_HADAMARD = "negated_hadamard"
    NEGATED_SYMMETRIC = "negated_symmetric"


# Families defined only on a two-dimensional coin space
TWO_DIMENSIONAL_FAMILIES = frozenset({
    CoinFamily.HADAMARD,
    CoinFamily.BIASED_HADAMARD,
    CoinFamily.SYMMETRIC_HADAMARD,
    CoinFamily.SIGMA_X,
    CoinFamily.NEGATED_HADAMARD,
    CoinFamily.NEGATED_SYMMETRIC,
})

# Families parameterized by the bias delta
DELTA_FAMILIES = frozenset({
    CoinFamily.BIASED_HADAMARD,
    CoinFamily.SYMMETRIC_HADAMARD,
    CoinFamily.NEGATED_SYMMETRIC,
    CoinFamily.BIASED_GROVER,
})


class CoinSpec(BaseModel):
    """Symbolic coin description; realized per degree by walk.coins.realize_coin."""
    family: CoinFamily = Field(..., description="Coin family")
    degree: Optional[int] = Field(None, ge=1, description="Matrix dimension (bound from the graph when omitted)")
    delta: Optional[float] = Field(None, ge=0.0, le=1.0, description="Bias, for delta-parameterized families")
    phi: Optional[float] = Field(None, ge=0.0, le=math.pi, description="Phase, for phased_marked_grover")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"family": "biased_grover", "degree": 4, "delta": 0.8}
        }
    )

    @model_validator(mode="after")
    def check_two_dimensional_degree(self):
        """Two-dimensional families reject any other degree."""
        if self.family in TWO_DIMENSIONAL_FAMILIES and self.degree not in (None, 2):
            raise ValueError(
                f"{self.family.value} is only defined for degree 2. Got degree: {self.degree}"
            )
        return self

    def with_degree(self, degree: int) -> "CoinSpec":
        """Return a copy bound to a concrete degree."""
        return self.model_copy(update={"degree": degree})

    def with_parameter(self, name: str, value: float) -> "CoinSpec":
        """Return a validated copy with delta or phi replaced."""
        if name not in ("delta", "phi"):
            raise ValueError(f"Unknown coin parameter '{name}'. Use 'delta' or 'phi'.")
        data = self.model_dump()
        data[name] = value
        return CoinSpec(**data)


# =============================================================================
# Graph Models
# =============================================================================

class GraphKind(str, Enum):
    """Graph structures the walk can run on."""
    LINE = "line"
    CYCLE = "cycle"
    TORUS = "torus"
    TORUS_DIAGONAL = "torus_diagonal"
    HEX_TORUS = "hex_torus"
    BETHE = "bethe"


class Boundary(str, Enum):
    REFLECTING = "reflecting"
    PERIODIC = "periodic"


class ShiftStyle(str, Enum):
    """How the shift relabels the port after a move."""
    DIRECTION_PRESERVING = "moving"
    FLIP_FLOP = "flip_flop"


class BetheSpec(BaseModel):
    """Finite Bethe lattice segment around a central vertex."""
    base_degree: int = Field(..., ge=3, description="Degree d of the central and interior vertices")
    shells: int = Field(..., ge=1, description="Number of shells S around the centre")

    model_config = ConfigDict(frozen=True)

    def shell_size(self, s: int) -> int:
        """Number of vertices in shell s (s >= 1)."""
        return self.base_degree * (self.base_degree - 1) ** (s - 1)

    @property
    def vertex_count(self) -> int:
        return 1 + sum(self.shell_size(s) for s in range(1, self.shells + 1))


class GraphSpec(BaseModel):
    """Serializable graph description, the config-file form of a PortedGraph."""
    kind: GraphKind = Field(..., description="Graph structure")
    n: Optional[int] = Field(None, ge=2, description="Vertex count for line/cycle")
    boundary: Optional[Boundary] = Field(None, description="Line boundary condition")
    width: Optional[int] = Field(None, ge=2, description="Lattice width (columns)")
    height: Optional[int] = Field(None, ge=2, description="Lattice height (rows)")
    diagonals: bool = Field(False, description="Add diagonal links to the torus (degree 8)")
    base_degree: Optional[int] = Field(None, ge=3, description="Bethe lattice degree")
    shells: Optional[int] = Field(None, ge=1, description="Bethe lattice shell count")
    shift: Optional[ShiftStyle] = Field(None, description="Shift style; defaults per kind when omitted")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"kind": "torus", "width": 20, "height": 20}
        }
    )

    @model_validator(mode="after")
    def check_required_fields(self):
        """Each kind needs its own size parameters."""
        required = {
            GraphKind.LINE: ("n",),
            GraphKind.CYCLE: ("n",),
            GraphKind.TORUS: ("width", "height"),
            GraphKind.TORUS_DIAGONAL: ("width", "height"),
            GraphKind.HEX_TORUS: ("width", "height"),
            GraphKind.BETHE: ("base_degree", "shells"),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"graph kind '{self.kind.value}' requires: {', '.join(missing)}")
        return self

    @property
    def has_diagonals(self) -> bool:
        return self.kind == GraphKind.TORUS_DIAGONAL or (self.kind == GraphKind.TORUS and self.diagonals)

    @property
    def resolved_boundary(self) -> Boundary:
        if self.kind == GraphKind.CYCLE:
            return Boundary.PERIODIC
        return self.boundary or Boundary.REFLECTING

    @property
    def resolved_shift(self) -> ShiftStyle:
        """Explicit shift, or flip-flop on every structure."""
        return self.shift or ShiftStyle.FLIP_FLOP


# =============================================================================
# Search Models
# =============================================================================

class InitialStateKind(str, Enum):
    UNIFORM_ALL_PORTS = "uniform_all_ports"
    LINE_HADAMARD_SYMMETRIC = "line_hadamard_symmetric"
    LINE_SYMMETRIC_COIN = "line_symmetric_coin"
    LOCALIZED = "localized"


class InitialStateSpec(BaseModel):
    """Initial walker state; vertex/port apply to localized starts only."""
    kind: InitialStateKind = InitialStateKind.UNIFORM_ALL_PORTS
    vertex: Optional[int] = Field(None, ge=0)
    port: Optional[int] = Field(None, ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_localized_fields(self):
        if self.kind == InitialStateKind.LOCALIZED and (self.vertex is None or self.port is None):
            raise ValueError("localized initial state requires vertex and port")
        return self


class SearchConfig(BaseModel):
    """One quantum-walk search run."""
    graph: GraphSpec
    marked_vertex: int = Field(..., ge=0, description="Index of the marked vertex")
    default_coin: CoinSpec = Field(..., description="Coin applied at unmarked vertices")
    marked_coin: CoinSpec = Field(..., description="Coin applied at the marked vertex")
    boundary_coin: Optional[CoinSpec] = Field(None, description="Coin at reflecting line ends (sigma_x when omitted)")
    initial_state: InitialStateSpec = Field(default_factory=InitialStateSpec)
    steps: Optional[int] = Field(None, ge=0, description="Step budget; ceil(2*pi*sqrt(N)) when omitted")
    snapshots: List[int] = Field(default_factory=list, description="Steps at which to record the full position distribution")

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "graph": {"kind": "torus", "width": 20, "height": 20},
                "marked_vertex": 190,
                "default_coin": {"family": "grover"},
                "marked_coin": {"family": "marked_grover"},
                "steps": 200
            }
        }
    )

    @field_validator("snapshots")
    @classmethod
    def validate_snapshots(cls, v):
        """Snapshot steps must be non-negative; stored sorted and unique."""
        if any(t < 0 for t in v):
            raise ValueError(f"snapshots must be non-negative step indices. Got: {v}")
        return sorted(set(v))


class PeakRecord(BaseModel):
    """A local maximum of the marked-vertex probability series."""
    time: int = Field(..., ge=0)
    probability: float = Field(..., ge=0.0, le=1.0 + 1e-9)
    significant: bool = False


# =============================================================================
# Analysis Models
# =============================================================================

class ScalingPoint(BaseModel):
    """One sweep instance: size, edge count and first-peak statistics."""
    n: int = Field(..., gt=0, description="Vertex count")
    edges: int = Field(..., gt=0, description="Undirected edge count")
    peak_prob: float = Field(..., gt=0.0, le=1.0 + 1e-9)
    peak_time: int = Field(..., gt=0)


class FitModel(str, Enum):
    INVERSE_LOG2 = "inverse_log2"
    SQRT_N = "sqrt_n"
    PIECEWISE_SQRT_N = "piecewise_sqrt_n"
    LINEAR = "linear"


class ScalingFit(BaseModel):
    """Fitted scaling law."""
    model: FitModel
    prefactors: List[float] = Field(..., min_length=1, max_length=2)
    breakpoint: Optional[float] = Field(None, description="sqrt(N) at which the upper segment starts")
    rms_residual: float = Field(..., ge=0.0)

    @model_validator(mode="after")
    def check_piecewise_shape(self):
        if self.model == FitModel.PIECEWISE_SQRT_N:
            if len(self.prefactors) != 2 or self.breakpoint is None:
                raise ValueError("piecewise fit needs exactly two prefactors and a breakpoint")
        elif len(self.prefactors) != 1:
            raise ValueError(f"{self.model.value} fit has exactly one prefactor")
        return self


class KinkRow(BaseModel):
    """Edge and port counts at one structure's breakpoint."""
    structure: str
    breakpoint_side: float
    breakpoint_n: float
    edges: float
    ports: float


class KinkReport(BaseModel):
    """Comparison of breakpoint edge counts across structures."""
    rows: List[KinkRow]
    reference_edges: float = Field(4 * 32 ** 2, description="Edge count quoted for the common kink")
    edges_agree: bool
    ports_agree: bool
    edges_match_reference: List[bool]
    ports_match_reference: List[bool]


# =============================================================================
# Experiment Configs (cli)
# =============================================================================

class SideRange(BaseModel):
    """Inclusive integer range."""
    start: int = Field(..., ge=1)
    stop: int = Field(..., ge=1)
    step: int = Field(1, ge=1)

    @model_validator(mode="after")
    def check_order(self):
        if self.stop < self.start:
            raise ValueError(f"range stop {self.stop} is below start {self.start}")
        return self

    def values(self) -> List[int]:
        return list(range(self.start, self.stop + 1, self.step))


class SweepConfig(BaseModel):
    """Family of search runs over increasing structure size."""
    kind: GraphKind
    sides: Optional[SideRange] = Field(None, description="Lattice side (or line length) range")
    shells: Optional[SideRange] = Field(None, description="Bethe shell-count range")
    boundary: Optional[Boundary] = None
    diagonals: bool = False
    base_degree: Optional[int] = Field(None, ge=3)
    shift: Optional[ShiftStyle] = None
    default_coin: CoinSpec
    marked_coin: CoinSpec
    boundary_coin: Optional[CoinSpec] = None
    initial_state: InitialStateSpec = Field(default_factory=InitialStateSpec)
    marked: str = Field("center", description="Marked-position rule: center, index:k, fraction:f, shell:s, row_col:r,c")
    steps: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_range_field(self):
        if self.kind == GraphKind.BETHE:
            if self.shells is None or self.base_degree is None:
                raise ValueError("bethe sweep requires shells and base_degree")
        elif self.sides is None:
            raise ValueError(f"{self.kind.value} sweep requires sides")
        return self


class ScanConfig(BaseModel):
    """Marked-coin parameter scan over a base run."""
    base: SearchConfig
    parameter: Literal["delta", "phi"]
    values: List[float] = Field(..., min_length=1)


class FitConfig(BaseModel):
    input: str = Field(..., description="Sweep CSV path")
    model: FitModel


class SpreadConfig(BaseModel):
    """Quantum vs classical spreading on the line."""
    steps: int = Field(100, ge=1)


class ExperimentConfig(BaseModel):
    """Top-level experiment file: exactly one experiment kind."""
    run: Optional[SearchConfig] = None
    sweep: Optional[SweepConfig] = None
    scan: Optional[ScanConfig] = None
    fit: Optional[FitConfig] = None
    spread: Optional[SpreadConfig] = None

    @model_validator(mode="after")
    def check_exactly_one(self):
        present = [name for name in ("run", "sweep", "scan", "fit", "spread") if getattr(self, name) is not None]
        if len(present) != 1:
            raise ValueError(
                f"experiment config must contain exactly one of run/sweep/scan/fit/spread. Got: {present or 'none'}"
            )
        return self

    @property
    def kind(self) -> str:
        for name in ("run", "sweep", "scan", "fit", "spread"):
            if getattr(self, name) is not None:
                return name
        raise AssertionError("unreachable")
