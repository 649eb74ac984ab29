"""
Coin operators for the coined quantum-walk search.

Every coin is a dense complex128 unitary of shape (d, d). The matrices are
small (d <= 8 for every structure we run), so nothing here is sparse.

Available families (see models.CoinFamily)
------------------------------------------
- hadamard, biased_hadamard, symmetric_hadamard, sigma_x (d = 2)
- negated_hadamard, negated_symmetric (d = 2)
- grover, marked_grover, phased_marked_grover, biased_grover, identity (any d)
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from ..config import SETTINGS
from ..errors import BiasedGroverRangeError, CoinError
from ..models import CoinFamily, CoinSpec, DELTA_FAMILIES, TWO_DIMENSIONAL_FAMILIES

__all__ = [
    "CoinMatrix",
    "realize_coin",
    "check_unitary",
    "unitarity_defect",
    "hadamard",
    "biased_hadamard",
    "symmetric_hadamard",
    "sigma_x",
    "grover",
    "biased_grover",
    "biased_grover_offdiagonal",
    "biased_grover_min_delta",
]


@dataclass(frozen=True)
class CoinMatrix:
    """Immutable concrete coin. The entries array is marked read-only."""
    entries: NDArray[np.complex128]

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise CoinError(f"Coin matrix must be square, got shape {arr.shape}")
        defect = unitarity_defect(arr)
        if defect > SETTINGS.unitary_tol:
            raise CoinError(f"Coin matrix is not unitary (defect {defect:.3g} > {SETTINGS.unitary_tol:g})")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def adjoint(self) -> "CoinMatrix":
        return CoinMatrix(self.entries.conj().T)

    def __neg__(self) -> "CoinMatrix":
        return CoinMatrix(-self.entries)


# =============================================================================
# Family constructors
# =============================================================================

def hadamard() -> NDArray[np.complex128]:
    """(1/sqrt 2) [[1, 1], [1, -1]]"""
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)


def biased_hadamard(delta: float) -> NDArray[np.complex128]:
    """[[sqrt d, sqrt(1-d)], [sqrt(1-d), -sqrt d]]; delta=0.5 is the Hadamard."""
    p, q = math.sqrt(delta), math.sqrt(1.0 - delta)
    return np.array([[p, q], [q, -p]], dtype=np.complex128)


def symmetric_hadamard(delta: float = 0.5) -> NDArray[np.complex128]:
    """[[sqrt d, i sqrt(1-d)], [i sqrt(1-d), sqrt d]]"""
    p, q = math.sqrt(delta), math.sqrt(1.0 - delta)
    return np.array([[p, 1j * q], [1j * q, p]], dtype=np.complex128)


def sigma_x() -> NDArray[np.complex128]:
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def grover(d: int) -> NDArray[np.complex128]:
    """
    Grover diffusion coin: 2/d everywhere, minus the identity.

    >>> grover(2).real.tolist()
    [[0.0, 1.0], [1.0, 0.0]]
    """
    return (2.0 / d) * np.ones((d, d), dtype=np.complex128) - np.eye(d, dtype=np.complex128)


def biased_grover_min_delta(d: int) -> float:
    """Smallest bias with a symmetric unitary completion: (d-2)/d, i.e. 0.5 for d=4."""
    return (d - 2) / d


def biased_grover_offdiagonal(d: int, delta: float) -> complex:
    """
    Off-diagonal entry a+ib of the biased Grover coin.

    Row norm gives |z|^2 = (1-delta^2)/(d-1); orthogonality of two rows gives
    2*delta*a + (d-2)|z|^2 = 0. b takes the non-negative root.
    """
    z2 = (1.0 - delta * delta) / (d - 1)
    a = 0.0 if d == 2 else -(d - 2) * z2 / (2.0 * delta)
    b = math.sqrt(max(z2 - a * a, 0.0))
    return complex(a, b)


def biased_grover(d: int, delta: float) -> NDArray[np.complex128]:
    """delta on the diagonal, a+ib elsewhere; delta=min is MarkedGrover, delta=1 is identity."""
    z = biased_grover_offdiagonal(d, delta)
    m = np.full((d, d), z, dtype=np.complex128)
    np.fill_diagonal(m, delta)
    return m


# =============================================================================
# Realization
# =============================================================================

def _resolve_degree(spec: CoinSpec) -> int:
    if spec.family in TWO_DIMENSIONAL_FAMILIES:
        if spec.degree not in (None, 2):
            raise CoinError(f"{spec.family.value} is only defined for degree 2, got {spec.degree}")
        return 2
    if spec.degree is None:
        raise CoinError(f"{spec.family.value} coin needs a degree")
    if spec.degree < 1:
        raise CoinError(f"Coin degree must be >= 1, got {spec.degree}")
    return spec.degree


def _resolve_delta(spec: CoinSpec) -> float:
    delta = 0.5 if spec.delta is None else float(spec.delta)
    if not 0.0 <= delta <= 1.0:
        raise CoinError(f"delta must be in [0, 1] for {spec.family.value}, got {delta}")
    return delta


def _resolve_phi(spec: CoinSpec) -> float:
    phi = 0.0 if spec.phi is None else float(spec.phi)
    if not 0.0 <= phi <= math.pi:
        raise CoinError(f"phi must be in [0, pi], got {phi}")
    return phi


def realize_coin(spec: CoinSpec) -> CoinMatrix:
    """
    Build the concrete matrix for a coin spec.

    Args:
        spec: Coin family and parameters; degree must be set for Grover families

    Returns:
        Immutable CoinMatrix

    Raises:
        CoinError: Parameter outside the family's domain or degree mismatch
        BiasedGroverRangeError: BiasedGrover bias below (d-2)/d
    """
    d = _resolve_degree(spec)
    family = spec.family
    delta = _resolve_delta(spec) if family in DELTA_FAMILIES else None

    if family == CoinFamily.HADAMARD:
        m = hadamard()
    elif family == CoinFamily.BIASED_HADAMARD:
        m = biased_hadamard(delta)
    elif family == CoinFamily.SYMMETRIC_HADAMARD:
        m = symmetric_hadamard(delta)
    elif family == CoinFamily.SIGMA_X:
        m = sigma_x()
    elif family == CoinFamily.NEGATED_HADAMARD:
        m = -hadamard()
    elif family == CoinFamily.NEGATED_SYMMETRIC:
        m = -symmetric_hadamard(delta)
    elif family == CoinFamily.GROVER:
        m = grover(d)
    elif family == CoinFamily.MARKED_GROVER:
        m = -grover(d)
    elif family == CoinFamily.PHASED_MARKED_GROVER:
        m = np.exp(1j * _resolve_phi(spec)) * -grover(d)
    elif family == CoinFamily.BIASED_GROVER:
        if d < 2:
            raise CoinError("biased_grover needs degree >= 2")
        lower = biased_grover_min_delta(d)
        if delta < lower:
            raise BiasedGroverRangeError(
                f"delta must be in [{lower:g}, 1] for biased_grover at degree {d}, got {delta}"
            )
        m = biased_grover(d, delta)
    elif family == CoinFamily.IDENTITY:
        m = np.eye(d, dtype=np.complex128)
    else:
        raise CoinError(f"Unsupported coin family '{family}'")

    return CoinMatrix(m)


def unitarity_defect(m: Union[CoinMatrix, NDArray]) -> float:
    """max |U^dagger U - I| over all entries."""
    u = m.entries if isinstance(m, CoinMatrix) else np.asarray(m, dtype=np.complex128)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_unitary(m: Union[CoinMatrix, NDArray], tol: Optional[float] = None) -> bool:
    """True iff max |U^dagger U - I| <= tol (SETTINGS.unitary_tol by default)."""
    return unitarity_defect(m) <= (SETTINGS.unitary_tol if tol is None else tol)
