"""Entanglement measures for pure n-qubit states.

Two measures are exposed under a common tag so downstream analytics can
carry values of either kind:

  * von Neumann entropy of a reduced density matrix, in bits (log base 2),
  * geometric entanglement 1 - max |<phi|psi>|**2 over product states |phi>,
    computed by alternating single-site rank-1 fitting with random restarts.

For a pure state and a fixed bipartition the relative entropy of
entanglement coincides with the entropy of either reduced state, so that
quantity is provided only as an alias on that restricted domain.
"""
from __future__ import annotations

import enum
from typing import NamedTuple, Sequence

import numpy as np

from .core import DimensionMismatchError, StateVector

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-8
EIGENVALUE_CLAMP = -1e-10

GEO_RESTARTS = 32
GEO_TOL = 1e-9
GEO_MAX_SWEEPS = 1000


class NumericalDomainError(ValueError):
    """A matrix violates the numerical domain of the requested operation."""


class ProductFitConvergenceError(RuntimeError):
    """No restart of the product-state fit converged; carries the best value."""

    def __init__(self, message: str, best_value: float):
        super().__init__(message)
        self.best_value = best_value


class Measure(str, enum.Enum):
    """Tag for which entanglement quantity a number represents."""

    VON_NEUMANN_BITS = "vonneumann"
    GEOMETRIC = "geometric"


class EntanglementValue(NamedTuple):
    value: float
    measure: Measure


def reduced_density_matrix(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Partial trace keeping the given qubits (ascending order in the result).

    Returns a 2**len(keep) square density matrix obtained by tracing out
    every qubit not listed in `keep`.
    """
    n = state.num_qubits
    kept = sorted(set(int(q) for q in keep))
    if len(kept) != len(list(keep)):
        raise ValueError(f"keep list {list(keep)} contains duplicates")
    if not kept or len(kept) >= n:
        raise ValueError(f"keep must be a nonempty proper subset of 0..{n - 1}")
    if kept[0] < 0 or kept[-1] >= n:
        raise DimensionMismatchError(f"keep {kept} out of range for {n} qubits")
    rest = [q for q in range(n) if q not in kept]
    psi = state.amplitudes.reshape((2,) * n)
    block = np.transpose(psi, kept + rest).reshape(2 ** len(kept), 2 ** len(rest))
    return block @ block.conj().T


def validate_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Check hermiticity and unit trace, returning eigenvalues (ascending)."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got {rho.shape}")
    if float(np.max(np.abs(rho - rho.conj().T))) > HERMITIAN_ATOL:
        raise NumericalDomainError("density matrix is not Hermitian within tolerance")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > TRACE_ATOL:
        raise NumericalDomainError(f"density matrix trace {trace} is not 1")
    return np.linalg.eigvalsh(rho)


def von_neumann_entropy(rho: np.ndarray) -> EntanglementValue:
    """Entropy -sum(lam * log2 lam) of a density matrix, in bits.

    Eigenvalues in [-1e-10, 0) are clamped to 0 (0*log 0 := 0); anything
    more negative raises, since the matrix is then not a state.
    """
    eigenvalues = validate_density_matrix(rho)
    if float(eigenvalues[0]) < EIGENVALUE_CLAMP:
        raise NumericalDomainError(
            f"density matrix has negative eigenvalue {float(eigenvalues[0])}"
        )
    lam = np.clip(eigenvalues, 0.0, None)
    positive = lam[lam > 0.0]
    entropy = float(-(positive * np.log2(positive)).sum())
    return EntanglementValue(max(entropy, 0.0), Measure.VON_NEUMANN_BITS)


def _site_environment(psi: np.ndarray, vectors: list[np.ndarray], site: int) -> np.ndarray:
    """Contract every site but one against conj(v_m); returns a 2-vector."""
    temp = psi
    for m in sorted(range(len(vectors)), reverse=True):
        if m == site:
            continue
        temp = np.tensordot(temp, vectors[m].conj(), axes=([m], [0]))
    return temp


def geometric_entanglement(state: StateVector, *, restarts: int = GEO_RESTARTS,
                           tol: float = GEO_TOL, max_sweeps: int = GEO_MAX_SWEEPS,
                           seed: int = 0) -> EntanglementValue:
    """1 - max |<phi|psi>|**2 over normalized product states |phi>.

    Alternating optimization: with all sites but one held fixed, the optimal
    single-site vector is the normalized contraction of the state against
    the others, so each update is exact and the overlap never decreases.
    Restart k draws its starting product vectors from a generator seeded by
    (seed, k); the reported value is the best over restarts, which makes it
    monotone in the restart count for a fixed seed.
    """
    n = state.num_qubits
    if n < 2:
        raise DimensionMismatchError("geometric entanglement needs at least 2 qubits")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    psi = state.amplitudes.reshape((2,) * n)
    best_overlap = 0.0
    any_converged = False
    for k in range(restarts):
        rng = np.random.default_rng((seed, k))
        vectors = []
        for _ in range(n):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            vectors.append(v / np.linalg.norm(v))
        overlap = 0.0
        previous = -1.0
        converged = False
        for _ in range(max_sweeps):
            for site in range(n):
                w = _site_environment(psi, vectors, site)
                norm = float(np.linalg.norm(w))
                if norm < 1e-15:
                    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                    vectors[site] = v / np.linalg.norm(v)
                    continue
                vectors[site] = w / norm
                overlap = norm
            if abs(overlap - previous) < tol:
                converged = True
                break
            previous = overlap
        best_overlap = max(best_overlap, overlap)
        any_converged = any_converged or converged
    value = max(0.0, 1.0 - best_overlap**2)
    if not any_converged:
        raise ProductFitConvergenceError(
            f"no restart converged within {max_sweeps} sweeps (best value {value})",
            best_value=value,
        )
    return EntanglementValue(value, Measure.GEOMETRIC)


def relative_entropy_pure_bipartite(state: StateVector, keep: Sequence[int]) -> EntanglementValue:
    """Relative entropy of entanglement for a pure state across one cut.

    On this restricted domain the closest separable state is known in closed
    form and the quantity equals the entropy of the reduced state, so this
    simply composes the two operations (value in bits).
    """
    return von_neumann_entropy(reduced_density_matrix(state, keep))
