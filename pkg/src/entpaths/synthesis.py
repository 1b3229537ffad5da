"""Minimum-gate synthesis of target states by multi-start fidelity ascent.

Gates are parametrized by 15 real coefficients over a fixed traceless
Hermitian generator basis, mapped onto SU(4) through the matrix
exponential (a surjective, differentiable map).  For a fixed architecture
the preparation fidelity |<target|U_R..U_1|0..0>|**2 is maximized by local
ascent with central finite-difference gradients from many seeded random
starts; the smallest gate count at which any canonical architecture
reaches a fidelity tolerance estimates the target's exact-preparation
complexity.

Enumeration of architectures dedupes gate orderings that differ only by
swapping adjacent slots on disjoint qubit pairs, which commute.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .core import (
    Architecture,
    Circuit,
    DimensionMismatchError,
    ResourceCapError,
    StateVector,
    TwoQubitGate,
    all_pairs,
    apply_gate_matrix,
    fidelity,
    random_architecture,
    random_circuit,
    run_circuit,
)

NUM_GATE_PARAMS = 15
FD_STEP = 1e-5
STOP_FIDELITY = 1.0 - 1e-9
ARCH_SEQUENCE_CAP = 200_000

EXHAUSTIVE = "architecture_exhaustive"
SAMPLED = "sampled"


def _build_generators() -> np.ndarray:
    """The 15 traceless Hermitian generators of su(4) (Tr Ga Gb = 2 delta)."""
    generators = []
    for j in range(4):
        for k in range(j + 1, 4):
            m = np.zeros((4, 4), dtype=np.complex128)
            m[j, k] = 1.0
            m[k, j] = 1.0
            generators.append(m)
            m = np.zeros((4, 4), dtype=np.complex128)
            m[j, k] = -1.0j
            m[k, j] = 1.0j
            generators.append(m)
    for level in range(1, 4):
        d = np.zeros(4)
        d[:level] = 1.0
        d[level] = -level
        generators.append(np.diag(d * math.sqrt(2.0 / (level * (level + 1)))).astype(np.complex128))
    return np.stack(generators)


GENERATORS = _build_generators()


def _su4_batch(thetas: np.ndarray) -> np.ndarray:
    """exp(-i sum theta_a G_a) for a (..., 15) parameter array -> (..., 4, 4)."""
    h = np.tensordot(thetas, GENERATORS, axes=([-1], [0]))
    eigenvalues, eigenvectors = np.linalg.eigh(h)
    phases = np.exp(-1.0j * eigenvalues)
    return (eigenvectors * phases[..., None, :]) @ np.swapaxes(eigenvectors.conj(), -1, -2)


def su4_from_params(theta: Sequence[float]) -> np.ndarray:
    """Map 15 real parameters onto an SU(4) matrix (surjective)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (NUM_GATE_PARAMS,):
        raise DimensionMismatchError(f"expected {NUM_GATE_PARAMS} parameters, got {theta.shape}")
    return _su4_batch(theta)


def params_from_su4(matrix: np.ndarray) -> np.ndarray:
    """A parameter preimage of a special-unitary 4x4 matrix.

    Recovered through the principal matrix logarithm; the round trip
    su4_from_params(params_from_su4(U)) equals U up to a global phase that
    is a 4th root of unity (the traceless projection of the log branch).
    """
    u = np.asarray(matrix, dtype=np.complex128)
    if u.shape != (4, 4):
        raise DimensionMismatchError(f"expected a 4x4 matrix, got {u.shape}")
    t, q = scipy.linalg.schur(u, output="complex")
    angles = np.angle(np.diagonal(t))
    h = -(q * angles[None, :]) @ q.conj().T  # U = exp(-iH)
    h = (h + h.conj().T) / 2.0
    h = h - (np.trace(h).real / 4.0) * np.eye(4)
    return np.real(np.tensordot(GENERATORS, h, axes=([1, 2], [1, 0]))) / 2.0


def _seed_key(seed, *extra) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        base = (int(seed),)
    else:
        base = tuple(int(s) for s in seed)
    return base + tuple(int(e) for e in extra)


# --- fidelity ascent ------------------------------------------------------


def _environment(phi: np.ndarray, s: np.ndarray, pair: tuple[int, int],
                 num_qubits: int) -> np.ndarray:
    """4x4 matrix E with <phi|U s> = sum_ab E[a, b] U[a, b] for U on `pair`."""
    j, k = pair
    p = np.moveaxis(phi.reshape((2,) * num_qubits), (j, k), (0, 1)).reshape(4, -1)
    t = np.moveaxis(s.reshape((2,) * num_qubits), (j, k), (0, 1)).reshape(4, -1)
    return p.conj() @ t.T


def _fidelity_and_grad(thetas: np.ndarray, pairs: Sequence[tuple[int, int]],
                       num_qubits: int, target_amp: np.ndarray,
                       fd_step: float) -> tuple[float, np.ndarray]:
    """Preparation fidelity from |0..0> and its central-difference gradient.

    Perturbing one parameter changes only that gate, so with cached prefix
    states and back-propagated targets each perturbed evaluation costs one
    4x4 rebuild and a 4x4 contraction instead of a full circuit run.
    """
    num_gates = len(pairs)
    dim = target_amp.size
    mats = _su4_batch(thetas)
    forward = np.empty((num_gates + 1, dim), dtype=np.complex128)
    forward[0] = 0.0
    forward[0][0] = 1.0
    for g in range(num_gates):
        forward[g + 1] = apply_gate_matrix(forward[g], mats[g], pairs[g], num_qubits)
    value = abs(np.vdot(target_amp, forward[num_gates])) ** 2
    backward = np.empty((num_gates + 1, dim), dtype=np.complex128)
    backward[num_gates] = target_amp
    for g in range(num_gates, 0, -1):
        backward[g - 1] = apply_gate_matrix(backward[g], mats[g - 1].conj().T,
                                            pairs[g - 1], num_qubits)
    eye = np.eye(NUM_GATE_PARAMS)
    perturbed = np.empty((num_gates, 2 * NUM_GATE_PARAMS, NUM_GATE_PARAMS))
    perturbed[:, :NUM_GATE_PARAMS, :] = thetas[:, None, :] + fd_step * eye
    perturbed[:, NUM_GATE_PARAMS:, :] = thetas[:, None, :] - fd_step * eye
    mats_pert = _su4_batch(perturbed.reshape(-1, NUM_GATE_PARAMS))
    mats_pert = mats_pert.reshape(num_gates, 2 * NUM_GATE_PARAMS, 4, 4)
    grad = np.empty((num_gates, NUM_GATE_PARAMS))
    for g in range(num_gates):
        env = _environment(backward[g + 1], forward[g], pairs[g], num_qubits)
        amps = np.tensordot(mats_pert[g], env, axes=([1, 2], [0, 1]))
        values = np.abs(amps) ** 2
        grad[g] = (values[:NUM_GATE_PARAMS] - values[NUM_GATE_PARAMS:]) / (2.0 * fd_step)
    return float(value), grad


class _EarlyStop(Exception):
    pass


def _ascend(theta0: np.ndarray, pairs: Sequence[tuple[int, int]], num_qubits: int,
            target_amp: np.ndarray, iterations: int) -> tuple[np.ndarray, float]:
    """One local ascent; returns the best parameters and fidelity seen."""
    num_gates = len(pairs)
    best = {"f": -1.0, "theta": theta0}

    def negative(x: np.ndarray):
        theta = x.reshape(num_gates, NUM_GATE_PARAMS)
        value, grad = _fidelity_and_grad(theta, pairs, num_qubits, target_amp, FD_STEP)
        if value > best["f"]:
            best["f"] = value
            best["theta"] = theta.copy()
            if value >= STOP_FIDELITY:
                raise _EarlyStop
        return -value, -grad.reshape(-1)

    try:
        scipy.optimize.minimize(
            negative, theta0.reshape(-1), jac=True, method="L-BFGS-B",
            options={"maxiter": iterations, "ftol": 1e-12, "gtol": 1e-8},
        )
    except _EarlyStop:
        pass
    return best["theta"], best["f"]


@dataclass(frozen=True)
class OptimizerBudget:
    """Caps for the multi-start search."""

    restarts: int = 64
    iterations: int = 2000

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError(f"budget must be positive, got {self}")


@dataclass(frozen=True, eq=False)
class OptimizeResult:
    circuit: Circuit
    achieved_fidelity: float
    converged: bool
    restarts_run: int
    best_restart: int


def _initial_theta(init_gates, num_gates: int) -> np.ndarray:
    mats = []
    for gate in init_gates:
        mats.append(gate.matrix if isinstance(gate, TwoQubitGate) else np.asarray(gate))
    if len(mats) != num_gates:
        raise DimensionMismatchError(f"{len(mats)} init gates for {num_gates} slots")
    return np.stack([params_from_su4(m) for m in mats])


def optimize_gates(architecture: Architecture, target: StateVector,
                   budget: OptimizerBudget = OptimizerBudget(), seed=0, *,
                   success_fidelity: float | None = None,
                   init_gates=None) -> OptimizeResult:
    """Maximize preparation fidelity over the gates of one architecture.

    Restart k draws its starting parameters from a generator seeded by
    (seed, k), so the search is deterministic.  When success_fidelity is
    given, restarts stop at the first index reaching it; the result is the
    best over restarts 0..that index, which is independent of how restarts
    are scheduled.  If init_gates is given, restart 0 starts from those
    matrices instead of a random draw (used to warm-start padded layouts).
    Exhausting the budget below the threshold returns the best circuit
    found flagged converged=False.
    """
    n = architecture.num_qubits
    if target.num_qubits != n:
        raise DimensionMismatchError(
            f"target has {target.num_qubits} qubits, architecture has {n}"
        )
    pairs = architecture.gate_slots
    num_gates = len(pairs)
    threshold = STOP_FIDELITY if success_fidelity is None else success_fidelity
    if num_gates == 0:
        circuit = Circuit(architecture, ())
        value = fidelity(StateVector.zero_state(n), target)
        return OptimizeResult(circuit, value, value >= threshold, 0, 0)
    init_theta = None if init_gates is None else _initial_theta(init_gates, num_gates)
    target_amp = target.amplitudes
    best_value = -1.0
    best_theta = None
    best_restart = 0
    restarts_run = 0
    for k in range(budget.restarts):
        if k == 0 and init_theta is not None:
            theta0 = init_theta
        else:
            rng = np.random.default_rng(_seed_key(seed, k))
            theta0 = rng.uniform(-math.pi, math.pi, size=(num_gates, NUM_GATE_PARAMS))
        theta, value = _ascend(theta0, pairs, n, target_amp, budget.iterations)
        restarts_run = k + 1
        if value > best_value:
            best_value, best_theta, best_restart = value, theta, k
        if success_fidelity is not None and value >= success_fidelity:
            break
    mats = _su4_batch(best_theta)
    gates = tuple(TwoQubitGate(pairs[g], mats[g]) for g in range(num_gates))
    circuit = Circuit(architecture, gates)
    achieved = fidelity(run_circuit(circuit).states[-1], target)
    return OptimizeResult(circuit, achieved, achieved >= threshold,
                          restarts_run, best_restart)


def optimize_gates_collect(architecture: Architecture, target: StateVector,
                           budget: OptimizerBudget, seed, *,
                           success_fidelity: float,
                           init_gates=None,
                           max_collect: int | None = None) -> list[OptimizeResult]:
    """Run every restart in order, collecting each one that reaches the
    threshold as its own solution (up to max_collect)."""
    n = architecture.num_qubits
    pairs = architecture.gate_slots
    num_gates = len(pairs)
    if num_gates == 0:
        base = optimize_gates(architecture, target, budget, seed,
                              success_fidelity=success_fidelity)
        return [base] if base.converged else []
    init_theta = None if init_gates is None else _initial_theta(init_gates, num_gates)
    target_amp = target.amplitudes
    collected: list[OptimizeResult] = []
    for k in range(budget.restarts):
        if max_collect is not None and len(collected) >= max_collect:
            break
        if k == 0 and init_theta is not None:
            theta0 = init_theta
        else:
            rng = np.random.default_rng(_seed_key(seed, k))
            theta0 = rng.uniform(-math.pi, math.pi, size=(num_gates, NUM_GATE_PARAMS))
        theta, value = _ascend(theta0, pairs, n, target_amp, budget.iterations)
        if value < success_fidelity:
            continue
        mats = _su4_batch(theta)
        gates = tuple(TwoQubitGate(pairs[g], mats[g]) for g in range(num_gates))
        circuit = Circuit(architecture, gates)
        achieved = fidelity(run_circuit(circuit).states[-1], target)
        if achieved >= success_fidelity:
            collected.append(OptimizeResult(circuit, achieved, True, k + 1, k))
    return collected


# --- architecture enumeration --------------------------------------------


def _disjoint(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] not in b and a[1] not in b


def commuting_normal_form(slots: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    """Sort adjacent slots on disjoint pairs into lexicographic order.

    Gates on disjoint pairs commute, so slot sequences related by such
    swaps realize identical unitaries; this bubble pass computes a unique
    representative of each equivalence class.
    """
    slots = [tuple(int(q) for q in s) for s in slots]
    changed = True
    while changed:
        changed = False
        for i in range(len(slots) - 1):
            a, b = slots[i], slots[i + 1]
            if a > b and _disjoint(a, b):
                slots[i], slots[i + 1] = b, a
                changed = True
    return tuple(slots)


def enumerate_architectures(num_qubits: int, num_gates: int, *,
                            max_sequences: int = ARCH_SEQUENCE_CAP) -> list[Architecture]:
    """All canonical slot sequences of a given length, sorted.

    Slots range over the j < k pairs; sequences are deduped by the
    commuting normal form.  Raises ResourceCapError when the raw sequence
    count exceeds max_sequences.
    """
    if num_qubits < 2:
        raise DimensionMismatchError("two-qubit slots need at least 2 qubits")
    if num_gates < 0:
        raise ValueError(f"num_gates must be >= 0, got {num_gates}")
    pairs = all_pairs(num_qubits)
    total = len(pairs) ** num_gates
    if total > max_sequences:
        raise ResourceCapError(
            f"{total} slot sequences exceed the enumeration cap {max_sequences}"
        )
    canonical = {commuting_normal_form(seq)
                 for seq in itertools.product(pairs, repeat=num_gates)}
    return [Architecture(num_qubits, slots) for slots in sorted(canonical)]


# --- targets and complexity estimation ------------------------------------


def sample_target(num_qubits: int, r_gen: int, seed) -> tuple[StateVector, Circuit]:
    """Run a random circuit (uniform slots, Haar gates) from |0..0>.

    Returns the prepared state together with the generating circuit.
    r_gen must be >= 1: a zero-gate draw would only ever produce |0..0>.
    """
    if r_gen < 1:
        raise ValueError(f"r_gen must be >= 1, got {r_gen}")
    rng = np.random.default_rng(_seed_key(seed))
    arch = random_architecture(num_qubits, r_gen, rng)
    circuit = random_circuit(arch, rng)
    return run_circuit(circuit).states[-1], circuit


@dataclass(frozen=True, eq=False)
class SynthesisProblem:
    """A target state plus the search caps for complexity estimation."""

    target: StateVector
    fidelity_tol: float = 1e-4
    r_max: int = 3
    budget: OptimizerBudget = field(default_factory=OptimizerBudget)
    seed: int = 0
    max_architectures: int = 256

    def __post_init__(self):
        if not 0.0 < self.fidelity_tol < 1.0:
            raise ValueError(f"fidelity_tol must be in (0, 1), got {self.fidelity_tol}")
        if self.r_max < 1:
            raise ValueError(f"r_max must be >= 1, got {self.r_max}")
        if self.max_architectures < 1:
            raise ValueError("max_architectures must be >= 1")


@dataclass(frozen=True, eq=False)
class ComplexityEstimate:
    """Smallest gate count found to prepare the target within tolerance."""

    r_star: int
    witness: Circuit
    achieved_fidelity: float
    exhaustiveness: str


@dataclass(frozen=True, eq=False)
class ComplexityNotFound:
    """No gate count up to r_max reached the tolerance."""

    best_fidelity_per_r: dict[int, float]


def _architectures_for(num_qubits: int, r: int, seed,
                       max_architectures: int) -> tuple[list[Architecture], bool]:
    """Canonical architectures at r, subsampled deterministically when too many."""
    archs = enumerate_architectures(num_qubits, r)
    if len(archs) <= max_architectures:
        return archs, True
    rng = np.random.default_rng(_seed_key(seed, r, 777))
    chosen = sorted(rng.choice(len(archs), size=max_architectures, replace=False))
    return [archs[i] for i in chosen], False


def estimate_state_complexity(problem: SynthesisProblem):
    """Search r = 1..r_max for the smallest preparable gate count.

    Returns a ComplexityEstimate on success (tagged architecture-exhaustive
    when every canonical architecture at each r below the found r was
    searched to the full restart budget) or a ComplexityNotFound carrying
    the best fidelity seen at each r.  A target that is |0..0> within
    tolerance short-circuits to r_star = 0.
    """
    target = problem.target
    n = target.num_qubits
    threshold = 1.0 - problem.fidelity_tol
    zero_fidelity = fidelity(target, StateVector.zero_state(n))
    if zero_fidelity >= threshold:
        empty = Circuit(Architecture(n, ()), ())
        return ComplexityEstimate(0, empty, zero_fidelity, EXHAUSTIVE)
    exhaustive_below = True
    best_per_r: dict[int, float] = {}
    for r in range(1, problem.r_max + 1):
        archs, full = _architectures_for(n, r, problem.seed, problem.max_architectures)
        best_r = 0.0
        for ai, arch in enumerate(archs):
            result = optimize_gates(arch, target, problem.budget,
                                    seed=_seed_key(problem.seed, r, ai),
                                    success_fidelity=threshold)
            best_r = max(best_r, result.achieved_fidelity)
            if result.converged:
                tag = EXHAUSTIVE if exhaustive_below else SAMPLED
                return ComplexityEstimate(r, result.circuit,
                                          result.achieved_fidelity, tag)
        best_per_r[r] = best_r
        exhaustive_below = exhaustive_below and full
    return ComplexityNotFound(best_per_r)


def padded_warm_start(circuit: Circuit, num_qubits: int):
    """Extend a circuit by one identity gate on its last slot.

    Returns (architecture, init_gates) for optimize_gates: the padded
    layout prepares the same state at r+1 gates, so a search at the larger
    gate count that includes this warm start always finds a solution when
    one existed at r.  The padded slot sequence stays canonical because a
    repeated slot never commutes past itself.
    """
    pad = circuit.gates[-1].qubit_pair if circuit.num_gates else (0, 1)
    slots = tuple(g.qubit_pair for g in circuit.gates) + (pad,)
    arch = Architecture(num_qubits, slots)
    init = tuple(g.matrix for g in circuit.gates) + (np.eye(4, dtype=np.complex128),)
    return arch, init
