import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entpaths.core import (Circuit, StateVector, TwoQubitGate,
                           random_architecture, random_circuit, run_circuit)
from entpaths.entanglement import Measure
from entpaths.trajectories import (EntanglementTrajectory,
                                   TrajectoryMeasureError, export_trajectories,
                                   max_step_jump, measure_state,
                                   path_entanglement_sum, read_trajectories,
                                   trajectory, trajectory_summary)

CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=float)
H_KRON_I = np.kron(np.array([[1, 1], [1, -1]]) / math.sqrt(2), np.eye(2))


def bell_prep_circuit():
    """Two gates on (0, 1): H on qubit 0, then CNOT; ends in a Bell state."""
    g1 = TwoQubitGate.from_unitary((0, 1), H_KRON_I)
    g2 = TwoQubitGate.from_unitary((0, 1), CNOT)
    return Circuit.from_gates(2, [g1, g2])


def _traj(values, measure=Measure.GEOMETRIC):
    return EntanglementTrajectory(
        measure, tuple((k, float(v)) for k, v in enumerate(values)))


def test_trajectory_includes_the_initial_state():
    circuit = bell_prep_circuit()
    traj = trajectory(run_circuit(circuit))
    assert traj.num_steps == 2
    assert len(traj.values) == 3
    assert traj.values[0] == 0.0  # |00> is a product state


def test_bell_prep_trajectory_values():
    circuit = bell_prep_circuit()
    traj = trajectory(run_circuit(circuit))
    assert abs(traj.values[1]) < 1e-9          # still product after H
    assert np.isclose(traj.values[2], 0.5, atol=1e-9)
    assert np.isclose(path_entanglement_sum(traj), 0.5, atol=1e-9)


def test_bell_prep_trajectory_in_entropy_bits():
    circuit = bell_prep_circuit()
    traj = trajectory(run_circuit(circuit), Measure.VON_NEUMANN_BITS, cut=[0])
    assert np.isclose(traj.values[2], 1.0, atol=1e-9)
    assert np.isclose(path_entanglement_sum(traj), 1.0, atol=1e-9)


def test_round_trip_circuit_overshoots_the_endpoint_gap():
    # entangle and then disentangle: the sum sees both legs, the endpoint
    # difference sees none of them
    g1 = TwoQubitGate.from_unitary((0, 1), H_KRON_I @ CNOT @ H_KRON_I)
    inverse = TwoQubitGate((0, 1), g1.matrix.conj().T)
    circuit = Circuit.from_gates(2, [g1, inverse])
    traj = trajectory(run_circuit(circuit))
    total = path_entanglement_sum(traj)
    peak = traj.values[1]
    assert peak > 0.1
    assert np.isclose(total, 2 * peak, atol=1e-9)
    assert abs(traj.values[2] - traj.values[0]) < 1e-9


def test_trajectory_validation():
    with pytest.raises(ValueError):
        EntanglementTrajectory(Measure.GEOMETRIC, ((0, 0.0), (2, 0.1)))
    with pytest.raises(ValueError):
        EntanglementTrajectory(Measure.GEOMETRIC, ((0, -0.5),))
    with pytest.raises(ValueError):
        EntanglementTrajectory(Measure.GEOMETRIC, ((0, math.nan),))


def test_measure_state_needs_cut_for_entropy(bell):
    with pytest.raises(ValueError):
        measure_state(bell, Measure.VON_NEUMANN_BITS)
    value = measure_state(bell, Measure.VON_NEUMANN_BITS, cut=[0])
    assert np.isclose(value, 1.0, atol=1e-9)


def test_trajectory_wraps_measure_failures_with_the_step():
    circuit = bell_prep_circuit()
    with pytest.raises(TrajectoryMeasureError) as err:
        trajectory(run_circuit(circuit), Measure.VON_NEUMANN_BITS)  # no cut
    assert err.value.step == 0


@given(st.lists(st.floats(min_value=0.0, max_value=8.0, allow_nan=False),
                min_size=2, max_size=9))
@settings(max_examples=120, deadline=None)
def test_sum_dominates_endpoint_gap(values):
    traj = _traj(values)
    total = path_entanglement_sum(traj)
    assert total >= abs(values[-1] - values[0]) - 1e-12


@given(st.lists(st.floats(min_value=0.0, max_value=8.0, allow_nan=False),
                min_size=2, max_size=9))
@settings(max_examples=120, deadline=None)
def test_monotone_rearrangement_telescopes(values):
    ordered = sorted(values)
    total = path_entanglement_sum(_traj(ordered))
    assert np.isclose(total, ordered[-1] - ordered[0], atol=1e-12)


def test_segment_additivity_with_exact_arithmetic():
    # dyadic values make every partial sum exact, so the equality is literal
    rng = np.random.default_rng(123)
    for _ in range(50):
        values = rng.integers(0, 4096, size=7) / 1024.0
        whole = path_entanglement_sum(_traj(values))
        cutpoint = int(rng.integers(1, 6))
        left = path_entanglement_sum(_traj(values[:cutpoint + 1]))
        right = path_entanglement_sum(_traj(values[cutpoint:]))
        assert left + right == whole


def test_max_step_jump():
    traj = _traj([0.0, 0.3, 0.1, 0.6])
    assert np.isclose(max_step_jump(traj), 0.5)
    with pytest.raises(ValueError):
        max_step_jump(_traj([0.25]))


def test_single_point_trajectory_has_zero_sum():
    assert path_entanglement_sum(_traj([0.7])) == 0.0


def test_export_then_read_is_exact(tmp_path):
    rng = np.random.default_rng(9)
    named = [
        ("a", _traj(rng.random(4))),
        ("b", _traj(rng.random(6), Measure.VON_NEUMANN_BITS)),
    ]
    out = tmp_path / "runs.csv"
    export_trajectories(named, out)
    back = read_trajectories(out)
    assert [run_id for run_id, _ in back] == ["a", "b"]
    for (_, original), (_, loaded) in zip(named, back):
        assert loaded.measure == original.measure
        assert loaded.values == original.values  # 17 digits: bit-exact


def test_trajectory_summary_fields():
    traj = _traj([0.0, 0.4, 0.1])
    doc = trajectory_summary("demo", traj)
    assert doc["run_id"] == "demo"
    assert doc["R"] == 2
    assert doc["measure"] == "geometric"
    assert np.isclose(doc["sum"], 0.7)
    assert np.isclose(doc["max_jump"], 0.4)
    assert np.isclose(doc["final_entanglement"], 0.1)


def test_trajectory_of_random_circuit_is_finite_and_nonnegative():
    rng = np.random.default_rng(31)
    circuit = random_circuit(random_architecture(3, 3, rng), rng)
    traj = trajectory(run_circuit(circuit), geo_restarts=8)
    assert all(0.0 <= v < 1.0 for v in traj.values)
    assert path_entanglement_sum(traj) >= traj.values[-1] - 1e-12
