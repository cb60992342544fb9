import math

import numpy as np
import pytest

from gdft.core import (
    QuantumState,
    build_theory,
    convexify,
    density_of_state,
    ground_energy,
    ground_states,
    identity_kernel_dim,
    make_theory,
    partial_trace_ancilla,
    pauli,
    qubit_theory,
    spin_chain_theory,
)
from gdft.errors import (
    ConfigParseError,
    DimensionMismatch,
    LinearlyDependentBasis,
    NonHermitianInput,
)

X, Y, Z = pauli()


def test_qubit_config_builds_one_potential_of_dim_two():
    th = build_theory({"kind": "qubit", "lambda": 1.0})
    assert th.n_params == 1 and th.hilbert_dim == 2
    assert np.allclose(th.potential_basis[0], Z)
    assert np.allclose(th.interaction, X)


def test_bosonic_config_builds_number_operators():
    th = build_theory({"kind": "bosonic", "d": 3, "N": 3, "P": 0})
    assert th.n_params == 3 and th.hilbert_dim == 4


def test_explicit_config_with_complex_pairs():
    cfg = {
        "kind": "explicit",
        "matrices": {
            "potentials": [[[1, 0], [0, -1]]],
            "interaction": [[[0, 0], [0, -1]], [[0, 1], [0, 0]]],
        },
    }
    th = build_theory(cfg)
    assert np.allclose(th.interaction, Y)


def test_empty_potential_basis_is_accepted():
    th = make_theory([], X)
    assert th.n_params == 0
    psi = QuantumState.pure([1, 0])
    assert density_of_state(th, psi).shape == (0,)


@pytest.mark.parametrize("cfg", [
    {"kind": "nope"},
    {"lambda": 1},
    {"kind": "bosonic", "d": 3},
    {"kind": "bosonic", "d": 3, "N": 3, "P": 5},
    {"kind": "explicit", "matrices": {"potentials": [[[1, 2, 3]]]}},
])
def test_bad_configs_raise_config_errors(cfg):
    with pytest.raises((ConfigParseError, DimensionMismatch)):
        build_theory(cfg)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        make_theory([np.array([[0, 1], [0, 0]])], X)


def test_roundoff_asymmetry_is_symmetrized():
    a = Z + np.array([[0, 1e-14], [0, 0]])
    th = make_theory([a], X)
    assert np.allclose(th.potential_basis[0], th.potential_basis[0].conj().T, atol=0)


def test_dimension_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        make_theory([np.eye(3)], X)


def test_linearly_dependent_basis_rejected():
    with pytest.raises(LinearlyDependentBasis):
        make_theory([Z, 2 * Z], X)


def test_qubit_ground_energy_closed_form():
    th = qubit_theory(1.0)
    for v in np.linspace(-3, 3, 13):
        assert ground_energy(th, [v]) == pytest.approx(-math.sqrt(1 + v * v), abs=1e-12)


def test_ground_states_detect_degeneracy():
    th = make_theory([np.diag([1.0, 0.0, 0.0])], np.zeros((3, 3)))
    assert len(ground_states(th, [1.0])) == 2
    assert len(ground_states(th, [-1.0])) == 1


def test_density_of_pure_and_ensemble_agree():
    th = spin_chain_theory(2)
    psi = np.array([0.6, 0, 0, 0.8])
    pure = QuantumState.pure(psi)
    ens = QuantumState.ensemble(np.outer(psi, psi))
    assert np.allclose(density_of_state(th, pure), density_of_state(th, ens))
    assert np.allclose(density_of_state(th, pure), [0.6**2 - 0.8**2] * 2)


def test_state_invariants():
    with pytest.raises(DimensionMismatch):
        QuantumState.pure([1, 1])
    with pytest.raises(DimensionMismatch):
        QuantumState.ensemble(np.diag([1.2, -0.2]))
    with pytest.raises(DimensionMismatch):
        QuantumState.ensemble(np.diag([0.5, 0.6]))


def test_convexify_and_partial_trace():
    th = qubit_theory(0.7)
    big = convexify(th, 2)
    assert big.hilbert_dim == 4 and big.n_params == 1
    for v in (-1.0, 0.3):
        assert ground_energy(big, [v]) == pytest.approx(ground_energy(th, [v]), abs=1e-12)
    psi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    gamma = partial_trace_ancilla(psi, 2, 2)
    assert np.allclose(gamma, np.eye(2) / 2)


def test_identity_kernel_dim():
    assert identity_kernel_dim(qubit_theory()) == 0
    th = make_theory([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], X)
    assert identity_kernel_dim(th) == 1


def test_theory_is_immutable():
    th = qubit_theory()
    with pytest.raises(ValueError):
        th.interaction[0, 0] = 5
