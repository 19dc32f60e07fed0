"""
RPIlab testing: Computations on compound system+environment models.

Copyright 2024 RPIlab Developers
"""

import numpy
import pytest
import scipy.linalg

from rpilab.hilbert.computation import (
    kron,
    partial_trace_env,
    purity,
    unitary_exp,
)
from rpilab.hilbert.types import DensityOp, hermiticity_residual
from rpilab.model import computation, presets


def test_total_hamiltonian():
    zeros = numpy.zeros((2, 2))
    m = presets.build_product_model(
        H_S=zeros,
        H_E=zeros,
        A=zeros,
        B=zeros,
        pointer_obs=presets.SIGMA_Z,
        rho_in_S=presets.plus_state(),
        rho_in_E=presets.plus_state(),
    )
    numpy.testing.assert_array_equal(
        computation.total_hamiltonian(m), numpy.zeros((4, 4))
    )

    m = presets.build_preset("von_neumann_check")
    assert hermiticity_residual(computation.total_hamiltonian(m)) < 1e-12


def test_total_hamiltonian_spin_bath():
    g, epsilon, omega_S = 0.5, 1.0, 0.3
    m = presets.build_spin_bath(n_spins=2, g=g, epsilon=epsilon, omega_S=omega_S)

    # Independent assembly.
    I2 = numpy.eye(2)
    sx = numpy.array([[0, 1], [1, 0]])
    sz = numpy.diag([1, -1])
    expected = (
        omega_S / 2 * numpy.kron(sz, numpy.eye(4))
        + epsilon / 2 * numpy.kron(I2, numpy.kron(sz, I2) + numpy.kron(I2, sz))
        + g * numpy.kron(sz, numpy.kron(sx, I2) + numpy.kron(I2, sx))
    )

    numpy.testing.assert_allclose(
        computation.total_hamiltonian(m), expected, atol=1e-15
    )


def test_block_diagonal_propagator():
    m = presets.build_von_neumann(
        g=0.5, n_grid=32, x_max=4.0, sigma0=0.8, omega_S=1.0
    )
    U = unitary_exp(computation.total_hamiltonian(m), 0.7)
    # σ_z is diagonal, so blocks are the leading and trailing dim_E indices.
    numpy.testing.assert_allclose(U[:32, 32:], 0, atol=1e-10)
    numpy.testing.assert_allclose(U[32:, :32], 0, atol=1e-10)


def test_exact_reduced_density_decoupled():
    omega_S = 1.0
    m = presets.build_von_neumann(
        g=0.0, n_grid=32, x_max=4.0, sigma0=1.3, omega_S=omega_S
    )
    t = 1.7
    U_S = unitary_exp(m.H_S, t)

    numpy.testing.assert_allclose(
        computation.exact_reduced_density(m, t=t).matrix,
        U_S @ m.rho_in_S.matrix @ U_S.conj().T,
        atol=1e-10,
    )


def test_exact_reduced_density_spin_bath():
    # No coupling, no decoherence.
    m = presets.build_spin_bath(n_spins=3, g=0.0, epsilon=1.0, omega_S=0.4)
    for t in (0.0, 0.5, 2.0):
        assert purity(computation.exact_reduced_density(m, t=t)) == pytest.approx(
            1.0, abs=1e-10
        )

    # Against scipy.linalg.expm on the full compound space.
    m = presets.build_preset("spin_bath")
    assert m.dim == 32
    H = computation.total_hamiltonian(m)
    coherences = []

    for t in (0.5, 1.0, 2.0):
        U = scipy.linalg.expm(-1j * H * t)
        expected = partial_trace_env(U @ m.R_in @ U.conj().T, dS=2, dE=16)
        rho = computation.exact_reduced_density(m, t=t)
        assert isinstance(rho, DensityOp)
        numpy.testing.assert_allclose(rho.matrix, expected, atol=1e-10)
        coherences.append(abs(rho.matrix[0, 1]))

    assert coherences[0] < 0.5


def test_branch_pointer_trajectory():
    m = presets.build_von_neumann(g=1.0, n_grid=32, x_max=4.0, sigma0=0.8)
    trajectories = computation.branch_pointer_trajectory(m, times=[0.0, 0.5, 1.0])

    numpy.testing.assert_array_equal(trajectories["eigenvalues"], [1.0, -1.0])
    numpy.testing.assert_allclose(trajectories["weights"], [0.5, 0.5])
    # The grid point at -x_max has no mirror partner.
    numpy.testing.assert_allclose(trajectories["mean_pointer"][:, 0], 0.0, atol=1e-4)

    mean_pointer = trajectories["mean_pointer"]
    separation = mean_pointer[0, -1] - mean_pointer[1, -1]
    assert separation == pytest.approx(2 * 1.0 * 1.0, rel=0.05)

    # σ_z = +1 moves the pointer to larger positions.
    assert trajectories["mean_pointer"][0, 1] == pytest.approx(0.5, abs=0.01)

    with pytest.raises(ValueError) as excinfo:
        computation.branch_pointer_trajectory(m, times=[[0.0]])
    assert "times must be one dimensional" in str(excinfo.value)


def test_free_hamiltonian():
    m = presets.build_preset("von_neumann_check")

    numpy.testing.assert_allclose(
        computation.free_hamiltonian(m) + m.H_I, computation.total_hamiltonian(m)
    )
    numpy.testing.assert_allclose(
        computation.free_hamiltonian(m),
        kron(m.H_S, numpy.eye(m.dim_E)) + kron(numpy.eye(m.dim_S), m.H_E),
    )


def test_check_pointer_excursion():
    m = presets.build_preset("von_neumann_strong")
    # g·t = x_max/2 is the furthest a branch may travel.
    computation.check_pointer_excursion(m, duration=1.0)

    with pytest.raises(ValueError) as excinfo:
        computation.check_pointer_excursion(m, duration=2.0)
    assert "pointer branch excursion 4.0 over duration 2.0 exceeds x_max/2 = 2.0" in (
        str(excinfo.value)
    )

    with pytest.raises(ValueError) as excinfo:
        computation.branch_pointer_trajectory(m, times=[0.0, 2.0])
    assert "exceeds x_max/2 = 2.0" in str(excinfo.value)

    # Spin baths have no grid to wrap around.
    computation.check_pointer_excursion(
        presets.build_preset("spin_bath"), duration=100.0
    )
