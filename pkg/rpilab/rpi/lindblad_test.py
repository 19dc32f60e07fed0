"""
RPIlab testing: Lindblad evolution and the Markovian limit of per-slice measurement.

Copyright 2024 RPIlab Developers
"""

import numpy
import pytest
import scipy.linalg

from rpilab.common import GuardExceededError
from rpilab.hilbert.computation import purity, unitary_exp
from rpilab.hilbert.types import DensityOp
from rpilab.model import presets
from rpilab.rpi import lindblad
from rpilab.rpi.types import LindbladGenerator

H_MIXING = 0.5 * presets.SIGMA_X


@pytest.fixture
def mixing_model():
    bath = presets.build_spin_bath(n_spins=2, g=0.5, epsilon=1.0)

    return presets.build_product_model(
        H_S=H_MIXING,
        H_E=bath.H_E,
        A=presets.SIGMA_Z,
        B=bath.env_obs,
        pointer_obs=bath.pointer_obs,
        rho_in_S=presets.zero_state(),
        rho_in_E=bath.rho_in_E,
    )


def reference_state(g, rho_in, t):
    """Exact evolution through the exponential of the superoperator."""
    vec = scipy.linalg.expm(lindblad.lindblad_superoperator(g) * t) @ (
        rho_in.matrix.reshape(-1)
    )

    return vec.reshape(g.dim, g.dim)


def test_kappa_eff():
    assert lindblad.kappa_eff(0.5, 0.1) == pytest.approx(10.0)
    assert lindblad.kappa_eff(1.0, 0.25) == pytest.approx(1.0)

    with pytest.raises(ValueError) as excinfo:
        lindblad.kappa_eff(0.0, 0.1)
    assert "sigma must be positive and finite, got 0.0" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        lindblad.kappa_eff(1.0, numpy.inf)
    assert "dt must be positive and finite, got inf" in str(excinfo.value)


def test_lindblad_superoperator():
    g = LindbladGenerator.from_measurement(H=H_MIXING, A=presets.SIGMA_Z, kappa=0.7)
    rho = numpy.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    L, H = g.jump, g.H

    expected = (
        -1j * (H @ rho - rho @ H)
        + L @ rho @ L.conj().T
        - 0.5 * (L.conj().T @ L @ rho + rho @ L.conj().T @ L)
    )

    numpy.testing.assert_allclose(
        (lindblad.lindblad_superoperator(g) @ rho.reshape(-1)).reshape(2, 2),
        expected,
        atol=1e-14,
    )


def test_lindblad_evolve_unitary():
    g = LindbladGenerator.from_measurement(H=H_MIXING, A=presets.SIGMA_Z, kappa=0.0)
    rho_in = presets.plus_state()
    U = unitary_exp(H_MIXING, 1.5)

    rho = lindblad.lindblad_evolve(g, rho_in, 1.5)

    assert rho.normalized
    numpy.testing.assert_allclose(
        rho.matrix, U @ rho_in.matrix @ U.conj().T, atol=1e-10
    )

    same = lindblad.lindblad_evolve(g, rho_in, 0.0)
    numpy.testing.assert_array_equal(same.matrix, rho_in.matrix)


@pytest.fixture(params=[0.25, 1.0, 3.0])
def kappa(request):
    return request.param


def test_lindblad_evolve_dephasing(kappa):
    g = LindbladGenerator.from_measurement(
        H=numpy.zeros((2, 2)), A=presets.SIGMA_Z, kappa=kappa
    )
    t = 0.8

    rho = lindblad.lindblad_evolve(g, presets.plus_state(), t)

    assert abs(rho.matrix[0, 1]) == pytest.approx(
        0.5 * numpy.exp(-2 * kappa * t), abs=1e-6
    )
    numpy.testing.assert_allclose(numpy.diag(rho.matrix), [0.5, 0.5], atol=1e-12)


def test_lindblad_evolve_convergence():
    rho_in = presets.plus_state()
    errors = []

    for dt_max in (0.05, 0.025):
        g = LindbladGenerator.from_measurement(
            H=H_MIXING, A=presets.SIGMA_Z, kappa=2.0, dt_max=dt_max
        )
        exact = reference_state(g, rho_in, 1.0)
        rho = lindblad.lindblad_evolve(g, rho_in, 1.0)
        errors.append(numpy.abs(rho.matrix - exact).max())

    # Fourth order: halving the step divides the error by about 16.
    assert 12 < errors[0] / errors[1] < 20


def test_lindblad_evolve_trace_and_purity():
    g = LindbladGenerator.from_measurement(H=H_MIXING, A=presets.SIGMA_Z, kappa=0.6)
    rho = presets.plus_state()
    purities = [purity(rho)]

    for _ in range(10):
        rho = lindblad.lindblad_evolve(g, rho, 0.2)
        assert rho.trace == pytest.approx(1.0, abs=1e-10)
        purities.append(purity(rho))

    # Hermitian jump operators make the channel unital.
    assert numpy.all(numpy.diff(purities) <= 1e-12)
    numpy.testing.assert_allclose(
        rho.matrix, reference_state(g, presets.plus_state(), 2.0), atol=1e-7
    )


def test_lindblad_evolve_errors():
    g = LindbladGenerator.from_measurement(H=H_MIXING, A=presets.SIGMA_Z, kappa=1.0)

    with pytest.raises(ValueError) as excinfo:
        lindblad.lindblad_evolve(g, presets.plus_state(), -1.0)
    assert "evolution time must be non-negative and finite, got -1.0" in str(
        excinfo.value
    )

    with pytest.raises(ValueError) as excinfo:
        lindblad.lindblad_evolve(g, DensityOp.maximally_mixed(dim=3), 1.0)
    assert "state dimension 3 does not match generator dimension 2" in str(
        excinfo.value
    )

    fine = LindbladGenerator(H=H_MIXING, jump=presets.SIGMA_Z, dt_max=1e-7)

    with pytest.raises(GuardExceededError) as excinfo:
        lindblad.lindblad_evolve(fine, presets.plus_state(), 1.0)
    assert "integrator step count 10000000 exceeds guard 1000000" in str(
        excinfo.value
    )


def test_coherence_decay():
    g = LindbladGenerator.from_measurement(
        H=numpy.zeros((2, 2)), A=presets.SIGMA_Z, kappa=0.5
    )

    times, coherence = lindblad.coherence_decay(
        g, presets.plus_state(), [1.0, 0.0, 2.0, 0.5]
    )

    numpy.testing.assert_array_equal(times, [0.0, 0.5, 1.0, 2.0])
    numpy.testing.assert_allclose(coherence, 0.5 * numpy.exp(-times), atol=1e-6)

    with pytest.raises(ValueError) as excinfo:
        lindblad.coherence_decay(g, presets.plus_state(), [])
    assert "times must be a non-empty one-dimensional sequence" in str(
        excinfo.value
    )


def test_markov_limit_check(mixing_model):
    ladder = lindblad.markov_limit_check(
        mixing_model, sigma=2.0, dts=[0.1, 0.05, 0.025], t=1.0
    )

    assert ladder["kappa"] == pytest.approx(0.625)
    numpy.testing.assert_allclose(
        ladder["sigma"] ** 2 * ladder["dt"], [0.4, 0.4, 0.4], rtol=1e-12
    )

    distances = ladder["trace_dist"]
    assert 0 < distances[-1] < distances[0] < 0.5
    assert numpy.all(1.5 < distances[:-1] / distances[1:])
    assert numpy.all(distances[:-1] / distances[1:] < 2.5)


def test_markov_limit_check_commuting():
    bath = presets.build_spin_bath(n_spins=2, g=0.5, epsilon=1.0)
    m = presets.build_product_model(
        H_S=0.3 * presets.SIGMA_Z,
        H_E=bath.H_E,
        A=presets.SIGMA_Z,
        B=bath.env_obs,
        pointer_obs=bath.pointer_obs,
        rho_in_S=presets.plus_state(),
        rho_in_E=bath.rho_in_E,
    )

    ladder = lindblad.markov_limit_check(m, sigma=0.5, dts=[0.25, 0.125])

    # Only coherences change, and by the same factor per unit time.
    numpy.testing.assert_allclose(ladder["trace_dist"], [0.0, 0.0], atol=1e-7)


def test_markov_limit_check_vanishing_strength(mixing_model):
    ladder = lindblad.markov_limit_check(mixing_model, sigma=1e4, dts=[0.5, 0.25])

    assert ladder["kappa"] < 1e-7
    numpy.testing.assert_allclose(ladder["trace_dist"], [0.0, 0.0], atol=1e-6)


def test_markov_limit_check_errors(mixing_model):
    with pytest.raises(ValueError) as excinfo:
        lindblad.markov_limit_check(mixing_model, sigma=1.0, dts=[0.3])
    assert "slice duration 0.3 does not divide time 1.0" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        lindblad.markov_limit_check(mixing_model, sigma=1.0, dts=[])
    assert "dts must be a non-empty one-dimensional sequence" in str(excinfo.value)
