"""
RPIlab testing: Compound propagation and partial evolution operators.

Copyright 2024 RPIlab Developers
"""

import numpy
import pytest
import scipy.linalg

from rpilab.common import GuardExceededError
from rpilab.corridors.computation import (
    build_measure,
    enumerate_corridors,
    resolution_check,
    tracking_corridor,
)
from rpilab.corridors.types import CorridorMeasure, Normalization, Window, WindowKind
from rpilab.evolution import computation
from rpilab.evolution.types import Placement, SliceScheme, Splitting
from rpilab.hilbert.computation import (
    compensated_sum,
    kron,
    partial_trace_env,
    unitary_exp,
)
from rpilab.hilbert.types import DensityOp, is_positive_semidefinite, is_unitary
from rpilab.model import presets
from rpilab.model.computation import exact_reduced_density, total_hamiltonian


@pytest.fixture
def check_model():
    return presets.build_preset("von_neumann_check")


@pytest.fixture
def box_measure(check_model):
    # Four cells centered at -3, -1, 1, 3.
    return build_measure(
        check_model, Window(kind=WindowKind.BOX, width=2.0), origin=1.0
    )


def test_box_measure_fixture(box_measure):
    numpy.testing.assert_array_equal(box_measure.nodes, [-3.0, -1.0, 1.0, 3.0])


def test_compound_propagator(check_model):
    numpy.testing.assert_allclose(
        computation.compound_propagator(check_model, 0.0), numpy.eye(64), atol=1e-14
    )

    U = computation.compound_propagator(check_model, 0.6)
    assert is_unitary(U)
    numpy.testing.assert_allclose(
        U, scipy.linalg.expm(-0.6j * total_hamiltonian(check_model)), atol=1e-9
    )


def test_compound_propagator_decoupled():
    H_S = 0.4 * presets.SIGMA_X
    H_E = 0.3 * presets.SIGMA_Z + 0.1 * presets.SIGMA_Y
    m = presets.build_product_model(
        H_S=H_S,
        H_E=H_E,
        A=presets.SIGMA_Z,
        B=numpy.zeros((2, 2)),
        pointer_obs=presets.SIGMA_Z,
        rho_in_S=presets.plus_state(),
        rho_in_E=presets.plus_state(),
    )
    t = 1.3
    numpy.testing.assert_allclose(
        computation.compound_propagator(m, t),
        numpy.kron(unitary_exp(H_S, t), unitary_exp(H_E, t)),
        atol=1e-12,
    )


@pytest.mark.parametrize("K", [1, 3, 8])
def test_slice_propagator_exact(check_model, K):
    s = SliceScheme(K=K, dt=0.2)
    numpy.testing.assert_allclose(
        numpy.linalg.matrix_power(computation.slice_propagator(check_model, s), K),
        computation.compound_propagator(check_model, s.t),
        atol=1e-10,
    )


def test_slice_propagator_strang_commuting():
    # σ_z⊗I and σ_z⊗P commute.
    m = presets.build_von_neumann(
        g=0.5, n_grid=32, x_max=4.0, sigma0=0.8, omega_S=1.0
    )
    s = SliceScheme(K=4, dt=0.25, splitting=Splitting.STRANG)
    numpy.testing.assert_allclose(
        computation.slice_product(m, s),
        computation.compound_propagator(m, s.t),
        atol=1e-10,
    )


def test_slice_propagator_strang_second_order():
    m = presets.build_spin_bath(n_spins=2, g=0.5, epsilon=1.0, omega_S=0.7)
    t = 1.0
    U = computation.compound_propagator(m, t)
    errors = [
        numpy.linalg.norm(
            computation.slice_product(
                m, SliceScheme(K=K, dt=t / K, splitting=Splitting.STRANG)
            )
            - U,
            2,
        )
        for K in (16, 32)
    ]

    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)


def test_partial_propagator_full_range(check_model):
    s = SliceScheme(K=3, dt=0.3)
    c = tracking_corridor(Window(kind=WindowKind.BOX, width=16.0), [0.0, 0.0, 0.0])
    U = computation.partial_propagator(check_model, s, c)
    assert U.corridor is c
    numpy.testing.assert_array_equal(
        U.matrix, computation.slice_product(check_model, s)
    )


def test_partial_propagator_decoupled():
    m = presets.build_von_neumann(
        g=0.0, n_grid=32, x_max=4.0, sigma0=0.8, omega_S=1.0
    )
    s = SliceScheme(K=3, dt=0.4)
    w = Window(kind=WindowKind.GAUSSIAN, width=0.5)
    centers = [0.0, 0.3, -0.2]
    U = computation.partial_propagator(m, s, tracking_corridor(w, centers))

    weights = numpy.ones(32)
    for center in centers:
        weights *= w.profile(m.pointer_eigenvalues - center)

    numpy.testing.assert_allclose(
        U.matrix,
        numpy.kron(unitary_exp(m.H_S, s.t), numpy.diag(weights)),
        atol=1e-12,
    )


def test_partial_propagator_tracks_branch():
    m = presets.build_preset("von_neumann_strong")
    s = SliceScheme(K=4, dt=0.25)
    # The σ_z = +1 branch moves by g·dt = 0.5 per slice.
    c = tracking_corridor(Window(kind=WindowKind.BOX, width=0.5), [0.5, 1.0, 1.5, 2.0])
    U = computation.partial_propagator(m, s, c).matrix

    rho_E = m.rho_in_E.matrix
    up = U @ numpy.kron(numpy.diag([1.0, 0.0]), rho_E) @ U.conj().T
    down = U @ numpy.kron(numpy.diag([0.0, 1.0]), rho_E) @ U.conj().T

    assert numpy.trace(up).real > 0.6
    assert numpy.trace(down).real < 1e-20


def test_partial_propagator_placement(check_model):
    w = Window(kind=WindowKind.BOX, width=2.0)
    c = tracking_corridor(w, [-1.0, 1.0])
    evolve_first = computation.partial_propagator(
        check_model, SliceScheme(K=2, dt=0.5), c
    ).matrix
    weight_first = computation.partial_propagator(
        check_model,
        SliceScheme(K=2, dt=0.5, placement=Placement.WEIGHT_THEN_EVOLVE),
        c,
    ).matrix

    U_dt = computation.compound_propagator(check_model, 0.5)
    W0, W1 = (
        kron(numpy.eye(2), numpy.diag(w.profile(check_model.pointer_eigenvalues - a)))
        for a in (-1.0, 1.0)
    )
    numpy.testing.assert_allclose(evolve_first, W1 @ U_dt @ W0 @ U_dt, atol=1e-12)
    numpy.testing.assert_allclose(weight_first, U_dt @ W1 @ U_dt @ W0, atol=1e-12)


def test_partial_propagator_errors(check_model):
    c = tracking_corridor(Window(kind=WindowKind.BOX, width=1.0), [0.0, 0.0])

    with pytest.raises(ValueError) as excinfo:
        computation.partial_propagator(check_model, SliceScheme(K=3, dt=0.1), c)
    assert "corridor has 2 slices, scheme has 3" in str(excinfo.value)

    strong = presets.build_preset("von_neumann_strong")
    far = tracking_corridor(Window(kind=WindowKind.BOX, width=0.5), [1.0] * 4)
    with pytest.raises(ValueError) as excinfo:
        computation.partial_propagator(strong, SliceScheme(K=4, dt=0.5), far)
    assert "pointer branch excursion 4.0 over duration 2.0" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        computation.slice_product(strong, SliceScheme(K=4, dt=0.5))
    assert "exceeds x_max/2 = 2.0" in str(excinfo.value)

    # Narrow amplitude-normalized Gaussians are not contractions.
    c = tracking_corridor(Window(kind=WindowKind.GAUSSIAN, width=0.1), [0.0])

    with pytest.warns(UserWarning, match="exceeds one"):
        computation.partial_propagator(check_model, SliceScheme(K=1, dt=0.1), c)


def test_sweep_partial_propagators(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)
    corridors = enumerate_corridors(box_measure, s.K)
    swept = computation.sweep_partial_propagators(
        check_model, s, corridors, max_workers=4
    )
    assert [U.corridor.index for U in swept] == list(range(16))

    for U, c in zip(swept, corridors):
        numpy.testing.assert_array_equal(
            U.matrix, computation.partial_propagator(check_model, s, c).matrix
        )


@pytest.mark.parametrize("by_enumeration", [False, True])
@pytest.mark.parametrize("placement", list(Placement))
def test_reconstruct_total_box(check_model, box_measure, by_enumeration, placement):
    s = SliceScheme(K=4, dt=0.25, placement=placement)
    assert (
        computation.reconstruct_total(
            check_model, s, box_measure, by_enumeration=by_enumeration
        )
        < 1e-12
    )


def test_reconstruct_total_single_corridor(check_model):
    meas = CorridorMeasure(
        nodes=[0.0], weights=[1.0], window=Window(kind=WindowKind.BOX, width=16.0)
    )
    s = SliceScheme(K=3, dt=0.5, splitting=Splitting.STRANG)
    assert computation.reconstruct_total(check_model, s, meas) == 0.0
    assert (
        computation.reconstruct_total(check_model, s, meas, by_enumeration=True)
        == 0.0
    )


def test_reconstruct_total_gaussian(check_model):
    w = Window(kind=WindowKind.GAUSSIAN, width=0.5)
    meas = build_measure(check_model, w, n_nodes=64)
    r = resolution_check(check_model, w, meas)
    s = SliceScheme(K=4, dt=0.25)
    residual = computation.reconstruct_total(check_model, s, meas)
    assert residual <= (1 + r) ** s.K - 1 + 1e-14

    # A coarse quadrature degrades the identity.
    meas = build_measure(check_model, w, n_nodes=64, n_sigma=1.0)
    assert computation.reconstruct_total(check_model, s, meas) > 0.1

    w = Window(kind=WindowKind.GAUSSIAN, width=0.5, normalization=Normalization.POVM)
    meas = build_measure(check_model, w, n_nodes=16)

    with pytest.raises(ValueError) as excinfo:
        computation.reconstruct_total(check_model, SliceScheme(K=1, dt=0.25), meas)
    assert "reconstruction requires amplitude normalization" in str(excinfo.value)


def test_partial_density_full_range(check_model):
    s = SliceScheme(K=4, dt=0.25)
    c = tracking_corridor(Window(kind=WindowKind.BOX, width=16.0), [0.0] * 4)
    U = computation.partial_propagator(check_model, s, c)
    pd = computation.partial_density(check_model, U, U)
    assert pd.alpha is None

    numpy.testing.assert_allclose(
        pd.rho, exact_reduced_density(check_model, t=s.t).matrix, atol=1e-10
    )
    assert numpy.trace(pd.R) == pytest.approx(1.0)


def test_partial_density_double_sum(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)
    propagators = computation.sweep_partial_propagators(
        check_model, s, enumerate_corridors(box_measure, s.K)
    )
    densities = [
        [computation.partial_density(check_model, Ua, Ub) for Ub in propagators]
        for Ua in propagators
    ]

    for a, row in enumerate(densities):
        assert is_positive_semidefinite(row[a].R)
        assert numpy.trace(row[a].R).real >= 0
        assert (row[a].alpha, row[a].beta) == (a, a)

        for b, pd in enumerate(row):
            numpy.testing.assert_allclose(
                pd.R.conj().T, densities[b][a].R, atol=1e-15
            )

    total = compensated_sum(pd.rho for row in densities for pd in row)
    numpy.testing.assert_allclose(
        total, exact_reduced_density(check_model, t=s.t).matrix, atol=1e-12
    )
    assert numpy.trace(total) == pytest.approx(1.0, abs=1e-10)


def test_partial_density_superselection():
    m = presets.build_von_neumann(
        g=0.5,
        n_grid=32,
        x_max=4.0,
        sigma0=0.8,
        omega_S=1.0,
        rho_in_S=DensityOp(matrix=numpy.diag([0.3, 0.7])),
    )
    s = SliceScheme(K=3, dt=0.3)
    meas = build_measure(m, Window(kind=WindowKind.BOX, width=2.0), origin=1.0)

    for U in computation.sweep_partial_propagators(m, s, enumerate_corridors(meas, 3)):
        rho = computation.partial_density(m, U, U).rho
        assert abs(rho[0, 1]) < 1e-10


def test_partial_amplitudes_exact(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)
    amplitudes = computation.partial_amplitudes(check_model, s, box_measure)
    assert amplitudes["pruned_probability"] == 0.0
    assert len(amplitudes["corridors"]) == 16
    assert amplitudes["X"].shape == (16, 64, 1)
    numpy.testing.assert_array_equal(amplitudes["measure_weights"], numpy.ones(16))

    C = check_model.initial_purification()
    corridors = enumerate_corridors(box_measure, s.K)

    for index, (c, X) in enumerate(zip(amplitudes["corridors"], amplitudes["X"])):
        assert c.index == index
        numpy.testing.assert_array_equal(c.centers, corridors[index].centers)
        U = computation.partial_propagator(check_model, s, corridors[index]).matrix
        numpy.testing.assert_allclose(X, U @ C, atol=1e-12)

    # Box windows are Kraus operators.
    probability = numpy.sum(numpy.abs(amplitudes["X"]) ** 2)
    assert probability == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("placement", list(Placement))
def test_partial_amplitudes_rotated_pointer(placement):
    m = presets.build_product_model(
        H_S=0.3 * presets.SIGMA_X,
        H_E=0.2 * presets.SIGMA_Z,
        A=presets.SIGMA_Z,
        B=presets.SIGMA_X,
        pointer_obs=presets.SIGMA_X,
        rho_in_S=DensityOp(matrix=numpy.diag([0.25, 0.75])),
        rho_in_E=presets.plus_state(),
    )
    s = SliceScheme(K=3, dt=0.4, placement=placement)
    w = Window(kind=WindowKind.GAUSSIAN, width=0.8, normalization=Normalization.POVM)
    meas = build_measure(m, w, n_nodes=3, n_sigma=1.0)
    amplitudes = computation.partial_amplitudes(m, s, meas)
    C = m.initial_purification()

    for c, X in zip(amplitudes["corridors"], amplitudes["X"]):
        U = computation.partial_propagator(m, s, c).matrix
        numpy.testing.assert_allclose(X, U @ C, atol=1e-12)
        assert c.measure_weight == pytest.approx(
            numpy.prod(meas.weights[c.node_indices])
        )


def test_partial_amplitudes_pruned():
    m = presets.build_preset("von_neumann_strong")
    s = SliceScheme(K=3, dt=0.25)
    meas = build_measure(m, Window(kind=WindowKind.BOX, width=0.5))
    assert meas.G**s.K > 1024

    with pytest.raises(GuardExceededError) as excinfo:
        computation.partial_amplitudes(m, s, meas)
    assert "exceeds pair guard 1024" in str(excinfo.value)

    amplitudes = computation.partial_amplitudes(m, s, meas, prune_tol=1e-12)
    kept = numpy.sum(numpy.abs(amplitudes["X"]) ** 2)
    assert 0 < len(amplitudes["corridors"]) <= 1024
    assert amplitudes["pruned_probability"] < 1e-8
    assert kept + amplitudes["pruned_probability"] == pytest.approx(1.0, abs=1e-10)

    indices = [c.index for c in amplitudes["corridors"]]
    assert indices == sorted(indices)

    with pytest.raises(GuardExceededError) as excinfo:
        computation.partial_amplitudes(m, s, meas, prune_tol=1e-12, max_corridors=2)
    assert "surviving corridor count exceeds pair guard 2" in str(excinfo.value)


def test_partial_amplitudes_errors(check_model):
    w = Window(kind=WindowKind.GAUSSIAN, width=0.5)
    meas = build_measure(check_model, w, n_nodes=8)

    with pytest.raises(ValueError) as excinfo:
        computation.partial_amplitudes(
            check_model, SliceScheme(K=1, dt=0.1), meas, prune_tol=-1.0
        )
    assert "prune_tol must be non-negative" in str(excinfo.value)

    with pytest.warns(UserWarning, match="not Kraus probabilities"):
        computation.partial_amplitudes(
            check_model, SliceScheme(K=1, dt=0.1), meas, prune_tol=1e-6
        )


def test_partial_trace_of_amplitudes(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)
    amplitudes = computation.partial_amplitudes(check_model, s, box_measure)
    total = compensated_sum(
        partial_trace_env(X @ Y.conj().T, dS=2, dE=32)
        for X in amplitudes["X"]
        for Y in amplitudes["X"]
    )
    numpy.testing.assert_allclose(
        total, exact_reduced_density(check_model, t=s.t).matrix, atol=1e-12
    )
