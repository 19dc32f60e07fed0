"""
RPIlab testing: Decoherence functionals, consistency conditions, and corridor scans.

Copyright 2024 RPIlab Developers
"""

import numpy
import pytest

from rpilab.common import GuardExceededError
from rpilab.corridors.computation import (
    build_measure,
    enumerate_corridors,
    tracking_corridor,
)
from rpilab.corridors.types import Normalization, Window, WindowKind
from rpilab.decoherence import computation
from rpilab.evolution.computation import partial_density, sweep_partial_propagators
from rpilab.evolution.types import SliceScheme
from rpilab.hilbert.types import is_hermitian
from rpilab.model import presets
from rpilab.model.computation import branch_pointer_trajectory


@pytest.fixture
def check_model():
    return presets.build_preset("von_neumann_check")


@pytest.fixture
def box_measure(check_model):
    # Four cells centered at -3, -1, 1, 3.
    return build_measure(
        check_model, Window(kind=WindowKind.BOX, width=2.0), origin=1.0
    )


def test_decoherence_functional(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)
    full = tracking_corridor(Window(kind=WindowKind.BOX, width=16.0), [0.0, 0.0])
    (U,) = sweep_partial_propagators(check_model, s, [full])
    P = computation.decoherence_functional(partial_density(check_model, U, U))
    assert P == pytest.approx(1.0, abs=1e-12)

    propagators = sweep_partial_propagators(
        check_model, s, enumerate_corridors(box_measure, 2)
    )
    total = 0.0

    for Ua in propagators:
        for Ub in propagators:
            P = computation.decoherence_functional(partial_density(check_model, Ua, Ub))

            if Ua is Ub:
                assert abs(P.imag) < 1e-12
                assert P.real >= -1e-12

            total += Ua.corridor.measure_weight * Ub.corridor.measure_weight * P

    assert total == pytest.approx(1.0, abs=1e-10)


def test_consistency_report_box(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)
    report = computation.consistency_report(check_model, s, box_measure)
    P = report["P"]

    assert len(report["corridors"]) == 16
    assert P.shape == (16, 16)
    assert is_hermitian(P, tol=1e-12)
    assert numpy.all(report["probs"] >= -1e-10)
    assert report["probs"].sum() == pytest.approx(1.0)
    assert report["completeness_residual"] < 1e-10
    assert report["pruned_probability"] == 0.0
    numpy.testing.assert_array_equal(numpy.diag(report["coherence_ratios"]), 1.0)
    assert 0 <= report["consistency_ratio"] <= 1 + 1e-12
    assert 0 <= report["env_ratio"] <= 1 + 1e-12

    # Trace norms dominate the traces of the reduced partial densities.
    valid = ~numpy.isnan(report["env_ratios"])
    assert numpy.all(
        report["env_ratios"][valid] >= report["coherence_ratios"][valid] - 1e-12
    )

    # Matches the pairwise partial densities.
    propagators = sweep_partial_propagators(check_model, s, report["corridors"])
    expected = computation.decoherence_functional(
        partial_density(check_model, propagators[5], propagators[6])
    )
    assert P[5, 6] == pytest.approx(expected, abs=1e-12)


def test_consistency_report_inert_environment():
    # All bath spins down is stationary and sits in the cell at magnetization -2.
    m = presets.build_spin_bath(n_spins=2, g=0.0, epsilon=1.0)
    meas = build_measure(m, Window(kind=WindowKind.BOX, width=2.0))
    numpy.testing.assert_array_equal(meas.nodes, [-2.0, 0.0, 2.0])

    report = computation.consistency_report(m, SliceScheme(K=2, dt=0.4), meas)
    assert numpy.sum(numpy.abs(report["P"]) > 1e-14) == 1
    assert report["P"][0, 0] == pytest.approx(1.0)
    numpy.testing.assert_allclose(report["probs"], numpy.eye(9)[0], atol=1e-12)
    assert report["consistency_ratio"] == 0.0
    assert report["env_ratio"] == 0.0
    assert numpy.isnan(report["env_ratios"][0, 1])


def test_consistency_report_strong_measurement():
    m = presets.build_preset("von_neumann_strong")
    s = SliceScheme(K=4, dt=0.25)
    meas = build_measure(m, Window(kind=WindowKind.BOX, width=0.5))
    assert meas.G == 17

    report = computation.consistency_report(m, s, meas, prune_tol=1e-12)
    assert report["env_ratio"] < 0.1
    assert report["consistency_ratio"] < 0.1
    assert report["pruned_probability"] < 1e-8
    assert report["completeness_residual"] < 1e-6
    assert report["probs"].sum() == pytest.approx(1.0)


def test_consistency_report_negative_controls():
    # A window far wider than the pointer excursion cannot tell the branches apart.
    m = presets.build_preset("von_neumann_strong")
    meas = build_measure(m, Window(kind=WindowKind.GAUSSIAN, width=10.0), n_nodes=4)
    report = computation.consistency_report(m, SliceScheme(K=2, dt=0.5), meas)
    assert report["env_ratio"] > 0.5

    # Weak and absent coupling leave neighboring corridors coherent.
    for name in ("von_neumann_weak", "von_neumann_decoupled"):
        m = presets.build_preset(name)
        meas = build_measure(
            m, Window(kind=WindowKind.GAUSSIAN, width=0.5), n_nodes=32, n_sigma=3.0
        )
        report = computation.consistency_report(m, SliceScheme(K=1, dt=1.0), meas)
        assert report["env_ratio"] > 0.5
        assert report["completeness_residual"] < 1e-6


def test_consistency_report_coupling_trend():
    # Slice shifts g·dt are whole cells of the 0.125 partition and even multiples of
    # the grid step, so each corridor follows one branch and the cross-branch
    # overlap inside a cell falls as the branches separate.
    s = SliceScheme(K=2, dt=0.5)
    ratios = []

    for g in (0.25, 0.5, 1.0, 2.0):
        m = presets.build_preset("von_neumann_strong", g=g)
        meas = build_measure(m, Window(kind=WindowKind.BOX, width=0.125))
        report = computation.consistency_report(m, s, meas, prune_tol=1e-12)
        ratios.append(report["env_ratio"])

    assert ratios[0] > 0.5
    assert ratios[-1] < 0.1

    for weaker, stronger in zip(ratios[:-1], ratios[1:]):
        assert stronger <= 1.05 * weaker


def test_consistency_report_povm_completeness():
    m = presets.build_preset("von_neumann_check")
    w = Window(
        kind=WindowKind.GAUSSIAN, width=0.5, normalization=Normalization.POVM
    )
    meas = build_measure(m, w, n_nodes=48)
    report = computation.consistency_report(m, SliceScheme(K=1, dt=0.5), meas)
    assert report["completeness_residual"] < 1e-6


def test_consistency_report_errors(check_model, box_measure):
    s = SliceScheme(K=2, dt=0.5)

    with pytest.raises(ValueError) as excinfo:
        computation.consistency_report(check_model, s, box_measure, prob_floor=1.5)
    assert "prob_floor must be in [0, 1)" in str(excinfo.value)

    with pytest.raises(GuardExceededError) as excinfo:
        computation.consistency_report(check_model, s, box_measure, max_corridors=8)
    assert "exceeds pair guard 8" in str(excinfo.value)


def test_classical_corridor_scan_strong_measurement():
    m = presets.build_preset("von_neumann_strong")
    s = SliceScheme(K=4, dt=0.25)
    meas = build_measure(m, Window(kind=WindowKind.BOX, width=0.5))
    scan = computation.classical_corridor_scan(m, s, meas)

    assert set(scan["branch"]) == {0, 1}
    assert numpy.all(scan["prob"] >= 0)
    assert numpy.all(scan["pif_norm"] >= 0)
    numpy.testing.assert_array_less(scan["distance"], numpy.abs(scan["offset"]) + 1e-9)
    top = scan["prob"].max()

    for branch in (0, 1):
        rows = scan["branch"] == branch
        best = numpy.argmax(scan["prob"][rows])
        assert scan["offset"][rows][best] == 0.0

    # Corridors three window widths from every branch are negligible.
    far = scan["distance"] > 1.4
    assert numpy.any(far)
    assert numpy.all(scan["prob"][far] < 1e-3 * top)


def test_classical_corridor_scan_inert_environment():
    m = presets.build_preset("von_neumann_decoupled")
    s = SliceScheme(K=2, dt=0.25)
    w = Window(kind=WindowKind.BOX, width=0.5)
    scan = computation.classical_corridor_scan(
        m, s, build_measure(m, w), offsets=[-0.5, 0.0, 0.5, 1.0]
    )
    assert scan["prob"].size == 8

    # The static packet weighs each corridor by its overlap with one cell.
    tracks = branch_pointer_trajectory(m, times=s.times)["mean_pointer"]
    x = m.pointer_eigenvalues
    p = m.rho_in_E.matrix.diagonal().real

    for branch, offset, prob in zip(scan["branch"], scan["offset"], scan["prob"]):
        center = tracks[branch, 0] + offset
        assert prob == pytest.approx(
            float(numpy.sum(p * w.profile(x - center))), abs=1e-12
        )


def test_classical_corridor_scan_offsets_out_of_range(check_model, box_measure):
    scan = computation.classical_corridor_scan(
        check_model, SliceScheme(K=1, dt=0.5), box_measure, offsets=[0.0, 10.0]
    )
    numpy.testing.assert_array_equal(scan["offset"], [0.0, 0.0])
