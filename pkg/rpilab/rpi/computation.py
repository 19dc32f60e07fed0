"""
RPIlab: Restricted-path-integral propagators and selective evolution of the system.

A restricted-path-integral propagator U_α = Σ_s w_α[s]·S(s) weights every system
amplitude chain S(s) by a functional of the path. Weights come from a rank-one
factor of a partial influence functional, from per-slice system windows, or in
closed form from a Gaussian readout exp(-κ(A - a)²dt).

Copyright 2024 RPIlab Developers
"""

from typing import List, Optional, Sequence, Tuple

import numpy

from rpilab.common import (
    MAX_KAPPA_DT,
    MAX_PAIR_CORRIDORS,
    MAX_SYSTEM_PATHS,
    GuardExceededError,
    ordered_map,
)
from rpilab.corridors.computation import enumerate_corridors, spectrum_measure
from rpilab.corridors.types import (
    CorridorMeasure,
    CorridorSpec,
    Normalization,
    Window,
    WindowKind,
)
from rpilab.decoherence.influence import (
    NegligibleInfluenceError,
    factorize_pif,
    pif_table,
    system_path_chains,
)
from rpilab.decoherence.types import SystemWeight
from rpilab.evolution.computation import partial_density, partial_propagator
from rpilab.evolution.types import Placement, SliceScheme, Splitting
from rpilab.hilbert.computation import (
    compensated_sum,
    eigenbasis,
    trace_distance,
    unitary_exp,
)
from rpilab.hilbert.types import DensityOp, QState, as_square_matrix
from rpilab.model.types import CompoundModel
from rpilab.rpi.types import MeasurementRecord, RpiComparison, RpiPropagator, RpiSource
from rpilab.types import ComplexMatrix, FloatArray, MatrixLike

# Readout family: propagators with their measure weights.
RpiFamily = List[Tuple[RpiPropagator, float]]


def _check_dim(U: RpiPropagator, dim: int) -> None:
    if U.dim != dim:
        raise ValueError(
            f"propagator dimension {U.dim} does not match state dimension {dim}"
        )


def rpi_from_weights(
    w: SystemWeight, H_S: MatrixLike, s: SliceScheme
) -> RpiPropagator:
    """
    Restricted-path-integral propagator U_α = Σ_s w_α[s]·S(s) from a weight over
    system paths, summed path by path.

    Parameters
    ----------
    w
        Weight over system paths, with the path labels of its influence table
    H_S
        System Hamiltonian
    s
        Slice scheme of the influence table

    Returns
    -------
    propagator
        System operator with source extracted

    Raises
    ------
    GuardExceededError
        If the weight covers more paths than the system path guard
    """
    if w.paths.shape[0] > MAX_SYSTEM_PATHS:
        raise GuardExceededError(
            f"weight covers {w.paths.shape[0]} paths, exceeds guard "
            f"{MAX_SYSTEM_PATHS}"
        )

    chains = system_path_chains(H_S, w.basis, s, w.paths)

    return RpiPropagator(
        alpha=w.alpha,
        U=numpy.einsum("p,pij->ij", w.w, chains),
        source=RpiSource.EXTRACTED,
    )


def rpi_from_slice_weights(
    v: FloatArray,
    H_S: MatrixLike,
    basis: MatrixLike,
    s: SliceScheme,
    *,
    alpha: Optional[int] = None,
    source: RpiSource = RpiSource.WINDOWED,
) -> RpiPropagator:
    """
    Restricted-path-integral propagator of a weight that factorizes over slices,
    w[s] = ∏_k v_k(l_k), as the product ∏_k D_k·exp(-iH_S·dt) with
    D_k = Σ_l v_k(l)|l⟩⟨l|.

    Strang schemes use exp(-iH_S·dt/2)·D_k·exp(-iH_S·dt/2) per slice, and
    weight-then-evolve placement puts D_k after the slice evolution.

    Parameters
    ----------
    v
        Per-slice label weights, shape (K, d)
    H_S
        System Hamiltonian
    basis
        Eigenvectors (as columns) of the system observable
    s
        Slice scheme
    alpha
        Corridor index carried by the result
    source
        Weight source carried by the result

    Returns
    -------
    propagator
        System operator
    """
    H_S = as_square_matrix(H_S, name="system Hamiltonian")
    basis = as_square_matrix(basis, name="system basis")
    v = numpy.asarray(v, dtype=complex)

    if v.shape != (s.K, H_S.shape[0]):
        raise ValueError(
            f"slice weights have shape {v.shape}, expected ({s.K}, {H_S.shape[0]})"
        )

    if s.splitting is Splitting.STRANG:
        half = unitary_exp(H_S, s.dt / 2)
        slices = [half @ (basis * v_k) @ basis.conj().T @ half for v_k in v]
    else:
        U_S = unitary_exp(H_S, s.dt)
        slices = [
            (basis * v_k) @ basis.conj().T @ U_S
            if s.placement is Placement.EVOLVE_THEN_WEIGHT
            else U_S @ (basis * v_k) @ basis.conj().T
            for v_k in v
        ]

    U = numpy.eye(H_S.shape[0], dtype=complex)

    for factor in slices:
        U = factor @ U

    return RpiPropagator(alpha=alpha, U=U, source=source)


def selective_evolve(
    U: RpiPropagator, rho_in: DensityOp
) -> Tuple[DensityOp, float]:
    """
    Selective description of one readout, ρ_α = U_α·ρ_in·U_α† with probability
    Tr ρ_α.

    Returns
    -------
    rho_alpha
        Unnormalized conditional state
    prob
        Readout probability
    """
    _check_dim(U, rho_in.dim)
    rho = U.U @ rho_in.matrix @ U.U.conj().T

    return (
        DensityOp(matrix=(rho + rho.conj().T) / 2, normalized=False),
        float(numpy.trace(rho).real),
    )


def selective_evolve_state(U: RpiPropagator, psi: QState) -> QState:
    """Selective description of a pure state, |ψ_α⟩ = U_α|ψ_in⟩, unnormalized."""
    _check_dim(U, psi.dim)

    return QState(amplitudes=U.U @ psi.amplitudes, normalized=False)


def nonselective_reconstruct(
    family: Sequence[Tuple[RpiPropagator, float]], rho_in: DensityOp
) -> DensityOp:
    """
    Non-selective description Σ_α μ_α·U_α·ρ_in·U_α†, completely positive by
    construction and trace preserving for povm-consistent families.

    Parameters
    ----------
    family
        Propagators with their measure weights μ_α
    rho_in
        Initial system state

    Returns
    -------
    rho
        Unnormalized mixture, with trace one up to the family's completeness
    """
    if len(family) == 0:
        raise ValueError("readout family must have at least one propagator")

    for U, _ in family:
        _check_dim(U, rho_in.dim)

    rho = compensated_sum(
        weight * (U.U @ rho_in.matrix @ U.U.conj().T) for U, weight in family
    )

    return DensityOp(matrix=(rho + rho.conj().T) / 2, normalized=False)


def partially_selective_evolve(
    groups: Sequence[Sequence[Tuple[RpiPropagator, float]]], rho_in: DensityOp
) -> List[Tuple[DensityOp, float]]:
    """
    Description of readouts known only up to a grouping: each group of readouts
    contributes the mixture of its members and the group probability.

    Single-member groups reproduce the selective description and one group
    holding the whole family the non-selective one.
    """
    results = []

    for group in groups:
        rho = nonselective_reconstruct(group, rho_in)
        results.append((rho, rho.trace))

    return results


def system_window_weights(
    A: MatrixLike, w: Window, centers: Sequence[float]
) -> FloatArray:
    """Window profile W(λ_l - a_k) over the spectrum of A, shape (K, d)."""
    eigenvalues, _ = eigenbasis(A)

    return numpy.array([w.profile(eigenvalues - center) for center in centers])


def system_rpi_family(
    H_S: MatrixLike,
    A: MatrixLike,
    meas: CorridorMeasure,
    s: SliceScheme,
    *,
    max_corridors: int = MAX_PAIR_CORRIDORS,
) -> RpiFamily:
    """
    Restricted-path-integral propagators of every corridor of a window measure on
    a system observable, with windows W(A - a_k) acting on the system directly.

    Parameters
    ----------
    H_S
        System Hamiltonian
    A
        Measured system observable
    meas
        Window measure over the spectrum of A
    s
        Slice scheme
    max_corridors
        Maximum family size

    Returns
    -------
    family
        Windowed propagators in lexicographic corridor order with their weights
    """
    if meas.G**s.K > max_corridors:
        raise GuardExceededError(
            f"readout family size {meas.G}**{s.K} exceeds guard {max_corridors}"
        )

    _, basis = eigenbasis(A)
    family = []

    for c in enumerate_corridors(meas, s.K):
        v = system_window_weights(A, meas.window, c.centers)
        family.append(
            (rpi_from_slice_weights(v, H_S, basis, s, alpha=c.index), c.measure_weight)
        )

    return family


def iterated_channel(
    H_S: MatrixLike,
    A: MatrixLike,
    meas: CorridorMeasure,
    s: SliceScheme,
    rho_in: DensityOp,
) -> DensityOp:
    """
    K slices of free evolution and the window channel ρ → Σ_j μ_j W_j·ρ·W_j with
    W_j = W(A - a_j), applied one slice at a time.

    Slices follow the scheme as the windowed propagators do, so the result equals
    the non-selective mixture of the system family of the same measure.
    """
    H_S = as_square_matrix(H_S, name="system Hamiltonian")
    eigenvalues, V = eigenbasis(A)

    if rho_in.dim != H_S.shape[0]:
        raise ValueError(
            f"state dimension {rho_in.dim} does not match system dimension "
            f"{H_S.shape[0]}"
        )

    profiles = numpy.array(
        [meas.window.profile(eigenvalues - node) for node in meas.nodes]
    )
    # Kernel Σ_j μ_j W_j(λ)·W_j(λ') acting entrywise in the eigenbasis of A.
    kernel = (profiles * meas.weights[:, numpy.newaxis]).T @ profiles

    def weigh(rho: ComplexMatrix) -> ComplexMatrix:
        return V @ (kernel * (V.conj().T @ rho @ V)) @ V.conj().T

    rho = rho_in.matrix.astype(complex)

    if s.splitting is Splitting.STRANG:
        half = unitary_exp(H_S, s.dt / 2)

        for _ in range(s.K):
            rho = half @ weigh(half @ rho @ half.conj().T) @ half.conj().T
    else:
        U_S = unitary_exp(H_S, s.dt)

        for _ in range(s.K):
            if s.placement is Placement.EVOLVE_THEN_WEIGHT:
                rho = weigh(U_S @ rho @ U_S.conj().T)
            else:
                rho = U_S @ weigh(rho) @ U_S.conj().T

    return DensityOp(matrix=(rho + rho.conj().T) / 2, normalized=False)


def _check_step(kappa: float, dt: float) -> None:
    if not (numpy.isfinite(kappa) and kappa >= 0):
        raise ValueError(f"kappa must be non-negative and finite, got {kappa}")

    if not (numpy.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")

    if kappa * dt > MAX_KAPPA_DT:
        raise GuardExceededError(
            f"kappa·dt = {kappa * dt} exceeds step guard {MAX_KAPPA_DT}, "
            "use a smaller dt"
        )


def gaussian_step_operator(
    H_S: MatrixLike, A: MatrixLike, *, a: float, kappa: float, dt: float
) -> ComplexMatrix:
    """
    One step of the complex-Hamiltonian evolution exp(-iH_S·dt - κ(A - a)²dt),
    Strang split as exp(-iH_S·dt/2)·exp(-κ(A - a)²dt)·exp(-iH_S·dt/2).
    """
    _check_step(kappa, dt)
    eigenvalues, V = eigenbasis(A)
    damping = numpy.exp(-kappa * (eigenvalues - a) ** 2 * dt)
    half = unitary_exp(H_S, dt / 2)

    return half @ (V * damping) @ V.conj().T @ half


def gaussian_rpi_step(
    psi: QState,
    *,
    a_k: float,
    kappa: float,
    dt: float,
    H_S: MatrixLike,
    A: MatrixLike,
) -> QState:
    """
    Advance a state by one step of a Gaussian readout centered at a_k.

    Parameters
    ----------
    psi
        State before the step
    a_k
        Readout value of the step
    kappa
        Measurement strength
    dt
        Step duration
    H_S
        System Hamiltonian
    A
        Measured system observable

    Returns
    -------
    psi
        Unnormalized state, whose squared norm drops by the readout likelihood

    Raises
    ------
    GuardExceededError
        If κ·dt exceeds the step guard
    """
    step = gaussian_step_operator(H_S, A, a=a_k, kappa=kappa, dt=dt)

    if step.shape[0] != psi.dim:
        raise ValueError(
            f"state dimension {psi.dim} does not match system dimension "
            f"{step.shape[0]}"
        )

    return QState(amplitudes=step @ psi.amplitudes, normalized=False)


def _kraus_factor(kappa: float, dt: float) -> float:
    # Normalizes exp(-κ(λ - a)²dt) so that its square integrates to one over a.
    return (2 * kappa * dt / numpy.pi) ** 0.25


def gaussian_rpi_propagator(
    record: MeasurementRecord,
    H_S: MatrixLike,
    dt: float,
    *,
    alpha: Optional[int] = None,
    kraus_normalized: bool = False,
) -> RpiPropagator:
    """
    Restricted-path-integral propagator of a readout path, the product of its
    Gaussian steps.

    Parameters
    ----------
    record
        Readout path, strength, and observable
    H_S
        System Hamiltonian
    dt
        Step duration
    alpha
        Readout index carried by the result
    kraus_normalized
        Scale every step by (2κdt/π)^(1/4), so that readout families integrate to
        a trace-preserving channel

    Returns
    -------
    propagator
        System operator with source gaussian-analytic
    """
    if kraus_normalized and record.kappa == 0:
        raise ValueError("kraus normalization requires a positive kappa")

    U = numpy.eye(record.observable.shape[0], dtype=complex)

    for a in record.readout:
        step = gaussian_step_operator(
            H_S, record.observable, a=a, kappa=record.kappa, dt=dt
        )
        U = step @ U

    if kraus_normalized:
        U = _kraus_factor(record.kappa, dt) ** record.K * U

    return RpiPropagator(alpha=alpha, U=U, source=RpiSource.GAUSSIAN_ANALYTIC)


def gaussian_readout_measure(
    A: MatrixLike, *, kappa: float, dt: float, n_nodes: int = 32, n_sigma: float = 6.0
) -> CorridorMeasure:
    """
    Readout quadrature of a Gaussian step: the povm window of width 1/(2√(κdt)),
    whose profile is the Kraus-normalized exp(-κ(λ - a)²dt).
    """
    _check_step(kappa, dt)

    if kappa == 0:
        raise ValueError("readout quadrature requires a positive kappa")

    eigenvalues, _ = eigenbasis(A)
    w = Window(
        kind=WindowKind.GAUSSIAN,
        width=1 / (2 * numpy.sqrt(kappa * dt)),
        normalization=Normalization.POVM,
    )

    return spectrum_measure(eigenvalues, w, n_nodes=n_nodes, n_sigma=n_sigma)


def gaussian_rpi_family(
    H_S: MatrixLike,
    A: MatrixLike,
    *,
    kappa: float,
    dt: float,
    K: int,
    n_nodes: int = 32,
    n_sigma: float = 6.0,
    max_corridors: int = MAX_PAIR_CORRIDORS,
) -> RpiFamily:
    """
    Kraus-normalized Gaussian readout paths over a quadrature grid, whose
    non-selective mixture approximates K steps of the measurement channel.

    Parameters
    ----------
    H_S
        System Hamiltonian
    A
        Measured system observable
    kappa
        Measurement strength
    dt
        Step duration
    K
        Number of steps
    n_nodes
        Readout nodes per step
    n_sigma
        Readout range beyond the spectrum of A, in readout standard deviations
    max_corridors
        Maximum family size

    Returns
    -------
    family
        Propagators in lexicographic readout order with their quadrature weights
    """
    meas = gaussian_readout_measure(
        A, kappa=kappa, dt=dt, n_nodes=n_nodes, n_sigma=n_sigma
    )

    if meas.G**K > max_corridors:
        raise GuardExceededError(
            f"readout family size {meas.G}**{K} exceeds guard {max_corridors}"
        )

    family = []

    for c in enumerate_corridors(meas, K):
        record = MeasurementRecord(readout=c.centers, kappa=kappa, observable=A)
        U = gaussian_rpi_propagator(
            record, H_S, dt, alpha=c.index, kraus_normalized=True
        )
        family.append((U, c.measure_weight))

    return family


def extract_rpi_family(
    m: CompoundModel,
    s: SliceScheme,
    corridors: Sequence[CorridorSpec],
    *,
    max_workers: Optional[int] = None,
) -> RpiFamily:
    """
    Extracted propagators of many corridors, each from the rank-one factor of its
    diagonal partial influence functional.

    Corridors with a negligible partial influence functional carry no weight and
    are left out.
    """

    def extract(c: CorridorSpec) -> Optional[Tuple[RpiPropagator, float]]:
        try:
            weight, _ = factorize_pif(pif_table(m, s, (c, c)))
        except NegligibleInfluenceError:
            return None

        return rpi_from_weights(weight, m.H_S, s), c.measure_weight

    return [
        item
        for item in ordered_map(extract, corridors, max_workers=max_workers)
        if item is not None
    ]


def compare_rpi_vs_exact(
    m: CompoundModel, s: SliceScheme, corridor: CorridorSpec
) -> RpiComparison:
    """
    Restricted-path-integral state U_α·ρ_in·U_α† of a corridor against its reduced
    partial density ρ_αα from the compound evolution.

    Parameters
    ----------
    m
        Compound model with product coupling
    s
        Slice scheme
    corridor
        Corridor α

    Returns
    -------
    comparison
        Trace distance between the normalized states, relative probability error,
        and the factorization residual of the corridor's partial influence
        functional

    Raises
    ------
    NegligibleInfluenceError
        If the corridor carries no weight
    """
    weight, _ = factorize_pif(pif_table(m, s, (corridor, corridor)))
    U = rpi_from_weights(weight, m.H_S, s)
    rho_rpi, prob_rpi = selective_evolve(U, m.rho_in_S)

    U_exact = partial_propagator(m, s, corridor)
    rho_exact = partial_density(m, U_exact, U_exact).rho
    prob_exact = float(numpy.trace(rho_exact).real)

    return RpiComparison(
        alpha=corridor.index,
        trace_dist=trace_distance(
            rho_exact / prob_exact, rho_rpi.matrix / prob_rpi
        ),
        prob_rel_err=abs(prob_rpi - prob_exact) / prob_exact,
        factorization_residual=weight.residual,
        prob_exact=prob_exact,
        prob_rpi=prob_rpi,
    )
