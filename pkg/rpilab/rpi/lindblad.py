"""
RPIlab: Lindblad evolution and the Markovian limit of per-slice measurement.

Copyright 2024 RPIlab Developers
"""

from typing import Sequence, Tuple
import warnings

import numpy
import scipy.linalg

from rpilab.common import (
    MAX_INTEGRATOR_STEPS,
    TOL_EIGENVALUE_FLOOR,
    GuardExceededError,
)
from rpilab.corridors.computation import spectrum_measure
from rpilab.corridors.types import Normalization, Window, WindowKind
from rpilab.evolution.types import SliceScheme
from rpilab.hilbert.computation import eigenbasis, trace_distance
from rpilab.hilbert.types import DensityOp
from rpilab.model.types import CompoundModel
from rpilab.rpi.computation import iterated_channel
from rpilab.rpi.types import LindbladGenerator, MarkovLadder
from rpilab.types import ComplexMatrix, FloatVector

# Smallest eigenvalue tolerated before a Lindblad result is flagged.
_POSITIVITY_FLOOR = -1.0e-8


def kappa_eff(sigma: float, dt: float) -> float:
    """
    Lindblad strength κ = 1/(4σ²dt) of povm-normalized Gaussian windows of width σ
    applied once per slice of duration dt.

    Both damp the coherence between eigenvalues λ and λ' of the measured
    observable by exp(-(λ - λ')²/(8σ²)) per slice.
    """
    if not (numpy.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive and finite, got {sigma}")

    if not (numpy.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be positive and finite, got {dt}")

    return 1 / (4 * sigma**2 * dt)


def lindblad_superoperator(g: LindbladGenerator) -> ComplexMatrix:
    """
    Generator as a matrix acting on row-major vectorized density matrices,
    vec(AρB) = (A⊗Bᵀ)·vec(ρ).
    """
    identity = numpy.eye(g.dim)
    L = g.jump
    LdL = L.conj().T @ L

    return (
        -1j * (numpy.kron(g.H, identity) - numpy.kron(identity, g.H.T))
        + numpy.kron(L, L.conj())
        - 0.5 * (numpy.kron(LdL, identity) + numpy.kron(identity, LdL.T))
    )


def _density(rho: ComplexMatrix, *, normalized: bool) -> DensityOp:
    rho = (rho + rho.conj().T) / 2
    eigenvalues, V = scipy.linalg.eigh(rho)
    scale = max(1.0, float(numpy.trace(rho).real))

    if eigenvalues.min() < _POSITIVITY_FLOOR * scale:
        warnings.warn(
            f"lindblad state has eigenvalue {eigenvalues.min()} below positivity "
            f"floor {_POSITIVITY_FLOOR}"
        )

    if eigenvalues.min() < TOL_EIGENVALUE_FLOOR * scale:
        # Clip onto the positive cone.
        rho = (V * numpy.clip(eigenvalues, 0, None)) @ V.conj().T
        normalized = False

    return DensityOp(matrix=rho, normalized=normalized)


def lindblad_evolve(g: LindbladGenerator, rho_in: DensityOp, t: float) -> DensityOp:
    """
    Integrate the Lindblad equation with fixed fourth-order Runge-Kutta steps.

    Parameters
    ----------
    g
        Generator
    rho_in
        Initial state
    t
        Evolution time

    Returns
    -------
    rho
        State at time t, evolved in ceil(t/dt_max) equal steps

    Raises
    ------
    GuardExceededError
        If the step count exceeds the integrator guard

    Warns
    -----
    UserWarning
        If an eigenvalue falls below -1e-8, after which the state is clipped onto
        the positive cone
    """
    if not (numpy.isfinite(t) and t >= 0):
        raise ValueError(f"evolution time must be non-negative and finite, got {t}")

    if rho_in.dim != g.dim:
        raise ValueError(
            f"state dimension {rho_in.dim} does not match generator dimension "
            f"{g.dim}"
        )

    n_steps = int(numpy.ceil(t / g.dt_max * (1 - 1e-12)))

    if n_steps > MAX_INTEGRATOR_STEPS:
        raise GuardExceededError(
            f"integrator step count {n_steps} exceeds guard {MAX_INTEGRATOR_STEPS}"
        )

    H = g.H
    L = g.jump
    Ld = L.conj().T
    LdL = Ld @ L

    def derivative(rho: ComplexMatrix) -> ComplexMatrix:
        return (
            -1j * (H @ rho - rho @ H)
            + L @ rho @ Ld
            - 0.5 * (LdL @ rho + rho @ LdL)
        )

    rho = rho_in.matrix.astype(complex)

    if n_steps == 0:
        return DensityOp(matrix=rho, normalized=rho_in.normalized)

    h = t / n_steps

    for _ in range(n_steps):
        k1 = derivative(rho)
        k2 = derivative(rho + h / 2 * k1)
        k3 = derivative(rho + h / 2 * k2)
        k4 = derivative(rho + h * k3)
        rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    return _density(rho, normalized=rho_in.normalized)


def coherence_decay(
    g: LindbladGenerator, rho_in: DensityOp, times: Sequence[float]
) -> Tuple[FloatVector, FloatVector]:
    """
    Magnitude of the largest off-diagonal entry over a time grid.

    Returns
    -------
    times, coherence
        Sorted times and max_{i≠j} |ρ_ij(t)|
    """
    times = numpy.sort(numpy.asarray(times, dtype=float))

    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty one-dimensional sequence")

    coherence = numpy.zeros(times.size)
    rho = rho_in
    previous = 0.0
    off = ~numpy.eye(g.dim, dtype=bool)

    for idx, t in enumerate(times):
        rho = lindblad_evolve(g, rho, t - previous)
        previous = t
        coherence[idx] = numpy.abs(rho.matrix[off]).max() if g.dim > 1 else 0.0

    return times, coherence


def markov_limit_check(
    m: CompoundModel,
    *,
    sigma: float,
    dts: Sequence[float],
    t: float = 1.0,
    n_nodes: int = 64,
    n_sigma: float = 6.0,
    dt_max: float = 1.0e-3,
) -> MarkovLadder:
    """
    Distance between K slices of free evolution and povm-normalized Gaussian
    windows on the system observable, and Lindblad evolution at κ = κ_eff.

    Parameters
    ----------
    m
        Model providing H_S, the system observable, and the initial system state
    sigma
        Window width at the first rung
    dts
        Slice durations, each dividing t, with σ²·dt held fixed across rungs
    t
        Evolution time
    n_nodes
        Window nodes per slice
    n_sigma
        Window range beyond the spectrum, in σ
    dt_max
        Integrator step of the Lindblad reference

    Returns
    -------
    ladder
        κ and, per rung, dt, σ, and the trace distance at time t, which shrinks
        linearly in dt when H_S does not commute with the observable
    """
    dts = numpy.asarray(dts, dtype=float)

    if dts.ndim != 1 or dts.size == 0:
        raise ValueError("dts must be a non-empty one-dimensional sequence")

    kappa = kappa_eff(sigma, float(dts[0]))
    eigenvalues, _ = eigenbasis(m.sys_obs)
    reference = lindblad_evolve(
        LindbladGenerator.from_measurement(
            H=m.H_S, A=m.sys_obs, kappa=kappa, dt_max=dt_max
        ),
        m.rho_in_S,
        t,
    )
    sigmas = numpy.zeros(dts.size)
    distances = numpy.zeros(dts.size)

    for idx, dt in enumerate(dts):
        K = int(round(t / dt))

        if K < 1 or abs(K * dt - t) > 1e-9 * t:
            raise ValueError(f"slice duration {dt} does not divide time {t}")

        sigmas[idx] = 1 / (2 * numpy.sqrt(kappa * dt))
        w = Window(
            kind=WindowKind.GAUSSIAN,
            width=sigmas[idx],
            normalization=Normalization.POVM,
        )
        meas = spectrum_measure(eigenvalues, w, n_nodes=n_nodes, n_sigma=n_sigma)
        rho = iterated_channel(
            m.H_S, m.sys_obs, meas, SliceScheme(K=K, dt=dt), m.rho_in_S
        )
        distances[idx] = trace_distance(rho, reference)

    return MarkovLadder(kappa=kappa, dt=dts, sigma=sigmas, trace_dist=distances)
