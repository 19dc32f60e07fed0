"""
RPIlab: Computations on compound system+environment models.

Copyright 2024 RPIlab Developers
"""

from typing import TypedDict

import numpy

from rpilab.hilbert.computation import kron, partial_trace_env, unitary_exp
from rpilab.hilbert.types import DensityOp
from rpilab.model.types import CompoundModel
from rpilab.types import ComplexMatrix, FloatArray, FloatVector


class BranchTrajectories(TypedDict):
    """Conditional pointer means for each eigenvalue branch of the system observable."""

    times: FloatVector
    eigenvalues: FloatVector
    weights: FloatVector  # <a|ρ_S|a> for each branch.
    mean_pointer: FloatArray  # Shape (branches, times).


def total_hamiltonian(m: CompoundModel) -> ComplexMatrix:
    """Compound Hamiltonian H_S⊗I + I⊗H_E + H_I."""
    H = kron(m.H_S, numpy.eye(m.dim_E)) + kron(numpy.eye(m.dim_S), m.H_E) + m.H_I

    return (H + H.conj().T) / 2


def free_hamiltonian(m: CompoundModel) -> ComplexMatrix:
    """Uncoupled part H_S⊗I + I⊗H_E."""
    return kron(m.H_S, numpy.eye(m.dim_E)) + kron(numpy.eye(m.dim_S), m.H_E)


def exact_reduced_density(m: CompoundModel, *, t: float) -> DensityOp:
    """Reduced system state Tr_E[U(t)·R_in·U(t)†] from exact compound evolution."""
    U = unitary_exp(total_hamiltonian(m), t)
    C = U @ m.initial_purification()

    return DensityOp(
        matrix=partial_trace_env(C @ C.conj().T, dS=m.dim_S, dE=m.dim_E)
    )


def check_pointer_excursion(m: CompoundModel, *, duration: float) -> None:
    """
    Raise if a branch would carry a periodic-grid pointer beyond half the grid
    half-width within duration.

    Models built with a coupling g and a grid half-width x_max translate the pointer
    by g·a·t on branch a and wrap around at ±x_max. Other models are not checked.

    Raises
    ------
    ValueError
        If g·max|a|·duration exceeds x_max/2
    """
    parameters = m.parameters

    if "x_max" not in parameters or "g" not in parameters:
        return

    excursion = (
        abs(parameters["g"]) * float(numpy.abs(m.sys_eigenvalues).max()) * duration
    )
    limit = parameters["x_max"] / 2

    # Equality is allowed, up to rounding of K·dt.
    if excursion > limit * (1 + 1e-12):
        raise ValueError(
            f"pointer branch excursion {excursion} over duration {duration} exceeds "
            f"x_max/2 = {limit}"
        )


def branch_pointer_trajectory(
    m: CompoundModel, *, times: FloatVector
) -> BranchTrajectories:
    """
    Conditional pointer mean ⟨Q⟩(t) for each eigenbranch |a⟩ of the system
    observable, from the unrestricted compound evolution of |a⟩⟨a|⊗ρ_E.

    Parameters
    ----------
    m
        Compound model
    times
        Evaluation times

    Returns
    -------
    trajectories
        Branch eigenvalues, initial branch weights, and the conditional pointer means
    """
    times = numpy.asarray(times, dtype=float)

    if times.ndim != 1:
        raise ValueError("times must be one dimensional")

    if times.size:
        check_pointer_excursion(m, duration=float(numpy.abs(times).max()))

    H = total_hamiltonian(m)
    Q = kron(numpy.eye(m.dim_S), m.pointer_obs)
    branch_states = [
        kron(numpy.outer(v, v.conj()), m.rho_in_E.matrix) for v in m.sys_eigenvectors.T
    ]
    mean_pointer = numpy.zeros((m.dim_S, times.size))

    for idx, t in enumerate(times):
        U = unitary_exp(H, t)

        for branch, R in enumerate(branch_states):
            R_t = U @ R @ U.conj().T
            mean_pointer[branch, idx] = (
                numpy.trace(Q @ R_t).real / numpy.trace(R_t).real
            )

    weights = numpy.real(
        numpy.einsum(
            "ia,ij,ja->a",
            m.sys_eigenvectors.conj(),
            m.rho_in_S.matrix,
            m.sys_eigenvectors,
        )
    )

    return BranchTrajectories(
        times=times,
        eigenvalues=numpy.array(m.sys_eigenvalues),
        weights=weights,
        mean_pointer=mean_pointer,
    )
