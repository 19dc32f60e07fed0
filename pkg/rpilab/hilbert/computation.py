"""
RPIlab: Computations on states and operators.

Copyright 2024 RPIlab Developers
"""

from typing import Iterable, Tuple, Union

import numpy
import scipy.linalg

from rpilab.common import TOL_OPERATOR
from rpilab.hilbert.types import (
    DensityOp,
    as_complex_matrix,
    as_square_matrix,
    hermiticity_residual,
)
from rpilab.types import ComplexMatrix, ComplexVector, FloatVector, MatrixLike


def kron(A: MatrixLike, B: MatrixLike) -> ComplexMatrix:
    """
    Kronecker product A⊗B, with the first factor the system and the second the
    environment in compound indexing (i·rB + k, j·cB + l).
    """
    return numpy.kron(
        as_complex_matrix(A, name="first factor"),
        as_complex_matrix(B, name="second factor"),
    )


def partial_trace_env(M: MatrixLike, *, dS: int, dE: int) -> ComplexMatrix:
    """
    Trace out the environment factor of a compound operator.

    Parameters
    ----------
    M
        Compound operator of shape (dS·dE, dS·dE)
    dS
        System dimension
    dE
        Environment dimension

    Returns
    -------
    out
        System operator of shape (dS, dS) with out[i, j] = Σ_k M[(i, k), (j, k)]
    """
    M = as_complex_matrix(M, name="compound operator")

    if dS < 1 or dE < 1:
        raise ValueError(f"dimensions must be positive, got dS={dS}, dE={dE}")

    if M.shape != (dS * dE, dS * dE):
        raise ValueError(
            f"compound operator shape {M.shape} does not match dS={dS}, dE={dE}"
        )

    return numpy.einsum("ikjk->ij", M.reshape(dS, dE, dS, dE))


def partial_trace_sys(M: MatrixLike, *, dS: int, dE: int) -> ComplexMatrix:
    """Trace out the system factor of a compound operator."""
    M = as_complex_matrix(M, name="compound operator")

    if M.shape != (dS * dE, dS * dE):
        raise ValueError(
            f"compound operator shape {M.shape} does not match dS={dS}, dE={dE}"
        )

    return numpy.einsum("kikj->ij", M.reshape(dS, dE, dS, dE))


def unitary_exp(H: MatrixLike, t: float) -> ComplexMatrix:
    """
    Evolution operator exp(-i·H·t) of a Hermitian generator.

    Computed from the Hermitian eigendecomposition H = V·diag(λ)·V†, which is
    unitary to working precision for every t.
    """
    H = as_square_matrix(H, name="generator")

    if hermiticity_residual(H) > TOL_OPERATOR:
        raise ValueError("generator must be Hermitian")

    eigenvalues, V = scipy.linalg.eigh((H + H.conj().T) / 2)

    return (V * numpy.exp(-1j * eigenvalues * t)) @ V.conj().T


def eigenbasis(M: MatrixLike) -> Tuple[FloatVector, ComplexMatrix]:
    """
    Eigenvalues and orthonormal eigenvectors (as columns) of a Hermitian operator.

    A diagonal operator keeps its computational basis and ordering, so that path
    labels and pointer cells follow the basis the model was written in.
    """
    M = as_square_matrix(M, name="observable")

    if hermiticity_residual(M) > TOL_OPERATOR:
        raise ValueError("observable must be Hermitian")

    if not numpy.any(M - numpy.diag(numpy.diag(M))):
        return numpy.diag(M).real.copy(), numpy.eye(M.shape[0], dtype=complex)

    eigenvalues, V = scipy.linalg.eigh((M + M.conj().T) / 2)

    return eigenvalues, V.astype(complex)


def purification_columns(rho: MatrixLike) -> ComplexMatrix:
    """Columns C with C·C† = ρ, dropping numerically empty eigenspaces."""
    eigenvalues, V = eigenbasis(rho)
    keep = eigenvalues > TOL_OPERATOR * max(1.0, eigenvalues.max())

    return V[:, keep] * numpy.sqrt(eigenvalues[keep])


def commutator(A: MatrixLike, B: MatrixLike) -> ComplexMatrix:
    """Commutator [A, B] = AB - BA."""
    A = numpy.asarray(A)
    B = numpy.asarray(B)

    return A @ B - B @ A


def trace_norm(M: MatrixLike) -> float:
    """Sum of singular values."""
    M = as_complex_matrix(M)

    if M.size == 0:
        return 0.0

    return float(numpy.sum(scipy.linalg.svdvals(M)))


def purity(rho: Union[DensityOp, MatrixLike]) -> float:
    """Tr ρ² of a (possibly unnormalized) density operator."""
    if isinstance(rho, DensityOp):
        rho = rho.matrix

    rho = as_square_matrix(rho, name="density matrix")

    # Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
    return float(numpy.sum(numpy.abs(rho) ** 2))


def trace_distance(
    a: Union[DensityOp, MatrixLike], b: Union[DensityOp, MatrixLike]
) -> float:
    """
    Trace distance ½·Σ|eig(a - b)| between two Hermitian operators.

    Returns a value in [0, 1] for normalized density operators.
    """
    if isinstance(a, DensityOp):
        a = a.matrix

    if isinstance(b, DensityOp):
        b = b.matrix

    a = as_square_matrix(a, name="first operator")
    b = as_square_matrix(b, name="second operator")

    if a.shape != b.shape:
        raise ValueError(f"operator shapes differ, {a.shape} and {b.shape}")

    difference = a - b

    if hermiticity_residual(difference) > TOL_OPERATOR:
        raise ValueError("operators must be Hermitian")

    eigenvalues = scipy.linalg.eigvalsh((difference + difference.conj().T) / 2)

    return float(numpy.sum(numpy.abs(eigenvalues)) / 2)


def compensated_sum(terms: Iterable[MatrixLike]) -> ComplexMatrix:
    """
    Kahan-compensated, element-wise sum of equally-shaped arrays in the given
    order.

    Sums over corridors use this to stay reproducible to the last few ulps
    regardless of how the terms were produced.
    """
    total = None
    compensation = None

    for term in terms:
        term = numpy.asarray(term, dtype=complex)

        if total is None:
            total = term.copy()
            compensation = numpy.zeros_like(total)
            continue

        if term.shape != total.shape:
            raise ValueError(
                f"term shape {term.shape} does not match sum shape {total.shape}"
            )

        corrected = term - compensation
        updated = total + corrected
        compensation = (updated - total) - corrected
        total = updated

    if total is None:
        raise ValueError("terms must have at least one element")

    return total


def rank1_residual(F: MatrixLike) -> Tuple[float, ComplexVector, ComplexVector]:
    """
    Closeness of a matrix to a rank-one outer product.

    Parameters
    ----------
    F
        Nonzero complex matrix

    Returns
    -------
    sigma_ratio
        σ₂/σ₁ from the singular values, zero for a numerically rank-one matrix
    left
        Leading left singular vector scaled by √σ₁
    right
        Leading right singular vector scaled by √σ₁, so that
        F ≈ outer(left, right.conj())

    Notes
    -----
    The global phase is fixed so that the largest-magnitude entry of left is real
    and positive, which makes the factors deterministic.
    """
    F = as_complex_matrix(F, name="factorized matrix")

    if F.size == 0 or not numpy.any(F):
        raise ValueError("factorized matrix must be nonzero")

    U, sigma, Vh = scipy.linalg.svd(F)

    if sigma[0] == 0:
        raise ValueError("factorized matrix must be nonzero")

    scale = numpy.sqrt(sigma[0])
    left = scale * U[:, 0]
    right = scale * Vh[0, :].conj()

    # First index of maximum magnitude, so ties resolve deterministically.
    pivot = left[int(numpy.argmax(numpy.abs(left)))]
    phase = pivot / abs(pivot)
    left = left / phase
    right = right / phase

    sigma_ratio = 0.0

    if sigma.size > 1:
        if sigma[1] > sigma[0] * max(F.shape) * numpy.finfo(float).eps:
            sigma_ratio = float(sigma[1] / sigma[0])

    return sigma_ratio, left, right
