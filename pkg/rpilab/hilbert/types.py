"""
RPIlab: Types for states and operators.

Copyright 2024 RPIlab Developers
"""

import numpy
import scipy.linalg

from rpilab.common import TOL_EIGENVALUE_FLOOR, TOL_OPERATOR, TOL_STATE_NORM
from rpilab.types import ComplexMatrix, ComplexVector, FloatVector, MatrixLike


def as_complex_matrix(M: MatrixLike, *, name: str = "matrix") -> ComplexMatrix:
    """Copy input into a finite, two-dimensional complex array."""
    M = numpy.array(M, dtype=complex)

    if M.ndim != 2:
        raise ValueError(f"{name} must be two dimensional, got ndim={M.ndim}")

    if not numpy.all(numpy.isfinite(M)):
        raise ValueError(f"{name} must not contain infs or NaNs")

    return M


def as_square_matrix(M: MatrixLike, *, name: str = "matrix") -> ComplexMatrix:
    """Copy input into a finite, square complex array."""
    M = as_complex_matrix(M, name=name)

    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")

    return M


def operator_norm(M: MatrixLike) -> float:
    """Largest singular value."""
    M = numpy.asarray(M)

    if M.size == 0:
        return 0.0

    return float(numpy.linalg.norm(M, 2))


def hermiticity_residual(M: MatrixLike) -> float:
    """Operator-norm distance between M and its adjoint."""
    M = numpy.asarray(M)

    return operator_norm(M - M.conj().T)


def is_hermitian(M: MatrixLike, *, tol: float = TOL_OPERATOR) -> bool:
    """Check Hermiticity within tolerance in operator norm."""
    M = numpy.asarray(M)

    return M.ndim == 2 and M.shape[0] == M.shape[1] and hermiticity_residual(M) <= tol


def is_unitary(M: MatrixLike, *, tol: float = TOL_OPERATOR) -> bool:
    """Check unitarity within tolerance in operator norm."""
    M = numpy.asarray(M)

    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False

    return operator_norm(M.conj().T @ M - numpy.eye(M.shape[0])) <= tol


def is_positive_semidefinite(M: MatrixLike, *, tol: float = TOL_OPERATOR) -> bool:
    """Check Hermiticity and non-negative spectrum within tolerance."""
    if not is_hermitian(M, tol=tol):
        return False

    M = numpy.asarray(M)

    return bool(scipy.linalg.eigvalsh((M + M.conj().T) / 2).min() >= -tol)


class QState:
    """State vector, either normalized or explicitly flagged as unnormalized."""

    def __init__(self, *, amplitudes: ComplexVector, normalized: bool = True) -> None:
        """
        Parameters
        ----------
        amplitudes
            Amplitudes in the computational basis
        normalized
            Whether the squared-magnitude sum must equal one
        """
        amplitudes = numpy.array(amplitudes, dtype=complex)

        if amplitudes.ndim != 1:
            raise ValueError("amplitudes must be one dimensional")

        if amplitudes.size == 0:
            raise ValueError("amplitudes must have at least one element")

        if not numpy.all(numpy.isfinite(amplitudes)):
            raise ValueError("amplitudes must not contain infs or NaNs")

        if normalized and abs(numpy.vdot(amplitudes, amplitudes).real - 1) > (
            TOL_STATE_NORM
        ):
            raise ValueError("amplitudes flagged normalized do not have unit norm")

        amplitudes.setflags(write=False)
        self._amplitudes = amplitudes
        self._normalized = normalized

    @property
    def amplitudes(self) -> ComplexVector:
        """Return amplitudes."""
        return self._amplitudes

    @property
    def normalized(self) -> bool:
        """Return normalization flag."""
        return self._normalized

    @property
    def dim(self) -> int:
        """Return Hilbert-space dimension."""
        return self._amplitudes.size

    @property
    def norm_squared(self) -> float:
        """Return squared norm."""
        return float(numpy.vdot(self._amplitudes, self._amplitudes).real)

    @property
    def projector(self) -> ComplexMatrix:
        """Return the (possibly unnormalized) projector |psi><psi|."""
        return numpy.outer(self._amplitudes, self._amplitudes.conj())

    def normalized_copy(self) -> "QState":
        """Return a normalized copy."""
        norm_squared = self.norm_squared

        if norm_squared == 0:
            raise ValueError("cannot normalize the zero vector")

        return QState(amplitudes=self._amplitudes / numpy.sqrt(norm_squared))

    @classmethod
    def basis(cls, *, dim: int, index: int) -> "QState":
        """Return computational basis state."""
        amplitudes = numpy.zeros(dim, dtype=complex)
        amplitudes[index] = 1.0

        return cls(amplitudes=amplitudes)


class DensityOp:
    """Density operator, either normalized or explicitly flagged as unnormalized."""

    def __init__(self, *, matrix: MatrixLike, normalized: bool = True) -> None:
        """
        Parameters
        ----------
        matrix
            Hermitian, positive-semidefinite matrix
        normalized
            Whether the trace must equal one
        """
        matrix = as_square_matrix(matrix, name="density matrix")

        if not is_hermitian(matrix):
            raise ValueError("density matrix is not Hermitian")

        # Hermitian part only, so that eigvalsh and friends see exact symmetry.
        matrix = (matrix + matrix.conj().T) / 2
        trace = float(numpy.trace(matrix).real)
        scale = max(1.0, abs(trace))

        if scipy.linalg.eigvalsh(matrix).min() < TOL_EIGENVALUE_FLOOR * scale:
            raise ValueError("density matrix has a negative eigenvalue")

        if normalized and abs(trace - 1) > TOL_OPERATOR:
            raise ValueError(f"density matrix flagged normalized has trace {trace}")

        matrix.setflags(write=False)
        self._matrix = matrix
        self._normalized = normalized

    @property
    def matrix(self) -> ComplexMatrix:
        """Return matrix."""
        return self._matrix

    @property
    def normalized(self) -> bool:
        """Return normalization flag."""
        return self._normalized

    @property
    def dim(self) -> int:
        """Return Hilbert-space dimension."""
        return self._matrix.shape[0]

    @property
    def trace(self) -> float:
        """Return trace."""
        return float(numpy.trace(self._matrix).real)

    @property
    def eigenvalues(self) -> FloatVector:
        """Return eigenvalues in ascending order."""
        return scipy.linalg.eigvalsh(self._matrix)

    def normalized_copy(self) -> "DensityOp":
        """Return copy scaled to unit trace."""
        trace = self.trace

        if trace <= 0:
            raise ValueError(f"cannot normalize density matrix with trace {trace}")

        return DensityOp(matrix=self._matrix / trace)

    @classmethod
    def from_state(cls, state: QState) -> "DensityOp":
        """Return the projector onto a state vector."""
        return cls(matrix=state.projector, normalized=state.normalized)

    @classmethod
    def maximally_mixed(cls, *, dim: int) -> "DensityOp":
        """Return the maximally mixed state."""
        return cls(matrix=numpy.eye(dim) / dim)
