"""
RPIlab: Types for restricted-path-integral evolution of the system alone.

Copyright 2024 RPIlab Developers
"""

from enum import Enum
from typing import Optional, TypedDict

import numpy

from rpilab.hilbert.types import as_square_matrix, is_hermitian, operator_norm
from rpilab.types import ComplexMatrix, FloatVector, MatrixLike


class RpiSource(Enum):
    """Where the weights of a restricted-path-integral propagator come from."""

    EXTRACTED = "extracted"  # Rank-one factor of a partial influence functional.
    GAUSSIAN_ANALYTIC = "gaussian-analytic"  # exp(-κ(A - a)²dt) per step.
    WINDOWED = "windowed"  # System windows W(A - a) per slice.


class RpiPropagator:
    """System-only partial evolution operator U_α of one readout."""

    def __init__(
        self, *, alpha: Optional[int], U: MatrixLike, source: RpiSource
    ) -> None:
        """
        Parameters
        ----------
        alpha
            Corridor index, None for readouts outside an enumeration
        U
            Operator on the system space
        source
            Origin of the path weights

        Raises
        ------
        ValueError
            If a Gaussian-analytic operator is not a contraction
        """
        U = as_square_matrix(U, name="restricted propagator")

        if not isinstance(source, RpiSource):
            raise ValueError(f"unrecognized propagator source '{source}'")

        norm = operator_norm(U)

        if source is RpiSource.GAUSSIAN_ANALYTIC and norm > 1 + 1e-9:
            raise ValueError(f"gaussian-analytic propagator norm {norm} exceeds one")

        U.setflags(write=False)
        self._alpha = alpha
        self._U = U
        self._source = source
        self._norm = norm

    def __repr__(self) -> str:
        return (
            f"RpiPropagator(alpha={self._alpha}, source={self._source.value}, "
            f"norm={self._norm})"
        )

    @property
    def alpha(self) -> Optional[int]:
        """Return corridor index."""
        return self._alpha

    @property
    def U(self) -> ComplexMatrix:
        """Return system operator."""
        return self._U

    @property
    def source(self) -> RpiSource:
        """Return weight source."""
        return self._source

    @property
    def norm(self) -> float:
        """Return operator norm."""
        return self._norm

    @property
    def dim(self) -> int:
        """Return system dimension."""
        return self._U.shape[0]


class MeasurementRecord:
    """Readout path a(t_k) of a continuous measurement of strength κ."""

    def __init__(
        self, *, readout: FloatVector, kappa: float, observable: MatrixLike
    ) -> None:
        """
        Parameters
        ----------
        readout
            Readout value for each step k = 1..K
        kappa
            Measurement strength, per unit time and squared observable unit
        observable
            Measured Hermitian system observable A
        """
        readout = numpy.array(readout, dtype=float)

        if readout.ndim != 1 or readout.size == 0:
            raise ValueError("readout must be a non-empty one-dimensional sequence")

        if not numpy.all(numpy.isfinite(readout)):
            raise ValueError("readout must not contain infs or NaNs")

        if not (numpy.isfinite(kappa) and kappa >= 0):
            raise ValueError(f"kappa must be non-negative and finite, got {kappa}")

        observable = as_square_matrix(observable, name="observable")

        if not is_hermitian(observable):
            raise ValueError("observable must be Hermitian")

        readout.setflags(write=False)
        observable.setflags(write=False)
        self._readout = readout
        self._kappa = float(kappa)
        self._observable = observable

    @property
    def readout(self) -> FloatVector:
        """Return readout path."""
        return self._readout

    @property
    def kappa(self) -> float:
        """Return measurement strength."""
        return self._kappa

    @property
    def observable(self) -> ComplexMatrix:
        """Return measured observable."""
        return self._observable

    @property
    def K(self) -> int:
        """Return number of readout steps."""
        return self._readout.size


class LindbladGenerator:
    """Generator dρ/dt = -i[H, ρ] + LρL† - {L†L, ρ}/2 with a single jump operator."""

    def __init__(
        self, *, H: MatrixLike, jump: MatrixLike, dt_max: float = 1.0e-2
    ) -> None:
        """
        Parameters
        ----------
        H
            Hermitian Hamiltonian
        jump
            Jump operator L
        dt_max
            Largest integrator step
        """
        H = as_square_matrix(H, name="Hamiltonian")
        jump = as_square_matrix(jump, name="jump operator")

        if not is_hermitian(H):
            raise ValueError("Hamiltonian must be Hermitian")

        if jump.shape != H.shape:
            raise ValueError(
                f"jump operator has shape {jump.shape}, expected {H.shape}"
            )

        if not (numpy.isfinite(dt_max) and dt_max > 0):
            raise ValueError(f"dt_max must be positive and finite, got {dt_max}")

        H.setflags(write=False)
        jump.setflags(write=False)
        self._H = H
        self._jump = jump
        self._dt_max = float(dt_max)

    @classmethod
    def from_measurement(
        cls, *, H: MatrixLike, A: MatrixLike, kappa: float, dt_max: float = 1.0e-2
    ) -> "LindbladGenerator":
        """
        Generator of the non-selective continuous measurement of a Hermitian A,
        dρ/dt = -i[H, ρ] - (κ/2)[A, [A, ρ]], with jump operator √κ·A.
        """
        if not (numpy.isfinite(kappa) and kappa >= 0):
            raise ValueError(f"kappa must be non-negative and finite, got {kappa}")

        A = as_square_matrix(A, name="observable")

        if not is_hermitian(A):
            raise ValueError("observable must be Hermitian")

        return cls(H=H, jump=numpy.sqrt(kappa) * A, dt_max=dt_max)

    @property
    def H(self) -> ComplexMatrix:
        """Return Hamiltonian."""
        return self._H

    @property
    def jump(self) -> ComplexMatrix:
        """Return jump operator."""
        return self._jump

    @property
    def dt_max(self) -> float:
        """Return largest integrator step."""
        return self._dt_max

    @property
    def dim(self) -> int:
        """Return system dimension."""
        return self._H.shape[0]


class RpiComparison(TypedDict):
    """Restricted-path-integral state of one corridor against the compound one."""

    alpha: Optional[int]
    trace_dist: float
    prob_rel_err: float
    factorization_residual: float
    prob_exact: float
    prob_rpi: float


class MarkovLadder(TypedDict):
    """Per-slice Gaussian measurement channel against its Lindblad limit."""

    kappa: float
    dt: FloatVector
    sigma: FloatVector  # Window width at each rung, σ²·dt fixed.
    trace_dist: FloatVector
