"""
RPIlab: Types for compound propagation and partial evolution operators.

Copyright 2024 RPIlab Developers
"""

from enum import Enum
from typing import List, Optional, TypedDict

import numpy

from rpilab.corridors.types import CorridorSpec
from rpilab.hilbert.computation import partial_trace_env
from rpilab.hilbert.types import as_square_matrix, operator_norm
from rpilab.types import ComplexArray, ComplexMatrix, FloatVector


class Splitting(Enum):
    """How one slice propagator is formed from the compound Hamiltonian."""

    EXACT_SLICE = "exact-slice"  # exp(-iH dt).
    STRANG = "strang"  # Free half steps around the interaction step.


class Placement(Enum):
    """Where a slice weight sits relative to the slice evolution."""

    EVOLVE_THEN_WEIGHT = "evolve-then-weight"
    WEIGHT_THEN_EVOLVE = "weight-then-evolve"


class SliceScheme:
    """Time discretization t = K·dt into slices that each carry one window."""

    def __init__(
        self,
        *,
        K: int,
        dt: float,
        splitting: Splitting = Splitting.EXACT_SLICE,
        placement: Placement = Placement.EVOLVE_THEN_WEIGHT,
    ) -> None:
        """
        Parameters
        ----------
        K
            Number of slices
        dt
            Slice duration
        splitting
            Slice propagator construction
        placement
            Order of weight and evolution within a slice
        """
        if int(K) != K or K < 1:
            raise ValueError(f"slice count K must be an integer of at least 1, got {K}")

        if not (numpy.isfinite(dt) and dt > 0):
            raise ValueError(f"slice duration dt must be positive and finite, got {dt}")

        if not isinstance(splitting, Splitting):
            raise ValueError(f"unrecognized splitting '{splitting}'")

        if not isinstance(placement, Placement):
            raise ValueError(f"unrecognized weight placement '{placement}'")

        self._K = int(K)
        self._dt = float(dt)
        self._splitting = splitting
        self._placement = placement

    def __repr__(self) -> str:
        return (
            f"SliceScheme(K={self._K}, dt={self._dt}, "
            f"splitting={self._splitting.value}, placement={self._placement.value})"
        )

    @property
    def K(self) -> int:
        """Return slice count."""
        return self._K

    @property
    def dt(self) -> float:
        """Return slice duration."""
        return self._dt

    @property
    def splitting(self) -> Splitting:
        """Return splitting."""
        return self._splitting

    @property
    def placement(self) -> Placement:
        """Return weight placement."""
        return self._placement

    @property
    def t(self) -> float:
        """Return total time K·dt."""
        return self._K * self._dt

    @property
    def times(self) -> FloatVector:
        """Return slice end times dt, 2·dt, ..., K·dt."""
        return self._dt * numpy.arange(1, self._K + 1)

    @property
    def weight_times(self) -> FloatVector:
        """Return times at which slice weights act, per the weight placement."""
        if self._placement is Placement.WEIGHT_THEN_EVOLVE:
            return self._dt * numpy.arange(self._K)

        return self.times


class PartialPropagator:
    """Compound partial evolution operator U_α of one corridor."""

    def __init__(self, *, corridor: CorridorSpec, matrix: ComplexMatrix) -> None:
        matrix = as_square_matrix(matrix, name="partial propagator").copy()
        matrix.setflags(write=False)
        self._corridor = corridor
        self._matrix = matrix

    @property
    def corridor(self) -> CorridorSpec:
        """Return corridor."""
        return self._corridor

    @property
    def matrix(self) -> ComplexMatrix:
        """Return compound matrix."""
        return self._matrix

    @property
    def norm(self) -> float:
        """Return operator norm."""
        return operator_norm(self._matrix)


class PartialDensity:
    """
    Compound partial density R_αβ = U_α·R_in·U_β† and its reduction ρ_αβ = Tr_E R_αβ.
    """

    def __init__(
        self,
        *,
        alpha: Optional[int],
        beta: Optional[int],
        R: ComplexMatrix,
        dim_S: int,
    ) -> None:
        """
        Parameters
        ----------
        alpha, beta
            Corridor indices, None for corridors outside an enumeration
        R
            Compound partial density
        dim_S
            System dimension used for the partial trace
        """
        R = as_square_matrix(R, name="partial density").copy()

        if dim_S < 1 or R.shape[0] % dim_S:
            raise ValueError(
                f"system dimension {dim_S} does not divide compound dimension "
                f"{R.shape[0]}"
            )

        rho = partial_trace_env(R, dS=dim_S, dE=R.shape[0] // dim_S)
        R.setflags(write=False)
        rho.setflags(write=False)
        self._alpha = alpha
        self._beta = beta
        self._R = R
        self._rho = rho

    @property
    def alpha(self) -> Optional[int]:
        """Return left corridor index."""
        return self._alpha

    @property
    def beta(self) -> Optional[int]:
        """Return right corridor index."""
        return self._beta

    @property
    def R(self) -> ComplexMatrix:
        """Return compound partial density."""
        return self._R

    @property
    def rho(self) -> ComplexMatrix:
        """Return reduced partial density."""
        return self._rho


class PartialAmplitudes(TypedDict):
    """Corridor-resolved purification columns X_α = U_α·C with C·C† = R_in."""

    corridors: List[CorridorSpec]
    measure_weights: FloatVector
    X: ComplexArray  # Shape (corridors, dim, purification rank).
    pruned_probability: float
