"""
RPIlab: Types for decoherence functionals and partial influence functionals.

Copyright 2024 RPIlab Developers
"""

from typing import List, Optional, TypedDict

import numpy

from rpilab.corridors.types import CorridorSpec
from rpilab.hilbert.types import as_complex_matrix, as_square_matrix
from rpilab.types import (
    ComplexMatrix,
    ComplexVector,
    FloatArray,
    FloatVector,
    IntVector,
)


def _frozen_paths(paths: numpy.ndarray) -> numpy.ndarray:
    paths = numpy.array(paths, dtype=int)

    if paths.ndim != 2:
        raise ValueError(f"paths must be a 2D array, got shape {paths.shape}")

    paths.setflags(write=False)

    return paths


class PifTable:
    """
    Time-sliced partial influence functional F_αβ[s|s̄] of a corridor pair.

    Rows and columns are indexed by system paths, each path a sequence of K
    eigenbasis labels of the system observable, one per slice.
    """

    def __init__(
        self,
        *,
        alpha: Optional[int],
        beta: Optional[int],
        F: ComplexMatrix,
        paths: numpy.ndarray,
        basis: ComplexMatrix,
    ) -> None:
        """
        Parameters
        ----------
        alpha, beta
            Corridor indices, both None for the unrestricted influence functional
        F
            Table over path pairs (s, s̄)
        paths
            Path labels of shape (n_paths, K)
        basis
            Eigenvectors (as columns) of the system observable labeling the paths
        """
        F = as_square_matrix(F, name="influence table")
        paths = _frozen_paths(paths)

        if F.shape[0] != paths.shape[0]:
            raise ValueError(
                f"influence table has {F.shape[0]} rows, got {paths.shape[0]} paths"
            )

        basis = as_square_matrix(basis, name="system basis")
        F.setflags(write=False)
        basis.setflags(write=False)
        self._alpha = alpha
        self._beta = beta
        self._F = F
        self._paths = paths
        self._basis = basis

    @property
    def alpha(self) -> Optional[int]:
        """Return left corridor index."""
        return self._alpha

    @property
    def beta(self) -> Optional[int]:
        """Return right corridor index."""
        return self._beta

    @property
    def F(self) -> ComplexMatrix:
        """Return table over path pairs."""
        return self._F

    @property
    def paths(self) -> numpy.ndarray:
        """Return path labels, shape (n_paths, K)."""
        return self._paths

    @property
    def basis(self) -> ComplexMatrix:
        """Return system eigenbasis."""
        return self._basis

    @property
    def K(self) -> int:
        """Return slice count."""
        return int(self._paths.shape[1])


class SystemWeight:
    """
    System weight functional w_α[s] extracted from a rank-one factorization of a
    partial influence functional.
    """

    def __init__(
        self,
        *,
        alpha: Optional[int],
        w: ComplexVector,
        residual: float,
        paths: numpy.ndarray,
        basis: ComplexMatrix,
    ) -> None:
        w = numpy.array(w, dtype=complex)
        paths = _frozen_paths(paths)

        if w.shape != (paths.shape[0],):
            raise ValueError(
                f"weight has shape {w.shape}, expected ({paths.shape[0]},)"
            )

        if not 0 <= residual <= 1:
            raise ValueError(
                f"factorization residual must be in [0, 1], got {residual}"
            )

        basis = as_complex_matrix(basis, name="system basis")
        w.setflags(write=False)
        basis.setflags(write=False)
        self._alpha = alpha
        self._w = w
        self._residual = float(residual)
        self._paths = paths
        self._basis = basis

    @property
    def alpha(self) -> Optional[int]:
        """Return corridor index."""
        return self._alpha

    @property
    def w(self) -> ComplexVector:
        """Return weight over system paths."""
        return self._w

    @property
    def residual(self) -> float:
        """Return σ₂/σ₁ of the factorized table."""
        return self._residual

    @property
    def paths(self) -> numpy.ndarray:
        """Return path labels, shape (n_paths, K)."""
        return self._paths

    @property
    def basis(self) -> ComplexMatrix:
        """Return system eigenbasis."""
        return self._basis


class DecoherenceReport(TypedDict):
    """
    Decoherence functionals of a corridor family with their suppression ratios.

    Ratio matrices hold 1 on the diagonal and NaN for pairs involving a corridor
    below the probability floor.
    """

    corridors: List[CorridorSpec]
    measure_weights: FloatVector
    P: ComplexMatrix
    probs: FloatVector
    coherence_ratios: FloatArray
    env_ratios: FloatArray
    consistency_ratio: float
    env_ratio: float
    completeness_residual: float
    pruned_probability: float


class CorridorScan(TypedDict):
    """Branch-tracking corridors at constant offsets with their weights."""

    branch: IntVector
    offset: FloatVector
    distance: FloatVector
    prob: FloatVector
    pif_norm: FloatVector
