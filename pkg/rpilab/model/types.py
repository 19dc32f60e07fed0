"""
RPIlab: Types for compound system+environment models.

Copyright 2024 RPIlab Developers
"""

from enum import Enum
from typing import Dict, Optional, Tuple

import numpy

from rpilab.common import MAX_COMPOUND_DIM, TOL_OPERATOR, GuardExceededError
from rpilab.hilbert.computation import eigenbasis, kron, purification_columns
from rpilab.hilbert.types import (
    DensityOp,
    as_square_matrix,
    is_hermitian,
    operator_norm,
)
from rpilab.types import ComplexMatrix, FloatVector, MatrixLike


class CouplingForm(Enum):
    """Structure of the interaction Hamiltonian."""

    PRODUCT = "product-coupling"  # H_I = A⊗B.
    GENERAL = "general"


def _hermitian(M: MatrixLike, *, name: str, dim: int) -> ComplexMatrix:
    M = as_square_matrix(M, name=name)

    if M.shape[0] != dim:
        raise ValueError(f"{name} must have dimension {dim}, got {M.shape[0]}")

    if not is_hermitian(M):
        raise ValueError(f"{name} must be Hermitian")

    M.setflags(write=False)

    return M


class CompoundModel:
    """
    System+environment model H = H_S⊗I + I⊗H_E + H_I with a factorized initial
    state and a pointer observable on the environment.

    Instances are immutable after construction.
    """

    def __init__(
        self,
        *,
        H_S: MatrixLike,
        H_E: MatrixLike,
        H_I: MatrixLike,
        pointer_obs: MatrixLike,
        sys_obs: MatrixLike,
        rho_in_S: DensityOp,
        rho_in_E: DensityOp,
        coupling_form: CouplingForm = CouplingForm.PRODUCT,
        env_obs: Optional[MatrixLike] = None,
        name: str = "custom",
        parameters: Optional[Dict[str, float]] = None,
    ) -> None:
        """
        Parameters
        ----------
        H_S
            System Hamiltonian
        H_E
            Environment Hamiltonian
        H_I
            Interaction Hamiltonian on the compound space
        pointer_obs
            Environment observable whose eigenbasis defines corridors
        sys_obs
            System observable A, entering H_I = A⊗B for product coupling
        rho_in_S
            Normalized initial system state
        rho_in_E
            Normalized initial environment state
        coupling_form
            Whether H_I has product form
        env_obs
            Environment observable B, required for product coupling
        name
            Label used in reports
        parameters
            Construction parameters echoed in reports
        """
        H_S = as_square_matrix(H_S, name="system Hamiltonian")
        H_E = as_square_matrix(H_E, name="environment Hamiltonian")
        dim_S = H_S.shape[0]
        dim_E = H_E.shape[0]

        if dim_S * dim_E > MAX_COMPOUND_DIM:
            raise GuardExceededError(
                f"compound dimension {dim_S * dim_E} exceeds {MAX_COMPOUND_DIM}"
            )

        self._H_S = _hermitian(H_S, name="system Hamiltonian", dim=dim_S)
        self._H_E = _hermitian(H_E, name="environment Hamiltonian", dim=dim_E)
        self._H_I = _hermitian(
            H_I, name="interaction Hamiltonian", dim=dim_S * dim_E
        )
        self._pointer_obs = _hermitian(
            pointer_obs, name="pointer observable", dim=dim_E
        )
        self._sys_obs = _hermitian(sys_obs, name="system observable", dim=dim_S)

        if not (rho_in_S.normalized and rho_in_E.normalized):
            raise ValueError("initial states must be normalized")

        if rho_in_S.dim != dim_S:
            raise ValueError(
                f"initial system state has dimension {rho_in_S.dim}, expected {dim_S}"
            )

        if rho_in_E.dim != dim_E:
            raise ValueError(
                f"initial environment state has dimension {rho_in_E.dim}, expected "
                f"{dim_E}"
            )

        if not isinstance(coupling_form, CouplingForm):
            raise ValueError(f"unrecognized coupling form '{coupling_form}'")

        if coupling_form is CouplingForm.PRODUCT:
            if env_obs is None:
                raise ValueError(
                    "product coupling requires the environment observable"
                )

            env_obs = _hermitian(env_obs, name="environment observable", dim=dim_E)
            residual = operator_norm(kron(self._sys_obs, env_obs) - self._H_I)

            if residual > TOL_OPERATOR:
                raise ValueError(
                    "interaction Hamiltonian does not equal system observable ⊗ "
                    f"environment observable, residual {residual}"
                )
        elif env_obs is not None:
            env_obs = _hermitian(env_obs, name="environment observable", dim=dim_E)

        self._env_obs = env_obs
        self._dim_S = dim_S
        self._dim_E = dim_E
        self._rho_in_S = rho_in_S
        self._rho_in_E = rho_in_E
        self._coupling_form = coupling_form
        self._name = name
        self._parameters = dict(parameters or {})

        self._pointer_eigenvalues, self._pointer_eigenvectors = eigenbasis(
            self._pointer_obs
        )
        self._sys_eigenvalues, self._sys_eigenvectors = eigenbasis(self._sys_obs)

        for array in (
            self._pointer_eigenvalues,
            self._pointer_eigenvectors,
            self._sys_eigenvalues,
            self._sys_eigenvectors,
        ):
            array.setflags(write=False)

    @property
    def dim_S(self) -> int:
        """Return system dimension."""
        return self._dim_S

    @property
    def dim_E(self) -> int:
        """Return environment dimension."""
        return self._dim_E

    @property
    def dim(self) -> int:
        """Return compound dimension."""
        return self._dim_S * self._dim_E

    @property
    def H_S(self) -> ComplexMatrix:
        """Return system Hamiltonian."""
        return self._H_S

    @property
    def H_E(self) -> ComplexMatrix:
        """Return environment Hamiltonian."""
        return self._H_E

    @property
    def H_I(self) -> ComplexMatrix:
        """Return interaction Hamiltonian."""
        return self._H_I

    @property
    def pointer_obs(self) -> ComplexMatrix:
        """Return pointer observable."""
        return self._pointer_obs

    @property
    def sys_obs(self) -> ComplexMatrix:
        """Return system observable."""
        return self._sys_obs

    @property
    def env_obs(self) -> Optional[ComplexMatrix]:
        """Return environment observable, if any."""
        return self._env_obs

    @property
    def coupling_form(self) -> CouplingForm:
        """Return coupling form."""
        return self._coupling_form

    @property
    def rho_in_S(self) -> DensityOp:
        """Return initial system state."""
        return self._rho_in_S

    @property
    def rho_in_E(self) -> DensityOp:
        """Return initial environment state."""
        return self._rho_in_E

    @property
    def R_in(self) -> ComplexMatrix:
        """Return factorized initial compound state."""
        return kron(self._rho_in_S.matrix, self._rho_in_E.matrix)

    @property
    def name(self) -> str:
        """Return model label."""
        return self._name

    @property
    def parameters(self) -> Dict[str, float]:
        """Return copy of construction parameters."""
        return dict(self._parameters)

    @property
    def pointer_eigenvalues(self) -> FloatVector:
        """Return pointer eigenvalues."""
        return self._pointer_eigenvalues

    @property
    def pointer_eigenvectors(self) -> ComplexMatrix:
        """Return pointer eigenvectors as columns."""
        return self._pointer_eigenvectors

    @property
    def sys_eigenvalues(self) -> FloatVector:
        """Return system-observable eigenvalues."""
        return self._sys_eigenvalues

    @property
    def sys_eigenvectors(self) -> ComplexMatrix:
        """Return system-observable eigenvectors as columns."""
        return self._sys_eigenvectors

    @property
    def pointer_range(self) -> Tuple[float, float]:
        """Return (min, max) of the pointer spectrum."""
        return (
            float(self._pointer_eigenvalues.min()),
            float(self._pointer_eigenvalues.max()),
        )

    def initial_purification(self) -> ComplexMatrix:
        """
        Columns C of shape (dim, r) with C·C† = R_in, built as √(p·q)|a⟩⊗|b⟩ from
        the eigendecompositions of the two factors.
        """
        return numpy.kron(
            purification_columns(self._rho_in_S.matrix),
            purification_columns(self._rho_in_E.matrix),
        )
