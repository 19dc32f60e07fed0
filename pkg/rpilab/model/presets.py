"""
RPIlab: Model builders and named presets.

Copyright 2024 RPIlab Developers
"""

from typing import Callable, Dict, Optional, TypedDict

import numpy

from rpilab.hilbert.computation import kron
from rpilab.hilbert.types import DensityOp, QState
from rpilab.model.types import CompoundModel, CouplingForm
from rpilab.types import ComplexMatrix, FloatVector, MatrixLike

SIGMA_X = numpy.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = numpy.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
# |0⟩ has σ_z = +1.
SIGMA_Z = numpy.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

for _pauli in (SIGMA_X, SIGMA_Y, SIGMA_Z):
    _pauli.setflags(write=False)

# Minimum number of grid cells spanned by the pointer wavepacket width.
MIN_CELLS_PER_SIGMA = 3

MAX_BATH_SPINS = 6


def plus_state() -> DensityOp:
    """Return |+⟩⟨+| on a qubit."""
    return DensityOp.from_state(
        QState(amplitudes=numpy.array([1.0, 1.0]) / numpy.sqrt(2))
    )


def zero_state() -> DensityOp:
    """Return |0⟩⟨0| on a qubit, the σz = +1 eigenstate."""
    return DensityOp.from_state(QState(amplitudes=numpy.array([1.0, 0.0])))


def grid_positions(*, n_grid: int, x_max: float) -> FloatVector:
    """Uniform periodic grid x_j = -x_max + j·dx with dx = 2·x_max/n_grid."""
    return -x_max + numpy.arange(n_grid) * (2 * x_max / n_grid)


def grid_momentum(*, n_grid: int, dx: float) -> ComplexMatrix:
    """
    Momentum operator on a periodic grid, the spectral generator of cyclic shifts.

    exp(-i·a·P) translates by +a. For a an even multiple of dx the translation is
    an exact cyclic permutation. The unpaired Nyquist mode of an even grid is
    assigned zero momentum so that P is Hermitian.
    """
    k = 2 * numpy.pi * numpy.fft.fftfreq(n_grid, d=dx)

    if n_grid % 2 == 0:
        k[n_grid // 2] = 0.0

    dft = numpy.fft.fft(numpy.eye(n_grid), axis=0)
    P = numpy.fft.ifft(k[:, numpy.newaxis] * dft, axis=0)

    return (P + P.conj().T) / 2


def gaussian_packet(*, x: FloatVector, sigma0: float) -> QState:
    """Normalized wavepacket ∝ exp(-x²/(4·sigma0²)), position spread sigma0."""
    amplitudes = numpy.exp(-(x**2) / (4 * sigma0**2))

    return QState(amplitudes=amplitudes / numpy.linalg.norm(amplitudes))


def build_von_neumann(
    *,
    g: float,
    n_grid: int,
    x_max: float,
    sigma0: float,
    omega_S: float = 0.0,
    rho_in_S: Optional[DensityOp] = None,
    name: str = "von_neumann",
) -> CompoundModel:
    """
    Qubit measured by a pointer particle on a periodic position grid.

    Parameters
    ----------
    g
        Coupling strength, H_I = g·σ_z⊗P
    n_grid
        Number of grid points, at least 8
    x_max
        Grid half-width, must exceed 3·sigma0
    sigma0
        Position spread of the initial pointer wavepacket centered at zero
    omega_S
        System splitting, H_S = (omega_S/2)·σ_z
    rho_in_S
        Initial system state, defaults to |+⟩⟨+|

    Returns
    -------
    model
        Product-coupling model with pointer observable X, whose σ_z = ±1 branches
        translate the pointer by ±g·t

    Notes
    -----
    H_E = 0, so the pointer only moves by the conditional translations.
    """
    if n_grid < 8:
        raise ValueError(f"n_grid must be at least 8, got {n_grid}")

    if sigma0 <= 0:
        raise ValueError(f"sigma0 must be positive, got {sigma0}")

    if x_max <= 3 * sigma0:
        raise ValueError(f"x_max = {x_max} must exceed 3·sigma0 = {3 * sigma0}")

    dx = 2 * x_max / n_grid

    if sigma0 / dx < MIN_CELLS_PER_SIGMA:
        raise ValueError(
            f"grid too coarse, sigma0 = {sigma0} spans {sigma0 / dx} grid cells, "
            f"fewer than {MIN_CELLS_PER_SIGMA}"
        )

    x = grid_positions(n_grid=n_grid, x_max=x_max)
    X = numpy.diag(x).astype(complex)
    P = grid_momentum(n_grid=n_grid, dx=dx)

    return CompoundModel(
        H_S=omega_S / 2 * SIGMA_Z,
        H_E=numpy.zeros((n_grid, n_grid)),
        H_I=g * kron(SIGMA_Z, P),
        pointer_obs=X,
        sys_obs=SIGMA_Z,
        env_obs=g * P,
        rho_in_S=plus_state() if rho_in_S is None else rho_in_S,
        rho_in_E=DensityOp.from_state(gaussian_packet(x=x, sigma0=sigma0)),
        coupling_form=CouplingForm.PRODUCT,
        name=name,
        parameters={
            "g": g,
            "n_grid": n_grid,
            "x_max": x_max,
            "sigma0": sigma0,
            "omega_S": omega_S,
        },
    )


def spin_operator(single: MatrixLike, *, site: int, n_spins: int) -> ComplexMatrix:
    """Embed a single-spin operator at a site, site 0 most significant."""
    operator = numpy.ones((1, 1), dtype=complex)

    for k in range(n_spins):
        operator = numpy.kron(operator, single if k == site else numpy.eye(2))

    return operator


def build_spin_bath(
    *,
    n_spins: int,
    g: float,
    epsilon: float,
    omega_S: float = 0.0,
    rho_in_S: Optional[DensityOp] = None,
    name: str = "spin_bath",
) -> CompoundModel:
    """
    Qubit coupled to a bath of spins through their collective transverse field.

    Parameters
    ----------
    n_spins
        Number of bath spins, 1 to 6
    g
        Coupling strength, H_I = g·σ_z⊗Σ_k σ_x^(k)
    epsilon
        Bath splitting, H_E = (epsilon/2)·Σ_k σ_z^(k), positive so that the bath
        ground state (all spins down) is unique
    omega_S
        System splitting, H_S = (omega_S/2)·σ_z
    rho_in_S
        Initial system state, defaults to |+⟩⟨+|

    Returns
    -------
    model
        Product-coupling model with the collective magnetization Σ_k σ_z^(k) as
        pointer observable, starting from the bath ground state
    """
    if not 1 <= n_spins <= MAX_BATH_SPINS:
        raise ValueError(
            f"n_spins must be between 1 and {MAX_BATH_SPINS}, got {n_spins}"
        )

    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")

    dim_E = 2**n_spins
    sum_x = sum(spin_operator(SIGMA_X, site=k, n_spins=n_spins) for k in range(n_spins))
    sum_z = sum(spin_operator(SIGMA_Z, site=k, n_spins=n_spins) for k in range(n_spins))
    # All spins down is the last basis state.
    ground = QState.basis(dim=dim_E, index=dim_E - 1)

    return CompoundModel(
        H_S=omega_S / 2 * SIGMA_Z,
        H_E=epsilon / 2 * sum_z,
        H_I=g * kron(SIGMA_Z, sum_x),
        pointer_obs=sum_z,
        sys_obs=SIGMA_Z,
        env_obs=g * sum_x,
        rho_in_S=plus_state() if rho_in_S is None else rho_in_S,
        rho_in_E=DensityOp.from_state(ground),
        coupling_form=CouplingForm.PRODUCT,
        name=name,
        parameters={
            "n_spins": n_spins,
            "g": g,
            "epsilon": epsilon,
            "omega_S": omega_S,
        },
    )


def build_product_model(
    *,
    H_S: MatrixLike,
    H_E: MatrixLike,
    A: MatrixLike,
    B: MatrixLike,
    pointer_obs: MatrixLike,
    rho_in_S: DensityOp,
    rho_in_E: DensityOp,
    name: str = "product",
) -> CompoundModel:
    """Generic product-coupling model with H_I = A⊗B."""
    return CompoundModel(
        H_S=H_S,
        H_E=H_E,
        H_I=kron(A, B),
        pointer_obs=pointer_obs,
        sys_obs=A,
        env_obs=B,
        rho_in_S=rho_in_S,
        rho_in_E=rho_in_E,
        coupling_form=CouplingForm.PRODUCT,
        name=name,
    )


class PresetInfo(TypedDict):
    """Named preset: builder and its default parameters."""

    builder: Callable[..., CompoundModel]
    parameters: Dict[str, float]
    description: str


# Named presets addressable from experiment configurations.
PRESETS = {
    "von_neumann_check": PresetInfo(
        builder=build_von_neumann,
        parameters={
            "g": 0.5,
            "n_grid": 32,
            "x_max": 4.0,
            "sigma0": 0.8,
            "omega_S": 0.0,
        },
        description="small pointer grid for identity checks",
    ),
    "von_neumann_strong": PresetInfo(
        builder=build_von_neumann,
        parameters={
            "g": 2.0,
            "n_grid": 128,
            "x_max": 4.0,
            "sigma0": 0.25,
            "omega_S": 0.0,
        },
        description="branch separation well beyond the pointer spread",
    ),
    "von_neumann_weak": PresetInfo(
        builder=build_von_neumann,
        parameters={
            "g": 0.125,
            "n_grid": 128,
            "x_max": 4.0,
            "sigma0": 0.25,
            "omega_S": 0.0,
        },
        description="branch separation comparable to the pointer spread",
    ),
    "von_neumann_decoupled": PresetInfo(
        builder=build_von_neumann,
        parameters={
            "g": 0.0,
            "n_grid": 128,
            "x_max": 4.0,
            "sigma0": 0.25,
            "omega_S": 0.0,
        },
        description="no interaction",
    ),
    "spin_bath": PresetInfo(
        builder=build_spin_bath,
        parameters={"n_spins": 4, "g": 0.5, "epsilon": 1.0, "omega_S": 0.0},
        description="qubit coupled to four bath spins",
    ),
}


def build_preset(name: str, **overrides: float) -> CompoundModel:
    """
    Build a named preset, optionally overriding its parameters.

    Integer-valued parameters (grid and spin counts) are converted with int().
    """
    if name not in PRESETS:
        raise ValueError(
            f"unrecognized preset '{name}', expected one of {sorted(PRESETS)}"
        )

    info = PRESETS[name]
    parameters = dict(info["parameters"])
    unknown = sorted(set(overrides) - set(parameters))

    if unknown:
        raise ValueError(f"unrecognized parameters {unknown} for preset '{name}'")

    parameters.update(overrides)

    for key in ("n_grid", "n_spins"):
        if key in parameters:
            if parameters[key] != int(parameters[key]):
                raise ValueError(f"{key} must be an integer, got {parameters[key]}")
            parameters[key] = int(parameters[key])

    return info["builder"](name=name, **parameters)
