"""
RPIlab: Time-sliced influence functionals and their corridor decomposition.

For product coupling H_I = A⊗B every slice propagator splits over the eigenbasis
{|l⟩} of A into Σ_l S_l⊗E(l), with a system factor S_l and an environment factor
E(l). A system path is a sequence of labels (l_1, ..., l_K), one per slice, and the
reduced partial density becomes

    ρ_αβ = Σ_{s,s̄} F_αβ[s|s̄]·S(s)·ρ_in·S(s̄)†,

where S(s) = S_{l_K}···S_{l_1} is the system amplitude chain and F_αβ is the
partial influence functional of the corridor pair.

Copyright 2024 RPIlab Developers
"""

import itertools
from typing import List, Optional, Sequence, Tuple

import numpy

from rpilab.common import (
    MAX_PAIR_CORRIDORS,
    MAX_SYSTEM_PATHS,
    TOL_NEGLIGIBLE_INFLUENCE,
    TOL_OPERATOR,
    TOL_SILENT_PATH,
    GuardExceededError,
    ordered_map,
)
from rpilab.corridors.computation import enumerate_corridors, weight_operator
from rpilab.corridors.types import CorridorMeasure, CorridorSpec
from rpilab.decoherence.types import PifTable, SystemWeight
from rpilab.evolution.types import Placement, SliceScheme, Splitting
from rpilab.hilbert.computation import (
    compensated_sum,
    purification_columns,
    rank1_residual,
    unitary_exp,
)
from rpilab.hilbert.types import as_square_matrix, operator_norm
from rpilab.model.computation import check_pointer_excursion
from rpilab.model.types import CompoundModel, CouplingForm
from rpilab.types import ComplexArray, ComplexMatrix, MatrixLike


class NegligibleInfluenceError(ValueError):
    """Raised when a partial influence functional vanishes within tolerance."""


def require_product_coupling(m: CompoundModel) -> None:
    """Raise unless the interaction has product form A⊗B."""
    if m.coupling_form is not CouplingForm.PRODUCT:
        raise ValueError("influence functionals require product coupling H_I = A⊗B")


def _check_path_count(dim_S: int, K: int) -> None:
    if dim_S**K > MAX_SYSTEM_PATHS:
        raise GuardExceededError(
            f"system path count {dim_S}**{K} exceeds guard {MAX_SYSTEM_PATHS}"
        )


def _check_exact_slice(H_S: ComplexMatrix, basis: ComplexMatrix) -> None:
    D = basis.conj().T @ H_S @ basis
    off_diagonal = operator_norm(D - numpy.diag(numpy.diag(D)))

    if off_diagonal > TOL_OPERATOR:
        raise ValueError(
            "exact-slice path chains require H_S diagonal in the system eigenbasis, "
            f"off-diagonal norm {off_diagonal}, use strang splitting"
        )


def path_labels(dim_S: int, K: int) -> numpy.ndarray:
    """All dim_S**K system paths in lexicographic order, shape (dim_S**K, K)."""
    _check_path_count(dim_S, K)

    return numpy.array(
        list(itertools.product(range(dim_S), repeat=K)), dtype=int
    ).reshape(-1, K)


def system_slice_factors(
    H_S: MatrixLike, basis: MatrixLike, s: SliceScheme
) -> ComplexArray:
    """
    System factor S_l of one slice for every basis label l, shape (d, d, d).

    Exact slices give P_l·exp(-iH_S·dt), which requires H_S diagonal in the basis.
    Strang slices give exp(-iH_S·dt/2)·P_l·exp(-iH_S·dt/2).
    """
    H_S = as_square_matrix(H_S, name="system Hamiltonian")
    basis = as_square_matrix(basis, name="system basis")

    if basis.shape != H_S.shape:
        raise ValueError(
            f"system basis has shape {basis.shape}, expected {H_S.shape}"
        )

    projectors = numpy.einsum("il,jl->lij", basis, basis.conj())

    if s.splitting is Splitting.EXACT_SLICE:
        _check_exact_slice(H_S, basis)

        return projectors @ unitary_exp(H_S, s.dt)

    half = unitary_exp(H_S, s.dt / 2)

    return half @ projectors @ half


def _chain(factors: ComplexArray, path: Sequence[int]) -> ComplexMatrix:
    chain = numpy.eye(factors.shape[1], dtype=complex)

    for label in path:
        chain = factors[label] @ chain

    return chain


def system_path_chain(
    H_S: MatrixLike, basis: MatrixLike, s: SliceScheme, path: Sequence[int]
) -> ComplexMatrix:
    """
    System amplitude chain S(s) = S_{l_K}···S_{l_1} of one path.

    Parameters
    ----------
    H_S
        System Hamiltonian
    basis
        Eigenvectors (as columns) of the system observable
    s
        Slice scheme
    path
        One basis label per slice

    Returns
    -------
    chain
        System operator carried by the path
    """
    factors = system_slice_factors(H_S, basis, s)
    path = [int(label) for label in path]

    if len(path) != s.K:
        raise ValueError(f"path has {len(path)} labels, scheme has {s.K} slices")

    for label in path:
        if not 0 <= label < factors.shape[0]:
            raise ValueError(
                f"path label {label} outside system basis of dimension "
                f"{factors.shape[0]}"
            )

    return _chain(factors, path)


def system_path_chains(
    H_S: MatrixLike, basis: MatrixLike, s: SliceScheme, paths: numpy.ndarray
) -> ComplexArray:
    """System amplitude chains of many paths, shape (paths, d, d)."""
    factors = system_slice_factors(H_S, basis, s)
    paths = numpy.asarray(paths, dtype=int)

    if paths.ndim != 2 or paths.shape[1] != s.K:
        raise ValueError(
            f"paths have shape {paths.shape}, expected (n, {s.K}) for the scheme"
        )

    if numpy.any((paths < 0) | (paths >= factors.shape[0])):
        raise ValueError(
            f"path labels outside system basis of dimension {factors.shape[0]}"
        )

    return numpy.array([_chain(factors, path) for path in paths]).reshape(
        -1, factors.shape[1], factors.shape[2]
    )


def _path_chains(
    slice_factors: Sequence[ComplexArray], start: ComplexMatrix
) -> ComplexArray:
    # Leaf p·L + l extends prefix p by label l, so the first label varies slowest.
    chains = start[numpy.newaxis]

    for factors in slice_factors:
        chains = numpy.einsum("lij,pjr->plir", factors, chains).reshape(
            -1, start.shape[0], start.shape[1]
        )

    return chains


def _audible_paths(
    m: CompoundModel, s: SliceScheme, drop_silent_paths: bool
) -> numpy.ndarray:
    _check_path_count(m.dim_S, s.K)
    factors = system_slice_factors(m.H_S, m.sys_eigenvectors, s)

    if not drop_silent_paths:
        return numpy.ones(m.dim_S**s.K, dtype=bool)

    chains = _path_chains([factors] * s.K, numpy.eye(m.dim_S, dtype=complex))

    return numpy.linalg.norm(chains, axis=(1, 2)) > TOL_SILENT_PATH


def _environment_slice_factors(m: CompoundModel, s: SliceScheme) -> ComplexArray:
    B = m.env_obs

    if s.splitting is Splitting.EXACT_SLICE:
        _check_exact_slice(m.H_S, m.sys_eigenvectors)

        return numpy.array(
            [unitary_exp(m.H_E + a * B, s.dt) for a in m.sys_eigenvalues]
        )

    half = unitary_exp(m.H_E, s.dt / 2)

    return numpy.array(
        [half @ unitary_exp(a * B, s.dt) @ half for a in m.sys_eigenvalues]
    )


def _environment_chains(
    m: CompoundModel,
    s: SliceScheme,
    bare: ComplexArray,
    corridor: Optional[CorridorSpec],
) -> ComplexArray:
    start = purification_columns(m.rho_in_E.matrix)

    if corridor is None:
        return _path_chains([bare] * s.K, start)

    if corridor.K != s.K:
        raise ValueError(f"corridor has {corridor.K} slices, scheme has {s.K}")

    slice_factors = []

    for center in corridor.centers:
        W = weight_operator(m, corridor.window, center)

        if s.placement is Placement.EVOLVE_THEN_WEIGHT:
            slice_factors.append(W @ bare)
        else:
            slice_factors.append(bare @ W)

    return _path_chains(slice_factors, start)


def _influence(left: ComplexArray, right: ComplexArray) -> ComplexMatrix:
    return numpy.einsum("pej,qej->pq", left, right.conj())


def _table(
    m: CompoundModel,
    s: SliceScheme,
    alpha: Optional[CorridorSpec],
    beta: Optional[CorridorSpec],
    drop_silent_paths: bool,
) -> PifTable:
    require_product_coupling(m)
    check_pointer_excursion(m, duration=s.t)
    keep = _audible_paths(m, s, drop_silent_paths)
    bare = _environment_slice_factors(m, s)
    left = _environment_chains(m, s, bare, alpha)[keep]

    if beta is alpha:
        right = left
    else:
        right = _environment_chains(m, s, bare, beta)[keep]

    return PifTable(
        alpha=None if alpha is None else alpha.index,
        beta=None if beta is None else beta.index,
        F=_influence(left, right),
        paths=path_labels(m.dim_S, s.K)[keep],
        basis=m.sys_eigenvectors,
    )


def pif_table(
    m: CompoundModel,
    s: SliceScheme,
    pair: Tuple[CorridorSpec, CorridorSpec],
    *,
    drop_silent_paths: bool = True,
) -> PifTable:
    """
    Partial influence functional of a corridor pair,
    F_αβ[s|s̄] = Tr_E[E_α(s)·ρ_in^E·E_β(s̄)†], with environment chains
    E_α(s) = E_K(l_K)···E_1(l_1) and E_k(l) = W(a_k)·E(l) (evolve-then-weight).

    Parameters
    ----------
    m
        Compound model with product coupling
    s
        Slice scheme
    pair
        Corridors (α, β)
    drop_silent_paths
        Omit paths whose system chain vanishes, such as the non-constant paths of
        an exact-slice scheme whose H_S commutes with A

    Returns
    -------
    table
        Influence table over the retained system paths

    Raises
    ------
    ValueError
        If the coupling is not of product form
    GuardExceededError
        If dim_S**K exceeds the system path guard
    """
    alpha, beta = pair

    return _table(m, s, alpha, beta, drop_silent_paths)


def influence_functional(
    m: CompoundModel, s: SliceScheme, *, drop_silent_paths: bool = True
) -> PifTable:
    """Unrestricted time-sliced influence functional F[s|s̄], without windows."""
    return _table(m, s, None, None, drop_silent_paths)


def pif_decomposition_residual(
    m: CompoundModel,
    s: SliceScheme,
    meas: CorridorMeasure,
    *,
    max_corridors: int = MAX_PAIR_CORRIDORS,
    max_workers: Optional[int] = None,
) -> float:
    """
    Residual ‖Σ_αβ μ_α μ_β F_αβ - F‖ of the decomposition of the influence
    functional into partial influence functionals, over all system paths.

    The double sum is bilinear in the environment chains, so it is evaluated as
    the influence of the compensated chain sum Σ_α μ_α E_α.
    """
    require_product_coupling(m)
    _check_path_count(m.dim_S, s.K)

    if meas.G**s.K > max_corridors:
        raise GuardExceededError(
            f"corridor count {meas.G}**{s.K} exceeds pair guard {max_corridors}"
        )

    bare = _environment_slice_factors(m, s)
    weighted: List[ComplexArray] = ordered_map(
        lambda c: c.measure_weight * _environment_chains(m, s, bare, c),
        enumerate_corridors(meas, s.K),
        max_workers=max_workers,
    )
    total = compensated_sum(weighted)
    full = _environment_chains(m, s, bare, None)

    return operator_norm(_influence(total, total) - _influence(full, full))


def reduced_from_pif(
    m: CompoundModel, s: SliceScheme, table: PifTable
) -> ComplexMatrix:
    """
    Reduced partial density Σ_{s,s̄} F[s|s̄]·S(s)·ρ_in·S(s̄)† reassembled from an
    influence table and the system amplitude chains.
    """
    if table.K != s.K:
        raise ValueError(f"influence table has {table.K} slices, scheme has {s.K}")

    chains = system_path_chains(m.H_S, table.basis, s, table.paths)

    return numpy.einsum(
        "pq,pab,bc,qdc->ad",
        table.F,
        chains,
        m.rho_in_S.matrix,
        chains.conj(),
        optimize=True,
    )


def factorize_pif(table: PifTable) -> Tuple[SystemWeight, SystemWeight]:
    """
    Rank-one factorization F_αβ[s|s̄] ≈ w_α[s]·w_β*[s̄].

    Parameters
    ----------
    table
        Partial influence functional

    Returns
    -------
    left, right
        System weights of α and β, both carrying σ₂/σ₁ as residual, with the
        largest-magnitude entry of the left weight real and positive

    Raises
    ------
    NegligibleInfluenceError
        If every table entry is negligible, so the corridor pair carries no weight
    """
    magnitude = float(numpy.abs(table.F).max()) if table.F.size else 0.0

    if magnitude <= TOL_NEGLIGIBLE_INFLUENCE:
        raise NegligibleInfluenceError(
            f"partial influence functional of corridors ({table.alpha}, "
            f"{table.beta}) is negligible, max |F| = {magnitude}"
        )

    residual, left, right = rank1_residual(table.F)

    return (
        SystemWeight(
            alpha=table.alpha,
            w=left,
            residual=residual,
            paths=table.paths,
            basis=table.basis,
        ),
        SystemWeight(
            alpha=table.beta,
            w=right,
            residual=residual,
            paths=table.paths,
            basis=table.basis,
        ),
    )
