"""
RPIlab: Compound propagation and partial evolution operators.

Copyright 2024 RPIlab Developers
"""

from typing import List, Optional, Sequence
import warnings

import numpy

from rpilab.common import MAX_PAIR_CORRIDORS, GuardExceededError, ordered_map
from rpilab.corridors.computation import (
    check_center,
    enumerate_corridors,
    weight_operator,
)
from rpilab.corridors.types import (
    CorridorMeasure,
    CorridorSpec,
    Normalization,
    WindowKind,
)
from rpilab.evolution.types import (
    PartialAmplitudes,
    PartialDensity,
    PartialPropagator,
    Placement,
    SliceScheme,
    Splitting,
)
from rpilab.hilbert.computation import compensated_sum, kron, unitary_exp
from rpilab.hilbert.types import operator_norm
from rpilab.model.computation import (
    check_pointer_excursion,
    free_hamiltonian,
    total_hamiltonian,
)
from rpilab.model.types import CompoundModel
from rpilab.types import ComplexMatrix


def compound_propagator(m: CompoundModel, t: float) -> ComplexMatrix:
    """Exact compound evolution operator exp(-iHt)."""
    return unitary_exp(total_hamiltonian(m), t)


def slice_propagator(m: CompoundModel, s: SliceScheme) -> ComplexMatrix:
    """
    Propagator of a single slice.

    Exact slices use exp(-iH·dt). Strang slices use free half steps around the
    interaction step, exp(-iH_0·dt/2)·exp(-iH_I·dt)·exp(-iH_0·dt/2), with H_0 the
    uncoupled part, which is second-order accurate.
    """
    if s.splitting is Splitting.EXACT_SLICE:
        return compound_propagator(m, s.dt)

    half = unitary_exp(free_hamiltonian(m), s.dt / 2)

    return half @ unitary_exp(m.H_I, s.dt) @ half


def slice_product(m: CompoundModel, s: SliceScheme) -> ComplexMatrix:
    """Unrestricted K-slice product (U_dt)^K, multiplied one slice at a time."""
    check_pointer_excursion(m, duration=s.t)
    U_dt = slice_propagator(m, s)
    total = numpy.eye(m.dim, dtype=complex)

    for _ in range(s.K):
        total = U_dt @ total

    return total


def _weighted_slice(
    U_dt: ComplexMatrix, W: ComplexMatrix, placement: Placement
) -> ComplexMatrix:
    if placement is Placement.EVOLVE_THEN_WEIGHT:
        return W @ U_dt

    return U_dt @ W


def partial_propagator(
    m: CompoundModel,
    s: SliceScheme,
    c: CorridorSpec,
    *,
    slice_unitary: Optional[ComplexMatrix] = None,
) -> PartialPropagator:
    """
    Partial evolution operator of a corridor, ∏_{k=K..1} (I⊗W(a_k))·U_dt.

    Parameters
    ----------
    m
        Compound model
    s
        Slice scheme
    c
        Corridor with one center per slice
    slice_unitary
        Precomputed slice propagator, computed from m and s if omitted

    Returns
    -------
    partial_propagator
        Compound matrix with the corridor attached

    Warns
    -----
    UserWarning
        If the operator norm exceeds one, which amplitude-normalized Gaussian
        windows narrower than the normal-density peak can produce
    """
    if c.K != s.K:
        raise ValueError(f"corridor has {c.K} slices, scheme has {s.K}")

    check_pointer_excursion(m, duration=s.t)

    U_dt = slice_propagator(m, s) if slice_unitary is None else slice_unitary
    identity_S = numpy.eye(m.dim_S)
    total = numpy.eye(m.dim, dtype=complex)

    for center in c.centers:
        W = kron(identity_S, weight_operator(m, c.window, center))
        total = _weighted_slice(U_dt, W, s.placement) @ total

    U = PartialPropagator(corridor=c, matrix=total)

    if not c.window.is_contraction and U.norm > 1 + 1e-9:
        warnings.warn(
            f"partial propagator norm {U.norm} exceeds one for window {c.window}"
        )

    return U


def sweep_partial_propagators(
    m: CompoundModel,
    s: SliceScheme,
    corridors: Sequence[CorridorSpec],
    *,
    max_workers: Optional[int] = None,
) -> List[PartialPropagator]:
    """Partial propagators of many corridors on a thread pool, in input order."""
    U_dt = slice_propagator(m, s)

    return ordered_map(
        lambda c: partial_propagator(m, s, c, slice_unitary=U_dt),
        corridors,
        max_workers=max_workers,
    )


def weighted_total(
    m: CompoundModel, s: SliceScheme, meas: CorridorMeasure
) -> ComplexMatrix:
    """
    Measure-weighted sum Σ_α μ_α U_α over all G**K corridors, evaluated slice by
    slice as ∏_k (I⊗Σ_j μ_j W(a_j))·U_dt.
    """
    check_pointer_excursion(m, duration=s.t)
    U_dt = slice_propagator(m, s)
    S = compensated_sum(
        weight * weight_operator(m, meas.window, node)
        for node, weight in zip(meas.nodes, meas.weights)
    )
    W = kron(numpy.eye(m.dim_S), S)
    total = numpy.eye(m.dim, dtype=complex)

    for _ in range(s.K):
        total = _weighted_slice(U_dt, W, s.placement) @ total

    return total


def reconstruct_total(
    m: CompoundModel,
    s: SliceScheme,
    meas: CorridorMeasure,
    *,
    by_enumeration: bool = False,
    max_workers: Optional[int] = None,
) -> float:
    """
    Residual of the decomposition of the slice product into partial propagators,
    ‖Σ_α μ_α U_α - (U_dt)^K‖ in operator norm.

    Parameters
    ----------
    m
        Compound model
    s
        Slice scheme
    meas
        Corridor measure with a box or amplitude-normalized Gaussian window
    by_enumeration
        Sum the enumerated partial propagators (compensated, lexicographic order)
        instead of using the per-slice factorization of the sum
    max_workers
        Worker count for the enumerated sweep

    Returns
    -------
    residual
        Operator-norm residual, bounded by (1 + r)^K - 1 for a per-slice
        resolution residual r
    """
    w = meas.window

    if w.kind is WindowKind.GAUSSIAN and w.normalization is Normalization.POVM:
        raise ValueError(
            "reconstruction requires amplitude normalization, povm-normalized "
            "gaussian windows satisfy ∫W² = I instead of ∫W = I"
        )

    if by_enumeration:
        propagators = sweep_partial_propagators(
            m, s, enumerate_corridors(meas, s.K), max_workers=max_workers
        )
        total = compensated_sum(
            U.corridor.measure_weight * U.matrix for U in propagators
        )
    else:
        total = weighted_total(m, s, meas)

    return operator_norm(total - slice_product(m, s))


def partial_density(
    m: CompoundModel, Ua: PartialPropagator, Ub: PartialPropagator
) -> PartialDensity:
    """Partial density R_αβ = U_α·R_in·U_β† with its reduction ρ_αβ."""
    C = m.initial_purification()
    Xa = Ua.matrix @ C
    Xb = Ub.matrix @ C

    return PartialDensity(
        alpha=Ua.corridor.index,
        beta=Ub.corridor.index,
        R=Xa @ Xb.conj().T,
        dim_S=m.dim_S,
    )


def partial_amplitudes(
    m: CompoundModel,
    s: SliceScheme,
    meas: CorridorMeasure,
    *,
    prune_tol: float = 0.0,
    max_corridors: int = MAX_PAIR_CORRIDORS,
) -> PartialAmplitudes:
    """
    Corridor-resolved purification columns X_α = U_α·C, with C·C† = R_in, from a
    depth-first walk over the corridor tree.

    Each tree node is a corridor prefix. Its probability μ·‖X‖²_F bounds the total
    probability of its descendants for box and povm-normalized windows, and
    prefixes below prune_tol are dropped together with their subtrees.

    Parameters
    ----------
    m
        Compound model
    s
        Slice scheme
    meas
        Corridor measure
    prune_tol
        Prefix probability below which a subtree is dropped, zero keeps all G**K
        corridors
    max_corridors
        Maximum number of surviving corridors

    Returns
    -------
    partial_amplitudes
        Surviving corridors in lexicographic order with their enumeration indices,
        purification columns, and the total probability of pruned subtrees

    Raises
    ------
    GuardExceededError
        If the surviving corridor count exceeds max_corridors
    """
    if prune_tol < 0:
        raise ValueError(f"prune_tol must be non-negative, got {prune_tol}")

    check_pointer_excursion(m, duration=s.t)

    w = meas.window
    G = meas.G

    if prune_tol == 0 and G**s.K > max_corridors:
        raise GuardExceededError(
            f"corridor count {G}**{s.K} exceeds pair guard {max_corridors}, "
            "use a positive prune_tol or coarser windows"
        )

    if prune_tol > 0 and not (
        w.kind is WindowKind.BOX or w.normalization is Normalization.POVM
    ):
        warnings.warn(
            "prefix probabilities of amplitude-normalized gaussian windows are not "
            "Kraus probabilities, pruning is approximate"
        )

    for node in meas.nodes:
        check_center(m, w, node)

    # Work in the pointer eigenbasis, where every weight is diagonal.
    V = kron(numpy.eye(m.dim_S), m.pointer_eigenvectors)
    U_dt = V.conj().T @ slice_propagator(m, s) @ V
    C = V.conj().T @ m.initial_purification()
    profiles = numpy.tile(
        numpy.array([w.profile(m.pointer_eigenvalues - node) for node in meas.nodes]),
        (1, m.dim_S),
    )[:, :, numpy.newaxis]

    corridors: List[CorridorSpec] = []
    columns: List[ComplexMatrix] = []
    weights: List[float] = []
    pruned_probability = 0.0

    def descend(X: ComplexMatrix, path: List[int], weight: float) -> None:
        nonlocal pruned_probability

        if len(path) == s.K:
            if len(corridors) >= max_corridors:
                raise GuardExceededError(
                    f"surviving corridor count exceeds pair guard {max_corridors}, "
                    "increase prune_tol or use coarser windows"
                )

            index = 0
            for j in path:
                index = index * G + j

            corridors.append(
                CorridorSpec(
                    centers=meas.nodes[path],
                    window=w,
                    measure_weight=weight,
                    node_indices=path,
                    index=index,
                )
            )
            columns.append(V @ X)
            weights.append(weight)
            return

        evolved = U_dt @ X if s.placement is Placement.EVOLVE_THEN_WEIGHT else None

        for j in range(G):
            child_weight = weight * meas.weights[j]

            if evolved is not None:
                child = profiles[j] * evolved
            else:
                child = U_dt @ (profiles[j] * X)

            probability = child_weight * float(numpy.sum(numpy.abs(child) ** 2))

            if probability < prune_tol:
                pruned_probability += probability
                continue

            descend(child, path + [j], child_weight)

    descend(C, [], 1.0)

    if corridors:
        X = numpy.array(columns)
    else:
        X = numpy.zeros((0, m.dim, C.shape[1]), dtype=complex)

    return PartialAmplitudes(
        corridors=corridors,
        measure_weights=numpy.array(weights),
        X=X,
        pruned_probability=pruned_probability,
    )
