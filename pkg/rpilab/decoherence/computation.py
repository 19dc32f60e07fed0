"""
RPIlab: Decoherence functionals, consistency conditions, and corridor scans.

Copyright 2024 RPIlab Developers
"""

from typing import List, Optional, Sequence, Tuple

import numpy

from rpilab.common import MAX_PAIR_CORRIDORS, ordered_map
from rpilab.corridors.computation import center_allowed, tracking_corridor
from rpilab.corridors.types import CorridorMeasure, Normalization, WindowKind
from rpilab.decoherence.influence import pif_table, require_product_coupling
from rpilab.decoherence.types import CorridorScan, DecoherenceReport
from rpilab.evolution.computation import (
    partial_amplitudes,
    partial_propagator,
    slice_propagator,
)
from rpilab.evolution.types import PartialDensity, SliceScheme
from rpilab.model.computation import branch_pointer_trajectory
from rpilab.model.types import CompoundModel
from rpilab.types import FloatArray, FloatVector

# Entries per block of pairwise reduced partial densities.
_BLOCK_ELEMENTS = 2**22


def decoherence_functional(pd: PartialDensity) -> complex:
    """Generalized decoherence functional P_αβ = Tr R_αβ."""
    return complex(numpy.trace(pd.R))


def _pair_trace_norms(
    reduced: numpy.ndarray, *, max_workers: Optional[int]
) -> FloatArray:
    # reduced has shape (n, dS, q), rows of X_α grouped by system index.
    n, dS, q = reduced.shape
    flat = reduced.reshape(n * dS, q)
    rows = max(1, _BLOCK_ELEMENTS // (n * dS * dS))

    def block_norms(start: int) -> FloatArray:
        stop = min(start + rows, n)
        block = (flat[start * dS : stop * dS] @ flat.conj().T).reshape(
            stop - start, dS, n, dS
        )

        return numpy.linalg.svd(
            block.transpose(0, 2, 1, 3), compute_uv=False
        ).sum(axis=-1)

    return numpy.concatenate(
        ordered_map(block_norms, range(0, n, rows), max_workers=max_workers)
    )


def _ratios(
    pairs: FloatArray, diagonal: FloatVector, valid: numpy.ndarray
) -> FloatArray:
    ratios = numpy.full(pairs.shape, numpy.nan)
    mask = numpy.outer(valid, valid)

    with numpy.errstate(divide="ignore", invalid="ignore"):
        scaled = pairs / numpy.sqrt(numpy.outer(diagonal, diagonal))

    ratios[mask] = scaled[mask]
    numpy.fill_diagonal(ratios, 1.0)

    return ratios


def _max_off_diagonal(ratios: FloatArray) -> float:
    off = ~numpy.eye(ratios.shape[0], dtype=bool) & ~numpy.isnan(ratios)

    return float(ratios[off].max()) if numpy.any(off) else 0.0


def consistency_report(
    m: CompoundModel,
    s: SliceScheme,
    meas: CorridorMeasure,
    *,
    prune_tol: float = 0.0,
    prob_floor: float = 1.0e-12,
    max_corridors: int = MAX_PAIR_CORRIDORS,
    max_workers: Optional[int] = None,
) -> DecoherenceReport:
    """
    Decoherence functionals of a corridor family and the two suppression ratios
    of the consistency and environment-decoherence conditions.

    Parameters
    ----------
    m
        Compound model
    s
        Slice scheme
    meas
        Corridor measure
    prune_tol
        Prefix probability below which corridor subtrees are dropped
    prob_floor
        Corridors with P_αα below prob_floor·max P_αα are left out of both ratios
    max_corridors
        Maximum number of corridors entering the pairwise report
    max_workers
        Worker count for the pairwise trace norms

    Returns
    -------
    report
        P_αβ = Tr R_αβ, probabilities μ_α·P_αα normalized to one, ratio matrices,
        the maxima over α ≠ β of |P_αβ|/√(P_αα·P_ββ) (consistency) and of
        ‖ρ_αβ‖_tr/√(‖ρ_αα‖_tr·‖ρ_ββ‖_tr) (environment decoherence), and the
        completeness residual |Σ_αβ μ_α μ_β P_αβ - 1| (|Σ_α μ_α P_αα - 1| for
        povm-normalized gaussian windows)

    Raises
    ------
    GuardExceededError
        If more than max_corridors corridors survive
    """
    if not 0 <= prob_floor < 1:
        raise ValueError(f"prob_floor must be in [0, 1), got {prob_floor}")

    amplitudes = partial_amplitudes(
        m, s, meas, prune_tol=prune_tol, max_corridors=max_corridors
    )
    X = amplitudes["X"]
    mu = amplitudes["measure_weights"]
    n = X.shape[0]

    if n == 0:
        raise ValueError("no corridor survives pruning")

    flat = X.reshape(n, -1)
    P = flat @ flat.conj().T
    norms = _pair_trace_norms(X.reshape(n, m.dim_S, -1), max_workers=max_workers)

    diagonal = P.diagonal().real.copy()
    top = diagonal.max()

    if top <= 0:
        raise ValueError("all corridor probabilities vanish")

    valid = diagonal >= max(prob_floor * top, numpy.finfo(float).tiny)
    coherence_ratios = _ratios(numpy.abs(P), diagonal, valid)
    env_ratios = _ratios(norms, norms.diagonal().copy(), valid)

    w = meas.window

    if w.kind is WindowKind.GAUSSIAN and w.normalization is Normalization.POVM:
        total = float(mu @ diagonal)
    else:
        total = float(numpy.real(mu @ P @ mu))

    probs = mu * diagonal

    return DecoherenceReport(
        corridors=amplitudes["corridors"],
        measure_weights=mu,
        P=P,
        probs=probs / probs.sum(),
        coherence_ratios=coherence_ratios,
        env_ratios=env_ratios,
        consistency_ratio=_max_off_diagonal(coherence_ratios),
        env_ratio=_max_off_diagonal(env_ratios),
        completeness_residual=abs(total - 1.0),
        pruned_probability=amplitudes["pruned_probability"],
    )


def classical_corridor_scan(
    m: CompoundModel,
    s: SliceScheme,
    meas: CorridorMeasure,
    *,
    offsets: Optional[Sequence[float]] = None,
    max_workers: Optional[int] = None,
) -> CorridorScan:
    """
    Weights of corridors that follow a branch trajectory at a constant offset.

    Each branch |a⟩ of the system observable has a conditional pointer mean ⟨Q⟩(t)
    from the unrestricted evolution. For every branch and offset, the corridor with
    centers ⟨Q⟩(t_k) + offset at the weight times t_k is evaluated, skipping
    corridors with a center outside the allowed range.

    Parameters
    ----------
    m
        Compound model with product coupling
    s
        Slice scheme
    meas
        Corridor measure providing the window
    offsets
        Center offsets, window width times -6, -5, ..., 6 by default
    max_workers
        Worker count for the corridor sweep

    Returns
    -------
    scan
        Per corridor, the branch it follows, its offset, its distance
        min_b max_k |a_k - ⟨Q⟩_b(t_k)| from all branch trajectories, its
        probability Tr(U_α·R_in·U_α†), and the Frobenius norm of its diagonal
        partial influence functional
    """
    require_product_coupling(m)
    w = meas.window

    if offsets is None:
        offsets = w.width * numpy.arange(-6, 7)

    offsets = numpy.asarray(offsets, dtype=float)
    tracks = branch_pointer_trajectory(m, times=s.weight_times)["mean_pointer"]
    candidates: List[Tuple[int, float]] = [
        (branch, float(offset))
        for branch in range(tracks.shape[0])
        for offset in offsets
        if all(center_allowed(m, w, c) for c in tracks[branch] + offset)
    ]
    U_dt = slice_propagator(m, s)
    C = m.initial_purification()

    def evaluate(candidate: Tuple[int, float]) -> Tuple[float, float, float]:
        branch, offset = candidate
        centers = tracks[branch] + offset
        corridor = tracking_corridor(w, centers)
        U = partial_propagator(m, s, corridor, slice_unitary=U_dt)
        prob = float(numpy.sum(numpy.abs(U.matrix @ C) ** 2))
        table = pif_table(m, s, (corridor, corridor))
        distance = float(numpy.abs(tracks - centers).max(axis=1).min())

        return distance, prob, float(numpy.linalg.norm(table.F))

    results = ordered_map(evaluate, candidates, max_workers=max_workers)
    values = numpy.array(results, dtype=float).reshape(-1, 3)

    return CorridorScan(
        branch=numpy.array([branch for branch, _ in candidates], dtype=int),
        offset=numpy.array([offset for _, offset in candidates], dtype=float),
        distance=values[:, 0],
        prob=values[:, 1],
        pif_norm=values[:, 2],
    )
