"""
RPIlab: Computations on corridors, windows, and corridor measures.

Copyright 2024 RPIlab Developers
"""

import itertools
from typing import List, Sequence

import numpy

from rpilab.common import MAX_CORRIDORS, TOL_BOX_EDGE, GuardExceededError
from rpilab.corridors.types import (
    CorridorMeasure,
    CorridorSpec,
    Normalization,
    Window,
    WindowKind,
)
from rpilab.model.types import CompoundModel
from rpilab.types import ComplexMatrix, FloatVector


def center_allowed(m: CompoundModel, w: Window, center: float) -> bool:
    """Whether a window center lies inside the range its kind allows."""
    lo, hi = m.pointer_range
    margin = w.center_margin
    slack = TOL_BOX_EDGE * max(1.0, abs(lo), abs(hi))

    return bool(lo - margin - slack <= center <= hi + margin + slack)


def check_center(m: CompoundModel, w: Window, center: float) -> None:
    """Raise if a window center lies outside the range its kind allows."""
    if not center_allowed(m, w, center):
        lo, hi = m.pointer_range
        margin = w.center_margin
        raise ValueError(
            f"window center {center} outside allowed range [{lo - margin}, "
            f"{hi + margin}]"
        )


def window_values(m: CompoundModel, w: Window, center: float) -> FloatVector:
    """Window profile over the pointer eigenvalues, W(λ - center)."""
    check_center(m, w, center)

    return w.profile(m.pointer_eigenvalues - center)


def weight_operator(m: CompoundModel, w: Window, center: float) -> ComplexMatrix:
    """
    Environment weight operator for one slice, diagonal in the pointer eigenbasis.

    Parameters
    ----------
    m
        Compound model providing the pointer observable
    w
        Window
    center
        Window center a in pointer-observable units

    Returns
    -------
    W
        Hermitian, positive-semidefinite operator Σ_λ w(λ - a)|λ⟩⟨λ|

    Raises
    ------
    ValueError
        If center lies outside the pointer spectrum range widened by half a box
        width (box) or by six σ (gaussian)
    """
    values = window_values(m, w, center)
    V = m.pointer_eigenvectors

    return (V * values) @ V.conj().T


def spectrum_measure(
    eigenvalues: Sequence[float],
    w: Window,
    *,
    n_nodes: int = 64,
    n_sigma: float = 6.0,
    origin: float = 0.0,
) -> CorridorMeasure:
    """
    Quadrature of a window family over the spectrum of an observable.

    Box windows get cells of the window width centered at origin + j·width, one node
    per cell that contains an eigenvalue, all with weight one, so that the cells
    partition the spectrum. Gaussian windows get n_nodes uniform nodes over the
    spectrum widened by n_sigma·σ on both sides, with trapezoid weights.
    """
    eigenvalues = numpy.asarray(eigenvalues, dtype=float)
    lo, hi = float(eigenvalues.min()), float(eigenvalues.max())

    if w.kind is WindowKind.BOX:
        cells = numpy.unique(
            numpy.floor(
                (eigenvalues - origin) / w.width + 0.5 + TOL_BOX_EDGE
            ).astype(int)
        )
        nodes = origin + cells * w.width

        return CorridorMeasure(
            nodes=nodes,
            weights=numpy.ones(nodes.size),
            window=w,
            range_=(nodes[0] - w.width / 2, nodes[-1] + w.width / 2),
        )

    if n_nodes < 2:
        raise ValueError(f"n_nodes must be at least 2, got {n_nodes}")

    if not 0 < n_sigma <= 6:
        raise ValueError(f"n_sigma must be positive and at most 6, got {n_sigma}")

    start = lo - n_sigma * w.width
    stop = hi + n_sigma * w.width
    nodes = numpy.linspace(start, stop, n_nodes)
    step = (stop - start) / (n_nodes - 1)
    weights = numpy.full(n_nodes, step)
    weights[[0, -1]] = step / 2

    return CorridorMeasure(nodes=nodes, weights=weights, window=w, range_=(start, stop))


def build_measure(
    m: CompoundModel,
    w: Window,
    *,
    n_nodes: int = 64,
    n_sigma: float = 6.0,
    origin: float = 0.0,
) -> CorridorMeasure:
    """Default quadrature for the corridor measure over the pointer spectrum."""
    return spectrum_measure(
        m.pointer_eigenvalues, w, n_nodes=n_nodes, n_sigma=n_sigma, origin=origin
    )


def resolution_check(m: CompoundModel, w: Window, meas: CorridorMeasure) -> float:
    """
    Operator-norm residual of the window family's resolution of unity,
    ‖Σ_j μ_j W(a_j) - I‖ (amplitude) or ‖Σ_j μ_j W(a_j)² - I‖ (povm).

    Box partitions satisfy both identities, and the amplitude one is reported.
    """
    total = numpy.zeros(m.dim_E)
    # Custom measures may place nodes beyond the center guard.
    for node, weight in zip(meas.nodes, meas.weights):
        values = w.profile(m.pointer_eigenvalues - node)

        if w.normalization is Normalization.POVM and w.kind is WindowKind.GAUSSIAN:
            values = values**2

        total += weight * values

    return float(numpy.max(numpy.abs(total - 1.0)))


def enumerate_corridors(meas: CorridorMeasure, K: int) -> List[CorridorSpec]:
    """
    All G**K node paths in lexicographic order (first slice slowest), with measure
    weight ∏_k μ_{j_k}.

    Raises
    ------
    GuardExceededError
        If G**K exceeds the enumeration guard
    """
    if K < 1:
        raise ValueError(f"slice count must be at least 1, got {K}")

    if meas.G**K > MAX_CORRIDORS:
        raise GuardExceededError(
            f"corridor count {meas.G}**{K} exceeds enumeration guard {MAX_CORRIDORS}"
        )

    return [
        CorridorSpec(
            centers=meas.nodes[list(path)],
            window=meas.window,
            measure_weight=float(numpy.prod(meas.weights[list(path)])),
            node_indices=path,
            index=index,
        )
        for index, path in enumerate(itertools.product(range(meas.G), repeat=K))
    ]


def tracking_corridor(
    w: Window, centers: Sequence[float], *, measure_weight: float = 1.0
) -> CorridorSpec:
    """Corridor with arbitrary per-slice centers, off the measure grid."""
    return CorridorSpec(centers=centers, window=w, measure_weight=measure_weight)
