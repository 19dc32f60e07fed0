"""
RPIlab: Types for corridors, windows, and corridor measures.

Copyright 2024 RPIlab Developers
"""

from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy

from rpilab.common import TOL_BOX_EDGE
from rpilab.types import FloatArray, FloatVector, IntVector


class WindowKind(Enum):
    """Shape of per-slice pointer windows."""

    BOX = "box-partition"  # Half-open cells [c - w/2, c + w/2).
    GAUSSIAN = "gaussian"


class Normalization(Enum):
    """Which resolution of unity a window family satisfies."""

    AMPLITUDE = "amplitude"  # ∫ W(a) da = I.
    POVM = "povm"  # ∫ W(a)² da = I.


class Window:
    """Per-slice pointer window W(λ - a) of a given kind, width, and normalization."""

    def __init__(
        self,
        *,
        kind: WindowKind,
        width: float,
        normalization: Normalization = Normalization.AMPLITUDE,
    ) -> None:
        """
        Parameters
        ----------
        kind
            Box-partition cell or Gaussian profile
        width
            Box cell width or Gaussian σ, in pointer-observable units
        normalization
            Resolution of unity satisfied by the window family, box cells satisfy
            both
        """
        if not isinstance(kind, WindowKind):
            raise ValueError(f"unrecognized window kind '{kind}'")

        if not isinstance(normalization, Normalization):
            raise ValueError(f"unrecognized window normalization '{normalization}'")

        if not (numpy.isfinite(width) and width > 0):
            raise ValueError(f"window width must be positive and finite, got {width}")

        self._kind = kind
        self._width = float(width)
        self._normalization = normalization

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Window)
            and self._kind is other._kind
            and self._width == other._width
            and self._normalization is other._normalization
        )

    def __repr__(self) -> str:
        return (
            f"Window(kind={self._kind.value}, width={self._width}, "
            f"normalization={self._normalization.value})"
        )

    @property
    def kind(self) -> WindowKind:
        """Return window kind."""
        return self._kind

    @property
    def width(self) -> float:
        """Return box width or Gaussian σ."""
        return self._width

    @property
    def normalization(self) -> Normalization:
        """Return normalization convention."""
        return self._normalization

    @property
    def center_margin(self) -> float:
        """Return how far outside the pointer spectrum a center may lie."""
        if self._kind is WindowKind.BOX:
            return self._width / 2

        return 6 * self._width

    def profile(self, d: FloatArray) -> FloatArray:
        """
        Window profile evaluated at offsets d = λ - a.

        Box cells are half open with a relative edge tolerance, so that eigenvalues
        on a shared cell edge land in exactly one cell of a tiling. Gaussian
        amplitude windows are the normal density of σ = width, Gaussian povm
        windows its square root rescaled so that ∫W² = 1.
        """
        d = numpy.asarray(d, dtype=float)

        if self._kind is WindowKind.BOX:
            half = self._width / 2
            tol = TOL_BOX_EDGE * self._width

            return ((-half - tol <= d) & (d < half - tol)).astype(float)

        sigma = self._width

        if self._normalization is Normalization.AMPLITUDE:
            return numpy.exp(-(d**2) / (2 * sigma**2)) / numpy.sqrt(
                2 * numpy.pi * sigma**2
            )

        return numpy.exp(-(d**2) / (4 * sigma**2)) / (2 * numpy.pi * sigma**2) ** 0.25

    def kraus_profile(self, d: FloatArray) -> FloatArray:
        """Profile rescaled to the povm convention, ∫W² = 1 (box cells unchanged)."""
        if self._kind is WindowKind.BOX or self._normalization is Normalization.POVM:
            return self.profile(d)

        return Window(
            kind=self._kind, width=self._width, normalization=Normalization.POVM
        ).profile(d)

    @property
    def is_contraction(self) -> bool:
        """Whether every window operator has norm at most one."""
        if self._kind is WindowKind.BOX:
            return True

        return float(self.profile(0.0)) <= 1.0


class CorridorSpec:
    """
    One measurement alternative: a reference pointer value per time slice with a
    window and a quadrature weight.
    """

    def __init__(
        self,
        *,
        centers: Sequence[float],
        window: Window,
        measure_weight: float = 1.0,
        node_indices: Optional[Sequence[int]] = None,
        index: Optional[int] = None,
    ) -> None:
        """
        Parameters
        ----------
        centers
            Reference pointer value a_k for each slice k = 1..K
        window
            Per-slice window
        measure_weight
            Product of per-slice quadrature weights μ
        node_indices
            Measure-node index per slice, when the corridor comes from a measure
        index
            Position in a lexicographic enumeration, when enumerated
        """
        centers = numpy.array(centers, dtype=float)

        if centers.ndim != 1 or centers.size == 0:
            raise ValueError("centers must be a non-empty one-dimensional sequence")

        if not numpy.all(numpy.isfinite(centers)):
            raise ValueError("centers must not contain infs or NaNs")

        if not (numpy.isfinite(measure_weight) and measure_weight >= 0):
            raise ValueError(
                f"measure weight must be non-negative and finite, got {measure_weight}"
            )

        if node_indices is not None:
            node_indices = numpy.array(node_indices, dtype=int)

            if node_indices.shape != centers.shape:
                raise ValueError("node indices must match centers in length")

            node_indices.setflags(write=False)

        centers.setflags(write=False)
        self._centers = centers
        self._window = window
        self._measure_weight = float(measure_weight)
        self._node_indices = node_indices
        self._index = index

    def __repr__(self) -> str:
        return (
            f"CorridorSpec(index={self._index}, centers={self._centers.tolist()}, "
            f"measure_weight={self._measure_weight})"
        )

    @property
    def centers(self) -> FloatVector:
        """Return per-slice centers."""
        return self._centers

    @property
    def window(self) -> Window:
        """Return window."""
        return self._window

    @property
    def measure_weight(self) -> float:
        """Return measure weight."""
        return self._measure_weight

    @property
    def node_indices(self) -> Optional[IntVector]:
        """Return per-slice node indices, if any."""
        return self._node_indices

    @property
    def index(self) -> Optional[int]:
        """Return enumeration index, if any."""
        return self._index

    @property
    def K(self) -> int:
        """Return number of slices."""
        return self._centers.size

    def label(self) -> str:
        """Return a short label, the enumeration index if known."""
        if self._index is not None:
            return str(self._index)

        return "(" + ",".join(f"{c:g}" for c in self._centers) + ")"


class CorridorMeasure:
    """Quadrature realization of the measure dα on per-slice pointer centers."""

    def __init__(
        self,
        *,
        nodes: Sequence[float],
        weights: Sequence[float],
        window: Window,
        range_: Optional[Tuple[float, float]] = None,
    ) -> None:
        """
        Parameters
        ----------
        nodes
            Per-slice center values a_j
        weights
            Quadrature weights μ_j
        window
            Window the measure integrates
        range_
            Interval covered by the quadrature, defaults to the node span
        """
        nodes = numpy.array(nodes, dtype=float)
        weights = numpy.array(weights, dtype=float)

        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("nodes must be a non-empty one-dimensional sequence")

        if weights.shape != nodes.shape:
            raise ValueError("weights must match nodes in length")

        if not numpy.all(numpy.isfinite(numpy.concatenate((nodes, weights)))):
            raise ValueError("nodes and weights must not contain infs or NaNs")

        if numpy.any(weights < 0):
            raise ValueError("weights must be non-negative")

        if range_ is None:
            range_ = (float(nodes.min()), float(nodes.max()))

        nodes.setflags(write=False)
        weights.setflags(write=False)
        self._nodes = nodes
        self._weights = weights
        self._window = window
        self._range = (float(range_[0]), float(range_[1]))

    @property
    def nodes(self) -> FloatVector:
        """Return nodes."""
        return self._nodes

    @property
    def weights(self) -> FloatVector:
        """Return weights."""
        return self._weights

    @property
    def window(self) -> Window:
        """Return window."""
        return self._window

    @property
    def range(self) -> Tuple[float, float]:
        """Return covered interval."""
        return self._range

    @property
    def G(self) -> int:
        """Return node count."""
        return self._nodes.size
