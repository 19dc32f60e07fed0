"""
RPIlab: Common items.

Copyright 2024 RPIlab Developers
"""

from concurrent.futures import ThreadPoolExecutor
import os
from typing import Callable, Iterable, List, Optional, TypeVar

# Units are dimensionless with hbar = 1 throughout.

# Tolerances.

# Hermitian, unitary, and positivity predicates in operator norm.
TOL_OPERATOR = 1.0e-10

# Normalization of state vectors.
TOL_STATE_NORM = 1.0e-12

# Eigenvalue floor for density operators.
TOL_EIGENVALUE_FLOOR = -1.0e-10

# Commutation of weight operators with the pointer observable.
TOL_COMMUTATOR = 1.0e-12

# Relative tolerance placing pointer eigenvalues that sit on a box-cell edge.
TOL_BOX_EDGE = 1.0e-12

# Frobenius norm below which a system amplitude chain counts as silent.
TOL_SILENT_PATH = 1.0e-12

# Largest partial-influence-functional magnitude still treated as negligible.
TOL_NEGLIGIBLE_INFLUENCE = 1.0e-24

# Guards.

# Maximum number of enumerated corridors (G**K).
MAX_CORRIDORS = 1_000_000

# Maximum number of corridors entering a pairwise (alpha, beta) report.
MAX_PAIR_CORRIDORS = 1024

# Maximum number of system paths per partial-influence-functional index.
MAX_SYSTEM_PATHS = 4096

# Maximum compound Hilbert-space dimension (dense storage).
MAX_COMPOUND_DIM = 256

# Maximum number of fixed steps of the Lindblad integrator.
MAX_INTEGRATOR_STEPS = 1_000_000

# Largest κ·dt of a single Gaussian restricted-path-integral step.
MAX_KAPPA_DT = 0.5

# Environment variable overriding the worker count of corridor sweeps.
MAX_WORKERS_ENV_VAR = "RPILAB_MAX_WORKERS"

T = TypeVar("T")
R = TypeVar("R")


class GuardExceededError(ValueError):
    """Raised when an enumeration or size guard would be exceeded."""


def get_max_workers(max_workers: Optional[int] = None) -> int:
    """
    Resolve the worker count for corridor sweeps.

    An explicit value wins, then the RPILAB_MAX_WORKERS environment variable, then
    the CPU count.
    """
    if max_workers is None:
        env_value = os.environ.get(MAX_WORKERS_ENV_VAR)

        if env_value is not None:
            try:
                max_workers = int(env_value)
            except ValueError as exc:
                raise ValueError(
                    f"{MAX_WORKERS_ENV_VAR} must be an integer, got '{env_value}'"
                ) from exc
        else:
            max_workers = os.cpu_count() or 1

    if max_workers < 1:
        raise ValueError(f"worker count must be positive, got {max_workers}")

    return max_workers


def ordered_map(
    fun: Callable[[T], R], items: Iterable[T], *, max_workers: Optional[int] = None
) -> List[R]:
    """Map fun over items on a thread pool, returning results in input order."""
    items = list(items)
    max_workers = get_max_workers(max_workers)

    if max_workers == 1 or len(items) < 2:
        return [fun(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(max_workers, len(items))) as executor:
        return list(executor.map(fun, items))
