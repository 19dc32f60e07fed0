"""
RPIlab testing: Common items.

Copyright 2024 RPIlab Developers
"""

import pytest

import rpilab.common as common


def test_tolerances():
    assert common.TOL_OPERATOR == 1.0e-10
    assert common.TOL_STATE_NORM == 1.0e-12
    assert common.TOL_EIGENVALUE_FLOOR == -1.0e-10
    assert common.TOL_COMMUTATOR == 1.0e-12


def test_guards():
    assert common.MAX_CORRIDORS == 10**6
    assert common.MAX_PAIR_CORRIDORS == 1024
    assert common.MAX_SYSTEM_PATHS == 4096
    assert common.MAX_COMPOUND_DIM == 256
    assert issubclass(common.GuardExceededError, ValueError)


def test_get_max_workers(monkeypatch):
    monkeypatch.delenv(common.MAX_WORKERS_ENV_VAR, raising=False)
    assert common.get_max_workers(3) == 3
    assert common.get_max_workers() >= 1

    monkeypatch.setenv(common.MAX_WORKERS_ENV_VAR, "2")
    assert common.get_max_workers() == 2
    # Explicit value wins over the environment.
    assert common.get_max_workers(5) == 5

    monkeypatch.setenv(common.MAX_WORKERS_ENV_VAR, "many")
    with pytest.raises(ValueError) as excinfo:
        common.get_max_workers()
    assert "must be an integer" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        common.get_max_workers(0)
    assert "worker count must be positive" in str(excinfo.value)


@pytest.mark.parametrize("max_workers", [1, 2, 4])
def test_ordered_map(max_workers):
    items = list(range(17))
    assert common.ordered_map(
        lambda x: x * x, items, max_workers=max_workers
    ) == [x * x for x in items]
    assert common.ordered_map(lambda x: x, [], max_workers=max_workers) == []
