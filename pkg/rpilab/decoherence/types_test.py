"""
RPIlab testing: Types for decoherence functionals and partial influence functionals.

Copyright 2024 RPIlab Developers
"""

import numpy
import pytest

from rpilab.decoherence.types import PifTable, SystemWeight


def test_pif_table():
    F = numpy.array([[1.0, 0.5j], [-0.5j, 1.0]])
    paths = [[0, 0, 0], [1, 1, 1]]
    table = PifTable(alpha=2, beta=5, F=F, paths=paths, basis=numpy.eye(2))
    assert table.alpha == 2
    assert table.beta == 5
    assert table.K == 3
    numpy.testing.assert_array_equal(table.F, F)
    numpy.testing.assert_array_equal(table.paths, paths)
    numpy.testing.assert_array_equal(table.basis, numpy.eye(2))
    assert not table.F.flags.writeable
    assert not table.paths.flags.writeable

    # Stored table is a copy.
    F[0, 0] = 3.0
    assert table.F[0, 0] == 1.0

    table = PifTable(alpha=None, beta=None, F=F, paths=paths, basis=numpy.eye(2))
    assert table.alpha is None
    assert table.beta is None


def test_pif_table_errors():
    with pytest.raises(ValueError) as excinfo:
        PifTable(
            alpha=0, beta=0, F=numpy.eye(3), paths=[[0], [1]], basis=numpy.eye(2)
        )
    assert "influence table has 3 rows, got 2 paths" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        PifTable(alpha=0, beta=0, F=numpy.eye(2), paths=[0, 1], basis=numpy.eye(2))
    assert "paths must be a 2D array" in str(excinfo.value)

    with pytest.raises(ValueError) as excinfo:
        PifTable(
            alpha=0, beta=0, F=numpy.ones((2, 3)), paths=[[0], [1]], basis=numpy.eye(2)
        )
    assert "influence table must be square" in str(excinfo.value)


def test_system_weight():
    w = SystemWeight(
        alpha=1,
        w=[1.0, 0.5j],
        residual=0.25,
        paths=[[0, 0], [1, 1]],
        basis=numpy.eye(2),
    )
    assert w.alpha == 1
    numpy.testing.assert_array_equal(w.w, [1.0, 0.5j])
    assert w.residual == 0.25
    numpy.testing.assert_array_equal(w.paths, [[0, 0], [1, 1]])
    assert not w.w.flags.writeable

    with pytest.raises(ValueError) as excinfo:
        SystemWeight(
            alpha=1, w=[1.0], residual=0.0, paths=[[0], [1]], basis=numpy.eye(2)
        )
    assert "weight has shape (1,), expected (2,)" in str(excinfo.value)

    for residual in (-0.1, 1.5):
        with pytest.raises(ValueError) as excinfo:
            SystemWeight(
                alpha=1, w=[1.0], residual=residual, paths=[[0]], basis=numpy.eye(2)
            )
        assert "factorization residual must be in [0, 1]" in str(excinfo.value)
