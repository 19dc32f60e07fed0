"""
RPIlab: Types.

Copyright 2024 RPIlab Developers
"""

from typing import Union

import numpy
import numpy.typing

# Vectors are 1D.
FloatVector = numpy.typing.NDArray[numpy.float64]
ComplexVector = numpy.typing.NDArray[numpy.complex128]
IntVector = numpy.typing.NDArray[numpy.int_]

# Matrices are 2D, arrays are ND.
ComplexMatrix = numpy.typing.NDArray[numpy.complex128]
FloatArray = numpy.typing.NDArray[numpy.float64]
ComplexArray = numpy.typing.NDArray[numpy.complex128]

# Anything numpy.asarray turns into a complex matrix.
MatrixLike = Union[ComplexMatrix, FloatArray, list]
