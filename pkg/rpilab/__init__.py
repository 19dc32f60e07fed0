"""
RPIlab: Restricted-Path-Integral Laboratory for Open Quantum Systems.

Copyright 2024 RPIlab Developers
"""

import importlib.metadata

__version__ = importlib.metadata.version("rpilab")
