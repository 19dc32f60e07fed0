"""
RPIlab: Compound propagation and partial evolution operators.

Copyright 2024 RPIlab Developers
"""
