"""
RPIlab testing: Dense complex linear algebra for compound quantum systems.

Copyright 2024 RPIlab Developers
"""


def test_package_import():
    import rpilab.hilbert
