"""
RPIlab testing: Compound system+environment models.

Copyright 2024 RPIlab Developers
"""


def test_package_import():
    import rpilab.model
