"""
RPIlab: Compound system+environment models.

Copyright 2024 RPIlab Developers
"""
