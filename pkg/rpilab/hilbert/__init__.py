"""
RPIlab: Dense complex linear algebra for compound quantum systems.

Copyright 2024 RPIlab Developers
"""
