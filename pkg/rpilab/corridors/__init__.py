"""
RPIlab: Corridors of environment paths as measurement alternatives.

Copyright 2024 RPIlab Developers
"""
