"""
RPIlab: Restricted-path-integral evolution of the system alone.

Copyright 2024 RPIlab Developers
"""
