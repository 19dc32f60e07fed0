"""
RPIlab: Decoherence functionals, consistency conditions, and influence functionals.

Copyright 2024 RPIlab Developers
"""
