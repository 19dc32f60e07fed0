"""
RPIlab: Command-line experiment runner.

Copyright 2024 RPIlab Developers
"""
