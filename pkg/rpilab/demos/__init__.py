"""
RPIlab: Demos.

Copyright 2024 RPIlab Developers
"""
