"""Project-wide pytest configuration.

This file is intentionally minimal. ``pytest.ini`` sets ``pythonpath = .`` so
the top-level modules import without any ``sys.path`` manipulation; shared
fixtures live in ``tests/conftest.py``.
"""
