"""Computation and file-format services."""
