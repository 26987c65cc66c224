"""Shared exception types."""


class DataError(Exception):
    """Invalid or inconsistent input data (bad file, range violation, missing component)."""


class ConvergenceError(RuntimeError):
    """An iterative routine exceeded its iteration cap without converging."""
