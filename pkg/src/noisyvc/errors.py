"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, DataError exits 2,
NumericalAbort exits 3.
"""


class DataError(ValueError):
    """Invalid or degenerate input data (bad WAV format, empty manifest, ...)."""


class NumericalAbort(RuntimeError):
    """Training produced a non-finite loss or parameter; the run must stop."""
