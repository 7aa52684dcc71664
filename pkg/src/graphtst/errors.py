"""Exception types shared across the package.

The CLI maps :class:`ValidationError` to exit code 2 (bad input or
configuration) and any other failure to exit code 1.
"""


class ValidationError(ValueError):
    """Input data or configuration violates a documented contract."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""
