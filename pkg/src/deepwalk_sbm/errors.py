"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: validation problems exit with 1,
numerical failures with 2 and I/O failures (plain ``OSError``) with 3.
"""

from __future__ import annotations


class ValidationError(ValueError):
    """Invalid parameters or malformed input."""


class IsolatedNodeError(ValidationError):
    """A graph contains a degree-0 node, so the stationary walk start is undefined."""


class NumericalError(RuntimeError):
    """A computation produced non-finite values or failed to converge."""


class EigensolverError(NumericalError):
    """The symmetric eigensolver did not return a usable decomposition."""
