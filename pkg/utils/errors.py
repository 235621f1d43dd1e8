"""
Module: utils.errors
Description:
    Exception taxonomy shared by every stage.
    Messages start with an upper-snake code, followed by the offending values.
"""
from typing import Any, Optional


class MaxfunError(Exception):
    """Base class for all library failures."""


class ValidationError(MaxfunError, ValueError):
    """Invalid input, configuration or precondition. Maps to CLI exit code 1."""


class ImageFormatError(ValidationError):
    """Unsupported or corrupt image file."""


class InfeasibleError(MaxfunError, RuntimeError):
    """
    A pursuit could not meet its residual budget within the sparsity budget.

    Attributes:
        layer (Optional[int]): 1-based layer index when raised inside a DCPP chain.
        code (Any): Best-effort sparse code found before giving up.
    """

    def __init__(self, message: str, layer: Optional[int] = None, code: Any = None):
        super().__init__(message)
        self.layer = layer
        self.code = code
