"""
Exception hierarchy shared by the library and the command line.

The command line maps each class onto a stable exit code.
"""
from typing import TYPE_CHECKING, Any, List, Optional

if TYPE_CHECKING:
    from osfd.engine import Design

__all__ = ["OSFDError", "UsageError", "EvaluatorError", "ProtocolError"]


class OSFDError(Exception):
    """Base class of all errors raised by osfd"""

    exit_code = 1


class UsageError(OSFDError, ValueError):
    """Invalid argument, configuration or precondition violation"""

    exit_code = 2


class EvaluatorError(OSFDError, RuntimeError):
    """
    The black-box evaluator failed or returned a non-finite output.

    Parameters
    ----------
    message : str
        Diagnostic message
    design : Design, optional
        The partial design completed before the failure
    trace : list, optional
        The sequential trace completed before the failure
    """

    exit_code = 3

    def __init__(
        self,
        message: str,
        design: Optional["Design"] = None,
        trace: Optional[List[Any]] = None,
    ) -> None:
        super().__init__(message)
        self.design = design
        self.trace = [] if trace is None else trace


class ProtocolError(OSFDError, RuntimeError):
    """ask/tell called out of order"""

    exit_code = 4
