"""Exception hierarchy shared by every module.

``ContractError`` signals a caller bug (shape mismatch, missing key),
``DomainError`` a point outside the set an operation is defined on, and
``RejectedInput`` an input that parsed fine but fails a mathematical
precondition (a non-cocycle handed to the solver, say).
"""


class CocycleForgeError(Exception):
    """Base class for all package errors."""


class ContractError(CocycleForgeError, ValueError):
    pass


class DomainError(CocycleForgeError, ValueError):
    pass


class RejectedInput(CocycleForgeError):
    """Raised with a report describing the violated property."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EvaluationError(CocycleForgeError):
    """An evaluator raised while being queried at ``point``."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
