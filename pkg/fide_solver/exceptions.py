"""
FIDE Solver - Exceptions
========================

Every error raised by the library derives from FideSolverError so callers
(the CLI in particular) can map failures to exit codes by family.
"""


class FideSolverError(Exception):
    """Base class for all fide_solver errors."""


class GridError(FideSolverError, ValueError):
    """Invalid grid size, or a grid function that does not fit its grid."""


# ----------------------------
# Expressions
# ----------------------------

class ExpressionError(FideSolverError, ValueError):
    """Base class for parse and evaluation failures."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name, position=None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"unknown identifier '{name}'{where}")
        self.name = name
        self.position = position


class ArityError(ExpressionError):
    def __init__(self, name, expected, got):
        super().__init__(f"function '{name}' takes {expected} argument(s), got {got}")
        self.name = name


class MissingBindingError(ExpressionError):
    def __init__(self, name):
        super().__init__(f"no value bound for variable '{name}'")
        self.name = name


class EvaluationDomainError(ExpressionError):
    """A subexpression produced inf or nan."""

    def __init__(self, subexpression):
        super().__init__(f"non-finite value while evaluating '{subexpression}'")
        self.subexpression = subexpression


# ----------------------------
# Problems and solving
# ----------------------------

class ProblemDefinitionError(FideSolverError, ValueError):
    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class SolverError(FideSolverError):
    """A non-finite intermediate grid function."""

    def __init__(self, quantity, node, value=None):
        super().__init__(f"non-finite {quantity} at node {node} (value {value})")
        self.quantity = quantity
        self.node = node


class DivergenceError(SolverError):
    def __init__(self, iteration, norm, threshold):
        FideSolverError.__init__(
            self,
            f"iteration diverged at m={iteration}: |Psi|={norm:.3e} exceeds {threshold:.1e}",
        )
        self.quantity = "Psi"
        self.node = None
        self.iteration = iteration
        self.norm = norm


class CertificateError(FideSolverError, ValueError):
    """The certificate does not support the requested bound."""
