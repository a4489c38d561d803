"""Exception hierarchy shared by all biconserve modules."""


class BiconserveError(Exception):
    """Base class for all package errors."""


class InvalidParamsError(BiconserveError):
    """Model parameters violate a precondition (usage-level error)."""


class DomainError(BiconserveError):
    """A numeric argument is outside the mathematical domain of an operation."""


class BasePointMismatchError(BiconserveError):
    """Arithmetic attempted between jets expanded at different chart points."""


class SingularJetError(BiconserveError):
    """Division by a jet whose value coefficient is zero."""


class OrderOverflowError(BiconserveError):
    """A partial derivative beyond the truncation order was requested."""


class DegenerateSpanError(BiconserveError):
    """Input vectors are numerically linearly dependent."""


class AlignmentError(BiconserveError):
    """Point clouds are too degenerate for a well-posed rigid alignment."""


class NoAdmissibleBranchError(InvalidParamsError):
    """Initial mean curvature admits no non-constant solution branch."""


class NearTurningError(BiconserveError):
    """Frame-dependent quantity requested inside a turning-point exclusion band."""


class OutOfChartError(BiconserveError):
    """Surface evaluation requested outside the parametrized chart."""


class InvalidCurvatureError(BiconserveError):
    """Frame integration requires strictly positive curvature."""
