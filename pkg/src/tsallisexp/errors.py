"""Exception hierarchy shared across the package."""


class TsallisExpError(Exception):
    """Base class for all package errors."""


class DomainError(TsallisExpError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateSampleError(TsallisExpError, ValueError):
    """The pooled statistic T vanished, so no scale estimate exists."""


class InconsistentLocationError(TsallisExpError, ValueError):
    """An observation lies below its population's declared location."""


class CapacityError(TsallisExpError, ValueError):
    """A request exceeds a hard size limit (e.g. subset enumeration)."""


class ConvergenceError(TsallisExpError, ArithmeticError):
    """An iterative routine hit its iteration cap before converging."""
