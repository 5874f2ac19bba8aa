"""Exception and warning types raised across the package."""


class QNPError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(QNPError, ValueError):
    pass


class SingularMatrixError(QNPError, ArithmeticError):
    pass


class NotHermitianError(QNPError, ValueError):
    pass


class SylvesterSingularError(SingularMatrixError):
    """``x - a x b = c`` has a nontrivial homogeneous solution."""


class CompanionSingularError(SingularMatrixError):
    pass


class SphereCollisionError(QNPError, ValueError):
    """Two interpolation nodes lie on the same 2-sphere."""


class ZeroConstantTermError(QNPError, ZeroDivisionError):
    pass


class DenominatorDegenerateError(QNPError, ArithmeticError):
    pass


class InconsistentDataError(QNPError, ValueError):
    pass


class NoUnitaryParameterError(QNPError, ArithmeticError):
    pass


class InfeasibleError(QNPError, ValueError):
    """The Pick matrix is not positive semidefinite."""


class ProblemFormatError(QNPError, ValueError):
    pass


class DivergenceWarning(UserWarning):
    pass


class SchurViolationWarning(UserWarning):
    pass


class NonAnalyticWarning(UserWarning):
    pass
