"""Boundary Nevanlinna-Pick interpolation for quaternionic Schur functions."""

from .errors import (
    CompanionSingularError,
    DegenerateInputError,
    DenominatorDegenerateError,
    DivergenceWarning,
    InconsistentDataError,
    InfeasibleError,
    NoUnitaryParameterError,
    NonAnalyticWarning,
    NotHermitianError,
    ProblemFormatError,
    QNPError,
    SchurViolationWarning,
    SingularMatrixError,
    SphereCollisionError,
    SylvesterSingularError,
    ZeroConstantTermError,
)
from .pick import (
    InterpolationProblem,
    PickSystem,
    SchurSolution,
    ThetaFunction,
    VerificationReport,
    blaschke_problem,
    build_system,
    build_theta,
    caratheodory_limit,
    degenerate_solve,
    necessity_check,
    r1_apply,
    r1_structural_check,
    solve,
    verify,
)
from .quaternion import Quaternion
from .series import PowerSeries, StructuredSeries, blaschke_factor

__version__ = "0.1.0"
