"""Exception hierarchy.

Every failure carries a stable string ``code`` so that batch reports can
embed it without depending on Python class names.
"""


class CompopError(Exception):
    code = "ERROR"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class NotInFError(CompopError, ValueError):
    code = "REJECT_NOT_IN_F"


class NonpositiveMomentError(CompopError, ValueError):
    code = "REJECT_NONPOSITIVE_MOMENT"


class MGreaterThanNError(CompopError, ValueError):
    code = "REJECT_M_GT_N"


class TailNotBoundedError(CompopError, ValueError):
    code = "TAIL_NOT_BOUNDED"


class NoConvergenceError(CompopError, ArithmeticError):
    code = "NO_CONVERGENCE"


class NotPSDError(CompopError, ValueError):
    code = "NOT_PSD"


class NotSelfadjointError(CompopError, ValueError):
    code = "NOT_SELFADJOINT"


class SizeMismatchError(CompopError, ValueError):
    code = "SIZE_MISMATCH"


class AffineUnsupportedError(CompopError, ValueError):
    code = "AFFINE_UNSUPPORTED_FOR_PHI"


class CombinatorialOverflowError(CompopError, OverflowError):
    code = "OVERFLOW"


class UnboundedOperatorError(CompopError, ValueError):
    code = "UNBOUNDED_OPERATOR"


class NotWellDefinedError(CompopError, ValueError):
    code = "NOT_WELL_DEFINED"


class ContractionViolatedError(CompopError, ValueError):
    code = "CONTRACTION_VIOLATED"


class MCVarianceTooHighError(CompopError, ArithmeticError):
    code = "MC_VARIANCE_TOO_HIGH"


class TruncationTooSmallError(CompopError, ValueError):
    code = "TRUNCATION_TOO_SMALL"


class PhiZeroAtOriginError(CompopError, ValueError):
    code = "PHI_ZERO_AT_ORIGIN"


class ParseError(CompopError, ValueError):
    code = "PARSE_ERROR"


class DimensionMismatchError(CompopError, ValueError):
    code = "DIMENSION_MISMATCH"
