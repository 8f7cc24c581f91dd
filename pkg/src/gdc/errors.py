"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI:
  input/format problems  -> 2
  numerical failures     -> 3
  shape mismatches       -> 4
"""


class GdcError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GdcError):
    """Malformed or unusable user input (files, parameters)."""


class NumericalError(GdcError):
    """Numerical failure (non-positive-definite matrix, non-convergence)."""


class ShapeError(GdcError):
    """Dimension or shape mismatch between operands."""


# -- linear algebra ----------------------------------------------------------

class NotPositiveDefinite(NumericalError):
    def __init__(self, pivot_index, pivot_value, context=""):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        msg = (f"matrix is not positive definite: pivot {pivot_index} "
               f"is {pivot_value:.6g}")
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class ZeroDiagonal(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class DimensionMismatch(ShapeError):
    pass


# -- fitting -----------------------------------------------------------------

class EmptyClass(InputError):
    pass


class NonFinite(InputError):
    pass


class NegativePrior(InputError):
    pass


class DuplicateLabel(InputError):
    pass


class LabelMismatch(InputError):
    pass


class InsufficientRealSamples(InputError):
    pass


# -- normality ---------------------------------------------------------------

class TooFewSamples(InputError):
    pass


class ComponentCountOutOfRange(InputError):
    pass


class SampleTooSmall(InputError):
    pass


class SampleTooLarge(InputError):
    pass


class ConstantSample(InputError):
    pass


# -- archive / manifest ------------------------------------------------------

class MissingPlaceholder(InputError):
    pass


class EmptyInput(InputError):
    pass


class FormatError(InputError):
    """File-format violation; carries the byte offset where it was detected."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class BadMagic(FormatError):
    pass


class UnsupportedVersion(FormatError):
    pass


class TruncatedFile(FormatError):
    pass


class NonFiniteValue(FormatError):
    pass
