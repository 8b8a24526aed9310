"""Exception hierarchy shared across the toolkit."""


class FFSimError(Exception):
    """Base class for all toolkit errors."""


# linear algebra kernel
class NotHermitianError(FFSimError):
    pass


class NotPSDError(FFSimError):
    pass


class NotUnitaryError(FFSimError):
    pass


# circuit IR / simulator
class DimensionOverflowError(FFSimError):
    pass


class DimensionMismatchError(FFSimError):
    pass


class InvalidGateError(FFSimError):
    pass


class MixedModelError(FFSimError):
    pass


class OverlappingControlError(FFSimError):
    pass


# angular-momentum transform
class OutOfRangeError(FFSimError):
    pass


class InvalidQuantumNumbersError(FFSimError):
    pass


class NotPermutationInvariantError(FFSimError):
    pass


# block evolution assembly
class EncodingOverflowError(FFSimError):
    pass


class BlockTooLargeError(FFSimError):
    pass


class UnknownLabelError(FFSimError):
    pass


class ToleranceUnachievableError(FFSimError):
    pass


# gap amplification / phase-estimation pipeline
class NotFrustrationFreeError(FFSimError):
    pass


class NonPositiveInputError(FFSimError):
    pass


class RegisterOverflowError(FFSimError):
    pass


class StateNotLowEnergyError(FFSimError):
    pass


class PrecisionOverflowError(FFSimError):
    pass


class InfeasibleParametersError(FFSimError):
    pass


# Lie-algebra diagonalization
class AlreadyDiagonalError(FFSimError):
    pass


class ConvergenceStallError(FFSimError):
    pass


# energy-measurement equivalence
class InvalidCError(FFSimError):
    pass


class HorizonExceededError(FFSimError):
    pass


# experiment runner
class ConfigInvalidError(FFSimError):
    pass


class PipelineFailureError(FFSimError):
    def __init__(self, pipeline: str, cause: BaseException):
        super().__init__(f"pipeline {pipeline!r} failed: {cause!r}")
        self.pipeline = pipeline
        self.cause = cause
