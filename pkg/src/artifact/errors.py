"""Exception hierarchy shared by all modules.

Every error carries the CLI exit code it maps to.
"""


class ArtifactError(Exception):
    exit_code = 5


class InputError(ArtifactError, ValueError):
    """Bad user input or violated precondition."""

    exit_code = 2


class CapExceeded(ArtifactError):
    exit_code = 3


class VerificationMismatch(ArtifactError):
    """A verification found a counterexample. This is a finding, not a crash."""

    exit_code = 4


class InternalAssertion(ArtifactError, AssertionError):
    exit_code = 5


# exactalg
class NonPrimeCharacteristic(InputError):
    pass


class DegreeTooLarge(InputError):
    pass


class NotAntisymmetric(InputError):
    pass


class OddSize(InputError):
    pass


class NoneFound(InternalAssertion):
    pass


# exterior / geometry
class DimensionMismatch(InputError):
    pass


class ZeroFunctional(InputError):
    pass


class ZeroInput(InputError):
    pass


class EnumerationTooLarge(CapExceeded):
    pass


class NotNested(InputError):
    pass


class FullSpace(InputError):
    pass


# hyperplane
class DimensionTooSmall(InputError):
    pass


class NotComplementary(InputError):
    pass


class RankExceedsDimension(InputError):
    pass


class InvalidLambda(InputError):
    pass


class WrongDimension(InputError):
    pass


class EigenvaluePresent(InputError):
    pass


class NotASpread(InputError):
    pass


# delta
class PolySyntaxError(InputError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariable(InputError):
    pass


class TranscriptionInvalid(InternalAssertion):
    pass


class CharacteristicTwo(InputError):
    pass


class InconsistentExtraction(VerificationMismatch):
    pass


class CalibrationDegenerate(InternalAssertion):
    pass


class Mismatch(VerificationMismatch):
    pass


# counting
class OddDimension(InputError):
    pass
