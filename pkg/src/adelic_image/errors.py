"""Exception hierarchy shared across the package.

Every error class carries a distinct ``exit_code`` so the command line
tool can map failures to stable process exit statuses.  Mathematical
verdicts (a hypothesis failing, a scan coming back empty) are *results*,
not errors, and never raise.
"""


class AdelicImageError(Exception):
    """Base class for all package errors."""

    exit_code = 1


# finite group enumeration

class OverflowBound(AdelicImageError):
    exit_code = 10


class InvalidGenerator(AdelicImageError):
    exit_code = 11


class SmallPrime(AdelicImageError):
    exit_code = 12


class NotEnumerated(AdelicImageError):
    exit_code = 13


class MixedCharacteristic(AdelicImageError):
    exit_code = 14


class Unsupported(AdelicImageError):
    exit_code = 15


# characters and unit groups

class NotCoprime(AdelicImageError):
    exit_code = 20


class BoundTooLarge(AdelicImageError):
    exit_code = 21


# number fields

class RamifiedOrBadPoly(AdelicImageError):
    exit_code = 25


class DenominatorAtP(AdelicImageError):
    exit_code = 26


class NotAGroup(AdelicImageError):
    exit_code = 27


class NotPowerBasis(AdelicImageError):
    exit_code = 28


# newform ingestion and twist detection

class SchemaError(AdelicImageError):
    exit_code = 30


class FetchError(AdelicImageError):
    exit_code = 31


class OfflineMiss(AdelicImageError):
    exit_code = 32


class ConductorViolation(AdelicImageError):
    exit_code = 33


class NotClosed(AdelicImageError):
    exit_code = 34


class BoundTooSmall(AdelicImageError):
    exit_code = 35


class IncompatibleFields(AdelicImageError):
    exit_code = 36


# image analysis

class BadPrime(AdelicImageError):
    exit_code = 40


class NoSolution(AdelicImageError):
    exit_code = 41


class NoEligibleEll(AdelicImageError):
    exit_code = 42


class IncompleteCover(AdelicImageError):
    exit_code = 43


class NeedTwoPrimes(AdelicImageError):
    exit_code = 44


class RamifiedInK(AdelicImageError):
    exit_code = 45


# hypothesis checks

class NoSuitableU(AdelicImageError):
    """Internal signal: no auxiliary unit satisfies the search conditions.

    The checking routines catch this and report an Unknown status; it is
    exported because callers may want to trigger the same short-circuit.
    """

    exit_code = 50


class LevelsNotCoprime(AdelicImageError):
    exit_code = 51


class LocalFieldTooBig(AdelicImageError):
    exit_code = 52


class BadInput(AdelicImageError):
    exit_code = 2
