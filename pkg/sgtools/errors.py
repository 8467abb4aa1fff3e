"""Exceptions raised by sgtools.

The three base classes map onto the CLI exit codes; every named failure is a
subclass so callers may catch either the specific error or the built-in
``ValueError``/``RuntimeError``/``ArithmeticError`` it derives from.
"""


class SgToolsError(Exception):
    exit_code = 1


class ConfigError(SgToolsError, ValueError):
    exit_code = 2


class DataError(SgToolsError, RuntimeError):
    exit_code = 3


class NumericError(SgToolsError, ArithmeticError):
    exit_code = 4


# config
class InfeasibleConfig(ConfigError):
    pass


class KTooLarge(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class ShapeMismatch(ConfigError):
    pass


# data
class ParseError(DataError):
    pass


class SchemaVersionMismatch(DataError):
    pass


class IoError(DataError):
    pass


class CheckpointMismatch(DataError):
    pass


class EmptyObject(DataError):
    pass


class ObjectOutOfRange(DataError):
    pass


class NoCorrespondences(DataError):
    pass


class InsufficientCorrespondences(DataError):
    pass


class DisconnectedScenes(DataError):
    pass


class EmptyInput(DataError):
    pass


class EmptyCorrespondences(DataError):
    pass


class EmptyCloud(DataError):
    pass


class EmptyGroundTruth(DataError):
    pass


class EmptyBatch(DataError):
    pass


# numeric
class DegenerateConfiguration(NumericError):
    pass


class DivergenceDetected(NumericError):
    pass
