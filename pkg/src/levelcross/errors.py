"""Exception hierarchy shared by every levelcross module."""


class LevelCrossError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(LevelCrossError, ValueError):
    """A physical or numerical parameter is out of its allowed range."""


class DegeneratePointError(LevelCrossError, ArithmeticError):
    """Evaluation at (or numerically at) the level-crossing point r = 0."""


class InvalidPathError(LevelCrossError, ValueError):
    """A parameter path violates a precondition (cyclicity, constant angle, ...)."""


class UndefinedPhaseError(LevelCrossError, ArithmeticError):
    """The phase of a vanishing overlap was requested."""


class ConfigError(LevelCrossError, ValueError):
    """An experiment configuration failed validation."""
