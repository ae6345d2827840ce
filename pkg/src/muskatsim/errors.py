"""Exception types shared across the package."""


class MuskatsimError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MuskatsimError):
    """Malformed numerical input (wrong size, NaN/Inf, bad parameter)."""


class GridError(InvalidInputError):
    """Grid construction or grid-compatibility failure."""


class SymmetryError(InvalidInputError):
    """Spectrum lacks the conjugate symmetry of a real profile."""


class RegimeError(InvalidInputError):
    """Physical parameters select no valid regime."""


class ConfigError(MuskatsimError):
    """Unparseable or inconsistent configuration input."""


class NumericsError(MuskatsimError):
    """A numerical routine produced non-finite values or lost accuracy."""


class NearSingularError(NumericsError):
    """A resolvent was requested too close to the symbol's range."""


class StagnationError(NumericsError):
    """Adaptive stepping drove dt below dt_min."""


class NearInterfaceError(InvalidInputError):
    """Field evaluation requested too close to the interface curve."""


class InsufficientDataError(NumericsError):
    """Not enough resolved content to form the requested diagnostic."""
