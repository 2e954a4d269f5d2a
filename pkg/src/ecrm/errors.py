"""Exception types shared across the package."""


class EcrmError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(EcrmError):
    """A file could not be parsed; message carries path and line number."""


class NumericalError(EcrmError):
    """A numerical procedure broke down (e.g. factorization failure)."""
