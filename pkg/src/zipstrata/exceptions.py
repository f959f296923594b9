"""Exception hierarchy shared by all zipstrata modules."""


class ZipstrataError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ZipstrataError):
    """Invalid Cartan datum, field spec, or run configuration."""


class UsageError(ZipstrataError):
    """Operands from mismatched structures, malformed indices, etc."""


class ResourceCapError(ZipstrataError):
    """An enumeration would exceed the configured size cap."""


class ConsistencyError(ZipstrataError):
    """An internal invariant failed.

    This signals an implementation bug or a wrong structural assumption;
    it is never caught and repaired silently.
    """
