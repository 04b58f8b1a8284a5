"""Exception types shared across the package."""


class SubsetSketchError(Exception):
    """Base class for errors raised by this package."""


class UniverseTooLarge(SubsetSketchError):
    """Exact search requested on a universe beyond the supported budget."""


class UniverseMismatch(SubsetSketchError):
    """Two set systems over different universes were combined."""


class QueryNotInSystem(SubsetSketchError):
    """A query set is not a member of the declared set system."""


class StreamLengthExceeded(SubsetSketchError):
    """More updates arrived than the declared stream-length bound."""


class DuplicateEntry(SubsetSketchError):
    """An entry-wise stream delivered the same coordinate twice."""


class UnknownKind(SubsetSketchError):
    """Unrecognized generator kind."""


class ModelMismatch(SubsetSketchError):
    """Stream model is incompatible with the requested sketch."""


class StreamFormatError(SubsetSketchError):
    """Malformed stream or sets file."""
