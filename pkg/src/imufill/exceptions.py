"""Exception hierarchy. Everything raised on bad data derives from ImputationError."""


class ImputationError(ValueError):
    """Base class for data-level failures in this package."""


class CaptureFormatError(ImputationError):
    """Input text does not describe a valid capture."""


class SerializationError(ImputationError):
    pass


class OverCompleteCaptureError(ImputationError):
    pass


class GridConflictError(ImputationError):
    """A placeholder timestamp does not fit between its neighbours."""


class NoNeighborsError(ImputationError):
    pass


class GapSpecError(ImputationError):
    pass


class ScoreError(ImputationError):
    pass
