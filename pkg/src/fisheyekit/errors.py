"""Exception hierarchy shared by all fisheyekit modules."""


class FisheyeError(Exception):
    """Base class for every error raised by fisheyekit."""


class ParameterError(FisheyeError, ValueError):
    """Model or configuration parameters violate their declared ranges."""


class DomainError(FisheyeError, ValueError):
    """A point, angle or radius lies outside the domain of a model."""


class DegenerateInput(FisheyeError, ValueError):
    """Input is geometrically degenerate (zero vector, parallel rays, ...)."""


class ShapeError(FisheyeError, ValueError):
    """Array or image dimensions do not match what the operation expects."""


class DegenerateData(FisheyeError):
    """A least-squares problem is rank deficient beyond what damping can fix."""


class ConvergenceError(FisheyeError):
    """An iterative solver hit its iteration cap.

    The best iterate found so far is attached as ``result`` when available.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class FormatError(FisheyeError, ValueError):
    """A file or text stream does not follow its documented format."""
