class EigratioError(Exception):
    """Mixin shared by every error raised on purpose inside eigratio."""


class InvalidArgumentError(EigratioError, ValueError):
    pass


class InvalidParameterError(InvalidArgumentError):
    pass


class GeometryError(EigratioError, ValueError):
    pass


class GenerationFailedError(EigratioError, RuntimeError):
    def __init__(self, message, stage=None, attempts=None):
        super().__init__(message)
        self.stage = stage
        self.attempts = attempts


class MeshTooCoarseError(EigratioError, ValueError):
    pass


class NumericalError(EigratioError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, partial=None, residuals=None):
        super().__init__(message)
        self.partial = partial  # Spectrum built from whatever pairs did converge
        self.residuals = residuals


class DomainError(EigratioError, ValueError):
    pass


class DegenerateEigenvalueError(EigratioError, ValueError):
    pass
