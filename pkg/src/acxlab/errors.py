"""Exception types raised across the package."""


class AcxError(Exception):
    """Base class for all library errors."""


class NormTooLarge(AcxError):
    def __init__(self, norm, point=None, message=None):
        self.norm = float(norm)
        self.point = point
        super().__init__(message or f"spectral norm {self.norm:.6g} of A is not < 1 at {point}")


class SingularDenominator(AcxError):
    pass


class InverseFailure(AcxError):
    pass


class ChartNotNormalized(AcxError):
    pass


class EvaluationTooCloseToBoundary(AcxError):
    pass


class NoConvergence(AcxError):
    def __init__(self, message, history=()):
        self.history = list(history)
        super().__init__(message)


class IterateLeftChart(AcxError):
    pass


class OutsideDomain(AcxError):
    pass


class EmptyShell(AcxError):
    def __init__(self, scale, message=None):
        self.scale = float(scale)
        super().__init__(message or f"no admissible sample found at scale {self.scale:.3e}")


class TotallyRealFailure(AcxError):
    def __init__(self, point, sigma_min):
        self.point = point
        self.sigma_min = float(sigma_min)
        super().__init__(f"tangent space is not totally real at {point} (sigma_min={sigma_min:.3e})")


class AnchorOutsideCone(AcxError):
    pass
