"""Exception hierarchy shared by every module."""


class RobustSysIDError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(RobustSysIDError, ValueError):
    pass


class NotSymmetric(RobustSysIDError, ValueError):
    pass


class NonConvergence(RobustSysIDError, RuntimeError):
    pass


class NotPositiveDefinite(RobustSysIDError, ValueError):
    """Raised when a Cholesky pivot falls below the relative threshold.

    ``index`` holds the position of the offending matrix when a stack of
    matrices was factored at once, otherwise ``None``.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularCovariance(NotPositiveDefinite):
    """Empirical covariance of the regressors is (numerically) singular."""


class JensenViolation(RobustSysIDError, ValueError):
    pass


class EtaTooLarge(RobustSysIDError, ValueError):
    pass


class TooFewTrajectories(RobustSysIDError, ValueError):
    pass


class InfeasiblePlan(RobustSysIDError, ValueError):
    pass


class EmptyGroup(RobustSysIDError, ValueError):
    pass


class ConfigError(RobustSysIDError, ValueError):
    pass
