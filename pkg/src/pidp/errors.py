"""Exception types shared across the package."""


class PidpError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveParameter(PidpError):
    """A physical constant (mass, length, gravity) is zero or negative."""


class AdmissibilityViolation(PidpError):
    """The mass/length ratios hit one of the excluded degenerate surfaces.

    Carries which of the three conditions failed (1, 2 or 3) and both sides
    of the cross-multiplied equality that triggered it.
    """

    def __init__(self, condition, lhs, rhs):
        self.condition = int(condition)
        self.lhs = float(lhs)
        self.rhs = float(rhs)
        super().__init__(
            f"parameter ratio condition {self.condition} violated: "
            f"{self.lhs!r} == {self.rhs!r} within tolerance"
        )


class NonFiniteState(PidpError):
    """A state vector contains NaN or infinity."""


class NonFiniteEvaluation(PidpError):
    """A vector field returned NaN or infinity at a probe point."""


class DepthExceeded(PidpError):
    """A bracket word is deeper than the configured maximum."""


class SingularOnGamma(PidpError):
    """The 2x2 omega-system is singular: the point sits on the Gamma stratum."""


class EmptyReport(PidpError):
    """A verdict was requested from a report with no sampled points."""


class ParameterMisuse(PidpError):
    """An operation was called outside its documented precondition."""


class BlowUp(PidpError):
    """A trajectory component exceeded the configured bound.

    ``trajectory`` holds the partial result up to the last finite sample
    (may be None for single-state flows); ``time`` is the integration time
    at which the bound was crossed.
    """

    def __init__(self, message, trajectory=None, time=None):
        self.trajectory = trajectory
        self.time = time
        super().__init__(message)


class NegativeTimeInAttainableMode(PidpError):
    """A flow word requested negative time while composing attainable sets."""


class ScheduleNotZero(PidpError):
    """An uncontrolled-only diagnostic was applied to a controlled trajectory."""


class ConfigError(PidpError):
    """A run configuration is malformed (unknown key, bad type, bad value)."""
