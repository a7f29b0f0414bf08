"""Exception types raised across the package."""


class InvalidParameters(ValueError):
    """A parameter set violates a model invariant."""


class ConditionViolated(ValueError):
    """An equilibrium existence condition fails, so the closed forms are not valid."""

    def __init__(self, message, slacks=None):
        super().__init__(message)
        self.slacks = slacks or {}


class TransitionOutOfRange(InvalidParameters):
    """A strategy parameter combination yields a transition probability outside [0, 1]."""

    def __init__(self, branch, value):
        super().__init__(f"transition probability {value!r} outside [0, 1] on branch {branch}")
        self.branch = branch
        self.value = value


class SingularSystem(ArithmeticError):
    pass


class TruncationError(ValueError):
    """The simulation horizon is too short for the requested tail tolerance."""


class DimensionCapExceeded(ValueError):
    pass


class NotAnEquilibrium(ValueError):
    pass
