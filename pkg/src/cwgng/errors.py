"""Exception hierarchy.

Exit-code mapping used by the CLI: input/domain problems -> 2, internal
invariant violations -> 3, oracle acceptance failures -> 4.
"""


class CwgngError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class DomainError(CwgngError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 2


class NegativeDiscriminantError(DomainError):
    """1 - 4*C1*C2 < -1e-12: parameters outside the closed form's validity."""

    def __init__(self, disc, t, alpha, m):
        self.disc, self.t, self.alpha, self.m = disc, t, alpha, m
        super().__init__(
            f"negative discriminant 1-4*C1*C2={disc:.3e} at t={t}, alpha={alpha}, m={m}"
        )


class QuadratureError(CwgngError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, achieved, requested):
        self.achieved, self.requested = achieved, requested
        super().__init__(
            f"quadrature reached abs error {achieved:.3e} (requested {requested:.3e})"
        )


class SolverInvariantViolation(CwgngError):
    """A structural guarantee failed (e.g. no sign change where one must exist)."""

    exit_code = 3


class TangencyError(CwgngError):
    """Implicit branch derivative requested at (or too close to) a tangency."""

    exit_code = 2


class EmptyConeError(DomainError):
    """Forbidden cone requested for t below the critical time."""


class UnclassifiableError(DomainError):
    """Overshoot regime undefined on the boundary k(alpha) = 0."""


class TrifurcationNotFound(CwgngError):
    """No double-bifurcation window exists (signals h >= h_*)."""

    exit_code = 2


class ContradictionError(SolverInvariantViolation):
    """Two independent computations of the same quantity disagree."""


class TimelineValidationError(SolverInvariantViolation):
    """A bad-set probe disagrees with its segment label."""


class InsufficientAcceptanceError(CwgngError):
    """Monte Carlo conditioning accepted too few replicas."""

    exit_code = 4

    def __init__(self, accepted, needed=100):
        self.accepted, self.needed = accepted, needed
        super().__init__(
            f"only {accepted} replicas accepted (need >= {needed}); "
            "widen the window or raise the replica count"
        )
