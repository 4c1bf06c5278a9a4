"""Exception hierarchy shared by all modules."""


class ThetaDetError(Exception):
    """Base class for every error raised by this package."""


class InputError(ThetaDetError, ValueError):
    """Malformed or out-of-domain user input."""


# core
class PositivityError(InputError):
    pass


class DivisibilityError(InputError):
    pass


class AsymmetryError(InputError):
    pass


class NotPositiveDefiniteError(InputError):
    pass


class SingularSystemError(ThetaDetError):
    pass


class DegenerateBasisError(InputError):
    pass


# theta
class ConvergenceError(ThetaDetError):
    pass


class MembershipError(InputError):
    pass


# symplectic
class NotSymplecticError(InputError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonIntegralError(ThetaDetError):
    pass


class DiagramMismatchError(ThetaDetError):
    pass


class NotFoundError(ThetaDetError):
    """Bounded generator search exhausted its budget."""


# transform
class IllConditionedError(ThetaDetError):
    pass


class CapExceededError(InputError):
    pass


class NotBijectiveError(ThetaDetError):
    pass


class ClassificationError(ThetaDetError):
    """A measured determinant violates the asserted root-of-unity order."""

    def __init__(self, message, det=None, order=None):
        super().__init__(message)
        self.det = det
        self.order = order


# fibration
class HypothesisError(InputError):
    pass


class IdentityViolation(ThetaDetError):
    """An identity that should hold exactly (up to tolerance) failed."""
