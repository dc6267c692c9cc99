"""Exception hierarchy shared across the package."""
from __future__ import annotations


class SpreadfrontError(Exception):
    """Base class for all package errors."""


class DomainError(SpreadfrontError, ValueError):
    """Inputs outside the weak-competition regime or otherwise invalid."""


class ConfigError(SpreadfrontError, ValueError):
    """Malformed or inconsistent experiment configuration."""


class NumericalError(SpreadfrontError, RuntimeError):
    """Generic numerical failure (lost bracket, NaN, bound violation)."""


class SpeedOutOfRange(DomainError):
    """Requested wave speed outside the solvable interval."""


class NonConvergence(NumericalError):
    """Iteration cap reached before meeting the tolerance."""


class BracketError(NumericalError):
    """A root/threshold bracket did not behave monotonically."""


class QuadratureError(NumericalError):
    """Kernel integrals lost accuracy (overflow/NaN guard)."""


class FitError(NumericalError):
    """Tail-decay fit inconsistent between components."""


class StepRejected(NumericalError):
    """Time step produced a retreating front."""


class CFLViolation(NumericalError):
    """Explicit terms exceed the stability budget at the minimum step."""


class BlowUp(NumericalError):
    """Shooting trajectory left the physical window."""


class UndecidedAtHorizon(SpreadfrontError, RuntimeError):
    """Classification horizon too short to decide spreading vs vanishing."""
