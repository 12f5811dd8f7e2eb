"""Exception hierarchy for the L-index toolkit."""
from __future__ import annotations


class LIndexError(Exception):
    """Base class for every error raised by the toolkit."""


class EvaluatorFailure(LIndexError):
    """A function or weight evaluator raised or returned a non-finite value."""


class DegenerateRadius(LIndexError, ValueError):
    """A radius component is zero or negative."""


class UnsupportedFamily(LIndexError):
    """The function representation has no rule for the requested operation."""


class SkeletonOutsideDomain(LIndexError, ValueError):
    """A sampling torus or polydisc leaves the open bidisc."""


class DomainViolation(LIndexError, ValueError):
    """A parameter lies outside the range an operation is defined on."""


class TruncationUnsound(LIndexError):
    """The truncated degree range cannot certify the result."""


class NoNonzeroCoefficient(LIndexError, ValueError):
    """A coefficient sequence contains no nonzero entry."""


class IterationOverrun(LIndexError, RuntimeError):
    """The main-polynomial search did not stop within its iteration budget."""


class SpecError(LIndexError, ValueError):
    """A function or weight spec file is missing, malformed or names an unknown family."""


class AliasWarning(UserWarning):
    """Cauchy extraction left a top-band mass above the alias threshold."""


__all__ = [
    'LIndexError', 'EvaluatorFailure', 'DegenerateRadius', 'UnsupportedFamily',
    'SkeletonOutsideDomain', 'DomainViolation', 'TruncationUnsound',
    'NoNonzeroCoefficient', 'IterationOverrun', 'SpecError', 'AliasWarning',
]
