"""Exception hierarchy shared by all gradstab modules."""


class GradStabError(Exception):
    """Base class for every error raised by gradstab."""


class PoleError(GradStabError, ValueError):
    """Gamma evaluated at a nonpositive integer."""


class DomainError(GradStabError, ValueError):
    """Argument outside the domain where a formula is stated."""


class AccuracyError(GradStabError, ArithmeticError):
    """No evaluation regime reached the requested accuracy."""


class ResolutionError(GradStabError, ValueError):
    """Sampled data is too coarse for the requested truncation."""


class GapError(GradStabError, ValueError):
    """The spectrum has an eigenvalue inside the excluded band (-beta, 0)."""


class GridError(GradStabError, ValueError):
    """A forcing grid does not refine the output time grid."""


class DesignError(GradStabError, ValueError):
    """A feedback design does not produce a strictly stable closed loop."""
