"""Exception hierarchy shared by all disktree modules."""


class DisktreeError(Exception):
    """Base class for all errors raised by this package."""


class PoleError(DisktreeError):
    """A gamma/Pochhammer factor was evaluated at or across a pole."""


class NoConvergence(DisktreeError):
    """A series or iteration hit its term/iteration budget before converging."""


class DomainError(DisktreeError):
    """Arguments lie outside the convergence/validity domain of the routine."""


class BranchError(DisktreeError):
    """Evaluation point sits exactly on an excluded branch cut."""


class DegenerateError(DisktreeError):
    """Configuration is degenerate (coincident lines, flat polygon, ...)."""


class ParallelSidesError(DisktreeError):
    """Quadrilateral has a pair of parallel sides; series formulas do not apply."""


class RangeError(DisktreeError):
    """Parameter outside the admissible range of an edge or strip."""


class QuadratureError(DisktreeError):
    """Adaptive quadrature failed to reach the target accuracy."""


class NoBracket(DisktreeError):
    """Root bracketing failed: residual has equal signs at both endpoints."""


class ParseError(DisktreeError):
    """Scenario or report file is malformed."""
