"""Exception types shared across the library."""


class LadmError(Exception):
    """Base class for all library errors."""


class AmbientMismatchError(LadmError):
    """Two bases live in ambient spaces of different dimension."""


class RankDeficiencyError(LadmError):
    """A genericity / full-rank precondition failed (right angles present
    where the construction needs all principal angles below pi/2)."""


class EnvelopeError(LadmError):
    """Cluster envelope indices or eigen-gap requirements are violated."""


class SpectrumSpecError(LadmError):
    """A synthetic spectrum specification is infeasible."""


class DomainError(LadmError):
    """Input matrix lies outside the admissible domain of an operation
    (missing gap, wrong sign assumption, perturbation too large)."""


class MembershipError(LadmError):
    """A basis expected to belong to the admissible class does not."""


class RankCollapseError(LadmError):
    """An iteration lost so much rank that the target dimension is gone."""
