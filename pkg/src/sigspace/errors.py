"""Exception types shared across the package."""


class SigspaceError(Exception):
    """Base class for all sigspace errors."""


class DegenerateForm(SigspaceError):
    """A form that was required to be a scalar product is (numerically) degenerate."""


class MinorBreakdown(SigspaceError):
    """A leading principal minor vanishes, so the minor-based signature formula fails."""


class SingularGroupElement(SigspaceError):
    """A matrix that must be invertible is (numerically) singular."""


class SignatureMismatch(SigspaceError):
    """Two forms that must share a signature do not."""


class NotInvariantSubspace(SigspaceError):
    """Conjugation by the group element leaves the span of the given algebra basis."""


class UnsupportedDimension(SigspaceError):
    """A closed-form expression is only available in low dimensions."""


class EmptyDomain(SigspaceError):
    """No Monte-Carlo sample passed the signature filter."""


class SingularFrame(SigspaceError):
    """A point frame (tangent-space isomorphism) is singular."""


class PointNotInField(SigspaceError):
    """A diffeomorphism maps a sample point outside the sampled field."""


class GridTooCoarse(SigspaceError):
    """The sample grid does not reach the unit-ball boundary."""


class LabelNotContained(SigspaceError):
    """Embedding/restriction requested between non-nested labels."""


class MissingPoint(SigspaceError):
    """A label references a point absent from the state field."""


class LinearlyDependentInput(SigspaceError):
    """Gram matrix of the input functions is too ill-conditioned to orthonormalize."""


class QuadratureDomainTooSmall(SigspaceError):
    """Estimated boundary contribution outside the quadrature window is too large."""
