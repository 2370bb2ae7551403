"""Shared exception and warning types."""


class DomainError(ValueError):
    """A point or parameter lies outside its admissible region."""


class DegreeError(ValueError):
    """An index, order or derivative exceeds the truncation degree."""


class ShapeMismatchError(ValueError):
    """Operands do not share the same space or truncation degree."""


class ConditioningError(ValueError):
    """Gram-Schmidt residual fell below the degeneracy threshold."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class DeflationError(ValueError):
    """A remainder did not vanish at its node, so dividing out the zero is unsafe."""


class SingularityError(ValueError):
    """Evaluation requested too close to a pole."""


class DegenerateQueryError(ValueError):
    """Zero-space kernel queried at (or within merge tolerance of) one of its zeros."""


class UnsupportedSpaceError(ValueError):
    """Operation is defined only for the unweighted (classical) space."""


class DivergenceRiskError(ValueError):
    """Random coefficients decay too slowly for a finite space norm."""


class ConfigError(ValueError):
    """Invalid task configuration; the message carries a JSON-pointer style location."""


class DegenerateTupleWarning(UserWarning):
    """Energy was computed on the maximal well-conditioned prefix of a node tuple."""
