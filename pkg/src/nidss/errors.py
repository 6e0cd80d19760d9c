"""Typed errors shared across the package.

The service layer maps these onto HTTP error codes, so inference failures
("the model says this evidence is impossible") must stay distinguishable
from malformed input ("that state label does not exist").
"""


class NidssError(Exception):
    """Base class for all package errors."""


class InvalidNetworkError(NidssError, ValueError):
    """A network (or DBN specification) violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IncompleteAssignmentError(NidssError, ValueError):
    """A full joint assignment was required but some variable is unbound."""


class ImpossibleEvidenceError(NidssError, ValueError):
    """The model assigns probability exactly zero to the given evidence.

    Raised on an exact zero, never on numerical underflow: inference
    rescales intermediate factors so a vanishing normaliser can only come
    from structurally impossible evidence.
    """


class EnumerationLimitError(NidssError, ValueError):
    """The joint state space exceeds the brute-force enumeration cutoff."""


class SchemaMismatchError(NidssError, ValueError):
    """A data value does not belong to the declared state set of a variable."""

    def __init__(self, variable, value, message=None):
        self.variable = variable
        self.value = value
        super().__init__(
            message or f"value {value!r} is not a state of variable {variable!r}"
        )


class BinningError(NidssError, ValueError):
    """A raw numeric value falls outside every declared bin."""

    def __init__(self, variable, value):
        self.variable = variable
        self.value = value
        super().__init__(f"value {value!r} of {variable!r} falls outside all bins")


class FormatError(NidssError, ValueError):
    """An input file does not match its declared layout (headers, JSON shape)."""


class ComparisonError(NidssError, ValueError):
    """Two models cannot be compared because their structures differ."""
