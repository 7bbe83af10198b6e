"""Exception hierarchy.

Validation problems derive from :class:`ValueError`; failures of a numerical
method on otherwise valid input derive from :class:`NumericalError`.  The CLI
maps the two families to exit codes 1 and 2.
"""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class CutoffError(DomainError):
    """Evaluation inside the short-distance cutoff of a regularized kernel."""


class NormalizationError(ValueError):
    """Kernel does not satisfy the unit gradient-variance convention."""


class UnsupportedKernelError(ValueError):
    """Operation is not defined for this kind of kernel."""


class GeometryError(ValueError):
    """Inconsistent sampling geometry (domain, bins, radii)."""


class NumericalError(ArithmeticError):
    """A numerical method failed on valid input."""


class DegenerateMetricError(NumericalError):
    pass


class EmbeddingError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass
