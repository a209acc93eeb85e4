class VlabError(Exception):
    """Base class for all library errors."""


class ConsistencyViolation(VlabError):
    """An oracle returned a violator set that meets its own argument."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ModeUnsupported(VlabError):
    """Exhaustive mode was requested on a ground set that is too large."""


class BudgetExceeded(VlabError):
    """An enumeration would exceed its configured budget."""


class RegimeUnsupported(VlabError):
    """Parameters fall outside the regime a construction supports."""


class NumericInstability(VlabError):
    """A floating-point decision was too close to call; use exact mode."""


class RuleInapplicable(VlabError):
    """A removal rule cannot be applied to this oracle or sample."""


class NotDimensionOne(VlabError):
    """Canonicalization precondition failed (not a dimension-1 violator space)."""


class StructureViolation(VlabError):
    """The layer construction met an element whose violators break the layering."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
