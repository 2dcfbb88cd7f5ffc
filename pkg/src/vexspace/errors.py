"""Exception hierarchy shared by every vexspace module."""


class VexError(Exception):
    """Base class for all vexspace errors."""


class GridError(VexError, ValueError):
    """Invalid grid construction or incompatible grids."""


class GridTooSmall(GridError):
    pass


class GridMismatch(GridError):
    pass


class OutOfDomain(GridError):
    pass


class FieldError(VexError, ValueError):
    """Sampled values violate a field invariant (non-finite, wrong size, bad exponent)."""


class FormatError(VexError, ValueError):
    """Malformed VEXF input."""


class DomainError(VexError, ValueError):
    """A scalar parameter lies outside the admissible range."""


class SupportViolation(VexError, ValueError):
    """A field that must vanish on the boundary margin does not."""


class SolverFailure(VexError, RuntimeError):
    pass


class OrderViolation(VexError, ValueError):
    def __init__(self, node, message):
        super().__init__(message)
        self.node = node


class HypothesisViolation(VexError, ValueError):
    """A theorem hypothesis (e.g. a lower exponent bound) is not met."""


class NoValidPairs(VexError, ValueError):
    pass


class EmptyCorpus(VexError, ValueError):
    pass
