"""Exception types shared across the package.

Every guard that refuses a query (out-of-ball tree point, out-of-window
grid point, exceeded enumeration budget) raises a dedicated class so
callers can distinguish "you asked outside the precomputed region" from
genuine input errors.
"""


class HnnGeoError(Exception):
    """Base class for all package errors."""


class SingularMatrix(HnnGeoError):
    """An inclusion matrix has determinant zero."""


class ConjugacyMismatch(HnnGeoError):
    """phi does not conjugate the first inclusion onto the second."""


class UnknownLetter(HnnGeoError):
    """A word contains a token outside the generator alphabet."""


class UnsupportedPresentation(HnnGeoError):
    """Operation requires a specific presentation shape (e.g. the affine
    oracle needs rank 1 with identity first inclusion)."""


class NotWithinBudget(HnnGeoError):
    """Word-length BFS exhausted its radius budget before reaching the
    element.  Signals the search bound, not a computational failure."""


class BudgetExceeded(HnnGeoError):
    """Enumeration guard tripped (ball too large, too many grid nodes)."""


class OutsideBall(HnnGeoError):
    """Tree query involves a vertex outside the constructed ball."""


class OutsideWindow(HnnGeoError):
    """Warped-space query involves a point outside the grid window."""


class DegenerateGrid(HnnGeoError):
    """Grid step too large relative to the window (no interior nodes)."""


class FibreMismatch(HnnGeoError):
    """Tree height and warped-space height disagree beyond tolerance."""


class PathEscapesWindow(HnnGeoError):
    """A constructed path leaves the tree ball or the grid window."""


class InsufficientRange(HnnGeoError):
    """Exponent estimation needs more pairs or a wider distance span."""


class NoValidEnvelope(HnnGeoError):
    """All image distances vanish while distances do not; no positive
    lower envelope exists."""
