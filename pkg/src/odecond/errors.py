"""Exception types shared across the package."""


class OdecondError(Exception):
    """Base class for all errors raised by odecond."""


class NonDiagonalizable(OdecondError):
    """The matrix is defective to working tolerance.

    Raised when the eigenvector matrix is so ill conditioned that the
    simple-eigenvalue theory implemented here does not apply.
    """


class AmbiguousGrouping(OdecondError):
    """A real-part gap falls inside the grouping tolerance's gray band.

    The spectrum partition would change under a small change of tolerance,
    so the caller must pick a tolerance explicitly instead of trusting a
    silent choice.
    """


class ZeroProjection(OdecondError):
    """A spectral projection w u vanishes, so its polar angle is undefined.

    The asymptotic theory assumes the projection of the initial value onto
    the rightmost block is nonzero.
    """


class DegenerateConstant(OdecondError):
    """The oscillation profile is exactly constant; extremizers are undefined."""


class UnsupportedBlock(OdecondError):
    """An eigenvalue group is not a simple real eigenvalue or a simple
    conjugate pair, so the per-block formulas do not apply."""


class BranchLost(UserWarning):
    """Continuation could not follow a stationary branch across a step.

    Emitted as a warning: the traced polylines remain valid, one of them
    just ends early.
    """
