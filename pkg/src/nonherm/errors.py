"""Exception hierarchy shared by all modules."""


class NonHermError(Exception):
    """Base class for all package errors."""


# --- Dyson solver -------------------------------------------------------

class NoValidRoot(NonHermError):
    """No cubic root satisfies the sign condition (solver bug, not a domain case)."""


class DivergedContinuation(NonHermError):
    """Homotopy continuation from the large-|w| asymptotic root failed."""


class SingularM(NonHermError):
    """A deterministic approximation matrix is numerically singular."""


class QuadratureFailure(NonHermError):
    """Density quadrature cannot reach the requested mass below the edge."""


# --- Spectral decompositions -------------------------------------------

class EigenSolverFailure(NonHermError):
    pass


class SvdFailure(NonHermError):
    pass


class IndexOutOfRange(NonHermError, IndexError):
    pass


# --- Resolvent chains ---------------------------------------------------

class ZeroEta(NonHermError):
    """Resolvent requested at eta = 0."""


class MismatchedSource(NonHermError):
    """Two-resolvent chain built from factories with different source matrices."""


# --- Stability operator -------------------------------------------------

class SingularStability(NonHermError):
    """The 2x2 reduction system for the stability operator is singular."""


class DegenerateEigenvectors(NonHermError):
    """Closed-form eigenvector denominators vanish; numerical fallback applies."""


# --- Characteristic flow ------------------------------------------------

class CrossedZero(NonHermError):
    """The characteristic flow reached eta = 0 before the requested time."""

    def __init__(self, t_star, message=None):
        self.t_star = t_star
        super().__init__(message or f"flow touched the real axis at t = {t_star}")


class NoBracket(NonHermError):
    """Implicit-relation root-finding has no valid bracket (t beyond lifetime)."""


class ShootingFailure(NonHermError):
    """Backward shooting on the implicit relation failed to converge."""


# --- Experiments --------------------------------------------------------

class InsufficientPairs(NonHermError):
    """A separation bin holds too few eigenvalue pairs for a stable mean."""
