"""Exception hierarchy shared by all frontlab modules."""


class FrontlabError(Exception):
    """Base class for every error raised by frontlab."""


class DomainError(FrontlabError, ValueError):
    """An argument lies outside the domain of the operation."""


class HypothesisError(FrontlabError):
    """The model does not satisfy the bistable/damping hypotheses."""

    def __init__(self, report):
        self.report = report
        failed = ", ".join(c.name for c in report.clauses if not c.passed)
        super().__init__(f"hypothesis check failed: {failed}")


class NumericalError(FrontlabError):
    """An integrator, solver or quadrature did not deliver a usable result."""


class BracketError(NumericalError):
    """No sign change of the shooting mismatch was found."""


class RegionError(FrontlabError, ValueError):
    """A spectral parameter lies outside the consistent-splitting region."""


class ConsistencyError(NumericalError):
    """Two independent evaluations of the same quantity disagree."""


class SplittingError(NumericalError):
    """The asymptotic matrices fail to split hyperbolically at a sample."""


class ResolutionError(NumericalError):
    """Contour sampling could not resolve the argument of a function."""


class ContourError(NumericalError):
    """The contour passes through (or too close to) a zero."""


class AdmissibilityError(FrontlabError, ValueError):
    """A candidate function is not strictly increasing."""


class CFLError(FrontlabError, ValueError):
    """A time step violates the stability restriction."""


class ConfigError(FrontlabError, ValueError):
    """Malformed run configuration."""


class DependencyError(FrontlabError):
    """A requested export needs a result that has not been computed."""
