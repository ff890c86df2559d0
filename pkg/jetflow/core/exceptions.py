import logging


class ConfigurationError(Exception):
    """Raised when a run configuration or derived setup is invalid.

    Covers schema validation failures, geometry presets that violate the
    nozzle conditions, grids that are too coarse, and shooting brackets that
    cannot be found for the inlet profile.
    """

    exit_code: int = 2

    def __init__(self, message: str = "Invalid configuration."):
        logging.warning(message)
        super().__init__(message)


class DomainError(Exception):
    """Raised when an argument lies outside the mathematical domain of an operation.

    Examples are λ < λ₀ (negative pressure difference), heights outside
    [0, h], diagnostic balls leaving the computational domain, and probe
    columns outside the grid.
    """

    exit_code: int = 2

    def __init__(self, message: str = "Argument outside the admissible domain."):
        logging.warning(message)
        super().__init__(message)


class ProfileError(Exception):
    """Raised when an upstream velocity profile violates its structural conditions.

    The inlet velocity must be positive, flat at the bottom (u0'(0) = 0) and
    convex (u0'' >= 0).
    """

    exit_code: int = 2

    def __init__(self, message: str = "Upstream profile is not admissible."):
        logging.warning(message)
        super().__init__(message)


class ExtractionError(Exception):
    """Raised when the free boundary cannot be read as a graph y = k(x)."""

    exit_code: int = 1

    def __init__(self, message: str = "Free boundary is not a graph."):
        logging.error(message)
        super().__init__(message)


class SolverError(Exception):
    """Raised when the minimization does not converge or breaks an invariant.

    Carries the partial solve report when one is available so that callers
    can still write it out.
    """

    exit_code: int = 3

    def __init__(self, message: str = "Solver did not converge.", report=None):
        logging.error(message)
        self.report = report
        super().__init__(message)


class FitError(Exception):
    """Raised when the free-boundary speed cannot be fitted.

    Use this for an exhausted bracket cap, a degenerate bracket or an
    exhausted bisection budget.
    """

    exit_code: int = 3

    def __init__(self, message: str = "Continuous-fit search failed."):
        logging.error(message)
        super().__init__(message)
