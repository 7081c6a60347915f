"""Exception hierarchy shared by every stage of the solver."""


class BurgersRBError(Exception):
    """Base class for all package errors."""


class InvalidMeshError(BurgersRBError):
    pass


class ConformanceError(BurgersRBError):
    """A nodal vector does not match the dimension of its space."""


class RangeError(BurgersRBError):
    pass


class InvalidViscosityError(BurgersRBError):
    pass


class SingularSystemError(BurgersRBError):
    pass


class NewtonBreakdownError(BurgersRBError):
    pass


class NonConvergenceError(BurgersRBError):
    def __init__(self, step, iterations, message=None):
        self.step = step
        self.iterations = iterations
        super().__init__(
            message or f"Newton did not converge at step {step} after {iterations} iterations"
        )


class RankDeficiencyError(BurgersRBError):
    def __init__(self, requested, rank):
        self.requested = requested
        self.rank = rank
        super().__init__(f"requested {requested} modes but snapshot rank is {rank}")


class StagnationError(BurgersRBError):
    def __init__(self, size):
        self.size = size
        super().__init__(f"greedy selection stagnated at basis size {size}")


class CertificationUnavailableError(BurgersRBError):
    def __init__(self, step, a_inf):
        self.step = step
        self.a_inf = a_inf
        super().__init__(
            f"1/dt + C_inf = {a_inf:.3e} <= 0 at step {step}; decrease the time step"
        )


class InfeasibleLPError(BurgersRBError):
    pass


class CompatibilityError(BurgersRBError):
    pass


class ConfigError(BurgersRBError):
    pass
