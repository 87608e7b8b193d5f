"""Exception types shared across the solver."""


class AdmissibilityError(Exception):
    """A physical state left the admissible set (rho > 0, rho*e > 0).

    Carries enough location data to report which element/node failed and,
    when raised during time integration, the simulation time.
    """

    def __init__(self, message, element=None, node=None, time=None):
        super().__init__(message)
        self.element = element
        self.node = node
        self.time = time

    def __str__(self):
        loc = []
        if self.element is not None:
            loc.append(f"element {self.element}")
        if self.node is not None:
            loc.append(f"node {self.node}")
        if self.time is not None:
            loc.append(f"t = {self.time:.6g}")
        base = super().__str__()
        return f"{base} ({', '.join(loc)})" if loc else base


class IntegrationFailure(Exception):
    """Time integration could not continue (step size underflow).

    ``origin`` distinguishes a pure tolerance failure ("tolerance") from a
    cascade of inadmissible states ("admissibility"). ``time_reached`` is the
    last successfully integrated time.
    """

    def __init__(self, message, time_reached, origin="tolerance"):
        super().__init__(message)
        self.time_reached = time_reached
        self.origin = origin


class ConfigError(Exception):
    """A run configuration failed to parse or validate."""
