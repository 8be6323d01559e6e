"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Malformed or inconsistent model / experiment description."""


class AssumptionError(ValueError):
    """A standing model assumption (A1..A8) is violated.

    ``assumption`` names the violated assumption so callers (the CLI in
    particular) can report it and map it to a stable exit code.
    """

    def __init__(self, assumption: str, message: str):
        super().__init__(f"{assumption}: {message}")
        self.assumption = assumption


class DareError(RuntimeError):
    """Riccati fixed-point iteration failed to converge.

    Usually signals an unstabilizable (A, B) pair; callers either surface
    the failing block or treat the parameter as outside the admissible set.
    """


class TrajectoryDiverged(RuntimeError):
    """Closed-loop state norm exceeded the blow-up guard."""

    def __init__(self, t: int, norm: float):
        super().__init__(f"state norm {norm:.3e} exceeded blow-up guard at t={t}")
        self.t = t
        self.norm = norm
