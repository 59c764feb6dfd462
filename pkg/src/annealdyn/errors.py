"""Exception types shared by the solvers, the fitter and the CLI."""


class AnnealDynError(Exception):
    """Base class for all package errors."""


class ConfigError(AnnealDynError, ValueError):
    """Invalid model, schedule, grid or run configuration."""


class NumericalBlowUp(AnnealDynError, FloatingPointError):
    """A non-finite value appeared while integrating the two-time equations."""

    def __init__(self, t, dt, solver=""):
        self.t = t
        self.dt = dt
        self.solver = solver
        super().__init__(
            f"{solver or 'solver'}: non-finite value in row t={t:.6g} (dt={dt:g}); "
            "try a smaller time step"
        )


class MemoryCapError(AnnealDynError, MemoryError):
    """The two-time grids would exceed the configured memory cap."""

    def __init__(self, required_bytes, cap_bytes):
        self.required_bytes = int(required_bytes)
        self.cap_bytes = int(cap_bytes)
        super().__init__(
            f"run needs ~{required_bytes / 2**20:.1f} MiB for the two-time grids, "
            f"cap is {cap_bytes / 2**20:.1f} MiB"
        )


class FitIllPosed(AnnealDynError, ValueError):
    """The power-law fit has no well-defined optimum for the given data."""
