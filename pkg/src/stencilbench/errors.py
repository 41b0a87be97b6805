"""Exception types shared across the package."""


class StencilBenchError(Exception):
    """Base class for package errors."""


class ConfigError(StencilBenchError):
    """Bad user configuration (CLI flags, config files, file formats)."""


class LaunchError(StencilBenchError):
    """A launch was rejected (resource gate, bad stencil radius, bad block)."""


class CflError(StencilBenchError):
    """Time step violates the scheme's CFL rule."""

    def __init__(self, dt: float, stable_dt: float):
        super().__init__(f"dt={dt:g} violates the CFL rule; largest stable dt is {stable_dt:g}")
        self.dt = dt
        self.stable_dt = stable_dt


class TraceError(StencilBenchError):
    """Malformed power trace or watt-meter reading."""
