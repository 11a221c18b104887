"""Exception types shared across the package."""


class TiltmpcError(Exception):
    """Base class for package errors."""


class SingularAttitudeError(ValueError):
    """Pitch angle too close to +-90 deg for the Euler-rate map."""


class AllocationRankError(TiltmpcError):
    """Effectiveness matrix lost full row rank (degenerate geometry)."""


class RiccatiConvergenceError(TiltmpcError):
    """Discrete Riccati iteration did not reach the requested residual."""


class ConfigError(TiltmpcError):
    """Bad configuration file: syntax, unknown key, or domain violation."""


class EmptyTraceError(TiltmpcError):
    """Metrics requested on an episode trace with no steps."""
