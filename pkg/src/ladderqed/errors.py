"""Exception types raised across the package.

Everything derives from :class:`LadderQEDError` (itself a ``ValueError``),
so callers can catch broadly or per failure mode.
"""


class LadderQEDError(ValueError):
    """Base class for all errors raised by this package."""


class ParameterError(LadderQEDError):
    """Physical parameters or indices outside their allowed domain."""


class DegenerateAngleError(LadderQEDError):
    """Eigenmode angle undefined (rung coupling and spin-orbit term both zero)."""


class BandEdgeError(LadderQEDError):
    """Markovian rate requested at a point of vanishing group velocity."""


class RegimeError(LadderQEDError):
    """Operation invoked outside its validity regime (e.g. detuning not below the band)."""


class AssemblyError(LadderQEDError):
    """Emitter/lattice assembly is inconsistent (point collisions across emitters)."""


class IntegrationError(LadderQEDError):
    """Time integration or quadrature failed its accuracy contract."""


class OracleSizeError(LadderQEDError):
    """Dense verification oracle requested for a system too large to diagonalize."""


class ChiralityUndefinedError(LadderQEDError):
    """Directional intensities vanish; the chiral factor is undefined."""


class ConfigError(LadderQEDError):
    """Experiment configuration is malformed or fails validation."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
