"""Typed errors shared across the package."""


class ColdpaError(Exception):
    """Base class for all package errors."""


class ConfigError(ColdpaError):
    """Bad or inconsistent run configuration."""


class DimensionError(ColdpaError):
    """Unit conversion across incompatible dimensions."""


class DomainError(ColdpaError):
    """Argument outside the physical domain of an operation."""


class RangeError(DomainError):
    """Coordinate outside the declared working range."""


class CalibrationError(ColdpaError):
    """Curve crossing absent, ambiguous, or calibration target unreachable."""


class GridCapacityError(ColdpaError):
    """Grid cannot represent the requested local momentum."""


class GridMismatchError(ColdpaError):
    """Operands defined on different grids."""


class ResolutionError(ColdpaError):
    """Eigenvalues drift under grid refinement; grid too coarse."""


class SpectralBoundsError(ColdpaError):
    """Propagator spectral bounds violated by the actual Hamiltonian."""


class NumericsError(ColdpaError):
    """Internal numerical failure (non-convergence, overflow guard)."""
