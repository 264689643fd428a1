"""Exception types raised across the package."""


class CVDGError(Exception):
    """Base class for all package errors."""


class InvalidStateError(CVDGError, ValueError):
    """Covariance matrix or state violates a physical validity condition."""


class VacuumSubtractionError(CVDGError, ValueError):
    """Photon subtraction from a mode carrying no photons."""


class DegenerateNoiseError(CVDGError, ValueError):
    """Classical-noise covariance vanishes, so its density is a delta."""


class CutoffError(CVDGError, RuntimeError):
    """Fock-space truncation loses more probability than allowed."""
