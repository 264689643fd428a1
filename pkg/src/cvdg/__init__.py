"""Single-photon addition and subtraction on multimode Gaussian states."""

from .degauss import (DegaussedState, Negativity, Sign, SubtractionSpec, classify_negativity,
                      negativity_witness)
from .errors import (CVDGError, CutoffError, DegenerateNoiseError, InvalidStateError,
                     VacuumSubtractionError)
from .gaussian import GaussianState

__all__ = [
    "CVDGError", "CutoffError", "DegaussedState", "DegenerateNoiseError",
    "GaussianState", "InvalidStateError", "Negativity", "Sign", "SubtractionSpec",
    "VacuumSubtractionError", "classify_negativity", "negativity_witness",
]
