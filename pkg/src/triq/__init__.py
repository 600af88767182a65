"""Pairwise correlation anisotropy, monogamy relations and frame-free secret sharing for three qubits."""

from .correlations import AnisotropyProfile, SpinSpectrum, corr_matrix, decompose, pair_profile, profile, spectrum
from .qstate import (
    CanonicalParams,
    DensityMatrix,
    NoiseParams,
    PureState3,
    StateFormatError,
    ValidationError,
    depolarize,
    from_canonical,
    ghz,
    haar_random_pure,
    partial_trace,
    w_state,
)

__version__ = "0.1.0"

__all__ = [
    "AnisotropyProfile",
    "CanonicalParams",
    "DensityMatrix",
    "NoiseParams",
    "PureState3",
    "SpinSpectrum",
    "StateFormatError",
    "ValidationError",
    "corr_matrix",
    "decompose",
    "depolarize",
    "from_canonical",
    "ghz",
    "haar_random_pure",
    "pair_profile",
    "partial_trace",
    "profile",
    "spectrum",
    "w_state",
]
