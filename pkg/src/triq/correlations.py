"""Bloch vectors, spin correlation matrices and the isotropic/anisotropic split of S = T T^T."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .jacobi import eigvalsh3
from .qstate import PAULIS, DensityMatrix, PureState3, ValidationError, partial_trace

CLAMP_TOL = 1e-12

# PAULI_PAIRS[j, k] = sigma_j (x) sigma_k
PAULI_PAIRS = np.array([[np.kron(p, q) for q in PAULIS] for p in PAULIS])
_LEFT = np.array([np.kron(p, np.eye(2)) for p in PAULIS])
_RIGHT = np.array([np.kron(np.eye(2), p) for p in PAULIS])


class SpinSpectrum(NamedTuple):
    """Eigenvalues s1 >= s2 >= s3 >= 0 of S = T T^T."""

    s1: float
    s2: float
    s3: float


@dataclass(frozen=True)
class AnisotropyProfile:
    s_iso: float
    ds1: float
    ds2: float
    ds3: float
    g1: float
    g2: float
    s_ani: float
    V_ani: float

    @property
    def deltas(self) -> tuple[float, float, float]:
        return (self.ds1, self.ds2, self.ds3)

    def as_dict(self) -> dict:
        return asdict(self)


def _two_qubit(rho) -> np.ndarray:
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if data.shape != (4, 4):
        raise ValidationError(f"expected a two-qubit density matrix, got shape {data.shape}")
    return data


def bloch_vectors(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vectors (a, b) of the first and second qubit."""
    data = _two_qubit(rho)
    a = np.einsum("jxy,yx->j", _LEFT, data).real
    b = np.einsum("jxy,yx->j", _RIGHT, data).real
    return a, b


def corr_matrix(rho: DensityMatrix) -> np.ndarray:
    """T[j, k] = tr[rho sigma_j (x) sigma_k]."""
    data = _two_qubit(rho)
    return np.einsum("jkxy,yx->jk", PAULI_PAIRS, data).real


def spectrum(T) -> SpinSpectrum:
    T = np.asarray(T, dtype=float)
    if T.shape != (3, 3):
        raise ValidationError(f"correlation matrix must be 3x3, got {T.shape}")
    s = [0.0 if -CLAMP_TOL < x < 0.0 else x for x in eigvalsh3(T @ T.T)]
    return SpinSpectrum(*s)


def decompose(spec: SpinSpectrum) -> AnisotropyProfile:
    s1, s2, s3 = spec
    if not s1 >= s2 >= s3:
        raise ValidationError(f"spectrum {tuple(spec)} is not ordered")
    s_iso = (s1 + s2 + s3) / 3
    d1, d2, d3 = s1 - s_iso, s2 - s_iso, s3 - s_iso
    return AnisotropyProfile(
        s_iso=s_iso,
        ds1=d1,
        ds2=d2,
        ds3=d3,
        g1=s1 - s2,
        g2=s2 - s3,
        s_ani=float(np.sqrt(d1 * d1 + d2 * d2 + d3 * d3)),
        V_ani=d1 * d2 * d3,
    )


def profile(rho: DensityMatrix) -> AnisotropyProfile:
    return decompose(spectrum(corr_matrix(rho)))


def pair_profile(state: PureState3 | DensityMatrix, pair: str) -> AnisotropyProfile:
    return profile(partial_trace(state, pair))


def batched_spectra(T: np.ndarray) -> np.ndarray:
    """Descending S-spectra for a stack of correlation matrices of shape (n, 3, 3).

    LAPACK-backed; used in optimization loops where many small solves are needed.
    """
    S = T @ np.swapaxes(T, -1, -2)
    s = np.linalg.eigvalsh(S)[..., ::-1]
    return np.where((s < 0) & (s > -CLAMP_TOL), 0.0, s)


def batched_corr(rhos: np.ndarray) -> np.ndarray:
    return np.einsum("jkxy,nyx->njk", PAULI_PAIRS, rhos).real
