"""Shot-level simulation of reference-frame-independent statistical secret sharing.

A bit is encoded in copies of a three-qubit state whose pairwise anisotropy
satisfies g1 > g2 (bit 0) or g1 < g2 (bit 1). Any two parties estimate their
correlation matrix T in whatever local frames they happen to hold, and decode
from the gaps of T T^T, which do not depend on those frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .correlations import decompose, pair_profile, spectrum
from .qstate import (
    I2,
    PAULIS,
    DensityMatrix,
    NoiseParams,
    PureState3,
    ValidationError,
    depolarize,
    ghz,
    partial_trace,
    w_state,
)

ORTHO_TOL = 1e-10
DEFAULT_MARGIN = 0.25
PAIRS = ("AB", "AC", "BC")


@dataclass(frozen=True)
class EncodingScheme:
    state0: PureState3
    state1: PureState3
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if self.margin <= 0:
            raise ValidationError("scheme margin must be positive")
        for pair in PAIRS:
            p0 = pair_profile(self.state0, pair)
            p1 = pair_profile(self.state1, pair)
            if not (p0.g1 > p0.g2 + self.margin and p0.ds2 < 0):
                raise ValidationError(f"state0 needs g1 > g2 + {self.margin} on {pair} (g1={p0.g1:.6g}, g2={p0.g2:.6g})")
            if not (p1.g1 + self.margin < p1.g2 and p1.ds2 > 0):
                raise ValidationError(f"state1 needs g1 + {self.margin} < g2 on {pair} (g1={p1.g1:.6g}, g2={p1.g2:.6g})")


def default_scheme() -> EncodingScheme:
    """GHZ for 0 (gaps 1, 0) and W for 1 (gaps 0, 1/3)."""
    return EncodingScheme(ghz(), w_state())


@dataclass(frozen=True)
class ShotRecord:
    """Outcome counts for the nine settings (j, k) of local axes.

    ``counts[j, k, x, y]`` counts outcome pairs with x, y indexing (+1, -1).
    Counts may be fractional for an exact (infinite-statistics) record.
    """

    counts: np.ndarray
    pair: str = "AB"
    frames: tuple = (np.eye(3), np.eye(3))

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (3, 3, 2, 2):
            raise ValidationError(f"shot record must cover the nine settings, got shape {c.shape}")
        if np.any(c < 0):
            raise ValidationError("counts must be non-negative")
        if np.any(c.sum(axis=(2, 3)) <= 0):
            missing = [(int(j) + 1, int(k) + 1) for j, k in zip(*np.nonzero(c.sum(axis=(2, 3)) <= 0))]
            raise ValidationError(f"settings without shots: {missing}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def shots(self) -> np.ndarray:
        return self.counts.sum(axis=(2, 3))

    def correlations(self) -> np.ndarray:
        """Empirical T[j, k] = mean product of the two outcomes."""
        signs = np.array([[1, -1], [-1, 1]])
        return np.einsum("jkxy,xy->jk", self.counts, signs) / self.shots


def _check_orthogonal(O) -> np.ndarray:
    O = np.asarray(O, dtype=float)
    if O.shape != (3, 3) or np.max(np.abs(O.T @ O - np.eye(3))) > ORTHO_TOL:
        raise ValidationError("frame must be a 3x3 orthogonal matrix")
    return O


def random_frame(rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of O(3), reflections included."""
    return stats.ortho_group.rvs(3, random_state=rng)


def _projector(axis: np.ndarray, outcome: int) -> np.ndarray:
    sigma = sum(n * p for n, p in zip(axis, PAULIS))
    return (I2 + outcome * sigma) / 2


def outcome_probabilities(rho: DensityMatrix, frames) -> np.ndarray:
    """Born probabilities P[j, k, x, y] for spin along column j of frames[0] and column k of frames[1]."""
    OA, OB = (_check_orthogonal(O) for O in frames)
    probs = np.empty((3, 3, 2, 2))
    for j in range(3):
        for k in range(3):
            for x, sx in enumerate((1, -1)):
                for y, sy in enumerate((1, -1)):
                    proj = np.kron(_projector(OA[:, j], sx), _projector(OB[:, k], sy))
                    probs[j, k, x, y] = np.trace(rho.data @ proj).real
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum(axis=(2, 3), keepdims=True)


def _reduced(state, pair: str, noise: NoiseParams) -> DensityMatrix:
    # a two-qubit input is taken to be the named pair already
    if isinstance(state, DensityMatrix) and state.dim == 4:
        return depolarize(state, noise.for_parties(pair))
    return depolarize(partial_trace(state, pair), noise.for_parties(pair))


def exact_record(state, pair: str = "AB", frames=(np.eye(3), np.eye(3)), noise: NoiseParams = NoiseParams()) -> ShotRecord:
    """Infinite-statistics record: counts equal to the Born probabilities."""
    return ShotRecord(outcome_probabilities(_reduced(state, pair, noise), frames), pair, tuple(frames))


def record_from_correlations(T) -> ShotRecord:
    """Infinite-statistics record of unpolarized qubits with correlation matrix T."""
    T = np.asarray(T, dtype=float)
    signs = np.array([[1, -1], [-1, 1]])
    counts = (1 + T[:, :, None, None] * signs) / 4
    return ShotRecord(counts)


def encode_bit(bit: int, scheme: EncodingScheme) -> PureState3:
    if bit not in (0, 1):
        raise ValidationError(f"bit must be 0 or 1, got {bit!r}")
    return scheme.state0 if bit == 0 else scheme.state1


def simulate_shots(
    state: PureState3 | DensityMatrix,
    pair: str = "AB",
    frames=(np.eye(3), np.eye(3)),
    noise: NoiseParams = NoiseParams(),
    shots: int = 100_000,
    seed: int | Sequence[int] = 0,
) -> ShotRecord:
    """Draw ``shots`` outcome pairs for each of the nine settings."""
    if shots < 1:
        raise ValidationError("need at least one shot per setting")
    frames = tuple(_check_orthogonal(O) for O in frames)
    probs = outcome_probabilities(_reduced(state, pair, noise), frames)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs.reshape(9, 4)).reshape(3, 3, 2, 2)
    return ShotRecord(counts, pair, frames)


def estimate_gaps(record: ShotRecord) -> tuple[float, float]:
    prof = decompose(spectrum(record.correlations()))
    return prof.g1, prof.g2


def decode_bit(g1_hat: float, g2_hat: float) -> int:
    return 0 if g1_hat >= g2_hat else 1


@dataclass
class ProtocolReport:
    bits: list
    decoded: list
    g1: list = field(default_factory=list)
    g2: list = field(default_factory=list)

    @property
    def bit_errors(self) -> int:
        return sum(b != d for b, d in zip(self.bits, self.decoded))

    @property
    def accuracy(self) -> float:
        return 1 - self.bit_errors / len(self.bits)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "bit_errors": self.bit_errors,
            "n_bits": len(self.bits),
            "mean_g1": float(np.mean(self.g1)),
            "mean_g2": float(np.mean(self.g2)),
        }


def run_protocol(
    bits: Sequence[int],
    scheme: EncodingScheme | None = None,
    pair: str = "AB",
    frames: str = "fixed",
    noise: NoiseParams = NoiseParams(),
    shots: int = 100_000,
    seed: int = 0,
) -> ProtocolReport:
    """Encode, measure, estimate and decode every bit.

    ``frames="fixed"`` keeps both parties in the computational frame;
    ``"random"`` draws fresh Haar O(3) frames for each bit. Bit i uses its
    own generator keyed on (seed, i).
    """
    if frames not in ("fixed", "random"):
        raise ValidationError(f"unknown frame policy {frames!r}")
    scheme = scheme or default_scheme()
    report = ProtocolReport(list(bits), [])
    for i, bit in enumerate(bits):
        rng = np.random.default_rng([seed, i])
        if frames == "random":
            fr = (random_frame(rng), random_frame(rng))
        else:
            fr = (np.eye(3), np.eye(3))
        state = encode_bit(bit, scheme)
        record = simulate_shots(state, pair, fr, noise, shots, seed=rng.integers(2**63))
        g1, g2 = estimate_gaps(record)
        report.g1.append(g1)
        report.g2.append(g2)
        report.decoded.append(decode_bit(g1, g2))
    return report


def two_proportion_pvalue(k1: int, n1: int, k2: int, n2: int) -> float:
    """Two-sided p-value of the pooled two-proportion z-test."""
    pooled = (k1 + k2) / (n1 + n2)
    var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
    if var == 0:
        return 1.0
    z = (k1 / n1 - k2 / n2) / math.sqrt(var)
    return float(2 * stats.norm.sf(abs(z)))


def parse_bits(hex_string: str) -> list[int]:
    """Big-endian bits of a hex string, four per digit."""
    text = hex_string.lower().removeprefix("0x")
    if not text or any(ch not in "0123456789abcdef" for ch in text):
        raise ValidationError(f"not a hex string: {hex_string!r}")
    return [int(b) for ch in text for b in format(int(ch, 16), "04b")]
