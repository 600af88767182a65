"""Three-qubit state core.

States are stored with tensor order A (x) B (x) C, so the basis index of
|q_A q_B q_C> is ``4*q_A + 2*q_B + q_C``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

PARTIES = "ABC"

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class ValidationError(ValueError):
    """Raised when an input violates a state or parameter invariant."""


class StateFormatError(ValidationError):
    """Raised when a state file cannot be parsed; ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState3:
    amplitudes: np.ndarray
    label: str = ""

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (8,):
            raise ValidationError(f"a three-qubit pure state needs 8 amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValidationError("amplitudes must be finite")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (sum |a|^2 = {norm2!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes, label: str = "") -> "PureState3":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amps / norm, label)

    @property
    def tensor(self) -> np.ndarray:
        """Amplitudes as a (2, 2, 2) array indexed [q_A, q_B, q_C]."""
        return self.amplitudes.reshape(2, 2, 2)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.label)

    def __eq__(self, other):
        if not isinstance(other, PureState3):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes) and self.label == other.label

    __hash__ = None


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        rho = np.asarray(self.data, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4, 8):
            raise ValidationError(f"density matrix must be 2x2, 4x4 or 8x8, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise ValidationError("density matrix entries must be finite")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(rho)[0]
        if lo < PSD_TOL:
            raise ValidationError(f"density matrix has negative eigenvalue {lo!r}")
        object.__setattr__(self, "data", _frozen(rho))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.data, self.data).real)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self.data, other.data) and self.label == other.label

    __hash__ = None


@dataclass(frozen=True)
class CanonicalParams:
    """Amplitudes l0..l4 and phase phi of the five-term local-unitary normal form."""

    l0: float
    l1: float
    l2: float
    l3: float
    l4: float
    phi: float = 0.0

    def __post_init__(self):
        ls = self.ls
        if any(not math.isfinite(x) for x in ls + (self.phi,)):
            raise ValidationError("canonical parameters must be finite")
        if min(ls) < 0:
            raise ValidationError("canonical amplitudes l0..l4 must be non-negative")
        total = sum(x * x for x in ls)
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"sum of l_j^2 is {total!r}, expected 1")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    @property
    def ls(self) -> tuple[float, float, float, float, float]:
        return (self.l0, self.l1, self.l2, self.l3, self.l4)

    @classmethod
    def normalized(cls, l0=0.0, l1=0.0, l2=0.0, l3=0.0, l4=0.0, phi=0.0) -> "CanonicalParams":
        ls = np.array([l0, l1, l2, l3, l4], dtype=float)
        ls = ls / np.linalg.norm(ls)
        return cls(*map(float, ls), phi=phi)

    @classmethod
    def random(cls, seed: int, wclass: bool = False) -> "CanonicalParams":
        rng = np.random.default_rng(seed)
        ls = np.abs(rng.standard_normal(5))
        if wclass:
            ls[4] = 0.0
        return cls.normalized(*ls, phi=rng.uniform(0, 2 * math.pi))


@dataclass(frozen=True)
class NoiseParams:
    eta_A: float = 1.0
    eta_B: float = 1.0
    eta_C: float = 1.0

    def __post_init__(self):
        for name in ("eta_A", "eta_B", "eta_C"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise ValidationError(f"{name} = {eta!r} outside [0, 1]")

    def for_parties(self, parties: str) -> tuple[float, ...]:
        return tuple(getattr(self, "eta_" + p) for p in parties)


# -- construction ---------------------------------------------------------


def from_canonical(params: CanonicalParams, label: str = "") -> PureState3:
    l0, l1, l2, l3, l4 = params.ls
    amps = np.zeros(8, dtype=complex)
    amps[0b000] = l0
    amps[0b100] = l1 * np.exp(1j * params.phi)
    amps[0b101] = l2
    amps[0b110] = l3
    amps[0b111] = l4
    return PureState3(amps, label)


def basis_state(bits: str, label: str = "") -> PureState3:
    amps = np.zeros(8, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState3(amps, label or f"|{bits}>")


def ghz() -> PureState3:
    amps = np.zeros(8, dtype=complex)
    amps[0] = amps[7] = 1 / math.sqrt(2)
    return PureState3(amps, "GHZ")


def ghz_alpha(alpha: float, label: str = "") -> PureState3:
    """cos(alpha)|000> + sin(alpha)|111>."""
    amps = np.zeros(8, dtype=complex)
    amps[0], amps[7] = math.cos(alpha), math.sin(alpha)
    return PureState3(amps, label or f"ghz-alpha({alpha!r})")


def w_state() -> PureState3:
    amps = np.zeros(8, dtype=complex)
    amps[[1, 2, 4]] = 1 / math.sqrt(3)
    return PureState3(amps, "W")


def haar_random_pure(seed: int) -> PureState3:
    """Unitarily invariant random state from a normalized complex Gaussian vector."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    return PureState3.normalized(z, label=f"haar[{seed}]")


def random_mixture(seed: int, rank: int = 2) -> DensityMatrix:
    """Random mixture of ``rank`` Haar-random pure states with uniform-simplex weights."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(rank))
    z = rng.standard_normal((rank, 8)) + 1j * rng.standard_normal((rank, 8))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    rho = np.einsum("n,ni,nj->ij", weights, z, z.conj())
    return DensityMatrix(_hermitize(rho), label=f"mixture{rank}[{seed}]")


def singlet() -> DensityMatrix:
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    return DensityMatrix(np.outer(psi, psi.conj()), "singlet")


def werner(w: float) -> DensityMatrix:
    """Fraction ``w`` of the singlet mixed with the maximally mixed two-qubit state."""
    if not 0.0 <= w <= 1.0:
        raise ValidationError(f"Werner fraction {w!r} outside [0, 1]")
    rho = w * singlet().data + (1 - w) * np.eye(4) / 4
    return DensityMatrix(rho, f"werner({w!r})")


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    d = 2**n_qubits
    return DensityMatrix(np.eye(d, dtype=complex) / d, "maximally-mixed")


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return (rho + rho.conj().T) / 2


# -- local operations -----------------------------------------------------


def _embed(op: np.ndarray, position: int, n_qubits: int) -> np.ndarray:
    full = np.ones((1, 1), dtype=complex)
    for k in range(n_qubits):
        full = np.kron(full, op if k == position else I2)
    return full


def _party_index(party: str, n_qubits: int) -> int:
    if party not in PARTIES[:n_qubits]:
        raise ValidationError(f"party {party!r} not in {PARTIES[:n_qubits]!r}")
    return PARTIES.index(party)


def apply_local_unitary(state, party: str, U) -> PureState3 | DensityMatrix:
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValidationError("local unitary must be 2x2")
    if np.max(np.abs(U.conj().T @ U - I2)) > UNITARY_TOL:
        raise ValidationError("matrix is not unitary")
    if isinstance(state, PureState3):
        full = _embed(U, _party_index(party, 3), 3)
        return PureState3(full @ state.amplitudes, state.label)
    full = _embed(U, _party_index(party, state.n_qubits), state.n_qubits)
    return DensityMatrix(_hermitize(full @ state.data @ full.conj().T), state.label)


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary (QR of a Ginibre matrix with phase fix)."""
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# -- partial traces -------------------------------------------------------


def _factor(psi: PureState3, keep: str) -> np.ndarray:
    """Matrix F with rho_keep = F F^dagger for the kept ordered parties."""
    order = [PARTIES.index(p) for p in keep]
    rest = [k for k in range(3) if k not in order]
    t = psi.tensor.transpose(order + rest)
    return t.reshape(2 ** len(keep), -1)


def _check_keep(keep: str) -> None:
    if not keep or len(keep) > 3 or len(set(keep)) != len(keep) or any(p not in PARTIES for p in keep):
        raise ValidationError(f"cannot keep subsystem {keep!r}")


def partial_trace(state, keep: str) -> DensityMatrix:
    """Reduced state on ``keep`` ("A", "BC", "CA", ...), factors in the given order."""
    _check_keep(keep)
    if isinstance(state, PureState3):
        f = _factor(state, keep)
        return DensityMatrix(_hermitize(f @ f.conj().T), state.label)
    if state.dim != 8:
        raise ValidationError("partial_trace expects a three-qubit state")
    order = [PARTIES.index(p) for p in keep]
    rest = [k for k in range(3) if k not in order]
    t = state.data.reshape((2,) * 6).transpose(order + rest + [3 + k for k in order] + [3 + k for k in rest])
    d, e = 2 ** len(keep), 2 ** len(rest)
    rho = np.einsum("iaja->ij", t.reshape(d, e, d, e))
    return DensityMatrix(_hermitize(rho), state.label)


# -- noise ----------------------------------------------------------------


def depolarize(rho: DensityMatrix, noise: NoiseParams | Sequence[float]) -> DensityMatrix:
    """Apply rho_k -> eta_k rho_k + (1 - eta_k) I/2 independently to every qubit.

    ``noise`` is a NoiseParams (its first ``n_qubits`` strengths are used) or an
    explicit per-qubit sequence, e.g. ``noise.for_parties("BC")`` for a BC marginal.
    """
    if isinstance(rho, PureState3):
        rho = rho.density_matrix()
    n = rho.n_qubits
    etas = tuple(noise.for_parties(PARTIES[:n])) if isinstance(noise, NoiseParams) else tuple(noise)
    if len(etas) != n:
        raise ValidationError(f"need {n} noise strengths, got {len(etas)}")
    for eta in etas:
        if not 0.0 <= eta <= 1.0:
            raise ValidationError(f"noise strength {eta!r} outside [0, 1]")
    out = rho.data
    for k, eta in enumerate(etas):
        if eta == 1.0:
            continue
        twirl = sum(_embed(p, k, n) @ out @ _embed(p, k, n) for p in PAULIS)
        out = (1 + 3 * eta) / 4 * out + (1 - eta) / 4 * twirl
    return DensityMatrix(_hermitize(out), rho.label)


# -- state files ----------------------------------------------------------


def state_from_dict(obj: dict) -> PureState3:
    if not isinstance(obj, dict):
        raise StateFormatError("state file must hold a JSON object", field="<root>")
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise StateFormatError("'label' must be a string", field="label")
    if ("canonical" in obj) == ("amplitudes" in obj):
        raise StateFormatError("state needs exactly one of 'canonical' or 'amplitudes'", field="canonical|amplitudes")
    if "canonical" in obj:
        canon = obj["canonical"]
        if not isinstance(canon, dict):
            raise StateFormatError("'canonical' must be an object", field="canonical")
        values = {}
        for key in ("l0", "l1", "l2", "l3", "l4", "phi"):
            v = canon.get(key, 0.0)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise StateFormatError(f"canonical.{key} must be a number", field=f"canonical.{key}")
            values[key] = float(v)
        try:
            return from_canonical(CanonicalParams(**values), label)
        except ValidationError as exc:
            raise StateFormatError(str(exc), field="canonical") from None
    amps = obj["amplitudes"]
    if not isinstance(amps, list) or len(amps) != 8:
        n = len(amps) if isinstance(amps, list) else "non-list"
        raise StateFormatError(f"'amplitudes' must list 8 [re, im] pairs, got {n}", field="amplitudes")
    values = []
    for i, pair in enumerate(amps):
        ok = (
            isinstance(pair, list)
            and len(pair) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        )
        if not ok:
            raise StateFormatError(f"amplitudes[{i}] must be a [re, im] pair of numbers", field=f"amplitudes[{i}]")
        values.append(complex(pair[0], pair[1]))
    try:
        return PureState3(np.array(values), label)
    except ValidationError as exc:
        raise StateFormatError(str(exc), field="amplitudes") from None


def state_to_dict(psi: PureState3) -> dict:
    out = {"amplitudes": [[float(a.real), float(a.imag)] for a in psi.amplitudes]}
    if psi.label:
        out["label"] = psi.label
    return out


def load_state(path: str | Path) -> PureState3:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}", field="<root>") from None
    return state_from_dict(obj)
