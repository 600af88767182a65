"""Two-qubit correlation measures and the three-tangle."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .correlations import bloch_vectors, corr_matrix, spectrum
from .qstate import SIGMA_Y, DensityMatrix, PureState3, ValidationError, partial_trace

log = logging.getLogger(__name__)

UNIT_TOL = 1e-10
RANK_CUTOFF = 1e-14
TSIRELSON = 2 * math.sqrt(2)

_YY = np.kron(SIGMA_Y, SIGMA_Y)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence via the spin-flipped state.

    The decreasing square-root eigenvalues of rho (sy sy) rho* (sy sy) are the
    singular values of F^T (sy sy) F for any factor rho = F F^dagger. Taking them
    from an SVD keeps full precision for rank-deficient states, where square
    roots of near-zero eigenvalues would not.
    """
    w, v = np.linalg.eigh(rho.data)
    keep = w > RANK_CUTOFF
    f = v[:, keep] * np.sqrt(w[keep])
    lam = np.zeros(4)
    sv = np.linalg.svd(f.T @ _YY @ f, compute_uv=False)
    lam[: sv.size] = sv
    lam[::-1].sort()
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def tangle_permutations(psi: PureState3) -> tuple[float, float, float]:
    """1 - x^2 - C^2 - C^2 evaluated with each party as the focus (A, B, C)."""
    c2 = {p: concurrence(partial_trace(psi, p)) ** 2 for p in ("AB", "AC", "BC")}
    bloch2 = {p: float(np.sum(bloch_vectors(partial_trace(psi, p + q))[0] ** 2)) for p, q in zip("ABC", "BCA")}
    return (
        1 - bloch2["A"] - c2["AB"] - c2["AC"],
        1 - bloch2["B"] - c2["AB"] - c2["BC"],
        1 - bloch2["C"] - c2["AC"] - c2["BC"],
    )


def three_tangle(psi: PureState3) -> float:
    if not isinstance(psi, PureState3):
        raise ValidationError("the three-tangle is defined here for pure states only")
    return min(1.0, max(0.0, tangle_permutations(psi)[0]))


def horodecki_M(rho: DensityMatrix) -> float:
    s1, s2, _ = spectrum(corr_matrix(rho))
    return s1 + s2


def chsh_violable(rho: DensityMatrix) -> bool:
    """Whether some measurement directions violate CHSH (M > 1)."""
    return horodecki_M(rho) > 1


@dataclass(frozen=True)
class Directions:
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValidationError(f"direction {name} must be a 3-vector")
            if abs(np.linalg.norm(v) - 1) > UNIT_TOL:
                raise ValidationError(f"direction {name} is not a unit vector")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def swapped(self) -> "Directions":
        """Same measurements with the two parties' roles exchanged."""
        return Directions(self.b1, self.b2, self.a1, self.a2)


def chsh_value(T: np.ndarray, d: Directions) -> float:
    return float(d.a1 @ T @ (d.b1 + d.b2) + d.a2 @ T @ (d.b1 - d.b2))


def chsh_expectation(rho: DensityMatrix, d: Directions) -> float:
    return chsh_value(corr_matrix(rho), d)


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < 1e-15:
        return fallback
    return v / n


def _orthogonal_to(v: np.ndarray) -> np.ndarray:
    e = np.eye(3)[np.argmin(np.abs(v))]
    w = np.cross(v, e)
    return w / np.linalg.norm(w)


def optimal_directions(T: np.ndarray) -> Directions:
    """Directions reaching <B> = 2 sqrt(s1 + s2), built from the top two singular pairs of T."""
    u, sig, vt = np.linalg.svd(T)
    n = math.hypot(sig[0], sig[1])
    if n < 1e-15:
        b1 = b2 = vt[0]
    else:
        b1 = (sig[0] * vt[0] + sig[1] * vt[1]) / n
        b2 = (sig[0] * vt[0] - sig[1] * vt[1]) / n
    return Directions(u[:, 0], u[:, 1], b1 / np.linalg.norm(b1), b2 / np.linalg.norm(b2))


def _ascend(T: np.ndarray, b1: np.ndarray, b2: np.ndarray, tol: float, max_iter: int):
    """Block-coordinate ascent: every half-step is the exact maximizer for its block."""
    best = -np.inf
    a1 = a2 = None
    for _ in range(max_iter):
        a1 = _unit(T @ (b1 + b2), _orthogonal_to(b1))
        a2 = _unit(T @ (b1 - b2), _orthogonal_to(a1))
        b1 = _unit(T.T @ (a1 + a2), b1)
        b2 = _unit(T.T @ (a1 - a2), _orthogonal_to(b1))
        value = float(a1 @ T @ (b1 + b2) + a2 @ T @ (b1 - b2))
        if value - best <= tol:
            best = max(best, value)
            break
        best = value
    return best, Directions(a1, a2, b1, b2)


def chsh_optimize(
    rho: DensityMatrix,
    restarts: int = 20,
    seed: int = 0,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> tuple[float, Directions]:
    """Maximize |<B>| over measurement directions by restarted ascent.

    Falls back to the analytic optimum if no restart gets within ``tol``
    of 2 sqrt(M).
    """
    T = corr_matrix(rho)
    rng = np.random.default_rng(seed)
    best, best_dirs = -np.inf, None
    for _ in range(restarts):
        b = rng.standard_normal((2, 3))
        b /= np.linalg.norm(b, axis=1, keepdims=True)
        value, dirs = _ascend(T, b[0], b[1], tol * 1e-3, max_iter)
        if value > best:
            best, best_dirs = value, dirs
    s1, s2, _ = spectrum(T)
    target = 2 * math.sqrt(s1 + s2)
    if best_dirs is None or best < target - tol:
        log.debug("CHSH ascent reached %r of %r; using analytic directions", best, target)
        best_dirs = optimal_directions(T)
        best = chsh_value(T, best_dirs)
    return abs(best), best_dirs


def discord_from_parts(a: np.ndarray, T: np.ndarray) -> float:
    """Geometric discord from the measured party's Bloch vector and T (measured party on rows)."""
    S = T @ T.T
    # the maximum of (x.a)^2 + x^T S x over the unit ball is the top eigenvalue of a a^T + S
    k_max = np.linalg.eigvalsh(np.outer(a, a) + S)[-1]
    return float((a @ a + np.trace(S) - k_max) / 4)


def geometric_discord(rho: DensityMatrix) -> float:
    """Geometric discord with the first qubit measured."""
    a, _ = bloch_vectors(rho)
    return discord_from_parts(a, corr_matrix(rho))


def rsp_fidelity(rho: DensityMatrix) -> float:
    _, s2, s3 = spectrum(corr_matrix(rho))
    return (s2 + s3) / 2
