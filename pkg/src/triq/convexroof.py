"""Upper-bound estimates of convex-roof extended anisotropy measures.

A decomposition rho = sum_n p_n |psi_n><psi_n| of size m is obtained from the
eigen-decomposition rho = sum_i w_i |e_i><e_i| and an m x r isometry V as
sqrt(p_n) |psi_n> = sum_i V[n, i] sqrt(w_i) |e_i>; every size-m decomposition
arises this way. The roof value is the minimum of sum_n p_n Q(psi_n) over all
decompositions, so any ensemble we evaluate gives an upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .correlations import AnisotropyProfile, batched_corr, batched_spectra, corr_matrix, decompose, spectrum
from .qstate import DensityMatrix, PureState3, ValidationError, partial_trace
from .relations import PAIRS, RelationReport, inequality
from . import measures

ISOMETRY_TOL = 1e-10
RANK_TOL = 1e-12
WEIGHT_FLOOR = 1e-14

Functional = Callable[[AnisotropyProfile], float]

FUNCTIONALS: dict[str, Functional] = {
    "g1": lambda p: p.g1,
    "g2": lambda p: p.g2,
    "gap_sum": lambda p: p.g1 + p.g2,
    "s_ani": lambda p: p.s_ani,
    "V_ani": lambda p: p.V_ani,
}


@dataclass(frozen=True)
class Ensemble:
    weights: np.ndarray
    vectors: np.ndarray  # (m, 8), unit rows

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[1] != 8 or w.shape != (v.shape[0],):
            raise ValidationError("ensemble needs m weights and an (m, 8) array of states")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-10:
            raise ValidationError("ensemble weights must be non-negative and sum to 1")
        if np.max(np.abs(np.linalg.norm(v, axis=1) - 1)) > 1e-10:
            raise ValidationError("ensemble states must be normalized")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def members(self) -> list[tuple[float, PureState3]]:
        return [(float(p), PureState3(v)) for p, v in zip(self.weights, self.vectors)]

    def density_matrix(self) -> np.ndarray:
        return np.einsum("n,ni,nj->ij", self.weights, self.vectors, self.vectors.conj())

    @classmethod
    def concatenate(cls, parts: Sequence[tuple[float, "Ensemble"]]) -> "Ensemble":
        """Ensemble of sum_k q_k rho_k from ensembles of the rho_k."""
        weights = np.concatenate([q * e.weights for q, e in parts])
        vectors = np.concatenate([e.vectors for _, e in parts])
        return cls(weights / weights.sum(), vectors)


def _eigen(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(rho.data)
    keep = w > RANK_TOL
    return w[keep], v[:, keep]


def rank(rho: DensityMatrix) -> int:
    return int(np.count_nonzero(np.linalg.eigvalsh(rho.data) > RANK_TOL))


def random_isometry(m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, upper = np.linalg.qr(z)
    q = q * (np.diag(upper) / np.abs(np.diag(upper)))
    return q[:, :r]


def _members(w: np.ndarray, e: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    unnorm = V @ (np.sqrt(w)[:, None] * e.T)
    p = np.einsum("ni,ni->n", unnorm, unnorm.conj()).real
    safe = np.where(p > WEIGHT_FLOOR, p, 1.0)
    return p, unnorm / np.sqrt(safe)[:, None]


def ensemble_from_unitary(rho: DensityMatrix, V) -> Ensemble:
    """Decomposition of ``rho`` generated by an m x r isometry (r = rank of rho)."""
    w, e = _eigen(rho)
    V = np.asarray(V, dtype=complex)
    r = len(w)
    if V.ndim != 2 or V.shape[1] != r:
        raise ValidationError(f"isometry must have {r} columns (the rank of rho)")
    if V.shape[0] < r:
        raise ValidationError(f"ensemble size {V.shape[0]} is below the rank {r}")
    if np.max(np.abs(V.conj().T @ V - np.eye(r))) > ISOMETRY_TOL:
        raise ValidationError("V is not an isometry")
    p, vecs = _members(w, e, V)
    keep = p > WEIGHT_FLOOR
    return Ensemble(p[keep] / p[keep].sum(), vecs[keep])


def _pair_rhos(vectors: np.ndarray, pair: str) -> np.ndarray:
    order = ["ABC".index(x) for x in pair]
    rest = [k for k in range(3) if k not in order][0]
    t = vectors.reshape(-1, 2, 2, 2).transpose([0] + [1 + k for k in order] + [1 + rest])
    f = t.reshape(-1, 4, 2)
    return f @ np.swapaxes(f.conj(), 1, 2)


def _member_values(vectors: np.ndarray, Q: Functional, pair: str) -> np.ndarray:
    specs = batched_spectra(batched_corr(_pair_rhos(vectors, pair)))
    return np.array([Q(decompose(tuple(s))) for s in specs])


def ensemble_value(ensemble: Ensemble, Q: Functional, pair: str = "AB") -> float:
    """sum_n p_n Q(psi_n), with Q evaluated on the given pair of every member."""
    return float(ensemble.weights @ _member_values(ensemble.vectors, Q, pair))


@dataclass(frozen=True)
class RoofEstimate:
    value: float
    ensemble: Ensemble
    m: int
    restarts: int
    iterations: int
    upper_bound: bool = True

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "upper_bound": self.upper_bound,
            "ensemble_size_cap": self.m,
            "budget": f"{self.restarts}x{self.iterations}",
        }


def _random_hermitian(rng: np.random.Generator, m: int) -> np.ndarray:
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    h = (z + z.conj().T) / 2
    return h / np.linalg.norm(h)


def convex_roof_estimate(
    rho: DensityMatrix,
    Q: Functional | str = "gap_sum",
    restarts: int = 10,
    iterations: int = 100,
    seed: int = 0,
    m: int | None = None,
    pair: str = "AB",
    warm_starts: Sequence[Ensemble] = (),
) -> RoofEstimate:
    """Minimize the ensemble average of Q over decompositions of ``rho``.

    Restart 0 starts from the eigen-ensemble, later restarts from random
    isometries, and each ``warm_starts`` ensemble (a known decomposition of
    ``rho``) is refined as one more restart. Refinement is a stochastic local
    search V -> exp(i eps H) V with an adaptive step. Restart k draws from
    its own generator keyed on (seed, k), so a larger budget with the same
    seed explores a superset and never returns a larger value.
    """
    if isinstance(Q, str):
        Q = FUNCTIONALS[Q]
    w, e = _eigen(rho)
    r = len(w)
    if r == 1:
        psi = PureState3.normalized(e[:, 0])
        value = Q(decompose(spectrum(corr_matrix(partial_trace(psi, pair)))))
        ens = Ensemble(np.ones(1), psi.amplitudes[None, :])
        return RoofEstimate(float(value), ens, 1, restarts, iterations)

    starts = []
    for ws in warm_starts:
        # express the warm-start ensemble through an isometry on the eigenbasis
        unnorm = np.sqrt(ws.weights)[:, None] * ws.vectors
        V = (unnorm @ e.conj()) / np.sqrt(w)
        if np.max(np.abs(V @ (np.sqrt(w)[:, None] * e.T) - unnorm)) > 1e-8:
            raise ValidationError("warm-start ensemble does not decompose rho")
        starts.append(V)
    m = max([m or r + 2, r] + [V.shape[0] for V in starts])

    def objective(V):
        p, vecs = _members(w, e, V)
        keep = p > WEIGHT_FLOOR
        return float(p[keep] @ _member_values(vecs[keep], Q, pair)), p, vecs

    def pad(V):
        if V.shape[0] == m:
            return V
        # embed in a larger isometry: extra members start with zero weight
        return np.vstack([V, np.zeros((m - V.shape[0], r), dtype=complex)])

    best = (np.inf, None)
    n_runs = restarts + len(starts)
    for k in range(n_runs):
        rng = np.random.default_rng([seed, 0, k] if k < restarts else [seed, 1, k - restarts])
        if k == 0:
            V = np.eye(m, r, dtype=complex)
        elif k < restarts:
            V = random_isometry(m, r, rng)
        else:
            V = pad(starts[k - restarts])
        value, p, vecs = objective(V)
        step = 0.5
        if value < best[0]:
            best = (value, (p, vecs))
        for _ in range(iterations):
            G = expm(1j * step * _random_hermitian(rng, m))
            trial = G @ V
            t_value, t_p, t_vecs = objective(trial)
            if t_value < value:
                V, value = trial, t_value
                step = min(step * 1.5, np.pi)
                if value < best[0]:
                    best = (value, (t_p, t_vecs))
            else:
                step = max(step * 0.7, 1e-6)
    value, (p, vecs) = best
    keep = p > WEIGHT_FLOOR
    ens = Ensemble(p[keep] / p[keep].sum(), vecs[keep])
    return RoofEstimate(value, ens, m, restarts, iterations)


def mixed_tradeoff_check(
    rho: DensityMatrix,
    restarts: int = 10,
    iterations: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
) -> RelationReport:
    """max pairwise M plus roof estimates of g1 and g2, against 2.

    The roof estimates bound the true roofs from above, so a satisfied report
    proves the tradeoff for this state; a violated one would be inconclusive.
    """
    max_m = max(measures.horodecki_M(partial_trace(rho, p)) for p in PAIRS)
    g1 = convex_roof_estimate(rho, "g1", restarts, iterations, seed)
    g2 = convex_roof_estimate(rho, "g2", restarts, iterations, seed)
    report = inequality("mixed_aniso_tradeoff", max_m + g1.value + g2.value, 2.0, tol, rho.label)
    report.note = "roof terms are upper bounds; satisfied is conclusive, violated is not"
    report.details = {"max_M": max_m, "g1_roof": g1.value, "g2_roof": g2.value, "upper_bound": True}
    return report
