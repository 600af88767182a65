"""Checks of the equalities and inequalities obeyed by three-qubit correlations.

Every check returns a :class:`RelationReport`. Equality relations report
``|lhs - rhs|`` as the residual; inequality relations (lhs <= rhs) report
``lhs - rhs``, so a residual at or below the tolerance means satisfied.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from itertools import combinations

import numpy as np

from . import measures
from .correlations import AnisotropyProfile, SpinSpectrum, bloch_vectors, corr_matrix, decompose, spectrum
from .qstate import PAULIS, CanonicalParams, DensityMatrix, PureState3, ValidationError, from_canonical, partial_trace

EQ_TOL = 1e-9
ISO_TOL = 1e-10
INEQ_SLACK = 1e-9
TIE_TOL = 1e-9

PAIRS = ("AB", "AC", "BC")
# for each party: the two pairs it belongs to (party first) and the remaining pair
SHARED = {"A": ("AB", "AC", "BC"), "B": ("BA", "BC", "AC"), "C": ("CA", "CB", "AB")}


@dataclass
class RelationReport:
    name: str
    lhs: float
    rhs: float
    residual: float
    satisfied: bool
    state_label: str = ""
    kind: str = "eq"
    tol: float = EQ_TOL
    note: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k in ("name", "lhs", "rhs", "residual", "satisfied", "state_label")}
        if self.note:
            out["note"] = self.note
        if self.details:
            out["details"] = self.details
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def equality(name, lhs, rhs, tol=EQ_TOL, label="", **extra) -> RelationReport:
    residual = abs(float(lhs) - float(rhs))
    return RelationReport(name, float(lhs), float(rhs), residual, residual <= tol, label, "eq", tol, **extra)


def inequality(name, lhs, rhs, tol=INEQ_SLACK, label="", **extra) -> RelationReport:
    residual = float(lhs) - float(rhs)
    return RelationReport(name, float(lhs), float(rhs), residual, residual <= tol, label, "le", tol, **extra)


# -- per-state summary ----------------------------------------------------


@dataclass(frozen=True)
class PairData:
    rho: DensityMatrix
    T: np.ndarray
    a: np.ndarray
    b: np.ndarray
    spectrum: SpinSpectrum
    profile: AnisotropyProfile

    @cached_property
    def concurrence(self) -> float:
        return measures.concurrence(self.rho)

    @property
    def M(self) -> float:
        return self.spectrum.s1 + self.spectrum.s2

    @property
    def F(self) -> float:
        return (self.spectrum.s2 + self.spectrum.s3) / 2

    @property
    def discord(self) -> float:
        """Discord with the first party of the pair measured."""
        return measures.discord_from_parts(self.a, self.T)

    def swapped(self) -> "PairData":
        swapped = self.rho.data.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        return replace(self, rho=DensityMatrix(swapped, self.rho.label), T=self.T.T, a=self.b, b=self.a)

    def with_T(self, T: np.ndarray) -> "PairData":
        spec = spectrum(T)
        return replace(self, T=T, spectrum=spec, profile=decompose(spec))


@dataclass(frozen=True)
class StateSummary:
    label: str
    pure: bool
    pairs: dict
    tau: float | None

    def pair(self, name: str) -> PairData:
        if name in self.pairs:
            return self.pairs[name]
        return self.pairs[name[::-1]].swapped()

    def bloch(self, party: str) -> np.ndarray:
        for p in PAIRS:
            if p[0] == party:
                return self.pairs[p].a
            if p[1] == party:
                return self.pairs[p].b
        raise ValidationError(f"unknown party {party!r}")

    def bloch2(self, party: str) -> float:
        v = self.bloch(party)
        return float(v @ v)

    def with_fault(self) -> "StateSummary":
        """Copy with the sign of T^AB[0, 2] flipped; used to self-test the checks."""
        T = self.pairs["AB"].T.copy()
        T[0, 2] = -T[0, 2]
        pairs = dict(self.pairs)
        pairs["AB"] = pairs["AB"].with_T(T)
        return replace(self, pairs=pairs, label=self.label + "+fault")


def summarize(state: PureState3 | DensityMatrix) -> StateSummary:
    if isinstance(state, StateSummary):
        return state
    pure = isinstance(state, PureState3)
    if not pure and state.dim != 8:
        raise ValidationError("expected a three-qubit state")
    pairs = {}
    for p in PAIRS:
        rho = partial_trace(state, p)
        T = corr_matrix(rho)
        a, b = bloch_vectors(rho)
        spec = spectrum(T)
        pairs[p] = PairData(rho, T, a, b, spec, decompose(spec))
    tau = None
    if pure:
        a2 = float(pairs["AB"].a @ pairs["AB"].a)
        tau = 1 - a2 - pairs["AB"].concurrence ** 2 - pairs["AC"].concurrence ** 2
    return StateSummary(state.label, pure, pairs, tau)


# -- invariance and sum rules ---------------------------------------------


def check_aniso_invariance(state, tol: float = EQ_TOL) -> RelationReport:
    s = summarize(state)
    d = {p: np.array(s.pairs[p].profile.deltas) for p in PAIRS}
    residual = float(max(np.max(np.abs(d["AB"] - d["AC"])), np.max(np.abs(d["AB"] - d["BC"]))))
    note = "" if s.pure else "mixed state: invariance not expected"
    return RelationReport(
        "aniso_invariance", residual, 0.0, residual, residual <= tol, s.label, "eq", tol, note,
        {p: list(map(float, d[p])) for p in PAIRS},
    )


def check_iso_sum(state, tol: float = ISO_TOL) -> RelationReport:
    s = summarize(state)
    total = sum(s.pairs[p].profile.s_iso for p in PAIRS)
    if s.pure:
        return equality("iso_sum", total, 1.0, tol, s.label)
    return inequality("iso_sum", total, 1.0, tol, s.label)


def check_iso_bloch(state, tol: float = ISO_TOL) -> RelationReport:
    """s_iso of each pair against (1 + 2 r_3^2 - r_1^2 - r_2^2) / 3, r_3 the outside party."""
    s = summarize(state)
    worst, per_pair = 0.0, {}
    for p in PAIRS:
        (x, y), z = p, next(q for q in "ABC" if q not in p)
        predicted = (1 + 2 * s.bloch2(z) - s.bloch2(x) - s.bloch2(y)) / 3
        per_pair[p] = [s.pairs[p].profile.s_iso, predicted]
        worst = max(worst, abs(s.pairs[p].profile.s_iso - predicted))
    return RelationReport("iso_bloch", worst, 0.0, worst, worst <= tol, s.label, "eq", tol, "", per_pair)


def check_horodecki_identity(state, tol: float = EQ_TOL) -> RelationReport:
    """M^XY = 1 + s3^XY - s3^XZ - s3^YZ for every pair of a pure state."""
    s = summarize(state)
    worst = 0.0
    for p in PAIRS:
        others = [q for q in PAIRS if q != p]
        rhs = 1 + s.pairs[p].spectrum.s3 - sum(s.pairs[q].spectrum.s3 for q in others)
        worst = max(worst, abs(s.pairs[p].M - rhs))
    return RelationReport("horodecki_identity", worst, 0.0, worst, worst <= tol, s.label, "eq", tol)


def check_tangle_permutations(psi, tol: float = 1e-10) -> RelationReport:
    taus = measures.tangle_permutations(psi)
    spread = max(taus) - min(taus)
    return RelationReport(
        "tangle_permutations", spread, 0.0, spread, spread <= tol, psi.label, "eq", tol, "", {"tau": list(taus)}
    )


# -- ordering -------------------------------------------------------------


def _signs(values, tie: float) -> list[int]:
    out = []
    for i, j in combinations(range(len(values)), 2):
        d = values[i] - values[j]
        out.append(0 if abs(d) <= tie else (1 if d > 0 else -1))
    return out


def _ranking(values: dict, tie: float) -> str:
    items = sorted(values.items(), key=lambda kv: -kv[1])
    text = items[0][0]
    for (_, prev), (name, v) in zip(items, items[1:]):
        text += ("=" if abs(prev - v) <= tie else ">") + name
    return text


def ordering_chain(state, tol: float = EQ_TOL, tie: float = TIE_TOL) -> RelationReport:
    """Chained equalities between pairwise differences, plus a common ordering of the triples.

    For pairs P, Q the differences r^2 (party outside Q) - r^2 (party outside P),
    s_iso, C^2, F and M/2 (Q minus P) must coincide for pure states.
    """
    s = summarize(state)
    outside = {p: next(q for q in "ABC" if q not in p) for p in PAIRS}
    quantities = {
        "C2": {p: s.pairs[p].concurrence ** 2 for p in PAIRS},
        "M": {p: s.pairs[p].M for p in PAIRS},
        "F": {p: s.pairs[p].F for p in PAIRS},
        "s_iso": {p: s.pairs[p].profile.s_iso for p in PAIRS},
        "bloch_outside": {p: math.sqrt(s.bloch2(outside[p])) for p in PAIRS},
    }
    chains, worst = {}, 0.0
    for p, q in (("AB", "AC"), ("AC", "BC"), ("BC", "AB")):
        diffs = [
            s.bloch2(outside[q]) - s.bloch2(outside[p]),
            quantities["s_iso"][q] - quantities["s_iso"][p],
            quantities["C2"][q] - quantities["C2"][p],
            quantities["F"][q] - quantities["F"][p],
            (quantities["M"][q] - quantities["M"][p]) / 2,
        ]
        chains[f"{q}-{p}"] = diffs
        worst = max(worst, max(diffs) - min(diffs))
    patterns = {k: _signs([v[p] for p in PAIRS], tie) for k, v in quantities.items()}
    consistent = all(
        x * y >= 0 for u, v in combinations(patterns.values(), 2) for x, y in zip(u, v)
    )
    details = {
        "chains": chains,
        "orderings": {k: _ranking(v, tie) for k, v in quantities.items()},
        "consistent_ordering": consistent,
    }
    return RelationReport(
        "ordering_chain", worst, 0.0, worst, worst <= tol and consistent, s.label, "eq", tol, "", details
    )


# -- monogamy and tradeoffs ------------------------------------------------


def _random_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 4, 3))
    return v / np.linalg.norm(v, axis=2, keepdims=True)


def _chsh_batch(T: np.ndarray, d: np.ndarray) -> np.ndarray:
    a1, a2, b1, b2 = d[:, 0], d[:, 1], d[:, 2], d[:, 3]
    return np.einsum("ni,ij,nj->n", a1, T, b1 + b2) + np.einsum("ni,ij,nj->n", a2, T, b1 - b2)


def monogamy_report(
    state,
    n_random: int = 100,
    seed: int = 0,
    tol: float = EQ_TOL,
    roof_budget: tuple[int, int] | None = None,
) -> list[RelationReport]:
    """CHSH, Horodecki, discord and fidelity monogamy for every choice of shared party,
    with the tangle and anisotropy tradeoffs for pure states.
    """
    s = summarize(state)
    rng = np.random.default_rng(seed)
    reports = []
    for x, (p, q, rest) in SHARED.items():
        P, Q = s.pair(p), s.pair(q)
        tag = f"[{x}|{p[1]}{q[1]}]"
        reports.append(inequality("horodecki_monogamy" + tag, P.M + Q.M, 2.0, tol, s.label))
        if s.pure:
            reports.append(
                equality("horodecki_identity" + tag, P.M + Q.M, 2 * (1 - s.pair(rest).spectrum.s3), tol, s.label)
            )
        opt = measures.chsh_value(P.T, measures.optimal_directions(P.T)) ** 2 + measures.chsh_value(
            Q.T, measures.optimal_directions(Q.T)
        ) ** 2
        reports.append(inequality("chsh_monogamy_optimal" + tag, opt, 8.0, tol, s.label))
        if n_random > 0:
            vals = _chsh_batch(P.T, _random_directions(rng, n_random)) ** 2 + _chsh_batch(
                Q.T, _random_directions(rng, n_random)
            ) ** 2
            reports.append(inequality("chsh_monogamy_random" + tag, float(vals.max()), 8.0, tol, s.label))
        reports.append(inequality("discord_monogamy" + tag, P.discord + Q.discord, 0.5, tol, s.label))
        reports.append(inequality("rsp_monogamy" + tag, P.F + Q.F, 1.0, tol, s.label))
    for p in PAIRS + ("BA", "CA", "CB"):
        P = s.pair(p)
        reports.append(inequality(f"discord_bound[{p}]", P.discord, P.M / 4, tol, s.label))
    for p in PAIRS:
        P = s.pair(p)
        reports.append(inequality(f"rsp_bound[{p}]", P.F, P.M / 2, tol, s.label))
    max_m = max(s.pairs[p].M for p in PAIRS)
    if s.pure:
        reports.append(inequality("complementarity", max_m + s.tau, 2.0, tol, s.label))
        prof = s.pairs["AB"].profile
        reports.append(inequality("aniso_tradeoff", max_m + prof.g1 + prof.g2, 2.0, tol, s.label))
    elif roof_budget is not None:
        from .convexroof import mixed_tradeoff_check

        restarts, iterations = roof_budget
        reports.append(mixed_tradeoff_check(state, restarts=restarts, iterations=iterations, seed=seed))
    return reports


# -- analytic oracles for the canonical form ------------------------------


def canonical_closed_forms(params: CanonicalParams) -> dict:
    """Bloch vectors, correlation matrices and scalar invariants of from_canonical(params)."""
    l0, l1, l2, l3, l4 = params.ls
    c, s = math.cos(params.phi), math.sin(params.phi)
    a = np.array([2 * l0 * l1 * c, 2 * l0 * l1 * s, 2 * l0**2 - 1])
    b = np.array([2 * l1 * l3 * c + 2 * l2 * l4, -2 * l1 * l3 * s, 1 - 2 * l3**2 - 2 * l4**2])
    cv = np.array([2 * l1 * l2 * c + 2 * l3 * l4, -2 * l1 * l2 * s, 1 - 2 * l2**2 - 2 * l4**2])
    T_ab = np.array([
        [2 * l0 * l3, 0, 2 * l0 * l1 * c],
        [0, -2 * l0 * l3, 2 * l0 * l1 * s],
        [-2 * l1 * l3 * c - 2 * l2 * l4, 2 * l1 * l3 * s, 1 - 2 * l1**2 - 2 * l2**2],
    ])
    T_ac = np.array([
        [2 * l0 * l2, 0, 2 * l0 * l1 * c],
        [0, -2 * l0 * l2, 2 * l0 * l1 * s],
        [-2 * l1 * l2 * c - 2 * l3 * l4, 2 * l1 * l2 * s, 1 - 2 * l1**2 - 2 * l3**2],
    ])
    T_bc = np.array([
        [2 * l2 * l3 + 2 * l1 * l4 * c, -2 * l1 * l4 * s, 2 * l1 * l3 * c - 2 * l2 * l4],
        [-2 * l1 * l4 * s, 2 * l2 * l3 - 2 * l1 * l4 * c, -2 * l1 * l3 * s],
        [2 * l1 * l2 * c - 2 * l3 * l4, -2 * l1 * l2 * s, 1 - 2 * l2**2 - 2 * l3**2],
    ])
    cross = 8 * l1 * l2 * l3 * l4 * c
    s_iso = {
        "AB": (1 + 8 * l0**2 * l3**2 - 4 * l0**2 * l2**2 - 4 * l1**2 * l4**2 - 4 * l2**2 * l3**2 + cross) / 3,
        "AC": (1 + 8 * l0**2 * l2**2 - 4 * l0**2 * l3**2 - 4 * l1**2 * l4**2 - 4 * l2**2 * l3**2 + cross) / 3,
        "BC": (1 - 4 * l0**2 * l2**2 - 4 * l0**2 * l3**2 + 8 * l1**2 * l4**2 + 8 * l2**2 * l3**2 - 2 * cross) / 3,
    }
    k = -1 + 2 * l1**2 + 2 * l2**2 + 2 * l3**2
    L1 = 1 - 2 * l0**2 * (3 * l1**2 + 2 * l2**2 + 2 * l3**2) - 4 * l1**2 * l4**2 - 4 * l2**2 * l3**2 + cross
    L2 = 2 * l0 * l2 * l3 * l4 + l0 * l1 * k * c
    s_ani2 = 2 / 3 * L1**2 + 8 * L2**2 + 8 * l0**2 * l1**2 * (l0**2 * l1**2 + k**2 * s**2)
    concurrence2 = {
        "AB": 4 * l0**2 * l3**2,
        "AC": 4 * l0**2 * l2**2,
        "BC": 4 * l2**2 * l3**2 + 4 * l1**2 * l4**2 - cross,
    }
    return {
        "a": a, "b": b, "c": cv,
        "T": {"AB": T_ab, "AC": T_ac, "BC": T_bc},
        "s_iso": s_iso,
        "s_ani2": s_ani2,
        "concurrence2": concurrence2,
        "tau": 4 * l0**2 * l4**2,
    }


def _wclass_spectrum(l0, l1, l2, l3) -> tuple[float, float, float]:
    x = (1 - 2 * l2**2) ** 2 + 4 * (l0**2 * l3**2 + l1**2 * l2**2)
    root = math.sqrt(max(0.0, x * x - 16 * l0**2 * l3**2 * (1 - 2 * l2**2) ** 2))
    return tuple(sorted(((x + root) / 2, 4 * l0**2 * l3**2, (x - root) / 2), reverse=True))


def wclass_closed_form(params: CanonicalParams) -> dict:
    """Spectra of all three pairs, V_ani and s_ani^2 of a W-class state (l4 = 0)."""
    if params.l4 != 0.0:
        raise ValidationError("W-class closed forms need l4 = 0")
    if params.l0 <= 0.0:
        raise ValidationError("W-class closed forms need l0 > 0")
    l0, l1, l2, l3, _ = params.ls
    x = (1 - 2 * l2**2) ** 2 + 4 * (l0**2 * l3**2 + l1**2 * l2**2)
    v_ani = (
        2 / 27
        * (1 - 4 * (l0**2 * l2**2 + l0**2 * l3**2 + l2**2 * l3**2))
        * (x * x - 16 * l0**2 * l3**2 * (1 - 2 * l2**2) ** 2 + 8 * l0**2 * l1**2 * l2**2 * l3**2)
    )
    return {
        "AB": _wclass_spectrum(l0, l1, l2, l3),
        "AC": _wclass_spectrum(l0, l1, l3, l2),
        "BC": _wclass_spectrum(l2, l1, l0, l3),
        "V_ani": v_ani,
        "s_ani2": canonical_closed_forms(params)["s_ani2"],
    }


def wclass_oracle(params: CanonicalParams, tol: float = EQ_TOL) -> RelationReport:
    closed = wclass_closed_form(params)
    psi = from_canonical(params, label="wclass")
    s = summarize(psi)
    worst = 0.0
    for p in PAIRS:
        worst = max(worst, float(np.max(np.abs(np.array(s.pairs[p].spectrum) - np.array(closed[p])))))
    prof = s.pairs["AB"].profile
    worst = max(worst, abs(prof.V_ani - closed["V_ani"]), abs(prof.s_ani**2 - closed["s_ani2"]))
    details = {p: list(closed[p]) for p in PAIRS}
    details["V_ani"] = closed["V_ani"]
    return RelationReport("wclass_closed_form", worst, 0.0, worst, worst <= tol, s.label, "eq", tol, "", details)


# -- quantum marginal problem ---------------------------------------------


def marginal_consistency(states, tol: float = EQ_TOL) -> RelationReport:
    """Consistency of three marginals with a common pure three-qubit state.

    Three one-qubit states (A, B, C): a + b <= 1 + c and permutations, which is
    necessary and sufficient. Three two-qubit states (AB, AC, BC): identical
    anisotropy deltas and isotropic strengths summing to 1, necessary only.
    """
    states = list(states)
    if len(states) != 3:
        raise ValidationError("marginal_consistency needs exactly three states")
    dims = {st.dim for st in states}
    if dims == {2}:
        r = []
        for st in states:
            v = np.array([np.trace(st.data @ p).real for p in PAULIS])
            r.append(float(np.linalg.norm(v)))
        a, b, c = r
        lhs = max(a + b - c, a + c - b, b + c - a)
        return inequality("marginal_single_qubit", lhs, 1.0, tol, note="necessary and sufficient")
    if dims == {4}:
        profiles = [decompose(spectrum(corr_matrix(st))) for st in states]
        d = [np.array(pr.deltas) for pr in profiles]
        aniso = max(float(np.max(np.abs(d[0] - d[1]))), float(np.max(np.abs(d[0] - d[2]))))
        iso = abs(sum(pr.s_iso for pr in profiles) - 1)
        residual = max(aniso, iso)
        return RelationReport(
            "marginal_two_qubit", residual, 0.0, residual, residual <= tol, "", "eq", tol,
            "necessary conditions only", {"aniso_residual": aniso, "iso_sum_residual": iso},
        )
    raise ValidationError("marginals must all be one-qubit or all two-qubit states")


# -- everything at once ---------------------------------------------------


def all_relations(
    state,
    n_random: int = 100,
    seed: int = 0,
    tol: float | None = None,
    roof_budget: tuple[int, int] | None = None,
) -> list[RelationReport]:
    """Every check applicable to ``state`` (a PureState3, DensityMatrix(8) or StateSummary)."""
    s = summarize(state)
    eq_tol = EQ_TOL if tol is None else tol
    iso_tol = ISO_TOL if tol is None else tol
    reports = [check_iso_sum(s, iso_tol)]
    if s.pure:
        reports += [
            check_aniso_invariance(s, eq_tol),
            check_iso_bloch(s, iso_tol),
            check_horodecki_identity(s, eq_tol),
            ordering_chain(s, eq_tol),
        ]
        if isinstance(state, PureState3):
            reports.append(check_tangle_permutations(state, max(1e-10, eq_tol)))
    reports += monogamy_report(s if roof_budget is None else state, n_random, seed, eq_tol, roof_budget)
    return reports
