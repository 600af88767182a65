import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import orthogonal_from_seed, seeds
from triq.correlations import (
    batched_corr,
    batched_spectra,
    bloch_vectors,
    corr_matrix,
    decompose,
    pair_profile,
    profile,
    spectrum,
)
from triq.qstate import (
    PAULIS,
    CanonicalParams,
    DensityMatrix,
    ValidationError,
    basis_state,
    from_canonical,
    ghz,
    haar_random_pure,
    maximally_mixed,
    partial_trace,
    random_mixture,
    singlet,
    w_state,
    werner,
)

PAIRS = ("AB", "AC", "BC")


def trace_corr(rho):
    """Oracle: T_jk by explicit traces of Kronecker products."""
    return np.array([[np.trace(rho @ np.kron(p, q)).real for q in PAULIS] for p in PAULIS])


def canonical_params():
    return st.tuples(*[st.floats(0.01, 1.0)] * 5, st.floats(0, 2 * math.pi)).map(
        lambda t: CanonicalParams.normalized(*t[:5], phi=t[5])
    )


# -- Bloch vectors and T --------------------------------------------------


def test_bloch_of_spin_up_product():
    a, b = bloch_vectors(partial_trace(basis_state("000"), "AB"))
    assert np.allclose(a, [0, 0, 1]) and np.allclose(b, [0, 0, 1])


def test_bloch_of_maximally_mixed():
    a, b = bloch_vectors(maximally_mixed(2))
    assert np.allclose(a, 0) and np.allclose(b, 0)


@given(canonical_params())
def test_bloch_of_canonical_state(p):
    l0, l1, l2, l3, l4 = p.ls
    a, c = bloch_vectors(partial_trace(from_canonical(p), "AC"))
    cos, sin = math.cos(p.phi), math.sin(p.phi)
    assert np.allclose(a, [2 * l0 * l1 * cos, 2 * l0 * l1 * sin, 2 * l0**2 - 1], atol=1e-12)
    assert np.allclose(c, [2 * l1 * l2 * cos + 2 * l3 * l4, -2 * l1 * l2 * sin, 1 - 2 * l2**2 - 2 * l4**2], atol=1e-12)


def test_singlet_correlations():
    assert np.allclose(corr_matrix(singlet()), -np.eye(3), atol=1e-15)


def test_ghz_pair_correlations():
    T = corr_matrix(partial_trace(ghz(), "AB"))
    assert np.allclose(T, np.diag([0, 0, 1]), atol=1e-15)


@pytest.mark.parametrize("w", [0.0, 0.3, 1 / 3, 0.8, 1.0])
def test_werner_correlations(w):
    T = corr_matrix(werner(w))
    assert np.allclose(T, -w * np.eye(3), atol=1e-15)
    assert profile(werner(w)).s_iso == pytest.approx(w * w, abs=1e-12)


@given(seeds)
def test_corr_matches_trace_oracle(seed):
    rho = partial_trace(random_mixture(seed), "BC")
    assert np.allclose(corr_matrix(rho), trace_corr(rho.data), atol=1e-14)


@given(seeds)
def test_corr_bounds(seed):
    T = corr_matrix(partial_trace(haar_random_pure(seed), "AC"))
    assert np.all(np.abs(T) <= 1 + 1e-12)
    assert np.trace(T @ T.T) <= 3 + 1e-10


def test_wrong_dimension():
    with pytest.raises(ValidationError):
        corr_matrix(DensityMatrix(np.eye(2) / 2))
    with pytest.raises(ValidationError):
        bloch_vectors(ghz().density_matrix())
    with pytest.raises(ValidationError):
        spectrum(np.eye(2))


def test_batched_corr_matches():
    rhos = np.array([partial_trace(haar_random_pure(s), "AB").data for s in range(5)])
    assert np.allclose(batched_corr(rhos), [trace_corr(r) for r in rhos], atol=1e-14)


# -- spectrum -------------------------------------------------------------


def test_spectrum_diagonal():
    assert spectrum(np.diag([0, 0, 1.0])) == (1.0, 0.0, 0.0)


def test_spectrum_isotropic():
    assert np.allclose(spectrum(-0.6 * np.eye(3)), [0.36] * 3, atol=1e-15)


def test_w_state_pair():
    rho = partial_trace(w_state(), "AB")
    # oracle from the 4x4 matrix: |W> restricted to AB is (|01>+|10>)/sqrt3 on |0>_C plus |00>/sqrt3 on |1>_C
    v0 = np.array([0, 1, 1, 0]) / math.sqrt(3)
    v1 = np.array([1, 0, 0, 0]) / math.sqrt(3)
    oracle = np.outer(v0, v0) + np.outer(v1, v1)
    assert np.allclose(rho.data, oracle, atol=1e-15)
    T = trace_corr(oracle)
    assert np.allclose(T, np.diag([2 / 3, 2 / 3, -1 / 3]), atol=1e-15)
    assert np.allclose(spectrum(corr_matrix(rho)), [4 / 9, 4 / 9, 1 / 9], atol=1e-15)


@given(seeds, seeds)
def test_spectrum_invariant_under_orthogonal_frames(seed, frame_seed):
    T = corr_matrix(partial_trace(haar_random_pure(seed), "AB"))
    OA, OB = orthogonal_from_seed(frame_seed), orthogonal_from_seed(frame_seed + 1)
    assert np.allclose(spectrum(OA @ T @ OB.T), spectrum(T), atol=1e-10)


@given(seeds)
def test_spectrum_invariant_under_interchange(seed):
    T = corr_matrix(partial_trace(haar_random_pure(seed), "BC"))
    assert np.allclose(spectrum(T.T), spectrum(T), atol=1e-10)
    assert np.allclose(spectrum(corr_matrix(partial_trace(haar_random_pure(seed), "CB"))), spectrum(T), atol=1e-10)


@given(seeds)
def test_spectrum_physical_range(seed):
    s = spectrum(corr_matrix(partial_trace(random_mixture(seed, rank=3), "AC")))
    assert s[0] >= s[1] >= s[2] >= 0
    assert s[0] <= 1 + 1e-10


def test_clamping_small_negatives():
    T = np.zeros((3, 3))
    T[0, 0] = 1.0
    T[1, 1] = 1e-9
    s = spectrum(T)
    assert s[2] == 0.0 and s[1] >= 0.0


@given(seeds)
def test_batched_spectra_agree_with_jacobi(seed):
    T = corr_matrix(partial_trace(haar_random_pure(seed), "AB"))
    assert np.allclose(batched_spectra(T[None])[0], spectrum(T), atol=1e-14)


# -- decomposition --------------------------------------------------------


def test_decompose_maximal_anisotropy():
    p = decompose((1.0, 0.0, 0.0))
    assert p.s_iso == pytest.approx(1 / 3)
    assert p.deltas == pytest.approx((2 / 3, -1 / 3, -1 / 3))
    assert (p.g1, p.g2) == (1.0, 0.0)
    assert p.s_ani**2 == pytest.approx(2 / 3)
    assert p.V_ani == pytest.approx(2 / 27)


def test_decompose_isotropic():
    w2 = 0.49
    p = decompose((w2, w2, w2))
    assert p.s_iso == pytest.approx(w2)
    assert p.deltas == (0.0, 0.0, 0.0)
    assert p.g1 == p.g2 == p.s_ani == p.V_ani == 0.0


def test_decompose_w_spectrum():
    p = decompose((4 / 9, 4 / 9, 1 / 9))
    assert p.s_iso == pytest.approx(1 / 3, abs=1e-15)
    assert p.deltas == pytest.approx((1 / 9, 1 / 9, -2 / 9), abs=1e-15)
    assert p.g1 == pytest.approx(0, abs=1e-15)
    assert p.g2 == pytest.approx(1 / 3, abs=1e-15)
    assert p.V_ani == pytest.approx(-2 / 729, abs=1e-15)


def test_decompose_rejects_unordered():
    with pytest.raises(ValidationError):
        decompose((0.1, 0.5, 0.0))


@given(st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_profile_identities(values):
    s = sorted(values, reverse=True)
    p = decompose(s)
    assert abs(sum(p.deltas)) <= 1e-12
    assert p.g1 == pytest.approx(p.ds1 - p.ds2, abs=1e-12)
    assert p.g2 == pytest.approx(p.ds2 - p.ds3, abs=1e-12)
    assert min(p.g1, p.g2) >= -1e-12
    assert p.s_ani**2 == pytest.approx(sum(d * d for d in p.deltas), abs=1e-12)
    assert p.V_ani == pytest.approx(p.ds1 * p.ds2 * p.ds3, abs=1e-12)


def test_profile_as_dict_keys():
    keys = set(pair_profile(ghz(), "AB").as_dict())
    assert keys == {"s_iso", "ds1", "ds2", "ds3", "g1", "g2", "s_ani", "V_ani"}


# -- three-qubit sum rules ------------------------------------------------


@given(seeds)
def test_iso_sum_pure(seed):
    psi = haar_random_pure(seed)
    assert sum(pair_profile(psi, p).s_iso for p in PAIRS) == pytest.approx(1, abs=1e-10)


@given(seeds)
def test_iso_sum_mixed_is_bounded(seed):
    rho = random_mixture(seed, rank=2)
    assert sum(pair_profile(rho, p).s_iso for p in PAIRS) <= 1 + 1e-10


@given(seeds)
def test_iso_from_bloch_lengths(seed):
    psi = haar_random_pure(seed)
    r2 = {x: float(np.sum(bloch_vectors(partial_trace(psi, x + y))[0] ** 2)) for x, y in zip("ABC", "BCA")}
    for (x, y), z in (("AB", "C"), ("AC", "B"), ("BC", "A")):
        expected = (1 + 2 * r2[z] - r2[x] - r2[y]) / 3
        assert pair_profile(psi, x + y).s_iso == pytest.approx(expected, abs=1e-10)
