import math

import numpy as np
import pytest
from hypothesis import given, settings
from statsmodels.stats.proportion import proportions_ztest

from conftest import orthogonal_from_seed, seeds
from triq.correlations import corr_matrix, decompose, pair_profile, spectrum
from triq.qstate import (
    DensityMatrix,
    NoiseParams,
    ValidationError,
    ghz,
    haar_random_pure,
    partial_trace,
    singlet,
    w_state,
)
from triq.secretshare import (
    EncodingScheme,
    ShotRecord,
    decode_bit,
    default_scheme,
    encode_bit,
    estimate_gaps,
    exact_record,
    outcome_probabilities,
    parse_bits,
    record_from_correlations,
    run_protocol,
    simulate_shots,
    two_proportion_pvalue,
)

EYE = (np.eye(3), np.eye(3))


# -- scheme ---------------------------------------------------------------


def test_encode_default_scheme():
    scheme = default_scheme()
    assert encode_bit(0, scheme) is scheme.state0
    assert encode_bit(1, scheme) is scheme.state1
    p0, p1 = pair_profile(scheme.state0, "AB"), pair_profile(scheme.state1, "AB")
    assert (p0.g1, p0.g2) == pytest.approx((1, 0), abs=1e-12)
    assert (p1.g1, p1.g2) == pytest.approx((0, 1 / 3), abs=1e-12)


def test_encode_rejects_non_bits():
    with pytest.raises(ValidationError):
        encode_bit(2, default_scheme())


@pytest.mark.parametrize("states", [(w_state(), w_state()), (ghz(), ghz()), (w_state(), ghz())])
def test_invalid_schemes_rejected(states):
    with pytest.raises(ValidationError):
        EncodingScheme(*states)


def test_margin_must_be_positive():
    with pytest.raises(ValidationError):
        EncodingScheme(ghz(), w_state(), margin=0)


def test_scheme_sign_invariant_on_every_pair():
    scheme = default_scheme()
    for pair in ("AB", "AC", "BC"):
        assert pair_profile(scheme.state0, pair).ds2 < 0 < pair_profile(scheme.state1, pair).ds2


# -- shot simulation ------------------------------------------------------


def test_large_n_matches_rotated_noisy_correlations():
    psi = haar_random_pure(17)
    OA, OB = orthogonal_from_seed(1), orthogonal_from_seed(2)
    noise = NoiseParams(0.9, 0.7, 1.0)
    n = 100_000
    record = simulate_shots(psi, "AB", (OA, OB), noise, n, seed=3)
    expected = 0.9 * 0.7 * OA.T @ corr_matrix(partial_trace(psi, "AB")) @ OB
    se = np.sqrt((1 - expected**2) / n)
    assert np.all(np.abs(record.correlations() - expected) <= 3 * se)


def test_born_probabilities_sum_and_marginals():
    rho = partial_trace(haar_random_pure(2), "BC")
    probs = outcome_probabilities(rho, (orthogonal_from_seed(5), orthogonal_from_seed(6)))
    assert np.allclose(probs.sum(axis=(2, 3)), 1)
    assert np.all(probs >= 0)


def test_singlet_aligned_frames_anticorrelated():
    record = simulate_shots(singlet(), "AB", EYE, NoiseParams(), 1000, seed=0)
    zz = record.counts[2, 2]
    assert zz[0, 0] == zz[1, 1] == 0
    assert zz.sum() == 1000


def test_fully_depolarized_outcomes_uniform():
    probs = outcome_probabilities(DensityMatrix(np.eye(4) / 4), EYE)
    assert np.allclose(probs, 0.25)
    record = simulate_shots(ghz(), "AB", EYE, NoiseParams(0, 0, 0), 100_000, seed=1)
    assert np.all(np.abs(record.correlations()) < 5 / math.sqrt(100_000))


def test_simulation_deterministic():
    a = simulate_shots(w_state(), "AC", EYE, NoiseParams(), 500, seed=9)
    b = simulate_shots(w_state(), "AC", EYE, NoiseParams(), 500, seed=9)
    assert np.array_equal(a.counts, b.counts)


def test_non_orthogonal_frame_rejected():
    with pytest.raises(ValidationError):
        simulate_shots(ghz(), "AB", (np.eye(3), 2 * np.eye(3)), NoiseParams(), 10)
    with pytest.raises(ValidationError):
        simulate_shots(ghz(), "AB", EYE, NoiseParams(), 0)


# -- estimation and decoding ----------------------------------------------


def test_exact_record_of_diagonal_correlations():
    assert estimate_gaps(record_from_correlations(np.diag([0.0, 0.0, 1.0]))) == pytest.approx((1, 0))


def test_missing_setting_rejected():
    counts = np.ones((3, 3, 2, 2))
    counts[1, 2] = 0
    with pytest.raises(ValidationError, match=r"\(2, 3\)"):
        ShotRecord(counts)
    with pytest.raises(ValidationError):
        ShotRecord(np.ones((3, 2, 2, 2)))
    with pytest.raises(ValidationError):
        ShotRecord(-np.ones((3, 3, 2, 2)))


def test_ghz_random_frames_within_bootstrap_error():
    frames = (orthogonal_from_seed(11), orthogonal_from_seed(12))
    n = 100_000
    g1, g2 = estimate_gaps(simulate_shots(ghz(), "BC", frames, NoiseParams(), n, seed=0))
    # parametric bootstrap: rerun the simulator with fresh seeds
    boot = np.array([estimate_gaps(simulate_shots(ghz(), "BC", frames, NoiseParams(), n, seed=s)) for s in range(1, 41)])
    se = boot.std(axis=0)
    assert abs(g1 - 1) <= 5 * se[0]
    assert abs(g2 - 0) <= 5 * se[1] + 1e-12


def test_w_gaps_rescaled_by_noise():
    noise = NoiseParams(0.9, 0.9, 1.0)
    g1, g2 = estimate_gaps(exact_record(w_state(), "AB", noise=noise))
    assert g1 == pytest.approx(0, abs=1e-12)
    assert g2 == pytest.approx(0.81**2 / 3, abs=1e-12)
    assert decode_bit(g1, g2) == 1


def test_decode_examples():
    assert decode_bit(1.0, 0.0) == 0
    assert decode_bit(0.0, 0.33) == 1
    assert decode_bit(0.2, 0.2) == 0


def test_noisy_ghz_decodes_reliably():
    report = run_protocol([0] * 100, noise=NoiseParams(0.8, 0.8, 0.8), shots=100_000, seed=2, frames="random")
    assert report.bit_errors / 100 < 0.01


@given(seeds)
@settings(max_examples=25)
def test_decoded_bit_frame_invariant_exact(seed):
    frames = (orthogonal_from_seed(seed), orthogonal_from_seed(seed + 7))
    for bit, state in enumerate((ghz(), w_state())):
        assert decode_bit(*estimate_gaps(exact_record(state, "AC", frames))) == bit


@given(seeds)
@settings(max_examples=25)
def test_noise_preserves_gap_sign_and_ratio(seed):
    rng = np.random.default_rng(seed)
    etas = NoiseParams(*rng.uniform(0.05, 1, 3))
    psi = haar_random_pure(seed)
    clean = decompose(spectrum(corr_matrix(partial_trace(psi, "AB"))))
    g1, g2 = estimate_gaps(exact_record(psi, "AB", noise=etas))
    scale = (etas.eta_A * etas.eta_B) ** 2
    assert g1 == pytest.approx(scale * clean.g1, abs=1e-10)
    assert g2 == pytest.approx(scale * clean.g2, abs=1e-10)
    assert np.sign(g1 - g2) == np.sign(clean.g1 - clean.g2)
    if clean.g2 > 1e-3:
        assert g1 / g2 == pytest.approx(clean.g1 / clean.g2, rel=1e-8)


def test_error_rate_non_increasing_in_shots():
    # heavy noise shrinks the gaps 16-fold so that small N actually makes errors
    noise = NoiseParams(0.5, 0.5, 0.5)
    bits = [int(b) for b in np.random.default_rng(0).integers(0, 2, 200)]
    rates = [run_protocol(bits, noise=noise, shots=n, seed=4).bit_errors for n in (1_000, 10_000, 100_000)]
    assert rates[0] > 0
    assert rates[0] >= rates[1] >= rates[2]


# -- protocol -------------------------------------------------------------


def test_protocol_noiseless():
    bits = [int(b) for b in np.random.default_rng(1).integers(0, 2, 100)]
    report = run_protocol(bits, shots=100_000, seed=0)
    assert report.accuracy >= 0.99
    d = report.to_dict()
    assert set(d) == {"accuracy", "bit_errors", "n_bits", "mean_g1", "mean_g2"}


def test_protocol_reproducible():
    a = run_protocol([0, 1, 1], shots=1000, seed=5, frames="random")
    b = run_protocol([0, 1, 1], shots=1000, seed=5, frames="random")
    assert a.g1 == b.g1 and a.g2 == b.g2


def test_protocol_bad_frame_policy():
    with pytest.raises(ValidationError):
        run_protocol([0], frames="aligned")


def test_fixed_and_random_frames_indistinguishable():
    bits = [int(b) for b in np.random.default_rng(2).integers(0, 2, 100)]
    noise = NoiseParams(0.45, 0.45, 0.45)
    fixed = run_protocol(bits, noise=noise, shots=2_000, seed=0, frames="fixed")
    rand = run_protocol(bits, noise=noise, shots=2_000, seed=0, frames="random")
    assert two_proportion_pvalue(fixed.bit_errors, 100, rand.bit_errors, 100) > 0.05


# -- helpers --------------------------------------------------------------


@pytest.mark.parametrize("k1, n1, k2, n2", [(5, 100, 12, 100), (30, 200, 31, 180), (0, 50, 4, 60)])
def test_two_proportion_matches_statsmodels(k1, n1, k2, n2):
    _, p = proportions_ztest([k1, k2], [n1, n2])
    assert two_proportion_pvalue(k1, n1, k2, n2) == pytest.approx(p, rel=1e-10)


def test_two_proportion_degenerate():
    assert two_proportion_pvalue(0, 100, 0, 100) == 1.0


def test_parse_bits():
    assert parse_bits("a5") == [1, 0, 1, 0, 0, 1, 0, 1]
    assert parse_bits("0xF") == [1, 1, 1, 1]
    for bad in ("", "xyz", "0x"):
        with pytest.raises(ValidationError):
            parse_bits(bad)
