import math

import numpy as np
import pytest
from scipy.integrate import quad

from lorentz_qubit import measurement as ms, pauli
from lorentz_qubit.states import BlochState, UnnormalizedState
from oracles import dense, density, bloch


def test_classical_bayes_example():
    m, _ = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(0.8, 0.2))
    post, p = ms.bayes_update(BlochState([0, 0, 0]), m)
    assert p == pytest.approx(0.5, abs=1e-14)
    assert post.populations() == pytest.approx((0.8, 0.2), abs=1e-14)


def test_projective_update():
    m, dec = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(1.0, 0.0))
    assert not dec.finite
    post, p = ms.bayes_update(BlochState([1, 0, 0]), m)
    assert p == pytest.approx(0.5)
    np.testing.assert_allclose(post.vector, [0, 0, 1], atol=1e-14)
    with pytest.raises(ValueError):
        ms.linear_update(UnnormalizedState.from_bloch([1, 0, 0]), dec)
    with pytest.raises(ms.ImpossibleOutcomeError):
        ms.bayes_update(BlochState([0, 0, -1]), m)


def test_uninformative_outcome_leaves_state():
    m, dec = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(0.3, 0.3))
    post, p = ms.bayes_update(BlochState([0.1, 0.2, 0.3]), m)
    np.testing.assert_allclose(post.vector, [0.1, 0.2, 0.3], atol=1e-14)
    assert p == pytest.approx(0.3)
    assert dec.surprisal == 0


def test_likelihood_validation():
    with pytest.raises(ValueError):
        ms.DetectorLikelihoods(0, 0)
    with pytest.raises(ValueError):
        ms.DetectorLikelihoods(-0.1, 0.5)


def test_kraus_on_tilted_axis_matches_dense():
    n = np.array([1.0, 1.0, 0]) / math.sqrt(2)
    m, _ = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(0.7, 0.1), axis=n)
    P = (np.eye(2) + dense(np.concatenate([[0], n]))) / 2
    want = math.sqrt(0.7) * P + math.sqrt(0.1) * (np.eye(2) - P)
    np.testing.assert_allclose(dense(m), want, atol=1e-14)


def test_linear_update_worked_example():
    s = UnnormalizedState.from_bloch([0, 0, 0])
    dec = ms.MeasurementDecomposition(0.4, math.log(4))
    out = ms.linear_update(s, dec)
    assert out.trace == pytest.approx(1.25, abs=1e-14)
    assert math.exp(out.log_scale) * out.trace == pytest.approx(0.5, abs=1e-14)


def test_trace_formula_for_diagonal_prior():
    rng = np.random.default_rng(4)
    for _ in range(100):
        z = rng.uniform(-1, 1)
        lam = rng.normal(0, 2)
        out = ms.linear_update(UnnormalizedState.from_bloch([0, 0, z]), ms.MeasurementDecomposition(1.0, lam))
        p0, p1 = (1 + z) / 2, (1 - z) / 2
        assert out.trace == pytest.approx(math.exp(lam / 2) * p0 + math.exp(-lam / 2) * p1, rel=1e-12)


def test_repeated_updates_add_surprisal():
    s = UnnormalizedState.from_bloch([0.2, 0, 0.4])
    dec = ms.MeasurementDecomposition(1.0, 0.3)
    for _ in range(5):
        s = ms.linear_update(s, dec)
    once = ms.linear_update(UnnormalizedState.from_bloch([0.2, 0, 0.4]), ms.MeasurementDecomposition(1.0, 1.5))
    np.testing.assert_allclose(s.s, once.s, rtol=1e-12)


def test_gaussian_op_limits():
    cfg0 = ms.GaussianMeasurementConfig(1.0, 0.1, 0.0)
    R = ms.gaussian_measurement_op(0.7, cfg0)
    np.testing.assert_allclose(R.imag, 0, atol=1e-15)
    np.testing.assert_allclose(dense(R), np.diag([math.exp(0.07), math.exp(-0.07)]), atol=1e-14)
    cfg90 = ms.GaussianMeasurementConfig(1.0, 0.1, math.pi / 2)
    U = dense(ms.gaussian_measurement_op(0.7, cfg90))
    np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(U, np.diag([np.exp(-0.07j), np.exp(0.07j)]), atol=1e-14)
    r = np.linspace(-3, 3, 13)
    for th in (0.0, 0.4, 2.0):
        det = pauli.det(ms.gaussian_measurement_op(r, ms.GaussianMeasurementConfig(2.0, 0.03, th)))
        np.testing.assert_allclose(det, 1, atol=1e-12)


def test_record_density_and_kraus_agree():
    cfg = ms.GaussianMeasurementConfig(1.3, 0.05, 0.6)
    S = np.array([0.3, -0.2, 0.5])
    for r in (-2.0, 0.1, 1.7):
        M = dense(ms.gaussian_kraus(r, cfg))
        born = np.trace(M @ density(S) @ M.conj().T).real
        assert ms.record_density(r, S, cfg) == pytest.approx(born, rel=1e-12)
    total, _ = quad(lambda r: ms.record_density(r, S, cfg), -np.inf, np.inf)
    assert total == pytest.approx(1, abs=1e-10)


def test_sampler_matches_mixture():
    cfg = ms.GaussianMeasurementConfig(1.0, 0.5, 0.3)
    rng = np.random.default_rng(8)
    state = BlochState([0, 0, 0.6])
    r = np.array([ms.sample_readout(state, cfg, rng) for _ in range(20000)])
    mean = 0.6 * math.cos(0.3)
    var = cfg.sigma ** 2 + math.cos(0.3) ** 2 - mean ** 2
    assert abs(r.mean() - mean) < 5 * math.sqrt(var / len(r))
    assert r.var() == pytest.approx(var, rel=0.05)


def test_average_backaction_dephases():
    cfg = ms.GaussianMeasurementConfig(1.0, 0.2, 0.9)
    avg = ms.average_backaction(UnnormalizedState.from_bloch([0.6, 0.0, 0.8]), cfg)
    # ensemble map: z untouched, transverse shrinks by exp(-Gamma dt), independent of theta
    np.testing.assert_allclose(2 * avg[1:], [0.6 * math.exp(-0.2), 0, 0.8], atol=1e-8)
    assert 2 * avg[0] == pytest.approx(1, abs=1e-8)


def test_compose_sequence_joint_probability():
    cfg = ms.GaussianMeasurementConfig(1.0, 0.1, 0.4)
    rs = [0.3, -1.2, 0.8]
    ops = [ms.gaussian_measurement_op(r, cfg) for r in rs]
    pbars = [float(ms.gaussian_mean_likelihood(r, cfg)) for r in rs]
    prod, joint = ms.compose_sequence(ops, BlochState([0.5, 0, 0]), pbars)
    rho = density([0.5, 0, 0])
    want, M = 1.0, np.eye(2)
    for r in rs:
        K = dense(ms.gaussian_kraus(r, cfg))
        M = K @ M
    want = np.trace(M @ rho @ M.conj().T).real
    assert joint == pytest.approx(want, rel=1e-12)
    # sequential Bayes gives the same product of probabilities
    state, p = BlochState([0.5, 0, 0]), 1.0
    for r in rs:
        state, q = ms.bayes_update(state, ms.gaussian_kraus(r, cfg))
        p *= q
    assert p == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        ms.compose_sequence([])


def test_linear_update_bookkeeping_random():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a, b = rng.random(2) + 1e-3
        S = rng.standard_normal(3)
        S *= rng.random() / np.linalg.norm(S)
        s = UnnormalizedState.from_bloch(S)
        m, dec = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(a, b))
        _, p = ms.bayes_update(BlochState(S), m)
        post = ms.linear_update(s, dec)
        assert ms.record_probability(post, s) == pytest.approx(p, rel=1e-12)
        M = dense(m)
        np.testing.assert_allclose(bloch(M @ density(S) @ M.conj().T), post.s[1:] / post.s[0], atol=1e-12)


def test_kraus_worked_values():
    m, dec = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(0.8, 0.2))
    assert dec.surprisal == pytest.approx(math.log(4)) and dec.mean_likelihood == pytest.approx(0.4)
    np.testing.assert_allclose(dense(m), np.diag([math.sqrt(0.8), math.sqrt(0.2)]), atol=1e-15)
    m, dec = ms.kraus_from_likelihoods(ms.DetectorLikelihoods(0.5, 0.5))
    np.testing.assert_allclose(m, [math.sqrt(0.5), 0, 0, 0], atol=1e-15)
    assert dec.surprisal == 0 and dec.mean_likelihood == 0.5
    out = ms.linear_update(UnnormalizedState.from_bloch([0.2, 0.3, 0.1]), dec)
    assert out.trace == 1.0


def test_sampler_worked_cases():
    rng = np.random.default_rng(21)
    cfg = ms.GaussianMeasurementConfig(1.0, 0.1, 0.0)
    r = np.array([ms.sample_readout(BlochState([0, 0, 1]), cfg, rng) for _ in range(100_000)])
    assert abs(r.mean() - 1) < 5 * cfg.sigma / math.sqrt(len(r))
    cfg90 = ms.GaussianMeasurementConfig(1.0, 0.1, math.pi / 2)
    r = np.array([ms.sample_readout(BlochState([0, 0, 1]), cfg90, rng) for _ in range(20_000)])
    assert abs(r.mean()) < 5 * cfg90.sigma / math.sqrt(len(r))
    from scipy import stats
    r = np.array([ms.sample_readout(BlochState([1, 0, 0]), cfg, rng) for _ in range(20_000)])
    cdf = lambda x: 0.5 * (stats.norm.cdf(x, 1, cfg.sigma) + stats.norm.cdf(x, -1, cfg.sigma))
    assert stats.kstest(r, cdf).pvalue > 0.01


def test_sequence_composition_identities():
    cfg = ms.GaussianMeasurementConfig(1.0, 0.1, 0.3)
    a, b = ms.gaussian_measurement_op(0.4, cfg), ms.gaussian_measurement_op(-1.1, cfg)
    prod, _ = ms.compose_sequence([a, b])
    np.testing.assert_allclose(prod, ms.gaussian_measurement_op(0.4 - 1.1, cfg), atol=1e-14)
    inv, _ = ms.compose_sequence([a, ms.gaussian_measurement_op(-0.4, cfg)])
    np.testing.assert_allclose(inv, pauli.IDENTITY, atol=1e-14)
    assert np.allclose(ms.gaussian_measurement_op(0.0, ms.GaussianMeasurementConfig(1.0, 0.1)), pauli.IDENTITY)


def test_random_sequence_chain_rule():
    rng = np.random.default_rng(22)
    for _ in range(20):
        cfg = ms.GaussianMeasurementConfig(rng.uniform(0.5, 2), 0.05, rng.uniform(0, math.pi))
        rs = rng.standard_normal(5) * 2
        S = rng.standard_normal(3)
        S *= rng.random() / np.linalg.norm(S)
        _, joint = ms.compose_sequence([ms.gaussian_measurement_op(r, cfg) for r in rs], BlochState(S),
                                       [float(ms.gaussian_mean_likelihood(r, cfg)) for r in rs])
        state, p = BlochState(S), 1.0
        for r in rs:
            state, q = ms.bayes_update(state, ms.gaussian_kraus(r, cfg))
            p *= q
        assert joint == pytest.approx(p, rel=1e-10)
