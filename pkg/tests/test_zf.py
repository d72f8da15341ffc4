import numpy as np
import pytest

from conftest import crandn
from risfair import linalg, zf
from risfair.channel import ChannelSet
from risfair.zf import PhaseShift


def _channels(rng, M=4, N=6, K=3):
    return ChannelSet(crandn(rng, N, M), crandn(rng, K, M), crandn(rng, K, N))


def test_phase_shift_validation():
    with pytest.raises(ValueError):
        PhaseShift(0.0, np.ones(2))
    with pytest.raises(ValueError):
        PhaseShift(0.5, np.array([1.5, 1.0]))
    ps = PhaseShift.from_angles([0.0, np.pi / 2], 0.25)
    np.testing.assert_allclose(ps.matrix, 0.5 * np.diag([1.0, 1j]), atol=1e-15)


def test_effective_channel_ris_silenced(rng):
    ch = _channels(rng)
    X = zf.effective_channel(ch, PhaseShift(0.8, np.zeros(ch.N)))
    np.testing.assert_array_equal(X, ch.h_direct.conj())


def test_effective_channel_independent_of_phase_without_reflection(rng):
    ch = _channels(rng)
    ch = ChannelSet(ch.G, ch.h_direct, np.zeros_like(ch.h_reflect))
    a = zf.effective_channel(ch, PhaseShift.unit(ch.N, 0.8))
    b = zf.effective_channel(ch, PhaseShift.from_angles(rng.uniform(0, 6, ch.N), 0.3))
    np.testing.assert_array_equal(a, b)


def test_effective_channel_scalar_by_hand():
    hd, hr, g = 0.3 - 0.2j, 1.1 + 0.5j, -0.7 + 0.4j
    eta, phi = 0.64, np.exp(0.9j)
    ch = ChannelSet([[g]], [[hd]], [[hr]])
    X = zf.effective_channel(ch, PhaseShift(eta, [phi]))
    # h_k^H = (h_d + G^H Phi^H h_r)^H = conj(h_d) + conj(h_r) sqrt(eta) phi g
    expected = np.conj(hd) + np.conj(hr) * np.sqrt(eta) * phi * g
    assert X[0, 0] == pytest.approx(expected, abs=1e-15)


def test_effective_channel_matches_stacked_column_form(rng):
    ch = _channels(rng)
    ps = PhaseShift.from_angles(rng.uniform(0, 6, ch.N), 0.8)
    for k in range(ch.K):
        h_k = ch.h_direct[k] + ch.G.conj().T @ ps.matrix.conj().T @ ch.h_reflect[k]
        np.testing.assert_allclose(zf.effective_channel(ch, ps)[k], h_k.conj(), atol=1e-12)


def test_zf_identity_and_residual(rng):
    np.testing.assert_allclose(zf.zf_from_effective(np.eye(3)), np.eye(3), atol=1e-15)
    X = crandn(rng, 3, 5)
    W = zf.zf_from_effective(X)
    np.testing.assert_allclose(X @ W, np.eye(3), atol=1e-10)


def test_zf_rank_error_on_duplicate_users(rng):
    row = crandn(rng, 1, 4)
    with pytest.raises(zf.ZFRankError):
        zf.zf_from_effective(np.vstack([row, row]))
    with pytest.raises(zf.ZFRankError):
        zf.zf_from_effective(crandn(rng, 3, 2))


def test_sinr_exact_zf_unit_rate():
    X = np.eye(2)
    W = zf.zf_from_effective(X)
    s = zf.sinr_all(X, W, [2.0, 2.0], 2.0)
    np.testing.assert_allclose(s, [1.0, 1.0])
    np.testing.assert_allclose(zf.user_rate(s), [1.0, 1.0])
    assert zf.sinr_all(X, W, [0.0, 2.0], 2.0)[0] == 0.0


def test_sinr_matches_direct_quotient(rng):
    ch = _channels(rng)
    ps = PhaseShift.from_angles(rng.uniform(0, 6, ch.N), 0.8)
    W = crandn(rng, ch.M, ch.K)
    p = rng.uniform(0.1, 2.0, ch.K)
    sigma2 = 0.3
    for k in range(ch.K):
        h_k = ch.h_direct[k] + ch.G.conj().T @ ps.matrix.conj().T @ ch.h_reflect[k]
        num = p[k] * abs(np.vdot(h_k, W[:, k])) ** 2
        den = sum(p[i] * abs(np.vdot(h_k, W[:, i])) ** 2 for i in range(ch.K) if i != k) + sigma2
        assert zf.sinr(k, ch, ps, W, p, sigma2) == pytest.approx(num / den, rel=1e-12)


def test_user_rate_values():
    np.testing.assert_allclose(zf.user_rate([0.0, 1.0, 3.0]), [0.0, 1.0, 2.0])


def test_transmit_power(rng):
    Q, _ = np.linalg.qr(crandn(rng, 4, 3))
    assert zf.transmit_power(Q, np.ones(3)) == pytest.approx(3.0)
    assert zf.transmit_power(Q, np.zeros(3)) == 0.0
    W = crandn(rng, 4, 3)
    p = rng.uniform(0, 2, 3)
    trace_form = np.real(np.trace(np.diag(p) @ W.conj().T @ W))
    assert zf.transmit_power(W, p) == pytest.approx(trace_form, rel=1e-12)


def test_b_matrix_identity_and_scalar(rng):
    B = zf.b_matrix(np.eye(3))
    np.testing.assert_array_equal(B, np.eye(9))
    assert zf.b_entry(B, 1, 1) == 1.0
    w = crandn(rng, 4, 1)
    np.testing.assert_allclose(zf.b_matrix(w), [[np.linalg.norm(w) ** 2]])


def test_b_matrix_quadratic_form_and_cross_terms(rng):
    W = crandn(rng, 5, 4)
    p = rng.uniform(0.1, 3.0, 4)
    q = linalg.vec(np.diag(np.sqrt(p))).ravel()
    B = zf.b_matrix(W)
    assert np.real(np.vdot(q, B @ q)) == pytest.approx(zf.transmit_power(W, p), rel=1e-12)
    for k in range(4):
        for j in range(4):
            expected = np.linalg.norm(W[:, k]) ** 2 if k == j else 0.0
            assert zf.b_entry(B, k, j) == pytest.approx(expected, abs=1e-12)
