import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn
from oracles import t_grid_scan
from risfair import linalg, poweropt, zf
from risfair.poweropt import FairnessSpec, PowerConfig

LN2 = np.log(2.0)


def test_fairness_spec_normalizes_and_parses():
    np.testing.assert_allclose(FairnessSpec([2, 4, 6]).xi, [1, 2, 3])
    np.testing.assert_allclose(FairnessSpec.parse("1:2:3:4").xi, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        FairnessSpec([1, 0])
    with pytest.raises(ValueError):
        FairnessSpec([])


def test_power_profile_values():
    np.testing.assert_array_equal(poweropt.power_profile(0.0, [1, 2], 1.0), [0.0, 0.0])
    np.testing.assert_allclose(poweropt.power_profile(1.0, [1, 1], 1.0), [1.0, 1.0])
    np.testing.assert_allclose(poweropt.power_profile(1.0, [1, 2], 1.0), [1.0, 3.0])
    with pytest.raises(ValueError):
        poweropt.power_profile(-1.0, [1], 1.0)


def test_consumed_power_monotone_and_b_form(rng):
    W = crandn(rng, 4, 3)
    xi = [1.0, 2.0, 3.0]
    assert poweropt.consumed_power_at(0.0, xi, 0.5, W) == 0.0
    ts = np.linspace(0.01, 3.0, 50)
    vals = [poweropt.consumed_power_at(t, xi, 0.5, W) for t in ts]
    assert np.all(np.diff(vals) > 0)
    p = poweropt.power_profile(1.3, xi, 0.5)
    q = linalg.vec(np.diag(np.sqrt(p))).ravel()
    b_form = np.real(np.vdot(q, zf.b_matrix(W) @ q))
    assert poweropt.consumed_power_at(1.3, xi, 0.5, W) == pytest.approx(b_form, rel=1e-12)


def test_bisection_analytic_case():
    sol = poweropt.max_t_bisection(np.eye(2), [1, 1], 1.0, 2.0)
    assert sol.t == pytest.approx(1.0, rel=1e-8)
    np.testing.assert_allclose(sol.p, [1.0, 1.0], rtol=1e-8)


def test_bisection_vanishing_budget():
    sols = [poweropt.max_t_bisection(np.eye(2), [1, 1], 1.0, pm) for pm in (1e-3, 1e-6, 1e-9)]
    assert sols[0].t > sols[1].t > sols[2].t
    assert sols[2].t < 1e-8
    with pytest.raises(ValueError):
        poweropt.max_t_bisection(np.eye(2), [1, 1], 1.0, 0.0)


def test_bisection_respects_lower_bracket(rng):
    W = crandn(rng, 3, 2)
    free = poweropt.max_t_bisection(W, [1, 2], 0.1, 1.0)
    hinted = poweropt.max_t_bisection(W, [1, 2], 0.1, 1.0, t_lo=0.5 * free.t)
    assert hinted.t == pytest.approx(free.t, rel=1e-8)
    # an infeasible hint is ignored
    over = poweropt.max_t_bisection(W, [1, 2], 0.1, 1.0, t_lo=10 * free.t)
    assert over.t == pytest.approx(free.t, rel=1e-8)


def test_bisection_matches_grid_scan_k2(rng):
    for _ in range(10):
        W = crandn(rng, 3, 2)
        xi = FairnessSpec(rng.uniform(1, 3, 2))
        sol = poweropt.max_t_bisection(W, xi, 0.2, 2.0)
        grid = t_grid_scan(zf.column_norms_sq(W), xi.xi, 0.2, 2.0)
        assert abs(sol.t - grid) <= 1e-5


@settings(max_examples=60, deadline=None)
@given(K=st.integers(1, 5), seed=st.integers(0, 2**31 - 1), log_p=st.floats(-4, 2))
def test_bisection_budget_active_and_proportional(K, seed, log_p):
    rng = np.random.default_rng(seed)
    W = crandn(rng, K + 1, K)
    xi = FairnessSpec(rng.uniform(1, 4, K))
    P_max = 10.0**log_p
    sol = poweropt.max_t_bisection(W, xi, 1e-2, P_max)
    assert 1 - 1e-6 <= sol.consumed_power / P_max <= 1 + 1e-9
    q = sol.rates / xi.xi
    assert np.ptp(q) <= 1e-9 * q.mean()
    np.testing.assert_allclose(poweropt.rates_from_power(sol.p, 1e-2), sol.rates, rtol=1e-9)


def test_stationary_powers_single_user_kkt():
    w = np.array([[0.6 + 0.8j], [0.5]])
    norm = np.linalg.norm(w) ** 2
    B = zf.b_matrix(w)
    mu1, sigma2 = 3.0, 0.05
    p = poweropt.stationary_powers(0.7, [mu1], B, [1.0], sigma2)
    # stationarity of ln(1+p/s2)/ln2 - mu1 (norm p - P): 1/(ln2 (s2 + p)) = mu1 norm
    assert p[0] == pytest.approx(1.0 / (LN2 * mu1 * norm) - sigma2, rel=1e-12)


def test_stationary_powers_clip_at_zero():
    p = poweropt.stationary_powers(0.5, [1e6], zf.b_matrix(np.eye(1)), [1.0], 1.0)
    assert p[0] == 0.0


def test_lagrangian_route_equal_weights_identity():
    sol = poweropt.lagrangian_power_route(np.eye(4), [1, 1, 1, 1], 1.0, 4.0)
    ref = poweropt.max_t_bisection(np.eye(4), [1, 1, 1, 1], 1.0, 4.0)
    assert sol.converged
    assert abs(sol.t - ref.t) <= 1e-3


@pytest.mark.parametrize("xi", [[1, 1, 1], [1, 2, 3], [3, 1, 2]])
def test_lagrangian_route_agrees_with_bisection(rng, xi):
    for _ in range(5):
        W = crandn(rng, 4, 3) * 30
        sol = poweropt.lagrangian_power_route(W, xi, 1e-3, 1.0, PowerConfig())
        ref = poweropt.max_t_bisection(W, xi, 1e-3, 1.0)
        assert sol.consumed_power <= 1.0 * (1 + 1e-9)
        assert sol.t == pytest.approx(ref.t, rel=1e-5)


def test_lagrangian_route_vanishing_budget():
    sol = poweropt.lagrangian_power_route(np.eye(2), [1, 2], 1.0, 1e-9)
    assert np.all(sol.p < 1e-8)
