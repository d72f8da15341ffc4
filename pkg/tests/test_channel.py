import numpy as np
import pytest

from risfair.channel import (
    ChannelSet,
    Geometry,
    PathLossParams,
    dbm_to_watts,
    link_gain,
    noise_power,
    place_users,
    rayleigh,
    sample_channels,
)


def test_users_at_center_for_zero_radius():
    pos = place_users(3, 5, center=(200.0, 0.0), radius=0.0)
    np.testing.assert_array_equal(pos, np.tile([200.0, 0.0], (5, 1)))


def test_users_deterministic():
    np.testing.assert_array_equal(place_users(7, 4), place_users(7, 4))
    assert not np.array_equal(place_users(7, 4), place_users(8, 4))


def test_users_uniform_on_disc_mean_radius():
    pos = place_users(0, 100_000, center=(0.0, 0.0), radius=10.0)
    r = np.linalg.norm(pos, axis=1)
    assert r.max() <= 10.0
    assert r.mean() == pytest.approx(2.0 / 3.0 * 10.0, rel=0.01)


def test_noise_power_values():
    assert noise_power(1.0, -30.0) == pytest.approx(1e-6)
    n = noise_power(180e3, -174.0)
    assert 10 * np.log10(n) + 30 == pytest.approx(-121.4473, abs=1e-3)
    assert n == pytest.approx(7.16e-16, rel=1e-3)
    ratio_db = 10 * np.log10(noise_power(2e3, -174.0) / noise_power(1e3, -174.0))
    assert ratio_db == pytest.approx(3.0103, abs=1e-4)


def test_noise_power_rejects_bad_bandwidth():
    with pytest.raises(ValueError):
        noise_power(0.0, -174.0)


def test_dbm_to_watts():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)


def test_rayleigh_unit_variance():
    h = rayleigh(np.random.default_rng(1), (200_000,))
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.01)
    assert abs(np.mean(h)) < 0.01


def test_rayleigh_rows_nest():
    a = rayleigh(np.random.default_rng(5), (3, 4))
    b = rayleigh(np.random.default_rng(5), (6, 4))
    np.testing.assert_array_equal(a, b[:3])


def test_unit_distance_gain_monte_carlo():
    g = link_gain(1.0, 3.5, 30.0)
    assert g == pytest.approx(1e-3)
    h = np.sqrt(g) * rayleigh(np.random.default_rng(2), (100_000,))
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1e-3, rel=0.02)


@pytest.mark.parametrize("alpha", [2.2, 3.5, 4.5])
def test_pathloss_doubling_ratio(alpha):
    rng = np.random.default_rng(3)
    near = np.sqrt(link_gain(10.0, alpha, 30.0)) * rayleigh(rng, (100_000,))
    far = np.sqrt(link_gain(20.0, alpha, 30.0)) * rayleigh(rng, (100_000,))
    ratio = np.mean(np.abs(near) ** 2) / np.mean(np.abs(far) ** 2)
    assert ratio == pytest.approx(2.0**alpha, rel=0.03)


def test_pathloss_params_validation():
    with pytest.raises(ValueError):
        PathLossParams(exponent_bs_user=7.0)
    with pytest.raises(ValueError):
        PathLossParams(reference_loss_db=-1.0)


def test_geometry_distances():
    geom = Geometry(np.array([[200.0, 0.0]]), D=100.0)
    d_bu, d_br, d_ru = geom.distances()
    assert d_bu[0] == pytest.approx(200.0)
    assert d_br == pytest.approx(np.hypot(100.0, 50.0))
    assert d_ru[0] == pytest.approx(np.hypot(100.0, 50.0))
    with pytest.raises(ValueError):
        Geometry(np.zeros((1, 2)), D=0.0)


def _geom(seed=0, K=4, D=100.0):
    return Geometry(place_users(seed, K), D=D)


def test_sample_channels_shapes_and_determinism():
    a = sample_channels(11, _geom(), PathLossParams(), 4, 10)
    b = sample_channels(11, _geom(), PathLossParams(), 4, 10)
    assert a.G.shape == (10, 4) and a.h_direct.shape == (4, 4) and a.h_reflect.shape == (4, 10)
    for name in ("G", "h_direct", "h_reflect"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_sample_channels_nested_in_n():
    small = sample_channels(4, _geom(), PathLossParams(), 4, 10)
    big = sample_channels(4, _geom(), PathLossParams(), 4, 40)
    np.testing.assert_array_equal(small.h_direct, big.h_direct)
    np.testing.assert_array_equal(small.G, big.G[:10])
    np.testing.assert_array_equal(small.h_reflect, big.h_reflect[:, :10])


def test_sample_channels_does_not_advance_seed_sequence():
    ss = np.random.SeedSequence([1, 2])
    a = sample_channels(ss, _geom(), PathLossParams(), 4, 4)
    b = sample_channels(ss, _geom(), PathLossParams(), 4, 4)
    np.testing.assert_array_equal(a.G, b.G)


def test_channel_set_validation():
    with pytest.raises(ValueError):
        ChannelSet(np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        ChannelSet(np.full((2, 2), np.inf), np.ones((2, 2)), np.ones((2, 2)))
    ch = ChannelSet(np.ones((3, 2)), np.ones((2, 2)), np.ones((2, 3)))
    assert (ch.M, ch.N, ch.K) == (2, 3, 2)
    assert ch.H1.shape == (2, 2) and ch.H2.shape == (3, 2)


def test_sample_channels_user_count_mismatch():
    with pytest.raises(ValueError):
        sample_channels(0, _geom(K=3), PathLossParams(), 4, 4, K=4)
