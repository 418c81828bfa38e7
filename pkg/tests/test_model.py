import math

import numpy as np
import pytest

from charsum import model, smooth

EG2 = 2 * math.exp(float(np.euler_gamma))


@pytest.fixture(scope="module")
def small_cfg():
    return model.ModelConfig(samples=64, seed=99)


def test_config_validation():
    with pytest.raises(ValueError):
        model.ModelConfig(y=2.0).validate()
    with pytest.raises(ValueError):
        model.ModelConfig(u_cut=0.5).validate()
    with pytest.raises(ValueError):
        model.ModelConfig(samples=0).validate()
    with pytest.raises(ValueError):
        model.ModelConfig(grid_size=1000).validate()  # below 4 y^u_cut
    # y = 50, u_cut = 3 leaves a truncation tail above the 0.05 budget
    with pytest.raises(ValueError, match="tail"):
        model.ModelConfig(y=50.0, u_cut=3.0).validate()
    model.ModelConfig().validate()


def test_default_tail_bound_within_budget():
    cfg = model.ModelConfig()
    assert model.tail_bound(cfg) <= model.TAIL_BOUND_LIMIT


def test_sample_determinism(small_cfg):
    s1 = model.draw_sample(small_cfg, 123)
    s2 = model.draw_sample(small_cfg, 123)
    assert s1 == s2
    # order independence: scattered indices reproduce the sequential run
    m = model.sample_many(small_cfg)
    for k in (0, 5, 63):
        assert model.draw_sample(small_cfg, k).m_value == m[k]
    scattered = model.sample_many(small_cfg, indices=[63, 0, 5])
    assert scattered[0] == m[63] and scattered[1] == m[0] and scattered[2] == m[5]


def test_forced_unit_draw_is_deterministic(small_cfg):
    f1 = model.draw_sample(small_cfg, 5, force_unit=True)
    f2 = model.draw_sample(small_cfg, 9, force_unit=True)
    assert f1.s_value == f2.s_value
    assert f1.m_value == f1.s_value / EG2


def test_conjugation_invariance(small_cfg):
    for k in (3, 42):
        a = model.draw_sample(small_cfg, k)
        b = model.draw_sample(small_cfg, k, conjugate=True)
        assert b.s_value == pytest.approx(a.s_value, abs=1e-10)


def test_triangle_bound(small_cfg):
    head, _ = smooth.smooth_weighted_sum(small_cfg.y, small_cfg.cutoff)
    bound = 2 * head.real
    m = model.sample_many(small_cfg)
    assert (m * EG2).max() <= bound


def test_estimate_phi(small_cfg):
    m = model.sample_many(small_cfg)
    head, _ = smooth.smooth_weighted_sum(small_cfg.y, small_cfg.cutoff)
    taus = [0.0, 0.5, 1.0, 2.0, 2 * head.real / EG2 + 1.0]
    est = model.estimate_phi(m, taus)
    assert est.phi[0] == 1.0  # s > 0 almost surely
    assert est.phi[-1] == 0.0  # beyond the triangle bound
    assert np.all(np.diff(est.phi) <= 0)
    assert np.all((est.ci_lo <= est.phi) & (est.phi <= est.ci_hi))
    with pytest.raises(ValueError):
        model.estimate_phi(m, [2.0, 1.0])


def test_ci_width_scaling():
    # widths follow samples^{-1/2}: quadrupling samples halves the band
    phi = 0.3
    w1 = 1.96 * math.sqrt(phi * (1 - phi) / 1000)
    w4 = 1.96 * math.sqrt(phi * (1 - phi) / 4000)
    assert w4 == pytest.approx(w1 / 2, rel=1e-12)
    m1 = np.linspace(0, 1, 1000)
    m4 = np.linspace(0, 1, 4000)
    e1 = model.estimate_phi(m1, [0.7])
    e4 = model.estimate_phi(m4, [0.7])
    width_ratio = (e4.ci_hi[0] - e4.ci_lo[0]) / (e1.ci_hi[0] - e1.ci_lo[0])
    assert abs(width_ratio - 0.5) <= 0.2 * 0.5


def test_ks_distance_identical_inputs():
    vals = np.array([0.5, 1.0, 1.5, 2.5])
    taus = np.linspace(0, 3, 31)
    assert model.ks_distance(vals, 4, vals, 4, taus) == 0.0


def test_compare_to_q(small_cfg, ctx1009):
    from charsum import scan

    res = scan.scan_all(ctx1009)
    taus = np.arange(0.8, 2.5, 0.1)
    ks = model.compare_to_q(small_cfg, res.m, 1009, taus)
    assert 0.0 <= ks <= 1.0


def test_fft_friendly_lengths():
    for n in (100, 640001, 524289):
        L = model._fft_friendly(n)
        assert L >= n
        m = L
        for p in (2, 3, 5):
            while m % p == 0:
                m //= p
        assert m == 1
