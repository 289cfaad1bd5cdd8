import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import circular_drift, dechirp_argmax, lfm, radial
from sktdlvt import (AlreadyCorrected, AzimuthSignal, DlvtConfig, apply_skt, doppler_kt,
                     estimate_cell, from_range_frequency, lvt, plan_segments,
                     resolve_inner_ambiguity, segment_fft, simulate_compressed_echo,
                     to_range_frequency)
from sktdlvt.dlvt import (NOISE_PEAK_TABLE, _noise_peak_stats, detection_threshold,
                          estimate_walk_slope, focus_score, inner_candidates, lvt_axes,
                          lvt_values, noise_peak_stats, velocity_for, wrap)
from sktdlvt.skt import correct_quadratic_rcm


def _signal(params, plan, a1, a2, amp=1.0):
    return AzimuthSignal(lfm(params.slow_time(), a1, a2, amp), -1, plan, params)


def test_wrap():
    np.testing.assert_allclose(wrap([0.0, 0.6, -0.6, 1.5], 1.0), [0.0, -0.4, 0.4, -0.5])


def test_azimuth_signal_length(radar, plan):
    with pytest.raises(ValueError):
        AzimuthSignal(np.ones(10), 0, plan, radar)


def test_segment_fft_layout(radar, plan):
    x = _signal(radar, plan, 100.0, 0.0)
    s = segment_fft(x)
    assert s.data.shape == (16, 256) and not s.walk_corrected
    seg3 = x.samples[3 * 16:4 * 16]
    np.testing.assert_allclose(s.data[:, 3], np.fft.fft(seg3), atol=1e-9)
    s2 = segment_fft(x, oversample=2)
    assert s2.data.shape == (32, 256)
    np.testing.assert_allclose(s2.freqs[:3], [0.0, 62.5, 125.0])


@pytest.mark.parametrize("a1,a2", [(100.0, -61.38), (-700.0, 45.0), (950.0, -30.0)])
def test_doppler_kt_removes_walk(radar, a1, a2):
    plan = plan_segments(radar, 200.0, 64)
    s = segment_fft(_signal(radar, plan, a1, a2), 1)
    assert circular_drift(s.peak_bins(), s.data.shape[0]) >= 2
    c = doppler_kt(s)
    assert c.walk_corrected and c.walk_slope == pytest.approx(a2, abs=plan.num_segments / 2.048 ** 2)
    assert circular_drift(c.peak_bins(), c.data.shape[0]) <= 1
    with pytest.raises(AlreadyCorrected):
        doppler_kt(c)


def test_walk_slope_estimate(radar, plan):
    s = segment_fft(_signal(radar, plan, 0.0, -61.38), 2)
    step = 0.25 * plan.num_segments / plan.aperture_time ** 2
    assert abs(estimate_walk_slope(s) + 61.38) <= step


def test_lvt_axes():
    f, g = lvt_axes(256, 0.008)
    assert len(f) == 256 and len(g) == 512
    assert f[0] == pytest.approx(-1 / (4 * 0.008))
    assert f[1] - f[0] == pytest.approx(1 / (2 * 2.048))
    assert g[1] - g[0] == pytest.approx(1 / (2 * 2.048))
    assert g[0] == pytest.approx(-256 / (2 * 2.048))


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8), st.floats(0, 1))
def test_lvt_peak_matches_dechirp_oracle(fr, gr, phase):
    n, dt = 64, 0.01
    f0, g0 = fr / (4 * dt), gr * n / (2 * n * dt)
    t_ref = (n - 1) * dt / 2
    tau = np.arange(n) * dt - t_ref
    x = np.exp(2j * np.pi * (f0 * tau + 0.5 * g0 * tau * tau + phase))
    plane = lvt(x, dt)
    assert plane.t_ref == pytest.approx(t_ref)
    j, k = plane.argmax()
    jo, ko = dechirp_argmax(x, dt, plane.freq_axis, plane.chirp_axis, plane.t_ref)
    assert abs(j - jo) <= 1 and abs(k - ko) <= 1


def test_lvt_peak_value_and_location():
    n, dt = 128, 0.01
    tau = np.arange(n) * dt - (n - 1) * dt / 2
    x = np.exp(2j * np.pi * (5.0 * tau + 0.5 * 20.0 * tau * tau))
    p = lvt(x, dt)
    j, k = p.argmax()
    assert abs(p.chirp_axis[j] - 20.0) <= p.chirp_step
    assert abs(p.freq_axis[k] - 5.0) <= p.freq_step
    # coherent gain: every lag product has unit magnitude
    assert p.magnitude.max() <= sum(n - 2 * m for m in range(1, (n - 1) // 2 + 1)) + 1e-6


def test_lvt_values_peak_mode_and_window():
    n, dt = 96, 0.01
    x = lfm(np.arange(n) * dt, 3.0, -12.0)
    vals, f, g, _ = lvt_values(x, dt)
    (v, j, k), f2, g2, _ = lvt_values(x, dt, keep="peak", lag_chunk=7)
    jj, kk = np.unravel_index(np.argmax(np.abs(vals)), vals.shape)
    assert (j, k) == (jj, kk) and abs(v) == pytest.approx(np.abs(vals).max(), rel=1e-5)
    (vw, jw, kw), _, gw, _ = lvt_values(x, dt, keep="peak", chirp_window=(-30, 0))
    assert gw.min() >= -30 and gw.max() <= 0
    assert gw[jw] == pytest.approx(g[jj])
    with pytest.raises(ValueError):
        lvt_values(x, dt, chirp_window=(1000, 1001))
    with pytest.raises(ValueError):
        lvt(np.ones(4), dt)


@settings(max_examples=8, deadline=None)
@given(st.floats(-0.45, 0.45), st.floats(-0.9, 0.9))
def test_estimate_cell_recovers_lfm(a1r, a2r):
    from sktdlvt import RadarParams
    p = RadarParams(num_pulses=1024, num_range_cells=8)
    plan = plan_segments(p, 61.33, 64)
    nt = plan.aperture_time
    a1, a2 = a1r * p.prf, a2r * 61.33
    est = estimate_cell(_signal(p, plan, a1, a2))
    span = plan.num_segments / (2 * nt)
    assert abs(est.gamma_hat - a2) <= 1.01 / (2 * nt)
    assert abs(wrap(est.f_hat - (a1 + a2 * nt), span)) <= 1.01 / nt
    assert est.a1_hat + est.a2_hat * nt == pytest.approx(est.f_hat)


def test_estimate_cell_fixed_slope(radar, plan):
    a1, a2 = 2 * 10 / radar.wavelength, -61.38
    est = estimate_cell(_signal(radar, plan, a1, a2), DlvtConfig(), slope=a2)
    assert abs(est.gamma_hat - a2) <= 0.25
    assert est.a_c_hat == pytest.approx(0.92, abs=0.01)


def test_velocity_formula(plan):
    from sktdlvt import EstimateRecord
    est = EstimateRecord(0.0, -61.38, -20.0, -61.38, 700.0, 2.048, 0.03, 1.0)
    nt = 2.048
    assert velocity_for(est, 9, plan) == pytest.approx(0.03 * (-20 + 9 * 256 / (2 * nt) + 61.38 * nt) / 2)
    ks = inner_candidates(est, plan)
    assert len(ks) == 7
    assert np.all(np.diff(ks) == 1)
    shifted = inner_candidates(est, plan, k_amb_out=1)
    np.testing.assert_array_equal(shifted - ks, 2 * 4096 // 256)


@pytest.fixture(scope="module")
def slow_scene(radar, plan):
    e = simulate_compressed_echo(radar, [radial(radar, 10.0, 0.92)])
    E = to_range_frequency(e)
    K = from_range_frequency(correct_quadratic_rcm(apply_skt(E, plan, "ChirpZ"), radar, plan))
    cell = int(np.argmax(np.sum(np.abs(K.data) ** 2, axis=0)))
    return E, K, cell


def test_focus_score_peaks_at_truth(radar, slow_scene):
    E, _, cell = slow_scene
    a2 = -2 * 0.92 / radar.wavelength
    true = focus_score(E, 10.0, a2)[0]
    for dv in (-0.5, 0.5, radar.wavelength * 256 / (4 * 2.048)):
        assert focus_score(E, 10.0 + dv, a2)[0] < 0.5 * true
    pk, val, c = focus_score(E, 10.0, a2, cells=[cell - 1, cell, cell + 1])
    assert c == cell and pk == pytest.approx(true, rel=1e-9)


def test_inner_ambiguity_resolves_velocity(radar, plan, slow_scene):
    E, K, cell = slow_scene
    est = estimate_cell(AzimuthSignal.from_echo(K, cell, plan))
    out = resolve_inner_ambiguity(E, est, plan, radar)
    assert out.v_c_hat == pytest.approx(10.0, abs=0.05)
    assert out.a_c_hat == pytest.approx(0.92, abs=0.05)
    assert out.k_amb_in in inner_candidates(est, plan)


def test_noise_table_matches_fresh_calibration():
    for p in (8, 16, 32):
        mu, sd = _noise_peak_stats(p, 500, 12345)
        assert (mu, sd) == pytest.approx(NOISE_PEAK_TABLE[p], rel=1e-9)
    assert noise_peak_stats(16) == NOISE_PEAK_TABLE[16]
    assert noise_peak_stats(16, draws=100, seed=1) != NOISE_PEAK_TABLE[16]


def test_detection_threshold_scaling(plan):
    t1 = detection_threshold(plan, 1.0)
    assert detection_threshold(plan, 4.0) == pytest.approx(4 * t1)
    mu, sd = NOISE_PEAK_TABLE[256]
    assert t1 == pytest.approx((mu + 5 * sd) * 16)
    assert detection_threshold(plan, 1.0, sigmas=0.0) < t1
