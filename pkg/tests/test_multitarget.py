import numpy as np
import pytest

from oracles import radial
from sktdlvt import (AxisMismatch, AzimuthSignal, PipelineConfig, RadarParams, clean_iterate,
                     estimate_cell, estimate_scene, simulate_compressed_echo, to_range_frequency)
from sktdlvt.dlvt import EstimateRecord
from sktdlvt.sigmodel import RowAxis
from sktdlvt.multitarget import (_dedupe, _same_target, lvt_peak_bound, noise_power_estimate,
                                 peak_cells, projected_energy, refine_motion)


def _record(params, v, a, cell=32, mag=1.0, shifted=False):
    lam = params.wavelength
    a2 = -2 * a / lam
    nt = params.aperture_time
    f = 2 * v / lam + a2 * nt
    return EstimateRecord(f - a2 * nt, a2, f, a2, np.nan, nt, lam, mag, range_cell=cell,
                          v_c_hat=v, k_amb_in=0, shifted=shifted)


def _energy(e):
    return float(np.sum(np.abs(e.data) ** 2))


def test_peak_cells_guard():
    energy = np.ones(40)
    energy[10], energy[12], energy[30] = 50, 40, 20
    np.testing.assert_array_equal(peak_cells(energy, 3.0), [10, 30])


def test_noise_power_estimate():
    rng = np.random.default_rng(0)
    z = (rng.standard_normal(20000) + 1j * rng.standard_normal(20000)) * np.sqrt(2.0)
    assert noise_power_estimate(z) == pytest.approx(4.0, rel=0.05)


def test_lvt_peak_bound_dominates(small_radar, small_plan):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 10, 0.92)], noise_power=0.1,
                                 seed=1)
    for cell in (20, 32):
        x = AzimuthSignal.from_echo(e, cell, small_plan)
        assert estimate_cell(x).peak_magnitude <= lvt_peak_bound(x, 2)


def test_clean_exact_model_subtraction(small_radar):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 10.0, 0.92)])
    res = clean_iterate(e, _record(small_radar, 10.0, 0.92), refine=False)
    assert res.col_axis == e.col_axis
    assert _energy(res) / _energy(e) < 1e-4


def test_clean_refines_small_errors(small_radar):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 10.0, 0.92)])
    res = clean_iterate(e, _record(small_radar, 10.004, 0.95))
    assert _energy(res) / _energy(e) < 1e-4


def test_clean_one_cell_error_leaves_residual(small_radar):
    # one velocity resolution cell off and no refinement
    dv = small_radar.wavelength / (2 * small_radar.aperture_time)
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 10.0, 0.92)])
    res = clean_iterate(e, _record(small_radar, 10.0 + dv, 0.92), refine=False)
    assert 0.1 <= _energy(res) / _energy(e) <= 1.0


def test_clean_needs_velocity(small_radar):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 1.0, 0.92)])
    with pytest.raises(ValueError):
        clean_iterate(e, _record(small_radar, 1.0, 0.92).with_(v_c_hat=None))


def test_projection_is_maximal_at_truth(small_radar):
    E = to_range_frequency(simulate_compressed_echo(small_radar, [radial(small_radar, 7.0, 0.9)]))
    a2 = -2 * 0.9 / small_radar.wavelength
    best = projected_energy(E.data, small_radar, 7.0, a2)
    assert best > projected_energy(E.data, small_radar, 7.05, a2)
    assert best > projected_energy(E.data, small_radar, 7.0, a2 + 2.0)
    v, a = refine_motion(E.data, small_radar, 7.003, a2 + 0.3)
    assert v == pytest.approx(7.0, abs=2e-3) and a == pytest.approx(a2, abs=0.05)


def test_same_target_and_dedupe(small_radar, small_plan):
    a = _record(small_radar, 10.0, 0.92, mag=2.0)
    b = _record(small_radar, 10.0005, 0.92, cell=33, mag=1.0)
    c = _record(small_radar, -5.0, 0.8, cell=45)
    assert _same_target(a, b, small_plan)
    assert not _same_target(a, c, small_plan)
    kept = _dedupe([(a, 2.0), (b, 1.0), (c, 1.5)], small_plan)
    assert a in kept and c in kept and b not in kept
    # a weak peak a few LVT bins from a strong one is a sidelobe
    d = _record(small_radar, 10.0, 1.0, mag=0.5)
    assert not _same_target(a, d, small_plan)
    assert d in _dedupe([(a, 2.0), (d, 1.0)], small_plan)
    assert d not in _dedupe([(a, 2.0), (d, 1.0)], small_plan, sidelobe_ratio=0.7)


def test_single_target_scene(small_radar, small_plan):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 10.0, 0.92)])
    r = estimate_scene(e, small_plan)
    assert len(r.estimates) == 1
    est = r.estimates[0]
    assert est.v_c_hat == pytest.approx(10.0, abs=0.05)
    assert est.a_c_hat == pytest.approx(0.92, abs=0.05)
    assert est.k_amb_out == 0 and r.fold_scan.best_k == 0


def test_unequal_pair_needs_clean(small_radar, small_plan):
    tgs = [radial(small_radar, 10.0, 0.92), radial(small_radar, -5.0, 0.8, r=1e4 + 60, refl=0.1)]
    e = simulate_compressed_echo(small_radar, tgs)
    r = estimate_scene(e, small_plan)
    assert r.iterations >= 1
    got = sorted((x.v_c_hat, x.a_c_hat) for x in r.estimates)
    assert len(got) == 2
    assert got[0] == pytest.approx((-5.0, 0.8), abs=0.05)
    assert got[1] == pytest.approx((10.0, 0.92), abs=0.05)


def test_range_frequency_input_accepted(small_radar, small_plan):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 4.0, 0.92)])
    a = estimate_scene(e, small_plan)
    b = estimate_scene(to_range_frequency(e), small_plan)
    assert [x.v_c_hat for x in a.estimates] == pytest.approx([x.v_c_hat for x in b.estimates])


def test_axis_guard(small_radar, small_plan):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 4.0, 0.92)])
    with pytest.raises(AxisMismatch):
        estimate_scene(e.with_data(e.data, row_axis=RowAxis.INTRA_SEG_TIME), small_plan)


def test_noise_only_scenes_are_empty(small_plan):
    params = RadarParams(num_pulses=1024, num_range_cells=32)
    empty = 0
    n = 20
    tg = radial(params, 10.0, 0.92)
    clean = simulate_compressed_echo(params, [tg])
    for seed in range(n):
        noisy = simulate_compressed_echo(params, [tg], noise_power=1.0, seed=seed)
        e = noisy.with_data(noisy.data - clean.data)
        empty += len(estimate_scene(e, small_plan, params).estimates) == 0
    assert empty / n >= 0.95


def test_detection_threshold_can_be_disabled(small_radar, small_plan):
    e = simulate_compressed_echo(small_radar, [radial(small_radar, 10.0, 0.92)], noise_power=1.0,
                                 seed=0)
    cfg = PipelineConfig(detection_sigmas=None, candidate_cells=(32,), clean=False)
    r = estimate_scene(e, small_plan, config=cfg)
    assert r.estimates and r.estimates[0].v_c_hat == pytest.approx(10.0, abs=0.1)
