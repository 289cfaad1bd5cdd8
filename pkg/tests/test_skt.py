import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import radial, subcell_peaks
from sktdlvt import (Alignment, AxisMismatch, NoValidPlan, PlanMismatch, RadarParams,
                     apply_skt, compensate_outer, from_range_frequency, plan_segments,
                     simulate_compressed_echo, to_range_frequency)
from sktdlvt.skt import correct_quadratic_rcm, quadratic_migration_cells, segment_bound


def test_segment_bound_example():
    # a2 ~ 61.33 Hz/s over 2.048 s needs P > 16.04; P = 256 gives NT/P = 8 ms
    p = RadarParams()
    assert segment_bound(p, 61.33) == pytest.approx(2.048 * np.sqrt(61.33))
    plan = plan_segments(p, 61.33, 256)
    assert plan.segment_duration == pytest.approx(0.008)
    assert plan.segment_duration < 1 / np.sqrt(61.33)
    assert plan.samples_per_segment == 16


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([256, 1024, 4096]), st.floats(0.1, 5000))
def test_auto_plan_satisfies_bound(n, a2_max):
    p = RadarParams(num_pulses=n, num_range_cells=8)
    try:
        plan = plan_segments(p, a2_max)
    except NoValidPlan:
        assert segment_bound(p, a2_max) >= n // 2
        return
    P = plan.num_segments
    assert P & (P - 1) == 0 and P * plan.samples_per_segment == n
    assert P > segment_bound(p, a2_max)
    np.testing.assert_allclose(np.diff(plan.segment_start_times), plan.segment_duration)


def test_preferred_plan_rejected_when_invalid():
    p = RadarParams()
    assert plan_segments(p, 61.33, 8).num_segments == 64
    assert plan_segments(p, 61.33, 100).num_segments == 64
    with pytest.raises(NoValidPlan):
        plan_segments(p, 1e7)
    with pytest.raises(ValueError):
        plan_segments(p, 0.0)


def test_plan_mismatch(radar, plan):
    other = RadarParams(num_pulses=1024, num_range_cells=64)
    e = to_range_frequency(simulate_compressed_echo(other, [radial(other, 1.0, 0.9)]))
    with pytest.raises(PlanMismatch):
        apply_skt(e, plan)


def test_axis_guard(radar, plan):
    e = simulate_compressed_echo(radar, [radial(radar, 1.0, 0.9)])
    with pytest.raises(AxisMismatch):
        apply_skt(e, plan)


def _drift(params, plan, v, a, method, k=0, trim=0):
    e = simulate_compressed_echo(params, [radial(params, v, a)])
    K = correct_quadratic_rcm(apply_skt(to_range_frequency(e), plan, method), params, plan)
    if k:
        K = compensate_outer(K, k, params)
    pk = subcell_peaks(from_range_frequency(K).data)
    return np.ptp(pk[trim:len(pk) - trim]), e


@pytest.mark.parametrize("method", ["ChirpZ", "Sinc"])
def test_skt_straightens_walk(radar, plan, method):
    after, e = _drift(radar, plan, 10.0, 0.92, method)
    before = np.ptp(subcell_peaks(e.data))
    assert before > 2.0
    assert after <= 1.0
    # the end pulses read past the aperture (wrap or zero padding); inside it
    # the envelope is flat
    inner, _ = _drift(radar, plan, 10.0, 0.92, method, trim=16)
    assert inner <= 0.05


def test_skt_methods_agree(radar, plan):
    e = to_range_frequency(simulate_compressed_echo(radar, [radial(radar, 8.0, 0.9)]))
    a = from_range_frequency(apply_skt(e, plan, "ChirpZ")).data
    b = from_range_frequency(apply_skt(e, plan, "Sinc")).data
    # interior pulses (the sinc kernel zero-pads at the aperture ends)
    sl = slice(64, -64)
    err = np.linalg.norm(a[sl] - b[sl]) / np.linalg.norm(a[sl])
    assert err < 0.05


def test_segment_alignment_baseline_fails_to_align(radar, plan):
    # per-segment references leave every segment at its own range
    e = to_range_frequency(simulate_compressed_echo(radar, [radial(radar, 15.0 - 4.0, 0.9)]))
    seg = from_range_frequency(apply_skt(e, plan, "Sinc", alignment=Alignment.SEGMENT))
    glob = from_range_frequency(apply_skt(e, plan, "Sinc"))
    assert np.ptp(subcell_peaks(seg.data)) > 2.0
    assert np.ptp(subcell_peaks(glob.data[32:-32])) < 1.0


def test_outer_fold_needs_compensation(radar, plan):
    # v = v_amb + 5: the keystone alone leaves the fold's walk
    v = radar.blind_velocity + 5.0
    left, _ = _drift(radar, plan, v, 0.9, "ChirpZ")
    fixed, _ = _drift(radar, plan, v, 0.9, "ChirpZ", k=1)
    assert left > 5.0
    assert fixed <= 1.0


def test_quadratic_correction(radar, plan):
    # a zero-velocity target only has the quadratic walk (~0.26 cells)
    e = to_range_frequency(simulate_compressed_echo(radar, [radial(radar, 0.0, 0.92)]))
    K = apply_skt(e, plan, "ChirpZ")
    inner = slice(16, -16)
    raw = np.ptp(subcell_peaks(from_range_frequency(K).data)[inner])
    fixed = np.ptp(subcell_peaks(from_range_frequency(correct_quadratic_rcm(K, radar, plan))
                                 .data)[inner])
    assert raw > 0.2
    assert fixed < raw / 20


def test_quadratic_cells_formula(radar):
    expect = radar.platform_velocity ** 2 * radar.aperture_time ** 2 / 2e4 / radar.range_cell
    assert quadratic_migration_cells(radar, 1e4) == pytest.approx(expect)
