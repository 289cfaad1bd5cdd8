import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import radial
from sktdlvt import (AxisMismatch, ColAxis, RadarParams, RowAxis, TargetTruth,
                     from_range_frequency, simulate_compressed_echo, to_range_frequency)
from sktdlvt.errors import SwathOverflow
from sktdlvt.sigmodel import noise_variance_for_snr, peak_cells, slant_range


def test_default_constants():
    p = RadarParams()
    assert p.wavelength == pytest.approx(0.0299792458)
    assert p.blind_velocity == pytest.approx(29.9792458)
    assert p.aperture_time == pytest.approx(2.048)
    assert p.range_cell == pytest.approx(7.49481145)
    assert p.compression_gain == pytest.approx(160.0)
    assert p.pri == pytest.approx(5e-4)


def test_reference_target_acceleration():
    p = RadarParams()
    tg = TargetTruth(1e4)
    assert tg.radial_accel(p.platform_velocity) == pytest.approx(0.92)
    a1, a2 = radial(p, 10.0, 0.92).doppler_coefficients(p)
    assert a1 == pytest.approx(2 * 10.0 / p.wavelength)
    assert a2 == pytest.approx(-2 * 0.92 / p.wavelength)
    assert a2 == pytest.approx(-61.376, abs=1e-3)


@pytest.mark.parametrize("kw", [
    {"prf": 0.0}, {"carrier_freq": -1.0}, {"range_sample_rate": 1e6},
    {"num_pulses": 1000}, {"num_range_cells": 0}, {"range_bandwidth": 3e10, "range_sample_rate": 4e10},
])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        RadarParams(**kw)


def test_target_validation():
    with pytest.raises(ValueError):
        TargetTruth(0.0)
    with pytest.raises(ValueError):
        TargetTruth.from_radial(1e4, 1.0, -0.1, 95.0)


@given(st.floats(-80, 80), st.floats(0.0, 3.0), st.floats(1e3, 5e4))
def test_from_radial_round_trip(v, a, r):
    p = RadarParams()
    tg = TargetTruth.from_radial(r, v, a, p.platform_velocity)
    assert tg.cross_track_velocity == pytest.approx(v)
    assert tg.radial_accel(p.platform_velocity) == pytest.approx(a, abs=1e-9)


def test_slant_range_history():
    p = RadarParams()
    tg = radial(p, 10.0, 0.92)
    t = np.array([0.0, 1.0, 2.0])
    r = slant_range(p, tg, t)
    np.testing.assert_allclose(r, 1e4 - 10.0 * t + 0.46 * t ** 2)
    assert isinstance(slant_range(p, tg, 0.5), float)


def test_echo_peak_follows_range(radar):
    tg = radial(radar, 10.0, 0.92)
    e = simulate_compressed_echo(radar, [tg])
    assert e.row_axis is RowAxis.SLOW_TIME and e.col_axis is ColAxis.FAST_TIME
    t = radar.slow_time()
    expect = (slant_range(radar, tg, t) - e.near_range) / radar.range_cell
    assert np.max(np.abs(peak_cells(e) - expect)) <= 0.5 + 1e-9


def test_echo_phase_is_two_way_carrier(radar):
    tg = radial(radar, 3.0, 0.5)
    e = simulate_compressed_echo(radar, [tg])
    t = radar.slow_time()
    r = slant_range(radar, tg, t)
    cell = int(round((r[0] - e.near_range) / radar.range_cell))
    ph = np.angle(e.data[:, cell] * np.exp(4j * np.pi * r / radar.wavelength))
    # the envelope is real (sinc), so the residual phase is 0 or pi
    assert np.all(np.minimum(np.abs(ph), np.abs(np.abs(ph) - np.pi)) < 1e-6)


def test_swath_overflow(radar):
    with pytest.raises(SwathOverflow):
        simulate_compressed_echo(radar, [radial(radar, 200.0, 0.9)])


def test_empty_targets(radar):
    with pytest.raises(ValueError):
        simulate_compressed_echo(radar, [])


def test_noise_power_and_seed(radar):
    tg = TargetTruth(1e4, reflectivity=2.0)
    var = noise_variance_for_snr(tg, 10.0)
    assert var == pytest.approx(0.4)
    a = simulate_compressed_echo(radar, [tg], noise_power=var, seed=3)
    b = simulate_compressed_echo(radar, [tg], noise_power=var, seed=3)
    c = simulate_compressed_echo(radar, [tg])
    np.testing.assert_array_equal(a.data, b.data)
    assert np.var(a.data - c.data) == pytest.approx(var, rel=0.05)


def test_range_fft_round_trip_and_axis_tags(radar):
    e = simulate_compressed_echo(radar, [radial(radar, 1.0, 0.9)])
    E = to_range_frequency(e)
    assert E.col_axis is ColAxis.RANGE_FREQ
    np.testing.assert_allclose(from_range_frequency(E).data, e.data, atol=1e-12)
    with pytest.raises(AxisMismatch):
        from_range_frequency(e)
    with pytest.raises(AxisMismatch):
        to_range_frequency(E)


@settings(max_examples=10, deadline=None)
@given(st.floats(-5, 5), st.floats(0.5, 1.5), st.floats(0.2, 2.0))
def test_superposition(v, a, scale):
    p = RadarParams(num_pulses=64, num_range_cells=32)
    t1, t2 = radial(p, v, a), radial(p, -v, a, refl=scale)
    near = 1e4 - 16 * p.range_cell
    both = simulate_compressed_echo(p, [t1, t2], near_range=near).data
    sep = (simulate_compressed_echo(p, [t1], near_range=near).data
           + simulate_compressed_echo(p, [t2], near_range=near).data)
    np.testing.assert_allclose(both, sep, atol=1e-12)
