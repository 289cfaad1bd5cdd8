"""Segmental keystone transform (SKT).

The aperture of ``N`` pulses is cut into ``P`` equal segments of ``L = N/P``
pulses. Inside each segment the slow-time axis of every range-frequency
column is rescaled by ``f_c / (f + f_c)``. Every segment is referenced to the
first pulse of the first segment, so the rescaled envelopes of all segments
line up on the target's range at ``t = 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import opcount
from .errors import NoValidPlan, PlanMismatch
from .resample import (DEFAULT_HALFWIDTH, chirpz_rescale_batch,
                       keystone_positions, sinc_interpolate)
from .sigmodel import ColAxis, EchoMatrix, RadarParams, RowAxis

MIN_AUTO_SEGMENTS = 64


class SktMethod(str, enum.Enum):
    SINC = "Sinc"
    CHIRPZ = "ChirpZ"


class Alignment(str, enum.Enum):
    GLOBAL = "global"
    SEGMENT = "segment"


@dataclass(frozen=True)
class SegmentPlan:
    """Partition of the aperture into equal segments.

    Attributes
    ----------
    num_segments : int
        ``P``, a power of two dividing ``N``.
    samples_per_segment : int
        ``L = N / P``.
    segment_start_times : ndarray
        Start time of every segment in seconds.
    a2_max : float
        Doppler-rate bound [Hz/s] the plan was built for.
    pri : float
        Pulse repetition interval [s].
    """

    num_segments: int
    samples_per_segment: int
    segment_start_times: np.ndarray
    a2_max: float
    pri: float

    @property
    def num_pulses(self) -> int:
        return self.num_segments * self.samples_per_segment

    @property
    def aperture_time(self) -> float:
        return self.num_pulses * self.pri

    @property
    def segment_duration(self) -> float:
        return self.samples_per_segment * self.pri

    @property
    def segment_offsets(self) -> np.ndarray:
        """Global index of every segment's first pulse."""
        return np.arange(self.num_segments) * self.samples_per_segment

    def check(self, params: RadarParams):
        if self.num_pulses != params.num_pulses or not np.isclose(self.pri, params.pri):
            raise PlanMismatch("segment plan was built for a different aperture")


def _is_pow2(n):
    return n > 0 and not n & (n - 1)


def segment_bound(params: RadarParams, a2_max: float) -> float:
    """Smallest segment count allowed by ``NT/P < 1/sqrt(|a2|max)`` (exclusive)."""
    return params.aperture_time * np.sqrt(a2_max)


def plan_segments(params: RadarParams, a2_max: float, preferred_P=None) -> SegmentPlan:
    """Choose the segment count.

    ``preferred_P`` is used when it is a power of two in ``[2, N/2]`` that
    satisfies the segment-duration bound. Otherwise the smallest valid power
    of two not below ``min(64, N/2)`` is returned.

    Raises
    ------
    NoValidPlan
        If no power of two up to ``N/2`` satisfies the bound.
    """
    if not a2_max > 0:
        raise ValueError("a2_max must be positive")
    n = params.num_pulses
    bound = segment_bound(params, a2_max)

    def ok(p):
        return _is_pow2(p) and 2 <= p <= n // 2 and p > bound

    if preferred_P is not None and ok(int(preferred_P)):
        p = int(preferred_P)
    else:
        p = max(2, min(MIN_AUTO_SEGMENTS, n // 2))
        while p <= n // 2 and not ok(p):
            p *= 2
        if p > n // 2:
            raise NoValidPlan(
                f"NT/P < 1/sqrt({a2_max:g}) needs P > {bound:.1f}, above N/2 = {n // 2}")
    length = n // p
    starts = np.arange(p) * length * params.pri
    return SegmentPlan(p, length, starts, float(a2_max), params.pri)


def keystone_scales(params: RadarParams, n_cols: int) -> np.ndarray:
    f = np.fft.fftfreq(n_cols, d=1.0 / params.range_sample_rate)
    return params.carrier_freq / (f + params.carrier_freq)


def apply_skt(e: EchoMatrix, plan: SegmentPlan, method=SktMethod.SINC,
              alignment=Alignment.GLOBAL, kernel_halfwidth=DEFAULT_HALFWIDTH,
              chunk=64) -> EchoMatrix:
    """Keystone-rescale every segment of a (SlowTime, RangeFreq) echo.

    Parameters
    ----------
    method : {"Sinc", "ChirpZ"}
    alignment : {"global", "segment"}
        ``"global"`` references every segment to the first pulse of the
        aperture. ``"segment"`` references each segment to its own first
        pulse and is kept only as a regression baseline: it leaves segments
        focused at different ranges.
    """
    e.require(RowAxis.SLOW_TIME, ColAxis.RANGE_FREQ)
    plan.check(e.params)
    method = SktMethod(method)
    alignment = Alignment(alignment)
    n, m = e.shape
    p, length = plan.num_segments, plan.samples_per_segment
    scales = keystone_scales(e.params, m)

    out = np.empty((m, n), dtype=complex)
    with opcount.stage("skt"):
        for c0 in range(0, m, chunk):
            sl = slice(c0, c0 + chunk)
            alpha = scales[sl]
            cols = e.data[:, sl].T
            if alignment is Alignment.SEGMENT:
                blocks = cols.reshape(-1, p, length)
                pos = keystone_positions(length, alpha[:, None], np.zeros((1, p)))
                out[sl] = sinc_interpolate(blocks, pos, kernel_halfwidth).reshape(-1, n)
            elif method is SktMethod.SINC:
                # global reference: segment s, sample m' reads pulse alpha*(sL+m')
                pos = keystone_positions(n, alpha, 0.0)
                out[sl] = sinc_interpolate(cols, pos, kernel_halfwidth)
            else:
                out[sl] = chirpz_rescale_batch(cols, alpha, 0.0)
    return e.with_data(np.ascontiguousarray(out.T))


def quadratic_migration_cells(params: RadarParams, reference_range: float) -> float:
    """Nominal quadratic range walk over the aperture in range cells."""
    t = params.aperture_time
    return params.platform_velocity ** 2 * t ** 2 / (2 * reference_range) / params.range_cell


def correct_quadratic_rcm(e: EchoMatrix, params: RadarParams, plan: SegmentPlan,
                          reference_range=None) -> EchoMatrix:
    """Remove the nominal quadratic envelope walk left after the keystone.

    After rescaling, the quadratic range term ``Q(t) = V^2 t^2 / (2 R_ref)``
    enters the phase as ``-4 pi f_c^2 Q(t) / ((f + f_c) c)``. Multiplying by
    ``exp(+j 4 pi (f_c^2/(f+f_c) - f_c) Q(t) / c)`` straightens the envelope
    while leaving the carrier-frequency Doppler phase untouched for the
    Doppler-domain estimators. ``R_ref`` defaults to the swath centre.
    """
    e.require(RowAxis.SLOW_TIME, ColAxis.RANGE_FREQ)
    plan.check(params)
    r_ref = e.scene_center_range if reference_range is None else float(reference_range)
    t = params.slow_time()
    q = params.platform_velocity ** 2 * t ** 2 / (2.0 * r_ref)
    f = np.fft.fftfreq(e.shape[1], d=1.0 / params.range_sample_rate)
    fc = params.carrier_freq
    coef = fc * fc / (f + fc) - fc
    with opcount.stage("skt"):
        opcount.count_mults(e.data.size)
        h = np.exp(4j * np.pi * np.outer(q, coef) / params.light_speed)
    return e.with_data(e.data * h)
