"""Outer velocity ambiguity (blind-speed folds) and marginal velocities.

A radial velocity ``v = k v_amb + v0`` with ``v_amb = PRF lambda / 2`` keeps
a residual range walk ``k v_amb t`` after the keystone, because the keystone
only sees the folded Doppler. The fold number ``k`` is found by compensating
candidate walks and scoring the integrated range profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opcount
from .dlvt import AzimuthSignal, DlvtConfig, EstimateRecord, estimate_cell
from .errors import AmbiguousMaximum
from .sigmodel import ColAxis, EchoMatrix, RadarParams, RowAxis, from_range_frequency
from .skt import SegmentPlan

DEFAULT_K_MAX = 8


@dataclass(frozen=True)
class AmbiguityScan:
    """Entropy scan over fold candidates.

    Attributes
    ----------
    k_values : ndarray of int
    entropy : ndarray
        Shannon entropy (natural log) of each normalized integrated profile.
    integrated_profiles : ndarray, shape (len(k_values), M)
    blind_velocity : float
    """

    k_values: np.ndarray
    entropy: np.ndarray
    integrated_profiles: np.ndarray
    blind_velocity: float

    @property
    def best_k(self) -> int:
        return int(self.k_values[np.argmin(self.entropy)])

    @property
    def margin(self) -> float:
        """Relative entropy gap between the best and second-best ``k``."""
        if len(self.entropy) < 2:
            return np.inf
        e = np.sort(self.entropy)
        return float((e[1] - e[0]) / max(e[1], 1e-300))

    def local_minima(self, depth: float = 0.05) -> list:
        """``k`` values at local entropy minima at least ``depth`` below
        the median entropy (relative)."""
        e = self.entropy
        med = np.median(e)
        out = []
        for i in range(len(e)):
            left = e[i - 1] if i > 0 else np.inf
            right = e[i + 1] if i + 1 < len(e) else np.inf
            if e[i] < left and e[i] <= right and e[i] < (1.0 - depth) * med:
                out.append(int(self.k_values[i]))
        return sorted(out, key=lambda k: e[list(self.k_values).index(k)])


def image_entropy(profile) -> float:
    """Entropy of ``|f|^2 / sum |f|^2``; 0 for one-hot, ``log M`` for flat."""
    p = np.abs(np.asarray(profile, dtype=float)) ** 2
    total = p.sum()
    if total <= 0:
        return 0.0
    p = p / total
    nz = p[p > 0]
    return float(max(0.0, -np.sum(nz * np.log(nz))))


def _outer_phase(params: RadarParams, n_cols: int, k: float):
    t = params.slow_time()
    f = np.fft.fftfreq(n_cols, d=1.0 / params.range_sample_rate)
    return np.exp(-4j * np.pi * np.outer(t, f) * k * params.blind_velocity / params.light_speed)


def compensate_outer(e: EchoMatrix, k: int, params: RadarParams | None = None) -> EchoMatrix:
    """Multiply ``exp(-j 4 pi f k v_amb t / c)`` (range frequency ``f`` only)."""
    e.require(RowAxis.SLOW_TIME, ColAxis.RANGE_FREQ)
    params = e.params if params is None else params
    if k == 0:
        return e
    with opcount.stage("ambiguity"):
        opcount.count_mults(e.data.size)
        return e.with_data(e.data * _outer_phase(params, e.shape[1], k))


def scan_outer_ambiguity(e: EchoMatrix, plan: SegmentPlan, params: RadarParams | None = None,
                         k_max: int = DEFAULT_K_MAX) -> AmbiguityScan:
    """Entropy of the walk-compensated, incoherently integrated range profile.

    For each ``k`` in ``[-k_max, k_max]`` the residual walk is compensated,
    every pulse is transformed back to range, and magnitudes are summed over
    all pulses of all segments.
    """
    e.require(RowAxis.SLOW_TIME, ColAxis.RANGE_FREQ)
    params = e.params if params is None else params
    plan.check(params)
    ks = np.arange(-int(k_max), int(k_max) + 1)
    profiles = np.empty((len(ks), e.shape[1]))
    with opcount.stage("ambiguity"):
        for i, k in enumerate(ks):
            data = e.data * _outer_phase(params, e.shape[1], k) if k else e.data
            profiles[i] = np.sum(np.abs(np.fft.ifft(data, axis=1)), axis=0)
            opcount.count_fft(e.shape[1], e.shape[0])
    ent = np.array([image_entropy(p) for p in profiles])
    return AmbiguityScan(ks, ent, profiles, params.blind_velocity)


def joint_lowsnr_search(e: EchoMatrix, plan: SegmentPlan, params: RadarParams | None = None,
                        k_set=(0,), cell=None, config: DlvtConfig = DlvtConfig()):
    """Pick the fold by the largest DLVT peak over ``k_set``.

    ``e`` is the keystoned (SlowTime, RangeFreq) echo. ``cell`` fixes the
    range cell to analyse; by default each candidate uses its most energetic
    cell. Returns ``(k, EstimateRecord)`` with ``k_amb_out`` set.

    Raises
    ------
    AmbiguousMaximum
        If the two best folds are within 1% in peak magnitude.
    """
    k_set = list(k_set)
    if not k_set:
        raise ValueError("k_set must not be empty")
    params = e.params if params is None else params
    results = []
    for k in k_set:
        d = from_range_frequency(compensate_outer(e, int(k), params))
        c = int(np.argmax(np.sum(np.abs(d.data) ** 2, axis=0))) if cell is None else int(cell)
        est = estimate_cell(AzimuthSignal.from_echo(d, c, plan), config)
        results.append((est.peak_magnitude, -abs(k), int(k), est))
    results.sort(key=lambda r: (r[0], r[1]), reverse=True)
    if len(results) > 1 and results[1][0] >= 0.99 * results[0][0] and results[0][0] > 0:
        if results[1][0] != results[0][0]:
            raise AmbiguousMaximum(f"folds {results[0][2]} and {results[1][2]} within 1%")
    k = results[0][2]
    return k, results[0][3].with_(k_amb_out=k)


# -------------------------------------------------------- marginal velocity

@dataclass(frozen=True)
class SplitRule:
    """Thresholds of the marginal-velocity detector (fractions of band/energy).

    A spectrum is split when both outer ``edge_fraction`` quarters hold at
    least ``edge_energy`` and the centre has a gap. It hugs the edge when at
    least ``hug_energy`` lies within ``hug_fraction`` of the band next to
    either PRF edge and the centre has a gap.
    """

    edge_fraction: float = 0.25
    edge_energy: float = 0.10
    gap_width: float = 0.10
    gap_energy: float = 0.05
    hug_fraction: float = 0.10
    hug_energy: float = 0.5


def doppler_power(e: EchoMatrix) -> np.ndarray:
    """Azimuth power spectrum (fftshifted, summed over columns)."""
    return np.fft.fftshift(np.sum(np.abs(np.fft.fft(e.data, axis=0)) ** 2, axis=1))


def central_gap(power, rule: SplitRule = SplitRule()) -> bool:
    """True if a band of ``gap_width`` around DC holds < ``gap_energy``."""
    n = len(power)
    half = max(1, int(round(rule.gap_width * n / 2)))
    c = n // 2
    return float(power[c - half:c + half].sum() / power.sum()) < rule.gap_energy


def is_split(power, rule: SplitRule = SplitRule()) -> bool:
    """Energy in both outer band quarters and a gap at the band centre."""
    power = np.asarray(power, dtype=float)
    n = len(power)
    q = max(1, int(round(rule.edge_fraction * n)))
    total = power.sum()
    if total <= 0:
        return False
    lo, hi = power[:q].sum() / total, power[n - q:].sum() / total
    return lo >= rule.edge_energy and hi >= rule.edge_energy and central_gap(power, rule)


def hugs_edge(power, rule: SplitRule = SplitRule()) -> bool:
    """Most energy next to a PRF edge and a gap at the band centre."""
    power = np.asarray(power, dtype=float)
    n = len(power)
    q = max(1, int(round(rule.hug_fraction * n)))
    total = power.sum()
    if total <= 0:
        return False
    edge = (power[:q].sum() + power[n - q:].sum()) / total
    return edge >= rule.hug_energy and central_gap(power, rule)


def is_marginal(power, rule: SplitRule = SplitRule()) -> bool:
    """Split across the PRF edge, or about to split (hugging it)."""
    return is_split(power, rule) or hugs_edge(power, rule)


def is_contiguous(power, rule: SplitRule = SplitRule()) -> bool:
    """Not split: the occupied band does not straddle the PRF edge."""
    return not is_split(power, rule)


def marginal_shift_phase(params: RadarParams, n_cols: int):
    """``exp[-j pi (f + f_c) t / (T f_c)]``: Doppler shift by ``-1/(2T)``."""
    t = params.slow_time()
    f = np.fft.fftfreq(n_cols, d=1.0 / params.range_sample_rate)
    return np.exp(-1j * np.pi * np.outer(t, f + params.carrier_freq)
                  / (params.pri * params.carrier_freq))


def marginal_velocity_offset(params: RadarParams) -> float:
    """Velocity removed by the half-PRF shift, ``lambda / (4 T)``."""
    return params.wavelength / (4.0 * params.pri)


def detect_and_shift_marginal(e: EchoMatrix, params: RadarParams | None = None,
                              rule: SplitRule = SplitRule()):
    """Shift a split or edge-hugging Doppler spectrum by half a PRF.

    Returns ``(shifted, echo)``. When shifted, downstream velocities must add
    :func:`marginal_velocity_offset`.
    """
    e.require(RowAxis.SLOW_TIME, ColAxis.RANGE_FREQ)
    params = e.params if params is None else params
    if not is_marginal(doppler_power(e), rule):
        return False, e
    with opcount.stage("ambiguity"):
        opcount.count_mults(e.data.size)
        return True, e.with_data(e.data * marginal_shift_phase(params, e.shape[1]))
