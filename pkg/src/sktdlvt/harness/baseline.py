"""Direct (unsegmented) Lv's transform over the whole aperture.

Reference estimator: after the keystone, the azimuth signal of a cell is
transformed with one LVT over all ``N`` pulses, so the frequency span is
``1/(2T)`` and no frequency-walk step is needed.
"""

from __future__ import annotations

import numpy as np

from .. import opcount
from ..dlvt import AzimuthSignal, EstimateRecord, focus_score, lvt_values, wrap
from ..errors import CostGuard
from ..sigmodel import EchoMatrix

MAX_PULSES = 8192


def dt_lvt_baseline(x: AzimuthSignal, chirp_window=None, max_pulses: int = MAX_PULSES,
                    lag_chunk: int = 128) -> EstimateRecord:
    """Full-aperture LVT estimate of ``(f_hat, gamma_hat)``.

    Parameters
    ----------
    x : AzimuthSignal
    chirp_window : (float, float), optional
        Restrict the chirp-rate search to ``[lo, hi]`` Hz/s. By default the
        whole axis ``+-1/(2 T NT) * N`` is searched.
    max_pulses : int
        Cost guard on ``N``.

    Returns
    -------
    EstimateRecord
        ``f_hat`` is the Doppler at the aperture end folded to ``1/(2T)``;
        ``k_amb_in`` and ``v_c_hat`` are left unset.

    Raises
    ------
    CostGuard
        If ``N > max_pulses``.
    """
    n = x.plan.num_pulses
    if n > max_pulses:
        raise CostGuard(f"DT-LVT over {n} pulses exceeds the guard of {max_pulses}")
    pri = x.plan.pri
    with opcount.stage("dtlvt"):
        (val, j, k), freq, chirp, t_ref = lvt_values(
            x.samples, pri, keep="peak", lag_chunk=lag_chunk, chirp_window=chirp_window)
    nt = x.plan.aperture_time
    gamma = float(chirp[j])
    f_hat = float(wrap(freq[k] + gamma * (nt - t_ref), 1.0 / (2.0 * pri)))
    return EstimateRecord(
        a1_hat=f_hat - gamma * nt, a2_hat=gamma, f_hat=f_hat, gamma_hat=gamma,
        fq_coarse=np.nan, aperture_time=nt, wavelength=x.params.wavelength,
        peak_magnitude=float(abs(val)), range_cell=x.range_cell, amplitude=complex(val))


def resolve_baseline_velocity(e: EchoMatrix, est: EstimateRecord, k_amb_out: int = 0,
                              window: int = 2, reach: int = 2) -> EstimateRecord:
    """Unfold the half-PRF ambiguity of a baseline estimate by focusing.

    Candidates ``v = lambda (f_hat + k / (2T) - a2 NT) / 2`` for ``k`` within
    ``reach`` of ``2 k_amb_out`` are scored with :func:`focus_score` on the
    (SlowTime, RangeFreq) echo ``e``.
    """
    p = e.params
    nt = p.aperture_time
    cells = None
    if est.range_cell >= 0:
        cells = np.arange(est.range_cell - window, est.range_cell + window + 1)
    best = None
    for k in range(2 * k_amb_out - reach, 2 * k_amb_out + reach + 1):
        v = p.wavelength * (est.f_hat + k * p.prf / 2.0 - est.a2_hat * nt) / 2.0
        peak = focus_score(e, v, est.a2_hat, cells)[0]
        if best is None or peak > best[0] or (peak == best[0] and abs(v) < abs(best[2])):
            best = (peak, k, v)
    return est.with_(k_amb_in=best[1], k_amb_out=int(k_amb_out), v_c_hat=best[2])
