"""Scene-level orchestration: ambiguity groups, per-cell DLVT, CLEAN.

:func:`estimate_scene` runs range FFT, marginal-velocity shift, keystone,
quadratic RCMC and the fold scan, then estimates every detected peak of
every candidate range cell. With strongly unequal targets the strongest one
is subtracted (:func:`clean_iterate`) and the scene is searched again.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import opcount
from .ambiguity import (DEFAULT_K_MAX, SplitRule, compensate_outer,
                        detect_and_shift_marginal, joint_lowsnr_search,
                        marginal_shift_phase, marginal_velocity_offset,
                        scan_outer_ambiguity)
from .dlvt import (AzimuthSignal, DlvtConfig, EstimateRecord, LvtPlane, candidate_bins,
                   detection_threshold, doppler_kt, extract_parameters, lvt_values,
                   focus_score, resolve_inner_ambiguity, segment_fft, slope_grid)
from .errors import AmbiguousMaximum, DivergentSubtraction
from .sigmodel import (ColAxis, EchoMatrix, RadarParams, RowAxis, from_range_frequency,
                       to_range_frequency)
from .skt import SegmentPlan, apply_skt, correct_quadratic_rcm

CELL_GUARD = 3


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of the scene pipeline. Thresholds are dimensionless ratios.

    ``detection_sigmas=None`` disables the noise threshold (every cell peak
    is reported), as used by the Monte Carlo study.
    """

    skt_method: str = "ChirpZ"
    k_max: int = DEFAULT_K_MAX
    entropy_margin: float = 0.05
    cell_factor: float = 3.0
    candidate_cells: tuple | None = None
    peak_rel_threshold: float = 0.3
    sidelobe_ratio: float = 0.7
    max_peaks_per_cell: int = 4
    detection_sigmas: float | None = 5.0
    inner_window: int = 2
    marginal: bool = True
    split_rule: SplitRule = field(default_factory=lambda: SplitRule(edge_energy=0.05))
    clean: bool = True
    clean_trigger_db: float = 10.0
    clean_max_iter: int = 5
    clean_stop_fraction: float = 1e-3
    clean_floor: float = 3e-3
    dlvt: DlvtConfig = field(default_factory=DlvtConfig)


@dataclass(frozen=True)
class SceneResult:
    """Estimates of one scene plus CLEAN bookkeeping."""

    estimates: list
    residual_energy_fraction: float
    iterations: int
    fold_scan: object = None
    shifted: bool = False


def noise_power_estimate(data) -> float:
    """Robust per-sample noise variance: ``median |x|^2 / ln 2``."""
    return float(np.median(np.abs(data) ** 2) / np.log(2.0))


def peak_cells(energy, factor: float, guard: int = 3) -> np.ndarray:
    """Cells above ``factor`` x median energy that are the maximum of their
    ``+-guard`` neighbourhood (suppresses range sidelobes)."""
    energy = np.asarray(energy, dtype=float)
    thr = factor * np.median(energy)
    pad = np.pad(energy, guard, constant_values=-np.inf)
    win = np.lib.stride_tricks.sliding_window_view(pad, 2 * guard + 1)
    is_max = energy >= win.max(axis=1)
    idx = np.where((energy > thr) & is_max)[0]
    return idx[np.argsort(energy[idx])[::-1]]


def _local_peaks(mag, rel, floor, limit):
    """(bin, j, k) of 3x3 local maxima in every plane of ``mag``."""
    top = mag.max()
    pad = np.pad(mag, ((0, 0), (1, 1), (1, 1)), constant_values=-np.inf)
    core = pad[:, 1:-1, 1:-1]
    is_max = np.ones_like(core, dtype=bool)
    for dj in (-1, 0, 1):
        for dk in (-1, 0, 1):
            if dj or dk:
                is_max &= core >= pad[:, 1 + dj:pad.shape[1] - 1 + dj,
                                      1 + dk:pad.shape[2] - 1 + dk]
    is_max &= core >= max(rel * top, floor)
    idx = np.argwhere(is_max)
    order = np.argsort(mag[tuple(idx.T)])[::-1]
    return [tuple(int(v) for v in idx[o]) for o in order[:limit]]


def cell_estimates(x: AzimuthSignal, config: PipelineConfig, floor: float) -> list:
    """All LVT peaks of one cell above ``floor`` and the relative threshold.

    The walk slope is chosen by the largest LVT peak over the slope grid;
    each retained peak is then re-measured after a walk correction at its
    own Doppler rate.
    """
    plan = x.plan
    dt = plan.segment_duration
    cfg = config.dlvt
    base = segment_fft(x, cfg.fft_oversample)
    best = None
    for s in slope_grid(plan, cfg.slope_step_fraction):
        spec = doppler_kt(base, s)
        bins = candidate_bins(spec, cfg.bin_factor, cfg.max_bins)
        with opcount.stage("dlvt"):
            vals, freq, chirp, t_ref = lvt_values(spec.data[bins], dt)
        peak = np.max(np.abs(vals))
        if best is None or peak > best[0]:
            best = (peak, spec, bins, vals, freq, chirp, t_ref)
    _, spec, bins, vals, freq, chirp, t_ref = best
    out = []
    for b, j, k in _local_peaks(np.abs(vals), config.peak_rel_threshold, floor,
                                config.max_peaks_per_cell * 3):
        plane = LvtPlane(_single(vals[b], j, k), freq, chirp, t_ref, int(bins[b]))
        est = extract_parameters([plane], plan, x.params, spec, x.range_cell)
        est = _refine_walk(base, est, int(bins[b]), j, k, x)
        if not any(_same_measurement(est, o, plan) for o in out):
            out.append(est)
        if len(out) >= config.max_peaks_per_cell:
            break
    return out


def lvt_peak_bound(x: AzimuthSignal, oversample: int = 1) -> float:
    """Upper bound on any LVT peak of the cell.

    Every LVT value is a unit-phase sum of lag products over ``(P-1)//2``
    lags, so by Cauchy-Schwarz it cannot exceed ``n_lags`` times the energy
    of one spectral row, itself at most ``nfft`` times the cell energy.
    """
    plan = x.plan
    n_lags = (plan.num_segments - 1) // 2
    nfft = plan.samples_per_segment * int(oversample)
    return float(n_lags * nfft * np.sum(np.abs(x.samples) ** 2))


def _single(values, j, k):
    """Plane with every value but ``(j, k)`` zeroed, to pin the argmax."""
    out = np.zeros_like(values)
    out[j, k] = values[j, k]
    return out


def _refine_walk(base, est, b, j, k, x, reach=2):
    """Re-measure a peak after walk correction at its own Doppler rate."""
    plan = x.plan
    spec = doppler_kt(base, est.a2_hat)
    with opcount.stage("dlvt"):
        vals, freq, chirp, t_ref = lvt_values(spec.data[[b]], plan.segment_duration)
    mag = np.abs(vals[0])
    rows = np.arange(max(j - reach, 0), min(j + reach + 1, len(chirp)))
    cols = np.arange(k - reach, k + reach + 1) % len(freq)
    sub = mag[np.ix_(rows, cols)]
    dj, dk = np.unravel_index(np.argmax(sub), sub.shape)
    j2, k2 = int(rows[dj]), int(cols[dk])
    if mag[j2, k2] < est.peak_magnitude:
        return est
    plane = LvtPlane(_single(vals[0], j2, k2), freq, chirp, t_ref, b)
    return extract_parameters([plane], plan, x.params, spec, x.range_cell)


def _lvt_steps(plan: SegmentPlan):
    step = 1.0 / (2.0 * plan.aperture_time)
    return step, step, plan.num_segments / (2.0 * plan.aperture_time)


def _fold_drift_cells(params: RadarParams, dk: int) -> float:
    """Envelope drift over the aperture left by a fold error of ``dk``."""
    return (2.0 * abs(dk) * params.blind_velocity * params.aperture_time
            * params.range_sample_rate / params.light_speed)


def _same_measurement(a: EstimateRecord, b: EstimateRecord, plan: SegmentPlan, bins=4,
                      params: RadarParams | None = None):
    """Same LVT peak (within ``bins`` on both axes) in a nearby cell.

    Zero-padded intra-segment FFTs show one target in adjacent bins with
    peaks a few LVT bins apart; those are merged here. Under a wrong fold
    number the same target reappears smeared over the residual walk, so
    with ``params`` the cell tolerance grows with the fold difference.
    """
    reach = CELL_GUARD
    if params is not None and a.k_amb_out != b.k_amb_out:
        reach += _fold_drift_cells(params, a.k_amb_out - b.k_amb_out)
    if abs(a.range_cell - b.range_cell) > reach:
        return False
    chirp_step, freq_step, span = _lvt_steps(plan)
    df = abs((a.f_hat - b.f_hat + span / 2) % span - span / 2)
    return abs(a.a2_hat - b.a2_hat) <= bins * chirp_step and df <= bins * freq_step


def _same_target(a: EstimateRecord, b: EstimateRecord, plan: SegmentPlan,
                 params: RadarParams | None = None):
    """Same mover: same measurement, or same resolved motion nearby."""
    if _same_measurement(a, b, plan, params=params):
        return True
    chirp_step = _lvt_steps(plan)[0]
    return (abs(a.range_cell - b.range_cell) <= CELL_GUARD
            and a.v_c_hat is not None and b.v_c_hat is not None
            and abs(a.v_c_hat - b.v_c_hat) < 0.2
            and abs(a.a2_hat - b.a2_hat) <= 2 * chirp_step)


def _sidelobe_of(weak: EstimateRecord, strong: EstimateRecord, plan: SegmentPlan,
                 ratio: float, params=None, reach: int = 16):
    """``weak`` sits within ``reach`` LVT bins of a much stronger peak
    (possibly a wrong-fold image of it)."""
    if weak.peak_magnitude >= ratio * strong.peak_magnitude:
        return False
    return _same_measurement(weak, strong, plan, bins=reach, params=params)


def _dedupe(scored, plan, params=None, sidelobe_ratio=0.0):
    """Keep the best-focused record of each cluster of duplicates, then drop
    peaks that are sidelobes of a stronger kept one."""
    kept = []
    for est, score in sorted(scored, key=lambda r: r[1], reverse=True):
        if not any(_same_target(est, k, plan, params) for k, _ in kept):
            kept.append((est, score))
    kept = [k for k, _ in kept]
    return [w for w in kept
            if not any(_sidelobe_of(w, s, plan, sidelobe_ratio, params) for s in kept if s is not w)]


def _window(cell, w):
    return np.arange(cell - w, cell + w + 1) if cell >= 0 else None


def _groups(scan, config, sharpness=3.0, inner=4, outer=8):
    """Fold numbers whose compensation sharply focuses some strong cell.

    A cell votes for the fold maximizing its integrated profile only if that
    profile peaks there at ``sharpness`` times its mean ``inner..outer``
    cells away; a wrong fold smears a target into a flat plateau.
    """
    prof = scan.integrated_profiles
    best = prof.max(axis=0)
    k_idx = np.argmax(prof, axis=0)
    ks = [scan.best_k]
    m = prof.shape[1]
    offs = np.r_[-outer:-inner + 1, inner:outer + 1]
    for c in peak_cells(best ** 2, config.cell_factor, CELL_GUARD):
        k = int(scan.k_values[k_idx[c]])
        if k in ks:
            continue
        ring = prof[k_idx[c], np.clip(c + offs, 0, m - 1)].mean()
        if prof[k_idx[c], c] >= sharpness * ring:
            ks.append(k)
    return ks


def _detect(e: EchoMatrix, plan: SegmentPlan, params: RadarParams, config: PipelineConfig,
            floor_abs: float):
    """One detection pass over a (SlowTime, FastTime) echo."""
    E = to_range_frequency(e)
    shifted = False
    if config.marginal:
        shifted, E = detect_and_shift_marginal(E, params, config.split_rule)
    offset = marginal_velocity_offset(params) if shifted else 0.0
    K = correct_quadratic_rcm(apply_skt(E, plan, config.skt_method), params, plan)
    scan = scan_outer_ambiguity(K, plan, params, config.k_max)
    noise = noise_power_estimate(np.fft.ifft(K.data, axis=1))
    thr = floor_abs
    if config.detection_sigmas is not None:
        thr = max(detection_threshold(plan, noise, sigmas=config.detection_sigmas), floor_abs)

    groups = _groups(scan, config)
    # a tie between several sharply focused folds is a multi-group scene,
    # not an unreliable scan
    if scan.margin < config.entropy_margin and len(groups) == 1:
        cell = config.candidate_cells[0] if config.candidate_cells else None
        try:
            groups = [joint_lowsnr_search(K, plan, params, list(scan.k_values), cell,
                                          config.dlvt)[0]]
        except AmbiguousMaximum:
            groups = [scan.best_k]

    scored = []
    for k in groups:
        D = from_range_frequency(compensate_outer(K, k, params))
        if config.candidate_cells is not None:
            cells = list(config.candidate_cells)
        else:
            cells = list(peak_cells(np.sum(np.abs(D.data) ** 2, axis=0), config.cell_factor, CELL_GUARD))
        for c in cells:
            x = AzimuthSignal.from_echo(D, int(c), plan)
            if lvt_peak_bound(x, config.dlvt.fft_oversample) < thr:
                continue
            for est in cell_estimates(x, config, thr):
                est = est.with_(k_amb_out=int(k), shifted=shifted,
                                entropy_curve=tuple(float(v) for v in scan.entropy))
                try:
                    est = resolve_inner_ambiguity(E, est, plan, params, int(k),
                                                  config.inner_window, offset)
                except AmbiguousMaximum:
                    scored.append((est.with_(status="ambiguous"), 0.0))
                    continue
                score = focus_score(E, est.v_c_hat - offset, est.a2_hat,
                                    _window(est.range_cell, config.inner_window))[0]
                scored.append((est, score))
    return _dedupe(scored, plan, params, config.sidelobe_ratio), scan, shifted


def estimate_scene(e: EchoMatrix, plan: SegmentPlan, params: RadarParams | None = None,
                   config: PipelineConfig | None = None) -> SceneResult:
    """Estimate every moving target of a (SlowTime, FastTime) echo.

    Targets are grouped by fold number; each group is compensated once and
    all its candidate cells are processed in the same pass. If the strongest
    detected LVT peak exceeds the next one by more than
    ``config.clean_trigger_db``, the strongest target is subtracted and the
    search repeats on the residual (at most ``config.clean_max_iter`` times).
    """
    e.require(RowAxis.SLOW_TIME)
    config = PipelineConfig() if config is None else config
    params = e.params if params is None else params
    plan.check(params)
    e0 = float(np.sum(np.abs(e.data) ** 2))
    residual = e if e.col_axis == ColAxis.FAST_TIME else from_range_frequency(e)
    accepted, ref_peak, frac, iterations = [], None, 1.0, 0
    scan, shifted = None, False
    trigger = 10.0 ** (config.clean_trigger_db / 20.0)
    for it in range(config.clean_max_iter + 1):
        floor = config.clean_floor * ref_peak if ref_peak is not None else 0.0
        found, s, sh = _detect(residual, plan, params, config, floor)
        scan = scan if scan is not None else s
        shifted = shifted or sh
        if not found:
            break
        found.sort(key=lambda r: r.peak_magnitude, reverse=True)
        if ref_peak is None:
            ref_peak = found[0].peak_magnitude
        ratio = (found[0].peak_magnitude / found[1].peak_magnitude
                 if len(found) > 1 else np.inf)
        if not config.clean or ratio < trigger or it == config.clean_max_iter:
            accepted.extend(f for f in found
                            if not any(_same_target(f, a, plan, params) for a in accepted))
            break
        strongest = found[0]
        if not any(_same_target(strongest, a, plan, params) for a in accepted):
            accepted.append(strongest)
        if strongest.v_c_hat is None:
            break
        residual = clean_iterate(residual, strongest, params)
        iterations += 1
        frac = float(np.sum(np.abs(residual.data) ** 2)) / e0 if e0 > 0 else 0.0
        if frac < config.clean_stop_fraction:
            break
    if iterations == 0 and e0 > 0:
        frac = 1.0
    return SceneResult(accepted, min(frac, 1.0), iterations, scan, shifted)


# ------------------------------------------------------------------ CLEAN

def _range_freqs(params: RadarParams, n_cols: int):
    return np.fft.fftfreq(n_cols, d=1.0 / params.range_sample_rate)


def _motion_phase(params: RadarParams, freqs, velocity: float, a2: float):
    t = params.slow_time()
    g = velocity * t + a2 * params.wavelength * t * t / 4.0
    return np.exp(-4j * np.pi * np.outer(g, np.asarray(freqs) + params.carrier_freq)
                  / params.light_speed)


def projected_energy(S, params, velocity, a2, freqs=None) -> float:
    """Energy captured by the rank-one motion model, ``sum_f |mean_t S H|^2``."""
    freqs = _range_freqs(params, S.shape[1]) if freqs is None else freqs
    h = _motion_phase(params, freqs, velocity, a2)
    return float(np.sum(np.abs(np.mean(S * h, axis=0)) ** 2))


def refine_motion(S, params: RadarParams, velocity: float, a2: float, span: int = 2):
    """Refine ``(v, a2)`` by maximizing :func:`projected_energy`.

    The search runs in resolution units of the decoupled coordinates
    ``(v_mid, a2)``, with ``v_mid = v + lambda a2 NT / 4`` the velocity at
    the aperture centre. A grid over ``+-span`` cells seeds Nelder-Mead.
    """
    nt = params.aperture_time
    lam = params.wavelength
    freqs = _range_freqs(params, S.shape[1])
    power = np.sum(np.abs(S) ** 2, axis=0)
    keep = power > 1e-4 * power.max()
    S, freqs = S[:, keep], freqs[keep]
    # strided subset of columns for the search; the focus is not column-selective
    stride = max(1, S.shape[1] // 64)
    Ss, fs = S[:, ::stride], freqs[::stride]
    du = np.array([lam / (2.0 * nt), 1.0 / (nt * nt)])
    x0 = np.array([velocity + lam * a2 * nt / 4.0, a2])

    def to_va(u):
        vm, aa = x0 + u * du
        return vm - lam * aa * nt / 4.0, aa

    def cost(u):
        return -projected_energy(Ss, params, *to_va(u), freqs=fs)

    grid = np.arange(-span, span + 1)
    best = min(((cost(np.array([i, j])), i, j) for i in grid for j in grid))
    res = optimize.minimize(cost, np.array(best[1:]), method="Nelder-Mead",
                            options={"initial_simplex": np.array(best[1:]) + 0.25 * np.array(
                                [[0, 0], [1, 0], [0, 1]]), "xatol": 1e-3, "fatol": 1e-9 * -best[0]})
    return to_va(res.x)


def clean_iterate(e: EchoMatrix, strongest: EstimateRecord, params: RadarParams | None = None,
                  refine: bool = True) -> EchoMatrix:
    """Subtract the least-squares model echo of ``strongest``.

    The model is rank one in the motion-compensated domain: every range
    frequency column carries ``A(f) conj(H(t, f))`` with the compensation
    ``H`` of the target's ``(v, a2)``. ``A(f)`` is the least-squares fit
    ``mean_t S H``, so the subtraction is an orthogonal projection.

    Raises
    ------
    DivergentSubtraction
        If the residual energy is not below the input energy.
    """
    params = e.params if params is None else params
    if strongest.v_c_hat is None:
        raise ValueError("strongest estimate has no resolved velocity")
    fast = e.col_axis == ColAxis.FAST_TIME
    E = to_range_frequency(e) if fast else e
    S = E.data
    v = strongest.v_c_hat - (marginal_velocity_offset(params) if strongest.shifted else 0.0)
    a2 = strongest.a2_hat
    if strongest.shifted:
        S = S * marginal_shift_phase(params, S.shape[1])
    if refine:
        v, a2 = refine_motion(S, params, v, a2)
    h = _motion_phase(params, _range_freqs(params, S.shape[1]), v, a2)
    amp = np.mean(S * h, axis=0)
    model = np.conj(h) * amp[None, :]
    if strongest.shifted:
        model = model * np.conj(marginal_shift_phase(params, S.shape[1]))
    out = E.data - model
    e_in = float(np.sum(np.abs(E.data) ** 2))
    e_out = float(np.sum(np.abs(out) ** 2))
    if e_in > 0 and not e_out < e_in:
        raise DivergentSubtraction(f"residual energy {e_out:.3g} >= input {e_in:.3g}")
    res = E.with_data(out)
    return from_range_frequency(res) if fast else res
