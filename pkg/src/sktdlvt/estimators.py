"""scikit-learn style wrappers.

Inputs are complex arrays, which ``sklearn.utils.check_array`` rejects, so
validation is done here: finite values, 2-D shape, and the shape the radar
parameters imply.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dlvt import AzimuthSignal, DlvtConfig, estimate_cell
from .multitarget import PipelineConfig, estimate_scene
from .sigmodel import ColAxis, EchoMatrix, RadarParams, RowAxis, from_range_frequency, to_range_frequency
from .skt import apply_skt, correct_quadratic_rcm, plan_segments


def _as_complex_2d(X, name="X"):
    X = X.data if isinstance(X, EchoMatrix) else X
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if X.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.issubdtype(X.dtype, np.number):
        raise ValueError(f"{name} must be numeric")
    X = X.astype(complex, copy=False)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinity")
    return X


class _RadarMixin:
    def _radar(self):
        return RadarParams() if self.radar is None else self.radar

    def _plan(self):
        return plan_segments(self._radar(), self.a2_max, None if self.P == "auto" else self.P)

    def _echo(self, X):
        radar = self._radar()
        if isinstance(X, EchoMatrix):
            X.require(RowAxis.SLOW_TIME, ColAxis.FAST_TIME)
            near = X.near_range
        else:
            near = 0.0 if self.near_range is None else self.near_range
        data = _as_complex_2d(X)
        expect = (radar.num_pulses, radar.num_range_cells)
        if data.shape != expect:
            raise ValueError(f"X must have shape {expect} (pulses, range cells), got {data.shape}")
        return EchoMatrix(data, RowAxis.SLOW_TIME, ColAxis.FAST_TIME, radar, float(near))


class KeystoneTransformer(_RadarMixin, TransformerMixin, BaseEstimator):
    """Segmental keystone plus quadratic migration correction.

    Parameters
    ----------
    radar : RadarParams, optional
    P : int or "auto"
    a2_max : float
        Doppler-rate bound [Hz/s] for the segment plan.
    method : {"ChirpZ", "Sinc"}
    near_range : float, optional
        Slant range of the first cell when ``X`` is a bare array.
    """

    def __init__(self, radar=None, P=256, a2_max=61.33, method="ChirpZ", near_range=None):
        self.radar = radar
        self.P = P
        self.a2_max = a2_max
        self.method = method
        self.near_range = near_range

    def fit(self, X, y=None):
        self._echo(X)
        self.plan_ = self._plan()
        self.n_features_in_ = self._radar().num_range_cells
        return self

    def transform(self, X):
        """Return the keystoned (slow time, range cell) matrix."""
        check_is_fitted(self, "plan_")
        e = self._echo(X)
        E = correct_quadratic_rcm(apply_skt(to_range_frequency(e), self.plan_, self.method),
                                  e.params, self.plan_)
        return from_range_frequency(E).data


class DlvtEstimator(_RadarMixin, BaseEstimator):
    """Per-cell DLVT: each row of ``X`` is one azimuth signal of ``N`` pulses.

    ``predict`` returns ``(f_hat, gamma_hat)`` per row: Doppler at the
    aperture end folded to ``P/(2NT)`` [Hz] and Doppler rate [Hz/s].
    """

    def __init__(self, radar=None, P=256, a2_max=61.33, fft_oversample=2, near_range=None):
        self.radar = radar
        self.P = P
        self.a2_max = a2_max
        self.fft_oversample = fft_oversample
        self.near_range = near_range

    def fit(self, X, y=None):
        X = _as_complex_2d(X)
        n = self._radar().num_pulses
        if X.shape[1] != n:
            raise ValueError(f"rows must hold {n} pulses, got {X.shape[1]}")
        self.plan_ = self._plan()
        self.n_features_in_ = n
        return self

    def predict(self, X):
        check_is_fitted(self, "plan_")
        X = _as_complex_2d(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"rows must hold {self.n_features_in_} pulses, got {X.shape[1]}")
        cfg = DlvtConfig(fft_oversample=self.fft_oversample)
        out = np.empty((X.shape[0], 2))
        for i, row in enumerate(X):
            est = estimate_cell(AzimuthSignal(row, i, self.plan_, self._radar()), cfg)
            out[i] = est.f_hat, est.gamma_hat
        return out


class SceneEstimator(_RadarMixin, BaseEstimator):
    """Full scene pipeline: fold scan, per-cell DLVT, fine ambiguity, CLEAN.

    ``fit`` stores ``estimates_`` (list of EstimateRecord) for the echo;
    ``predict`` returns an ``(n_targets, 3)`` array of range cell, radial
    velocity [m/s] and radial acceleration [m/s^2].
    """

    def __init__(self, radar=None, P=256, a2_max=61.33, skt_method="ChirpZ", k_max=8,
                 clean=True, detection_sigmas=5.0, near_range=None):
        self.radar = radar
        self.P = P
        self.a2_max = a2_max
        self.skt_method = skt_method
        self.k_max = k_max
        self.clean = clean
        self.detection_sigmas = detection_sigmas
        self.near_range = near_range

    def _config(self):
        return PipelineConfig(skt_method=self.skt_method, k_max=self.k_max, clean=self.clean,
                              detection_sigmas=self.detection_sigmas)

    def _run(self, X):
        e = self._echo(X)
        return estimate_scene(e, self._plan(), e.params, self._config())

    def fit(self, X, y=None):
        res = self._run(X)
        self.estimates_ = list(res.estimates)
        self.fold_scan_ = res.fold_scan
        self.residual_energy_fraction_ = res.residual_energy_fraction
        self.n_features_in_ = self._radar().num_range_cells
        return self

    @staticmethod
    def _table(estimates):
        rows = [(e.range_cell, np.nan if e.v_c_hat is None else e.v_c_hat, e.a_c_hat)
                for e in sorted(estimates, key=lambda e: (e.range_cell, e.v_c_hat or 0.0))]
        return np.array(rows, dtype=float).reshape(-1, 3)

    def predict(self, X):
        check_is_fitted(self, "estimates_")
        return self._table(self._run(X).estimates)

    def fit_predict(self, X, y=None):
        return self._table(self.fit(X).estimates_)
