"""Radar/target types and range-compressed moving-target echo synthesis.

Range history uses the quadratic approximation

    R(t) = R_B - v_c t + (V - v_a)^2 t^2 / (2 R_B)

and every compressed pulse is a band-limited sinc envelope centred on the
two-way delay with carrier phase ``exp(-j 4 pi R(t) / lambda)``.

FFT convention: forward transforms are unscaled, inverse transforms carry 1/M
(numpy default). Energy is therefore preserved up to a factor M by the
forward range FFT.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AxisMismatch, SwathOverflow

LIGHT_SPEED = 299792458.0


@dataclass(frozen=True)
class RadarParams:
    """Waveform and geometry constants.

    Defaults reproduce the simulation table: 10 GHz carrier, 8 MHz bandwidth,
    2 kHz PRF, 20 MHz range sampling, 20 us pulse. The platform velocity is
    chosen so that a target at 10 km with zero along-track speed has a radial
    acceleration of 0.92 m/s^2.
    """

    carrier_freq: float = 10e9
    prf: float = 2000.0
    pulse_width: float = 20e-6
    range_bandwidth: float = 8e6
    range_sample_rate: float = 20e6
    platform_velocity: float = float(np.sqrt(9200.0))
    num_pulses: int = 4096
    num_range_cells: int = 512
    light_speed: float = field(default=LIGHT_SPEED, repr=False)

    def __post_init__(self):
        if self.prf <= 0:
            raise ValueError("prf must be positive")
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")
        if self.range_sample_rate < self.range_bandwidth:
            raise ValueError("range_sample_rate must be >= range_bandwidth")
        n = int(self.num_pulses)
        if n <= 0 or n & (n - 1):
            raise ValueError("num_pulses must be a positive power of two")
        if self.num_range_cells <= 0:
            raise ValueError("num_range_cells must be positive")
        if self.range_bandwidth >= 2 * self.carrier_freq:
            raise ValueError("range_bandwidth must be below twice the carrier")

    @property
    def wavelength(self) -> float:
        return self.light_speed / self.carrier_freq

    @property
    def pri(self) -> float:
        return 1.0 / self.prf

    @property
    def chirp_rate_tx(self) -> float:
        return self.range_bandwidth / self.pulse_width

    @property
    def aperture_time(self) -> float:
        """Coherent processing interval ``N T``."""
        return self.num_pulses / self.prf

    @property
    def blind_velocity(self) -> float:
        """Radial speed that folds the Doppler by exactly one PRF."""
        return self.prf * self.wavelength / 2.0

    @property
    def range_cell(self) -> float:
        """Slant-range extent of one fast-time sample."""
        return self.light_speed / (2.0 * self.range_sample_rate)

    @property
    def compression_gain(self) -> float:
        """Time-bandwidth product of the transmitted chirp."""
        return self.range_bandwidth * self.pulse_width

    def slow_time(self) -> np.ndarray:
        return np.arange(self.num_pulses) / self.prf

    def range_frequencies(self) -> np.ndarray:
        """Range-frequency of each column in unshifted FFT order."""
        return np.fft.fftfreq(self.num_range_cells, d=1.0 / self.range_sample_rate)


@dataclass(frozen=True)
class TargetTruth:
    """Ground truth of a point mover in uniform rectilinear motion."""

    nearest_range: float
    along_track_velocity: float = 0.0
    cross_track_velocity: float = 0.0
    reflectivity: complex = 1.0

    def __post_init__(self):
        if self.nearest_range <= 0:
            raise ValueError("nearest_range must be positive")

    @classmethod
    def from_radial(cls, nearest_range, radial_velocity, radial_accel,
                    platform_velocity, reflectivity=1.0):
        """Build a target from its radial velocity and acceleration.

        The along-track speed is solved from ``a_c R_B = (V - v_a)^2``.
        """
        if radial_accel < 0:
            raise ValueError("radial_accel must be non-negative")
        v_a = platform_velocity - np.sqrt(radial_accel * nearest_range)
        return cls(nearest_range=float(nearest_range),
                   along_track_velocity=float(v_a),
                   cross_track_velocity=float(radial_velocity),
                   reflectivity=complex(reflectivity))

    def radial_accel(self, platform_velocity: float) -> float:
        return (platform_velocity - self.along_track_velocity) ** 2 / self.nearest_range

    def doppler_coefficients(self, params: RadarParams) -> tuple[float, float]:
        """Return ``(a1, a2)``: Doppler at t=0 [Hz] and Doppler rate [Hz/s]."""
        lam = params.wavelength
        a1 = 2.0 * self.cross_track_velocity / lam
        a2 = -2.0 * self.radial_accel(params.platform_velocity) / lam
        return a1, a2


class RowAxis(str, enum.Enum):
    SLOW_TIME = "SlowTime"
    INTRA_SEG_TIME = "IntraSegTime"
    INTRA_SEG_FREQ = "IntraSegFreq"


class ColAxis(str, enum.Enum):
    FAST_TIME = "FastTime"
    RANGE_FREQ = "RangeFreq"
    RANGE_CELL = "RangeCell"


@dataclass(frozen=True, eq=False)
class EchoMatrix:
    """Slow-time rows by fast-time (or range-frequency) columns.

    ``near_range`` is the slant range of fast-time sample 0.
    """

    data: np.ndarray
    row_axis: RowAxis
    col_axis: ColAxis
    params: RadarParams
    near_range: float

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("echo data must be 2-D")

    @property
    def shape(self):
        return self.data.shape

    def require(self, row_axis=None, col_axis=None):
        if row_axis is not None and self.row_axis != row_axis:
            raise AxisMismatch(f"expected rows {row_axis.value}, got {self.row_axis.value}")
        if col_axis is not None and self.col_axis != col_axis:
            raise AxisMismatch(f"expected columns {col_axis.value}, got {self.col_axis.value}")

    def with_data(self, data, **tags) -> "EchoMatrix":
        if data.shape != self.data.shape:
            raise ValueError("echo shape is immutable")
        return replace(self, data=data, **tags)

    def range_axis(self) -> np.ndarray:
        return self.near_range + np.arange(self.shape[1]) * self.params.range_cell

    @property
    def scene_center_range(self) -> float:
        return self.near_range + 0.5 * self.shape[1] * self.params.range_cell


def slant_range(params: RadarParams, target: TargetTruth, t):
    """Quadratic slant-range history of ``target`` at slow time ``t``."""
    t = np.asarray(t, dtype=float)
    rel = params.platform_velocity - target.along_track_velocity
    r = (target.nearest_range - target.cross_track_velocity * t
         + rel ** 2 * t ** 2 / (2.0 * target.nearest_range))
    return r if r.ndim else float(r)


def default_near_range(params: RadarParams, targets) -> float:
    """Swath start that centres the window on the mean nearest range."""
    mean_r = float(np.mean([tg.nearest_range for tg in targets]))
    return mean_r - 0.5 * params.num_range_cells * params.range_cell


def noise_variance_for_snr(target: TargetTruth, snr_db: float) -> float:
    """Per-sample complex noise variance giving ``|sigma|^2 / var = snr``."""
    return abs(target.reflectivity) ** 2 / 10.0 ** (snr_db / 10.0)


def add_noise(data: np.ndarray, noise_power, rng) -> np.ndarray:
    scale = np.sqrt(noise_power / 2.0)
    noise = rng.standard_normal(data.shape) + 1j * rng.standard_normal(data.shape)
    return data + scale * noise


def simulate_compressed_echo(params: RadarParams, targets, noise_power=None,
                             seed=None, near_range=None, rng=None) -> EchoMatrix:
    """Synthesize range-compressed echoes of ``targets``.

    Parameters
    ----------
    params : RadarParams
    targets : sequence of TargetTruth
        Must be non-empty.
    noise_power : float, optional
        Variance of i.i.d. circular complex Gaussian noise added to every
        sample. ``None`` or 0 disables noise.
    seed : int, optional
        Seed for the noise generator (ignored when ``rng`` is given).
    near_range : float, optional
        Slant range of the first fast-time sample. Defaults to a window of
        ``params.num_range_cells`` cells centred on the mean nearest range.

    Returns
    -------
    EchoMatrix
        Tagged (SlowTime, FastTime).

    Raises
    ------
    SwathOverflow
        If any envelope peak leaves the fast-time window.
    """
    targets = list(targets)
    if not targets:
        raise ValueError("at least one target is required")
    if near_range is None:
        near_range = default_near_range(params, targets)
    n_rows, n_cols = params.num_pulses, params.num_range_cells
    t = params.slow_time()
    cells = np.arange(n_cols)
    lam = params.wavelength
    data = np.zeros((n_rows, n_cols), dtype=complex)
    for tg in targets:
        r = slant_range(params, tg, t)
        pos = (r - near_range) / params.range_cell
        if pos.min() < 0 or pos.max() > n_cols - 1:
            raise SwathOverflow(
                f"target at R_B={tg.nearest_range} spans cells "
                f"[{pos.min():.1f}, {pos.max():.1f}] outside [0, {n_cols - 1}]")
        # sinc[pi B (tau - 2R/c)] with tau sampled at fs
        arg = (params.range_bandwidth / params.range_sample_rate) * (cells[None, :] - pos[:, None])
        phase = np.exp(-4j * np.pi * r / lam)
        data += tg.reflectivity * np.sinc(arg) * phase[:, None]
    if noise_power:
        rng = rng if rng is not None else np.random.default_rng(seed)
        data = add_noise(data, noise_power, rng)
    return EchoMatrix(data, RowAxis.SLOW_TIME, ColAxis.FAST_TIME, params, float(near_range))


def to_range_frequency(e: EchoMatrix) -> EchoMatrix:
    """Forward FFT along fast time (unscaled)."""
    e.require(col_axis=ColAxis.FAST_TIME)
    return e.with_data(np.fft.fft(e.data, axis=1), col_axis=ColAxis.RANGE_FREQ)


def from_range_frequency(e: EchoMatrix) -> EchoMatrix:
    """Inverse of :func:`to_range_frequency` (scaled by 1/M)."""
    e.require(col_axis=ColAxis.RANGE_FREQ)
    return e.with_data(np.fft.ifft(e.data, axis=1), col_axis=ColAxis.FAST_TIME)


def peak_cells(e: EchoMatrix) -> np.ndarray:
    """Envelope peak range cell of every row (fast-time data)."""
    e.require(col_axis=ColAxis.FAST_TIME)
    return np.argmax(np.abs(e.data), axis=1)
