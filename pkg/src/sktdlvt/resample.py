"""Axis-scaling resamplers: windowed-sinc interpolation and chirp-z scaling.

Both resamplers evaluate a sequence ``x[0..L-1]`` at the positions

    u[m'] = scale * (m' + offset) - offset,   m' = 0..L-1

which is the keystone time scaling with every segment aligned to the first
sample of the first segment when ``offset`` is the segment's global start
index. The sinc path zero-pads outside ``[0, L)``; the chirp-z path treats
the block as one period of a band-limited sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import i0

from . import opcount
from .errors import PlanMismatch

DEFAULT_HALFWIDTH = 8
DEFAULT_KAISER_BETA = 5.0


def fft(x, n=None, axis=-1):
    """Unscaled forward FFT (counted)."""
    x = np.asarray(x)
    size = n if n is not None else x.shape[axis]
    opcount.count_fft(size, x.size // max(x.shape[axis], 1))
    return np.fft.fft(x, n=n, axis=axis)


def ifft(x, n=None, axis=-1):
    """Inverse FFT scaled by 1/n (counted)."""
    x = np.asarray(x)
    size = n if n is not None else x.shape[axis]
    opcount.count_fft(size, x.size // max(x.shape[axis], 1))
    return np.fft.ifft(x, n=n, axis=axis)


def _next_pow2(n):
    return 1 << (int(n) - 1).bit_length()


def czt(x, m, w, a=1.0):
    """Chirp-z transform along the last axis via Bluestein's identity.

    Computes ``X[..., k] = sum_i x[..., i] * a**(-i) * w**(i*k)`` for
    ``k = 0..m-1``. ``w`` and ``a`` may be arrays broadcastable to
    ``x.shape[:-1]`` so every row can carry its own contour.

    The transform is evaluated as chirp pre-multiplication, one linear
    convolution with the conjugate chirp (done with FFTs) and chirp
    post-multiplication.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    batch = x.shape[:-1]
    lw = np.log(np.broadcast_to(np.asarray(w, dtype=complex), batch))[..., None]
    la = np.log(np.broadcast_to(np.asarray(a, dtype=complex), batch))[..., None]
    size = _next_pow2(n + m - 1)

    i = np.arange(n)
    k = np.arange(m)
    y = x * np.exp(lw * (i * i / 2.0) - la * i)

    # convolution kernel w**(-j^2/2) for j in [-(n-1), m-1], circular layout
    j = np.concatenate([np.arange(m), np.arange(-(size - m), 0)])
    kern = np.exp(-lw * (j * j / 2.0))
    if n > 1:
        kern[..., m:size - n + 1] = 0.0

    conv = np.fft.ifft(np.fft.fft(y, size) * np.fft.fft(kern, size))[..., :m]
    rows = int(np.prod(batch)) if batch else 1
    opcount.count_fft(size, 3 * rows)
    opcount.count_mults(rows * (n + m + size))
    return conv * np.exp(lw * (k * k / 2.0))


def kaiser_sinc(x, halfwidth=DEFAULT_HALFWIDTH, beta=DEFAULT_KAISER_BETA):
    """Kaiser-windowed sinc kernel truncated to ``|x| <= halfwidth``."""
    x = np.asarray(x, dtype=float)
    span = halfwidth + 1.0
    arg = np.clip(1.0 - (x / span) ** 2, 0.0, None)
    win = i0(beta * np.sqrt(arg)) / i0(beta)
    return np.where(np.abs(x) <= halfwidth + 0.5, np.sinc(x) * win, 0.0)


def keystone_positions(length, scale, offset):
    """Sample positions ``scale*(m'+offset) - offset`` for ``m'=0..length-1``.

    ``scale`` and ``offset`` broadcast against each other; the result has an
    extra trailing axis of size ``length``.
    """
    scale = np.asarray(scale, dtype=float)[..., None]
    offset = np.asarray(offset, dtype=float)[..., None]
    m = np.arange(length)
    return m + (scale - 1.0) * (m + offset)


def sinc_interpolate(x, positions, halfwidth=DEFAULT_HALFWIDTH, beta=DEFAULT_KAISER_BETA):
    """Evaluate ``x`` (last axis) at fractional ``positions`` with zero padding.

    ``positions`` has shape ``batch + (n_out,)`` where ``batch`` broadcasts
    with ``x.shape[:-1]``.
    """
    x = np.asarray(x)
    length = x.shape[-1]
    positions = np.asarray(positions, dtype=float)
    base = np.rint(positions).astype(int)
    taps = base[..., None] + np.arange(-halfwidth, halfwidth + 1)
    weights = kaiser_sinc(positions[..., None] - taps, halfwidth, beta)
    valid = (taps >= 0) & (taps < length)
    weights = np.where(valid, weights, 0.0)
    idx = np.clip(taps, 0, length - 1)
    batch = np.broadcast_shapes(x.shape[:-1], positions.shape[:-1])
    xb = np.broadcast_to(x, batch + (length,))
    flat_idx = idx.reshape(idx.shape[:-2] + (-1,))
    flat_idx = np.broadcast_to(flat_idx, batch + flat_idx.shape[-1:])
    gathered = np.take_along_axis(xb, flat_idx, axis=-1).reshape(batch + taps.shape[-2:])
    opcount.count_mults(int(np.prod(batch + taps.shape[-2:])))
    return np.sum(gathered * weights, axis=-1)


@dataclass(frozen=True)
class ScalePlan:
    """Per-column keystone scale factors for one block of samples.

    Attributes
    ----------
    scale_factor_per_column : ndarray
        Dimensionless ratio for every column (``f_c / (f + f_c)`` for the
        range keystone).
    alignment_offset : float
        Global index of the block's first sample.
    input_length, output_length : int
    """

    scale_factor_per_column: np.ndarray
    alignment_offset: float
    input_length: int
    output_length: int

    def __post_init__(self):
        s = np.asarray(self.scale_factor_per_column, dtype=float)
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("scale factors must be finite and positive")
        if self.output_length != self.input_length:
            raise ValueError("keystone rescaling keeps the block length")

    @classmethod
    def keystone(cls, range_freqs, carrier_freq, alignment_offset, length):
        f = np.asarray(range_freqs, dtype=float)
        if np.any(np.abs(f) >= carrier_freq):
            raise ValueError("range frequencies must stay below the carrier")
        return cls(carrier_freq / (f + carrier_freq), float(alignment_offset),
                   int(length), int(length))


def sinc_rescale(column, plan: ScalePlan, column_index: int,
                 kernel_halfwidth: int = DEFAULT_HALFWIDTH,
                 beta: float = DEFAULT_KAISER_BETA) -> np.ndarray:
    """Keystone-rescale one column with a truncated, Kaiser-windowed sinc.

    Raises
    ------
    PlanMismatch
        If the column length differs from ``plan.input_length`` or the
        column index is outside the plan.
    """
    column = np.asarray(column)
    if kernel_halfwidth < 1:
        raise ValueError("kernel_halfwidth must be >= 1")
    if column.shape[-1] != plan.input_length:
        raise PlanMismatch(f"column length {column.shape[-1]} != plan length {plan.input_length}")
    scales = np.atleast_1d(plan.scale_factor_per_column)
    if not 0 <= column_index < scales.size:
        raise PlanMismatch(f"column {column_index} outside plan of {scales.size} columns")
    pos = keystone_positions(plan.output_length, scales[column_index], plan.alignment_offset)
    return sinc_interpolate(column, pos, kernel_halfwidth, beta)


def chirpz_rescale_batch(x, scale, offset):
    """Chirp-z keystone rescaling along the last axis of a batch.

    ``scale`` and ``offset`` broadcast against ``x.shape[:-1]``.
    """
    x = np.asarray(x, dtype=complex)
    length = x.shape[-1]
    batch = x.shape[:-1]
    scale = np.broadcast_to(np.asarray(scale, dtype=float), batch)
    offset = np.broadcast_to(np.asarray(offset, dtype=float), batch)
    if np.any(np.abs(scale - 1.0) >= 0.5):
        raise ValueError("chirp-z rescaling expects |scale - 1| < 0.5")
    spec = np.fft.fftshift(fft(x, axis=-1), axes=-1)
    k0 = -(length // 2)
    k = k0 + np.arange(length)
    shift = (scale - 1.0) * offset
    spec = spec * np.exp(2j * np.pi * k * shift[..., None] / length)
    w = np.exp(2j * np.pi * scale / length)
    out = czt(spec, length, w, 1.0)
    m = np.arange(length)
    out *= np.exp(2j * np.pi * k0 * scale[..., None] * m / length) / length
    return out


def chirpz_rescale(column, scale: float, offset: float = 0.0) -> np.ndarray:
    """Keystone-rescale one column through the chirp-z transform.

    Equivalent to band-limited (periodic) interpolation of ``column`` at
    ``scale*(m'+offset) - offset``; requires ``|scale - 1| < 0.5``.
    """
    if abs(scale - 1.0) >= 0.5:
        raise ValueError("chirp-z rescaling expects |scale - 1| < 0.5")
    return chirpz_rescale_batch(np.asarray(column)[None, :], scale, offset)[0]
