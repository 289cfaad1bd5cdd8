"""Brute-force reference implementations used by the tests.

Each oracle trades speed for an obviously correct formula.
"""

import numpy as np


def direct_czt(x, m, w, a=1.0):
    """``X[k] = sum_n x[n] a^-n w^(n k)`` by direct summation."""
    x = np.asarray(x, dtype=complex)
    n = np.arange(x.size)
    k = np.arange(m)
    return (x * a ** (-n.astype(float))) @ (w ** np.outer(n, k).astype(float))


def periodic_interp(x, positions):
    """Band-limited (periodic) interpolation through the DFT.

    Uses the symmetric spectrum layout of ``fftshift`` so that a tone of
    integer frequency ``q`` with ``|q| < len(x)/2`` is reproduced exactly.
    """
    x = np.asarray(x, dtype=complex)
    n = x.size
    spec = np.fft.fftshift(np.fft.fft(x))
    k = np.arange(n) - n // 2
    return np.exp(2j * np.pi * np.outer(positions, k) / n) @ spec / n


def windowed_sinc_sum(x, positions, halfwidth, beta):
    """Direct ``sum_n x[n] sinc(u - n) w(u - n)`` with a Kaiser taper."""
    from scipy.special import i0
    x = np.asarray(x, dtype=complex)
    out = np.zeros(len(positions), dtype=complex)
    span = halfwidth + 1.0
    for i, u in enumerate(positions):
        for n in range(x.size):
            d = u - n
            if abs(d) <= halfwidth + 0.5 and abs(round(u) - n) <= halfwidth:
                win = i0(beta * np.sqrt(max(0.0, 1 - (d / span) ** 2))) / i0(beta)
                out[i] += x[n] * np.sinc(d) * win
    return out


def dechirp_plane(x, dt, freq, chirp, t_ref):
    """``|sum_t x(t) exp(-j 2 pi (f tau + g tau^2 / 2))|`` on a grid, ``tau = t - t_ref``."""
    x = np.asarray(x, dtype=complex)
    tau = np.arange(x.size) * dt - t_ref
    dechirped = x[None, :] * np.exp(-1j * np.pi * np.asarray(chirp)[:, None] * tau[None, :] ** 2)
    return np.abs(dechirped @ np.exp(-2j * np.pi * np.outer(tau, freq)))


def dechirp_argmax(x, dt, freq, chirp, t_ref):
    """``(chirp index, freq index)`` of the dechirp grid-search maximum."""
    plane = dechirp_plane(x, dt, freq, chirp, t_ref)
    j, k = np.unravel_index(np.argmax(plane), plane.shape)
    return int(j), int(k)


def subcell_peaks(data):
    """Envelope peak of every row with three-point parabolic refinement."""
    mag = np.abs(np.asarray(data))
    i = np.argmax(mag, axis=1)
    r = np.arange(i.size)
    lo = mag[r, np.clip(i - 1, 0, None)]
    c = mag[r, i]
    hi = mag[r, np.clip(i + 1, None, mag.shape[1] - 1)]
    den = lo - 2.0 * c + hi
    safe = np.where(den != 0, den, 1.0)
    return i + np.where(den != 0, 0.5 * (lo - hi) / safe, 0.0)


def lfm(t, a1, a2, amplitude=1.0):
    """``amplitude exp[j 2 pi (a1 t + a2 t^2 / 2)]``."""
    return amplitude * np.exp(2j * np.pi * (a1 * t + 0.5 * a2 * t * t))


def circular_drift(bins, n):
    """Peak-to-peak spread of bin indices relative to the first, wrapped mod ``n``."""
    b = np.asarray(bins)
    d = (b - b[0] + n // 2) % n - n // 2
    return int(np.ptp(d))


def radial(params, v, a, r=1e4, refl=1.0):
    """Target with radial velocity ``v`` and radial acceleration ``a``."""
    from sktdlvt import TargetTruth
    return TargetTruth.from_radial(r, v, a, params.platform_velocity, refl)
