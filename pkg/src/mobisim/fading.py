"""Velocity-driven small-scale fading.

Spatially i.i.d. Rayleigh block fading per subband with first-order
Gauss-Markov time evolution; the lag-1 coefficient matches the Jakes
autocorrelation J0(2 pi f_d tau) so the channel decorrelates at the rate
set by the UE's Doppler frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

SUPPORTED_TX = (2, 4)
SUPPORTED_RX = (2, 3, 4)

_SERIES_CUTOFF = 12.0  # power series below, Hankel expansion above


def bessel_j0(x):
    """J0 via power series for |x| < 12 and the Hankel expansion beyond.

    Absolute error stays below 1e-10 everywhere (the expansion is
    truncated at its smallest term; pushing the series boundary to 12
    keeps the crossover region accurate).
    """
    x = np.abs(np.asarray(x, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)

    small = x < _SERIES_CUTOFF
    if small.any():
        xs = x[small]
        term = np.ones_like(xs)
        acc = np.ones_like(xs)
        q = -(xs * xs) / 4.0
        for k in range(1, 80):
            term = term * q / (k * k)
            acc += term
            if np.max(np.abs(term)) < 1e-18:
                break
        out[small] = acc

    if (~small).any():
        xl = x[~small]
        p = np.ones_like(xl)
        q = np.zeros_like(xl)
        a = np.ones_like(xl)
        prev = np.full_like(xl, np.inf)
        for k in range(1, 40):
            a = a * (-((2 * k - 1) ** 2)) / (8.0 * k * xl)
            mag = np.abs(a)
            # asymptotic series: stop once terms stop shrinking
            live = mag < prev
            if not live.any():
                break
            contrib = np.where(live, a, 0.0)
            if k % 2 == 0:
                p += contrib * (-1) ** (k // 2)
            else:
                q += contrib * (-1) ** ((k - 1) // 2)
            prev = np.where(live, mag, prev)
        w = xl - np.pi / 4.0
        out[~small] = np.sqrt(2.0 / (np.pi * xl)) * (p * np.cos(w) - q * np.sin(w))

    return float(out[0]) if scalar else out


def doppler_hz(speed_kmph, carrier_hz):
    """Maximum Doppler shift f_d = v * f_c / c for speed in km/h."""
    speed = np.asarray(speed_kmph, dtype=float)
    if np.any(speed < 0):
        raise ValueError("speed must be >= 0")
    fd = (speed / 3.6) * float(carrier_hz) / SPEED_OF_LIGHT
    return fd if fd.ndim else float(fd)


def lag1_correlation(doppler: float, tti_s: float) -> float:
    """AR(1) coefficient: Jakes autocorrelation at one TTI lag, clamped to [0, 1]."""
    return float(np.clip(bessel_j0(2.0 * np.pi * doppler * tti_s), 0.0, 1.0))


@dataclass
class ChannelRealization:
    """Per-link channel state: one R x T matrix per subband."""

    h: np.ndarray  # (subbands, r_rx, t_tx) complex
    doppler: float
    lag1: float

    @property
    def subband_count(self) -> int:
        return self.h.shape[0]


def _validate_dims(t_tx: int, r_rx: int, subbands: int) -> None:
    if t_tx not in SUPPORTED_TX:
        raise ValueError(f"unsupported transmit antenna count {t_tx} (supported: {SUPPORTED_TX})")
    if r_rx not in SUPPORTED_RX:
        raise ValueError(f"unsupported receive antenna count {r_rx} (supported: {SUPPORTED_RX})")
    if subbands < 1:
        raise ValueError("subbands must be >= 1")


def rayleigh_block(rng: np.random.Generator, shape, dtype=np.complex128) -> np.ndarray:
    """i.i.d. unit-power complex Gaussian entries of the given shape."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return ((re + 1j * im) / np.sqrt(2.0)).astype(dtype, copy=False)


def draw_initial(
    t_tx: int,
    r_rx: int,
    subbands: int,
    rng: np.random.Generator,
    doppler: float = 0.0,
    tti_s: float = 1e-3,
) -> ChannelRealization:
    """Fresh Rayleigh realization, independent across subbands and entries."""
    _validate_dims(t_tx, r_rx, subbands)
    h = rayleigh_block(rng, (subbands, r_rx, t_tx))
    return ChannelRealization(h=h, doppler=doppler, lag1=lag1_correlation(doppler, tti_s))


def evolve(channel: ChannelRealization, rng: np.random.Generator) -> ChannelRealization:
    """One Gauss-Markov step: h' = rho h + sqrt(1 - rho^2) w, unit power preserved."""
    rho = channel.lag1
    if rho >= 1.0:
        return ChannelRealization(h=channel.h.copy(), doppler=channel.doppler, lag1=rho)
    w = rayleigh_block(rng, channel.h.shape)
    h = rho * channel.h + np.sqrt(1.0 - rho * rho) * w
    return ChannelRealization(h=h, doppler=channel.doppler, lag1=rho)


def evolve_array(h: np.ndarray, rho: float, innovation: np.ndarray) -> np.ndarray:
    """Array form of the Gauss-Markov step used by the engine hot loop."""
    if rho >= 1.0:
        return h
    return rho * h + np.sqrt(1.0 - rho * rho) * innovation
