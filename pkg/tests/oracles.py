"""Independent reference implementations used to pin expected test values.

Everything here is deliberately brute-force and shares no code with the
package implementation paths it checks.
"""

from __future__ import annotations

import numpy as np


def j0_integral(x: float, n: int = 200_001) -> float:
    """J0 via direct numerical integration: (1/pi) int_0^pi cos(x sin t) dt."""
    t = np.linspace(0.0, np.pi, n)
    return float(np.trapezoid(np.cos(x * np.sin(t)), t) / np.pi)


def mmse_sinrs_bruteforce(h: np.ndarray, w: np.ndarray, noise_power: float) -> np.ndarray:
    """Per-layer MMSE SINR by explicitly forming the filter and the three powers."""
    g = h @ w
    r_rx, rank = g.shape
    cov = g @ g.conj().T + noise_power * np.eye(r_rx)
    f = g.conj().T @ np.linalg.inv(cov)  # (rank, r_rx) MMSE filter rows
    out = np.empty(rank)
    for k in range(rank):
        row = f[k]
        signal = np.abs(row @ g[:, k]) ** 2
        interf = sum(np.abs(row @ g[:, l]) ** 2 for l in range(rank) if l != k)
        noise = noise_power * np.linalg.norm(row) ** 2
        out[k] = signal / (interf + noise)
    return out


def qam_constellation(order: int):
    """Gray-mapped square QAM symbols and bit labels, unit average energy."""
    if order == 2:
        levels = np.array([-1.0, 1.0]) / np.sqrt(2.0)
        labels = np.array([0, 1])
    elif order == 4:
        levels = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)
        labels = np.array([0b00, 0b01, 0b11, 0b10])
    elif order == 6:
        levels = np.array([-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0]) / np.sqrt(42.0)
        labels = np.array([0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100])
    else:
        raise ValueError(order)
    sym = (levels[:, None] + 1j * levels[None, :]).reshape(-1)
    lab = (labels[:, None] << (order // 2) | labels[None, :]).reshape(-1)
    return sym, lab


def bicm_mi_monte_carlo(snr_linear: float, order: int, n: int = 1_000_000, seed: int = 20240811) -> float:
    """BICM mutual information by direct 2-D Monte-Carlo on the full constellation."""
    rng = np.random.default_rng(seed)
    sym, lab = qam_constellation(order)
    sigma2 = 1.0 / snr_linear
    idx = rng.integers(0, len(sym), size=n)
    noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(sigma2 / 2.0)
    y = sym[idx] + noise
    d = -np.abs(y[:, None] - sym[None, :]) ** 2 / sigma2
    dmax = d.max(axis=1, keepdims=True)
    e = np.exp(d - dmax)
    num = e.sum(axis=1)
    loss = 0.0
    for i in range(order):
        bit = (lab[idx] >> i) & 1
        den1 = e[:, ((lab >> i) & 1) == 1].sum(axis=1)
        den = np.where(bit == 1, den1, num - den1)
        loss += np.log2(num / den).mean()
    return order - loss


def miesm_inverse_dense(mean_mi: float, order: int, curve, n_grid: int = 2_000_001) -> float:
    """Dense-grid inversion of a forward MI curve (nearest point, then refined)."""
    g = np.linspace(0.0, curve.snr_linear[-1], n_grid)
    vals = curve(g)
    k = int(np.argmin(np.abs(vals - mean_mi)))
    step = g[1] - g[0]
    g2 = np.linspace(max(g[k] - 2 * step, 0.0), g[k] + 2 * step, n_grid)
    vals2 = curve(g2)
    k2 = int(np.argmin(np.abs(vals2 - mean_mi)))
    return float(g2[k2])


def spearman(x, y) -> float:
    """Spearman rank correlation (no ties expected in use)."""
    xr = np.argsort(np.argsort(x))
    yr = np.argsort(np.argsort(y))
    xc = xr - xr.mean()
    yc = yr - yr.mean()
    return float((xc * yc).sum() / np.sqrt((xc**2).sum() * (yc**2).sum()))
