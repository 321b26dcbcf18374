#!/usr/bin/env python3
"""Regenerate the MI and CQI/MCS data files under src/mobisim/data/.

BICM mutual information is computed by Gauss-Hermite quadrature on the
per-dimension Gray-mapped PAM factorisation of square QAM (exact for the
shipped constellations); CQI thresholds invert each order's MI curve at
the entry's spectral efficiency.
"""

from __future__ import annotations

import pathlib

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "mobisim" / "data"
SNR_DB = np.arange(-30.0, 40.0 + 1e-9, 0.25)
N_NODES = 128

# (cqi, order, code-rate numerator / 1024) for the 15-entry CQI table
CQI_ROWS = [
    (1, 2, 78), (2, 2, 120), (3, 2, 193), (4, 2, 308), (5, 2, 449), (6, 2, 602),
    (7, 4, 378), (8, 4, 490), (9, 4, 616),
    (10, 6, 466), (11, 6, 567), (12, 6, 666), (13, 6, 772), (14, 6, 873), (15, 6, 948),
]

FILES = {2: "mi_qpsk.txt", 4: "mi_16qam.txt", 6: "mi_64qam.txt"}
NAMES = {2: "QPSK", 4: "16-QAM", 6: "64-QAM"}


def pam_levels(order: int):
    """Per-dimension Gray-mapped PAM levels for unit total symbol energy."""
    if order == 2:
        return np.array([-1.0, 1.0]) / np.sqrt(2.0), np.array([0, 1])
    if order == 4:
        return np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0), np.array([0b00, 0b01, 0b11, 0b10])
    if order == 6:
        return (
            np.array([-7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0]) / np.sqrt(42.0),
            np.array([0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100]),
        )
    raise ValueError(order)


def bicm_mi_quadrature(snr_linear: float, order: int) -> float:
    levels, labels = pam_levels(order)
    bits_per_dim = order // 2
    sigma2 = 0.5 / snr_linear  # per-dimension noise variance
    nodes, weights = hermegauss(N_NODES)
    weights = weights / np.sqrt(2.0 * np.pi)
    loss = 0.0
    for xi, x in enumerate(levels):
        y = x + np.sqrt(sigma2) * nodes
        d = -((y[:, None] - levels[None, :]) ** 2) / (2.0 * sigma2)
        dmax = d.max(axis=1, keepdims=True)
        num = np.exp(d - dmax).sum(axis=1)
        for i in range(bits_per_dim):
            b = (labels[xi] >> i) & 1
            mask = ((labels >> i) & 1) == b
            den = np.exp(d[:, mask] - dmax).sum(axis=1)
            loss += (weights * np.log2(num / den)).sum()
    return 2.0 * (bits_per_dim - loss / len(levels))


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    curves = {}
    for order, fname in FILES.items():
        mi = np.array([bicm_mi_quadrature(10.0 ** (s / 10.0), order) for s in SNR_DB])
        mi = np.clip(mi, 0.0, order)
        mi[mi > order - 1e-9] = order
        curves[order] = mi
        lines = [
            f"# BICM mutual information, {NAMES[order]} (order {order}), v1",
            "# columns: snr_db mi_bits",
        ]
        lines += [f"{s:.2f} {v:.8f}" for s, v in zip(SNR_DB, mi)]
        (DATA_DIR / fname).write_text("\n".join(lines) + "\n")
        print(f"wrote {fname} ({len(SNR_DB)} rows)")

    # thresholds: SNR at which the order's MI curve reaches the entry efficiency
    thr_db = []
    for cqi, order, rate1024 in CQI_ROWS:
        eff = order * rate1024 / 1024.0
        mi = curves[order]
        snr_lin = np.concatenate(([0.0], 10.0 ** (SNR_DB / 10.0)))
        vals = np.concatenate(([0.0], mi))
        idx = int(np.searchsorted(vals, eff, side="left"))
        g = snr_lin[idx - 1] + (eff - vals[idx - 1]) * (snr_lin[idx] - snr_lin[idx - 1]) / (vals[idx] - vals[idx - 1])
        thr_db.append(10.0 * np.log10(g))
    assert all(b > a for a, b in zip(thr_db, thr_db[1:])), "thresholds must be strictly increasing"

    lines = [
        "# CQI/MCS table: 15 entries, QPSK/16-QAM/64-QAM, v1",
        "# thresholds: SINR (dB) at 10% BLER, from MI-curve inversion at the entry efficiency",
        "# columns: cqi order code_rate efficiency threshold_db",
    ]
    for (cqi, order, rate1024), thr in zip(CQI_ROWS, thr_db):
        rate = rate1024 / 1024.0
        eff = order * rate
        lines.append(f"{cqi} {order} {rate:.10f} {eff:.10f} {thr:.4f}")
    (DATA_DIR / "cqi_mcs.txt").write_text("\n".join(lines) + "\n")
    print("wrote cqi_mcs.txt")
    for (cqi, order, _), thr in zip(CQI_ROWS, thr_db):
        print(f"  cqi {cqi:2d} order {order} thr {thr:7.3f} dB")


if __name__ == "__main__":
    main()
