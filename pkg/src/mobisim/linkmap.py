"""MIESM link-to-system mapping.

Per-layer SINRs are compressed into one AWGN-equivalent SINR through
bit-interleaved coded-modulation mutual-information curves, mapped to a
CQI/MCS, and converted to delivered transport bits through a parametric
block-error model.  The MI and CQI tables ship as plain-text data files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

MODULATION_ORDERS = (2, 4, 6)
_MI_FILES = {2: "mi_qpsk.txt", 4: "mi_16qam.txt", 6: "mi_64qam.txt"}
CQI_FILE = "cqi_mcs.txt"

BLER_SLOPE_PER_DB = 1.5
BLER_AT_THRESHOLD = 0.1
DATA_RES_PER_PRB = 120  # resource elements per PRB per TTI after control/pilot overhead


class MiCurve:
    """Sampled monotone map from SNR to BICM mutual information (bits/symbol).

    Evaluation interpolates linearly between the sampled knots (linear SNR
    domain, with an exact (0, 0) anchor); inversion solves the same
    piecewise-linear curve, so inverse(mi(x)) == x up to float rounding on
    the strictly increasing part.
    """

    def __init__(self, order: int, snr_db: np.ndarray, mi: np.ndarray):
        if np.any(mi < -1e-12) or np.any(mi > order + 1e-9):
            raise ValueError("mi values out of [0, order]")
        self.order = order
        self.snr_linear = np.concatenate(([0.0], 10.0 ** (np.asarray(snr_db, float) / 10.0)))
        self.mi = np.clip(np.concatenate(([0.0], np.asarray(mi, float))), 0.0, order)
        # strictly increasing prefix used for inversion (tail saturates at the order)
        d = np.diff(self.mi)
        nz = np.nonzero(d <= 0)[0]
        self._last = int(nz[0]) if nz.size else len(self.mi) - 1
        if self._last < 2:
            raise ValueError("mi table has no increasing region")

    def __call__(self, snr_linear):
        g = np.asarray(snr_linear, dtype=float)
        out = np.interp(g, self.snr_linear, self.mi)
        return out if out.ndim else float(out)

    def inverse(self, target):
        """Exact monotone inversion of the sampled curve (clamped at saturation)."""
        y = np.asarray(target, dtype=float)
        k = self._last
        yk, gk = self.mi[: k + 1], self.snr_linear[: k + 1]
        idx = np.clip(np.searchsorted(yk, y, side="left"), 1, k)
        y0, y1 = yk[idx - 1], yk[idx]
        g0, g1 = gk[idx - 1], gk[idx]
        g = g0 + (np.clip(y, 0.0, yk[-1]) - y0) * (g1 - g0) / (y1 - y0)
        g = np.where(y >= yk[-1], gk[-1], np.maximum(g, 0.0))
        return g if g.ndim else float(g)


@lru_cache(maxsize=None)
def mi_curves() -> dict[int, MiCurve]:
    out = {}
    for order, fname in _MI_FILES.items():
        text = resources.files("mobisim").joinpath(f"data/{fname}").read_text()
        rows = np.array(
            [[float(v) for v in line.split()] for line in text.splitlines() if line and not line.startswith("#")]
        )
        out[order] = MiCurve(order, rows[:, 0], rows[:, 1])
    return out


def bicm_mi(snr_linear, order: int):
    """BICM mutual information in bits/symbol for the given modulation order."""
    if np.any(np.asarray(snr_linear) < 0):
        raise ValueError("snr must be >= 0")
    return mi_curves()[order](snr_linear)


def effective_sinr(sinrs, order: int, beta: float = 1.0):
    """MIESM compression: beta * I^-1( mean I(gamma_i / beta) ).

    Accepts an array whose last axis holds the SINRs being pooled and
    reduces over it; a plain sequence yields a scalar.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    g = np.asarray(sinrs, dtype=float)
    if g.size == 0:
        raise ValueError("sinrs must be non-empty")
    curve = mi_curves()[order]
    pooled = curve(g / beta).mean(axis=-1)
    out = beta * curve.inverse(pooled)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class McsEntry:
    cqi: int
    order: int
    code_rate: float
    efficiency: float
    threshold_db: float
    beta: float = 1.0


class McsTable:
    """CQI 1..15 MCS table (QPSK/16-QAM/64-QAM) with 10%-BLER SINR thresholds."""

    def __init__(self, entries: list[McsEntry]):
        if not entries:
            raise ValueError("empty MCS table")
        thr = [e.threshold_db for e in entries]
        if any(b <= a for a, b in zip(thr, thr[1:])):
            raise ValueError("thresholds must strictly increase with CQI")
        self.entries = tuple(entries)
        self._thr_db = np.array(thr)
        self._orders = sorted({e.order for e in entries})
        self._by_order = {
            o: [e for e in entries if e.order == o] for o in self._orders
        }

    @property
    def max_cqi(self) -> int:
        return self.entries[-1].cqi

    def entry(self, cqi: int) -> McsEntry:
        if not 1 <= cqi <= self.max_cqi:
            raise ValueError(f"cqi {cqi} out of range 1..{self.max_cqi}")
        return self.entries[cqi - 1]

    def cqi_from_sinr(self, gamma_eff):
        """Highest CQI whose 10%-BLER threshold is <= gamma_eff (in dB); 0 if none."""
        g = np.asarray(gamma_eff, dtype=float)
        if np.any(g < 0):
            raise ValueError("gamma_eff must be >= 0")
        with np.errstate(divide="ignore"):
            g_db = 10.0 * np.log10(g)
        idx = np.searchsorted(self._thr_db, g_db, side="right")
        return idx if np.ndim(idx) else int(idx)

    def select_mcs(self, layer_sinrs, beta: float = 1.0):
        """Best CQI for a set of layer SINRs, pooling with each order's own curve.

        For every modulation order the layer SINRs are MIESM-pooled with
        that order's MI curve and the highest qualifying entry of that
        order is found; the most efficient candidate wins (0 = none).
        """
        g = np.asarray(layer_sinrs, dtype=float)
        lead = g.shape[:-1]
        best_eff = np.zeros(lead)
        best_cqi = np.zeros(lead, dtype=np.intp)
        for order in self._orders:
            ents = self._by_order[order]
            thr = np.array([e.threshold_db for e in ents])
            effs = np.array([e.efficiency for e in ents])
            cqis = np.array([e.cqi for e in ents], dtype=np.intp)
            geff = effective_sinr(g, order, beta)
            with np.errstate(divide="ignore"):
                geff_db = 10.0 * np.log10(np.asarray(geff, dtype=float))
            pos = np.searchsorted(thr, geff_db, side="right") - 1
            ok = pos >= 0
            eff = np.where(ok, effs[np.clip(pos, 0, len(ents) - 1)], 0.0)
            better = eff > best_eff
            best_eff = np.where(better, eff, best_eff)
            best_cqi = np.where(better, cqis[np.clip(pos, 0, len(ents) - 1)], best_cqi)
        return best_cqi if lead else int(best_cqi)


@lru_cache(maxsize=None)
def mcs_table(restrict_modulation: str = "none") -> McsTable:
    """Load the CQI table; restrict_modulation='16qam' drops 64-QAM entries."""
    text = resources.files("mobisim").joinpath(f"data/{CQI_FILE}").read_text()
    entries = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        cqi, order, rate, eff, thr = line.split()
        entries.append(
            McsEntry(cqi=int(cqi), order=int(order), code_rate=float(rate), efficiency=float(eff), threshold_db=float(thr))
        )
    if restrict_modulation == "16qam":
        entries = [e for e in entries if e.order <= 4]
    elif restrict_modulation != "none":
        raise ValueError(f"unknown restrict_modulation value {restrict_modulation!r}")
    return McsTable(entries)


def bler(gamma_eff, mcs: McsEntry):
    """Block error probability: logistic in the dB domain.

    Centred so that BLER equals 0.1 exactly at the entry's SINR threshold,
    with slope 1.5/dB; tends to 1 at zero SINR and 0 at high SINR.
    """
    g = np.asarray(gamma_eff, dtype=float)
    if np.any(g < 0):
        raise ValueError("gamma_eff must be >= 0")
    centre = mcs.threshold_db - math.log(1.0 / BLER_AT_THRESHOLD - 1.0) / BLER_SLOPE_PER_DB
    with np.errstate(divide="ignore"):
        z = BLER_SLOPE_PER_DB * (10.0 * np.log10(g) - centre)
    return _sigmoid_neg(z)


def _sigmoid_neg(z):
    """Numerically stable 1 / (1 + exp(z)) for any z including infinities."""
    zp = np.exp(-np.maximum(z, 0.0))
    zn = np.exp(np.minimum(z, 0.0))
    out = np.where(z > 0, zp / (1.0 + zp), 1.0 / (1.0 + zn))
    return out if out.ndim else float(out)


def transport_bits(mcs: McsEntry, prb_count: int, layers: int) -> int:
    """Bits carried by one allocation: efficiency x data REs x PRBs x layers, floored."""
    if prb_count < 1:
        raise ValueError("prb_count must be >= 1")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    return int(math.floor(mcs.efficiency * DATA_RES_PER_PRB * prb_count * layers))
