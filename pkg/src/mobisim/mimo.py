"""Closed-loop spatial multiplexing: precoder codebooks, MMSE layer SINRs,
rank/PMI selection by exhaustive sum-rate scoring."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SUPPORTED_TX = (2, 4)

# 4-antenna codebook: Householder generator vectors u_n and, per rank, the
# column subset of W_n = I - 2 u u^H / (u^H u) that forms the precoder.
_S2 = 1.0 / np.sqrt(2.0)
_U4 = np.array(
    [
        [1, -1, -1, -1],
        [1, -1j, 1, 1j],
        [1, 1, -1, 1],
        [1, 1j, 1, -1j],
        [1, (-1 - 1j) * _S2, -1j, (1 - 1j) * _S2],
        [1, (1 - 1j) * _S2, 1j, (-1 - 1j) * _S2],
        [1, (1 + 1j) * _S2, -1j, (-1 + 1j) * _S2],
        [1, (-1 + 1j) * _S2, 1j, (1 + 1j) * _S2],
        [1, -1, 1, 1],
        [1, -1j, -1, -1j],
        [1, 1, 1, -1],
        [1, 1j, -1, 1j],
        [1, -1, -1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, 1, 1, 1],
    ],
    dtype=complex,
)
_COLS4 = {
    1: [(0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,), (0,)],
    2: [
        (0, 3), (0, 1), (0, 2), (0, 1), (0, 3), (0, 3), (0, 2), (0, 2),
        (0, 1), (0, 3), (0, 2), (0, 2), (0, 1), (0, 2), (0, 2), (0, 1),
    ],
    3: [
        (0, 1, 3), (0, 1, 2), (0, 1, 2), (0, 1, 2), (0, 1, 3), (0, 1, 3), (0, 2, 3), (0, 2, 3),
        (0, 1, 3), (0, 2, 3), (0, 1, 2), (0, 2, 3), (0, 1, 2), (0, 1, 2), (0, 1, 2), (0, 1, 2),
    ],
    4: [(0, 1, 2, 3)] * 16,
}


@dataclass(frozen=True)
class Precoder:
    """T x rank precoding matrix; columns have norm 1/sqrt(T) so w^H w = I/T."""

    w: np.ndarray
    codebook_index: int
    rank: int


def _codebook_2tx(rank: int) -> list[np.ndarray]:
    if rank == 1:
        vs = [[1, 1], [1, -1], [1, 1j], [1, -1j]]
        return [0.5 * np.array(v, dtype=complex).reshape(2, 1) for v in vs]
    return [
        _S2 * np.eye(2, dtype=complex),
        0.5 * np.array([[1, 1], [1, -1]], dtype=complex),
        0.5 * np.array([[1, 1], [1j, -1j]], dtype=complex),
    ]


def _codebook_4tx(rank: int) -> list[np.ndarray]:
    out = []
    for n in range(16):
        u = _U4[n].reshape(4, 1)
        w_full = np.eye(4, dtype=complex) - 2.0 * (u @ u.conj().T) / (u.conj().T @ u).real
        out.append(0.5 * w_full[:, list(_COLS4[rank][n])])
    return out


@lru_cache(maxsize=None)
def _codebook_arrays(t_tx: int, rank: int) -> tuple[np.ndarray, ...]:
    if t_tx not in SUPPORTED_TX:
        raise ValueError(f"unsupported transmit antenna count {t_tx}")
    if not 1 <= rank <= t_tx:
        raise ValueError(f"rank {rank} invalid for {t_tx} transmit antennas")
    mats = _codebook_2tx(rank) if t_tx == 2 else _codebook_4tx(rank)
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


def codebook(t_tx: int, rank: int) -> list[Precoder]:
    """Standardised downlink codebook for 2 or 4 transmit antennas."""
    return [Precoder(w=m, codebook_index=i, rank=rank) for i, m in enumerate(_codebook_arrays(t_tx, rank))]


# ---------------------------------------------------------------------------
# Diagonal of the inverse of small Hermitian positive-definite matrices,
# on packed upper-triangle entries (row-major: (0,0),(0,1),..,(1,1),..).
# Vectorised over leading axes; ranks 1..4 via cofactor/Schur closed forms.
# ---------------------------------------------------------------------------

def _diag_inv_packed(e: np.ndarray, rank: int) -> np.ndarray:
    if rank == 1:
        return 1.0 / e[..., 0].real[..., None]
    if rank == 2:
        a, b, d = e[..., 0].real, e[..., 1], e[..., 2].real
        det = a * d - np.abs(b) ** 2
        return np.stack([d / det, a / det], axis=-1)
    if rank == 3:
        a, b, c = e[..., 0].real, e[..., 1], e[..., 2]
        d, f = e[..., 3].real, e[..., 4]
        g = e[..., 5].real
        det = (
            a * d * g
            + 2.0 * (b * f * c.conj()).real
            - a * np.abs(f) ** 2
            - d * np.abs(c) ** 2
            - g * np.abs(b) ** 2
        )
        return np.stack(
            [(d * g - np.abs(f) ** 2) / det, (a * g - np.abs(c) ** 2) / det, (a * d - np.abs(b) ** 2) / det],
            axis=-1,
        )
    if rank == 4:
        a11, a12 = e[..., 0].real, e[..., 1]
        b11, b12 = e[..., 2], e[..., 3]
        a22 = e[..., 4].real
        b21, b22 = e[..., 5], e[..., 6]
        d11, d12 = e[..., 7].real, e[..., 8]
        d22 = e[..., 9].real
        det_d = d11 * d22 - np.abs(d12) ** 2
        x11 = b11 * d22 - b12 * d12.conj()
        x12 = -b11 * d12 + b12 * d11
        x21 = b21 * d22 - b22 * d12.conj()
        x22 = -b21 * d12 + b22 * d11
        s11 = a11 - (x11 * b11.conj() + x12 * b12.conj()).real / det_d
        s12 = a12 - (x11 * b21.conj() + x12 * b22.conj()) / det_d
        s22 = a22 - (x21 * b21.conj() + x22 * b22.conj()).real / det_d
        det_s = s11 * s22 - np.abs(s12) ** 2
        det_a = a11 * a22 - np.abs(a12) ** 2
        y11 = b11.conj() * a22 - b21.conj() * a12.conj()
        y12 = -b11.conj() * a12 + b21.conj() * a11
        y21 = b12.conj() * a22 - b22.conj() * a12.conj()
        y22 = -b12.conj() * a12 + b22.conj() * a11
        t11 = d11 - (y11 * b11 + y12 * b21).real / det_a
        t12 = d12 - (y11 * b12 + y12 * b22) / det_a
        t22 = d22 - (y21 * b12 + y22 * b22).real / det_a
        det_t = t11 * t22 - np.abs(t12) ** 2
        return np.stack([s22 / det_s, s11 / det_s, t22 / det_t, t11 / det_t], axis=-1)
    raise ValueError(f"rank {rank} not supported")


def _pack_hermitian(m: np.ndarray) -> np.ndarray:
    r = m.shape[-1]
    cols = [m[..., i, j] for i in range(r) for j in range(i, r)]
    return np.stack(cols, axis=-1)


def mmse_layer_sinrs(h: np.ndarray, w, noise_power: float) -> np.ndarray:
    """Post-combining SINR of each layer at a linear MMSE receiver.

    gamma_k = 1 / [(I + G^H G / sigma^2)^-1]_kk - 1 with G = h w; an
    all-zero effective channel yields all-zero SINRs.
    """
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    wm = w.w if isinstance(w, Precoder) else np.asarray(w)
    g = np.asarray(h) @ wm
    rank = g.shape[-1]
    f = np.eye(rank) + (g.conj().swapaxes(-1, -2) @ g) / noise_power
    d = _diag_inv_packed(_pack_hermitian(f), rank)
    return np.maximum(1.0 / d - 1.0, 0.0)


def sum_rate_score(layer_sinrs: np.ndarray) -> float:
    """Sum-rate metric: sum of log2(1 + gamma) over layers (unit bandwidth)."""
    return float(np.sum(np.log2(1.0 + np.asarray(layer_sinrs))))


class CodebookScan:
    """Precomputed quadratic-form machinery for exhaustive codebook scoring.

    For each candidate precoder the Gram entries (G^H G)_lm are linear in
    the channel Gram matrix A = h^H h, so a single GEMM against a
    precomputed coefficient matrix evaluates every candidate for a whole
    batch of links at once.
    """

    def __init__(self, t_tx: int, max_rank: int):
        if t_tx not in SUPPORTED_TX:
            raise ValueError(f"unsupported transmit antenna count {t_tx}")
        self.t_tx = t_tx
        self.max_rank = max_rank
        self.ranks = list(range(1, max_rank + 1))
        self.precoders = {r: np.stack([p.w for p in codebook(t_tx, r)]) for r in self.ranks}
        cols = []
        self.slices: dict[int, slice] = {}
        self.n_cand: dict[int, int] = {}
        start = 0
        for r in self.ranks:
            ws = self.precoders[r]
            n_pairs = r * (r + 1) // 2
            for k in range(ws.shape[0]):
                for i in range(r):
                    for j in range(i, r):
                        cols.append(np.outer(ws[k, :, i].conj(), ws[k, :, j]).reshape(-1))
            self.n_cand[r] = ws.shape[0]
            end = start + ws.shape[0] * n_pairs
            self.slices[r] = slice(start, end)
            start = end
        self.q = np.stack(cols, axis=1).astype(np.complex128)
        self._q_cache: dict = {np.dtype(np.complex128): self.q}

    def candidate_sinrs(self, gram: np.ndarray, inv_noise: np.ndarray) -> dict[int, np.ndarray]:
        """Per-layer SINRs for every candidate.

        gram: (..., T, T) channel Gram matrices h^H h; inv_noise: (...,)
        reciprocal noise power. Returns {rank: (..., n_candidates, rank)};
        computation runs in the gram's dtype.
        """
        lead = gram.shape[:-2]
        a_flat = gram.reshape(*lead, self.t_tx * self.t_tx)
        q = self._q_cache.get(a_flat.dtype)
        if q is None:
            q = self._q_cache.setdefault(a_flat.dtype, self.q.astype(a_flat.dtype))
        e_all = a_flat @ q
        out = {}
        for r in self.ranks:
            n_pairs = r * (r + 1) // 2
            e = e_all[..., self.slices[r]].reshape(*lead, self.n_cand[r], n_pairs)
            e = e * inv_noise[..., None, None]
            diag_idx = [i * r - i * (i - 1) // 2 for i in range(r)]
            e[..., diag_idx] += 1.0
            d = _diag_inv_packed(e, r)
            out[r] = np.maximum(1.0 / d - 1.0, 0.0)
        return out


@lru_cache(maxsize=None)
def _scan_for(t_tx: int, max_rank: int) -> CodebookScan:
    return CodebookScan(t_tx, max_rank)


def select_rank_pmi(h_subbands: np.ndarray, noise_power, max_rank_cap: int):
    """Exhaustive wideband rank/PMI selection.

    Scores every (rank, codebook index) by the sum over subbands and
    layers of log2(1 + gamma) and returns (rank, index, per-subband layer
    SINRs of the winner).  Ties resolve to the lower rank, then the lower
    index.
    """
    h = np.asarray(h_subbands)
    if not np.iscomplexobj(h):
        h = h.astype(complex)
    if h.ndim == 2:
        h = h[None]
    n_sb, r_rx, t_tx = h.shape
    if max_rank_cap > min(t_tx, r_rx):
        raise ValueError(f"max_rank_cap {max_rank_cap} exceeds min(T, R) = {min(t_tx, r_rx)}")
    noise = np.broadcast_to(np.asarray(noise_power, dtype=float), (n_sb,))
    if np.any(noise <= 0):
        raise ValueError("noise_power must be positive")

    scan = _scan_for(t_tx, max_rank_cap)
    gram = h.conj().swapaxes(-1, -2) @ h
    sinrs = scan.candidate_sinrs(gram, 1.0 / noise)

    best = None
    for rank in scan.ranks:
        s = sinrs[rank]  # (n_sb, K, rank)
        scores = np.log2(1.0 + s).sum(axis=(0, 2))  # (K,)
        for k in range(scan.n_cand[rank]):
            if best is None or scores[k] > best[0]:
                best = (float(scores[k]), rank, k, s[:, k, :])
    _, rank, index, layer_sinrs = best
    return rank, index, layer_sinrs
