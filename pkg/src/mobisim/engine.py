"""Per-TTI simulation loop and sweep orchestration.

Each TTI: channels evolve (Doppler-rate AR(1)), every UE builds a feedback
report from its current channel, sectors schedule on the delayed report,
transmission outcomes are drawn from the block-error model at the true
current effective SINR (stale feedback is thereby penalised), PF averages
update, UEs move, attachment is re-evaluated.

Determinism: every random stream is keyed by (seed, purpose, entity) via
counter-based bit generators, so results are byte-identical for any worker
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import fading, geometry, linkmap, mobility, propagation, scheduler as sched_mod
from .config import SimConfig
from .kpi import KpiReport
from .mimo import CodebookScan, _diag_inv_packed, _pack_hermitian

# stream purpose tags
_TAG_DROP, _TAG_SHADOW, _TAG_CHAN, _TAG_MOBILITY, _TAG_OUTCOME, _TAG_INTERFERER = range(6)

_LN9 = math.log(9.0)


def _stream(seed: int, tag: int, *ids: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag) + ids)))


@dataclass
class RunTrace:
    """Optional per-TTI bookkeeping used by invariants tests."""

    delivered_per_tti: list = field(default_factory=list)
    scheduled_outcomes: list = field(default_factory=list)  # per TTI: (bits, success) arrays
    consumed_created_at: list = field(default_factory=list)
    queue_len: list = field(default_factory=list)
    scheduled_bits_per_ue_tti: list = field(default_factory=list)


def true_interference_per_rx_mw(h, kappa_sb_mw, precoders, interferer_mask):
    """Instantaneous interference per receive antenna (linear mW).

    h: (..., C, R, T) channels to every sector; kappa_sb_mw: (..., C)
    received power scale; precoders: (C, T) unit-norm transmit directions;
    interferer_mask: (..., C) True where the sector belongs to another site.
    """
    x = np.einsum("...crt,ct->...cr", h, precoders)
    p_rx = np.abs(x) ** 2
    per_ant = p_rx.sum(axis=-1) / h.shape[-2]
    return (per_ant * kappa_sb_mw * interferer_mask).sum(axis=-1)


def expected_interference_per_rx_mw(fro2, kappa_sb_mw, interferer_mask, t_tx: int, r_rx: int):
    """Interference averaged over isotropic precoder directions: |H|_F^2/(T R).

    All inputs carry the sector axis last and it is summed away.
    """
    return (fro2 / (t_tx * r_rx) * kappa_sb_mw * interferer_mask).sum(axis=-1)


class _Run:
    """State of one (mode, scheduler, speed, seed) simulation."""

    def __init__(self, cfg: SimConfig, tx: int, rx: int, policy: str, speed: float, seed: int):
        self.cfg = cfg
        self.tx, self.rx, self.policy, self.speed, self.seed = tx, rx, policy, speed, seed
        self.layout = geometry.build_layout(
            cfg.inter_site_distance_m,
            cfg.rings,
            azimuth_offset_deg=cfg.azimuth_offset_deg,
            bs_height_m=cfg.bs_height_m,
            downtilt_deg=cfg.downtilt_deg,
            boresight_gain_dbi=cfg.antenna_gain_dbi,
        )
        self.pattern = geometry.AntennaPattern(
            boresight_gain_dbi=cfg.antenna_gain_dbi, downtilt_deg=cfg.downtilt_deg
        )
        lay = self.layout
        self.n_sec = lay.n_sectors
        self.n_sb = cfg.subbands
        self.prbs = np.array(cfg.subband_prbs())
        self.n_ue = cfg.ues_per_sector * self.n_sec

        self.ue_xy = geometry.drop_ues(lay, cfg.ues_per_sector, _stream(seed, _TAG_DROP))
        self.drop_site = lay.sector_site[np.arange(self.n_ue) // cfg.ues_per_sector]
        self.shadow_db = propagation.shadowing_db(
            _stream(seed, _TAG_SHADOW), cfg.sigma_shadow_db, size=(self.n_ue, lay.n_sites)
        )
        if np.isscalar(self.shadow_db):
            self.shadow_db = np.zeros((self.n_ue, lay.n_sites))

        # per-subband transmit power and noise floor (mW / dBm)
        frac = self.prbs / cfg.prb_count
        self.p_frac = frac
        noise_dbm = np.array(
            [propagation.noise_power_dbm(180e3 * p, cfg.noise_figure_db) for p in self.prbs]
        )
        self.noise_sb_mw = 10.0 ** (noise_dbm / 10.0)

        # doppler / AR(1)
        fd = fading.doppler_hz(speed, cfg.carrier_hz)
        self.rho = fading.lag1_correlation(fd, cfg.tti_s)
        self.innov_scale = math.sqrt(max(1.0 - self.rho * self.rho, 0.0))

        # channels to every sector, complex64 for the hot loop
        self.chan_gens = [_stream(seed, _TAG_CHAN, u) for u in range(self.n_ue)]
        self.h = np.empty((self.n_ue, self.n_sec, self.n_sb, rx, tx), dtype=np.complex64)
        for u, g in enumerate(self.chan_gens):
            self.h[u] = self._draw_block(g)

        self.max_rank = min(tx, rx)
        self.scan = CodebookScan(tx, self.max_rank)
        self.w_by_rank = {r: self.scan.precoders[r].astype(np.complex64) for r in self.scan.ranks}

        # MCS tables and derived lookup arrays (index 0 = no transmission)
        self.mcs = linkmap.mcs_table(cfg.restrict_modulation)
        n_cqi = self.mcs.max_cqi
        self.thr_db = np.concatenate(([np.nan], [e.threshold_db for e in self.mcs.entries]))
        self.order_of = np.concatenate(([0], [e.order for e in self.mcs.entries])).astype(int)
        self.bits_table = np.zeros((n_cqi + 1, self.max_rank + 1, self.n_sb), dtype=np.int64)
        for e in self.mcs.entries:
            for r in range(1, self.max_rank + 1):
                for sb in range(self.n_sb):
                    self.bits_table[e.cqi, r, sb] = linkmap.transport_bits(e, int(self.prbs[sb]), r)

        # scheduler state: one per sector, PF averages shared (UE attribute)
        shared_avg: dict[int, float] = {}
        self.states = [
            sched_mod.SchedulerState(
                policy=policy,
                alpha=cfg.pf_alpha,
                beta=cfg.pf_beta,
                time_constant_ttis=cfg.pf_time_constant_ttis,
                eps_bps=cfg.pf_initial_throughput_bps,
                avg_throughput_bps=shared_avg,
            )
            for _ in range(self.n_sec)
        ]
        self.shared_avg = shared_avg

        # mobility: pre-drawn headings per UE, outcome/interferer streams
        self.region = mobility.HexRegion.around_layout(lay)
        self.headings = np.stack(
            [_stream(seed, _TAG_MOBILITY, u).uniform(0.0, 2.0 * np.pi, size=cfg.ttis) for u in range(self.n_ue)]
        )
        self.outcome_gen = _stream(seed, _TAG_OUTCOME)
        self.interferer_gen = _stream(seed, _TAG_INTERFERER)

        self.delivered_bits = np.zeros(self.n_ue, dtype=np.int64)
        self._update_coupling()
        init_report = self._feedback_report(created_at=-1)
        self.queue = [init_report] * cfg.feedback_delay_ttis

    # -- setup / per-TTI helpers ------------------------------------------------

    def _draw_block(self, gen) -> np.ndarray:
        raw = gen.standard_normal(size=(self.n_sec, self.n_sb, self.rx, self.tx, 2), dtype=np.float32)
        return (raw.view(np.complex64)[..., 0] / np.float32(np.sqrt(2.0))).copy()

    def _update_coupling(self) -> None:
        """Distances, pattern attenuation, budgets, serving sector, interferer mask."""
        cfg, lay = self.cfg, self.layout
        rel = self.ue_xy[:, None, :] - lay.site_xy[None, :, :]  # (U, S, 2)
        dist2d = np.hypot(rel[..., 0], rel[..., 1])
        pl = propagation.path_loss_db(
            dist2d / 1e3, cfg.bs_height_m, cfg.carrier_mhz, min_distance_km=cfg.min_distance_m / 1e3
        )
        theta = np.degrees(np.arctan2(cfg.bs_height_m - cfg.ue_height_m, np.maximum(dist2d, 1.0)))
        az = np.degrees(np.arctan2(rel[..., 1], rel[..., 0]))  # (U, S)
        sec_site = lay.sector_site
        phi = geometry.wrap_angle_deg(az[:, sec_site] - lay.sector_azimuth_deg[None, :])
        att = geometry.antenna_attenuation_db(self.pattern, phi, theta[:, sec_site])
        coupling_db = cfg.antenna_gain_dbi - att - pl[:, sec_site] - self.shadow_db[:, sec_site]
        rx_dbm = cfg.bs_tx_power_dbm + coupling_db
        self.kappa_mw = 10.0 ** (rx_dbm / 10.0)  # (U, C) full-band
        self.serving = propagation.attach_all(rx_dbm)
        serv_site = sec_site[self.serving]
        self.intf_mask = sec_site[None, :] != serv_site[:, None]  # (U, C)

    def _feedback_report(self, created_at: int) -> dict:
        """CQI/PMI/RI report from the current channels and expected interference."""
        u_idx = np.arange(self.n_ue)
        h_serv = self.h[u_idx, self.serving]  # (U, sb, R, T)
        gram = np.einsum("usrt,usrl->ustl", h_serv.conj(), h_serv)

        fro2 = (np.abs(self.h) ** 2).sum(axis=(-1, -2))  # (U, C, sb)
        kappa_sb = self.kappa_mw[:, :, None] * self.p_frac[None, None, :]  # (U, C, sb)
        i_exp = expected_interference_per_rx_mw(
            np.moveaxis(fro2, 1, -1), np.moveaxis(kappa_sb, 1, -1), self.intf_mask[:, None, :], self.tx, self.rx
        )  # (U, sb)
        sig = kappa_sb[u_idx, self.serving]  # (U, sb)
        ceff = (sig / (self.noise_sb_mw[None, :] + i_exp)).astype(np.float32)

        cand = self.scan.candidate_sinrs(gram, ceff)
        best_score = np.full(self.n_ue, -np.inf)
        sel_rank = np.ones(self.n_ue, dtype=np.int8)
        sel_idx = np.zeros(self.n_ue, dtype=np.int16)
        for r in self.scan.ranks:
            scores = np.log2(1.0 + cand[r]).sum(axis=(1, 3))  # (U, K)
            k_best = np.argmax(scores, axis=1)
            v = scores[np.arange(self.n_ue), k_best]
            better = v > best_score
            best_score[better] = v[better]
            sel_rank[better] = r
            sel_idx[better] = k_best[better]

        cqi = np.zeros((self.n_ue, self.n_sb), dtype=np.int16)
        for r in self.scan.ranks:
            rows = np.nonzero(sel_rank == r)[0]
            if rows.size == 0:
                continue
            g_sel = cand[r][rows, :, sel_idx[rows], :]  # (n, sb, r)
            cqi[rows] = self.mcs.select_mcs(g_sel)
        return {"cqi": cqi, "ri": sel_rank, "pmi": sel_idx, "created": created_at}

    # -- per-TTI stages ----------------------------------------------------------

    def _evolve(self) -> None:
        if self.rho >= 1.0:
            return
        s = np.float32(self.innov_scale)
        rho = np.float32(self.rho)
        for u, g in enumerate(self.chan_gens):
            self.h[u] *= rho
            self.h[u] += s * self._draw_block(g)

    def _schedule(self, report: dict) -> list:
        """Per-sector allocation from the delayed report: (sec, sb, ue, ri, pmi, cqi)."""
        rate = self.bits_table[report["cqi"], report["ri"][:, None], np.arange(self.n_sb)[None, :]] / self.cfg.tti_s
        allocs = []
        for sec in range(self.n_sec):
            ids = np.nonzero(self.serving == sec)[0]
            if ids.size == 0:
                continue
            state = self.states[sec]
            if self.policy == "rr":
                alloc = sched_mod.rr_schedule(state, ids, self.n_sb)
            else:
                alloc = sched_mod.pf_schedule(state, ids, rate[ids])
            for sb, entry in alloc.entries.items():
                ue = entry.ue
                c = int(report["cqi"][ue, sb])
                if c >= 1:
                    allocs.append((sec, sb, ue, int(report["ri"][ue]), int(report["pmi"][ue]), c))
        return allocs

    def _transmit(self, allocs: list, trace: RunTrace | None) -> np.ndarray:
        """Outcome of every allocation at the true current effective SINR."""
        delivered = np.zeros(self.n_ue, dtype=np.int64)
        # fixed-shape draws keep the stream layout independent of the schedule
        u01 = self.outcome_gen.random(size=(self.n_sec, self.n_sb))
        p_raw = self.interferer_gen.standard_normal(size=(self.n_sec, self.tx, 2))
        p = p_raw.view(np.float64).view(np.complex128)[..., 0]
        p = (p / np.linalg.norm(p, axis=1, keepdims=True)).astype(np.complex64)
        if not allocs:
            if trace is not None:
                trace.scheduled_outcomes.append((np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)))
                trace.delivered_per_tti.append(0)
                trace.scheduled_bits_per_ue_tti.append(np.zeros(self.n_ue, dtype=np.int64))
            return delivered

        a_sec = np.array([a[0] for a in allocs])
        a_sb = np.array([a[1] for a in allocs])
        a_ue = np.array([a[2] for a in allocs])
        a_ri = np.array([a[3] for a in allocs])
        a_pmi = np.array([a[4] for a in allocs])
        a_cqi = np.array([a[5] for a in allocs])

        kappa_sb = self.kappa_mw[a_ue] * self.p_frac[a_sb][:, None]  # (n, C)
        h_pairs = self.h[a_ue, :, a_sb]  # (n, C, R, T)
        i_true = true_interference_per_rx_mw(h_pairs, kappa_sb, p, self.intf_mask[a_ue])
        noise = self.noise_sb_mw[a_sb] + i_true
        sig = kappa_sb[np.arange(len(allocs)), a_sec]
        ceff = sig / noise

        gamma_eff = np.empty(len(allocs))
        h_serv = h_pairs[np.arange(len(allocs)), a_sec].astype(np.complex128)  # (n, R, T)
        for r in self.scan.ranks:
            rows = np.nonzero(a_ri == r)[0]
            if rows.size == 0:
                continue
            w = self.w_by_rank[r][a_pmi[rows]].astype(np.complex128)  # (n, T, r)
            g = h_serv[rows] @ w
            f = np.eye(r) + (g.conj().swapaxes(-1, -2) @ g) * ceff[rows, None, None]
            sinr = np.maximum(1.0 / _diag_inv_packed(_pack_hermitian(f), r) - 1.0, 0.0)
            for order in np.unique(self.order_of[a_cqi[rows]]):
                sub = rows[self.order_of[a_cqi[rows]] == order]
                gamma_eff[sub] = np.atleast_1d(
                    linkmap.effective_sinr(sinr[np.isin(rows, sub)], int(order))
                )

        centre = self.thr_db[a_cqi] - _LN9 / linkmap.BLER_SLOPE_PER_DB
        with np.errstate(divide="ignore"):
            z = linkmap.BLER_SLOPE_PER_DB * (10.0 * np.log10(gamma_eff) - centre)
        p_err = linkmap._sigmoid_neg(z)
        success = u01[a_sec, a_sb] >= p_err
        bits = self.bits_table[a_cqi, a_ri, a_sb]
        np.add.at(delivered, a_ue, bits * success)
        if trace is not None:
            trace.scheduled_outcomes.append((bits, success))
            trace.delivered_per_tti.append(int((bits * success).sum()))
            sched = np.zeros(self.n_ue, dtype=np.int64)
            np.add.at(sched, a_ue, bits)
            trace.scheduled_bits_per_ue_tti.append(sched)
        return delivered

    def run(self, trace: RunTrace | None = None) -> np.ndarray:
        cfg = self.cfg
        for t in range(cfg.ttis):
            self._evolve()
            self.queue.append(self._feedback_report(created_at=t))
            report = self.queue.pop(0)
            if trace is not None:
                trace.consumed_created_at.append(report["created"])
                trace.queue_len.append(len(self.queue))
            allocs = self._schedule(report)
            delivered = self._transmit(allocs, trace)
            self.delivered_bits += delivered
            for u in range(self.n_ue):
                sched_mod.update_average(self.states[0], u, delivered[u] / cfg.tti_s)
            self.ue_xy = mobility.step_all(self.ue_xy, self.speed, cfg.tti_s, self.headings[:, t], self.region)
            self._update_coupling()
        return self.delivered_bits / (cfg.ttis * cfg.tti_s)


def simulate_run(
    cfg: SimConfig, tx: int, rx: int, policy: str, speed: float, seed: int, trace: RunTrace | None = None
) -> KpiReport:
    """One sweep point at one seed; returns the KPI report (scope-filtered)."""
    run_state = _Run(cfg, tx, rx, policy, speed, seed)
    per_ue = run_state.run(trace)
    if cfg.kpi_scope == "center":
        per_ue = per_ue[run_state.drop_site == 0]
    return KpiReport(
        speed_kmph=speed,
        scheduler=policy,
        tx=tx,
        rx=rx,
        seed=seed,
        per_ue_bps=per_ue,
        bandwidth_hz=cfg.bandwidth_hz,
    )


def _task(args) -> KpiReport:
    cfg, policy, tx, rx, speed, seed = args
    return simulate_run(cfg, tx, rx, policy, speed, seed)


def run(cfg: SimConfig, workers: int = 1) -> list[KpiReport]:
    """Full sweep: every (scheduler, mode, speed) point at every seed.

    Output order and content are independent of the worker count (every
    task is seeded independently and results are collected in task order).
    """
    tasks = [
        (cfg, policy, tx, rx, speed, seed)
        for (policy, tx, rx, speed) in cfg.sweep_points()
        for seed in cfg.seeds
    ]
    if workers <= 1:
        return [_task(t) for t in tasks]
    with Pool(processes=workers) as pool:
        return list(pool.imap(_task, tasks, chunksize=1))
