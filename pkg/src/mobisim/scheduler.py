"""Round-robin and proportional-fair subband scheduling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TIME_CONSTANT_TTIS = 20
DEFAULT_INITIAL_AVG_BPS = 1e3  # epsilon floor keeping Eq.-style priorities finite


@dataclass(frozen=True)
class AllocationEntry:
    ue: int
    rank: int = 1
    codebook_index: int = 0
    cqi: int = 0


@dataclass
class Allocation:
    """Per-TTI subband ownership; SU-MIMO, so one UE per subband at most."""

    entries: dict[int, AllocationEntry] = field(default_factory=dict)

    def ue_of(self, subband: int) -> int | None:
        e = self.entries.get(subband)
        return None if e is None else e.ue


@dataclass
class SchedulerState:
    """Per-sector scheduler memory.

    avg_throughput_bps holds the exponentially windowed per-UE average
    (floored at eps); the cursor is only used by round-robin.
    """

    policy: str = "pf"
    alpha: float = 1.0
    beta: float = 1.0
    time_constant_ttis: int = DEFAULT_TIME_CONSTANT_TTIS
    eps_bps: float = DEFAULT_INITIAL_AVG_BPS
    avg_throughput_bps: dict[int, float] = field(default_factory=dict)
    rr_cursor: int = 0

    def __post_init__(self):
        if self.policy not in ("rr", "pf"):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.time_constant_ttis < 2:
            raise ValueError("time_constant_ttis must be >= 2")
        if self.eps_bps <= 0:
            raise ValueError("eps_bps must be positive")

    def average(self, ue: int) -> float:
        return self.avg_throughput_bps.get(ue, self.eps_bps)


def rr_schedule(state: SchedulerState, active_ues, subband_count: int) -> Allocation:
    """Deal subbands one at a time in fixed cyclic UE order starting at the cursor."""
    ues = list(active_ues)
    if not ues:
        raise ValueError("active_ues must be non-empty")
    alloc = Allocation()
    cur = state.rr_cursor % len(ues)
    for sb in range(subband_count):
        alloc.entries[sb] = AllocationEntry(ue=ues[(cur + sb) % len(ues)])
    state.rr_cursor = (cur + subband_count) % len(ues)
    return alloc


def pf_priority(feasible_bps: float, average_bps: float, alpha: float, beta: float) -> float:
    """Priority T^alpha / R^beta (feasible over windowed average)."""
    if average_bps <= 0:
        raise ValueError("average throughput must be positive")
    return feasible_bps**alpha / average_bps**beta


def pf_schedule(state: SchedulerState, active_ues, feasible_bps: np.ndarray) -> Allocation:
    """Assign each subband to the UE maximising the PF priority.

    feasible_bps has shape (n_ues, n_subbands) aligned with active_ues;
    ties resolve to the earlier (lower-id) UE.
    """
    ues = list(active_ues)
    rates = np.asarray(feasible_bps, dtype=float)
    if rates.ndim != 2 or rates.shape[0] != len(ues):
        raise ValueError("feasible_bps must be (n_ues, n_subbands)")
    if not np.all(np.isfinite(rates)) or np.any(rates < 0):
        raise ValueError("feasible rates must be finite and >= 0")
    avg = np.array([state.average(u) for u in ues])
    prio = rates**state.alpha / (avg**state.beta)[:, None]
    winners = np.argmax(prio, axis=0)  # first occurrence wins a tie
    return Allocation(entries={sb: AllocationEntry(ue=ues[w]) for sb, w in enumerate(winners)})


def update_average(state: SchedulerState, ue: int, delivered_bps: float) -> None:
    """Exponential window: T <- (1 - 1/t_c) T + (1/t_c) * delivered, floored at eps.

    Applied to every active UE each TTI; unscheduled UEs contribute zero.
    """
    tc = state.time_constant_ttis
    t = state.average(ue)
    state.avg_throughput_bps[ue] = max((1.0 - 1.0 / tc) * t + delivered_bps / tc, state.eps_bps)
