"""Simulation configuration: defaults, key=value file parsing, validation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

SUPPORTED_TX = (2, 4)
SUPPORTED_RX = (2, 3, 4)
SCHEDULERS = ("rr", "pf")
KPI_SCOPES = ("all", "center")
MODULATION_MODES = ("none", "16qam")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    # network
    carrier_mhz: float = 2450.0
    bandwidth_mhz: float = 20.0
    inter_site_distance_m: float = 500.0
    rings: int = 2
    bs_height_m: float = 20.0
    ue_height_m: float = 1.5
    bs_tx_power_dbm: float = 45.0
    antenna_gain_dbi: float = 15.0
    azimuth_offset_deg: float = 30.0
    downtilt_deg: float = 8.0
    ues_per_sector: int = 10
    # sweep
    transmission_modes: tuple[tuple[int, int], ...] = ((2, 2), (2, 3), (2, 4), (4, 2), (4, 3), (4, 4))
    speed_kmph: tuple[float, ...] = (0.0, 30.0, 60.0, 120.0)
    schedulers: tuple[str, ...] = ("rr", "pf")
    seeds: tuple[int, ...] = (1, 2, 3)
    ttis: int = 50
    # declared defaults
    feedback_delay_ttis: int = 3
    pf_time_constant_ttis: int = 20
    pf_alpha: float = 1.0
    pf_beta: float = 1.0
    pf_initial_throughput_bps: float = 1e3
    sigma_shadow_db: float = 8.0
    noise_figure_db: float = 9.0
    subbands: int = 9
    prb_count: int = 100
    min_distance_m: float = 35.0
    tti_duration_ms: float = 1.0
    kpi_scope: str = "all"
    restrict_modulation: str = "none"

    @property
    def bandwidth_hz(self) -> float:
        return self.bandwidth_mhz * 1e6

    @property
    def carrier_hz(self) -> float:
        return self.carrier_mhz * 1e6

    @property
    def tti_s(self) -> float:
        return self.tti_duration_ms * 1e-3

    def subband_prbs(self) -> list[int]:
        """PRB widths per subband; the remainder goes to the last subband."""
        base = self.prb_count // self.subbands
        out = [base] * self.subbands
        out[-1] += self.prb_count - base * self.subbands
        return out

    def sweep_points(self) -> list[tuple[str, int, int, float]]:
        """(scheduler, tx, rx, speed) in deterministic output order."""
        return [
            (sched, tx, rx, speed)
            for sched in self.schedulers
            for (tx, rx) in self.transmission_modes
            for speed in self.speed_kmph
        ]


def _parse_mode(token: str) -> tuple[int, int]:
    try:
        tx_s, rx_s = token.lower().split("x")
        return int(tx_s), int(rx_s)
    except ValueError:
        raise ConfigError(f"bad transmission mode {token!r} (expected e.g. 2x4)") from None


def _parse_list(value: str, conv):
    return tuple(conv(v.strip()) for v in value.split(",") if v.strip())


def validate(cfg: SimConfig) -> SimConfig:
    def fail(key, msg):
        raise ConfigError(f"config key {key!r}: {msg}")

    if cfg.carrier_mhz <= 0:
        fail("carrier_mhz", "must be positive")
    if cfg.bandwidth_mhz <= 0:
        fail("bandwidth_mhz", "must be positive")
    if cfg.inter_site_distance_m <= 0:
        fail("inter_site_distance_m", "must be positive")
    if cfg.rings < 0:
        fail("rings", "must be >= 0")
    if not 0 < cfg.bs_height_m < 250:
        fail("bs_height_m", "must be in (0, 250) m for the macro path-loss model")
    if cfg.ue_height_m <= 0 or cfg.ue_height_m >= cfg.bs_height_m:
        fail("ue_height_m", "must be positive and below the BS height")
    if cfg.ues_per_sector < 1:
        fail("ues_per_sector", "must be >= 1")
    if not cfg.transmission_modes:
        fail("transmission_modes", "must not be empty")
    for tx, rx in cfg.transmission_modes:
        if tx not in SUPPORTED_TX:
            fail("transmission_modes", f"{tx} transmit antennas unsupported; codebooks exist for 2 and 4 only")
        if rx not in SUPPORTED_RX:
            fail("transmission_modes", f"{rx} receive antennas unsupported (supported: 2, 3, 4)")
    if not cfg.speed_kmph or any(s < 0 for s in cfg.speed_kmph):
        fail("speed_kmph", "must be a non-empty list of speeds >= 0")
    if not cfg.schedulers or any(s not in SCHEDULERS for s in cfg.schedulers):
        fail("schedulers", f"must be a non-empty subset of {SCHEDULERS}")
    if not cfg.seeds:
        fail("seeds", "must not be empty")
    if cfg.ttis < 1:
        fail("ttis", "must be >= 1")
    if cfg.feedback_delay_ttis < 0:
        fail("feedback_delay_ttis", "must be >= 0")
    if cfg.pf_time_constant_ttis < 2:
        fail("pf_time_constant_ttis", "must be >= 2")
    if cfg.pf_initial_throughput_bps <= 0:
        fail("pf_initial_throughput_bps", "must be positive")
    if cfg.sigma_shadow_db < 0:
        fail("sigma_shadow_db", "must be >= 0")
    if cfg.subbands < 1 or cfg.subbands > cfg.prb_count:
        fail("subbands", "must be in 1..prb_count")
    if cfg.prb_count < 1:
        fail("prb_count", "must be >= 1")
    if cfg.min_distance_m < 0:
        fail("min_distance_m", "must be >= 0")
    if cfg.tti_duration_ms <= 0:
        fail("tti_duration_ms", "must be positive")
    if cfg.kpi_scope not in KPI_SCOPES:
        fail("kpi_scope", f"must be one of {KPI_SCOPES}")
    if cfg.restrict_modulation not in MODULATION_MODES:
        fail("restrict_modulation", f"must be one of {MODULATION_MODES}")
    return cfg


_PARSERS = {
    "carrier_mhz": float,
    "bandwidth_mhz": float,
    "inter_site_distance_m": float,
    "rings": int,
    "bs_height_m": float,
    "ue_height_m": float,
    "bs_tx_power_dbm": float,
    "antenna_gain_dbi": float,
    "azimuth_offset_deg": float,
    "downtilt_deg": float,
    "ues_per_sector": int,
    "transmission_modes": lambda v: _parse_list(v, _parse_mode),
    "speed_kmph": lambda v: _parse_list(v, float),
    "schedulers": lambda v: _parse_list(v, lambda s: s.lower()),
    "seeds": lambda v: _parse_list(v, int),
    "ttis": int,
    "feedback_delay_ttis": int,
    "pf_time_constant_ttis": int,
    "pf_alpha": float,
    "pf_beta": float,
    "pf_initial_throughput_bps": float,
    "sigma_shadow_db": float,
    "noise_figure_db": float,
    "subbands": int,
    "prb_count": int,
    "min_distance_m": float,
    "tti_duration_ms": float,
    "kpi_scope": lambda v: v.lower(),
    "restrict_modulation": lambda v: v.lower(),
}

# convenience keys narrowing the sweep to a single antenna configuration
_TX_RX_KEYS = ("tx_antennas", "rx_antennas")


def load_config(path: str) -> SimConfig:
    """Parse a key=value config file; unknown keys and bad values are errors."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict = {}
    tx_rx: dict[str, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: malformed line (expected key = value): {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _TX_RX_KEYS:
            try:
                tx_rx[key] = int(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: key {key!r}: not an integer: {value!r}") from None
            continue
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: key {key!r}: {exc}") from None
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: key {key!r}: cannot parse value {value!r}") from None
    cfg = SimConfig(**values)
    if tx_rx:
        if set(tx_rx) != set(_TX_RX_KEYS):
            raise ConfigError(f"{path}: tx_antennas and rx_antennas must be given together")
        cfg = replace(cfg, transmission_modes=((tx_rx["tx_antennas"], tx_rx["rx_antennas"]),))
    try:
        return validate(cfg)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def apply_overrides(cfg: SimConfig, **overrides) -> SimConfig:
    """CLI-style overrides on top of a config (None values are ignored)."""
    clean = {k: v for k, v in overrides.items() if v is not None}
    if not clean:
        return validate(cfg)
    known = {f.name for f in fields(SimConfig)}
    unknown = set(clean) - known
    if unknown:
        raise ConfigError(f"unknown override keys: {sorted(unknown)}")
    return validate(replace(cfg, **clean))
