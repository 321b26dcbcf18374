"""Command-line entry point: sweep orchestration and result serialisation."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import engine
from .config import ConfigError, SimConfig, apply_overrides, load_config
from .geometry import build_layout, export_layout_csv
from .kpi import KpiReport

CSV_HEADER = "seed,speed_kmph,scheduler,tx,rx,avg_throughput_mbps,cell_edge_mbps,spectral_eff_bps_hz,fairness"


def _round6(x: float) -> float:
    """Round to 6 significant digits (the CSV round-trip precision)."""
    return float(f"{x:.6g}")


@dataclass(frozen=True)
class ResultRow:
    """One sweep point at one seed; numeric KPIs carry CSV precision."""

    seed: int
    speed_kmph: float
    scheduler: str
    tx: int
    rx: int
    avg_throughput_mbps: float
    cell_edge_mbps: float
    spectral_eff_bps_hz: float
    fairness: float

    @classmethod
    def from_report(cls, rep: KpiReport) -> "ResultRow":
        return cls(
            seed=rep.seed,
            speed_kmph=rep.speed_kmph,
            scheduler=rep.scheduler,
            tx=rep.tx,
            rx=rep.rx,
            avg_throughput_mbps=_round6(rep.average_ue_throughput_bps / 1e6),
            cell_edge_mbps=_round6(rep.cell_edge_throughput_bps / 1e6),
            spectral_eff_bps_hz=_round6(rep.spectral_efficiency_bps_hz),
            fairness=_round6(rep.fairness),
        )

    def to_csv(self) -> str:
        return (
            f"{self.seed},{self.speed_kmph:g},{self.scheduler},{self.tx},{self.rx},"
            f"{self.avg_throughput_mbps:.6g},{self.cell_edge_mbps:.6g},"
            f"{self.spectral_eff_bps_hz:.6g},{self.fairness:.6g}"
        )

    @classmethod
    def from_csv(cls, line: str) -> "ResultRow":
        f = line.split(",")
        return cls(
            seed=int(f[0]),
            speed_kmph=float(f[1]),
            scheduler=f[2],
            tx=int(f[3]),
            rx=int(f[4]),
            avg_throughput_mbps=float(f[5]),
            cell_edge_mbps=float(f[6]),
            spectral_eff_bps_hz=float(f[7]),
            fairness=float(f[8]),
        )


def write_results_csv(rows: list[ResultRow], path: Path) -> None:
    path.write_text("\n".join([CSV_HEADER] + [r.to_csv() for r in rows]) + "\n")


def read_results_csv(path: Path) -> list[ResultRow]:
    lines = path.read_text().strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    return [ResultRow.from_csv(line) for line in lines[1:]]


_KPI_FIELDS = ("avg_throughput_mbps", "cell_edge_mbps", "spectral_eff_bps_hz", "fairness")


def summarise(rows: list[ResultRow]) -> dict:
    """Group rows by sweep point; per-seed mean/min/max for every KPI."""
    grouped: dict[str, list[ResultRow]] = {}
    for row in rows:
        key = f"{row.scheduler}/{row.tx}x{row.rx}/{row.speed_kmph:g}"
        grouped.setdefault(key, []).append(row)
    out = {}
    for key, group in grouped.items():
        entry: dict = {"seeds": [r.seed for r in group], "rows": [vars(r) for r in group]}
        for fld in _KPI_FIELDS:
            vals = [getattr(r, fld) for r in group]
            entry[fld] = {"mean": sum(vals) / len(vals), "min": min(vals), "max": max(vals)}
        out[key] = entry
    return out


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="mobisim",
        description="Downlink system-level sweep: velocity x scheduler x antenna configuration.",
    )
    ap.add_argument("--config", help="key=value config file (defaults used when omitted)")
    ap.add_argument("--scheduler", choices=("rr", "pf"), help="restrict to one scheduler")
    ap.add_argument("--speed", help="comma-separated speeds in km/h (overrides config)")
    ap.add_argument("--tx", type=int, help="transmit antennas (with --rx narrows to one mode)")
    ap.add_argument("--rx", type=int, help="receive antennas (with --tx narrows to one mode)")
    ap.add_argument("--ttis", type=int, help="TTIs per run")
    ap.add_argument("--seeds", help="comma-separated seed list")
    ap.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    ap.add_argument("--out", default=".", help="output directory for results.csv / summary.json")
    ap.add_argument("--layout-csv", help="also export the site/sector table to this path")
    return ap.parse_args(argv)


def _build_config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    overrides: dict = {}
    if args.scheduler:
        overrides["schedulers"] = (args.scheduler,)
    if args.speed is not None:
        overrides["speed_kmph"] = tuple(float(v) for v in args.speed.split(","))
    if (args.tx is None) != (args.rx is None):
        raise ConfigError("--tx and --rx must be given together")
    if args.tx is not None:
        overrides["transmission_modes"] = ((args.tx, args.rx),)
    if args.ttis is not None:
        overrides["ttis"] = args.ttis
    if args.seeds is not None:
        overrides["seeds"] = tuple(int(v) for v in args.seeds.split(","))
    return apply_overrides(cfg, **overrides)


def run_cli(argv=None) -> int:
    args = _parse_args(argv if argv is not None else sys.argv[1:])
    try:
        cfg = _build_config(args)
    except ConfigError as exc:
        print(f"mobisim: config error: {exc}", file=sys.stderr)
        return 2
    if args.workers < 1:
        print("mobisim: --workers must be >= 1", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"mobisim: cannot create output directory: {exc}", file=sys.stderr)
        return 2

    if args.layout_csv:
        layout = build_layout(
            cfg.inter_site_distance_m,
            cfg.rings,
            azimuth_offset_deg=cfg.azimuth_offset_deg,
            bs_height_m=cfg.bs_height_m,
            downtilt_deg=cfg.downtilt_deg,
            boresight_gain_dbi=cfg.antenna_gain_dbi,
        )
        Path(args.layout_csv).write_text(export_layout_csv(layout))

    reports = engine.run(cfg, workers=args.workers)
    rows = [ResultRow.from_report(r) for r in reports]
    write_results_csv(rows, out_dir / "results.csv")
    (out_dir / "summary.json").write_text(json.dumps(summarise(rows), indent=2, sort_keys=True) + "\n")
    print(f"wrote {out_dir / 'results.csv'} ({len(rows)} rows) and {out_dir / 'summary.json'}")
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
