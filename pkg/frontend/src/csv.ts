/** Parsing of the simulator's results.csv (fixed comma-separated schema). */

export const EXPECTED_HEADER =
  "seed,speed_kmph,scheduler,tx,rx,avg_throughput_mbps,cell_edge_mbps,spectral_eff_bps_hz,fairness";

export interface ResultRow {
  seed: number;
  speed_kmph: number;
  scheduler: string;
  tx: number;
  rx: number;
  avg_throughput_mbps: number;
  cell_edge_mbps: number;
  spectral_eff_bps_hz: number;
  fairness: number;
}

export type KpiColumn =
  | "avg_throughput_mbps"
  | "cell_edge_mbps"
  | "spectral_eff_bps_hz"
  | "fairness";

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("empty results CSV");
  }
  if (lines[0] !== EXPECTED_HEADER) {
    throw new Error(`unexpected CSV header: ${lines[0]}`);
  }
  if (lines.length === 1) {
    throw new Error("results CSV has a header but no data rows");
  }
  return lines.slice(1).map((line, i) => {
    const f = line.split(",");
    if (f.length !== 9) {
      throw new Error(`row ${i + 2}: expected 9 fields, got ${f.length}`);
    }
    const row: ResultRow = {
      seed: Number(f[0]),
      speed_kmph: Number(f[1]),
      scheduler: f[2],
      tx: Number(f[3]),
      rx: Number(f[4]),
      avg_throughput_mbps: Number(f[5]),
      cell_edge_mbps: Number(f[6]),
      spectral_eff_bps_hz: Number(f[7]),
      fairness: Number(f[8]),
    };
    for (const [k, v] of Object.entries(row)) {
      if (k !== "scheduler" && !Number.isFinite(v as number)) {
        throw new Error(`row ${i + 2}: non-numeric value in column ${k}`);
      }
    }
    return row;
  });
}
