/** Seed aggregation: one series per (scheduler, antenna configuration). */

import type { KpiColumn, ResultRow } from "./csv.js";

export interface SeriesPoint {
  speed: number;
  mean: number;
  min: number;
  max: number;
  nSeeds: number;
}

export interface Series {
  scheduler: string;
  config: string; // e.g. "2x4"
  points: SeriesPoint[]; // sorted by speed
}

/** Mean over values sorted ascending first, so the result is order-independent. */
export function sortedMean(values: number[]): number {
  const sorted = [...values].sort((a, b) => a - b);
  let acc = 0;
  for (const v of sorted) acc += v;
  return acc / sorted.length;
}

export function aggregate(rows: ResultRow[], column: KpiColumn): Series[] {
  const bySeries = new Map<string, Map<number, number[]>>();
  for (const row of rows) {
    const key = `${row.scheduler}/${row.tx}x${row.rx}`;
    let speeds = bySeries.get(key);
    if (!speeds) {
      speeds = new Map();
      bySeries.set(key, speeds);
    }
    let vals = speeds.get(row.speed_kmph);
    if (!vals) {
      vals = [];
      speeds.set(row.speed_kmph, vals);
    }
    vals.push(row[column]);
  }
  const out: Series[] = [];
  for (const [key, speeds] of bySeries) {
    const [scheduler, config] = key.split("/");
    const points = [...speeds.entries()]
      .map(([speed, vals]) => ({
        speed,
        mean: sortedMean(vals),
        min: Math.min(...vals),
        max: Math.max(...vals),
        nSeeds: vals.length,
      }))
      .sort((a, b) => a.speed - b.speed);
    out.push({ scheduler, config, points });
  }
  out.sort((a, b) =>
    a.scheduler === b.scheduler ? a.config.localeCompare(b.config) : a.scheduler.localeCompare(b.scheduler),
  );
  return out;
}

export function schedulersIn(series: Series[]): string[] {
  const seen: string[] = [];
  for (const s of series) {
    if (!seen.includes(s.scheduler)) seen.push(s.scheduler);
  }
  // panel order: PF first (as in the reference figures), then RR, then others
  const rank = (s: string) => (s === "pf" ? 0 : s === "rr" ? 1 : 2);
  return seen.sort((a, b) => rank(a) - rank(b) || a.localeCompare(b));
}
