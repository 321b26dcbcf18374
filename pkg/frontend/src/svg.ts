/** Small self-contained SVG line-chart renderer (no DOM, no canvas). */

import type { Series } from "./aggregate.js";
import { schedulersIn } from "./aggregate.js";

export interface FigureOptions {
  title: string;
  yLabel: string;
  /** Fixed y-axis range (used to clip the fairness axis to [0, 1]). */
  yDomain?: [number, number];
}

const PANEL_W = 420;
const PANEL_H = 300;
const MARGIN = { left: 64, right: 18, top: 58, bottom: 46 };
const PALETTE: Record<string, string> = {
  "2x2": "#1f77b4",
  "2x3": "#2ca02c",
  "2x4": "#9467bd",
  "4x2": "#d62728",
  "4x3": "#ff7f0e",
  "4x4": "#8c564b",
};
const FALLBACK_COLORS = ["#17becf", "#e377c2", "#bcbd22", "#7f7f7f"];

function colorFor(config: string, i: number): string {
  return PALETTE[config] ?? FALLBACK_COLORS[i % FALLBACK_COLORS.length];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (hi <= lo) return [lo];
  const span = hi - lo;
  const step0 = span / n;
  const mag = 10 ** Math.floor(Math.log10(step0));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= n + 0.5) ?? mag * 10;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Number(v.toPrecision(6)));
}

class Scale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  at(v: number): number {
    if (this.d1 === this.d0) return (this.r0 + this.r1) / 2;
    return this.r0 + ((v - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0);
  }
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderFigure(series: Series[], opts: FigureOptions): string {
  const panels = schedulersIn(series);
  const nPanels = Math.max(panels.length, 1);
  const width = MARGIN.left + nPanels * (PANEL_W + 40) - 40 + MARGIN.right;
  const height = MARGIN.top + PANEL_H + MARGIN.bottom + 26;

  const speeds = series.flatMap((s) => s.points.map((p) => p.speed));
  const xLo = Math.min(...speeds, 0);
  const xHi = Math.max(...speeds, 1);
  let yLo: number;
  let yHi: number;
  if (opts.yDomain) {
    [yLo, yHi] = opts.yDomain;
  } else {
    const highs = series.flatMap((s) => s.points.map((p) => p.max));
    yLo = 0;
    yHi = Math.max(...highs) * 1.05 || 1;
  }

  const configs = [...new Set(series.map((s) => s.config))].sort();
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<metadata id="figure-data">${esc(JSON.stringify({ kpi: opts.title, yDomain: [yLo, yHi], series }))}</metadata>`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<text x="${width / 2}" y="22" text-anchor="middle" font-size="16" font-weight="bold">${esc(opts.title)}</text>`);

  // legend
  let lx = MARGIN.left;
  configs.forEach((cfg, i) => {
    const c = colorFor(cfg, i);
    parts.push(`<line x1="${lx}" y1="38" x2="${lx + 22}" y2="38" stroke="${c}" stroke-width="2.5"/>`);
    parts.push(`<circle cx="${lx + 11}" cy="38" r="3.2" fill="${c}"/>`);
    parts.push(`<text x="${lx + 27}" y="42" font-size="12">${esc(cfg)}</text>`);
    lx += 27 + 9 * cfg.length + 18;
  });

  panels.forEach((sched, pi) => {
    const x0 = MARGIN.left + pi * (PANEL_W + 40);
    const y0 = MARGIN.top;
    const sx = new Scale(xLo, xHi, x0, x0 + PANEL_W);
    const sy = new Scale(yLo, yHi, y0 + PANEL_H, y0);

    parts.push(`<rect x="${x0}" y="${y0}" width="${PANEL_W}" height="${PANEL_H}" fill="none" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 + PANEL_W / 2}" y="${y0 - 8}" text-anchor="middle" font-size="13" font-weight="bold">${esc(sched.toUpperCase())}</text>`,
    );
    for (const t of niceTicks(yLo, yHi)) {
      const y = sy.at(t);
      parts.push(`<line x1="${x0}" y1="${y}" x2="${x0 + PANEL_W}" y2="${y}" stroke="#ddd" stroke-width="0.6"/>`);
      if (pi === 0) {
        parts.push(`<text x="${x0 - 8}" y="${y + 4}" text-anchor="end" font-size="11">${fmt(t)}</text>`);
      }
    }
    for (const t of niceTicks(xLo, xHi, 6)) {
      const x = sx.at(t);
      parts.push(`<line x1="${x}" y1="${y0 + PANEL_H}" x2="${x}" y2="${y0 + PANEL_H + 5}" stroke="#333"/>`);
      parts.push(`<text x="${x}" y="${y0 + PANEL_H + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`);
    }
    parts.push(
      `<text x="${x0 + PANEL_W / 2}" y="${y0 + PANEL_H + 36}" text-anchor="middle" font-size="12">UE velocity (km/h)</text>`,
    );
    if (pi === 0) {
      parts.push(
        `<text transform="translate(${x0 - 46},${y0 + PANEL_H / 2}) rotate(-90)" text-anchor="middle" font-size="12">${esc(opts.yLabel)}</text>`,
      );
    }

    const panelSeries = series.filter((s) => s.scheduler === sched);
    panelSeries.forEach((s) => {
      const i = configs.indexOf(s.config);
      const c = colorFor(s.config, i);
      const clip = (v: number) => Math.min(Math.max(v, yLo), yHi);
      if (s.points.length > 1 && s.points.some((p) => p.max !== p.min)) {
        const upper = s.points.map((p) => `${sx.at(p.speed)},${sy.at(clip(p.max))}`);
        const lower = [...s.points].reverse().map((p) => `${sx.at(p.speed)},${sy.at(clip(p.min))}`);
        parts.push(`<polygon points="${upper.join(" ")} ${lower.join(" ")}" fill="${c}" opacity="0.15"/>`);
      }
      const pts = s.points.map((p) => `${sx.at(p.speed)},${sy.at(clip(p.mean))}`);
      if (pts.length > 1) {
        parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${c}" stroke-width="2"/>`);
      }
      for (const p of s.points) {
        parts.push(`<circle cx="${sx.at(p.speed)}" cy="${sy.at(clip(p.mean))}" r="3.2" fill="${c}"/>`);
      }
    });
  });

  parts.push("</svg>");
  return parts.join("\n");
}

/** Pull the embedded series data back out of a rendered figure. */
export function extractFigureData(svg: string): { kpi: string; yDomain: [number, number]; series: Series[] } {
  const m = svg.match(/<metadata id="figure-data">([\s\S]*?)<\/metadata>/);
  if (!m) {
    throw new Error("figure has no embedded data block");
  }
  const json = m[1].replace(/&lt;/g, "<").replace(/&gt;/g, ">").replace(/&amp;/g, "&");
  return JSON.parse(json);
}
