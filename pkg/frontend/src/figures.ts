/** The four velocity-vs-KPI figures and batch rendering. */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { aggregate } from "./aggregate.js";
import type { KpiColumn, ResultRow } from "./csv.js";
import { renderFigure } from "./svg.js";

export interface FigureSpec {
  column: KpiColumn;
  title: string;
  yLabel: string;
  stem: string;
  yDomain?: [number, number];
}

export const FIGURES: FigureSpec[] = [
  {
    column: "avg_throughput_mbps",
    title: "Average UE throughput vs velocity",
    yLabel: "Average UE throughput (Mbit/s)",
    stem: "avg_throughput",
  },
  {
    column: "cell_edge_mbps",
    title: "Cell-edge throughput vs velocity",
    yLabel: "Cell-edge throughput, 5th percentile (Mbit/s)",
    stem: "cell_edge",
  },
  {
    column: "spectral_eff_bps_hz",
    title: "Spectral efficiency vs velocity",
    yLabel: "Spectral efficiency (bit/s/Hz)",
    stem: "spectral_efficiency",
  },
  {
    column: "fairness",
    title: "Jain fairness index vs velocity",
    yLabel: "Jain fairness index",
    stem: "fairness",
    yDomain: [0, 1],
  },
];

export type Format = "svg" | "png";

export interface RenderedFigure {
  spec: FigureSpec;
  svg: string;
  path: string;
}

export function renderAll(rows: ResultRow[], outDir: string, format: Format): RenderedFigure[] {
  mkdirSync(outDir, { recursive: true });
  const out: RenderedFigure[] = [];
  for (const spec of FIGURES) {
    const series = aggregate(rows, spec.column);
    const svg = renderFigure(series, { title: spec.title, yLabel: spec.yLabel, yDomain: spec.yDomain });
    const path = join(outDir, `${spec.stem}.${format}`);
    out.push({ spec, svg, path });
  }
  return out;
}

export async function writeFigures(figures: RenderedFigure[], format: Format): Promise<void> {
  if (format === "svg") {
    for (const f of figures) {
      writeFileSync(f.path, f.svg);
    }
    return;
  }
  const { Resvg } = await import("@resvg/resvg-js");
  for (const f of figures) {
    const png = new Resvg(f.svg, { fitTo: { mode: "zoom", value: 2 } }).render().asPng();
    writeFileSync(f.path, png);
  }
}
