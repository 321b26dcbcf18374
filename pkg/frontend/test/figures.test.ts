import { existsSync, mkdtempSync, readFileSync, statSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { aggregate } from "../src/aggregate.js";
import { EXPECTED_HEADER, parseResultsCsv } from "../src/csv.js";
import { FIGURES, renderAll, writeFigures } from "../src/figures.js";
import { extractFigureData, renderFigure } from "../src/svg.js";
import { run } from "../src/main.js";

const FIXTURE = join(__dirname, "fixtures", "desk_results.csv");

function syntheticCsv(): string {
  const lines = [EXPECTED_HEADER];
  for (const sched of ["rr", "pf"]) {
    for (const [tx, rx] of [[2, 2], [2, 4]]) {
      for (const speed of [0, 30, 60, 120]) {
        for (const seed of [1, 2, 3]) {
          const base = (tx * rx) / (1 + speed / 60);
          const avg = base + seed * 0.013;
          const edge = base / 5 + seed * 0.003;
          const se = (avg * 105) / 20;
          const fair = Math.min(0.5 + 0.3 / (1 + speed / 60) + seed * 0.01, 1);
          lines.push(
            `${seed},${speed},${sched},${tx},${rx},${avg.toPrecision(6)},${edge.toPrecision(6)},${se.toPrecision(6)},${fair.toPrecision(6)}`,
          );
        }
      }
    }
  }
  return lines.join("\n") + "\n";
}

/** Independent per-speed seed mean: sort ascending, then sum. */
function meanOf(values: number[]): number {
  const s = [...values].sort((a, b) => a - b);
  let acc = 0;
  for (const v of s) acc += v;
  return acc / s.length;
}

describe("csv parsing", () => {
  it("rejects an empty file", () => {
    expect(() => parseResultsCsv("")).toThrow(/empty/);
  });

  it("rejects a wrong header", () => {
    expect(() => parseResultsCsv("a,b,c\n1,2,3\n")).toThrow(/header/);
  });

  it("rejects header-only input", () => {
    expect(() => parseResultsCsv(EXPECTED_HEADER + "\n")).toThrow(/no data rows/);
  });

  it("parses the synthetic sweep", () => {
    const rows = parseResultsCsv(syntheticCsv());
    expect(rows).toHaveLength(2 * 2 * 4 * 3);
    expect(rows[0].scheduler).toBe("rr");
  });
});

describe("rendering", () => {
  const rows = parseResultsCsv(syntheticCsv());

  it("emits all four figures with nonzero size", async () => {
    const dir = mkdtempSync(join(tmpdir(), "figgen-"));
    const figures = renderAll(rows, dir, "svg");
    await writeFigures(figures, "svg");
    expect(figures).toHaveLength(4);
    for (const stem of ["avg_throughput", "cell_edge", "spectral_efficiency", "fairness"]) {
      const p = join(dir, `${stem}.svg`);
      expect(existsSync(p)).toBe(true);
      expect(statSync(p).size).toBeGreaterThan(500);
    }
  });

  it("plotted means equal CSV seed means exactly", () => {
    for (const spec of FIGURES) {
      const svg = renderFigure(aggregate(rows, spec.column), {
        title: spec.title,
        yLabel: spec.yLabel,
        yDomain: spec.yDomain,
      });
      const data = extractFigureData(svg);
      // recompute independently from the raw rows
      const expected = new Map<string, number>();
      for (const row of rows) {
        const key = `${row.scheduler}/${row.tx}x${row.rx}/${row.speed_kmph}`;
        const vals = rows
          .filter((r) => r.scheduler === row.scheduler && r.tx === row.tx && r.rx === row.rx && r.speed_kmph === row.speed_kmph)
          .map((r) => r[spec.column]);
        expected.set(key, meanOf(vals));
      }
      let checked = 0;
      for (const s of data.series) {
        for (const p of s.points) {
          const key = `${s.scheduler}/${s.config}/${p.speed}`;
          expect(p.mean).toBe(expected.get(key));
          checked += 1;
        }
      }
      expect(checked).toBe(expected.size);
    }
  });

  it("clips the fairness axis to [0, 1]", () => {
    const spec = FIGURES.find((f) => f.stem === "fairness")!;
    const svg = renderFigure(aggregate(rows, spec.column), {
      title: spec.title,
      yLabel: spec.yLabel,
      yDomain: spec.yDomain,
    });
    const data = extractFigureData(svg);
    expect(data.yDomain).toEqual([0, 1]);
    // panel pixel range is 58..358; every marker must stay inside it
    const cys = [...svg.matchAll(/<circle[^>]*cy="([-\d.]+)"/g)].map((m) => Number(m[1]));
    for (const cy of cys.filter((c) => c > 50)) {
      expect(cy).toBeGreaterThanOrEqual(58 - 1e-9);
      expect(cy).toBeLessThanOrEqual(358 + 1e-9);
    }
  });

  it("renders a single sweep point without crashing", () => {
    const single = parseResultsCsv(
      EXPECTED_HEADER + "\n1,120,rr,2,4,5.5,1.1,2.2,0.9\n",
    );
    for (const spec of FIGURES) {
      const svg = renderFigure(aggregate(single, spec.column), {
        title: spec.title,
        yLabel: spec.yLabel,
        yDomain: spec.yDomain,
      });
      expect(svg).toContain("<circle");
      const data = extractFigureData(svg);
      expect(data.series).toHaveLength(1);
      expect(data.series[0].points).toHaveLength(1);
    }
  });

  it("min-max band spans the per-seed extremes", () => {
    const series = aggregate(rows, "avg_throughput_mbps");
    for (const s of series) {
      for (const p of s.points) {
        expect(p.min).toBeLessThanOrEqual(p.mean);
        expect(p.max).toBeGreaterThanOrEqual(p.mean);
        expect(p.nSeeds).toBe(3);
      }
    }
  });
});

describe("desk-scale fixture", () => {
  it("renders the committed simulator output end to end", async () => {
    const text = readFileSync(FIXTURE, "utf8");
    const rows = parseResultsCsv(text);
    const dir = mkdtempSync(join(tmpdir(), "figgen-desk-"));
    const figures = renderAll(rows, dir, "svg");
    await writeFigures(figures, "svg");
    for (const f of figures) {
      expect(statSync(f.path).size).toBeGreaterThan(1000);
      const data = extractFigureData(readFileSync(f.path, "utf8"));
      expect(data.series.length).toBeGreaterThan(0);
    }
  });

  it("plotted means equal fixture CSV means exactly", () => {
    const rows = parseResultsCsv(readFileSync(FIXTURE, "utf8"));
    const spec = FIGURES[0];
    const svg = renderFigure(aggregate(rows, spec.column), {
      title: spec.title,
      yLabel: spec.yLabel,
    });
    const data = extractFigureData(svg);
    for (const s of data.series) {
      for (const p of s.points) {
        const vals = rows
          .filter(
            (r) =>
              r.scheduler === s.scheduler &&
              `${r.tx}x${r.rx}` === s.config &&
              r.speed_kmph === p.speed,
          )
          .map((r) => r[spec.column]);
        expect(p.mean).toBe(meanOf(vals));
        expect(p.min).toBe(Math.min(...vals));
        expect(p.max).toBe(Math.max(...vals));
      }
    }
  });
});

describe("cli", () => {
  it("fails cleanly on a missing file", async () => {
    expect(await run(["/nonexistent.csv", "--out", tmpdir()])).toBe(1);
  });

  it("rejects unknown formats", async () => {
    expect(await run([FIXTURE, "--format", "webp"])).toBe(2);
  });

  it("requires an input path", async () => {
    expect(await run(["--out", tmpdir()])).toBe(2);
  });

  it("writes figures for the fixture", async () => {
    const dir = mkdtempSync(join(tmpdir(), "figgen-cli-"));
    expect(await run([FIXTURE, "--out", dir])).toBe(0);
    expect(existsSync(join(dir, "fairness.svg"))).toBe(true);
  });
});
