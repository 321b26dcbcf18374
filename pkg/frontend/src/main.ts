#!/usr/bin/env node
/** figure-gen <results.csv> --out <dir> [--format png|svg] */

import { readFileSync } from "node:fs";

import { parseResultsCsv } from "./csv.js";
import { renderAll, writeFigures, type Format } from "./figures.js";

function usage(): string {
  return "usage: figure-gen <results.csv> --out <dir> [--format png|svg]";
}

export async function run(argv: string[]): Promise<number> {
  let csvPath: string | undefined;
  let outDir = ".";
  let format: Format = "svg";
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--out") {
      outDir = argv[++i];
      if (outDir === undefined) {
        console.error(usage());
        return 2;
      }
    } else if (a === "--format") {
      const v = argv[++i];
      if (v !== "png" && v !== "svg") {
        console.error(`figure-gen: unknown format ${v ?? "(missing)"}; expected png or svg`);
        return 2;
      }
      format = v;
    } else if (a === "--help" || a === "-h") {
      console.log(usage());
      return 0;
    } else if (a.startsWith("--")) {
      console.error(`figure-gen: unknown option ${a}\n${usage()}`);
      return 2;
    } else if (csvPath === undefined) {
      csvPath = a;
    } else {
      console.error(`figure-gen: unexpected argument ${a}\n${usage()}`);
      return 2;
    }
  }
  if (!csvPath) {
    console.error(usage());
    return 2;
  }

  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (err) {
    console.error(`figure-gen: cannot read ${csvPath}: ${(err as Error).message}`);
    return 1;
  }
  try {
    const rows = parseResultsCsv(text);
    const figures = renderAll(rows, outDir, format);
    await writeFigures(figures, format);
    for (const f of figures) {
      console.log(`wrote ${f.path}`);
    }
    return 0;
  } catch (err) {
    console.error(`figure-gen: ${(err as Error).message}`);
    return 1;
  }
}

import { fileURLToPath } from "node:url";

const isMain = process.argv[1] !== undefined && fileURLToPath(import.meta.url) === process.argv[1];
if (isMain) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
