#!/usr/bin/env node
/**
 * Render sweep artifacts to SVG figures.
 *
 *   lrtransfer-plots render loss_vs_lr     --in results.csv  --out fig.svg
 *   lrtransfer-plots render argmin_vs_width --in summary.json --out fig.svg
 *
 * Optional --param/--depth/--step narrow the selection when an input
 * holds more than one cell family; --in may repeat to pool several
 * results.csv files into one loss_vs_lr figure. Exit 1 on any usage or
 * selection error, with the reason on stderr.
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { parseArgs } from "node:util";

import type { Filter } from "./data.js";
import { parseRecordsCsv, parseSummary } from "./data.js";
import { renderArgminVsWidth, renderLossVsLr } from "./figures.js";

const USAGE =
  "usage: render <loss_vs_lr|argmin_vs_width> --in <path> [--in <path>...] --out <file.svg> [--param P] [--depth K] [--step T]";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string", multiple: true },
        out: { type: "string" },
        param: { type: "string" },
        depth: { type: "string" },
        step: { type: "string" },
      },
    });
  } catch (e) {
    console.error((e as Error).message);
    console.error(USAGE);
    return 1;
  }
  const [command, kind] = parsed.positionals;
  const inputs = parsed.values.in ?? [];
  const out = parsed.values.out;
  if (command !== "render" || !kind || inputs.length === 0 || !out) {
    console.error(USAGE);
    return 1;
  }

  const filter: Filter = {};
  if (parsed.values.param !== undefined) filter.param = parsed.values.param;
  if (parsed.values.depth !== undefined) filter.depth = Number(parsed.values.depth);
  if (parsed.values.step !== undefined) filter.step = Number(parsed.values.step);

  let svg: string;
  try {
    if (kind === "loss_vs_lr") {
      const records = inputs.flatMap((p) => parseRecordsCsv(readFileSync(p, "utf8")));
      svg = renderLossVsLr(records, filter);
    } else if (kind === "argmin_vs_width") {
      if (inputs.length !== 1) {
        console.error("argmin_vs_width takes exactly one summary.json");
        return 1;
      }
      svg = renderArgminVsWidth(parseSummary(readFileSync(inputs[0] as string, "utf8")), filter);
    } else {
      console.error(`unknown figure kind ${JSON.stringify(kind)}`);
      console.error(USAGE);
      return 1;
    }
  } catch (e) {
    console.error((e as Error).message);
    return 1;
  }

  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
  return 0;
}

let directRun = false;
if (process.argv[1] !== undefined) {
  try {
    directRun = fileURLToPath(import.meta.url) === realpathSync(process.argv[1]);
  } catch {
    // argv[1] is not a file (embedded runner); stay importable
  }
}
if (directRun) {
  process.exit(main(process.argv.slice(2)));
}
