/**
 * End-to-end check against real sweep artifacts (fixtures are verbatim
 * copies of the one-step transfer and drift runs from the training
 * package's acceptance suite): both figure kinds render from both runs,
 * and the argmin figure's printed slope is exactly the summary's
 * ratefit slope at three decimals.
 */
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { parseSummary } from "../src/data.js";
import { renderArgminVsWidth, renderLossVsLr } from "../src/figures.js";
import { parseRecordsCsv } from "../src/data.js";

const fixturePath = (rel: string) => fileURLToPath(new URL(`./fixtures/${rel}`, import.meta.url));
const fixture = (rel: string) => readFileSync(fixturePath(rel), "utf8");

describe("rendering the one-step transfer run (muP)", () => {
  it("draws loss curves for all four widths", () => {
    const svg = renderLossVsLr(parseRecordsCsv(fixture("criterion1/results.csv")));
    expect(svg.startsWith("<svg")).toBe(true);
    for (const n of [128, 512, 2048, 4096]) expect(svg).toContain(`n = ${n}`);
    expect((svg.match(/class="median-line"/g) ?? []).length).toBe(4);
    expect((svg.match(/class="argmin-marker"/g) ?? []).length).toBe(4);
  });

  it("annotates the argmin figure with the ratefit slope to 3 decimals", () => {
    const summary = parseSummary(fixture("criterion1/summary.json"));
    const svg = renderArgminVsWidth(summary);
    const m = /fitted slope = (-?\d+\.\d{3})</.exec(svg);
    expect(m).not.toBeNull();
    expect(m![1]).toBe(summary.ratefit!.slope.toFixed(3));
  });
});

describe("rendering the drift run (SP)", () => {
  it("draws loss curves", () => {
    const svg = renderLossVsLr(parseRecordsCsv(fixture("criterion3/results.csv")));
    expect(svg.startsWith("<svg")).toBe(true);
    expect((svg.match(/class="seed-line"/g) ?? []).length).toBe(12);
  });

  it("draws raw argmins without a slope annotation", () => {
    const svg = renderArgminVsWidth(parseSummary(fixture("criterion3/summary.json")));
    expect(svg).toContain("optimal learning rate");
    expect(svg).not.toContain("slope-annotation");
  });
});

describe("cli", () => {
  it("renders both kinds end to end", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const curves = join(dir, "curves.svg");
    const conv = join(dir, "convergence.svg");
    expect(main(["render", "loss_vs_lr", "--in", fixturePath("criterion1/results.csv"), "--out", curves])).toBe(0);
    expect(main(["render", "argmin_vs_width", "--in", fixturePath("criterion1/summary.json"), "--out", conv])).toBe(0);
    expect(readFileSync(curves, "utf8")).toContain("train loss");
    expect(readFileSync(conv, "utf8")).toContain("fitted slope");
  });

  it("exits nonzero on an unknown kind and on an empty selection", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    expect(main(["render", "sideways", "--in", "x", "--out", join(dir, "o.svg")])).toBe(1);
    expect(
      main([
        "render", "loss_vs_lr",
        "--in", fixturePath("criterion1/results.csv"),
        "--out", join(dir, "o.svg"),
        "--param", "ntp",
      ]),
    ).toBe(1);
  });
});
