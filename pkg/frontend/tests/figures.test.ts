import { describe, expect, it } from "vitest";

import type { SweepRecord, SweepSummary } from "../src/data.js";
import { renderArgminVsWidth, renderLossVsLr } from "../src/figures.js";

const count = (svg: string, cls: string) => (svg.match(new RegExp(`class="${cls}"`, "g")) ?? []).length;

function syntheticRecords(seeds: number[], widths = [64, 128]): SweepRecord[] {
  const out: SweepRecord[] = [];
  for (const width of widths) {
    for (const seed of seeds) {
      for (const eta of [0.1, 0.2, 0.4]) {
        // parabola-ish in log eta with a known minimum at 0.2
        const loss = 0.5 + Math.pow(Math.log(eta / 0.2), 2) + 0.01 * seed;
        out.push({ param: "mup", width, depth: 3, seed, step: 1, eta, trainLoss: loss });
      }
    }
  }
  return out;
}

describe("renderLossVsLr", () => {
  it("draws per-seed thin lines, a median per width, and one argmin marker each", () => {
    const svg = renderLossVsLr(syntheticRecords([0, 1, 2]));
    expect(count(svg, "seed-line")).toBe(6);
    expect(count(svg, "median-line")).toBe(2);
    expect(count(svg, "argmin-marker")).toBe(2);
    expect(svg).toContain("n = 64");
    expect(svg).toContain("n = 128");
  });

  it("omits the median with a single seed but still marks the argmin", () => {
    const svg = renderLossVsLr(syntheticRecords([0]));
    expect(count(svg, "seed-line")).toBe(2);
    expect(count(svg, "median-line")).toBe(0);
    expect(count(svg, "argmin-marker")).toBe(2);
  });

  it("breaks the stroke across diverged grid points", () => {
    const recs = syntheticRecords([0]);
    recs[2]!.trainLoss = Infinity;   // width 64, largest eta
    const svg = renderLossVsLr(recs);
    expect(count(svg, "seed-line")).toBe(2);
  });

  it("needs at least two widths", () => {
    expect(() => renderLossVsLr(syntheticRecords([0], [64]))).toThrow(/at least 2 widths/);
  });

  it("names the filter on an empty selection", () => {
    expect(() => renderLossVsLr(syntheticRecords([0]), { param: "ntp" })).toThrow(/param=ntp/);
  });
});

function syntheticSummary(theory: boolean): SweepSummary {
  const widths = [64, 128, 256, 512];
  return {
    cells: widths.map((width, i) => ({
      param: "mup",
      width,
      depth: 3,
      step: 1,
      eta_opt: theory ? 1.0 + Math.pow(width, -0.5) : 0.5 / width,
      loss_opt: 0.1,
      eta_theory: theory ? 1.0 : null,
      n_overflow: i,
    })),
    ratefit: theory ? { slope: -0.512345, intercept: 0.3, widths } : null,
  };
}

describe("renderArgminVsWidth", () => {
  it("annotates the fitted slope to three decimals in theory mode", () => {
    const svg = renderArgminVsWidth(syntheticSummary(true));
    expect(count(svg, "slope-annotation")).toBe(1);
    expect(svg).toContain("fitted slope = -0.512");
    expect(count(svg, "rate-fit-line")).toBe(1);
    expect(count(svg, "half-power-reference")).toBe(1);
    expect(svg).toContain("|argmin - limit|");
  });

  it("falls back to raw argmins when no theory reference exists", () => {
    const svg = renderArgminVsWidth(syntheticSummary(false));
    expect(count(svg, "slope-annotation")).toBe(0);
    expect(count(svg, "rate-fit-line")).toBe(0);
    expect(svg).toContain("optimal learning rate");
    expect(count(svg, "argmin-trend")).toBe(1);
  });

  it("skips cells without an optimum and rejects a fully empty column", () => {
    const s = syntheticSummary(false);
    s.cells[0]!.eta_opt = null;
    expect(renderArgminVsWidth(s)).toContain("argmin-trend");
    for (const c of s.cells) c.eta_opt = null;
    expect(() => renderArgminVsWidth(s)).toThrow(/no cell has an optimum/);
  });
});
