/**
 * Figure builders: records/summary in, one SVG document out.
 *
 * Two kinds. loss_vs_lr draws the per-width training-loss curves over
 * the learning-rate grid (log-log, darker = wider, thin per-seed lines
 * under a median line, argmin markers). argmin_vs_width draws how the
 * per-width optimal learning rate behaves as width grows: against the
 * theoretical limit (log-log deviation with the fitted rate line and
 * its slope printed to three decimals) when the summary carries one,
 * otherwise the raw argmin per width.
 */

import type { CellSummary, Filter, SweepRecord, SweepSummary } from "./data.js";
import { selectCellFamily } from "./data.js";
import {
  DEFAULT_FRAME,
  Frame,
  brokenPath,
  circleEl,
  logAxes,
  logScale,
  pathEl,
  seriesColor,
  svgDoc,
  textEl,
} from "./svg.js";

function median(xs: number[]): number {
  const s = [...xs].sort((a, b) => a - b);
  const mid = s.length >> 1;
  return s.length % 2 ? (s[mid] as number) : ((s[mid - 1] as number) + (s[mid] as number)) / 2;
}

function padLog(domain: [number, number], f = 1.15): [number, number] {
  if (domain[0] === domain[1]) return [domain[0] / 2, domain[1] * 2];
  return [domain[0] / f, domain[1] * f];
}

// ─── loss vs learning rate ───────────────────────────────────

export function renderLossVsLr(records: SweepRecord[], filter: Filter = {}, frame: Frame = DEFAULT_FRAME): string {
  const { rows, param, depth, step } = selectCellFamily(records, filter);
  const widths = [...new Set(rows.map((r) => r.width))].sort((a, b) => a - b);
  if (widths.length < 2) {
    throw new Error(`need curves for at least 2 widths, found ${widths.length}`);
  }

  const finite = rows.filter((r) => Number.isFinite(r.trainLoss) && r.trainLoss > 0);
  if (finite.length === 0) throw new Error("every selected loss diverged; nothing to draw");
  const xDomain = padLog([Math.min(...rows.map((r) => r.eta)), Math.max(...rows.map((r) => r.eta))]);
  const yDomain = padLog([
    Math.min(...finite.map((r) => r.trainLoss)),
    Math.max(...finite.map((r) => r.trainLoss)),
  ]);
  const x = logScale(xDomain, [frame.left, frame.width - frame.right]);
  const y = logScale(yDomain, [frame.height - frame.bottom, frame.top]);

  const body: string[] = [];
  body.push(logAxes(frame, x, y, xDomain, yDomain, "learning rate", "train loss"));

  const markers: string[] = [];
  const legend: string[] = [];
  widths.forEach((w, i) => {
    const color = seriesColor(i, widths.length);
    const wRows = rows.filter((r) => r.width === w);
    const seeds = [...new Set(wRows.map((r) => r.seed))].sort((a, b) => a - b);
    const etas = [...new Set(wRows.map((r) => r.eta))].sort((a, b) => a - b);

    const curve = (losses: Map<number, number>): Array<[number, number] | null> =>
      etas.map((e) => {
        const v = losses.get(e);
        return v !== undefined && Number.isFinite(v) && v > 0 ? [x(e), y(v)] : null;
      });

    for (const s of seeds) {
      const bySeed = new Map(wRows.filter((r) => r.seed === s).map((r) => [r.eta, r.trainLoss]));
      body.push(pathEl(brokenPath(curve(bySeed)), color, 1, 'opacity="0.35" class="seed-line"'));
    }

    // median over seeds; with a single seed its curve is already the summary
    const med = new Map(
      etas.map((e) => {
        const ls = wRows.filter((r) => r.eta === e).map((r) => r.trainLoss);
        return [e, median(ls)] as [number, number];
      }),
    );
    if (seeds.length > 1) {
      body.push(pathEl(brokenPath(curve(med)), color, 2.2, 'class="median-line"'));
    }

    const summaryCurve = seeds.length > 1 ? med : new Map(wRows.map((r) => [r.eta, r.trainLoss]));
    let best: [number, number] | null = null;
    for (const [e, v] of summaryCurve) {
      if (Number.isFinite(v) && (best === null || v < best[1])) best = [e, v];
    }
    if (best !== null) {
      markers.push(circleEl(x(best[0]), y(best[1]), 4.5, color, 'stroke="white" stroke-width="1.5" class="argmin-marker"'));
    }

    const ly = frame.top + 14 + i * 16;
    const lx = frame.width - frame.right - 130;
    legend.push(pathEl(`M${lx} ${ly - 4}L${lx + 22} ${ly - 4}`, color, 2.5));
    legend.push(textEl(lx + 28, ly, `n = ${w}`, 'font-size="11" fill="#111"'));
  });

  body.push(...markers, ...legend);
  body.push(textEl(frame.left, 18, `${param}, depth ${depth}, step ${step}`, 'font-size="13" fill="#111" font-weight="bold"'));
  return svgDoc(frame, body.join("\n"));
}

// ─── optimal learning rate vs width ──────────────────────────

export function renderArgminVsWidth(summary: SweepSummary, filter: Filter = {}, frame: Frame = DEFAULT_FRAME): string {
  const { rows: cells, param, depth, step } = selectCellFamily(summary.cells, filter);
  const byWidth = [...cells].sort((a, b) => a.width - b.width);
  const withOpt = byWidth.filter((c): c is CellSummary & { eta_opt: number } => c.eta_opt !== null);
  if (withOpt.length === 0) throw new Error("no cell has an optimum (all grid points diverged?)");
  const theoryMode = withOpt.every((c) => c.eta_theory !== null);

  // deviation mode drops exact hits: |argmin - limit| = 0 has no log point
  const pts: Array<[number, number]> = theoryMode
    ? withOpt
        .map((c): [number, number] => [c.width, Math.abs(c.eta_opt - (c.eta_theory as number))])
        .filter((p) => p[1] > 0)
    : withOpt.map((c): [number, number] => [c.width, c.eta_opt]);
  if (pts.length === 0) throw new Error("every argmin matches the limit exactly; nothing to draw on a log scale");

  const xDomain = padLog([pts[0]![0], pts[pts.length - 1]![0]], 1.3);
  const yDomain = padLog([Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))], 1.5);
  const x = logScale(xDomain, [frame.left, frame.width - frame.right]);
  const y = logScale(yDomain, [frame.height - frame.bottom, frame.top]);

  const body: string[] = [];
  body.push(
    logAxes(frame, x, y, xDomain, yDomain, "width n", theoryMode ? "|argmin - limit|" : "optimal learning rate"),
  );

  const color = seriesColor(3, 4);
  body.push(pathEl(brokenPath(pts.map((p) => [x(p[0]), y(p[1])])), color, 1.6, 'class="argmin-trend"'));
  for (const p of pts) body.push(circleEl(x(p[0]), y(p[1]), 4, color, 'stroke="white" stroke-width="1.2"'));

  if (theoryMode && summary.ratefit !== null) {
    const { slope, intercept } = summary.ratefit;
    const ends = [xDomain[0], xDomain[1]] as const;
    const line: Array<[number, number]> = ends.map((n) => [x(n), y(Math.exp(intercept) * Math.pow(n, slope))]);
    body.push(pathEl(brokenPath(line), "#c0392b", 1.4, 'stroke-dasharray="6 3" class="rate-fit-line"'));
    body.push(
      textEl(
        frame.width - frame.right - 10,
        frame.top + 16,
        `fitted slope = ${slope.toFixed(3)}`,
        'font-size="12" text-anchor="end" fill="#c0392b" class="slope-annotation"',
      ),
    );
    // half-power reference anchored on the first point, for the eye
    const [n0, d0] = pts[0]!;
    const ref: Array<[number, number]> = ends.map((n) => [x(n), y(d0 * Math.sqrt(n0 / n))]);
    body.push(pathEl(brokenPath(ref), "#999", 1, 'stroke-dasharray="2 3" class="half-power-reference"'));
    body.push(textEl(frame.width - frame.right - 10, frame.top + 32, "reference slope -1/2", 'font-size="10" text-anchor="end" fill="#999"'));
  }

  body.push(textEl(frame.left, 18, `${param}, depth ${depth}, step ${step}`, 'font-size="13" fill="#111" font-weight="bold"'));
  return svgDoc(frame, body.join("\n"));
}
