/**
 * Small SVG toolkit: scales, decade ticks, path builders, text.
 *
 * Everything returns strings; figures.ts assembles them into one
 * <svg> document. No DOM, no dependencies, so the renderer runs the
 * same under vitest and the CLI.
 */

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_FRAME: Frame = {
  width: 640, height: 440, left: 64, right: 20, top: 34, bottom: 46,
};

export type ScaleFn = (v: number) => number;

// ─── Scales ──────────────────────────────────────────────────

export function logScale(domain: [number, number], range: [number, number]): ScaleFn {
  const d0 = Math.log10(domain[0]);
  const d1 = Math.log10(domain[1]);
  if (!(domain[0] > 0) || !(domain[1] > 0) || d0 === d1) {
    throw new Error(`log scale needs a positive non-degenerate domain, got [${domain}]`);
  }
  return (v: number) => range[0] + ((Math.log10(v) - d0) / (d1 - d0)) * (range[1] - range[0]);
}

export function linScale(domain: [number, number], range: [number, number]): ScaleFn {
  const span = domain[1] - domain[0];
  if (span === 0) throw new Error("linear scale needs a non-degenerate domain");
  return (v: number) => range[0] + ((v - domain[0]) / span) * (range[1] - range[0]);
}

/** Powers of 10 inside [lo, hi], e.g. (0.03, 20) -> [0.1, 1, 10]. */
export function decadeTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); Math.pow(10, e) <= hi * (1 + 1e-9); e++) {
    out.push(Math.pow(10, e));
  }
  return out;
}

export function tickLabel(v: number): string {
  const e = Math.log10(v);
  if (Number.isInteger(e) && (e < -3 || e > 4)) return `1e${e}`;
  return v >= 1 ? String(v) : v.toFixed(Math.min(6, -Math.floor(e)));
}

// ─── Elements ────────────────────────────────────────────────

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function fmt(x: number): string {
  return Number(x.toFixed(2)).toString();
}

/** Polyline through points; a null entry breaks the stroke (diverged run). */
export function brokenPath(pts: Array<[number, number] | null>): string {
  let d = "";
  let pen = false;
  for (const p of pts) {
    if (p === null || !Number.isFinite(p[0]) || !Number.isFinite(p[1])) {
      pen = false;
      continue;
    }
    d += `${pen ? "L" : "M"}${fmt(p[0])} ${fmt(p[1])}`;
    pen = true;
  }
  return d;
}

export function pathEl(d: string, stroke: string, width: number, extra = ""): string {
  if (d === "") return "";
  return `<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${extra ? " " + extra : ""}/>`;
}

export function circleEl(cx: number, cy: number, r: number, fill: string, extra = ""): string {
  return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}"${extra ? " " + extra : ""}/>`;
}

export function textEl(x: number, y: number, s: string, attrs = ""): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica, Arial, sans-serif"${attrs ? " " + attrs : ""}>${esc(s)}</text>`;
}

/** Interpolated series color, darker for larger index (wider network). */
export function seriesColor(i: number, count: number): string {
  const t = count <= 1 ? 1 : i / (count - 1);
  const lightness = Math.round(76 - t * 62);   // 76% down to 14%
  return `hsl(215, 48%, ${lightness}%)`;
}

// ─── Axes ────────────────────────────────────────────────────

export function logAxes(
  frame: Frame,
  x: ScaleFn,
  y: ScaleFn,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
): string {
  const parts: string[] = [];
  const x0 = frame.left;
  const x1 = frame.width - frame.right;
  const y0 = frame.height - frame.bottom;
  const y1 = frame.top;
  parts.push(pathEl(`M${x0} ${y0}L${x1} ${y0}`, "#333", 1));
  parts.push(pathEl(`M${x0} ${y0}L${x0} ${y1}`, "#333", 1));
  for (const t of decadeTicks(xDomain[0], xDomain[1])) {
    const px = x(t);
    parts.push(pathEl(`M${px.toFixed(2)} ${y0}L${px.toFixed(2)} ${y1}`, "#e2e2e2", 1));
    parts.push(pathEl(`M${px.toFixed(2)} ${y0}L${px.toFixed(2)} ${y0 + 5}`, "#333", 1));
    parts.push(textEl(px, y0 + 18, tickLabel(t), 'font-size="11" text-anchor="middle" fill="#333"'));
  }
  for (const t of decadeTicks(yDomain[0], yDomain[1])) {
    const py = y(t);
    parts.push(pathEl(`M${x0} ${py.toFixed(2)}L${x1} ${py.toFixed(2)}`, "#e2e2e2", 1));
    parts.push(pathEl(`M${x0 - 5} ${py.toFixed(2)}L${x0} ${py.toFixed(2)}`, "#333", 1));
    parts.push(textEl(x0 - 8, py + 4, tickLabel(t), 'font-size="11" text-anchor="end" fill="#333"'));
  }
  parts.push(textEl((x0 + x1) / 2, frame.height - 10, xLabel, 'font-size="12" text-anchor="middle" fill="#111"'));
  parts.push(
    `<text x="${14}" y="${(y0 + y1) / 2}" font-family="Helvetica, Arial, sans-serif" font-size="12" text-anchor="middle" fill="#111" transform="rotate(-90 14 ${(y0 + y1) / 2})">${esc(yLabel)}</text>`,
  );
  return parts.join("\n");
}

export function svgDoc(frame: Frame, body: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" viewBox="0 0 ${frame.width} ${frame.height}">\n<rect width="${frame.width}" height="${frame.height}" fill="white"/>\n${body}\n</svg>\n`;
}
