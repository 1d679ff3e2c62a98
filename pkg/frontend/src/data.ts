/**
 * Typed readers for sweep harness artifacts.
 *
 * A sweep leaves two files behind: results.csv (one row per recorded
 * training loss) and summary.json (per-cell argmins plus an optional
 * convergence-rate fit). Both readers validate shape and fail loudly;
 * a silently mis-parsed column draws a wrong but plausible figure.
 *
 * Losses may be the literal string "inf" (a diverged run); those parse
 * to Infinity and the figure code decides how to treat them.
 */

export interface SweepRecord {
  param: string;
  width: number;
  depth: number;
  seed: number;
  step: number;
  eta: number;
  trainLoss: number;
}

export interface CellSummary {
  param: string;
  width: number;
  depth: number;
  step: number;
  eta_opt: number | null;
  loss_opt: number | null;
  eta_theory: number | null;
  n_overflow: number;
}

export interface RateFit {
  slope: number;
  intercept: number;
  widths: number[];
}

export interface SweepSummary {
  cells: CellSummary[];
  ratefit: RateFit | null;
}

const CSV_HEADER = "param,width,depth,seed,step,eta,train_loss";

// ─── results.csv ─────────────────────────────────────────────

function num(field: string, raw: string): number {
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  const v = Number(raw);
  if (raw === "" || Number.isNaN(v)) {
    throw new Error(`bad ${field} value ${JSON.stringify(raw)}`);
  }
  return v;
}

export function parseRecordsCsv(text: string): SweepRecord[] {
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  if (lines[0] !== CSV_HEADER) {
    throw new Error(`unexpected CSV header ${JSON.stringify(lines[0] ?? "")}, want ${CSV_HEADER}`);
  }
  const out: SweepRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cols = (lines[i] as string).split(",");
    if (cols.length !== 7) {
      throw new Error(`line ${i + 1}: expected 7 columns, got ${cols.length}`);
    }
    const [param, width, depth, seed, step, eta, loss] = cols as [
      string, string, string, string, string, string, string,
    ];
    out.push({
      param,
      width: num("width", width),
      depth: num("depth", depth),
      seed: num("seed", seed),
      step: num("step", step),
      eta: num("eta", eta),
      trainLoss: num("train_loss", loss),
    });
  }
  return out;
}

// ─── summary.json ────────────────────────────────────────────

function asNumberOrNull(obj: Record<string, unknown>, key: string): number | null {
  const v = obj[key];
  if (v === null || v === undefined) return null;
  if (typeof v !== "number") throw new Error(`summary field ${key} is not a number`);
  return v;
}

function asNumber(obj: Record<string, unknown>, key: string): number {
  const v = asNumberOrNull(obj, key);
  if (v === null) throw new Error(`summary field ${key} is missing`);
  return v;
}

export function parseSummary(text: string): SweepSummary {
  const raw = JSON.parse(text) as Record<string, unknown>;
  if (!Array.isArray(raw.cells)) throw new Error("summary has no cells array");
  const cells: CellSummary[] = raw.cells.map((c: Record<string, unknown>) => ({
    param: String(c.param),
    width: asNumber(c, "width"),
    depth: asNumber(c, "depth"),
    step: asNumber(c, "step"),
    eta_opt: asNumberOrNull(c, "eta_opt"),
    loss_opt: asNumberOrNull(c, "loss_opt"),
    eta_theory: asNumberOrNull(c, "eta_theory"),
    n_overflow: asNumber(c, "n_overflow"),
  }));
  let ratefit: RateFit | null = null;
  if (raw.ratefit !== null && raw.ratefit !== undefined) {
    const r = raw.ratefit as Record<string, unknown>;
    ratefit = {
      slope: asNumber(r, "slope"),
      intercept: asNumber(r, "intercept"),
      widths: (Array.isArray(r.widths) ? r.widths : []).map(Number),
    };
  }
  return { cells, ratefit };
}

// ─── filters ─────────────────────────────────────────────────

export interface Filter {
  param?: string;
  depth?: number;
  step?: number;
}

export function describeFilter(f: Filter): string {
  const parts = [
    f.param !== undefined ? `param=${f.param}` : null,
    f.depth !== undefined ? `depth=${f.depth}` : null,
    f.step !== undefined ? `step=${f.step}` : null,
  ].filter((p) => p !== null);
  return parts.length ? parts.join(", ") : "(no filter)";
}

/**
 * Narrow rows to one (param, depth, step) cell family. Unspecified
 * filter fields default to the sole value present; if several values
 * exist the caller must disambiguate, and an empty result names the
 * filter so the error is actionable.
 */
export function selectCellFamily<T extends { param: string; depth: number; step: number }>(
  rows: T[],
  filter: Filter,
): { rows: T[]; param: string; depth: number; step: number } {
  const resolve = <K>(name: string, given: K | undefined, values: K[]): K => {
    if (given !== undefined) return given;
    const uniq = [...new Set(values)];
    if (uniq.length !== 1) {
      throw new Error(`ambiguous ${name} (found ${uniq.join(", ")}); pass --${name}`);
    }
    return uniq[0] as K;
  };
  if (rows.length === 0) throw new Error(`no records match ${describeFilter(filter)}`);
  const param = resolve("param", filter.param, rows.map((r) => r.param));
  const depth = resolve("depth", filter.depth, rows.map((r) => r.depth));
  const step = resolve("step", filter.step, rows.map((r) => r.step));
  const out = rows.filter((r) => r.param === param && r.depth === depth && r.step === step);
  if (out.length === 0) {
    throw new Error(`no records match ${describeFilter({ param, depth, step })}`);
  }
  return { rows: out, param, depth, step };
}
