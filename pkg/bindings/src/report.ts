/** Typed view of the selection report JSON (see docs/formats.md). */

export interface CycleRecord {
  index: number;
  phase: "init" | "select";
  checkpoint: number;
  cycle_budget: number;
  ids: string[];
  frames: number;
  boxes: number;
  cost: number;
  cumulative_cost: number;
  retrain_point: boolean;
}

export interface TermScales {
  spatial: number | null;
  temporal: number | null;
  feature: number | null;
}

export interface SelectionReport {
  strategy: string;
  seed: number;
  config: Record<string, unknown>;
  scales: TermScales | null;
  source_manifest: string;
  num_samples: number;
  cycles: CycleRecord[];
  total_cost: number;
  warnings: string[];
}

/** Per-cycle id lists; index 0 is the initialization batch. */
export function batchesOf(report: SelectionReport): string[][] {
  return report.cycles.map((c) => [...c.ids]);
}

function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") return JSON.stringify(value);
  if (Array.isArray(value)) return `[${value.map(stableStringify).join(",")}]`;
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
  return `{${entries.join(",")}}`;
}

/**
 * Fingerprint of the fully resolved configuration, including the derived
 * normalization scales: refreshing features between cycles changes the
 * feature scale and therefore this value.
 */
export function configFingerprint(report: SelectionReport): string {
  return stableStringify({ config: report.config, scales: report.scales });
}
