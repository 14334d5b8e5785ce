/** Just enough manifest file handling to refresh feature vectors in place.
 *
 * Rows are kept verbatim in their on-disk representation (strings for CSV
 * cells, JSON values for JSONL) so rewriting a manifest only changes the
 * cells that were actually updated.
 */

import Papa from "papaparse";

import { DataError, DimensionMismatchError, UnknownIdError } from "./errors.js";

export type ManifestFormat = "csv" | "jsonl";

export interface ManifestTable {
  format: ManifestFormat;
  columns: string[];
  rows: Record<string, unknown>[];
  featureDim: number;
}

export function detectFormat(path: string): ManifestFormat {
  if (path.endsWith(".csv")) return "csv";
  if (path.endsWith(".jsonl") || path.endsWith(".ndjson")) return "jsonl";
  throw new DataError("SchemaError", `cannot infer manifest format from ${path}`);
}

function featureDimOf(columns: string[]): number {
  let dim = 0;
  for (const name of columns) {
    const m = /^feature_(\d+)$/.exec(name);
    if (m) dim = Math.max(dim, Number(m[1]) + 1);
  }
  return dim;
}

export function parseManifestText(text: string, format: ManifestFormat): ManifestTable {
  if (format === "csv") {
    const parsed = Papa.parse<Record<string, string>>(text.trim(), {
      header: true,
      skipEmptyLines: true,
    });
    if (parsed.errors.length > 0) {
      const first = parsed.errors[0];
      throw new DataError("ParseError", `CSV parse error: ${first.message} (row ${first.row})`);
    }
    const columns = parsed.meta.fields ?? [];
    return {
      format,
      columns,
      rows: parsed.data,
      featureDim: featureDimOf(columns),
    };
  }
  const rows: Record<string, unknown>[] = [];
  let columns: string[] = [];
  for (const [i, line] of text.split("\n").entries()) {
    if (!line.trim()) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (exc) {
      throw new DataError("ParseError", `line ${i + 1}: invalid JSON (${String(exc)})`);
    }
    if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
      throw new DataError("ParseError", `line ${i + 1}: each line must be a JSON object`);
    }
    const record = obj as Record<string, unknown>;
    if (rows.length === 0) columns = Object.keys(record).sort();
    rows.push(record);
  }
  if (rows.length === 0) throw new DataError("SchemaError", "manifest has no samples");
  return { format: "jsonl", columns, rows, featureDim: featureDimOf(columns) };
}

export function serializeManifest(table: ManifestTable): string {
  if (table.format === "csv") {
    return Papa.unparse(
      { fields: table.columns, data: table.rows.map((r) => table.columns.map((c) => r[c])) },
      { newline: "\n" },
    ) + "\n";
  }
  return table.rows.map((r) => JSON.stringify(r, Object.keys(r).sort())).join("\n") + "\n";
}

/** Replace the stored feature vectors of `ids` (row order preserved). */
export function setFeatures(table: ManifestTable, ids: string[], matrix: number[][]): void {
  if (ids.length !== matrix.length) {
    throw new DimensionMismatchError(
      `feature matrix has ${matrix.length} rows for ${ids.length} ids`,
    );
  }
  if (ids.length === 0) return;
  if (table.featureDim === 0) {
    throw new DataError("MissingFieldError", "manifest carries no feature vectors to update");
  }
  for (const row of matrix) {
    if (row.length !== table.featureDim) {
      throw new DimensionMismatchError(
        `feature vectors must have length ${table.featureDim}, got ${row.length}`,
      );
    }
  }
  const index = new Map<string, number>();
  table.rows.forEach((row, i) => index.set(String(row.id), i));
  ids.forEach((id, k) => {
    const at = index.get(id);
    if (at === undefined) throw new UnknownIdError(`unknown sample id ${JSON.stringify(id)}`);
    const row = table.rows[at];
    matrix[k].forEach((value, f) => {
      row[`feature_${f}`] = table.format === "csv" ? String(value) : value;
    });
  });
}
