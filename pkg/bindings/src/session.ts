import { spawn } from "node:child_process";
import { copyFile, mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { DataError, errorFromCli } from "./errors.js";
import {
  ManifestFormat,
  detectFormat,
  parseManifestText,
  serializeManifest,
  setFeatures,
} from "./manifest.js";
import { SelectionReport, batchesOf } from "./report.js";

export interface SessionOptions {
  /** Python executable running the engine; default DIVSEL_PYTHON or python3. */
  python?: string;
}

function pythonExe(opts?: SessionOptions): string {
  return opts?.python ?? process.env.DIVSEL_PYTHON ?? "python3";
}

function runCli(python: string, args: string[]): Promise<void> {
  return new Promise((resolve, reject) => {
    const child = spawn(python, ["-m", "divsel", ...args], { stdio: ["ignore", "pipe", "pipe"] });
    let stderr = "";
    child.stderr.on("data", (chunk) => (stderr += String(chunk)));
    child.stdout.resume();
    child.on("error", (exc) => reject(new DataError("RuntimeError", `cannot run ${python}: ${exc}`)));
    child.on("close", (code) => {
      if (code === 0) resolve();
      else reject(errorFromCli(code ?? 3, stderr));
    });
  });
}

export async function engineVersion(opts?: SessionOptions): Promise<string> {
  const python = pythonExe(opts);
  return new Promise((resolve, reject) => {
    const child = spawn(python, ["-m", "divsel", "--version"], { stdio: ["ignore", "pipe", "pipe"] });
    let out = "";
    child.stdout.on("data", (chunk) => (out += String(chunk)));
    child.on("error", (exc) => reject(new DataError("RuntimeError", `cannot run ${python}: ${exc}`)));
    child.on("close", () => resolve(out.trim()));
  });
}

/**
 * One loaded manifest plus one run configuration.
 *
 * The session works on a private copy of the manifest, so feature updates
 * never touch the caller's file; all selection logic stays in the engine,
 * reached through its CLI and file formats.
 */
export class BoundSession {
  private readonly dir: string;
  private readonly manifestPath: string;
  private readonly format: ManifestFormat;
  private readonly configPath: string;
  private readonly python: string;
  private runCount = 0;
  private lastReport: SelectionReport | null = null;

  private constructor(dir: string, manifestPath: string, format: ManifestFormat, configPath: string, python: string) {
    this.dir = dir;
    this.manifestPath = manifestPath;
    this.format = format;
    this.configPath = configPath;
    this.python = python;
  }

  static async load(
    manifestPath: string,
    config: Record<string, unknown>,
    opts?: SessionOptions,
  ): Promise<BoundSession> {
    const format = detectFormat(manifestPath);
    const dir = await mkdtemp(join(tmpdir(), "divsel-session-"));
    const workManifest = join(dir, `manifest.${format}`);
    try {
      await copyFile(manifestPath, workManifest);
    } catch (exc) {
      await rm(dir, { recursive: true, force: true });
      throw new DataError("ParseError", `cannot read manifest ${manifestPath}: ${exc}`);
    }
    const workConfig = join(dir, "config.json");
    await writeFile(workConfig, JSON.stringify(config, null, 2) + "\n", "utf8");
    return new BoundSession(dir, workManifest, format, workConfig, pythonExe(opts));
  }

  /** Run the configured schedule; returns per-cycle id lists (0 = init). */
  async run(): Promise<string[][]> {
    const out = join(this.dir, `report-${this.runCount++}.json`);
    await runCli(this.python, [
      "select",
      "--manifest", this.manifestPath,
      "--config", this.configPath,
      "--out", out,
      "--quiet",
    ]);
    this.lastReport = JSON.parse(await readFile(out, "utf8")) as SelectionReport;
    return batchesOf(this.lastReport);
  }

  getReport(): SelectionReport | null {
    return this.lastReport;
  }

  /** Replace stored feature vectors; later runs see the refreshed values. */
  async updateFeatures(ids: string[], matrix: number[][]): Promise<void> {
    if (ids.length === 0 && matrix.length === 0) return;
    const table = parseManifestText(await readFile(this.manifestPath, "utf8"), this.format);
    setFeatures(table, ids, matrix);
    await writeFile(this.manifestPath, serializeManifest(table), "utf8");
  }

  async dispose(): Promise<void> {
    await rm(this.dir, { recursive: true, force: true });
  }
}

/** One-shot convenience: load, run, dispose; returns per-cycle id lists. */
export async function boundRun(
  manifestPath: string,
  config: Record<string, unknown>,
  opts?: SessionOptions,
): Promise<string[][]> {
  const session = await BoundSession.load(manifestPath, config, opts);
  try {
    return await session.run();
  } finally {
    await session.dispose();
  }
}
