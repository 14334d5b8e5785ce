/** Error hierarchy mirroring the engine's: config vs data vs runtime. */

export class DivselError extends Error {
  /** Engine-side exception class name, e.g. "MissingFieldError". */
  readonly kind: string;

  constructor(kind: string, message: string) {
    super(message);
    this.name = new.target.name;
    this.kind = kind;
  }
}

export class ConfigError extends DivselError {}

export class DataError extends DivselError {}

export class UnknownIdError extends DataError {
  constructor(message: string) {
    super("UnknownIdError", message);
  }
}

export class DimensionMismatchError extends DataError {
  constructor(message: string) {
    super("DimensionMismatchError", message);
  }
}

export class EngineRuntimeError extends DivselError {}

/** Map a CLI failure (exit code + stderr JSON) to the matching error class. */
export function errorFromCli(exitCode: number, stderr: string): DivselError {
  let kind = "RuntimeError";
  let message = stderr.trim() || `divsel exited with code ${exitCode}`;
  for (const line of stderr.trim().split("\n").reverse()) {
    try {
      const parsed = JSON.parse(line) as { error?: { kind?: string; message?: string } };
      if (parsed.error) {
        kind = parsed.error.kind ?? kind;
        message = parsed.error.message ?? message;
        break;
      }
    } catch {
      // progress output, keep scanning
    }
  }
  if (exitCode === 1) return new ConfigError(kind, message);
  if (exitCode === 2) return new DataError(kind, message);
  return new EngineRuntimeError(kind, message);
}
