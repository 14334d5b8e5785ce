/** divsel-bindings: drive the divsel selection engine from TypeScript. */

export const VERSION = "0.1.0";

export {
  ConfigError,
  DataError,
  DimensionMismatchError,
  DivselError,
  EngineRuntimeError,
  UnknownIdError,
} from "./errors.js";
export type { ManifestFormat, ManifestTable } from "./manifest.js";
export { detectFormat, parseManifestText, serializeManifest, setFeatures } from "./manifest.js";
export type { CycleRecord, SelectionReport, TermScales } from "./report.js";
export { batchesOf, configFingerprint } from "./report.js";
export type { SessionOptions } from "./session.js";
export { BoundSession, boundRun, engineVersion } from "./session.js";
