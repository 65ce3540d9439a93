/**
 * TypeScript bindings for the segclass change point detector.
 *
 * The bindings shell out to the segclass command line (the library's
 * stable external interface) and parse its schema-versioned JSON output,
 * so results are identical to direct CLI invocations for the same data,
 * configuration and seed. Matrices cross the boundary as CSV with
 * shortest round-trip number formatting, which IEEE-754 doubles survive
 * exactly in both directions.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export type Method = "rf" | "knn" | "mean";

export interface DetectOptions {
  method?: Method;
  /** minimum relative segment length (default 0.01) */
  delta?: number;
  /** permutation-test p-value cutoff (default 0.02) */
  threshold?: number;
  /** number of pseudo-permutations (default 199) */
  permutations?: number;
  /** ratio floor parameter (default exp(-6)) */
  eta?: number;
  seed?: number;
  /** cap on compute threads; never changes results */
  threads?: number;
  trees?: number;
  maxDepth?: number;
  mtry?: number;
  minLeaf?: number;
  knnCap?: number;
}

export interface SplitRecord {
  u: number;
  v: number;
  guesses: number[];
  s1: number | null;
  sHat: number | null;
  step1MaxGain: number;
  bestGain: number;
  pValue: number | null;
  accepted: boolean;
}

export interface DetectionResult {
  boundaries: number[];
  changepoints: number[];
  splits: SplitRecord[];
  /** the full CLI output document, untouched */
  document: Record<string, unknown>;
}

/** Resolve the Python interpreter that has segclass installed. */
function pythonExecutable(): string {
  return process.env.SEGCLASS_PYTHON ?? "python3";
}

function runCli(args: string[]): void {
  const proc = spawnSync(pythonExecutable(), ["-m", "segclass.cli", ...args], {
    encoding: "utf8",
    maxBuffer: 1 << 28,
  });
  if (proc.error) {
    throw new Error(`failed to launch the segclass CLI: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    const detail = proc.stderr.trim().split("\n").slice(-3).join("\n");
    throw new Error(`segclass CLI exited with ${proc.status}: ${detail}`);
  }
}

function validateMatrix(matrix: number[][]): { n: number; d: number } {
  if (!Array.isArray(matrix) || matrix.length === 0) {
    throw new TypeError("matrix must be a non-empty array of rows");
  }
  const first = matrix[0];
  if (!Array.isArray(first)) {
    throw new TypeError("matrix must be 2-D: an array of number arrays");
  }
  const d = first.length;
  if (d === 0) {
    throw new TypeError("matrix rows must be non-empty");
  }
  for (let i = 0; i < matrix.length; i++) {
    const row = matrix[i];
    if (!Array.isArray(row) || row.length !== d) {
      throw new TypeError(
        `row ${i} has ${Array.isArray(row) ? row.length : "no"} entries, expected ${d}`,
      );
    }
    for (let j = 0; j < d; j++) {
      const value = row[j];
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new TypeError(`matrix[${i}][${j}] is not a finite number`);
      }
    }
  }
  return { n: matrix.length, d };
}

function matrixToCsv(matrix: number[][], d: number): string {
  const header = Array.from({ length: d }, (_, j) => `c${j}`).join(",");
  const lines = matrix.map((row) => row.map((x) => String(x)).join(","));
  return `${header}\n${lines.join("\n")}\n`;
}

function optionFlags(options: DetectOptions): string[] {
  const flags: string[] = ["--method", options.method ?? "rf"];
  const mapping: Array<[string, number | undefined]> = [
    ["--delta", options.delta],
    ["--threshold", options.threshold],
    ["--permutations", options.permutations],
    ["--eta", options.eta],
    ["--seed", options.seed],
    ["--threads", options.threads],
    ["--trees", options.trees],
    ["--max-depth", options.maxDepth],
    ["--mtry", options.mtry],
    ["--min-leaf", options.minLeaf],
    ["--knn-cap", options.knnCap],
  ];
  for (const [flag, value] of mapping) {
    if (value !== undefined) {
      flags.push(flag, String(value));
    }
  }
  return flags;
}

/**
 * Detect change points in an n-by-d matrix (rows in time order).
 *
 * Returns the boundaries (including 0 and n), the interior change points,
 * and the per-segment split log with p-values, exactly as the CLI reports
 * them for the same options and seed.
 */
export function detect(
  matrix: number[][],
  options: DetectOptions = {},
): DetectionResult {
  const { d } = validateMatrix(matrix);
  const workdir = mkdtempSync(join(tmpdir(), "segclass-bindings-"));
  try {
    const dataPath = join(workdir, "data.csv");
    const docPath = join(workdir, "result.json");
    writeFileSync(dataPath, matrixToCsv(matrix, d), "utf8");
    runCli([
      "detect",
      "--input",
      dataPath,
      "--output",
      docPath,
      ...optionFlags(options),
    ]);
    const document = JSON.parse(readFileSync(docPath, "utf8")) as Record<
      string,
      unknown
    >;
    const splitLog = document.split_log as Array<Record<string, unknown>>;
    return {
      boundaries: document.boundaries as number[],
      changepoints: document.changepoints as number[],
      splits: splitLog.map((r) => ({
        u: r.u as number,
        v: r.v as number,
        guesses: r.guesses as number[],
        s1: r.s1 as number | null,
        sHat: r.s_hat as number | null,
        step1MaxGain: r.step1_max_gain as number,
        bestGain: r.best_gain as number,
        pValue: r.p_value as number | null,
        accepted: r.accepted as boolean,
      })),
      document,
    };
  } finally {
    rmSync(workdir, { recursive: true, force: true });
  }
}

/**
 * Mirror of the library's scenario generators, for testing: produces the
 * same seeded data the CLI benchmark uses (e.g. "cim", "cic", "dirichlet",
 * "fp:cim", "variable:dirichlet:2000:20").
 */
export function simulate(scenario: string, seed: number): number[][] {
  const workdir = mkdtempSync(join(tmpdir(), "segclass-bindings-"));
  try {
    const dataPath = join(workdir, "scenario.csv");
    runCli([
      "simulate",
      "--scenario",
      scenario,
      "--seed",
      String(seed),
      "--output",
      dataPath,
    ]);
    const text = readFileSync(dataPath, "utf8").trimEnd();
    const [, ...lines] = text.split("\n");
    return lines.map((line) => line.split(",").map(Number));
  } finally {
    rmSync(workdir, { recursive: true, force: true });
  }
}
