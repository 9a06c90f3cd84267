/**
 * Wire types for the runner protocol: a job document read from the file
 * given as argv[2], and one result record per line on stdout.
 *
 * Integers outside the float53 range (e.g. large Fibonacci numbers) must
 * survive the trip, so JSON handling goes through lossless-json with
 * integer literals widened to bigint.
 */
import { parse, stringify, isInteger } from "lossless-json";

export type Value =
  | null
  | boolean
  | number
  | bigint
  | string
  | Value[]
  | { [key: string]: Value };

export interface CheckerSpec {
  mode: "exact" | "float_tolerant" | "custom";
  epsilon?: number;
  command?: string[];
}

export interface JobCase {
  case_id: string;
  input: Value;
  /** Absent (not null) when the job is a reference capture run. */
  expected_output?: Value;
}

export interface Job {
  job_id: string;
  candidate_source: string;
  entry_point: string;
  soft_limit_s: number;
  repeats: number;
  checker: CheckerSpec;
  capture_output: boolean;
  cases: JobCase[];
}

export type RecordStatus = "ok" | "wrong_output" | "timeout" | "runtime_error";

export interface CaseRecord {
  case_id: string;
  status: RecordStatus;
  timings_s: number[];
  diagnostics?: string;
  output?: Value;
}

function parseNumber(text: string): number | bigint {
  if (isInteger(text)) {
    const approx = Number(text);
    if (!Number.isSafeInteger(approx)) return BigInt(text);
  }
  return Number(text);
}

export function parseValue(text: string): Value {
  return parse(text, null, parseNumber) as Value;
}

export function serializeValue(value: Value): string {
  const text = stringify(value);
  if (text === undefined) {
    throw new Error("value is not serializable");
  }
  return text;
}

export class ProtocolError extends Error {}

export function parseJob(text: string): Job {
  let doc: unknown;
  try {
    doc = parseValue(text);
  } catch (err) {
    throw new ProtocolError(`job file is not valid JSON: ${err}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new ProtocolError("job document must be an object");
  }
  const job = doc as Record<string, unknown>;
  for (const field of [
    "job_id",
    "candidate_source",
    "entry_point",
    "soft_limit_s",
    "repeats",
    "checker",
    "cases",
  ]) {
    if (!(field in job)) throw new ProtocolError(`job is missing ${field}`);
  }
  if (!Array.isArray(job.cases)) throw new ProtocolError("cases must be an array");
  const softLimit = Number(job.soft_limit_s);
  const repeats = Number(job.repeats);
  if (!(softLimit > 0)) throw new ProtocolError("soft_limit_s must be > 0");
  if (!Number.isInteger(repeats) || repeats < 1) {
    throw new ProtocolError("repeats must be a positive integer");
  }
  return {
    job_id: String(job.job_id),
    candidate_source: String(job.candidate_source),
    entry_point: String(job.entry_point),
    soft_limit_s: softLimit,
    repeats,
    checker: job.checker as CheckerSpec,
    capture_output: Boolean(job.capture_output),
    cases: job.cases as unknown as JobCase[],
  };
}

export function serializeRecord(record: CaseRecord): string {
  return serializeValue(record as unknown as Value);
}
