/**
 * Candidate execution. The candidate source is loaded once per job into a
 * fresh vm context; each test case is run once for output checking (that
 * run counts as repeat 1) and then timed for the remaining repeats. Every
 * call is guarded by the soft per-case limit via the vm watchdog, and only
 * the entry-point call sits inside the hrtime clock.
 *
 * A busy loop in candidate JS is interruptible, so a timeout normally
 * yields a censored record and execution moves on; if the candidate blocks
 * inside an uninterruptible host call, the harness hard kill cleans up.
 */
import { Console } from "node:console";
import * as vm from "node:vm";
import { UnencodableValueError, canonicalize, compareOutputs } from "./compare";
import { CaseRecord, Job, Value } from "./protocol";

const CALL = new vm.Script(
  "globalThis.__out = globalThis.__entry(globalThis.__arg);",
  { filename: "<runner-call>" }
);

function softLimitMs(job: Job): number {
  return Math.max(1, Math.round(job.soft_limit_s * 1000));
}

function isVmTimeout(err: unknown): boolean {
  // the watchdog error is built in the candidate's realm, so it fails an
  // `instanceof Error` check in ours; go by the code property alone
  return (
    typeof err === "object" &&
    err !== null &&
    (err as NodeJS.ErrnoException).code === "ERR_SCRIPT_EXECUTION_TIMEOUT"
  );
}

function describe(err: unknown): string {
  if (typeof err === "object" && err !== null && "message" in err) {
    const e = err as { name?: string; message: unknown };
    return `${e.name ?? "Error"}: ${e.message}`;
  }
  return String(err);
}

interface Sandbox {
  call(input: Value, timeoutMs: number): { output: unknown; seconds: number };
}

function loadCandidate(job: Job): Sandbox | string {
  const context = vm.createContext({
    console: new Console(process.stderr, process.stderr),
  });
  try {
    new vm.Script(job.candidate_source, { filename: "candidate.js" }).runInContext(
      context,
      { timeout: softLimitMs(job) }
    );
  } catch (err) {
    return isVmTimeout(err)
      ? "top-level candidate code exceeded the soft limit"
      : `candidate failed to load: ${describe(err)}`;
  }
  const globals = context as Record<string, unknown>;
  const entry = globals[job.entry_point];
  if (typeof entry !== "function") {
    return `entry point ${JSON.stringify(job.entry_point)} is not a function`;
  }
  globals.__entry = entry;
  return {
    call(input, timeoutMs) {
      globals.__arg = structuredClone(input);
      globals.__out = undefined;
      const start = process.hrtime.bigint();
      CALL.runInContext(context, { timeout: timeoutMs });
      const seconds = Number(process.hrtime.bigint() - start) / 1e9;
      return { output: globals.__out, seconds };
    },
  };
}

function runCase(job: Job, sandbox: Sandbox, index: number): CaseRecord {
  const testCase = job.cases[index];
  const record: CaseRecord = {
    case_id: testCase.case_id,
    status: "ok",
    timings_s: [],
  };
  const limitMs = softLimitMs(job);
  try {
    const first = sandbox.call(testCase.input, limitMs);
    record.timings_s.push(first.seconds);

    let output: Value;
    try {
      output = canonicalize(first.output);
    } catch (err) {
      if (!(err instanceof UnencodableValueError)) throw err;
      return {
        ...record,
        status: "wrong_output",
        timings_s: [],
        diagnostics: describe(err),
      };
    }
    if ("expected_output" in testCase) {
      if (!compareOutputs(output, testCase.expected_output!, job.checker)) {
        return {
          ...record,
          status: "wrong_output",
          timings_s: [],
          diagnostics: "output does not match the expected output",
        };
      }
    }
    if (job.capture_output) record.output = output;

    for (let repeat = 1; repeat < job.repeats; repeat++) {
      record.timings_s.push(sandbox.call(testCase.input, limitMs).seconds);
    }
  } catch (err) {
    if (isVmTimeout(err)) {
      return {
        case_id: testCase.case_id,
        status: "timeout",
        timings_s: [job.soft_limit_s],
      };
    }
    return {
      case_id: testCase.case_id,
      status: "runtime_error",
      timings_s: [],
      diagnostics: describe(err),
    };
  }
  return record;
}

export function executeJob(job: Job, emit: (record: CaseRecord) => void): void {
  const sandbox = loadCandidate(job);
  for (let index = 0; index < job.cases.length; index++) {
    if (typeof sandbox === "string") {
      emit({
        case_id: job.cases[index].case_id,
        status: "runtime_error",
        timings_s: [],
        diagnostics: sandbox,
      });
      continue;
    }
    emit(runCase(job, sandbox, index));
  }
}
