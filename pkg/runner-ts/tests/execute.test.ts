import { describe, expect, test } from "vitest";
import { executeJob } from "../src/execute";
import { CaseRecord, Job } from "../src/protocol";

const DOUBLING = `
function fib(n) {
  function go(k) {
    if (k === 0n) return [0n, 1n];
    const [a, b] = go(k / 2n);
    const c = a * (2n * b - a);
    const d = a * a + b * b;
    return k % 2n === 0n ? [c, d] : [d, c + d];
  }
  return go(BigInt(n))[0];
}
`;

function job(overrides: Partial<Job>): Job {
  return {
    job_id: "test/0/L1",
    candidate_source: DOUBLING,
    entry_point: "fib",
    soft_limit_s: 0.25,
    repeats: 4,
    checker: { mode: "exact" },
    capture_output: false,
    cases: [
      { case_id: "L1.0", input: 10, expected_output: 55 },
      { case_id: "L1.1", input: 30, expected_output: 832040 },
    ],
    ...overrides,
  };
}

function run(j: Job): CaseRecord[] {
  const records: CaseRecord[] = [];
  executeJob(j, (r) => records.push(r));
  return records;
}

describe("executeJob", () => {
  test("correct candidate: one record per case, R timings each, in order", () => {
    const records = run(job({}));
    expect(records.map((r) => r.case_id)).toEqual(["L1.0", "L1.1"]);
    for (const r of records) {
      expect(r.status).toBe("ok");
      expect(r.timings_s).toHaveLength(4);
      expect(r.timings_s.every((t) => t > 0 && t < 0.25)).toBe(true);
    }
  });

  test("wrong answer stops at the first mismatching case", () => {
    const records = run(
      job({ candidate_source: "function fib(n) { return n + 1; }" })
    );
    expect(records[0].status).toBe("wrong_output");
    expect(records[0].timings_s).toEqual([]);
  });

  test("unbounded loop is censored at the soft limit and the job continues", () => {
    const records = run(
      job({
        candidate_source: "function fib(n) { if (n === 10) { for (;;); } return 832040n; }",
        soft_limit_s: 0.05,
      })
    );
    expect(records.map((r) => r.status)).toEqual(["timeout", "ok"]);
    expect(records[0].timings_s).toEqual([0.05]);
  });

  test("syntax error marks every case runtime_error", () => {
    const records = run(job({ candidate_source: "function fib(n) {" }));
    expect(records).toHaveLength(2);
    for (const r of records) {
      expect(r.status).toBe("runtime_error");
      expect(r.diagnostics).toMatch(/failed to load/);
    }
  });

  test("missing entry point is diagnosed", () => {
    const records = run(job({ entry_point: "fibonacci" }));
    expect(records[0].status).toBe("runtime_error");
    expect(records[0].diagnostics).toMatch(/"fibonacci"/);
  });

  test("thrown exceptions become runtime_error with the message", () => {
    const records = run(
      job({ candidate_source: "function fib(n) { throw new RangeError('nope'); }" })
    );
    expect(records[0].status).toBe("runtime_error");
    expect(records[0].diagnostics).toContain("nope");
  });

  test("capture_output echoes the canonical output", () => {
    const records = run(
      job({
        capture_output: true,
        cases: [{ case_id: "L0.0", input: 100 }],
      })
    );
    expect(records[0].status).toBe("ok");
    expect(records[0].output).toBe(354224848179261915075n);
  });

  test("statuses are deterministic across runs", () => {
    const first = run(job({})).map((r) => r.status);
    const second = run(job({})).map((r) => r.status);
    expect(second).toEqual(first);
  });

  test("candidate cannot corrupt inputs for later repeats", () => {
    const mutator = `
function fib(arr) {
  const n = arr[0];
  arr[0] = -1;
  let a = 0n, b = 1n;
  for (let i = 0; i < n; i++) [a, b] = [b, a + b];
  return a;
}
`;
    const records = run(
      job({
        candidate_source: mutator,
        cases: [{ case_id: "L1.0", input: [10], expected_output: 55 }],
      })
    );
    expect(records[0].status).toBe("ok");
  });
});
