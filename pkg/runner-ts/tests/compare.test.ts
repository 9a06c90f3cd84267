import { describe, expect, test } from "vitest";
import { UnencodableValueError, canonicalize, compareOutputs } from "../src/compare";
import { parseValue, serializeValue } from "../src/protocol";

const exact = { mode: "exact" } as const;
const tolerant = { mode: "float_tolerant", epsilon: 1e-6 } as const;

describe("canonicalize", () => {
  test("container kinds unify to arrays and plain objects", () => {
    expect(canonicalize(new Set([1, 2, 3]))).toEqual([1, 2, 3]);
    expect(canonicalize(new Float64Array([0.5, 1.5]))).toEqual([0.5, 1.5]);
    expect(canonicalize(new Map([["a", 1]]))).toEqual({ a: 1 });
  });

  test("rejects values outside the tree", () => {
    expect(() => canonicalize(() => 0)).toThrow(UnencodableValueError);
    expect(() => canonicalize(NaN)).toThrow(UnencodableValueError);
    expect(() => canonicalize(new Date())).toThrow(UnencodableValueError);
  });
});

describe("compareOutputs exact", () => {
  test("identity", () => {
    expect(compareOutputs(55, 55, exact)).toBe(true);
  });

  test("bigint and safe integer agree numerically", () => {
    expect(compareOutputs(55n, 55, exact)).toBe(true);
    expect(compareOutputs(10n ** 30n, 10n ** 30n + 1n, exact)).toBe(false);
  });

  test("booleans are not numbers", () => {
    expect(compareOutputs(true, 1, exact)).toBe(false);
  });

  test("structure mismatch", () => {
    expect(compareOutputs([1, [2]], [1, [2, 3]], exact)).toBe(false);
    expect(compareOutputs({ a: 1 }, { a: 1, b: 2 }, exact)).toBe(false);
  });
});

describe("compareOutputs float_tolerant", () => {
  test("absorbs float representation noise", () => {
    expect(compareOutputs(0.30000000000000004, 0.3, tolerant)).toBe(true);
  });

  test("relative scaling: |a - b| <= eps * max(1, |b|)", () => {
    expect(compareOutputs(1e9 + 100, 1e9, tolerant)).toBe(true);
    expect(compareOutputs(1e9 + 2000, 1e9, tolerant)).toBe(false);
    expect(compareOutputs(2e-6, 0, tolerant)).toBe(false);
  });

  test("structure stays exact", () => {
    expect(compareOutputs([0.3], [0.3, 0.3], tolerant)).toBe(false);
  });
});

describe("value encoding", () => {
  test("large integers survive a round trip", () => {
    const fib300 =
      222232244629420445529739893461909967206666939096499764990979600n;
    expect(parseValue(serializeValue(fib300))).toBe(fib300);
  });

  test("safe integers stay plain numbers", () => {
    expect(parseValue("42")).toBe(42);
    expect(parseValue("1.25")).toBe(1.25);
  });
});
