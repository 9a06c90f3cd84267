/**
 * Output canonicalization and checking.
 *
 * Candidate return values are folded into the canonical value tree
 * (sequence-like containers become plain arrays, Maps become plain
 * objects) before comparison, so a candidate returning a Set of the
 * right elements in order is not punished for the container kind.
 */
import { spawnSync } from "node:child_process";
import { CheckerSpec, Value, serializeValue } from "./protocol";

export class UnencodableValueError extends Error {}

export function canonicalize(value: unknown): Value {
  if (value === null || value === undefined) return null;
  switch (typeof value) {
    case "boolean":
    case "bigint":
    case "string":
      return value;
    case "number":
      if (!Number.isFinite(value)) {
        throw new UnencodableValueError(`non-finite number ${value}`);
      }
      return value;
    case "object":
      break;
    default:
      throw new UnencodableValueError(`cannot encode a ${typeof value}`);
  }
  if (Array.isArray(value)) return value.map(canonicalize);
  if (value instanceof Set || ArrayBuffer.isView(value)) {
    return Array.from(value as Iterable<unknown>, canonicalize);
  }
  if (value instanceof Map) {
    const out: { [key: string]: Value } = {};
    for (const [k, v] of value.entries()) {
      if (typeof k !== "string") {
        throw new UnencodableValueError("map keys must be strings");
      }
      out[k] = canonicalize(v);
    }
    return out;
  }
  const proto = Object.getPrototypeOf(value);
  if (proto === Object.prototype || proto === null) {
    const out: { [key: string]: Value } = {};
    for (const [k, v] of Object.entries(value)) out[k] = canonicalize(v);
    return out;
  }
  throw new UnencodableValueError(
    `cannot encode instance of ${proto.constructor?.name ?? "unknown class"}`
  );
}

type Numeric = number | bigint;

function isNumeric(v: Value): v is Numeric {
  return typeof v === "number" || typeof v === "bigint";
}

function numbersExactlyEqual(a: Numeric, b: Numeric): boolean {
  if (typeof a === "bigint" && typeof b === "bigint") return a === b;
  if (typeof a === "number" && typeof b === "number") return a === b;
  const big = (typeof a === "bigint" ? a : b) as bigint;
  const num = (typeof a === "number" ? a : b) as number;
  return Number.isInteger(num) && BigInt(num) === big;
}

function numbersClose(a: Numeric, b: Numeric, epsilon: number): boolean {
  if (numbersExactlyEqual(a, b)) return true;
  if (typeof a === "bigint" && typeof b === "bigint") {
    const diff = a > b ? a - b : b - a;
    const bound = epsilon * Math.max(1, Math.abs(Number(b)));
    return Number(diff) <= bound;
  }
  const an = Number(a);
  const bn = Number(b);
  return Math.abs(an - bn) <= epsilon * Math.max(1, Math.abs(bn));
}

function structurallyEqual(
  actual: Value,
  expected: Value,
  leafEqual: (a: Numeric, b: Numeric) => boolean
): boolean {
  if (isNumeric(actual) && isNumeric(expected)) return leafEqual(actual, expected);
  if (Array.isArray(actual) && Array.isArray(expected)) {
    return (
      actual.length === expected.length &&
      actual.every((v, i) => structurallyEqual(v, expected[i], leafEqual))
    );
  }
  if (
    actual !== null &&
    expected !== null &&
    typeof actual === "object" &&
    typeof expected === "object" &&
    !Array.isArray(actual) &&
    !Array.isArray(expected)
  ) {
    const ak = Object.keys(actual).sort();
    const bk = Object.keys(expected).sort();
    return (
      ak.length === bk.length &&
      ak.every((k, i) => k === bk[i]) &&
      ak.every((k) => structurallyEqual(actual[k], expected[k], leafEqual))
    );
  }
  return typeof actual === typeof expected && actual === expected;
}

export function compareOutputs(
  actual: Value,
  expected: Value,
  checker: CheckerSpec
): boolean {
  switch (checker.mode) {
    case "exact":
      return structurallyEqual(actual, expected, numbersExactlyEqual);
    case "float_tolerant": {
      const epsilon = checker.epsilon ?? 1e-6;
      return structurallyEqual(actual, expected, (a, b) =>
        numbersClose(a, b, epsilon)
      );
    }
    case "custom": {
      const command = checker.command ?? [];
      if (command.length === 0) {
        throw new Error("custom checker has no command");
      }
      const result = spawnSync(command[0], command.slice(1), {
        input: serializeValue({ actual, expected }),
        timeout: 30_000,
      });
      if (result.error) throw result.error;
      return result.status === 0;
    }
    default:
      throw new Error(`unknown checker mode ${(checker as CheckerSpec).mode}`);
  }
}
