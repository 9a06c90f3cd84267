"""Canonical value trees and their byte-stable JSON encoding.

A value tree is the common currency for test-case inputs and expected
outputs: None, booleans, arbitrary-precision integers, floats, strings,
ordered lists, and string-keyed maps. Python tuples are accepted on input
and canonicalized to lists so that structurally equal values have one
representation.
"""

from __future__ import annotations

import json
import math
import sys
from typing import Any

# Arbitrary-precision integers are part of the contract (think the
# millionth Fibonacci number), so the interpreter-wide digit cap on
# int<->str conversion must not apply to value-tree codecs.
sys.set_int_max_str_digits(2**31 - 1)


class ValueTreeError(ValueError):
    """Raised for values that cannot be represented as a value tree."""


def canonicalize(value: Any) -> Any:
    """Return the canonical form of ``value``.

    Tuples become lists, dict keys must be strings, and leaves must be
    None/bool/int/float/str. Floats must be finite (JSON cannot carry
    NaN or infinities portably).
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueTreeError(f"non-finite float not representable: {value!r}")
        return value
    if isinstance(value, (list, tuple)):
        return [canonicalize(v) for v in value]
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise ValueTreeError(f"map keys must be strings, got {type(k).__name__}")
            out[k] = canonicalize(v)
        return out
    raise ValueTreeError(f"unrepresentable value of type {type(value).__name__}")


def is_value_tree(value: Any) -> bool:
    try:
        canonicalize(value)
    except ValueTreeError:
        return False
    return True


def dumps(value: Any) -> str:
    """Serialize a value tree to its canonical JSON text (no trailing newline)."""
    return json.dumps(canonicalize(value), ensure_ascii=False, separators=(",", ":"))


def loads(text: str) -> Any:
    """Parse canonical JSON text into a value tree."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueTreeError(f"malformed value tree: {exc}") from exc


def equal_exact(a: Any, b: Any) -> bool:
    """Structural equality after canonicalization.

    Bool and int are distinct leaf kinds (True != 1); int and float
    compare by numeric value as in Python.
    """
    a = canonicalize(a)
    b = canonicalize(b)
    return _eq(a, b)


def _eq(a: Any, b: Any) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b
    if type(a) is not type(b):
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(_eq(x, y) for x, y in zip(a, b))
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_eq(a[k], b[k]) for k in a)
    return a == b
