"""Deterministic JSON emission: sorted keys, fixed float formatting.

Floats are printed with %.17g (lossless for doubles), so identical
invocations produce byte-identical documents.
"""

from __future__ import annotations

from fractions import Fraction


def _format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite float {x} is not serializable")
    text = format(x, ".17g")
    return text


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def dumps(obj, indent: int | None = None) -> str:
    """Serialize dicts/lists/tuples/str/int/float/bool/None/Fraction."""
    return "".join(_emit(obj, indent, 0))


def _emit(obj, indent, depth):
    pad = "" if indent is None else "\n" + " " * (indent * (depth + 1))
    close_pad = "" if indent is None else "\n" + " " * (indent * depth)
    if obj is None:
        yield "null"
    elif isinstance(obj, bool):
        yield "true" if obj else "false"
    elif isinstance(obj, int):
        yield str(obj)
    elif isinstance(obj, Fraction):
        yield f'"{obj.numerator}/{obj.denominator}"'
    elif isinstance(obj, float):
        yield _format_float(obj)
    elif isinstance(obj, str):
        yield f'"{_escape(obj)}"'
    elif isinstance(obj, dict):
        keys = sorted(obj, key=str)
        if not keys:
            yield "{}"
            return
        yield "{"
        for i, key in enumerate(keys):
            if i:
                yield ","
            yield pad
            yield f'"{_escape(str(key))}": '
            yield from _emit(obj[key], indent, depth + 1)
        yield close_pad + "}"
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            yield "[]"
            return
        yield "["
        for i, item in enumerate(items):
            if i:
                yield ","
            yield pad
            yield from _emit(item, indent, depth + 1)
        yield close_pad + "]"
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
