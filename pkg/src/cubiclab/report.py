"""Deterministic CSV/JSON emission and an order-preserving worker pool."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

SIG_DIGITS = 12


def format_number(x: Any) -> Any:
    """Normalise a value for output: floats to 12 significant digits, exact values as strings."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return {"re": format_number(x.real), "im": format_number(x.imag)}
    if isinstance(x, float) or hasattr(x, "__float__") and not isinstance(x, (list, tuple, dict)):
        f = float(x)
        if math.isnan(f) or math.isinf(f):
            return str(f)
        return float(f"{f:.{SIG_DIGITS}g}")
    if isinstance(x, Mapping):
        return {str(k): format_number(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [format_number(v) for v in x]
    return str(x)


def _cell(v: Any) -> str:
    v = format_number(v)
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    if v is None:
        return ""
    return str(v)


def render(results: Sequence[Mapping[str, Any]], fmt: str = "csv") -> str:
    if not results:
        raise ValueError("nothing to report")
    if fmt == "json":
        return json.dumps([format_number(r) for r in results], sort_keys=True, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    keys: list[str] = []
    for r in results:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    for r in results:
        writer.writerow([_cell(r.get(k)) for k in keys])
    return buf.getvalue()


def emit_report(results: Sequence[Mapping[str, Any]], fmt: str = "csv", path: str | None = None) -> str:
    """Render results and write them to path (stdout when path is None or '-')."""
    text = render(results, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def ordered_map(fn: Callable[[Any], Any], items: Iterable[Any], threads: int = 1) -> list[Any]:
    """map(fn, items) on a thread pool; results come back in task order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
