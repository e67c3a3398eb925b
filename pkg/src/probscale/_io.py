"""Serialization helpers shared by the library and the CLI."""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


def decimal_string(x: Fraction, digits: int = 16) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        value = Decimal(x.numerator) / Decimal(x.denominator)
    text = format(value.normalize(), "f")
    return "0" if text in ("-0", "") else text


def rational_to_json(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator, "decimal": decimal_string(x)}


def rational_from_json(obj: Mapping) -> Fraction:
    return Fraction(int(obj["num"]), int(obj["den"]))


def format_rational(x: Fraction) -> str:
    """``a/b`` form, or just ``a`` for integers."""
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses, enums, rationals and numpy scalars."""
    if isinstance(obj, Fraction):
        return rational_to_json(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, tuple) and hasattr(obj, "_asdict"):
        return {k: to_jsonable(v) for k, v in obj._asdict().items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else _csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(str(int(x)) if float(x).is_integer() else repr(float(x)) for x in v)
    return v


def write_text(path: "str | Path", text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
