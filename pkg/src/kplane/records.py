"""Serialization: derivation traces, result tables, run configurations and
the binary grid-function file format.

Rationals are written as "num/den" strings and never pass through floats;
other floats carry 12 significant digits, frame entries 17.  No field
depends on wall-clock time, so equal inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exponents import INF, BoundSpec, DerivationTrace, Operator, Rule, Step
from .transforms import GridFunction

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Malformed file or record; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


# ---------------------------------------------------------------------------
# scalars


def format_rational(x) -> str:
    if x is None:
        return ""
    if x == INF:
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str):
    s = s.strip()
    if s == "inf":
        return INF
    if s == "":
        return None
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError("rational", f"cannot parse {s!r}") from exc


def format_float(x: float, digits: int = 12) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(float(x), f".{digits}g")


def cell(x) -> str:
    """Render one table entry."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return format_rational(x) if isinstance(x, Fraction) else str(x)
    if isinstance(x, (float, np.floating)):
        return format_float(float(x))
    if x is None:
        return ""
    return str(x)


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append([cell(v) for v in values])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"format_version": FORMAT_VERSION, "meta": self.meta,
               "columns": self.columns, "rows": self.rows}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# derivation traces

TRACE_COLUMNS = ["step", "rule", "operator", "d", "k", "p", "q", "alpha", "eps"]


def bound_to_dict(b: BoundSpec) -> dict:
    return {"operator": b.operator.value, "d": b.d, "k": b.k, "p": format_rational(b.p),
            "q": format_rational(b.q), "alpha": format_rational(b.alpha),
            "eps_loss": b.eps_loss, "support_unit_ball": b.support_unit_ball}


def bound_from_dict(doc: dict) -> BoundSpec:
    try:
        return BoundSpec(Operator(doc["operator"]), int(doc["d"]), int(doc["k"]),
                         parse_rational(doc["p"]), parse_rational(doc["q"]),
                         parse_rational(doc["alpha"]), bool(doc["eps_loss"]),
                         bool(doc.get("support_unit_ball", False)))
    except KeyError as exc:
        raise FormatError(str(exc.args[0]), "missing") from exc


def trace_to_dict(t: DerivationTrace) -> dict:
    steps = []
    for s in t.steps:
        inp = bound_to_dict(s.input) if isinstance(s.input, BoundSpec) else dict(s.input)
        steps.append({"rule": s.rule.value, "input": inp, "output": bound_to_dict(s.output)})
    return {"format_version": FORMAT_VERSION, "name": t.name, "steps": steps}


def trace_from_dict(doc: dict) -> DerivationTrace:
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError("format_version", f"expected {FORMAT_VERSION}, got {doc.get('format_version')!r}")
    t = DerivationTrace(name=doc.get("name"))
    for s in doc["steps"]:
        inp = s["input"]
        inp = bound_from_dict(inp) if "operator" in inp else inp
        t.steps.append(Step(Rule(s["rule"]), inp, bound_from_dict(s["output"])))
    t.check()
    return t


def trace_table(t: DerivationTrace) -> Table:
    table = Table(list(TRACE_COLUMNS), meta={"pipeline": t.name})
    for i, s in enumerate(t.steps):
        b = s.output
        table.add(i, s.rule.value, b.operator.value, b.d, b.k, b.p, b.q, b.alpha, b.eps_loss)
    return table


# ---------------------------------------------------------------------------
# run configurations


@dataclass
class RunConfig:
    """A command plus every parameter needed to rerun it.

    Parameter values are JSON scalars or lists; rationals go in as
    :class:`~fractions.Fraction` and are stored tagged so that they come
    back exact.
    """

    command: list
    params: dict
    output_format: str = "csv"

    def to_json(self) -> str:
        doc = {"format_version": FORMAT_VERSION, "command": list(self.command),
               "params": {k: _encode(v) for k, v in self.params.items()},
               "output_format": self.output_format}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError("config", f"not valid JSON ({exc.msg})") from exc
        if not isinstance(doc, dict):
            raise FormatError("config", "top level must be an object")
        if doc.get("format_version") != FORMAT_VERSION:
            raise FormatError("format_version", f"expected {FORMAT_VERSION}, got {doc.get('format_version')!r}")
        for key in ("command", "params"):
            if key not in doc:
                raise FormatError(key, "missing")
        return cls(list(doc["command"]), {k: _decode(v) for k, v in doc["params"].items()},
                   doc.get("output_format", "csv"))


def _encode(v):
    if isinstance(v, Fraction):
        return {"rational": format_rational(v)}
    if isinstance(v, (list, tuple)):
        return [_encode(x) for x in v]
    if isinstance(v, float):
        return {"float": repr(v)}
    return v


def _decode(v):
    if isinstance(v, dict) and set(v) == {"rational"}:
        return parse_rational(v["rational"])
    if isinstance(v, dict) and set(v) == {"float"}:
        return float(v["float"])
    if isinstance(v, list):
        return [_decode(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# grid-function files: one JSON header line, then raw little-endian f64

_HEADER_KEYS = ("format_version", "d", "shape", "h", "origin", "dtype", "byte_order", "order")


def grid_header(f: GridFunction) -> dict:
    return {"format_version": FORMAT_VERSION, "d": f.d, "shape": list(f.shape),
            "h": float(f.h), "origin": [float(x) for x in f.origin], "dtype": "f64",
            "byte_order": "little", "order": "row-major"}


def write_grid(path, f: GridFunction) -> None:
    header = json.dumps(grid_header(f), sort_keys=True).encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + b"\n")
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def _check_header(doc) -> None:
    if not isinstance(doc, dict):
        raise FormatError("header", "must be a JSON object")
    for key in _HEADER_KEYS:
        if key not in doc:
            raise FormatError(key, "missing from header")
    if doc["format_version"] != FORMAT_VERSION:
        raise FormatError("format_version", f"expected {FORMAT_VERSION}, got {doc['format_version']!r}")
    if doc["dtype"] != "f64":
        raise FormatError("dtype", f"expected 'f64', got {doc['dtype']!r}")
    if doc["byte_order"] != "little":
        raise FormatError("byte_order", f"expected 'little', got {doc['byte_order']!r}")
    if doc["order"] != "row-major":
        raise FormatError("order", f"expected 'row-major', got {doc['order']!r}")
    d = doc["d"]
    if not isinstance(d, int) or d < 1:
        raise FormatError("d", f"must be a positive integer, got {d!r}")
    shape = doc["shape"]
    if not isinstance(shape, list) or len(shape) != d or not all(isinstance(n, int) and n > 0 for n in shape):
        raise FormatError("shape", f"must list {d} positive integers, got {shape!r}")
    h = doc["h"]
    if not isinstance(h, (int, float)) or not h > 0:
        raise FormatError("h", f"must be a positive number, got {h!r}")
    origin = doc["origin"]
    if not isinstance(origin, list) or len(origin) != d or not all(isinstance(x, (int, float)) for x in origin):
        raise FormatError("origin", f"must list {d} numbers, got {origin!r}")


def read_grid(path) -> GridFunction:
    with open(path, "rb") as fh:
        raw = fh.read()
    line, sep, body = raw.partition(b"\n")
    if not sep:
        raise FormatError("header", "no newline-terminated header line")
    try:
        doc = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError("header", "not a JSON document") from exc
    _check_header(doc)
    expected = 8 * math.prod(doc["shape"])
    if len(body) != expected:
        raise FormatError("values", f"expected {expected} bytes (8 * prod(shape)), found {len(body)}")
    values = np.frombuffer(body, dtype="<f8").reshape(doc["shape"]).astype(float)
    try:
        return GridFunction(values, doc["h"], doc["origin"])
    except ValueError as exc:
        raise FormatError("values", str(exc)) from exc
