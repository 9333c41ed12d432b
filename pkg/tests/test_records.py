import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kplane.exponents import Pipeline, derive_pipeline
from kplane.records import (FormatError, RunConfig, Table, format_float, format_rational, parse_rational,
                            read_grid, trace_from_dict, trace_table, trace_to_dict, write_grid)
from kplane.transforms import GridFunction, gaussian_mixture


@given(st.fractions())
def test_rational_roundtrip(x):
    assert parse_rational(format_rational(x)) == x


def test_rational_format():
    assert format_rational(F(40, 19)) == "40/19"
    assert format_rational(3) == "3/1"
    assert format_rational(float("inf")) == "inf"
    with pytest.raises(FormatError):
        parse_rational("1/0")


def test_float_format_has_12_significant_digits():
    assert format_float(1 / 3) == "0.333333333333"
    assert format_float(2.0) == "2"


def test_trace_roundtrip():
    t = derive_pipeline(Pipeline.NAK_THEOREM, 14, 5, 1)
    doc = json.loads(json.dumps(trace_to_dict(t)))
    back = trace_from_dict(doc)
    assert back.steps == t.steps and back.name == t.name


def test_trace_table_rows():
    table = trace_table(derive_pipeline(Pipeline.SHARP_P, 10, 4))
    csv = table.to_csv().splitlines()
    assert csv[0] == "step,rule,operator,d,k,p,q,alpha,eps"
    assert csv[-1] == "3,XrayStep,MaximalPlate,10,4,40/19,8/1,30/19,true"


def test_table_shape_check():
    t = Table(["a", "b"])
    with pytest.raises(ValueError):
        t.add(1)


def test_runconfig_roundtrip_is_exact():
    cfg = RunConfig(["scaling"], {"p": F(3, 2), "deltas": [0.1, 0.05], "n": None, "name": "ball"}, "json")
    back = RunConfig.from_json(cfg.to_json())
    assert back.params == cfg.params and isinstance(back.params["p"], F)
    assert back.to_json() == cfg.to_json()


def test_runconfig_errors():
    with pytest.raises(FormatError, match="format_version"):
        RunConfig.from_json('{"command": [], "params": {}}')
    with pytest.raises(FormatError, match="config"):
        RunConfig.from_json("not json")


def test_grid_file_roundtrip(tmp_path):
    f = gaussian_mixture(3, 8, [[0, 0, 0]], [0.3], [1.0])
    path = tmp_path / "f.gf"
    write_grid(path, f)
    g = read_grid(path)
    assert np.array_equal(g.values, f.values) and g.h == f.h
    assert np.array_equal(g.origin, f.origin)
    header = path.read_bytes().split(b"\n", 1)[0]
    doc = json.loads(header)
    assert doc["dtype"] == "f64" and doc["byte_order"] == "little" and doc["order"] == "row-major"


def _write(path, header, body=b""):
    path.write_bytes(json.dumps(header).encode() + b"\n" + body)


@pytest.mark.parametrize("field,value", [("dtype", "f32"), ("byte_order", "big"), ("order", "col-major"),
                                         ("shape", [2, -1]), ("h", 0), ("format_version", 2),
                                         ("origin", [0.0])])
def test_grid_header_field_errors(tmp_path, field, value):
    f = GridFunction(np.zeros((2, 2)), 0.5, [0.0, 0.0])
    path = tmp_path / "bad.gf"
    write_grid(path, f)
    header = json.loads(path.read_bytes().split(b"\n", 1)[0])
    header[field] = value
    _write(path, header, np.zeros(4).tobytes())
    with pytest.raises(FormatError) as e:
        read_grid(path)
    assert e.value.field == field


def test_grid_length_mismatch(tmp_path):
    path = tmp_path / "short.gf"
    write_grid(path, GridFunction(np.zeros((3, 3)), 0.5, [0.0, 0.0]))
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(FormatError, match="72 bytes"):
        read_grid(path)


def test_grid_missing_header(tmp_path):
    path = tmp_path / "x.gf"
    path.write_bytes(b"no newline here")
    with pytest.raises(FormatError, match="header"):
        read_grid(path)
