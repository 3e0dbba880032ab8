import io
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from escalate import io as eio
from escalate.contours import extract_contours
from escalate.render import contours_svg
from escalate.schematic import Axis, GridSpec, evaluate_grid

jsonschema = pytest.importorskip("jsonschema")


@pytest.fixture(scope="module")
def grid():
    spec = GridSpec(Axis("sigma_p", 0.2, 2.0, 25), Axis("kappa_p", 0.4, 1.4, 21), {"D": 5, "mu_p": 2.0})
    return evaluate_grid(spec)


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, 5e-324, 0.011824136282258663, 2.0):
        assert float(eio.fmt(v)) == v
    assert eio.fmt(2.0) == "2.0"


def test_grid_csv_round_trip(grid):
    buf = io.StringIO()
    eio.write_grid_csv(grid, buf)
    text = buf.getvalue()
    lines = text.splitlines()
    assert lines[0] == "x,y,value" and len(lines) == 1 + 25 * 21
    # y-major: x varies fastest
    assert lines[1].split(",")[1] == lines[2].split(",")[1]
    x, y, V = eio.read_grid_csv(io.StringIO(text))
    assert np.array_equal(x, grid.x) and np.array_equal(y, grid.y)
    assert np.array_equal(V, grid.values)


def test_grid_csv_bad_header():
    with pytest.raises(ValueError):
        eio.read_grid_csv(io.StringIO("a,b,c\n1,2,3\n"))


def test_contours_json_round_trip(grid):
    cs = extract_contours(grid, [0.02, 0.05, 0.1])
    obj = eio.contours_to_json(cs)
    jsonschema.validate(obj, eio.CONTOURS_SCHEMA)
    buf = io.StringIO()
    eio.dump_json(obj, buf)
    back = eio.contours_from_json(json.loads(buf.getvalue()))
    assert back.levels == cs.levels
    for lv in cs.levels:
        assert len(back.polylines[lv]) == len(cs.polylines[lv])
        for a, b in zip(back.polylines[lv], cs.polylines[lv]):
            assert np.array_equal(a, b)


def test_dump_json_rejects_nan():
    with pytest.raises(ValueError):
        eio.dump_json({"x": float("nan")}, io.StringIO())


def test_manifest_timestamp_pinned(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    m = eio.make_manifest("schematic", {"steps": 3}, ["a.csv"])
    assert m["timestamp"] == "1970-01-01T00:00:00Z"
    jsonschema.validate(m, eio.MANIFEST_SCHEMA)


def test_manifest_live_clock(monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    m = eio.make_manifest("eval", {})
    assert m["timestamp"].endswith("Z") and "files" not in m
    jsonschema.validate(m, eio.MANIFEST_SCHEMA)


def test_svg_structure(grid):
    cs = extract_contours(grid, [0.02, 0.05])
    svg = contours_svg(cs, (grid.x[0], grid.x[-1]), (grid.y[0], grid.y[-1]), title="t")
    root = ET.fromstring(svg.encode())
    ns = {"s": "http://www.w3.org/2000/svg"}
    paths = root.findall(".//s:path", ns)
    assert len(paths) == sum(len(v) for v in cs.polylines.values())
    assert {p.get("data-level") for p in paths} <= {"0.02", "0.05"}
    for p in paths:
        assert p.get("class") in ("level-0_02", "level-0_05")
        assert p.get("d").startswith("M")
    assert root.get("viewBox").split()[0] == "0.2"
