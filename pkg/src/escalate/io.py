"""File formats: path JSONL, matrix CSV, grid CSV, contour and summary JSON.

Floats are written with ``repr``, the shortest string that round-trips to the
same double, so repeated runs are byte-identical and nothing is lost.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
from typing import IO, Iterable

import numpy as np

from . import __version__
from .contours import ContourSet
from .paths import CohortEvent, EventKind, FinalOutcome, OutcomeKind, Path, path_to_matrix


def fmt(v: float) -> str:
    return repr(float(v))


def level_key(level: float) -> str:
    return fmt(level)


# -- paths -------------------------------------------------------------------

def path_to_json(path: Path) -> dict:
    return {
        "events": [{"dose": e.dose, "kind": e.kind.value, "tox": e.tox} for e in path.events],
        "outcome": {"kind": path.outcome.kind.value, "level": path.outcome.level},
    }


def path_from_json(obj: dict) -> Path:
    events = tuple(CohortEvent(int(e["dose"]), EventKind(e["kind"]), int(e["tox"]))
                   for e in obj["events"])
    out = obj["outcome"]
    return Path(events, FinalOutcome(OutcomeKind(out["kind"]), int(out["level"])))


def write_paths_jsonl(paths: Iterable[Path], fh: IO[str]) -> None:
    for path in paths:
        fh.write(json.dumps(path_to_json(path), separators=(",", ":")))
        fh.write("\n")


def read_paths_jsonl(fh: IO[str]) -> list[Path]:
    return [path_from_json(json.loads(line)) for line in fh if line.strip()]


def write_matrix_csv(paths: Iterable[Path], D: int, fh: IO[str]) -> None:
    for j, path in enumerate(paths, start=1):
        fh.write(f"# path {j}\n")
        for row in path_to_matrix(path, D):
            fh.write(",".join("" if v < 0 else str(int(v)) for v in row))
            fh.write("\n")


def read_matrix_csv(fh: IO[str]) -> list[np.ndarray]:
    mats, rows = [], []
    for line in fh:
        line = line.rstrip("\n")
        if line.startswith("#"):
            if rows:
                mats.append(np.array(rows, dtype=np.int8))
            rows = []
            continue
        if line:
            rows.append([-1 if c == "" else int(c) for c in line.split(",")])
    if rows:
        mats.append(np.array(rows, dtype=np.int8))
    return mats


# -- grids and contours ------------------------------------------------------

def write_grid_csv(grid, fh: IO[str]) -> None:
    fh.write("x,y,value\n")
    for i, yv in enumerate(grid.y):
        ys = fmt(yv)
        for j, xv in enumerate(grid.x):
            fh.write(f"{fmt(xv)},{ys},{fmt(grid.values[i, j])}\n")


def read_grid_csv(fh: IO[str]):
    """Returns ``(x, y, values)`` with values shaped (len(y), len(x))."""
    header = fh.readline().strip()
    if header != "x,y,value":
        raise ValueError(f"unexpected grid header {header!r}")
    data = np.loadtxt(fh, delimiter=",", ndmin=2)
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    if len(data) != len(x) * len(y):
        raise ValueError("grid CSV is not a full lattice")
    return x, y, data[:, 2].reshape(len(y), len(x))


def contours_to_json(cs: ContourSet) -> dict:
    return {
        "levels": [float(v) for v in cs.levels],
        "polylines": {
            level_key(lv): [[[float(a), float(b)] for a, b in line] for line in lines]
            for lv, lines in cs.polylines.items()
        },
    }


def contours_from_json(obj: dict) -> ContourSet:
    levels = [float(v) for v in obj["levels"]]
    polylines = {lv: [np.array(line, dtype=float).reshape(-1, 2)
                      for line in obj["polylines"][level_key(lv)]]
                 for lv in levels}
    return ContourSet(levels=levels, polylines=polylines)


def dump_json(obj, fh: IO[str]) -> None:
    json.dump(obj, fh, indent=1, sort_keys=False, allow_nan=False)
    fh.write("\n")


# -- run manifest ------------------------------------------------------------

def utc_timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the clock for reproducible builds
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        when = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        when = _dt.datetime.now(tz=_dt.timezone.utc)
    return when.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def make_manifest(command: str, parameters: dict, files: list[str] | None = None) -> dict:
    out = {
        "command": command,
        "parameters": parameters,
        "tool_version": __version__,
        "timestamp": utc_timestamp(),
    }
    if files is not None:
        out["files"] = files
    return out


# -- JSON schemas ------------------------------------------------------------

_NUM = {"type": "number"}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

CONTOURS_SCHEMA = {
    "type": "object",
    "required": ["levels", "polylines"],
    "properties": {
        "levels": {"type": "array", "items": _NUM, "minItems": 1},
        "polylines": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": _POINT, "minItems": 2},
            },
        },
    },
    "additionalProperties": False,
}

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["expected_fatalities", "prob_any_fatality", "expected_enrollment",
                 "mtd_distribution"],
    "properties": {
        "expected_fatalities": {"type": "number", "minimum": 0},
        "prob_any_fatality": {"type": "number", "minimum": 0, "maximum": 1},
        "expected_enrollment": {"type": "number", "minimum": 3},
        "mtd_distribution": {
            "type": "object",
            "required": ["not_found"],
            "patternProperties": {"^([0-9]+|not_found)$": {"type": "number"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

PATH_SCHEMA = {
    "type": "object",
    "required": ["events", "outcome"],
    "properties": {
        "events": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["dose", "kind", "tox"],
                "properties": {
                    "dose": {"type": "integer", "minimum": 1},
                    "kind": {"enum": [k.value for k in EventKind]},
                    "tox": {"type": "integer", "minimum": 0, "maximum": 3},
                },
                "additionalProperties": False,
            },
        },
        "outcome": {
            "type": "object",
            "required": ["kind", "level"],
            "properties": {
                "kind": {"enum": [k.value for k in OutcomeKind]},
                "level": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command", "parameters", "tool_version", "timestamp"],
    "properties": {
        "command": {"type": "string"},
        "parameters": {"type": "object"},
        "tool_version": {"type": "string", "pattern": r"^\d+\.\d+\.\d+"},
        "timestamp": {"type": "string", "pattern": r"^\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ$"},
        "files": {"type": "array", "items": {"type": "string"}},
    },
}
