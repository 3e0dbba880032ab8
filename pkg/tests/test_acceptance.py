"""Acceptance criteria, each run at its stated size and tolerance.

Every test records one PASS/FAIL line, printed in the "acceptance criteria"
section of the pytest summary.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from escalate import io as eio
from escalate import verify
from escalate.paths import PATH_COUNTS, enumerate_paths

jsonschema = pytest.importorskip("jsonschema")

EXPECTED_COUNTS = [10, 46, 154, 442, 1162, 2890, 6922, 16138, 36874, 82954]


def timed(fn, *args, **kw):
    start = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - start


def test_path_counts(criterion):
    def counts():
        return [len(enumerate_paths(D)) for D in range(1, 11)]

    got, secs = timed(counts)
    ok = got == EXPECTED_COUNTS and secs < 5
    assert criterion(1, "path counts D=1..10", ok, f"{got}, {secs:.2f}s")
    assert [PATH_COUNTS[D] for D in range(1, 11)] == EXPECTED_COUNTS


def test_probability_normalization(criterion):
    (ok, detail), secs = timed(verify.check_normalization, n=1000, max_D=8)
    ok = ok and secs < 30
    assert criterion(2, "probability normalization", ok, f"{detail}, {secs:.2f}s")


@pytest.mark.slow
def test_exact_vs_monte_carlo(criterion):
    panel = verify.MC_PANEL
    assert len(panel) == 12 and {D for D, *_ in panel} == {4, 6}
    assert {(m, s, k) for _, m, s, k in panel} == {
        (m, s, k) for m in (1.0, 2.0, 3.0) for s in (0.5, 1.0) for k in (0.5, 1.0)}
    (ok, detail), secs = timed(verify.check_monte_carlo, n_trials=10**6, panel=panel, n_se=4)
    ok = ok and secs < 300
    assert criterion(3, "exact vs Monte Carlo", ok, f"{detail}, {secs:.1f}s")


def test_eq_form_equivalence(criterion):
    ok, detail = verify.check_eq_forms(n=200, max_D=6)
    assert criterion(4, "log-space vs direct product", ok, detail)


def test_scale_invariance(criterion):
    ok, detail = verify.check_scale_invariance(n=100)
    assert criterion(5, "scale invariance", ok, detail)


def test_d_collapse(criterion):
    ok, detail = verify.check_collapse(steps=21)
    assert criterion(6, "D-collapse regression", ok, detail)


def test_safe_corner(criterion):
    ok, detail = verify.check_safe_corner(0.9, 1.1, (4, 5, 6))
    assert criterion(7, "safe corner", ok, detail)


def test_simulator_membership(criterion):
    ok, detail = verify.check_membership(n_trials=10**5, D=6)
    assert criterion(8, "simulated paths are enumerated", ok, detail)


def _schematic(figure, out_dir):
    env = dict(os.environ, SOURCE_DATE_EPOCH="1700000000")
    start = time.perf_counter()
    r = subprocess.run([sys.executable, "-m", "escalate", "schematic", "--figure", figure,
                        "--out", str(out_dir)], capture_output=True, text=True, env=env)
    return r, time.perf_counter() - start


def _validate(out_dir):
    names = sorted(os.listdir(out_dir))
    for n in names:
        path = os.path.join(out_dir, n)
        if n.endswith(".contours.json"):
            with open(path) as fh:
                jsonschema.validate(json.load(fh), eio.CONTOURS_SCHEMA)
        elif n == "manifest.json":
            with open(path) as fh:
                jsonschema.validate(json.load(fh), eio.MANIFEST_SCHEMA)
        elif n.endswith(".grid.csv"):
            with open(path) as fh:
                _, _, v = eio.read_grid_csv(fh)
            assert np.all(np.isfinite(v))
    return names


@pytest.mark.slow
@pytest.mark.parametrize("figure", ["contours46", "focused"])
def test_figure_data_reproduction(criterion, tmp_path, figure):
    runs, times = [], []
    for tag in ("first", "second"):
        r, secs = _schematic(figure, tmp_path / tag)
        runs.append(r)
        times.append(secs)
    problems = [r.stderr for r in runs if r.returncode != 0]
    if not problems:
        a, b = tmp_path / "first", tmp_path / "second"
        names = _validate(a)
        if names != _validate(b):
            problems.append("file lists differ")
        for n in names:
            if (a / n).read_bytes() != (b / n).read_bytes():
                problems.append(f"{n} differs")
    slow = [t for t in times if t >= 60]
    ok = not problems and not slow
    detail = f"{figure}: runs {times[0]:.1f}s and {times[1]:.1f}s"
    if problems:
        detail += f"; {problems[:3]}"
    assert criterion(9, f"figure data reproduction ({figure})", ok, detail)
