"""Grid, contour and SVG artifacts for the three safety-schematic figures.

* ``generic``: expected fatalities against (kappa/sigma, delta/sigma) with the
  median MTD at dose 2,
* ``contours46``: mu'-sigma' panels for several kappa', one set per D,
* ``focused``: the mu'=2 slice in the sigma'-kappa' plane for several D, plus
  a report of how closely the D >= 3 slices coincide.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from . import io
from .contours import ContourSet, extract_contours
from .render import contours_svg
from .safety import Metric
from .schematic import MINIMAX_MU, Axis, FieldGrid, GridSpec, evaluate_grid
from .verify import max_relative_deviation

FIGURES = ("generic", "contours46", "focused")
DEFAULT_LEVELS = (0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
DEFAULT_STEPS = 201
FORMATS = ("csv", "json", "svg")

CONTOURS46_DOSES = (4, 6)
CONTOURS46_KAPPAS = tuple(round(0.1 * k, 1) for k in range(5, 13))
FOCUSED_DOSES = tuple(range(2, 8))

GENERIC_RANGE = (0.25, 4.0)
SIGMA_RANGE = (0.2, 2.0)
KAPPA_RANGE = (0.4, 1.4)


@dataclass
class Panel:
    stem: str
    spec: GridSpec
    grid: FieldGrid | None = None
    contours: ContourSet | None = None


def _name(v: float) -> str:
    return format(v, "g")


def generic_panels(D: int = 6, steps: int = DEFAULT_STEPS, log_x: bool = False,
                   log_y: bool = False, x_range=GENERIC_RANGE, y_range=GENERIC_RANGE,
                   metric: Metric = Metric.EXPECTED_FATALITIES) -> list[Panel]:
    spec = GridSpec(
        x_axis=Axis("kappa_over_sigma", *x_range, steps, log=log_x),
        y_axis=Axis("delta_over_sigma", *y_range, steps, log=log_y),
        fixed={"D": D, "mu_p": MINIMAX_MU},
        metric=metric,
    )
    return [Panel(f"generic_D{D}", spec)]


def contours46_panels(doses=CONTOURS46_DOSES, kappas=CONTOURS46_KAPPAS,
                      steps: int = DEFAULT_STEPS, y_range=SIGMA_RANGE, log_y: bool = False,
                      metric: Metric = Metric.EXPECTED_FATALITIES) -> list[Panel]:
    panels = []
    for D in doses:
        for k in kappas:
            spec = GridSpec(
                x_axis=Axis("mu_p", 1.0, float(D), steps),
                y_axis=Axis("sigma_p", *y_range, steps, log=log_y),
                fixed={"D": D, "kappa_p": float(k)},
                metric=metric,
            )
            panels.append(Panel(f"contours46_D{D}_kp{_name(k)}", spec))
    return panels


def focused_panels(doses=FOCUSED_DOSES, steps: int = DEFAULT_STEPS, x_range=SIGMA_RANGE,
                   y_range=KAPPA_RANGE, log_x: bool = False,
                   metric: Metric = Metric.EXPECTED_FATALITIES) -> list[Panel]:
    return [
        Panel(f"focused_D{D}", GridSpec(
            x_axis=Axis("sigma_p", *x_range, steps, log=log_x),
            y_axis=Axis("kappa_p", *y_range, steps),
            fixed={"D": D, "mu_p": MINIMAX_MU},
            metric=metric,
        ))
        for D in doses
    ]


def compute(panels: list[Panel], levels=DEFAULT_LEVELS) -> list[Panel]:
    for panel in panels:
        panel.grid = evaluate_grid(panel.spec)
        panel.contours = extract_contours(panel.grid, levels)
    return panels


def focused_report(panels: list[Panel]) -> dict:
    """Pairwise max relative deviations between the per-D slices."""
    vals = {p.spec.D: p.grid.values for p in panels}
    pairs = {f"{a}-{b}": max_relative_deviation(vals[a], vals[b])
             for a, b in itertools.combinations(sorted(vals), 2)}
    at_least_3 = [v for k, v in pairs.items() if int(k.split("-")[0]) >= 3]
    return {
        "doses": sorted(vals),
        "pairwise_max_relative_deviation": pairs,
        "max_deviation_D_ge_3": max(at_least_3) if at_least_3 else None,
    }


def write_panels(panels: list[Panel], out_dir: str, formats=FORMATS) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for panel in panels:
        g = panel.grid
        if "csv" in formats:
            name = f"{panel.stem}.grid.csv"
            with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
                io.write_grid_csv(g, fh)
            written.append(name)
        if "json" in formats:
            name = f"{panel.stem}.contours.json"
            with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
                io.dump_json(io.contours_to_json(panel.contours), fh)
            written.append(name)
        if "svg" in formats:
            name = f"{panel.stem}.svg"
            svg = contours_svg(panel.contours, (g.x[0], g.x[-1]), (g.y[0], g.y[-1]),
                               title=panel.stem)
            with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
                fh.write(svg)
            written.append(name)
    return written


def write_json(obj, out_dir: str, name: str) -> str:
    with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
        io.dump_json(obj, fh)
    return name


def panel_metadata(panels: list[Panel]) -> list[dict]:
    return [{"stem": p.stem, "grid": p.spec.to_json()} for p in panels]
