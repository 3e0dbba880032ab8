"""The safety field F_D(mu', sigma', kappa') and its grid evaluations.

Lattice points are evaluated in fixed-size blocks.  Block boundaries depend
only on D, so the numbers come out identical whatever the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .paths import design_tables
from .pharm import ParameterError, hazard_arrays
from .safety import Metric, block_size, metric_block

AXIS_NAMES = ("mu_p", "sigma_p", "kappa_p", "kappa_over_sigma", "delta_over_sigma")
MINIMAX_MU = 2.0
DEFAULT_SCHEMATIC_DOSES = 6
MIN_FIELD_DOSES, MAX_FIELD_DOSES = 2, 10


class GridSpecError(ValueError):
    pass


def _check_field_doses(D: int) -> None:
    if not MIN_FIELD_DOSES <= D <= MAX_FIELD_DOSES:
        raise ParameterError(
            f"safety field needs {MIN_FIELD_DOSES} <= D <= {MAX_FIELD_DOSES}, got {D}"
        )


def thread_count() -> int:
    env = os.environ.get("ESCALATE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"ESCALATE_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def field_values(D: int, mu_p, sigma_p, kappa_p, metric: Metric = Metric.EXPECTED_FATALITIES,
                 threads: int | None = None) -> np.ndarray:
    """Evaluate the safety field at many points at once (inputs broadcast)."""
    _check_field_doses(D)
    mu_p, sigma_p, kappa_p = (np.asarray(a, dtype=float) for a in
                              np.broadcast_arrays(mu_p, sigma_p, kappa_p))
    shape = mu_p.shape
    mu_p, sigma_p, kappa_p = mu_p.ravel(), sigma_p.ravel(), kappa_p.ravel()
    if not (np.all(sigma_p > 0) and np.all(kappa_p >= 0)):
        raise ParameterError("need sigma_p > 0 and kappa_p >= 0")
    if not (np.all(np.isfinite(mu_p)) and np.all(np.isfinite(sigma_p))
            and np.all(np.isfinite(kappa_p))):
        raise ParameterError("field parameters must be finite")

    tables = design_tables(D)
    size = block_size(tables)
    starts = range(0, mu_p.size, size)

    def run(s: int) -> np.ndarray:
        sl = slice(s, s + size)
        p, q, f = hazard_arrays(D, mu_p[sl], sigma_p[sl], kappa_p[sl])
        return metric_block(tables, p, q, f, metric)

    threads = thread_count() if threads is None else threads
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    out = np.concatenate(parts) if parts else np.empty(0)
    return out.reshape(shape)


def safety_field(D: int, mu_p: float, sigma_p: float, kappa_p: float,
                 metric: Metric = Metric.EXPECTED_FATALITIES) -> float:
    return float(field_values(D, mu_p, sigma_p, kappa_p, metric, threads=1))


def minimax_slice(D: int, sigma_p: float, kappa_p: float,
                  metric: Metric = Metric.EXPECTED_FATALITIES) -> float:
    """Worst case with the median MTD sitting at dose level 2."""
    return safety_field(D, MINIMAX_MU, sigma_p, kappa_p, metric)


def schematic_axes_to_normalized(kappa_over_sigma, delta_over_sigma):
    """Map (kappa/sigma, delta/sigma) to (sigma', kappa')."""
    kos = np.asarray(kappa_over_sigma, dtype=float)
    dos = np.asarray(delta_over_sigma, dtype=float)
    if np.any(kos <= 0) or np.any(dos <= 0):
        raise ParameterError("schematic indices must be positive")
    sigma_p = 1.0 / dos
    return sigma_p, kos * sigma_p


def schematic_point(kappa_over_sigma: float, delta_over_sigma: float,
                    D: int = DEFAULT_SCHEMATIC_DOSES,
                    metric: Metric = Metric.EXPECTED_FATALITIES) -> float:
    sigma_p, kappa_p = schematic_axes_to_normalized(kappa_over_sigma, delta_over_sigma)
    return minimax_slice(D, float(sigma_p), float(kappa_p), metric)


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int
    log: bool = False

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise GridSpecError(f"unknown axis {self.name!r}; choose from {AXIS_NAMES}")
        if not self.min < self.max:
            raise GridSpecError(f"axis {self.name}: need min < max")
        if self.steps < 2:
            raise GridSpecError(f"axis {self.name}: need at least 2 steps")
        if self.log and self.min <= 0:
            raise GridSpecError(f"axis {self.name}: log spacing needs min > 0")

    def values(self) -> np.ndarray:
        if self.log:
            v = np.geomspace(self.min, self.max, self.steps)
        else:
            v = np.linspace(self.min, self.max, self.steps)
        v[0], v[-1] = self.min, self.max
        return v

    def to_json(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max,
                "steps": self.steps, "log": self.log}


@dataclass(frozen=True)
class GridSpec:
    x_axis: Axis
    y_axis: Axis
    fixed: dict = field(default_factory=dict)
    metric: Metric = Metric.EXPECTED_FATALITIES

    def __post_init__(self):
        if self.x_axis.name == self.y_axis.name:
            raise GridSpecError("x and y axes must differ")
        bad = set(self.fixed) - set(AXIS_NAMES) - {"D"}
        if bad:
            raise GridSpecError(f"unknown fixed parameters: {sorted(bad)}")
        clash = {self.x_axis.name, self.y_axis.name} & set(self.fixed)
        if clash:
            raise GridSpecError(f"parameters both fixed and on an axis: {sorted(clash)}")
        names = {self.x_axis.name, self.y_axis.name} | set(self.fixed)
        if {"sigma_p", "delta_over_sigma"} <= names:
            raise GridSpecError("sigma_p and delta_over_sigma are alternatives")
        if {"kappa_p", "kappa_over_sigma"} <= names:
            raise GridSpecError("kappa_p and kappa_over_sigma are alternatives")
        if not ({"sigma_p", "delta_over_sigma"} & names):
            raise GridSpecError("need sigma_p or delta_over_sigma")
        if not ({"kappa_p", "kappa_over_sigma"} & names):
            raise GridSpecError("need kappa_p or kappa_over_sigma")

    @property
    def D(self) -> int:
        return int(self.fixed.get("D", DEFAULT_SCHEMATIC_DOSES))

    def to_json(self) -> dict:
        return {"x_axis": self.x_axis.to_json(), "y_axis": self.y_axis.to_json(),
                "fixed": dict(self.fixed), "metric": self.metric.value}

    def normalized(self, X: np.ndarray, Y: np.ndarray):
        """(mu', sigma', kappa') arrays for lattice coordinates X, Y."""
        vals = {k: v for k, v in self.fixed.items() if k != "D"}
        vals[self.x_axis.name] = X
        vals[self.y_axis.name] = Y
        mu_p = vals.get("mu_p", MINIMAX_MU)
        if "sigma_p" in vals:
            sigma_p = np.asarray(vals["sigma_p"], dtype=float)
        else:
            dos = np.asarray(vals["delta_over_sigma"], dtype=float)
            if np.any(dos <= 0):
                raise ParameterError("delta_over_sigma must be positive")
            sigma_p = 1.0 / dos
        if "kappa_p" in vals:
            kappa_p = np.asarray(vals["kappa_p"], dtype=float)
        else:
            kappa_p = np.asarray(vals["kappa_over_sigma"], dtype=float) * sigma_p
        return np.broadcast_arrays(np.asarray(mu_p, dtype=float), sigma_p, kappa_p)


@dataclass(frozen=True)
class FieldGrid:
    spec: GridSpec
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # len(y) x len(x), rows ascending y


def evaluate_grid(spec: GridSpec, threads: int | None = None) -> FieldGrid:
    x, y = spec.x_axis.values(), spec.y_axis.values()
    X, Y = np.meshgrid(x, y)
    mu_p, sigma_p, kappa_p = spec.normalized(X, Y)
    values = field_values(spec.D, mu_p, sigma_p, kappa_p, spec.metric, threads=threads)
    return FieldGrid(spec=spec, x=x, y=y, values=values)
