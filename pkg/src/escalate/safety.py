"""Exact path probabilities and fatal-toxicity summaries.

Everything runs in log space on the design constants::

    log pi = b + Y @ log p + (3n - Y) @ log q

with the convention ``0 * log 0 = 0`` so that degenerate doses (``p`` of 0 or
1) give exact zeros instead of NaN.  The direct product formula is kept in
:func:`path_probabilities_direct` as a cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .paths import COHORT_SIZE, DesignTables
from .pharm import DoseHazards


class ShapeError(ValueError):
    pass


class Metric(enum.Enum):
    EXPECTED_FATALITIES = "expected_fatalities"
    PROB_ANY_FATALITY = "prob_any_fatality"


def _masked_log_dot(counts: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """``counts @ log(probs).T`` for ``counts`` J x D and ``probs`` K x D.

    Entries where a positive count meets a zero probability become -inf;
    zero counts against zero probabilities contribute nothing.
    """
    zero = probs <= 0
    with np.errstate(divide="ignore"):
        logs = np.where(zero, 0.0, np.log(np.where(zero, 1.0, probs)))
    out = counts @ logs.T
    if zero.any():
        hit = (counts > 0).astype(float) @ zero.T.astype(float)
        out[hit > 0] = -np.inf
    return out


def _check(tables: DesignTables, *vectors: np.ndarray) -> None:
    for v in vectors:
        if v.shape[-1] != tables.D:
            raise ShapeError(f"expected {tables.D} doses, got shape {v.shape}")


def _log_pi(tables: DesignTables, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    Y = tables.Y.astype(float)
    R = (COHORT_SIZE * tables.n - tables.Y).astype(float)
    return tables.b[:, None] + _masked_log_dot(Y, p) + _masked_log_dot(R, q)


def log_path_probabilities(tables: DesignTables, hz: DoseHazards) -> np.ndarray:
    _check(tables, hz.p, hz.q)
    return _log_pi(tables, hz.p[None, :], hz.q[None, :])[:, 0]


def path_probabilities(tables: DesignTables, hz: DoseHazards) -> np.ndarray:
    """J-vector of exact path probabilities, in the row order of ``tables``."""
    return np.exp(log_path_probabilities(tables, hz))


def path_probabilities_direct(tables: DesignTables, hz: DoseHazards) -> np.ndarray:
    """Product of binomial cohort terms, evaluated without logarithms."""
    _check(tables, hz.p, hz.q)
    T = tables.T.astype(np.int64)
    filled = T >= 0
    t = np.where(filled, T, 0)
    binom = np.array([1.0, 3.0, 3.0, 1.0])[t]
    # numpy gives 0.0 ** 0 == 1.0, which is the convention we need
    terms = binom * hz.p[None, None, :] ** t * hz.q[None, None, :] ** (COHORT_SIZE - t)
    return np.where(filled, terms, 1.0).prod(axis=(1, 2))


def _check_pi(pi: np.ndarray, tables: DesignTables) -> None:
    if pi.shape != (tables.J,):
        raise ShapeError(f"expected {tables.J} path probabilities, got {pi.shape}")


def expected_fatalities(pi: np.ndarray, tables: DesignTables, hz: DoseHazards) -> float:
    _check_pi(pi, tables)
    _check(tables, hz.f)
    return float(pi @ (tables.Y @ hz.f))


def expected_dlts(pi: np.ndarray, tables: DesignTables) -> float:
    _check_pi(pi, tables)
    return float(pi @ tables.Y.sum(axis=1))


def _log_survival(tables: DesignTables, f: np.ndarray) -> np.ndarray:
    # log P(no fatal DLT | path), each DLT fatal independently with prob f_d
    return _masked_log_dot(tables.Y.astype(float), 1.0 - f)


def prob_any_fatality(pi: np.ndarray, tables: DesignTables, hz: DoseHazards) -> float:
    _check_pi(pi, tables)
    _check(tables, hz.f)
    return float(pi @ -np.expm1(_log_survival(tables, hz.f[None, :])[:, 0]))


@dataclass
class SafetySummary:
    expected_fatalities: float
    prob_any_fatality: float
    expected_enrollment: float
    mtd_distribution: np.ndarray  # declared level 0..D-1, then "not found"
    D: int = field(default=0)

    def to_json(self) -> dict:
        dist = {str(lv): float(v) for lv, v in enumerate(self.mtd_distribution[:-1])}
        dist["not_found"] = float(self.mtd_distribution[-1])
        return {
            "expected_fatalities": self.expected_fatalities,
            "prob_any_fatality": self.prob_any_fatality,
            "expected_enrollment": self.expected_enrollment,
            "mtd_distribution": dist,
        }


def mtd_distribution(pi: np.ndarray, tables: DesignTables) -> np.ndarray:
    _check_pi(pi, tables)
    return np.bincount(tables.outcome, weights=pi, minlength=tables.D + 1)


def summarize(tables: DesignTables, hz: DoseHazards) -> SafetySummary:
    pi = path_probabilities(tables, hz)
    return SafetySummary(
        expected_fatalities=expected_fatalities(pi, tables, hz),
        prob_any_fatality=prob_any_fatality(pi, tables, hz),
        expected_enrollment=float(pi @ tables.enrollment),
        mtd_distribution=mtd_distribution(pi, tables),
        D=tables.D,
    )


# Working-set size (path x scenario entries) per block; depends only on J so
# block boundaries, and therefore results, never depend on thread count.
_BLOCK_ENTRIES = 1 << 21


def block_size(tables: DesignTables) -> int:
    return max(1, _BLOCK_ENTRIES // tables.J)


def metric_block(
    tables: DesignTables, p: np.ndarray, q: np.ndarray, f: np.ndarray, metric: Metric
) -> np.ndarray:
    """Evaluate ``metric`` for K scenarios given K x D hazard arrays."""
    _check(tables, p, q, f)
    pi = np.exp(_log_pi(tables, p, q))
    if metric is Metric.EXPECTED_FATALITIES:
        per_path = tables.Y.astype(float) @ f.T
    elif metric is Metric.PROB_ANY_FATALITY:
        per_path = -np.expm1(_log_survival(tables, f))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return (pi * per_path).sum(axis=0)
