"""Monte Carlo 3+3 simulator, used only to cross-check the exact engine.

The trial rules are written out here as an explicit state machine rather
than reusing the path grammar, so agreement between the two is evidence
about both.  All trials advance in lockstep as numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .paths import COHORT_SIZE, CohortEvent, EventKind, FinalOutcome, OutcomeKind, Path
from .pharm import DoseHazards

GENERATOR = "numpy.random.PCG64"

# cohort kinds, as small integers
ESC, TOP, STA, DES = 0, 1, 2, 3
_KINDS = {ESC: EventKind.ESCALATE, TOP: EventKind.TOP_SECOND,
          STA: EventKind.CONFIRM, DES: EventKind.DEESCALATE}


@dataclass
class SimResult:
    n_trials: int
    mean_fatalities: float
    se_fatalities: float
    frac_any_fatality: float
    se_any_fatality: float
    mean_enrollment: float
    se_enrollment: float
    outcome_freqs: np.ndarray  # declared level 0..D-1, then "not found"
    metadata: dict = field(default_factory=dict)
    # per-trial records, only kept when requested
    trajectories: dict | None = None

    def to_json(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "mean_fatalities": self.mean_fatalities,
            "se_fatalities": self.se_fatalities,
            "frac_any_fatality": self.frac_any_fatality,
            "se_any_fatality": self.se_any_fatality,
            "mean_enrollment": self.mean_enrollment,
            "se_enrollment": self.se_enrollment,
            "outcome_freqs": [float(x) for x in self.outcome_freqs],
            "metadata": self.metadata,
        }


def _se(x: np.ndarray) -> float:
    n = len(x)
    return float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0


def simulate_trials(
    hz: DoseHazards, n_trials: int, seed: int, keep_trajectories: bool = False
) -> SimResult:
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    D = hz.D
    p, f = np.asarray(hz.p, float), np.asarray(hz.f, float)
    rng = np.random.Generator(np.random.PCG64(seed))

    max_steps = 2 * D
    dose = np.ones(n_trials, dtype=np.int64)  # dose of the next cohort
    kind = np.full(n_trials, ESC, dtype=np.int64)
    lo = np.zeros(n_trials, dtype=np.int64)  # highest dose cleared with 6 patients
    active = np.ones(n_trials, dtype=bool)
    outcome = np.full(n_trials, -1, dtype=np.int64)
    fatal = np.zeros(n_trials, dtype=np.int64)
    cohorts = np.zeros(n_trials, dtype=np.int64)
    if keep_trajectories:
        rec_dose = np.zeros((n_trials, max_steps), dtype=np.int8)
        rec_kind = np.full((n_trials, max_steps), -1, dtype=np.int8)
        rec_tox = np.zeros((n_trials, max_steps), dtype=np.int8)

    for step in range(max_steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        if step == max_steps:
            raise RuntimeError("simulated trial exceeded 2D cohorts")
        d, k = dose[idx], kind[idx]
        # three patients per cohort: a DLT coin and, given a DLT, a fatality coin
        u = rng.random((idx.size, COHORT_SIZE))
        v = rng.random((idx.size, COHORT_SIZE))
        dlt = u < p[d - 1, None]
        tox = dlt.sum(axis=1)
        fatal[idx] += (dlt & (v < f[d - 1, None])).sum(axis=1)
        cohorts[idx] += 1
        if keep_trajectories:
            rec_dose[idx, step] = d
            rec_kind[idx, step] = k
            rec_tox[idx, step] = tox

        new_dose, new_kind = d.copy(), k.copy()
        done = np.full(idx.size, -1, dtype=np.int64)
        step_down = np.zeros(idx.size, dtype=bool)
        lo_i = lo[idx]

        at_top = d == D
        is_esc, is_top, is_sta, is_des = k == ESC, k == TOP, k == STA, k == DES

        # escalation cohort
        m = is_esc & (tox == 0) & ~at_top
        new_dose[m] = d[m] + 1
        new_kind[m] = ESC
        m = is_esc & (tox == 0) & at_top
        new_kind[m] = TOP
        m = is_esc & (tox == 1)
        new_kind[m] = STA
        step_down |= is_esc & (tox >= 2)

        # second cohort at the top dose
        done[is_top & (tox <= 1)] = D
        step_down |= is_top & (tox >= 2)

        # confirmation cohort after 1/3
        done[is_sta & (tox == 0) & at_top] = D
        m = is_sta & (tox == 0) & ~at_top
        lo_i = np.where(m, d, lo_i)
        new_dose[m] = d[m] + 1
        new_kind[m] = ESC
        step_down |= is_sta & (tox > 0)

        # de-escalation cohort
        done[is_des & (tox <= 1)] = d[is_des & (tox <= 1)]
        step_down |= is_des & (tox >= 2)

        # moving down from d: declare lo if d-1 is already cleared
        below = d - 1
        m = step_down & (below == lo_i)
        done[m] = lo_i[m]
        m = step_down & (below > lo_i)
        new_dose[m] = below[m]
        new_kind[m] = DES

        lo[idx] = lo_i
        dose[idx] = new_dose
        kind[idx] = new_kind
        fin = done >= 0
        outcome[idx[fin]] = done[fin]
        active[idx[fin]] = False

    fat = fatal.astype(float)
    anyf = (fatal > 0).astype(float)
    enroll = (COHORT_SIZE * cohorts).astype(float)
    result = SimResult(
        n_trials=n_trials,
        mean_fatalities=float(fat.mean()),
        se_fatalities=_se(fat),
        frac_any_fatality=float(anyf.mean()),
        se_any_fatality=_se(anyf),
        mean_enrollment=float(enroll.mean()),
        se_enrollment=_se(enroll),
        outcome_freqs=np.bincount(outcome, minlength=D + 1) / n_trials,
        metadata={"seed": seed, "generator": GENERATOR},
    )
    if keep_trajectories:
        result.trajectories = {
            "dose": rec_dose, "kind": rec_kind, "tox": rec_tox, "outcome": outcome,
        }
    return result


def trajectory_paths(result: SimResult, D: int) -> list[Path]:
    """Rebuild each simulated trial as a :class:`Path`."""
    tr = result.trajectories
    if tr is None:
        raise ValueError("simulation was run without keep_trajectories")
    paths = []
    for j in range(result.n_trials):
        events = tuple(
            CohortEvent(int(d), _KINDS[int(k)], int(t))
            for d, k, t in zip(tr["dose"][j], tr["kind"][j], tr["tox"][j])
            if k >= 0
        )
        level = int(tr["outcome"][j])
        kind = OutcomeKind.MTD_NOT_FOUND if level == D else OutcomeKind.DECLARE_MTD
        paths.append(Path(events, FinalOutcome(kind, level)))
    return paths
