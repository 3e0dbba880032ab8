"""Exhaustive enumeration of standard 3+3 dose-escalation paths.

The generator follows a small grammar with three nonterminals:

* ``esc(d, lo..hi)`` -- dose ``d`` has just been cleared; escalate to ``d+1``
  (or, at the top dose, enroll a second cohort there),
* ``sta(d, lo..hi)`` -- a 1/3 result at ``d`` calls for a confirmation cohort,
* ``des(d, lo)`` -- ``d`` is too toxic; step down until a dose holding 6
  patients with at most one DLT is found, or ``lo`` is reached.

``lo`` records the highest dose already known to be tolerable with 6
patients (0 if none), so a de-escalation that lands on it declares it at once.
Enrollment starts in state ``esc(0, 0..D)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

MAX_DOSES = 12
COHORT_SIZE = 3

# Known path counts for D = 1..10.
PATH_COUNTS = {
    1: 10,
    2: 46,
    3: 154,
    4: 442,
    5: 1162,
    6: 2890,
    7: 6922,
    8: 16138,
    9: 36874,
    10: 82954,
}


class MalformedPathError(ValueError):
    pass


class EventKind(enum.Enum):
    ESCALATE = "esc"
    TOP_SECOND = "top"
    CONFIRM = "sta"
    DEESCALATE = "des"

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {
    EventKind.ESCALATE: "^",
    EventKind.TOP_SECOND: "*",
    EventKind.CONFIRM: "-",
    EventKind.DEESCALATE: ":",
}


class OutcomeKind(enum.Enum):
    DECLARE_MTD = "declare_mtd"
    MTD_NOT_FOUND = "mtd_notfound"


class CohortEvent(NamedTuple):
    dose: int
    kind: EventKind
    tox: int

    def __str__(self) -> str:
        return f"{self.dose}{self.kind.symbol}{self.tox}"


class FinalOutcome(NamedTuple):
    kind: OutcomeKind
    level: int

    def __str__(self) -> str:
        return f"{self.kind.value}({self.level})"


@dataclass(frozen=True)
class Path:
    events: tuple[CohortEvent, ...]
    outcome: FinalOutcome

    def __str__(self) -> str:
        return " ".join(str(e) for e in self.events) + " " + str(self.outcome)

    def key(self) -> tuple:
        """Hashable canonical encoding, independent of enum identity."""
        return (
            tuple((e.dose, e.kind.value, e.tox) for e in self.events),
            (self.outcome.kind.value, self.outcome.level),
        )


def check_doses(D: int) -> int:
    if not isinstance(D, (int, np.integer)) or isinstance(D, bool):
        raise TypeError(f"dose count must be an integer, got {D!r}")
    if not 1 <= D <= MAX_DOSES:
        raise ValueError(f"dose count must lie in 1..{MAX_DOSES}, got {D}")
    return int(D)


class _Grammar:
    """Depth-first path generator; branches are tried with tox ascending."""

    def __init__(self, D: int):
        self.hi = D
        # events are (dose, kind, tox) triples, so intern them
        self._events = {
            (d, k, t): CohortEvent(d, k, t)
            for d in range(1, D + 1)
            for k in EventKind
            for t in range(COHORT_SIZE + 1)
        }
        self._declare = [FinalOutcome(OutcomeKind.DECLARE_MTD, lv) for lv in range(D)]
        self._not_found = FinalOutcome(OutcomeKind.MTD_NOT_FOUND, D)

    def _emit(self, prefix: list, outcome: FinalOutcome) -> Path:
        return Path(tuple(prefix), outcome)

    def esc(self, d: int, lo: int, prefix: list) -> Iterator[Path]:
        ev = self._events
        if d == self.hi:
            for t in range(4):
                prefix.append(ev[d, EventKind.TOP_SECOND, t])
                if t <= 1:
                    yield self._emit(prefix, self._not_found)
                else:
                    yield from self.des(d, lo, prefix)
                prefix.pop()
            return
        d1 = d + 1
        for t in range(4):
            prefix.append(ev[d1, EventKind.ESCALATE, t])
            if t == 0:
                yield from self.esc(d1, lo, prefix)
            elif t == 1:
                yield from self.sta(d1, lo, prefix)
            else:
                yield from self.des(d1, lo, prefix)
            prefix.pop()

    def sta(self, d: int, lo: int, prefix: list) -> Iterator[Path]:
        ev = self._events
        prefix.append(ev[d, EventKind.CONFIRM, 0])
        if d == self.hi:
            yield self._emit(prefix, self._not_found)
        else:
            yield from self.esc(d, d, prefix)
        prefix.pop()
        for t in range(1, 4):
            prefix.append(ev[d, EventKind.CONFIRM, t])
            yield from self.des(d, lo, prefix)
            prefix.pop()

    def des(self, d: int, lo: int, prefix: list) -> Iterator[Path]:
        d1 = d - 1
        if d1 == lo:
            yield self._emit(prefix, self._declare[lo])
            return
        for t in range(4):
            prefix.append(self._events[d1, EventKind.DEESCALATE, t])
            if t <= 1:
                yield self._emit(prefix, self._declare[d1])
            else:
                yield from self.des(d1, lo, prefix)
            prefix.pop()


def iter_paths(D: int) -> Iterator[Path]:
    """Yield every 3+3 path for ``D`` doses in deterministic depth-first order."""
    D = check_doses(D)
    return _Grammar(D).esc(0, 0, [])


def enumerate_paths(D: int) -> list[Path]:
    """All paths of the 3+3 design with ``D`` prespecified doses.

    >>> len(enumerate_paths(1))
    10
    >>> str(enumerate_paths(1)[-1])
    '1^3 declare_mtd(0)'
    """
    return list(iter_paths(D))


def path_to_matrix(path: Path, D: int) -> np.ndarray:
    """Encode ``path`` as a 2 x D integer array; empty cells hold -1."""
    T = np.full((2, D), -1, dtype=np.int8)
    for ev in path.events:
        if not 1 <= ev.dose <= D:
            raise MalformedPathError(f"event {ev} lies outside doses 1..{D}")
        if not 0 <= ev.tox <= COHORT_SIZE:
            raise MalformedPathError(f"event {ev} has tox outside 0..{COHORT_SIZE}")
        col = ev.dose - 1
        if T[0, col] < 0:
            T[0, col] = ev.tox
        elif T[1, col] < 0:
            T[1, col] = ev.tox
        else:
            raise MalformedPathError(f"third cohort at dose {ev.dose} in {path}")
    return T


def format_matrix(T: np.ndarray) -> str:
    return "\n".join(" ".join("-" if v < 0 else str(v) for v in row) for row in T)


@dataclass(frozen=True)
class DesignTables:
    """Design constants for one value of D, one row per path.

    ``U = [Y | 3n - Y]`` so that ``log pi = b + U @ [log p; log q]``.
    ``outcome`` holds the declared level (0..D-1) or D for "MTD not found".
    """

    D: int
    T: np.ndarray  # J x 2 x D, -1 where empty
    Y: np.ndarray  # J x D
    n: np.ndarray  # J x D
    b: np.ndarray  # J
    outcome: np.ndarray  # J

    @property
    def J(self) -> int:
        return self.Y.shape[0]

    @property
    def U(self) -> np.ndarray:
        return np.hstack([self.Y, COHORT_SIZE * self.n - self.Y])

    @property
    def enrollment(self) -> np.ndarray:
        return COHORT_SIZE * self.n.sum(axis=1)


_LOG_BINOM = np.array([math.log(math.comb(COHORT_SIZE, t)) for t in range(COHORT_SIZE + 1)])


def build_tables(paths: list[Path], D: int) -> DesignTables:
    D = check_doses(D)
    J = len(paths)
    T = np.empty((J, 2, D), dtype=np.int8)
    outcome = np.empty(J, dtype=np.int64)
    for j, path in enumerate(paths):
        T[j] = path_to_matrix(path, D)
        if path.outcome.kind is OutcomeKind.MTD_NOT_FOUND:
            if path.outcome.level != D:
                raise MalformedPathError(f"MTD-not-found must sit at dose {D}: {path}")
        elif not 0 <= path.outcome.level < D:
            raise MalformedPathError(f"declared level out of range: {path}")
        outcome[j] = path.outcome.level
    filled = T >= 0
    Y = np.where(filled, T, 0).sum(axis=1).astype(np.int64)
    n = filled.sum(axis=1).astype(np.int64)
    b = np.where(filled, _LOG_BINOM[np.clip(T, 0, None)], 0.0).sum(axis=(1, 2))
    for arr in (T, Y, n, b, outcome):
        arr.setflags(write=False)
    return DesignTables(D=D, T=T, Y=Y, n=n, b=b, outcome=outcome)


_TABLE_CACHE: dict[int, DesignTables] = {}


def design_tables(D: int) -> DesignTables:
    """Cached ``build_tables(enumerate_paths(D), D)``."""
    D = check_doses(D)
    if D not in _TABLE_CACHE:
        _TABLE_CACHE[D] = build_tables(enumerate_paths(D), D)
    return _TABLE_CACHE[D]
