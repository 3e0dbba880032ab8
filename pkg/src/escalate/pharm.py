"""Log-normal MTD threshold model on a geometric dose grid.

Doses sit at ``log X_d = log_x1 + (d - 1) * delta``.  Individual DLT
thresholds follow ``log MTD_i ~ N(mu, sigma)`` and the fatal threshold is
``exp(2 * kappa) * MTD_i``.  Measuring ``mu`` on the dose-index scale and
``sigma``, ``kappa`` in units of ``delta`` removes the design spacing from the
problem entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy import special

from .paths import check_doses


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class RawScenario:
    D: int
    delta: float
    mu: float
    sigma: float
    kappa: float
    log_x1: float | None = None  # defaults to delta, i.e. log X_d = d * delta

    def __post_init__(self):
        check_doses(self.D)
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not self.kappa >= 0:
            raise ParameterError(f"kappa must be nonnegative, got {self.kappa}")
        for name in ("delta", "mu", "sigma", "kappa"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")


@dataclass(frozen=True)
class NormScenario:
    D: int
    mu_p: float
    sigma_p: float
    kappa_p: float

    def __post_init__(self):
        check_doses(self.D)
        if not self.sigma_p > 0:
            raise ParameterError(f"sigma_p must be positive, got {self.sigma_p}")
        if not self.kappa_p >= 0:
            raise ParameterError(f"kappa_p must be nonnegative, got {self.kappa_p}")
        if not np.isfinite(self.mu_p):
            raise ParameterError("mu_p must be finite")


def normalize(raw: RawScenario) -> NormScenario:
    log_x1 = raw.delta if raw.log_x1 is None else raw.log_x1
    log_x0 = log_x1 - raw.delta
    return NormScenario(
        D=raw.D,
        mu_p=(raw.mu - log_x0) / raw.delta,
        sigma_p=raw.sigma / raw.delta,
        kappa_p=raw.kappa / raw.delta,
    )


def scenario_from_mapping(obj: Mapping[str, Any]) -> NormScenario:
    """Parse scenario JSON in either the raw or the normalized form."""
    raw_keys = {"delta", "mu", "sigma", "kappa", "log_x1"}
    norm_keys = {"mu_prime", "sigma_prime", "kappa_prime"}
    keys = set(obj) - {"D"}
    unknown = keys - raw_keys - norm_keys
    if unknown:
        raise ParameterError(f"unknown scenario keys: {sorted(unknown)}")
    if "D" not in obj:
        raise ParameterError("scenario needs D")
    has_raw, has_norm = bool(keys & raw_keys), bool(keys & norm_keys)
    if has_raw == has_norm:
        raise ParameterError("give exactly one of the raw or normalized parameter sets")
    if has_norm:
        missing = norm_keys - keys
        if missing:
            raise ParameterError(f"missing normalized parameters: {sorted(missing)}")
        return NormScenario(
            D=obj["D"],
            mu_p=float(obj["mu_prime"]),
            sigma_p=float(obj["sigma_prime"]),
            kappa_p=float(obj["kappa_prime"]),
        )
    missing = (raw_keys - {"log_x1"}) - keys
    if missing:
        raise ParameterError(f"missing raw parameters: {sorted(missing)}")
    log_x1 = obj.get("log_x1")
    return normalize(
        RawScenario(
            D=obj["D"],
            delta=float(obj["delta"]),
            mu=float(obj["mu"]),
            sigma=float(obj["sigma"]),
            kappa=float(obj["kappa"]),
            log_x1=None if log_x1 is None else float(log_x1),
        )
    )


def std_normal_cdf(x):
    """Standard normal CDF; keeps full relative accuracy in the lower tail."""
    return special.ndtr(x)


@dataclass(frozen=True)
class DoseHazards:
    """Per-dose DLT probability ``p``, its complement ``q`` and fatal fraction ``f``."""

    p: np.ndarray
    q: np.ndarray
    f: np.ndarray

    @property
    def D(self) -> int:
        return len(self.p)

    @classmethod
    def from_probabilities(cls, p, f=None) -> "DoseHazards":
        """Hazards with ``q = 1 - p`` for directly specified DLT rates.

        ``f`` defaults to all ones (every DLT fatal).
        """
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or np.any((p < 0) | (p > 1)):
            raise ParameterError("p must be a vector of probabilities")
        f = np.ones_like(p) if f is None else np.asarray(f, dtype=float)
        if f.shape != p.shape or np.any((f < 0) | (f > 1)):
            raise ParameterError("f must be a probability vector matching p")
        return cls(p=p, q=1.0 - p, f=f)


def hazard_arrays(D: int, mu_p, sigma_p, kappa_p):
    """Vectorized hazards: returns ``(p, q, f)`` with a trailing dose axis."""
    mu_p = np.asarray(mu_p, dtype=float)[..., None]
    sigma_p = np.asarray(sigma_p, dtype=float)[..., None]
    kappa_p = np.asarray(kappa_p, dtype=float)[..., None]
    d = np.arange(1, D + 1, dtype=float)
    z = (d - mu_p) / sigma_p
    zf = (d - mu_p - 2.0 * kappa_p) / sigma_p
    p = special.ndtr(z)
    q = special.ndtr(-z)
    # ratio of two lower tails, taken in log space so deep tails do not underflow
    with np.errstate(invalid="ignore", divide="ignore"):
        f = np.exp(special.log_ndtr(zf) - special.log_ndtr(z))
    f = np.where(p > 0, np.minimum(f, 1.0), 0.0)
    return p, q, f


def hazards(scn: NormScenario) -> DoseHazards:
    p, q, f = hazard_arrays(scn.D, scn.mu_p, scn.sigma_p, scn.kappa_p)
    return DoseHazards(p=p, q=q, f=f)
