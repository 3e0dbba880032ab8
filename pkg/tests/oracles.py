"""Independent reference computations used by the tests.

``tree_walk`` restates the 3+3 rules in terms of per-dose patient counts
rather than grammar states, and multiplies binomial pmf terms along each
branch.  It shares no code with the enumerator or the matrix evaluator.
"""

from math import comb

import mpmath


def _binom_pmf(t, p):
    return comb(3, t) * p**t * (1 - p) ** (3 - t)


def tree_walk(p, f=None):
    """Yield ``(key, probability, dlts_per_dose, n_cohorts)`` for every path.

    ``key`` has the same layout as ``Path.key()``.
    """
    D = len(p)
    f = [1.0] * D if f is None else f

    def cohorts_at(hist, d):
        return [t for (dd, _, t) in hist if dd == d]

    def finish(hist, prob, kind, level):
        dlts = [sum(cohorts_at(hist, d)) for d in range(1, D + 1)]
        n = len(hist)
        return (tuple(hist), (kind, level)), prob, dlts, n

    def step_down(hist, prob, d):
        below = d - 1
        if below == 0:
            yield finish(hist, prob, "declare_mtd", 0)
        elif len(cohorts_at(hist, below)) == 2:
            # already holds 6 patients with at most one DLT
            yield finish(hist, prob, "declare_mtd", below)
        else:
            yield from enroll(hist, prob, below, "des")

    def enroll(hist, prob, d, kind):
        for t in range(4):
            h = hist + [(d, kind, t)]
            pr = prob * _binom_pmf(t, p[d - 1])
            seen = cohorts_at(h, d)
            if len(seen) == 1:
                if t == 0:
                    if d < D:
                        yield from enroll(h, pr, d + 1, "esc")
                    else:
                        yield from enroll(h, pr, d, "top")
                elif t == 1:
                    yield from enroll(h, pr, d, "sta")
                else:
                    yield from step_down(h, pr, d)
            else:
                total = sum(seen)
                if total >= 2:
                    yield from step_down(h, pr, d)
                elif kind == "des":
                    yield finish(h, pr, "declare_mtd", d)
                elif d == D:
                    yield finish(h, pr, "mtd_notfound", D)
                else:
                    yield from enroll(h, pr, d + 1, "esc")

    yield from enroll([], 1.0, 1, "esc")


def tree_walk_summary(p, f=None):
    """Exact summary by tree walk: (E fatalities, P(any fatal), E enrollment, outcome dist)."""
    D = len(p)
    f = [1.0] * D if f is None else f
    ef = pa = en = 0.0
    dist = [0.0] * (D + 1)
    for (events, (kind, level)), prob, dlts, n in tree_walk(p, f):
        ef += prob * sum(y * fd for y, fd in zip(dlts, f))
        surv = 1.0
        for y, fd in zip(dlts, f):
            surv *= (1 - fd) ** y
        pa += prob * (1 - surv)
        en += prob * 3 * n
        dist[level] += prob
    return ef, pa, en, dist


def mp_norm_cdf(x, dps=50):
    with mpmath.workdps(dps):
        return mpmath.ncdf(mpmath.mpf(x))


def mp_hazards(D, mu_p, sigma_p, kappa_p, dps=50):
    """High-precision p_d and f_d for d = 1..D."""
    with mpmath.workdps(dps):
        mu, s, k = mpmath.mpf(mu_p), mpmath.mpf(sigma_p), mpmath.mpf(kappa_p)
        p, fr = [], []
        for d in range(1, D + 1):
            pd = mpmath.ncdf((d - mu) / s)
            p.append(pd)
            fr.append(mpmath.ncdf((d - mu - 2 * k) / s) / pd)
        return [float(v) for v in p], [float(v) for v in fr]
