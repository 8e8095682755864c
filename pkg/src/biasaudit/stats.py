"""Group-comparison statistics: one-sided chi-squared, Mann-Whitney U,
Shapiro-Wilk normality, and per-group summary statistics.

Conventions fixed across the toolkit:

* The chi-squared rate comparison is Pearson's, one degree of freedom, no
  continuity correction. One-sided p is half the two-sided p, attributed to
  the group with the higher empirical rejection rate; equal rates give
  p = 1.0 exactly.
* Mann-Whitney uses midranks. The exact mode enumerates the permutation
  distribution (feasible up to 20 combined observations); the approximate
  mode is the tie-corrected normal with continuity correction.
* Shapiro-Wilk follows Royston's algorithm for 3 <= n <= 5000.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

from .dip import _dip_sorted
from .errors import (
    DegenerateDataError,
    InsufficientDataError,
    ParameterError,
)

__all__ = [
    "ContingencyTable2x2",
    "Sidedness",
    "TestResult",
    "MwuMode",
    "SummaryStats",
    "chi2_survival",
    "chi_squared_one_sided",
    "mann_whitney_u",
    "shapiro_wilk",
    "summary_stats",
]

_NORMAL = NormalDist()


class Sidedness(enum.Enum):
    ONE_SIDED = "one-sided"
    TWO_SIDED = "two-sided"


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test.

    ``direction`` names the empirically worse-off group for one-sided group
    comparisons and is None when the test is symmetric or the groups tie.
    """

    statistic: float
    p_value: float
    sidedness: Sidedness
    direction: str | None = None


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Accept/reject counts for two groups at one threshold."""

    accepted_a: int
    rejected_a: int
    accepted_b: int
    rejected_b: int
    group_a: str = "a"
    group_b: str = "b"

    def __post_init__(self):
        for name in ("accepted_a", "rejected_a", "accepted_b", "rejected_b"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ParameterError(f"{name} must be a non-negative int, got {v!r}")


def chi2_survival(x: float) -> float:
    """Survival function of the chi-squared distribution with 1 df.

    P(X >= x) = erfc(sqrt(x / 2)) for x >= 0.
    """
    if not math.isfinite(x) or x < 0:
        raise ParameterError(f"chi-squared statistic must be finite and >= 0, got {x}")
    return math.erfc(math.sqrt(x / 2.0))


def chi_squared_one_sided(t: ContingencyTable2x2) -> TestResult:
    """One-sided two-proportion chi-squared test on a 2x2 table.

    Tests whether one group's rejection rate exceeds the other's. The p-value
    is the halved two-sided Pearson p (no Yates correction), attributed to the
    group with the higher rejection rate; exactly 1.0 when the rates tie.
    """
    row_a = t.accepted_a + t.rejected_a
    row_b = t.accepted_b + t.rejected_b
    if row_a == 0 or row_b == 0:
        raise DegenerateDataError("both groups need at least one trial")
    # Exact integer cross-comparison of rejected_a/row_a vs rejected_b/row_b.
    lhs = t.rejected_a * row_b
    rhs = t.rejected_b * row_a
    if lhs == rhs:
        return TestResult(0.0, 1.0, Sidedness.ONE_SIDED, None)
    n = row_a + row_b
    col_acc = t.accepted_a + t.accepted_b
    col_rej = t.rejected_a + t.rejected_b
    det = t.accepted_a * t.rejected_b - t.accepted_b * t.rejected_a
    # Unequal rates imply every margin is positive, so the denominator is too.
    stat = n * det * det / (row_a * row_b * col_acc * col_rej)
    p_one = chi2_survival(stat) / 2.0
    worse = t.group_a if lhs > rhs else t.group_b
    return TestResult(float(stat), p_one, Sidedness.ONE_SIDED, worse)


class MwuMode(enum.Enum):
    AUTO = "auto"
    EXACT = "exact"
    NORMAL_APPROX = "normal-approx"


# Exact enumeration is limited to this many combined observations.
MWU_EXACT_LIMIT = 20


def _doubled_midranks(pooled_sorted: list[tuple[float, int]]) -> list[int]:
    """Doubled midranks (exact integers) for a sorted pooled sample.

    Midranks are averages of 1-based positions over each tie group; doubling
    keeps them integral so the exact mode can count in integer arithmetic.
    """
    n = len(pooled_sorted)
    out = [0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled_sorted[j + 1][0] == pooled_sorted[i][0]:
            j += 1
        d = i + j + 2  # 2 * midrank, with 1-based positions i+1 .. j+1
        for k in range(i, j + 1):
            out[k] = d
        i = j + 1
    return out


def _exact_mwu_p(doubled: list[int], in_a: list[bool], n_a: int, n_b: int) -> float:
    """Two-sided exact permutation p for U, halved rank-sum distribution.

    Counts size-n_a subsets of the doubled midranks whose U is at least as
    far from the null mean as observed, via integer subset-sum DP.
    """
    du_obs = sum(d for d, flag in zip(doubled, in_a) if flag) - n_a * (n_a + 1)
    center = n_a * n_b  # 2 * E[U]
    dev_obs = abs(du_obs - center)

    # counts[k] maps doubled rank-sum -> number of size-k subsets achieving it
    counts: list[dict[int, int]] = [dict() for _ in range(n_a + 1)]
    counts[0][0] = 1
    for d in doubled:
        for k in range(min(n_a, len(doubled)), 0, -1):
            prev = counts[k - 1]
            if not prev:
                continue
            cur = counts[k]
            for s, c in prev.items():
                cur[s + d] = cur.get(s + d, 0) + c
    total = math.comb(n_a + n_b, n_a)
    extreme = 0
    base = n_a * (n_a + 1)
    for s, c in counts[n_a].items():
        if abs((s - base) - center) >= dev_obs:
            extreme += c
    return extreme / total


def mann_whitney_u(
    a: Sequence[float], b: Sequence[float], mode: MwuMode = MwuMode.AUTO
) -> TestResult:
    """Two-sided Mann-Whitney U test with midranks.

    The statistic is U for the first sample. Auto mode enumerates exactly
    when the combined size is at most MWU_EXACT_LIMIT and there are no ties,
    otherwise falls back to the tie-corrected normal approximation with
    continuity correction. Requesting Exact beyond the limit is an error.
    ``direction`` names the stochastically larger sample ("a" or "b") when
    the statistic is off-center.
    """
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise InsufficientDataError("both samples must be non-empty")
    n = n_a + n_b

    pooled = sorted([(float(v), 0) for v in a] + [(float(v), 1) for v in b])
    doubled = _doubled_midranks(pooled)
    has_ties = any(
        pooled[i][0] == pooled[i + 1][0] for i in range(n - 1)
    )
    du_a = sum(d for d, (_, src) in zip(doubled, pooled) if src == 0) - n_a * (
        n_a + 1
    )
    u_a = du_a / 2.0

    if mode is MwuMode.EXACT and n > MWU_EXACT_LIMIT:
        raise ParameterError(
            f"exact mode supports at most {MWU_EXACT_LIMIT} combined "
            f"observations, got {n}"
        )
    if mode is MwuMode.AUTO:
        mode = (
            MwuMode.EXACT
            if (n <= MWU_EXACT_LIMIT and not has_ties)
            else MwuMode.NORMAL_APPROX
        )

    center = n_a * n_b / 2.0
    if u_a > center:
        direction = "a"
    elif u_a < center:
        direction = "b"
    else:
        direction = None

    if mode is MwuMode.EXACT:
        in_a = [src == 0 for _, src in pooled]
        p = _exact_mwu_p(doubled, in_a, n_a, n_b)
        return TestResult(u_a, p, Sidedness.TWO_SIDED, direction)

    # Tie-corrected normal approximation.
    tie_term = 0.0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[j + 1][0] == pooled[i][0]:
            j += 1
        t = j - i + 1
        if t > 1:
            tie_term += t**3 - t
        i = j + 1
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        # every observation tied: U is deterministic at its mean
        return TestResult(u_a, 1.0, Sidedness.TWO_SIDED, None)
    dev = abs(u_a - center)
    z = max(dev - 0.5, 0.0) / math.sqrt(var)  # continuity correction
    p = math.erfc(z / math.sqrt(2.0))
    return TestResult(u_a, min(p, 1.0), Sidedness.TWO_SIDED, direction)


# Polynomial coefficients from Royston's Shapiro-Wilk approximation,
# lowest order first (evaluated with math.fsum via Horner below).
_SW_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_SW_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_SW_SMALL_MU = (0.5440, -0.39978, 0.025054, -0.0006714)
_SW_SMALL_SIG = (1.3822, -0.77857, 0.062767, -0.0020322)
_SW_BIG_MU = (-1.5861, -0.31082, -0.083751, 0.0038915)
_SW_BIG_SIG = (-0.4803, -0.082676, 0.0030302)


def _poly(coefs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * x + c
    return acc


def shapiro_wilk(a: Sequence[float]) -> TestResult:
    """Shapiro-Wilk normality test, Royston's approximation (3 <= n <= 5000).

    Returns W as the statistic and the upper-tail p for non-normality.
    Constant samples are degenerate and rejected.
    """
    n = len(a)
    if n < 3:
        raise InsufficientDataError(f"Shapiro-Wilk needs n >= 3, got {n}")
    if n > 5000:
        raise ParameterError(f"Shapiro-Wilk supports n <= 5000, got {n}")
    x = sorted(float(v) for v in a)
    if x[0] == x[-1]:
        raise DegenerateDataError("sample is constant")

    # Expected normal order statistics (Blom scores) for the upper half.
    half = n // 2
    m = [_NORMAL.inv_cdf((n - i + 1 - 0.375) / (n + 0.25)) for i in range(1, half + 1)]
    mss = 2.0 * math.fsum(v * v for v in m)

    w = [0.0] * half
    if n == 3:
        w[0] = math.sqrt(0.5)
    else:
        rsn = 1.0 / math.sqrt(n)
        w0 = m[0] / math.sqrt(mss) + _poly(_SW_C1, rsn)
        if n <= 5:
            denom = mss - 2.0 * m[0] ** 2
            fac = math.sqrt(denom / (1.0 - 2.0 * w0**2))
            w[0] = w0
            for i in range(1, half):
                w[i] = m[i] / fac
        else:
            w1 = m[1] / math.sqrt(mss) + _poly(_SW_C2, rsn)
            denom = mss - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2
            fac = math.sqrt(denom / (1.0 - 2.0 * w0**2 - 2.0 * w1**2))
            w[0] = w0
            w[1] = w1
            for i in range(2, half):
                w[i] = m[i] / fac

    mean = math.fsum(x) / n
    ssq = math.fsum((v - mean) ** 2 for v in x)
    num = math.fsum(w[i] * (x[n - 1 - i] - x[i]) for i in range(half))
    w_stat = min(num * num / ssq, 1.0)

    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w_stat)) - math.asin(math.sqrt(0.75)))
        p = min(max(p, 0.0), 1.0)
        return TestResult(w_stat, p, Sidedness.ONE_SIDED, None)

    if n <= 11:
        g = -2.273 + 0.459 * n
        if 1.0 - w_stat >= math.exp(g):
            # beyond the transform's domain; W this small is off-scale
            return TestResult(w_stat, 0.0, Sidedness.ONE_SIDED, None)
        lw = -math.log(g - math.log(1.0 - w_stat))
        mu = _poly(_SW_SMALL_MU, float(n))
        sigma = math.exp(_poly(_SW_SMALL_SIG, float(n)))
    else:
        lw = math.log(1.0 - w_stat)
        ln = math.log(n)
        mu = _poly(_SW_BIG_MU, ln)
        sigma = math.exp(_poly(_SW_BIG_SIG, ln))
    z = (lw - mu) / sigma
    p = math.erfc(z / math.sqrt(2.0)) / 2.0  # upper tail of z
    return TestResult(w_stat, min(max(p, 0.0), 1.0), Sidedness.ONE_SIDED, None)


@dataclass(frozen=True)
class SummaryStats:
    """Location, spread, and shape summary for one group's responses."""

    n: int
    mean: float
    std_dev: float
    dip: float


def summary_stats(a: Sequence[float]) -> SummaryStats:
    """Mean, sample standard deviation (n - 1), and unbinned dip."""
    n = len(a)
    if n < 2:
        raise InsufficientDataError(f"summary needs at least 2 values, got {n}")
    vals = sorted(float(v) for v in a)
    mean = math.fsum(vals) / n
    sd = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (n - 1))
    return SummaryStats(n=n, mean=mean, std_dev=sd, dip=_dip_sorted(vals))
