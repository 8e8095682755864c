"""Threshold sweeps over classifier responses: ROC operating points and
per-pair significance curves.

A sample is accepted iff its response is <= the threshold, so the false
accept rate (attacks accepted) is non-decreasing in the threshold and the
false reject rate (bona fide rejected) is non-increasing. All rates are
exact count ratios; thresholds are taken from the observed response values
so every distinct empirical operating point appears exactly once.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import GroupPair
from .errors import InsufficientDataError, ParameterError
from .stats import ContingencyTable2x2, TestResult, chi_squared_one_sided

__all__ = [
    "RocPoint",
    "RocCurve",
    "OperatingPoint",
    "BiasCurve",
    "BiasRegion",
    "outcomes_at",
    "roc_curve",
    "eer_operating_point",
    "hter_at",
    "threshold_for_bonafide_error",
    "bias_sweep",
    "significant_regions",
]


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    far: float
    frr: float


@dataclass(frozen=True)
class RocCurve:
    """Empirical ROC: one point per distinct pooled response value, plus a
    sentinel below the minimum (nothing accepted) and one above the maximum
    (everything accepted). Thresholds are strictly increasing."""

    points: tuple[RocPoint, ...]


@dataclass(frozen=True)
class OperatingPoint:
    """FAR/FRR at one threshold; hter = (far + frr) / 2."""

    threshold: float
    far: float
    frr: float
    hter: float


@dataclass(frozen=True)
class BiasCurve:
    """One-sided rate-comparison p-values along a threshold grid.

    ``directions[i]`` names the group with the higher rejection rate at
    ``grid[i]`` (None on ties); it is carried so regions can be labeled
    without recomputing the tables.
    """

    pair: GroupPair
    grid: tuple[float, ...]
    p_values: tuple[float, ...]
    alpha: float
    directions: tuple[str | None, ...]


@dataclass(frozen=True)
class BiasRegion:
    """Maximal run of grid thresholds with p < alpha.

    ``lo`` and ``hi`` are grid values (lo <= hi); ``worse_group`` is the
    direction at the run's most significant point.
    """

    lo: float
    hi: float
    min_p: float
    worse_group: str


def outcomes_at(responses_sorted: Sequence[float], threshold: float) -> tuple[int, int]:
    """(accepted, rejected) counts at a threshold; boundary value accepted.

    The input must be sorted ascending (as returned by bona_fide_responses).
    """
    n = len(responses_sorted)
    if n == 0:
        raise InsufficientDataError("no responses")
    accepted = bisect_right(responses_sorted, threshold)
    return accepted, n - accepted


def _below(v: float) -> float:
    return math.nextafter(v, -math.inf)


def _above(v: float) -> float:
    return math.nextafter(v, math.inf)


def roc_curve(bona: Sequence[float], attack: Sequence[float]) -> RocCurve:
    """Empirical ROC over all distinct pooled response values."""
    if len(bona) == 0 or len(attack) == 0:
        raise InsufficientDataError("roc_curve needs non-empty bona fide and attack samples")
    bona_s = np.sort(np.asarray(bona, dtype=float))
    att_s = np.sort(np.asarray(attack, dtype=float))
    pooled = np.unique(np.concatenate([bona_s, att_s]))
    grid = np.concatenate([[_below(pooled[0])], pooled, [_above(pooled[-1])]])
    n_b, n_a = len(bona_s), len(att_s)
    far = np.searchsorted(att_s, grid, side="right") / n_a
    frr = (n_b - np.searchsorted(bona_s, grid, side="right")) / n_b
    points = tuple(
        RocPoint(float(t), float(fa), float(fr)) for t, fa, fr in zip(grid, far, frr)
    )
    return RocCurve(points)


def eer_operating_point(roc: RocCurve) -> OperatingPoint:
    """Operating point where |far - frr| is smallest.

    Ties prefer the smaller max(far, frr), then the smaller threshold. The
    reported equal error rate is this point's hter.
    """
    best = min(
        roc.points, key=lambda p: (abs(p.far - p.frr), max(p.far, p.frr), p.threshold)
    )
    return OperatingPoint(best.threshold, best.far, best.frr, (best.far + best.frr) / 2)


def hter_at(
    bona: Sequence[float], attack: Sequence[float], threshold: float
) -> OperatingPoint:
    """FAR/FRR/HTER at a fixed threshold."""
    if len(bona) == 0 or len(attack) == 0:
        raise InsufficientDataError("hter_at needs non-empty bona fide and attack samples")
    far = sum(1 for v in attack if v <= threshold) / len(attack)
    frr = sum(1 for v in bona if v > threshold) / len(bona)
    return OperatingPoint(float(threshold), far, frr, (far + frr) / 2)


def threshold_for_bonafide_error(bona: Sequence[float], q: float) -> float:
    """Smallest observed threshold rejecting at most a fraction q of bona fide.

    q = 0 gives the sample maximum (reject nothing); q = 1 gives a sentinel
    just below the sample minimum (reject everything). Non-increasing in q.
    """
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must be in [0, 1], got {q}")
    n = len(bona)
    if n == 0:
        raise InsufficientDataError("no bona fide responses")
    s = sorted(bona)
    # float-tolerant floor: q arriving as 0.1 + eps must still reject floor(q*n)
    m = int(math.floor(q * n + 1e-9))
    if m >= n:
        return _below(s[0])
    return s[n - 1 - m]


def bias_sweep(
    bona_a: Sequence[float],
    bona_b: Sequence[float],
    grid: Sequence[float] | None = None,
    alpha: float = 0.05,
    pair: GroupPair | None = None,
) -> BiasCurve:
    """One-sided rejection-rate comparison at every grid threshold.

    ``grid=None`` uses the sorted distinct pooled responses of both groups.
    An explicit grid must be strictly increasing. A single-point grid is
    degenerate and rejected.
    """
    if len(bona_a) == 0 or len(bona_b) == 0:
        raise InsufficientDataError("bias_sweep needs non-empty groups")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    if pair is None:
        pair = GroupPair("a", "b")
    a_s = sorted(float(v) for v in bona_a)
    b_s = sorted(float(v) for v in bona_b)
    if grid is None:
        grid_arr = np.unique(np.concatenate([a_s, b_s]))
    else:
        grid_arr = np.asarray([float(t) for t in grid])
        if len(grid_arr) and np.any(np.diff(grid_arr) <= 0):
            raise ParameterError("grid must be strictly increasing")
    if len(grid_arr) < 2:
        raise ParameterError(f"degenerate sweep grid of size {len(grid_arr)}")

    p_values = []
    directions = []
    for t in grid_arr:
        acc_a, rej_a = outcomes_at(a_s, float(t))
        acc_b, rej_b = outcomes_at(b_s, float(t))
        res = chi_squared_one_sided(
            ContingencyTable2x2(acc_a, rej_a, acc_b, rej_b, pair.a, pair.b)
        )
        p_values.append(res.p_value)
        directions.append(res.direction)
    return BiasCurve(
        pair=pair,
        grid=tuple(float(t) for t in grid_arr),
        p_values=tuple(p_values),
        alpha=alpha,
        directions=tuple(directions),
    )


def significant_regions(curve: BiasCurve) -> list[BiasRegion]:
    """Maximal disconnected grid runs where p < alpha.

    Regions are disjoint and ordered by threshold; each is labeled with the
    worse-off group at its most significant point (first such point on ties).
    """
    regions = []
    i = 0
    n = len(curve.grid)
    while i < n:
        if curve.p_values[i] >= curve.alpha:
            i += 1
            continue
        j = i
        while j + 1 < n and curve.p_values[j + 1] < curve.alpha:
            j += 1
        k = min(range(i, j + 1), key=lambda m: (curve.p_values[m], m))
        worse = curve.directions[k]
        assert worse is not None  # p < alpha < 1 rules out the tie branch
        regions.append(
            BiasRegion(
                lo=curve.grid[i],
                hi=curve.grid[j],
                min_p=curve.p_values[k],
                worse_group=worse,
            )
        )
        i = j + 1
    return regions
