"""End-to-end audit: per-group distribution summaries, pairwise error-rate
tests at anchor thresholds, threshold sweeps with significance regions, and
optional latent-code separability.

Reports serialize to canonical JSON: keys sorted, floats at shortest
round-trip precision, no timestamps. Two runs with the same inputs and seed
produce byte-identical bytes.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .data import (
    Dataset,
    GroupPair,
    attack_responses,
    bona_fide_responses,
    group_pairs,
)
from .dip import DipResult, dip_critical_value, dip_statistic
from .errors import InsufficientDataError, ParameterError
from .stats import (
    ContingencyTable2x2,
    SummaryStats,
    TestResult,
    chi_squared_one_sided,
    mann_whitney_u,
    summary_stats,
)
from .svm import CodeVector, FeatureMode, FoldSpec, cross_validated_auc
from .thresholds import (
    BiasCurve,
    BiasRegion,
    OperatingPoint,
    bias_sweep,
    eer_operating_point,
    hter_at,
    outcomes_at,
    roc_curve,
    significant_regions,
    threshold_for_bonafide_error,
)

__all__ = ["AuditConfig", "AuditReport", "run_audit", "render_json"]

DEFAULT_QUANTILES = (0.01, 0.02, 0.05, 0.10, 0.20)


@dataclass(frozen=True)
class AuditConfig:
    """Knobs for one audit run; everything downstream is deterministic in
    these plus the input data."""

    alpha: float = 0.05
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES
    dip_bins: int = 50
    dip_replicas: int = 10000
    seed: int = 12345
    svm_c: float = 1.0
    svm_gamma: float | None = None  # None = auto (1 / (d * var))
    svm_folds: int = 5
    feature_mode: FeatureMode = FeatureMode.SCALED_INDICES
    workers: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.quantiles:
            raise ParameterError("need at least one anchor quantile")
        for q in self.quantiles:
            if not 0.0 <= q <= 1.0:
                raise ParameterError(f"quantiles must be in [0, 1], got {q}")
        if self.dip_bins < 2:
            raise ParameterError(f"dip_bins must be >= 2, got {self.dip_bins}")
        if self.dip_replicas < 1:
            raise ParameterError(f"dip_replicas must be >= 1, got {self.dip_replicas}")
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")
        if not self.svm_c > 0:
            raise ParameterError(f"svm_c must be > 0, got {self.svm_c}")
        if self.svm_gamma is not None and not self.svm_gamma > 0:
            raise ParameterError(f"svm_gamma must be > 0, got {self.svm_gamma}")
        if self.svm_folds < 2:
            raise ParameterError(f"svm_folds must be >= 2, got {self.svm_folds}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "quantiles": list(self.quantiles),
            "dip_bins": self.dip_bins,
            "dip_replicas": self.dip_replicas,
            "seed": self.seed,
            "svm_c": self.svm_c,
            "svm_gamma": "auto" if self.svm_gamma is None else self.svm_gamma,
            "svm_folds": self.svm_folds,
            "feature_mode": self.feature_mode.value,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class PairAnalysis:
    """Everything computed for one group pair."""

    pair: GroupPair
    chi_squared: dict[str, tuple[ContingencyTable2x2, TestResult]]
    mann_whitney: TestResult
    curve: BiasCurve
    regions: tuple[BiasRegion, ...]


@dataclass(frozen=True)
class HistogramSeries:
    """Overlaid per-group histogram data backing one plot."""

    pair: GroupPair
    edges: tuple[float, ...]
    counts: dict[str, tuple[int, ...]]


@dataclass(frozen=True)
class AuditReport:
    version: str
    config: AuditConfig
    groups: tuple[str, ...]
    n_bona_fide: int
    n_attack: int
    per_group_summary: dict[str, SummaryStats]
    per_group_dip: dict[str, DipResult]
    anchors: tuple[dict, ...]
    eer: OperatingPoint | None
    per_group_hter: dict[str, OperatingPoint] | None
    pairs: tuple[PairAnalysis, ...]
    svm_auc: dict[str, float] | None
    histograms: tuple[HistogramSeries, ...]  # plot backing data, not serialized

    def to_dict(self) -> dict:
        d: dict = {
            "toolkit_version": self.version,
            "config": self.config.to_dict(),
            "groups": list(self.groups),
            "record_counts": {
                "bona_fide": self.n_bona_fide,
                "attack": self.n_attack,
                "total": self.n_bona_fide + self.n_attack,
            },
            "per_group": {
                g: {
                    "summary": _summary_dict(self.per_group_summary[g]),
                    "dip_test": _dip_dict(self.per_group_dip[g]),
                }
                for g in self.groups
            },
            "anchor_thresholds": [dict(a) for a in self.anchors],
            "chi_squared": {
                pa.pair.key: {
                    label: _chi2_dict(table, res)
                    for label, (table, res) in pa.chi_squared.items()
                }
                for pa in self.pairs
            },
            "mann_whitney": {
                pa.pair.key: _test_dict(pa.mann_whitney) for pa in self.pairs
            },
            "bias_sweeps": {
                pa.pair.key: {
                    "alpha": pa.curve.alpha,
                    "grid": list(pa.curve.grid),
                    "p_values": list(pa.curve.p_values),
                    "regions": [
                        {
                            "lo": r.lo,
                            "hi": r.hi,
                            "min_p": r.min_p,
                            "worse_group": r.worse_group,
                        }
                        for r in pa.regions
                    ],
                }
                for pa in self.pairs
            },
        }
        if self.eer is not None:
            ops: dict = {"eer": _op_dict(self.eer)}
            if self.per_group_hter:
                ops["per_group_hter"] = {
                    g: _op_dict(p) for g, p in self.per_group_hter.items()
                }
            d["operating_points"] = ops
        if self.svm_auc is not None:
            d["svm_auc"] = dict(self.svm_auc)
        return d


def _summary_dict(s: SummaryStats) -> dict:
    return {"n": s.n, "mean": s.mean, "std_dev": s.std_dev, "dip": s.dip}


def _dip_dict(r: DipResult) -> dict:
    return {
        "dip": r.dip,
        "n": r.n,
        "bins": r.bins,
        "critical_value": r.critical_value,
        "alpha": r.alpha,
        "unimodal": r.unimodal,
    }


def _test_dict(r: TestResult) -> dict:
    return {
        "statistic": r.statistic,
        "p_value": r.p_value,
        "sidedness": r.sidedness.value,
        "direction": r.direction,
    }


def _chi2_dict(table: ContingencyTable2x2, res: TestResult) -> dict:
    out = _test_dict(res)
    out["table"] = {
        "accepted_a": table.accepted_a,
        "rejected_a": table.rejected_a,
        "accepted_b": table.accepted_b,
        "rejected_b": table.rejected_b,
    }
    return out


def _op_dict(p: OperatingPoint) -> dict:
    return {"threshold": p.threshold, "far": p.far, "frr": p.frr, "hter": p.hter}


def _pair_histogram(
    pair: GroupPair, bona_a: list[float], bona_b: list[float], bins: int
) -> HistogramSeries:
    lo = min(bona_a[0], bona_b[0])
    hi = max(bona_a[-1], bona_b[-1])
    if lo == hi:  # degenerate: a single response value
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    counts_a, _ = np.histogram(bona_a, bins=edges)
    counts_b, _ = np.histogram(bona_b, bins=edges)
    return HistogramSeries(
        pair=pair,
        edges=tuple(float(e) for e in edges),
        counts={
            pair.a: tuple(int(c) for c in counts_a),
            pair.b: tuple(int(c) for c in counts_b),
        },
    )


def _analyze_pair(
    pair: GroupPair,
    bona: dict[str, list[float]],
    anchors: Sequence[dict],
    alpha: float,
) -> PairAnalysis:
    a_s, b_s = bona[pair.a], bona[pair.b]
    chi2 = {}
    for anchor in anchors:
        t = anchor["threshold"]
        acc_a, rej_a = outcomes_at(a_s, t)
        acc_b, rej_b = outcomes_at(b_s, t)
        table = ContingencyTable2x2(acc_a, rej_a, acc_b, rej_b, pair.a, pair.b)
        chi2[anchor["label"]] = (table, chi_squared_one_sided(table))
    mwu = mann_whitney_u(a_s, b_s)
    curve = bias_sweep(a_s, b_s, grid=None, alpha=alpha, pair=pair)
    regions = tuple(significant_regions(curve))
    return PairAnalysis(
        pair=pair, chi_squared=chi2, mann_whitney=mwu, curve=curve, regions=regions
    )


def run_audit(
    ds: Dataset,
    cfg: AuditConfig = AuditConfig(),
    codes: Sequence[CodeVector] | None = None,
) -> AuditReport:
    """Run the full audit over every group pair.

    Needs >= 2 groups and >= 4 bona fide rows per group. Attack rows are
    optional; without them the EER/HTER section is omitted and anchor
    thresholds come from bona fide quantiles alone. ``codes`` enables the
    per-pair SVM separability section; when given, every dataset group must
    appear among the code vectors with at least ``cfg.svm_folds`` samples.
    """
    pairs = group_pairs(ds)  # also enforces >= 2 groups
    groups = tuple(ds.groups())

    bona: dict[str, list[float]] = {}
    for g in groups:
        vals = bona_fide_responses(ds, g)
        if len(vals) < 4:
            raise InsufficientDataError(
                f"group {g!r} has {len(vals)} bona fide rows; the audit needs >= 4"
            )
        bona[g] = vals
    pooled_bona = bona_fide_responses(ds)
    pooled_attack = attack_responses(ds)

    # Per-group distribution shape. Null critical values depend only on the
    # sample size, so cache them per n.
    per_group_summary = {g: summary_stats(bona[g]) for g in groups}
    cv_cache: dict[int, float] = {}
    per_group_dip = {}
    for g in groups:
        n = len(bona[g])
        if n not in cv_cache:
            cv_cache[n] = dip_critical_value(
                n, cfg.alpha, cfg.dip_replicas, cfg.seed, bins=cfg.dip_bins
            )
        d = dip_statistic(bona[g], bins=cfg.dip_bins)
        per_group_dip[g] = DipResult(
            dip=d,
            n=n,
            bins=cfg.dip_bins,
            critical_value=cv_cache[n],
            alpha=cfg.alpha,
            unimodal=d < cv_cache[n],
        )

    # Anchor thresholds: pooled bona fide error quantiles, plus the pooled
    # EER threshold when attack rows exist.
    anchors = [
        {
            "label": f"q={q:g}",
            "kind": "quantile",
            "quantile": q,
            "threshold": threshold_for_bonafide_error(pooled_bona, q),
        }
        for q in cfg.quantiles
    ]
    eer = None
    per_group_hter = None
    if pooled_attack:
        eer = eer_operating_point(roc_curve(pooled_bona, pooled_attack))
        anchors.append({"label": "eer", "kind": "eer", "threshold": eer.threshold})
        per_group_hter = {}
        for g in groups:
            att_g = attack_responses(ds, g)
            if att_g:
                per_group_hter[g] = hter_at(bona[g], att_g, eer.threshold)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [
                pool.submit(_analyze_pair, p, bona, anchors, cfg.alpha) for p in pairs
            ]
            analyses = tuple(f.result() for f in futures)
    else:
        analyses = tuple(_analyze_pair(p, bona, anchors, cfg.alpha) for p in pairs)

    histograms = tuple(
        _pair_histogram(p, bona[p.a], bona[p.b], cfg.dip_bins) for p in pairs
    )

    svm_auc = None
    if codes is not None:
        by_group: dict[str, list[CodeVector]] = {}
        for v in codes:
            by_group.setdefault(v.group, []).append(v)
        for g in groups:
            if len(by_group.get(g, ())) < cfg.svm_folds:
                raise InsufficientDataError(
                    f"code vectors for group {g!r}: have "
                    f"{len(by_group.get(g, ()))}, need >= {cfg.svm_folds}"
                )
        svm_auc = {}
        for p in pairs:
            subset = by_group[p.a] + by_group[p.b]
            svm_auc[p.key] = cross_validated_auc(
                subset,
                mode=cfg.feature_mode,
                c=cfg.svm_c,
                gamma=cfg.svm_gamma,
                folds=FoldSpec(k=cfg.svm_folds, seed=cfg.seed),
            )

    n_bona = len(pooled_bona)
    n_att = len(pooled_attack)
    return AuditReport(
        version=__version__,
        config=cfg,
        groups=groups,
        n_bona_fide=n_bona,
        n_attack=n_att,
        per_group_summary=per_group_summary,
        per_group_dip=per_group_dip,
        anchors=tuple(anchors),
        eer=eer,
        per_group_hter=per_group_hter,
        pairs=analyses,
        svm_auc=svm_auc,
        histograms=histograms,
    )


def render_json(report: AuditReport) -> bytes:
    """Canonical JSON bytes: sorted keys, 2-space indent, trailing newline.

    Floats use Python's shortest round-trip repr (up to 17 significant
    digits), so equal reports render to identical bytes.
    """
    text = json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False)
    return (text + "\n").encode("utf-8")
