"""Command-line interface.

Exit codes: 0 on success, 1 on any validation error (bad data, bad
parameters), 2 on I/O failures. Subcommand defaults can be preloaded from a
``key=value`` config file via --config; explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .data import bona_fide_responses, attack_responses, load_csv, save_csv
from .dip import dip_critical_value, dip_statistic
from .errors import AuditError, ParameterError
from .report import AuditConfig, render_json, run_audit
from .plots import render_plots
from .stats import (
    ContingencyTable2x2,
    MwuMode,
    chi_squared_one_sided,
    mann_whitney_u,
    shapiro_wilk,
)
from .svm import (
    FeatureMode,
    FoldSpec,
    cross_validated_auc,
    load_codes_csv,
    save_codes_csv,
)
from .synth import demo_dataset, gen_code_vectors
from .thresholds import eer_operating_point, hter_at, roc_curve

_CONFIG_KEYS = {
    "alpha": float,
    "quantiles": str,
    "dip_bins": int,
    "dip_replicas": int,
    "seed": int,
    "svm_c": float,
    "svm_gamma": str,
    "svm_folds": int,
    "feature_mode": str,
    "workers": int,
}


def _read_config_file(path: str) -> dict:
    """Parse key=value lines; '#' starts a comment; keys use underscores."""
    out = {}
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ParameterError(f"{path}:{ln}: unknown config key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise ParameterError(f"{path}:{ln}: bad value for {key}: {value!r}") from None
    return out


def _parse_quantiles(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(q) for q in text.split(","))
    except ValueError:
        raise ParameterError(f"bad quantile list: {text!r}") from None


def _parse_gamma(text: str) -> float | None:
    if text.lower() == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise ParameterError(f"gamma must be a number or 'auto', got {text!r}") from None


def _feature_mode(text: str) -> FeatureMode:
    for mode in FeatureMode:
        if mode.value == text:
            return mode
    choices = ", ".join(m.value for m in FeatureMode)
    raise ParameterError(f"unknown feature mode {text!r} (choose from: {choices})")


def _mwu_mode(text: str) -> MwuMode:
    for mode in MwuMode:
        if mode.value == text:
            return mode
    choices = ", ".join(m.value for m in MwuMode)
    raise ParameterError(f"unknown mode {text!r} (choose from: {choices})")


def _add_audit_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.add_argument(
        "--quantiles",
        default="0.01,0.02,0.05,0.1,0.2",
        help="comma-separated bona fide rejection quantiles for anchor thresholds",
    )
    p.add_argument("--dip-bins", type=int, default=50, help="histogram bins for the dip")
    p.add_argument(
        "--dip-replicas", type=int, default=10000, help="null replicas for dip critical values"
    )
    p.add_argument("--seed", type=int, default=12345, help="master RNG seed")
    p.add_argument("--svm-c", type=float, default=1.0, help="SVM soft-margin C")
    p.add_argument("--svm-gamma", default="auto", help="RBF gamma, or 'auto'")
    p.add_argument("--svm-folds", type=int, default=5, help="cross-validation folds")
    p.add_argument(
        "--feature-mode",
        default=FeatureMode.SCALED_INDICES.value,
        help="code featurization: scaled-indices or code-histogram",
    )
    p.add_argument("--workers", type=int, default=1, help="parallel pair analyses")


def _config_from_args(args: argparse.Namespace) -> AuditConfig:
    return AuditConfig(
        alpha=args.alpha,
        quantiles=_parse_quantiles(args.quantiles),
        dip_bins=args.dip_bins,
        dip_replicas=args.dip_replicas,
        seed=args.seed,
        svm_c=args.svm_c,
        svm_gamma=_parse_gamma(args.svm_gamma),
        svm_folds=args.svm_folds,
        feature_mode=_feature_mode(args.feature_mode),
        workers=args.workers,
    )


def _cmd_audit(args) -> int:
    ds = load_csv(args.data)
    cfg = _config_from_args(args)
    codes = load_codes_csv(args.codes, k=args.codes_k) if args.codes else None
    report = run_audit(ds, cfg, codes)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    report_path.write_bytes(render_json(report))
    paths = render_plots(report, out)

    print(f"groups: {', '.join(report.groups)}")
    print(f"records: {report.n_bona_fide} bona fide, {report.n_attack} attack")
    if report.eer is not None:
        print(
            f"pooled EER {report.eer.hter:.4f} at threshold {report.eer.threshold:.6g}"
        )
    for pa in report.pairs:
        n_sig = len(pa.regions)
        worst = min(pa.curve.p_values)
        print(
            f"pair {pa.pair.a} vs {pa.pair.b}: "
            f"{n_sig} significant region(s), min sweep p {worst:.3g}"
        )
    if report.svm_auc is not None:
        for key, auc in report.svm_auc.items():
            print(f"svm auc {key}: {auc:.4f}")
    print(f"wrote {report_path} and {len(paths)} plot/series files to {out}")
    return 0


def _cmd_sweep(args) -> int:
    from .data import GroupPair
    from .thresholds import bias_sweep, significant_regions

    ds = load_csv(args.data)
    a = bona_fide_responses(ds, args.group_a)
    b = bona_fide_responses(ds, args.group_b)
    curve = bias_sweep(
        a, b, alpha=args.alpha, pair=GroupPair.of(args.group_a, args.group_b)
    )
    regions = significant_regions(curve)
    for t, p in zip(curve.grid, curve.p_values):
        print(f"{t!r},{p!r}")
    print(f"# {len(regions)} significant region(s) at alpha={args.alpha:g}", file=sys.stderr)
    for r in regions:
        print(
            f"#   [{r.lo!r}, {r.hi!r}] min_p={r.min_p:.3g} worse={r.worse_group}",
            file=sys.stderr,
        )
    return 0


def _cmd_chi2(args) -> int:
    res = chi_squared_one_sided(
        ContingencyTable2x2(
            args.accepted_a, args.rejected_a, args.accepted_b, args.rejected_b
        )
    )
    print(f"statistic {res.statistic!r}")
    print(f"p_value {res.p_value!r}")
    print(f"direction {res.direction or 'tie'}")
    return 0


def _cmd_mwu(args) -> int:
    ds = load_csv(args.data)
    a = bona_fide_responses(ds, args.group_a)
    b = bona_fide_responses(ds, args.group_b)
    res = mann_whitney_u(a, b, _mwu_mode(args.mode))
    named = {"a": args.group_a, "b": args.group_b}
    print(f"U {res.statistic!r}")
    print(f"p_value {res.p_value!r}")
    print(f"direction {named.get(res.direction, 'tie')}")
    return 0


def _cmd_dip(args) -> int:
    ds = load_csv(args.data)
    vals = bona_fide_responses(ds, args.group)
    bins = args.bins if args.bins > 0 else None
    d = dip_statistic(vals, bins=bins)
    cv = dip_critical_value(len(vals), args.alpha, args.replicas, args.seed, bins=bins)
    verdict = "unimodal" if d < cv else "NOT unimodal"
    print(f"dip {d!r}")
    print(f"critical_value {cv!r} (n={len(vals)}, alpha={args.alpha:g})")
    print(f"verdict {verdict}")
    return 0


def _cmd_sw(args) -> int:
    ds = load_csv(args.data)
    vals = bona_fide_responses(ds, args.group)
    res = shapiro_wilk(vals)
    print(f"W {res.statistic!r}")
    print(f"p_value {res.p_value!r}")
    return 0


def _cmd_eer(args) -> int:
    ds = load_csv(args.data)
    bona = bona_fide_responses(ds)
    attack = attack_responses(ds)
    point = eer_operating_point(roc_curve(bona, attack))
    print(
        f"pooled threshold={point.threshold!r} far={point.far!r} "
        f"frr={point.frr!r} hter={point.hter!r}"
    )
    for g in ds.groups():
        att_g = attack_responses(ds, g)
        if not att_g:
            print(f"{g}: no attack rows, skipped")
            continue
        op = hter_at(bona_fide_responses(ds, g), att_g, point.threshold)
        print(f"{g}: far={op.far!r} frr={op.frr!r} hter={op.hter!r}")
    return 0


def _cmd_svm_sep(args) -> int:
    codes = load_codes_csv(args.codes, k=args.codes_k)
    groups = sorted({v.group for v in codes})
    if len(groups) < 2:
        raise ParameterError(f"need at least two groups in {args.codes}")
    by_group = {g: [v for v in codes if v.group == g] for g in groups}
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            auc = cross_validated_auc(
                by_group[groups[i]] + by_group[groups[j]],
                mode=_feature_mode(args.feature_mode),
                c=args.svm_c,
                gamma=_parse_gamma(args.svm_gamma),
                folds=FoldSpec(k=args.svm_folds, seed=args.seed),
            )
            print(f"{groups[i]}|{groups[j]} auc {auc:.6f}")
    return 0


def _cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = demo_dataset(
        n_per_group=args.n_per_group,
        seed=args.seed,
        with_attacks=not args.no_attacks,
    )
    data_path = out / "responses.csv"
    save_csv(ds, data_path)
    print(f"wrote {data_path} ({len(ds)} rows, groups: {', '.join(ds.groups())})")
    if not args.no_codes:
        vectors = []
        group_list = ds.groups()
        # chain pairs (alpha,beta), (gamma,delta) share one generator call each
        for idx in range(0, len(group_list) - 1, 2):
            vectors.extend(
                gen_code_vectors(
                    args.n_per_group,
                    d=args.codes_d,
                    k=args.codes_k,
                    separability=args.codes_separability,
                    seed=args.seed + 500 + idx,
                    groups=(group_list[idx], group_list[idx + 1]),
                )
            )
        codes_path = out / "codes.csv"
        save_codes_csv(vectors, codes_path)
        print(f"wrote {codes_path} ({len(vectors)} vectors, K={args.codes_k})")
    return 0


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    """Build the CLI parser; ``defaults`` (from a config file) override the
    built-in defaults of any subcommand option with a matching name. Each
    subparser needs them applied individually: subcommands parse into a fresh
    namespace, so top-level set_defaults values would be overwritten."""
    parser = argparse.ArgumentParser(
        prog="biasaudit",
        description="Audit a threshold-based classifier's responses for "
        "demographic-group bias in bona fide errors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--config",
        help="key=value file with defaults for audit options (flags override)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="full audit: report.json plus plots")
    p.add_argument("--data", required=True, help="response CSV")
    p.add_argument("--codes", help="optional latent-code CSV enabling the SVM section")
    p.add_argument("--codes-k", type=int, help="codebook size when the CSV has no #K line")
    p.add_argument("--out", required=True, help="output directory")
    _add_audit_options(p)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("sweep", help="p-value sweep for one group pair (CSV to stdout)")
    p.add_argument("--data", required=True)
    p.add_argument("--group-a", required=True)
    p.add_argument("--group-b", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("chi2", help="one-sided rate test on explicit 2x2 counts")
    p.add_argument("--accepted-a", type=int, required=True)
    p.add_argument("--rejected-a", type=int, required=True)
    p.add_argument("--accepted-b", type=int, required=True)
    p.add_argument("--rejected-b", type=int, required=True)
    p.set_defaults(func=_cmd_chi2)

    p = sub.add_parser("mwu", help="Mann-Whitney U between two groups' bona fide responses")
    p.add_argument("--data", required=True)
    p.add_argument("--group-a", required=True)
    p.add_argument("--group-b", required=True)
    p.add_argument("--mode", default=MwuMode.AUTO.value, help="auto, exact, or normal-approx")
    p.set_defaults(func=_cmd_mwu)

    p = sub.add_parser("dip", help="dip unimodality test for one group")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.add_argument("--bins", type=int, default=50, help="0 disables binning")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--replicas", type=int, default=10000)
    p.add_argument("--seed", type=int, default=12345)
    p.set_defaults(func=_cmd_dip)

    p = sub.add_parser("sw", help="Shapiro-Wilk normality test for one group")
    p.add_argument("--data", required=True)
    p.add_argument("--group", required=True)
    p.set_defaults(func=_cmd_sw)

    p = sub.add_parser("eer", help="pooled EER and per-group HTER at that threshold")
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_eer)

    p = sub.add_parser("svm-sep", help="cross-validated code separability AUC per pair")
    p.add_argument("--codes", required=True)
    p.add_argument("--codes-k", type=int)
    p.add_argument("--svm-c", type=float, default=1.0)
    p.add_argument("--svm-gamma", default="auto")
    p.add_argument("--svm-folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--feature-mode", default=FeatureMode.SCALED_INDICES.value)
    p.set_defaults(func=_cmd_svm_sep)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset (and codes)")
    p.add_argument("--out", required=True)
    p.add_argument("--n-per-group", type=int, default=200)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--no-attacks", action="store_true")
    p.add_argument("--no-codes", action="store_true")
    p.add_argument("--codes-d", type=int, default=16)
    p.add_argument("--codes-k", type=int, default=64)
    p.add_argument("--codes-separability", type=float, default=0.3)
    p.set_defaults(func=_cmd_synth)

    if defaults:
        for cmd in sub.choices.values():
            valid = {a.dest for a in cmd._actions}
            cmd.set_defaults(**{k: v for k, v in defaults.items() if k in valid})

    return parser


def main(argv: list[str] | None = None) -> int:
    # A prescan pulls out --config so its values can seed the subcommand
    # defaults before the real parse; explicitly passed flags still win.
    prescan = argparse.ArgumentParser(add_help=False)
    prescan.add_argument("--config")
    known, _ = prescan.parse_known_args(argv)
    try:
        overrides = _read_config_file(known.config) if known.config else None
        parser = build_parser(overrides)
        args = parser.parse_args(argv)
        return args.func(args)
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
