"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 request beyond an exhaustive size cap.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .closed_form import (
    UniformParams,
    gaussian_alpha,
    gaussian_l0_radius,
    sigma_for_alpha,
    uniform_radius,
)
from .errors import UnsupportedSizeError
from .evaluation import (
    DEFAULT_CONFIDENCE,
    AucInstance,
    PredictionRecord,
    acc_at_r,
    adversarial_auc,
    certify_records,
    format_report,
    ingest_predictions,
    mean_radius,
    record_to_json,
    write_predictions,
)
from .noise import NoiseParams
from .oracle import brute_regions, brute_rho, brute_tree_adversary
from .pointwise import certified_radius
from .regions import dump_csv
from .thresholds import DEFAULT_PRECISION, build_cert_table, format_table, load_table
from .tree import (
    dp_adversary,
    load_dataset,
    load_tree,
    predict_prob,
    save_tree,
    train,
)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _expected_params(args) -> NoiseParams | None:
    given = (args.d, args.K, args.alpha_pct)
    if all(v is None for v in given):
        return None
    if any(v is None for v in given):
        raise ValueError("--d, --K and --alpha-pct must be given together")
    return NoiseParams(*given)


def cmd_table(args) -> None:
    params = NoiseParams(args.d, args.K, args.alpha_pct)

    def progress(r, value, secs):
        print(f"r={r} threshold={value} ({secs:.3f} s)", file=sys.stderr)

    table = build_cert_table(
        params,
        args.r_max,
        args.precision,
        workers=args.workers,
        residual=args.residual,
        progress=progress,
    )
    _emit(format_table(table), args.out)


def cmd_certify(args) -> None:
    table = load_table(args.table, _expected_params(args))
    records = ingest_predictions(args.predictions)
    _emit(format_report(certify_records(records, table, args.confidence)), args.out)


def _row_ids(n: int) -> list[str]:
    width = len(str(max(n - 1, 0)))
    return [f"{i:0{width}d}" for i in range(n)]


def cmd_tree_train(args) -> None:
    X, y = load_dataset(args.data)
    params = NoiseParams(X.shape[1], 1, args.alpha_pct)
    tree = train(
        X,
        y,
        params,
        args.max_depth,
        soft_leaves=args.soft_leaves,
        feature_fraction=args.feature_fraction,
        seed=args.seed,
    )
    save_tree(tree, args.out)


def cmd_tree_predict(args) -> None:
    tree = load_tree(args.tree)
    X, y = load_dataset(args.data)
    records = []
    for ident, row, label in zip(_row_ids(len(y)), X, y):
        p1 = predict_prob(tree, row)
        predicted = 1 if p1 > Fraction(1, 2) else 0
        records.append(
            PredictionRecord(
                ident,
                int(label),
                predicted=predicted,
                p_exact=p1 if predicted == 1 else 1 - p1,
                score=p1,
            )
        )
    if args.out:
        write_predictions(records, args.out)
    else:
        for rec in records:
            print(record_to_json(rec))


def cmd_tree_attack(args) -> None:
    """Adversarial class-1 score per point: minimized for label 1, maximized for label 0."""
    tree = load_tree(args.tree)
    X, y = load_dataset(args.data)
    lines = ["id,r,adv_prob"]
    for ident, row, label in zip(_row_ids(len(y)), X, y):
        table = dp_adversary(tree, row, args.r_max, maximize=(label == 0))
        for r, value in enumerate(table.root):
            lines.append(f"{ident},{r},{_fraction_text(value)}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_eval_acc(args) -> None:
    table = load_table(args.table)
    records = ingest_predictions(args.predictions)
    print(f"{acc_at_r(records, table, args.r, args.confidence):.6f}")
    if args.detail:
        Path(args.detail).write_text(format_report(certify_records(records, table, args.confidence)))


def cmd_eval_radius(args) -> None:
    table = load_table(args.table)
    records = ingest_predictions(args.predictions)
    print(f"{mean_radius(records, table, args.confidence):.6f}")
    if args.detail:
        Path(args.detail).write_text(format_report(certify_records(records, table, args.confidence)))


def _read_attack(path, r: int) -> dict[str, Fraction]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), 2):
            try:
                if int(row["r"]) == r:
                    out[row["id"]] = Fraction(row["adv_prob"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return out


def cmd_eval_auc(args) -> None:
    records = ingest_predictions(args.predictions)
    attacked = _read_attack(args.attack, args.r)
    instances = []
    for rec in records:
        if rec.score is None:
            raise ValueError(f"record {rec.id} has no class-1 score")
        if rec.id not in attacked:
            raise ValueError(f"no attack result for id {rec.id} at r={args.r}")
        instances.append(AucInstance(rec.score, attacked[rec.id], rec.label == 1))
    print(f"{adversarial_auc(instances, args.k, args.mode):.6f}")


def cmd_uniform(args) -> None:
    q = math.inf if args.q == "inf" else 1
    radius = uniform_radius(UniformParams(args.gamma, args.d), args.p, q)
    print("abstain" if radius is None else f"{radius:.12f}")


def cmd_gaussian(args) -> None:
    if (args.sigma is None) == (args.alpha_pct is None):
        raise ValueError("give exactly one of --sigma and --alpha-pct")
    sigma = args.sigma if args.sigma is not None else sigma_for_alpha(args.alpha_pct / 100)
    radius = gaussian_l0_radius(sigma, args.p)
    print(f"sigma={sigma:.12f} alpha={gaussian_alpha(sigma):.12f}")
    print("gaussian_radius=" + ("abstain" if radius is None else str(radius)))
    if args.table:
        table = load_table(args.table)
        discrete = certified_radius(Fraction(args.p), table)
        print("discrete_radius=" + ("abstain" if discrete is None else str(discrete)))
        # an l0 radius of d already covers the whole input space
        ok = radius is None or min(radius, table.params.d) <= (discrete or 0)
        print("dominance=" + ("ok" if ok else "violated"))


def cmd_oracle_regions(args) -> None:
    table = brute_regions(NoiseParams(args.d, args.K, args.alpha_pct), args.r)
    _emit(dump_csv(table), args.out)


def cmd_oracle_rho(args) -> None:
    value = brute_rho(NoiseParams(args.d, args.K, args.alpha_pct), args.r, Fraction(args.p))
    print(_fraction_text(value))


def cmd_oracle_tree(args) -> None:
    """Compare the dynamic program with exhaustive flips on every data row."""
    tree = load_tree(args.tree)
    X, _ = load_dataset(args.data)
    mismatches = 0
    for row in X:
        dp = dp_adversary(tree, row, args.r).root[args.r]
        if dp != brute_tree_adversary(tree, row, args.r):
            mismatches += 1
    print(f"rows={len(X)} mismatches={mismatches}")
    if mismatches:
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l0smooth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="precompute certification thresholds")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--alpha-pct", type=int, required=True)
    p.add_argument("--r-max", type=int, required=True)
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--residual", choices=("exact", "unit"), default="exact")
    p.add_argument("--out")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("certify", help="certify a prediction dump against a table")
    p.add_argument("--table", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--confidence", type=float, default=DEFAULT_CONFIDENCE)
    p.add_argument("--d", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--alpha-pct", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    tree = sub.add_parser("tree", help="smoothed decision trees").add_subparsers(
        dest="tree_command", required=True
    )
    p = tree.add_parser("train")
    p.add_argument("--data", required=True)
    p.add_argument("--alpha-pct", type=int, required=True)
    p.add_argument("--max-depth", type=int, required=True)
    p.add_argument("--soft-leaves", action="store_true")
    p.add_argument("--feature-fraction", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tree_train)
    p = tree.add_parser("predict")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree_predict)
    p = tree.add_parser("attack")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--r-max", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tree_attack)

    ev = sub.add_parser("eval", help="dataset-level metrics").add_subparsers(
        dest="eval_command", required=True
    )
    for name, func in (("acc", cmd_eval_acc), ("radius", cmd_eval_radius)):
        p = ev.add_parser(name)
        p.add_argument("--table", required=True)
        p.add_argument("--predictions", required=True)
        p.add_argument("--confidence", type=float, default=DEFAULT_CONFIDENCE)
        p.add_argument("--detail", help="optional per-record CSV")
        if name == "acc":
            p.add_argument("--r", type=int, required=True)
        p.set_defaults(func=func)
    p = ev.add_parser("auc")
    p.add_argument("--predictions", required=True)
    p.add_argument("--attack", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--mode", choices=("exhaustive", "greedy"), default="exhaustive")
    p.set_defaults(func=cmd_eval_auc)

    p = sub.add_parser("uniform", help="closed-form radius under uniform noise")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", choices=("1", "inf"), default="1")
    p.set_defaults(func=cmd_uniform)

    p = sub.add_parser("gaussian", help="Gaussian-derived l0 radius for binary inputs")
    p.add_argument("--sigma", type=float)
    p.add_argument("--alpha-pct", type=int)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--table", help="compare with the discrete certificate from this table")
    p.set_defaults(func=cmd_gaussian)

    orc = sub.add_parser("oracle", help="brute-force diagnostics").add_subparsers(
        dest="oracle_command", required=True
    )
    p = orc.add_parser("regions")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--alpha-pct", type=int, default=50)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle_regions)
    p = orc.add_parser("rho")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--alpha-pct", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--p", required=True, help="probability, e.g. 7/8 or 0.9")
    p.set_defaults(func=cmd_oracle_rho)
    p = orc.add_parser("tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--r", type=int, required=True)
    p.set_defaults(func=cmd_oracle_tree)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UnsupportedSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
