"""Command line entry point: ``ftuaudit {audit,bounds,policy-eval,synth,oracle-verify}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 oracle violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction

from . import __version__, audit, logreg, oracle, synth

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VIOLATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _eps_list(text: str) -> list[Fraction]:
    try:
        return [audit.parse_eps(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _names(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _add_ingest(p: argparse.ArgumentParser, label_flag: str = "--label-col") -> None:
    p.add_argument("--group-col", default="group")
    p.add_argument(label_flag, dest="label_col", default="label")
    p.add_argument("--group-a", default=None, help="group value to treat as advantaged (default: higher base rate)")
    p.add_argument("--positive-label", default=None)


def _add_split(p: argparse.ArgumentParser, tau: float) -> None:
    p.add_argument("--model", choices=("lr", "scores"), default="lr")
    p.add_argument("--scores-file", nargs=2, metavar=("AWARE", "UNAWARE"),
                   help="score CSVs with columns row_id,group,score,label")
    p.add_argument("--tau", type=float, default=tau)
    p.add_argument("--test-frac", type=float, default=0.3)
    p.add_argument("--splits", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--features", type=_names, default=None, help="comma-separated feature columns to use")
    p.add_argument("--max-iters", type=int, default=logreg.TrainConfig.max_iters)
    p.add_argument("--learning-rate", type=float, default=logreg.TrainConfig.learning_rate)
    p.add_argument("--tol", type=float, default=logreg.TrainConfig.convergence_tol)
    p.add_argument("--l2", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ftuaudit", description="Disparate impact audits of aware vs unaware classifiers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("audit", help="compare aware and unaware models over random splits")
    p.add_argument("dataset", nargs="?", help="row-level CSV (optional with --model scores)")
    _add_ingest(p)
    _add_split(p, tau=0.5)
    p.add_argument("--eps-grid", type=_eps_list, default=[], help="comma-separated epsilons for bound certificates")
    p.add_argument("--out", default=None, help="JSON report path (default stdout)")
    p.add_argument("--csv", default=None, help="per-split summary CSV path")

    p = sub.add_parser("bounds", help="multiplicity bound table for a distribution")
    p.add_argument("source", help="dataset CSV or distribution JSON")
    _add_ingest(p)
    p.add_argument("--eps-grid", type=_eps_list, required=True)
    p.add_argument("--oracle", action="store_true", help="add the exhaustive deterministic maximum")
    p.add_argument("--cap", type=int, default=oracle.ENUMERATION_CAP)
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--out", default=None)

    p = sub.add_parser("policy-eval", help="group-C shares below a score threshold, aware vs unaware")
    p.add_argument("dataset", nargs="?")
    _add_ingest(p, label_flag="--target-col")
    _add_split(p, tau=0.25)
    p.add_argument("--out", default=None, help="JSON report path")

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--profile", choices=synth.PROFILES, default="income-like")
    p.add_argument("--n", type=int, default=10_000)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--group-offset", type=float, default=None)
    g.add_argument("--dbr-target", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("oracle-verify", help="run a brute-force property suite")
    p.add_argument("--suite", choices=sorted(oracle.SUITES) + ["all"], required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bound-scale", type=Fraction, default=Fraction(1),
                   help="multiply the checked bound (values below 1 must produce violations)")
    return parser


def _scores_pair(args, group_names=None):
    if not args.scores_file:
        raise UsageError("--model scores needs --scores-file AWARE UNAWARE")
    a = audit.read_scores(args.scores_file[0], group_names, args.group_a)
    u = audit.read_scores(args.scores_file[1], group_names, args.group_a)
    return a, u


def _table(args) -> audit.LoadedTable:
    if not args.dataset:
        raise UsageError("a dataset CSV is required with --model lr")
    tab = audit.read_table(args.dataset, args.group_col, args.label_col, args.features,
                           args.group_a, args.positive_label)
    if args.group_a is not None:
        audit.warn_if_disadvantaged_a(tab.data)
    return tab


def cmd_audit(args) -> int:
    cfg = audit.AuditConfig(model=args.model, tau=args.tau, test_frac=args.test_frac, splits=args.splits,
                            seed=args.seed, features=args.features, eps_grid=tuple(args.eps_grid),
                            learning_rate=args.learning_rate, max_iters=args.max_iters,
                            convergence_tol=args.tol, l2_penalty=args.l2)
    if args.model == "scores":
        a, u = _scores_pair(args)
        sha = audit.file_sha256(args.dataset) if args.dataset else None
        report = audit.audit_scores(a, u, cfg, sha)
    else:
        report = audit.audit_table(_table(args), cfg)
    _write(args.out, report.to_json())
    if args.csv:
        _write(args.csv, report.summary_csv())
    agg = report.aggregate
    print(f"splits={agg['n_splits']} unaware |DI| lower in {agg['splits_unaware_abs_di_lower']}; "
          f"mean relative accuracy reduction {_fmt(agg['relative_accuracy_reduction']['mean'])}, "
          f"mean relative |DI| reduction {_fmt(agg['relative_di_reduction']['mean'])}", file=sys.stderr)
    return EXIT_OK


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def cmd_bounds(args) -> int:
    dist = audit.load_distribution(args.source, args.group_col, args.label_col, args.group_a)
    rows = audit.bound_rows(dist, args.eps_grid, args.oracle, args.cap)
    text = json.dumps(rows, indent=2, sort_keys=True) + "\n" if args.json else audit.bounds_csv(rows)
    _write(args.out, text)
    if any(r.get("verdict") == oracle.Verdict.VIOLATION.value for r in rows):
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_policy_eval(args) -> int:
    if args.model == "scores":
        a, u = _scores_pair(args)
        report = audit.policy_eval_scores(a, u, args.tau)
    else:
        tab = _table(args)
        tc = logreg.TrainConfig(args.learning_rate, args.max_iters, args.tol, args.l2, args.seed)
        report = audit.policy_eval_table(tab, args.tau, args.splits, args.test_frac, args.seed, tc)
    if args.out:
        _write(args.out, report.to_json())
    sys.stdout.write(report.table())
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    data, meta = synth.generate(args.profile, args.n, args.group_offset, args.dbr_target, args.seed)
    synth.write_csv(args.out if args.out not in (None, "-") else sys.stdout, data, meta)
    return EXIT_OK


def cmd_oracle_verify(args) -> int:
    names = sorted(oracle.SUITES) if args.suite == "all" else [args.suite]
    if args.bound_scale != 1 and names != ["prop2"]:
        raise UsageError("--bound-scale applies to the prop2 suite only")
    failed = False
    for name in names:
        kw = {}
        if args.trials is not None:
            kw["trials"] = args.trials
        if args.seed is not None:
            kw["seed"] = args.seed
        if name == "prop2" and args.bound_scale != 1:
            kw["bound_scale"] = args.bound_scale
        res = oracle.SUITES[name](**kw)
        status = "PASS" if res.passed else "VIOLATION"
        print(f"{name}: {status} instances={res.instances} checks={res.checks} violations={res.violations}"
              + "".join(f" {k}={v}" for k, v in sorted(res.notes.items())))
        for msg in res.failures[:3]:
            print(f"  {msg}")
        failed |= not res.passed
    return EXIT_VIOLATION if failed else EXIT_OK


COMMANDS = {
    "audit": cmd_audit,
    "bounds": cmd_bounds,
    "policy-eval": cmd_policy_eval,
    "synth": cmd_synth,
    "oracle-verify": cmd_oracle_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
            return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ftuaudit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # DataError, EnumerationCapExceeded and validation errors from the library
        print(f"ftuaudit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
