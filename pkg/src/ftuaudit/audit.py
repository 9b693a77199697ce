"""Aware vs unaware audit pipeline: CSV ingestion, random splits and JSON reports.

Every number in a report comes from a library call on the test split
(``from_rows`` aggregation, exact metrics, LR predictions); nothing is
computed only for display.
"""

from __future__ import annotations

import concurrent.futures as cf
import csv
import hashlib
import io
import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import pandas as pd

from . import __version__, logreg, oracle, rashomon
from .empdist import EmpiricalDistribution, Group, RowDataset, from_rows
from .metrics import (
    Classifier,
    Predictor,
    abs_disparate_impact,
    accuracy,
    auroc,
    binned_calibration,
    dbr,
    disagreement,
    disparate_impact,
    positive_rate,
    threshold,
)

WORKERS_ENV = "FTUAUDIT_WORKERS"
SCORE_COLUMNS = ("row_id", "group", "score", "label")


class DataError(ValueError):
    """Input file is malformed or inconsistent."""


# --- ingestion ----------------------------------------------------------------

@dataclass
class LoadedTable:
    data: RowDataset
    group_names: dict  # {"A": original value, "B": original value}
    label_names: dict  # {0: original value, 1: original value}
    sha256: str
    path: str


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_frame(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#", dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from None


def _two_values(col: pd.Series, name: str) -> list:
    """Distinct values in order of first occurrence; exactly two allowed."""
    vals = list(dict.fromkeys(col.str.strip()))
    if len(vals) > 2:
        shown = ", ".join(repr(v) for v in vals[:5])
        raise DataError(f"column {name!r} must be binary, found {len(vals)} distinct values ({shown}, ...)")
    return vals


def _binary_labels(col: pd.Series, name: str, positive=None) -> tuple[np.ndarray, dict]:
    vals = _two_values(col, name)
    if positive is not None:
        if str(positive) not in vals:
            raise DataError(f"positive label {positive!r} does not occur in column {name!r}")
        pos = str(positive)
    elif set(vals) <= {"0", "1"}:
        pos = "1"
    elif set(vals) <= {"0.0", "1.0"}:
        pos = "1.0"
    else:
        # two arbitrary strings: the second one to occur is the positive label
        pos = vals[-1]
    y = (col.str.strip() == pos).astype(np.int8).to_numpy()
    neg = next((v for v in vals if v != pos), None)
    return y, {0: neg, 1: pos}


def _binary_groups(col: pd.Series, labels: np.ndarray, name: str, group_a=None) -> tuple[np.ndarray, dict]:
    """Map group values to A/B: A is the higher base rate unless ``group_a`` says otherwise."""
    vals = _two_values(col, name)
    if len(vals) < 2:
        raise DataError(f"column {name!r} holds a single group; two are needed")
    raw = col.str.strip().to_numpy()
    if group_a is not None:
        if str(group_a) not in vals:
            raise DataError(f"--group-a value {group_a!r} does not occur in column {name!r}")
        a = str(group_a)
    else:
        rates = [labels[raw == v].mean() for v in vals]
        a = vals[1] if rates[1] > rates[0] else vals[0]
    b = vals[1] if a == vals[0] else vals[0]
    return (raw == b).astype(np.int8), {"A": a, "B": b}


def _numeric(frame: pd.DataFrame, cols: Sequence[str], path) -> np.ndarray:
    out = np.empty((len(frame), len(cols)))
    for j, c in enumerate(cols):
        # numpy parses decimal strings exactly; pd.to_numeric may be off by an ulp
        try:
            vals = frame[c].to_numpy(dtype=str).astype(float)
        except ValueError:
            vals = pd.to_numeric(frame[c], errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(vals)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DataError(f"{path}: column {c!r} has a non-numeric or non-finite value "
                            f"{frame[c].iloc[row]!r} at data row {row + 1}")
        out[:, j] = vals
    return out


def read_table(path, group_col: str = "group", label_col: str = "label", features: Sequence[str] | None = None,
               group_a=None, positive_label=None) -> LoadedTable:
    """Load a row-level CSV. Every column other than group and label is a feature
    unless ``features`` names a subset.
    """
    frame = _read_frame(path)
    for c in (group_col, label_col):
        if c not in frame.columns:
            raise DataError(f"{path}: missing column {c!r}; columns are {list(frame.columns)}")
    if len(frame) == 0:
        raise DataError(f"{path}: no data rows")
    if features:
        missing = [c for c in features if c not in frame.columns]
        if missing:
            raise DataError(f"{path}: unknown feature column(s) {missing}")
        feats = list(features)
    else:
        feats = [c for c in frame.columns if c not in (group_col, label_col)]
    y, label_names = _binary_labels(frame[label_col], label_col, positive_label)
    g, group_names = _binary_groups(frame[group_col], y, group_col, group_a)
    X = _numeric(frame, feats, path) if feats else np.zeros((len(frame), 0))
    data = RowDataset(X, g, y, tuple(feats))
    return LoadedTable(data, group_names, label_names, file_sha256(path), str(path))


@dataclass
class ScoreFile:
    row_ids: np.ndarray
    groups: np.ndarray  # 1 = B
    scores: np.ndarray
    labels: np.ndarray
    sha256: str

    def dataset(self) -> RowDataset:
        """One point per row: the row id is the only feature, so nothing merges."""
        return RowDataset(self.row_ids[:, None].astype(float), self.groups, self.labels, ("row_id",))


def read_scores(path, group_names: dict | None = None, group_a=None) -> ScoreFile:
    """Load a ``row_id,group,score,label`` file. Rows are sorted by row id."""
    frame = _read_frame(path)
    missing = [c for c in SCORE_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: score file lacks column(s) {missing}")
    if len(frame) == 0:
        raise DataError(f"{path}: no data rows")
    ids = _numeric(frame, ["row_id"], path)[:, 0]
    if (ids != np.round(ids)).any() or len(np.unique(ids)) != len(ids):
        raise DataError(f"{path}: row_id must be unique integers")
    scores = _numeric(frame, ["score"], path)[:, 0]
    if ((scores < 0) | (scores > 1)).any():
        raise DataError(f"{path}: scores must lie in [0, 1]")
    y, _ = _binary_labels(frame["label"], "label")
    if group_names is not None:
        raw = frame["group"].str.strip().to_numpy()
        known = {group_names["A"], group_names["B"]}
        if not set(raw) <= known:
            raise DataError(f"{path}: group values {sorted(set(raw) - known)} not in {sorted(known)}")
        g = (raw == group_names["B"]).astype(np.int8)
    else:
        g, _ = _binary_groups(frame["group"], y, "group", group_a)
    order = np.argsort(ids, kind="stable")
    return ScoreFile(ids[order].astype(np.int64), g[order], scores[order], y[order], file_sha256(path))


def check_score_pair(aware: ScoreFile, unaware: ScoreFile) -> None:
    if len(aware.row_ids) != len(unaware.row_ids) or not np.array_equal(aware.row_ids, unaware.row_ids):
        raise DataError("aware and unaware score files must cover the same row ids")
    if not np.array_equal(aware.groups, unaware.groups):
        raise DataError("aware and unaware score files disagree on group membership")
    if not np.array_equal(aware.labels, unaware.labels):
        raise DataError("aware and unaware score files disagree on labels")


# --- splits -------------------------------------------------------------------

def make_splits(n: int, k: int = 10, test_frac: float = 0.3, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """k independent uniform random train/test splits; split i depends only on (seed, i)."""
    if k < 1:
        raise ValueError("need at least one split")
    if not 0 < test_frac < 1:
        raise ValueError("test_frac must lie strictly between 0 and 1")
    n_test = int(round(n * test_frac))
    if n_test < 1 or n_test >= n:
        raise DataError(f"{n} rows cannot be split with test fraction {test_frac}")
    out = []
    for i in range(k):
        perm = np.random.default_rng([seed, i]).permutation(n)
        out.append((np.sort(perm[n_test:]), np.sort(perm[:n_test])))
    return out


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DataError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _map(fn, jobs: list) -> list:
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [fn(*j) for j in jobs]
    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


# --- per-split metrics --------------------------------------------------------

def _f(x) -> float | None:
    return None if x is None else float(x)


@dataclass
class ModelMetrics:
    accuracy: float
    auroc: float | None
    di: float  # rate(A) - rate(B)
    abs_di: float
    dbr: float
    rate_A: float
    rate_B: float
    calibration: list
    coefficient_zeroing: dict | None = None
    thresholds: dict | None = None
    converged: bool | None = None


def _auroc_or_none(scores, labels) -> float | None:
    try:
        return auroc(scores, labels)
    except ValueError:
        return None


def evaluate_scores(dist: EmpiricalDistribution, point_scores: np.ndarray, row_scores: np.ndarray,
                    labels: np.ndarray, tau: float) -> tuple[ModelMetrics, Classifier]:
    F = threshold(Predictor(point_scores.tolist()), tau)
    calib = [asdict(c) for c in binned_calibration(dist, point_scores)]
    m = ModelMetrics(
        accuracy=float(accuracy(dist, F)),
        auroc=_auroc_or_none(row_scores, labels),
        di=float(disparate_impact(dist, F)),
        abs_di=float(abs_disparate_impact(dist, F)),
        dbr=float(dbr(dist)),
        rate_A=float(positive_rate(dist, F, Group.A)),
        rate_B=float(positive_rate(dist, F, Group.B)),
        calibration=calib,
    )
    return m, F


def _relative(aware: float, unaware: float) -> float | None:
    return None if aware == 0 else (aware - unaware) / aware


@dataclass
class SplitResult:
    split: int
    n_train: int
    n_test: int
    aware: ModelMetrics
    unaware: ModelMetrics
    relative_accuracy_reduction: float | None
    relative_di_reduction: float | None
    disagreement: float
    di_difference_bound: float
    bounds: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict) -> "SplitResult":
        d = dict(d)
        d["aware"] = ModelMetrics(**d["aware"])
        d["unaware"] = ModelMetrics(**d["unaware"])
        return cls(**d)


def bound_rows(dist: EmpiricalDistribution, eps_grid: Sequence, with_oracle: bool = False,
               cap: int = oracle.ENUMERATION_CAP) -> list[dict]:
    """One row per epsilon: lambda_eps, tight bound, legacy bound and optionally the exact maximum."""
    if with_oracle and len(dist) > cap:
        raise oracle.EnumerationCapExceeded(
            f"{len(dist)} points exceed the enumeration cap of {cap}; drop --oracle for large inputs")
    prof = rashomon.build_profile(dist)
    rows = []
    for eps in eps_grid:
        cert = rashomon.multiplicity_bound(prof, eps)
        legacy = rashomon.legacy_bound(prof, eps) if prof.min_lambda > 0 else None
        row = {
            "epsilon": str(cert.epsilon),
            "lambda_eps": str(cert.lambda_eps),
            "bound": str(cert.bound_value),
            "legacy_bound": None if legacy is None else str(legacy),
            "achieved_accuracy": str(cert.achieved_accuracy),
        }
        if with_oracle:
            r = oracle.max_disagreement_exact(dist, eps, cap=cap)
            row["oracle_max"] = str(r.exact_value)
            row["verdict"] = r.verdict.value
        rows.append(row)
    return rows


@dataclass(frozen=True)
class AuditConfig:
    model: str = "lr"
    tau: float = 0.5
    test_frac: float = 0.3
    splits: int = 10
    seed: int = 0
    features: tuple | None = None
    eps_grid: tuple = ()
    learning_rate: float = logreg.TrainConfig.learning_rate
    max_iters: int = logreg.TrainConfig.max_iters
    convergence_tol: float = logreg.TrainConfig.convergence_tol
    l2_penalty: float = logreg.TrainConfig.l2_penalty

    def train_config(self) -> logreg.TrainConfig:
        return logreg.TrainConfig(self.learning_rate, self.max_iters, self.convergence_tol, self.l2_penalty, self.seed)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["features"] = None if self.features is None else list(self.features)
        d["eps_grid"] = [str(e) for e in self.eps_grid]
        return d


def _quiet_from_rows(data: RowDataset):
    # the advantaged-group warning is emitted once at ingestion, not per split
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return from_rows(data, return_index=True)


def _lr_thresholds(model: logreg.LRModel, tau: float) -> dict | None:
    if len(model.coefficients) - (1 if model.aware else 0) != 1:
        return None
    return {g: logreg.threshold_feature_value(model, g, tau) for g in ("A", "B")}


def _compare(dist, split, n_train, n_test, aware, unaware, Fa, Fu, eps_grid) -> SplitResult:
    return SplitResult(
        split=split,
        n_train=n_train,
        n_test=n_test,
        aware=aware,
        unaware=unaware,
        relative_accuracy_reduction=_relative(aware.accuracy, unaware.accuracy),
        relative_di_reduction=_relative(aware.abs_di, unaware.abs_di),
        disagreement=float(disagreement(dist, Fa, Fu)),
        di_difference_bound=float(rashomon.di_difference_bound(dist, Fa, Fu)),
        bounds=bound_rows(dist, eps_grid) if eps_grid else [],
    )


def run_lr_split(data: RowDataset, split: int, train_idx: np.ndarray, test_idx: np.ndarray,
                 cfg: AuditConfig) -> SplitResult:
    """Train aware and unaware LR on the train rows and evaluate both on the test rows."""
    train, test = data.subset(train_idx), data.subset(test_idx)
    if train.groups.min() == train.groups.max() or test.groups.min() == test.groups.max():
        raise DataError(f"split {split} lacks one of the groups; use a larger test fraction")
    tc = cfg.train_config()
    models = {"aware": logreg.train(train, True, tc), "unaware": logreg.train(train, False, tc)}
    dist, idx = _quiet_from_rows(test)
    out, clfs = {}, {}
    for name, model in models.items():
        rows = model.row_scores(test)
        pts = np.empty(len(dist))
        pts[idx] = rows
        m, F = evaluate_scores(dist, pts, rows, test.labels, cfg.tau)
        m.converged = model.converged
        m.thresholds = _lr_thresholds(model, cfg.tau)
        if model.aware:
            m.coefficient_zeroing = logreg.prop6_analysis(dist, model, test, idx, cfg.tau).summary()
        out[name], clfs[name] = m, F
    return _compare(dist, split, len(train), len(test), out["aware"], out["unaware"],
                    clfs["aware"], clfs["unaware"], cfg.eps_grid)


def run_score_split(aware: ScoreFile, unaware: ScoreFile, cfg: AuditConfig) -> SplitResult:
    check_score_pair(aware, unaware)
    data = aware.dataset()
    dist, idx = _quiet_from_rows(data)
    out, clfs = {}, {}
    for name, sf in (("aware", aware), ("unaware", unaware)):
        pts = np.empty(len(dist))
        pts[idx] = sf.scores
        out[name], clfs[name] = evaluate_scores(dist, pts, sf.scores, sf.labels, cfg.tau)
    return _compare(dist, 0, 0, len(data), out["aware"], out["unaware"], clfs["aware"], clfs["unaware"],
                    cfg.eps_grid)


# --- reports ------------------------------------------------------------------

def _mean_std(values: Sequence[float | None]) -> dict:
    v = np.array([x for x in values if x is not None], dtype=float)
    if len(v) == 0:
        return {"mean": None, "std": None, "min": None, "max": None}
    std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
    return {"mean": float(v.mean()), "std": std, "min": float(v.min()), "max": float(v.max())}


AGG_METRICS = ("accuracy", "auroc", "di", "abs_di", "dbr", "rate_A", "rate_B")


def aggregate_splits(splits: Sequence[SplitResult]) -> dict:
    agg: dict = {}
    for mode in ("aware", "unaware"):
        agg[mode] = {k: _mean_std([getattr(getattr(s, mode), k) for s in splits]) for k in AGG_METRICS}
    agg["relative_accuracy_reduction"] = _mean_std([s.relative_accuracy_reduction for s in splits])
    agg["relative_di_reduction"] = _mean_std([s.relative_di_reduction for s in splits])
    agg["splits_unaware_abs_di_lower"] = sum(s.unaware.abs_di < s.aware.abs_di for s in splits)
    agg["n_splits"] = len(splits)
    return agg


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class AuditReport:
    metadata: dict
    splits: list
    aggregate: dict

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "splits": [asdict(s) for s in self.splits], "aggregate": self.aggregate}

    def to_json(self) -> str:
        return _dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "AuditReport":
        return cls(d["metadata"], [SplitResult.from_dict(s) for s in d["splits"]], d["aggregate"])

    @classmethod
    def from_json(cls, text: str) -> "AuditReport":
        return cls.from_dict(json.loads(text))

    def summary_csv(self) -> str:
        """One row per split plus a mean row; plot-ready."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = [f"{m}_{k}" for m in ("aware", "unaware") for k in AGG_METRICS]
        w.writerow(["split"] + cols + ["relative_accuracy_reduction", "relative_di_reduction", "disagreement"])
        for s in self.splits:
            vals = [getattr(getattr(s, m), k) for m in ("aware", "unaware") for k in AGG_METRICS]
            w.writerow([s.split] + [_cell(v) for v in vals]
                       + [_cell(s.relative_accuracy_reduction), _cell(s.relative_di_reduction), _cell(s.disagreement)])
        agg = self.aggregate
        mean = [agg[m][k]["mean"] for m in ("aware", "unaware") for k in AGG_METRICS]
        w.writerow(["mean"] + [_cell(v) for v in mean] + [_cell(agg["relative_accuracy_reduction"]["mean"]),
                                                          _cell(agg["relative_di_reduction"]["mean"]), ""])
        return buf.getvalue()


def _cell(v) -> str:
    return "" if v is None else repr(float(v))


def _metadata(sha: dict, cfg_dict: dict, seed: int, extra: dict | None = None) -> dict:
    meta = {"tool": "ftuaudit", "version": __version__, "seed": seed, "config": cfg_dict, "sha256": sha}
    if extra:
        meta.update(extra)
    return meta


def audit_table(table: LoadedTable, cfg: AuditConfig) -> AuditReport:
    data = table.data
    if cfg.features:
        try:
            data = data.select_features(cfg.features)
        except KeyError as exc:
            raise DataError(str(exc)) from None
    splits = make_splits(len(data), cfg.splits, cfg.test_frac, cfg.seed)
    results = _map(run_lr_split, [(data, i, tr, te, cfg) for i, (tr, te) in enumerate(splits)])
    meta = _metadata({"dataset": table.sha256}, cfg.as_dict(), cfg.seed,
                     {"group_names": table.group_names, "label_names": {str(k): v for k, v in table.label_names.items()},
                      "n_rows": len(data), "feature_names": list(data.feature_names)})
    return AuditReport(meta, results, aggregate_splits(results))


def audit_scores(aware: ScoreFile, unaware: ScoreFile, cfg: AuditConfig, dataset_sha: str | None = None) -> AuditReport:
    res = run_score_split(aware, unaware, cfg)
    sha = {"aware_scores": aware.sha256, "unaware_scores": unaware.sha256}
    if dataset_sha:
        sha["dataset"] = dataset_sha
    meta = _metadata(sha, cfg.as_dict(), cfg.seed, {"n_rows": len(aware.row_ids)})
    return AuditReport(meta, [res], aggregate_splits([res]))


# --- policy evaluation --------------------------------------------------------

def c_rates(dist: EmpiricalDistribution, point_scores: np.ndarray, row_scores: np.ndarray,
            labels: np.ndarray, tau: float) -> dict:
    """Share of each group scored strictly below tau (the low-prospect group C)."""
    C = threshold(Predictor(point_scores.tolist()), tau).complement()
    ra = float(positive_rate(dist, C, Group.A))
    rb = float(positive_rate(dist, C, Group.B))
    return {"c_rate_A": ra, "c_rate_B": rb, "delta": abs(rb - ra), "auroc": _auroc_or_none(row_scores, labels)}


def run_policy_split(data: RowDataset, split: int, train_idx, test_idx, tau: float,
                     tc: logreg.TrainConfig) -> dict:
    train, test = data.subset(train_idx), data.subset(test_idx)
    dist, idx = _quiet_from_rows(test)
    out = {"split": split}
    for name, aware in (("aware", True), ("unaware", False)):
        model = logreg.train(train, aware, tc)
        rows = model.row_scores(test)
        pts = np.empty(len(dist))
        pts[idx] = rows
        out[name] = c_rates(dist, pts, rows, test.labels, tau)
    return out


POLICY_KEYS = ("c_rate_A", "c_rate_B", "delta", "auroc")


@dataclass
class PolicyReport:
    metadata: dict
    tau: float
    group_names: dict
    splits: list
    summary: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return _dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "PolicyReport":
        return cls.from_dict(json.loads(text))

    def table(self) -> str:
        """Group-C shares per group, the gap between them and AUROC, as mean ± std in percent."""
        model = self.metadata.get("config", {}).get("model", "lr").upper()
        a, b = self.group_names.get("A", "A"), self.group_names.get("B", "B")
        head = ["model", "mode", f"C {a}", f"C {b}", "Delta", "AUROC"]
        lines = []
        for mode in ("aware", "unaware"):
            s = self.summary[mode]
            lines.append([model, mode] + [_pct(s[k]) for k in POLICY_KEYS])
        widths = [max(len(r[i]) for r in [head] + lines) for i in range(len(head))]
        fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
        return "\n".join([f"group C: score < {self.tau:g} over {self.summary['n_splits']} split(s)", fmt(head)]
                         + [fmt(r) for r in lines]) + "\n"


def _pct(ms: dict) -> str:
    if ms["mean"] is None:
        return "n/a"
    return f"{100 * ms['mean']:.1f}% ± {100 * ms['std']:.1f}%"


def _policy_summary(splits: list) -> dict:
    out = {mode: {k: _mean_std([s[mode][k] for s in splits]) for k in POLICY_KEYS} for mode in ("aware", "unaware")}
    out["n_splits"] = len(splits)
    return out


def policy_eval_table(table: LoadedTable, tau: float = 0.25, k: int = 10, test_frac: float = 0.3, seed: int = 0,
                      tc: logreg.TrainConfig | None = None, features: Sequence[str] | None = None) -> PolicyReport:
    tc = tc or logreg.TrainConfig(seed=seed)
    data = table.data.select_features(features) if features else table.data
    splits = make_splits(len(data), k, test_frac, seed)
    rows = _map(run_policy_split, [(data, i, tr, te, tau, tc) for i, (tr, te) in enumerate(splits)])
    cfg = {"model": "lr", "tau": tau, "splits": k, "test_frac": test_frac, "seed": seed,
           "features": None if not features else list(features), "learning_rate": tc.learning_rate,
           "max_iters": tc.max_iters, "convergence_tol": tc.convergence_tol, "l2_penalty": tc.l2_penalty}
    meta = _metadata({"dataset": table.sha256}, cfg, seed, {"n_rows": len(data)})
    return PolicyReport(meta, tau, table.group_names, rows, _policy_summary(rows))


def policy_eval_scores(aware: ScoreFile, unaware: ScoreFile, tau: float = 0.25,
                       group_names: dict | None = None) -> PolicyReport:
    check_score_pair(aware, unaware)
    dist, idx = _quiet_from_rows(aware.dataset())
    row = {"split": 0}
    for name, sf in (("aware", aware), ("unaware", unaware)):
        pts = np.empty(len(dist))
        pts[idx] = sf.scores
        row[name] = c_rates(dist, pts, sf.scores, sf.labels, tau)
    meta = _metadata({"aware_scores": aware.sha256, "unaware_scores": unaware.sha256},
                     {"model": "scores", "tau": tau}, 0, {"n_rows": len(aware.row_ids)})
    return PolicyReport(meta, tau, group_names or {"A": "A", "B": "B"}, [row], _policy_summary([row]))


# --- distributions for the bounds table ---------------------------------------

def load_distribution(path, group_col: str = "group", label_col: str = "label", group_a=None) -> EmpiricalDistribution:
    """A ``.json`` file in ``EmpiricalDistribution.to_dict`` form, or a row-level CSV aggregated by ``from_rows``."""
    if str(path).endswith(".json"):
        try:
            with open(path, encoding="utf-8") as fh:
                return EmpiricalDistribution.from_dict(json.load(fh))
        except FileNotFoundError:
            raise DataError(f"file not found: {path}") from None
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise DataError(f"{path}: invalid distribution file: {exc}") from None
    return from_rows(read_table(path, group_col, label_col, group_a=group_a).data)


def parse_eps(text: str) -> Fraction:
    """Epsilon from a decimal or ``num/den`` string, read exactly."""
    try:
        eps = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"invalid epsilon {text!r}") from None
    if eps < 0:
        raise ValueError(f"epsilon must be nonnegative, got {text!r}")
    return eps


def bounds_csv(rows: list[dict]) -> str:
    cols = ["epsilon", "lambda_eps", "bound", "legacy_bound", "achieved_accuracy"]
    if rows and "oracle_max" in rows[0]:
        cols += ["oracle_max", "verdict"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r[k]) for k in cols})
    return buf.getvalue()


def warn_if_disadvantaged_a(data: RowDataset) -> None:
    """The A/B mapping puts the higher base rate in A unless overridden; say so when it does not."""
    a = data.labels[data.groups == 0].mean()
    b = data.labels[data.groups == 1].mean()
    if math.isfinite(a) and math.isfinite(b) and a < b:
        warnings.warn(f"group A has the lower base rate ({a:.4f} < {b:.4f})")
