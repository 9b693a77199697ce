"""Synthetic tabular data with a logistic ground truth and a group logit offset.

Three profiles loosely mimic the shape of census income, census employment and
labour-market-programme data. Labels are drawn as
``Y ~ Bernoulli(sigmoid(intercept + sum_j coef_j x_j + offset * [group B]))``.
Features are drawn independently of the group, so the offset is the only
source of a base-rate gap. All generating parameters are returned so tests can
use them as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .empdist import RowDataset
from .logreg import sigmoid

PROFILES = ("income-like", "employment-like", "almp-like")

DEFAULT_OFFSET = {"income-like": -0.86, "employment-like": -0.3, "almp-like": -0.35}
GROUP_B_SHARE = {"income-like": 0.479, "employment-like": 0.51, "almp-like": 0.438}


@dataclass(frozen=True)
class SynthMeta:
    profile: str
    n: int
    seed: int
    group_offset: float
    intercept: float
    coefficients: dict
    group_b_share: float

    def header_lines(self) -> list[str]:
        lines = [
            f"# ftuaudit-synth profile={self.profile}",
            f"# n={self.n}",
            f"# seed={self.seed}",
            f"# group_offset={self.group_offset!r}",
            f"# intercept={self.intercept!r}",
            f"# group_b_share={self.group_b_share!r}",
        ]
        lines += [f"# coef.{k}={v!r}" for k, v in self.coefficients.items()]
        return lines

    @classmethod
    def from_header(cls, lines) -> "SynthMeta":
        kv = {}
        for line in lines:
            body = line.lstrip("#").strip()
            for tok in body.split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    kv[k] = v
        coefs = {k[5:]: float(v) for k, v in kv.items() if k.startswith("coef.")}
        return cls(kv["profile"], int(kv["n"]), int(kv["seed"]), float(kv["group_offset"]),
                   float(kv["intercept"]), coefs, float(kv["group_b_share"]))


def _features(profile: str, n: int, rng: np.random.Generator):
    """Feature columns and their true logit coefficients (centered features)."""
    if profile == "income-like":
        edu = np.clip(np.round(rng.normal(19.0, 2.8, n)), 1, 24)
        age = np.clip(rng.normal(42.0, 13.0, n), 17, 80)
        hours = np.clip(rng.normal(40.0, 11.0, n), 1, 99)
        occ = rng.normal(0.0, 1.0, n)
        married = (rng.uniform(size=n) < 0.5).astype(float)
        cols = {"education": edu, "age": age, "hours": hours, "occupation": occ, "married": married}
        coefs = {"education": 0.9, "age": 0.06, "hours": 0.1, "occupation": 2.4, "married": 1.0}
        centers = {"education": 19.0, "age": 42.0, "hours": 38.0, "occupation": 0.0, "married": 0.5}
        base = 0.0
    elif profile == "employment-like":
        age = np.clip(rng.normal(44.0, 17.0, n), 16, 90)
        edu = np.clip(np.round(rng.normal(17.0, 3.0, n)), 1, 24)
        disability = (rng.uniform(size=n) < 0.12).astype(float)
        married = (rng.uniform(size=n) < 0.5).astype(float)
        native = (rng.uniform(size=n) < 0.85).astype(float)
        cols = {"age": age, "education": edu, "disability": disability, "married": married, "native": native}
        coefs = {"age": -0.035, "education": 0.35, "disability": -1.6, "married": 0.6, "native": 0.2}
        centers = {"age": 44.0, "education": 17.0, "disability": 0.0, "married": 0.5, "native": 0.85}
        base = 0.2
    elif profile == "almp-like":
        age = np.clip(rng.normal(37.0, 10.0, n), 18, 64)
        edu = np.clip(np.round(rng.normal(2.0, 0.9, n)), 0, 4)
        spells = rng.poisson(1.0, n)
        emp_months = np.clip(rng.normal(16.0, 6.0, n), 0, 24)
        swiss = (rng.uniform(size=n) < 0.64).astype(float)
        prior_wage = rng.normal(0.0, 1.0, n)
        cols = {"age": age, "education": edu, "unemp_spells": spells.astype(float),
                "emp_months": emp_months, "swiss": swiss, "prior_wage": prior_wage}
        coefs = {"age": -0.045, "education": 0.3, "unemp_spells": -0.45, "emp_months": 0.11,
                 "swiss": 0.35, "prior_wage": 0.35}
        centers = {"age": 37.0, "education": 2.0, "unemp_spells": 1.0, "emp_months": 16.0,
                   "swiss": 0.64, "prior_wage": 0.0}
        base = 0.45
    else:
        raise ValueError(f"unknown profile {profile!r}; choose from {PROFILES}")
    intercept = base - sum(coefs[k] * centers[k] for k in coefs)
    return cols, coefs, intercept


def _population_dbr(logit_rest: np.ndarray, is_b: np.ndarray, offset: float) -> float:
    p = sigmoid(logit_rest + offset * is_b)
    return float(p[~is_b].mean() - p[is_b].mean())


def generate(profile: str = "income-like", n: int = 10_000, group_offset: float | None = None,
             dbr_target: float | None = None, seed: int = 0) -> tuple[RowDataset, SynthMeta]:
    """Draw ``n`` rows. With ``dbr_target`` the group offset is solved so that the
    expected difference in base rates on the drawn features equals the target.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    share = GROUP_B_SHARE.get(profile, 0.5)
    is_b = rng.uniform(size=n) < share
    cols, coefs, intercept = _features(profile, n, rng)
    names = tuple(cols)
    X = np.column_stack([cols[k] for k in names])
    rest = intercept + X @ np.array([coefs[k] for k in names])
    if dbr_target is not None:
        f = lambda off: _population_dbr(rest, is_b, off) - dbr_target
        group_offset = float(brentq(f, -15.0, 15.0, xtol=1e-10))
    elif group_offset is None:
        group_offset = DEFAULT_OFFSET[profile]
    p = sigmoid(rest + group_offset * is_b)
    y = (rng.uniform(size=n) < p).astype(np.int8)
    data = RowDataset(X, is_b.astype(np.int8), y, names)
    meta = SynthMeta(profile, n, seed, float(group_offset), float(intercept),
                     {k: float(coefs[k]) for k in names}, share)
    return data, meta


def write_csv(path, data: RowDataset, meta: SynthMeta | None = None, group_col: str = "group",
              label_col: str = "label") -> None:
    """CSV with optional ``#`` header comments; groups written as ``A``/``B``.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(path, data, meta, group_col, label_col)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        _write_rows(fh, data, meta, group_col, label_col)


def _write_rows(fh, data, meta, group_col, label_col) -> None:
    if meta is not None:
        fh.write("\n".join(meta.header_lines()) + "\n")
    fh.write(",".join(list(data.feature_names) + [group_col, label_col]) + "\n")
    gnames = np.where(data.groups == 1, "B", "A")
    for row, g, y in zip(data.features, gnames, data.labels):
        fh.write(",".join(repr(float(v)) for v in row) + f",{g},{int(y)}\n")
