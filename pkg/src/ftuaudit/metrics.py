"""Predictors, classifiers and group fairness quantities on empirical distributions.

Classifier values are acceptance probabilities aligned with the point order of
the distribution they were built for. Deterministic classifiers keep an int8
array so that all sums stay in integer arithmetic; randomized ones keep a tuple
of Fractions. Every metric is an exact expectation, never a sample average.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .empdist import (
    EmpiricalDistribution,
    Group,
    as_fraction,
    base_rate,
    group_mass,
    mass_sum,
    pos_sum,
    require_both_groups,
)

HALF = Fraction(1, 2)


class ClassifierKind(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    RANDOMIZED = "randomized"


class Predictor:
    """Per-point score in [0, 1]. Scores may be floats or Fractions."""

    def __init__(self, values: Sequence):
        vals = tuple(values)
        for v in vals:
            if not 0 <= v <= 1:
                raise ValueError(f"score {v!r} outside [0, 1]")
        self.values = vals

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __repr__(self) -> str:
        return f"Predictor({list(self.values)!r})"


class Classifier:
    """Acceptance probability F(x) per point."""

    def __init__(self, values: Sequence):
        if isinstance(values, np.ndarray) and values.dtype.kind in "biu":
            arr = values.astype(np.int8)
            if not np.isin(arr, (0, 1)).all():
                raise ValueError("deterministic classifier values must be 0 or 1")
            self._det = arr
            self._vals = None
        else:
            vals = tuple(as_fraction(v) for v in values)
            if any(not 0 <= v <= 1 for v in vals):
                raise ValueError("acceptance probabilities must lie in [0, 1]")
            if all(v.denominator == 1 for v in vals):
                self._det = np.array([int(v) for v in vals], dtype=np.int8)
                self._vals = None
            else:
                self._det = None
                self._vals = vals
        self._det_ro()

    def _det_ro(self):
        if self._det is not None:
            self._det.flags.writeable = False

    @property
    def kind(self) -> ClassifierKind:
        return ClassifierKind.DETERMINISTIC if self._det is not None else ClassifierKind.RANDOMIZED

    @property
    def is_deterministic(self) -> bool:
        return self._det is not None

    @property
    def array(self) -> np.ndarray:
        """0/1 int8 array; only for deterministic classifiers."""
        if self._det is None:
            raise TypeError("randomized classifier has no 0/1 array")
        return self._det

    @property
    def values(self) -> tuple[Fraction, ...]:
        if self._vals is not None:
            return self._vals
        return tuple(Fraction(int(v)) for v in self._det)

    def _sum_values(self):
        # argument accepted by empdist.mass_sum / pos_sum
        return self._det if self._det is not None else self._vals

    def complement(self) -> "Classifier":
        if self._det is not None:
            return Classifier(1 - self._det)
        return Classifier([1 - v for v in self._vals])

    def as_dict(self, dist: EmpiricalDistribution) -> dict:
        return dict(zip(dist.ids, self.values))

    def __len__(self) -> int:
        return len(self._det) if self._det is not None else len(self._vals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Classifier):
            return NotImplemented
        return self.values == other.values

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        if self._det is not None:
            return f"Classifier({self._det.tolist()})"
        return f"Classifier({[str(v) for v in self._vals]})"


def _check(dist: EmpiricalDistribution, F) -> None:
    if len(F) != len(dist):
        raise ValueError(f"classifier/predictor has {len(F)} values, distribution has {len(dist)} points")


def threshold(pred: Predictor, tau) -> Classifier:
    """F(x) = 1 iff f(x) >= tau."""
    t = as_fraction(tau) if not isinstance(tau, float) else tau
    return Classifier(np.array([1 if v >= t else 0 for v in pred.values], dtype=np.int8))


def bayes_classifier(dist: EmpiricalDistribution, tie: str = "one") -> Classifier:
    """Majority-label classifier; points with p(x) = 1/2 get 1 (tie="one") or 0."""
    if tie not in ("one", "zero"):
        raise ValueError("tie must be 'one' or 'zero'")
    at_half = 1 if tie == "one" else 0
    return Classifier(np.array(
        [1 if p > HALF else 0 if p < HALF else at_half for p in dist.label_rates], dtype=np.int8))


def constant_classifier(dist: EmpiricalDistribution, value) -> Classifier:
    v = as_fraction(value)
    if v.denominator == 1:
        return Classifier(np.full(len(dist), int(v), dtype=np.int8))
    return Classifier([v] * len(dist))


def accuracy(dist: EmpiricalDistribution, F: Classifier) -> Fraction:
    """Probability that F agrees with Y; linear in randomized F."""
    _check(dist, F)
    vals = F._sum_values()
    ones = np.ones(len(dist), dtype=np.int64)
    # sum mu*(F p + (1-F)(1-p)) = sum mu(1-p) + sum F (2 mu p - mu)
    neg_mass = mass_sum(dist, ones) - pos_sum(dist, ones)
    return neg_mass + 2 * pos_sum(dist, vals) - mass_sum(dist, vals)


def disagreement(dist: EmpiricalDistribution, F: Classifier, G: Classifier) -> Fraction:
    """Expected mass on which F and G disagree, sum mu |F - G|."""
    _check(dist, F)
    _check(dist, G)
    if F.is_deterministic and G.is_deterministic:
        return mass_sum(dist, (F.array != G.array).astype(np.int8))
    return mass_sum(dist, [abs(a - b) for a, b in zip(F.values, G.values)])


def positive_rate(dist: EmpiricalDistribution, F: Classifier, g) -> Fraction:
    """E[F(X) | X in g]."""
    _check(dist, F)
    mask = dist.group_mask(g)
    m = group_mass(dist, g)
    if m == 0:
        raise ValueError(f"group {Group.parse(g).name} is empty")
    return mass_sum(dist, F._sum_values(), mask) / m


def disparate_impact(dist: EmpiricalDistribution, F: Classifier) -> Fraction:
    """Signed DI = rate(A) - rate(B); positive when A is favoured."""
    require_both_groups(dist)
    return positive_rate(dist, F, Group.A) - positive_rate(dist, F, Group.B)


def abs_disparate_impact(dist: EmpiricalDistribution, F: Classifier) -> Fraction:
    return abs(disparate_impact(dist, F))


def dbr(dist: EmpiricalDistribution) -> Fraction:
    """Difference in base rates, base_rate(A) - base_rate(B)."""
    require_both_groups(dist)
    return base_rate(dist, Group.A) - base_rate(dist, Group.B)


# --- calibration ------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationViolation:
    scope: str  # "global", "A" or "B"
    score: object
    deviation: object  # observed label rate minus score
    mass: object


def check_calibration(dist: EmpiricalDistribution, f: Predictor, scope: str = "global",
                      tol=Fraction(1, 10**9)) -> list[CalibrationViolation]:
    """List score atoms whose mean label rate deviates from the score by more than ``tol``.

    ``scope`` is ``"global"`` or ``"per_group"``. Exact when scores are Fractions.
    """
    _check(dist, f)
    if scope not in ("global", "per_group"):
        raise ValueError("scope must be 'global' or 'per_group'")
    scopes = [("global", np.ones(len(dist), dtype=bool))]
    if scope == "per_group":
        scopes = [("A", ~dist.is_b), ("B", dist.is_b)]
    exact = all(isinstance(v, (Fraction, int)) for v in f.values)
    tol_v = as_fraction(tol) if exact else float(tol)
    out = []
    for name, mask in scopes:
        atoms: dict = defaultdict(list)
        for i in np.flatnonzero(mask):
            atoms[f.values[i]].append(i)
        for v in sorted(atoms):
            idx = atoms[v]
            m = sum((dist[i].mass for i in idx), Fraction(0))
            rate = sum((dist[i].mass * dist[i].label_rate for i in idx), Fraction(0)) / m
            dev = rate - v if exact else float(rate) - float(v)
            if abs(dev) > tol_v:
                out.append(CalibrationViolation(name, v, dev, m))
    return out


@dataclass(frozen=True)
class BinnedCalibration:
    scope: str
    n_bins_used: int
    max_abs_deviation: float
    expected_calibration_error: float
    n_violations: int


def binned_calibration(dist: EmpiricalDistribution, scores: np.ndarray, n_bins: int = 100,
                       tol: float = 1e-6) -> list[BinnedCalibration]:
    """Calibration summary for continuous scores, using equal-width score bins.

    Within each bin the mass-weighted mean label rate is compared with the
    mass-weighted mean score. Returned per group and globally.
    """
    scores = np.asarray(scores, dtype=float)
    if len(scores) != len(dist):
        raise ValueError("scores must align with the distribution points")
    mass = np.array([float(m) for m in dist.masses])
    rate = np.array([float(p) for p in dist.label_rates])
    bins = np.minimum((scores * n_bins).astype(int), n_bins - 1)
    out = []
    for name, mask in (("global", np.ones(len(dist), bool)), ("A", ~dist.is_b), ("B", dist.is_b)):
        if not mask.any():
            continue
        b, w, s, r = bins[mask], mass[mask], scores[mask], rate[mask]
        W = np.bincount(b, weights=w, minlength=n_bins)
        S = np.bincount(b, weights=w * s, minlength=n_bins)
        R = np.bincount(b, weights=w * r, minlength=n_bins)
        used = W > 0
        dev = np.abs(R[used] - S[used]) / W[used]
        ece = float(np.sum(W[used] * dev) / W[used].sum())
        out.append(BinnedCalibration(name, int(used.sum()), float(dev.max()), ece, int((dev > tol).sum())))
    return out


# --- prediction distributions and the base-rate / DI relation ----------------

@dataclass(frozen=True)
class PredictionDistribution:
    """Per-group conditional score distributions as sorted (score, mass) atoms."""

    A: tuple
    B: tuple

    def mean(self, g) -> Fraction:
        atoms = self.A if Group.parse(g) == Group.A else self.B
        return sum((v * w for v, w in atoms), Fraction(0))

    def above(self, g, tau) -> Fraction:
        """Conditional mass at scores >= tau."""
        atoms = self.A if Group.parse(g) == Group.A else self.B
        return sum((w for v, w in atoms if v >= tau), Fraction(0))

    @classmethod
    def from_atoms(cls, A: dict, B: dict) -> "PredictionDistribution":
        def norm(d):
            items = sorted((as_fraction(v), as_fraction(w)) for v, w in d.items() if as_fraction(w) != 0)
            if sum(w for _, w in items) != 1:
                raise ValueError("conditional masses must sum to 1")
            return tuple(items)

        return cls(norm(A), norm(B))


def prediction_distributions(dist: EmpiricalDistribution, f: Predictor) -> PredictionDistribution:
    _check(dist, f)
    require_both_groups(dist)
    parts = {}
    for g in (Group.A, Group.B):
        m = group_mass(dist, g)
        atoms: dict = defaultdict(Fraction)
        for i in np.flatnonzero(dist.group_mask(g)):
            atoms[as_fraction(f.values[i])] += dist[i].mass / m
        parts[g.name] = tuple(sorted(atoms.items()))
    return PredictionDistribution(parts["A"], parts["B"])


class RateGapCondition(str, enum.Enum):
    STRICT = "strict_holds"
    RELAXED = "relaxed_holds"
    NEITHER = "neither"


def check_prop1_conditions(pd: PredictionDistribution, tau=HALF) -> RateGapCondition:
    """Which sufficient condition for ``rate_B - rate_A >= E[V_b] - E[V_a]`` holds.

    Strict: P_A(v) >= P_B(v) for every v < tau and P_B(v) >= P_A(v) for v >= tau.
    Relaxed: sum_{v>=tau} (P_B - P_A)(v)(1-v) >= 0 and sum_{v<tau} (P_A - P_B)(v) v >= 0.
    """
    tau = as_fraction(tau)
    pa, pb = dict(pd.A), dict(pd.B)
    support = set(pa) | set(pb)
    strict = all(
        (pa.get(v, 0) >= pb.get(v, 0)) if v < tau else (pb.get(v, 0) >= pa.get(v, 0))
        for v in support
    )
    if strict:
        return RateGapCondition.STRICT
    high = sum(((pb.get(v, 0) - pa.get(v, 0)) * (1 - v) for v in support if v >= tau), Fraction(0))
    low = sum(((pa.get(v, 0) - pb.get(v, 0)) * v for v in support if v < tau), Fraction(0))
    if high >= 0 and low >= 0:
        return RateGapCondition.RELAXED
    return RateGapCondition.NEITHER


def prop1_sides(pd: PredictionDistribution, tau=HALF) -> tuple[Fraction, Fraction]:
    """(rate_B - rate_A, E[V_b] - E[V_a]): the two sides compared by the base-rate relation."""
    tau = as_fraction(tau)
    return pd.above("B", tau) - pd.above("A", tau), pd.mean("B") - pd.mean("A")


# --- ranking ------------------------------------------------------------------

def auroc(scores, labels=None) -> float:
    """Area under the ROC curve via the rank-sum statistic; ties count 1/2.

    Accepts either a sequence of ``(score, label)`` pairs or two parallel arrays.
    """
    if labels is None:
        pairs = np.asarray(list(scores), dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("expected a sequence of (score, label) pairs")
        s, y = pairs[:, 0], pairs[:, 1]
    else:
        s = np.asarray(scores, dtype=float)
        y = np.asarray(labels, dtype=float)
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC needs at least one positive and one negative label")
    ranks = rankdata(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))
