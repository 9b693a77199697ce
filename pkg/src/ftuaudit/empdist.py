"""Finite empirical distributions over (X, Y, group).

All exact computations in the package run on :class:`EmpiricalDistribution`.
Masses and label rates are stored as :class:`fractions.Fraction`; a common
denominator is cached so that sums over deterministic classifiers reduce to
integer arithmetic.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MASS_TOLERANCE = 1e-12


class Group(enum.IntEnum):
    """Binary group tag. ``A`` is the advantaged group, ``B`` the disadvantaged one."""

    A = 0
    B = 1

    @classmethod
    def parse(cls, value) -> "Group":
        if isinstance(value, Group):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown group tag {value!r}") from None
        if value in (0, 1):
            return cls(int(value))
        raise ValueError(f"unknown group tag {value!r}")


def as_fraction(x) -> Fraction:
    """Convert ``x`` to a Fraction, reading floats by their shortest decimal repr.

    ``as_fraction(0.4) == Fraction(2, 5)`` rather than the binary expansion of 0.4.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(float(x)))
    return Fraction(x)


@dataclass(frozen=True)
class PointRecord:
    id: str
    mass: Fraction
    label_rate: Fraction
    group: Group
    # feature vector without the group; points sharing it differ only in group
    features: tuple | None = None


class EmpiricalDistribution:
    """Immutable finite distribution; point order is fixed at construction."""

    def __init__(self, points: Iterable[PointRecord], normalize: bool = True):
        pts = tuple(points)
        if not pts:
            raise ValueError("distribution needs at least one point")
        ids = [p.id for p in pts]
        if len(set(ids)) != len(ids):
            raise ValueError("point ids must be unique")
        clean = []
        for p in pts:
            mass = as_fraction(p.mass)
            rate = as_fraction(p.label_rate)
            if mass <= 0:
                raise ValueError(f"point {p.id!r}: mass must be positive")
            if not 0 <= rate <= 1:
                raise ValueError(f"point {p.id!r}: label rate outside [0, 1]")
            clean.append(PointRecord(p.id, mass, rate, Group.parse(p.group), p.features))
        total = sum((p.mass for p in clean), Fraction(0))
        if abs(total - 1) > MASS_TOLERANCE:
            raise ValueError(f"masses sum to {float(total)!r}, expected 1")
        if total != 1:
            if not normalize:
                raise ValueError("masses do not sum to exactly 1")
            clean = [PointRecord(p.id, p.mass / total, p.label_rate, p.group, p.features) for p in clean]
        self._points = tuple(clean)
        self._index = {p.id: i for i, p in enumerate(self._points)}

        masses = [p.mass for p in self._points]
        positives = [p.mass * p.label_rate for p in self._points]
        den = 1
        for q in masses + positives:
            den = math.lcm(den, q.denominator)
        self.denominator = den
        # numpy int64 when every partial sum fits, python ints otherwise
        dtype = np.int64 if den < (2**62) // max(len(masses), 1) else object
        self.mass_num = np.array([int(q * den) for q in masses], dtype=dtype)
        self.pos_num = np.array([int(q * den) for q in positives], dtype=dtype)
        self.is_b = np.array([p.group == Group.B for p in self._points], dtype=bool)
        self.mass_num.flags.writeable = False
        self.pos_num.flags.writeable = False
        self.is_b.flags.writeable = False

    # --- container protocol -------------------------------------------------
    @property
    def points(self) -> tuple[PointRecord, ...]:
        return self._points

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def __getitem__(self, i: int) -> PointRecord:
        return self._points[i]

    def index_of(self, point_id: str) -> int:
        return self._index[point_id]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self._points)

    @property
    def masses(self) -> tuple[Fraction, ...]:
        return tuple(p.mass for p in self._points)

    @property
    def label_rates(self) -> tuple[Fraction, ...]:
        return tuple(p.label_rate for p in self._points)

    def group_mask(self, g) -> np.ndarray:
        return self.is_b if Group.parse(g) == Group.B else ~self.is_b

    def __repr__(self) -> str:
        return f"EmpiricalDistribution(n_points={len(self)}, mass_B={float(group_mass(self, Group.B)):.4f})"

    def to_dict(self) -> dict:
        """JSON-ready form; fractions are written as ``"num/den"`` strings."""
        out = []
        for p in self._points:
            rec = {"id": p.id, "mass": str(p.mass), "label_rate": str(p.label_rate), "group": p.group.name}
            if p.features is not None:
                rec["features"] = list(p.features)
            out.append(rec)
        return {"points": out}

    @classmethod
    def from_dict(cls, obj: dict) -> "EmpiricalDistribution":
        pts = []
        for i, rec in enumerate(obj["points"]):
            feats = rec.get("features")
            pts.append(
                PointRecord(
                    id=str(rec.get("id", f"x{i + 1}")),
                    mass=as_fraction(rec["mass"]),
                    label_rate=as_fraction(rec["label_rate"]),
                    group=Group.parse(rec["group"]),
                    features=tuple(feats) if feats is not None else None,
                )
            )
        return cls(pts)


def mass_sum(dist: EmpiricalDistribution, values, mask: np.ndarray | None = None) -> Fraction:
    """Exact ``sum_x mu(x) * values[x]`` over points selected by ``mask``.

    ``values`` may hold ints (fast integer path) or Fractions; a mixed
    sequence is split so only the non-integral entries use Fraction math.
    """
    return _weighted(dist, dist.mass_num, values, mask)


def pos_sum(dist: EmpiricalDistribution, values, mask: np.ndarray | None = None) -> Fraction:
    """Exact ``sum_x mu(x) p(x) * values[x]``."""
    return _weighted(dist, dist.pos_num, values, mask)


def _weighted(dist, weights, values, mask) -> Fraction:
    if mask is None:
        mask = np.ones(len(dist), dtype=bool)
    if isinstance(values, np.ndarray) and values.dtype.kind in "biu":
        sel = values[mask].astype(weights.dtype)
        return Fraction(int(np.dot(weights[mask], sel)), dist.denominator)
    vals = list(values)
    total = 0
    frac_part = Fraction(0)
    idx = np.flatnonzero(mask)
    int_vals = np.zeros(len(idx), dtype=weights.dtype)
    for k, i in enumerate(idx):
        v = vals[i]
        if isinstance(v, Fraction) and v.denominator != 1:
            frac_part += Fraction(int(weights[i]), dist.denominator) * v
        else:
            int_vals[k] = int(v)
    total = int(np.dot(weights[idx], int_vals)) if len(idx) else 0
    return Fraction(total, dist.denominator) + frac_part


@dataclass
class RowDataset:
    """Row-level data: real feature matrix, group tags and binary labels.

    ``groups`` holds 0 for group A and 1 for group B. The group column is not
    part of ``features``; aware models append it at training time.
    """

    features: np.ndarray
    groups: np.ndarray
    labels: np.ndarray
    feature_names: Sequence[str] = field(default_factory=tuple)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise ValueError("features must be a 2-D array")
        g = np.asarray(self.groups)
        if g.dtype.kind not in "biu":
            g = np.array([int(Group.parse(v)) for v in g])
        y = np.asarray(self.labels)
        if not (len(X) == len(g) == len(y)):
            raise ValueError("features, groups and labels must have the same length")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be binary (0/1)")
        if not np.isin(g, (0, 1)).all():
            raise ValueError("groups must be 0 (A) or 1 (B)")
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length does not match feature arity")
        self.features = X
        self.groups = g.astype(np.int8)
        self.labels = y.astype(np.int8)
        self.feature_names = names

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx) -> "RowDataset":
        return RowDataset(self.features[idx], self.groups[idx], self.labels[idx], self.feature_names)

    def select_features(self, names: Sequence[str]) -> "RowDataset":
        cols = []
        for n in names:
            if n not in self.feature_names:
                raise KeyError(f"unknown feature {n!r}")
            cols.append(self.feature_names.index(n))
        return RowDataset(self.features[:, cols], self.groups, self.labels, tuple(names))


def from_rows(data: RowDataset, return_index: bool = False):
    """Aggregate rows into an :class:`EmpiricalDistribution`.

    Rows with identical features *and* group merge into one point with
    mass ``count / n`` and label rate ``positives / count``. Points are ordered
    by (features, group), which makes the result independent of row order.
    With ``return_index`` the point index of every row is returned as well.
    """
    n = len(data)
    if n == 0:
        raise ValueError("cannot build a distribution from an empty dataset")
    if not np.isfinite(data.features).all():
        raise ValueError("features must be finite")
    keyed = np.column_stack([data.features, data.groups.astype(float)])
    uniq, inverse, counts = np.unique(keyed, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    positives = np.bincount(inverse, weights=data.labels, minlength=len(uniq)).astype(np.int64)
    pts = []
    for i, row in enumerate(uniq):
        feats = tuple(float(v) for v in row[:-1])
        pts.append(
            PointRecord(
                id=f"p{i}",
                mass=Fraction(int(counts[i]), n),
                label_rate=Fraction(int(positives[i]), int(counts[i])),
                group=Group(int(row[-1])),
                features=feats,
            )
        )
    dist = EmpiricalDistribution(pts)
    if base_rate_or_none(dist, Group.A) is not None and base_rate_or_none(dist, Group.B) is not None:
        if base_rate(dist, Group.A) < base_rate(dist, Group.B):
            warnings.warn("group A has a lower base rate than group B; A is expected to be the advantaged group")
    if return_index:
        return dist, inverse
    return dist


def group_mass(dist: EmpiricalDistribution, g) -> Fraction:
    return mass_sum(dist, np.ones(len(dist), dtype=np.int64), dist.group_mask(g))


def base_rate(dist: EmpiricalDistribution, g=None) -> Fraction:
    """Mass-weighted mean label rate over group ``g`` (whole space if None)."""
    if g is None:
        return pos_sum(dist, np.ones(len(dist), dtype=np.int64))
    mask = dist.group_mask(g)
    m = mass_sum(dist, np.ones(len(dist), dtype=np.int64), mask)
    if m == 0:
        raise ValueError(f"group {Group.parse(g).name} is empty")
    return pos_sum(dist, np.ones(len(dist), dtype=np.int64), mask) / m


def base_rate_or_none(dist, g):
    return None if group_mass(dist, g) == 0 else base_rate(dist, g)


def require_both_groups(dist: EmpiricalDistribution) -> None:
    if dist.is_b.all() or not dist.is_b.any():
        raise ValueError("both groups must be nonempty")


def from_table(label_rates: Sequence, masses: Sequence | None = None, groups: Sequence | None = None,
               ids: Sequence[str] | None = None, features: Sequence | None = None) -> EmpiricalDistribution:
    """Build a distribution directly from per-point columns (mainly for fixtures)."""
    n = len(label_rates)
    masses = masses if masses is not None else [Fraction(1, n)] * n
    groups = groups if groups is not None else [Group.A] * n
    ids = ids if ids is not None else [f"x{i + 1}" for i in range(n)]
    feats = features if features is not None else [None] * n
    return EmpiricalDistribution(
        PointRecord(ids[i], as_fraction(masses[i]), as_fraction(label_rates[i]), Group.parse(groups[i]),
                    tuple(feats[i]) if feats[i] is not None else None)
        for i in range(n)
    )
