"""Logistic regression, aware and unaware, plus protected-coefficient zeroing.

Training is full-batch gradient descent on the mean logistic loss with
backtracking: a step that would raise the loss is halved until it does not.
Non-binary features are standardized internally; the fitted model is stored in
original feature units so predictions need no preprocessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .empdist import EmpiricalDistribution, Group, RowDataset, from_rows, group_mass
from .metrics import Predictor, accuracy, disparate_impact, threshold

GROUP_FEATURE = "__group_B__"


def sigmoid(z):
    """Numerically stable logistic function; works on scalars and arrays."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def logit(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("logit is defined on (0, 1) only")
    out = np.log(p / (1 - p))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 4.0
    max_iters: int = 5000
    convergence_tol: float = 1e-6
    l2_penalty: float = 0.0
    # the solver starts from zero and is deterministic; seed is recorded for provenance
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class LRModel:
    intercept: float
    coefficients: tuple[float, ...]
    feature_names: tuple[str, ...]
    pa_index: int | None = None
    std_intercept: float | None = None
    std_coefficients: tuple[float, ...] | None = None
    converged: bool = True
    n_iter: int = 0
    loss_trace: tuple[float, ...] = field(default=(), repr=False)
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def aware(self) -> bool:
        return self.pa_index is not None

    @property
    def pa_coefficient(self) -> float:
        if self.pa_index is None:
            raise ValueError("model was trained without the protected attribute")
        return self.coefficients[self.pa_index]

    def logits(self, data: RowDataset) -> np.ndarray:
        X = design_matrix(data, self.aware)
        if X.shape[1] != len(self.coefficients):
            raise ValueError(f"model expects {len(self.coefficients)} features, data has {X.shape[1]}")
        return self.intercept + X @ np.asarray(self.coefficients)

    def row_scores(self, data: RowDataset) -> np.ndarray:
        return sigmoid(self.logits(data))

    def dumps(self) -> str:
        """Flat ``key=value`` text, one entry per line."""
        lines = [f"intercept={self.intercept!r}"]
        for name, c in zip(self.feature_names, self.coefficients):
            lines.append(f"coef.{name}={c!r}")
        if self.pa_index is not None:
            lines.append(f"pa={self.feature_names[self.pa_index]}")
        lines.append(f"converged={self.converged}")
        for k in sorted(self.provenance):
            lines.append(f"provenance.{k}={self.provenance[k]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "LRModel":
        intercept, names, coefs, pa, conv, prov = 0.0, [], [], None, True, {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            if key == "intercept":
                intercept = float(value)
            elif key.startswith("coef."):
                names.append(key[5:])
                coefs.append(float(value))
            elif key == "pa":
                pa = value
            elif key == "converged":
                conv = value == "True"
            elif key.startswith("provenance."):
                prov[key[11:]] = float(value)
        pa_index = names.index(pa) if pa is not None else None
        return cls(intercept, tuple(coefs), tuple(names), pa_index, converged=conv, provenance=prov)


def design_matrix(data: RowDataset, aware: bool) -> np.ndarray:
    if aware:
        return np.column_stack([data.features, data.groups.astype(float)])
    return data.features


def logistic_loss(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> float:
    """Mean logistic loss of weights ``w = (intercept, coefs...)`` plus ``l2/2 |w|^2``.

    The intercept is penalized as well, so a fit on single-class labels stays bounded.
    """
    z = w[0] + X @ w[1:]
    # log(1 + e^z) - y z, computed without overflow
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(loss + 0.5 * l2 * np.dot(w, w))


def logistic_grad(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = 0.0) -> np.ndarray:
    z = w[0] + X @ w[1:]
    r = sigmoid(z) - y
    g = np.empty_like(w)
    g[0] = r.mean()
    g[1:] = X.T @ r / len(y)
    return g + l2 * w


def _standardizer(X: np.ndarray):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    binary = np.all((X == 0) | (X == 1), axis=0)
    keep = binary | (std == 0)
    mean = np.where(keep, 0.0, mean)
    std = np.where(keep, 1.0, std)
    return mean, std


def fit(X: np.ndarray, y: np.ndarray, cfg: TrainConfig):
    """Gradient descent on already-prepared features. Returns (w, converged, n_iter, trace)."""
    w = np.zeros(X.shape[1] + 1)
    loss = logistic_loss(w, X, y, cfg.l2_penalty)
    trace = [loss]
    step = cfg.learning_rate
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = logistic_grad(w, X, y, cfg.l2_penalty)
        if np.linalg.norm(g) <= cfg.convergence_tol:
            converged = True
            break
        while True:
            w_new = w - step * g
            new_loss = logistic_loss(w_new, X, y, cfg.l2_penalty)
            if new_loss <= loss or step < 1e-12:
                break
            step /= 2
        if new_loss > loss:
            break  # no descent possible at machine precision
        w, loss = w_new, new_loss
        trace.append(loss)
        # let the step grow back after halvings, never beyond the configured rate
        step = min(step * 2, cfg.learning_rate)
    return w, converged, it, trace


def train(data: RowDataset, aware: bool, cfg: TrainConfig | None = None) -> LRModel:
    cfg = cfg or TrainConfig()
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    X = design_matrix(data, aware)
    if not np.isfinite(X).all():
        raise ValueError("features must be finite")
    y = data.labels.astype(float)
    mean, std = _standardizer(X)
    Z = (X - mean) / std
    w, converged, n_iter, trace = fit(Z, y, cfg)
    coefs = w[1:] / std
    intercept = w[0] - float(np.dot(w[1:], mean / std))
    names = tuple(data.feature_names) + ((GROUP_FEATURE,) if aware else ())
    return LRModel(
        intercept=float(intercept),
        coefficients=tuple(float(c) for c in coefs),
        feature_names=names,
        pa_index=len(names) - 1 if aware else None,
        std_intercept=float(w[0]),
        std_coefficients=tuple(float(c) for c in w[1:]),
        converged=converged,
        n_iter=n_iter,
        loss_trace=tuple(trace),
    )


def predict(model: LRModel, data: RowDataset, dist: EmpiricalDistribution | None = None,
            row_index: np.ndarray | None = None) -> Predictor:
    """Scores on the aggregated points of ``data``.

    Pass ``dist`` and ``row_index`` from ``from_rows(data, return_index=True)``
    to reuse an existing aggregation.
    """
    if dist is None or row_index is None:
        dist, row_index = from_rows(data, return_index=True)
    scores = model.row_scores(data)
    out = np.empty(len(dist))
    out[row_index] = scores
    return Predictor(out.tolist())


def zero_pa(model: LRModel) -> LRModel:
    """The naive unaware model: same coefficients with the protected one removed."""
    if model.pa_index is None:
        raise ValueError("zero_pa needs a model trained with the protected attribute")
    k = model.pa_index
    drop = lambda seq: tuple(v for i, v in enumerate(seq) if i != k) if seq is not None else None
    prov = dict(model.provenance)
    prov["c_G"] = model.coefficients[k]
    return replace(
        model,
        coefficients=drop(model.coefficients),
        feature_names=drop(model.feature_names),
        pa_index=None,
        std_coefficients=drop(model.std_coefficients),
        provenance=prov,
    )


def threshold_feature_value(model: LRModel, group, tau: float = 0.5, feature: int = 0) -> float:
    """Feature value where a single-feature model's score crosses ``tau`` for ``group``."""
    n_plain = len(model.coefficients) - (1 if model.aware else 0)
    if n_plain != 1:
        raise ValueError("threshold_feature_value needs exactly one non-group feature")
    c = model.coefficients[feature]
    if c == 0:
        return math.inf
    offset = model.pa_coefficient if (model.aware and Group.parse(group) == Group.B) else 0.0
    return (logit(tau) - model.intercept - offset) / c


@dataclass(frozen=True)
class ZeroingReport:
    c_G: float
    mass_B: Fraction
    mass_Q: Fraction
    q_mask: np.ndarray = field(repr=False)
    flip_mask: np.ndarray = field(repr=False)
    accuracy_bound: float  # 2 sigma(-c_G) P(Q)
    accuracy_change: Fraction  # Acc(F') - Acc(F)
    predicted_di_change: Fraction  # -P(Q)/P(B)
    di_change: Fraction  # DI(F') - DI(F)
    di_aware: Fraction
    di_unaware: Fraction
    b_still_disadvantaged: bool

    @property
    def flip_set_matches(self) -> bool:
        return bool(np.array_equal(self.q_mask, self.flip_mask))

    def summary(self) -> dict:
        return {
            "c_G": self.c_G,
            "mass_B": float(self.mass_B),
            "mass_Q": float(self.mass_Q),
            "accuracy_bound": self.accuracy_bound,
            "accuracy_change": float(self.accuracy_change),
            "predicted_di_change": float(self.predicted_di_change),
            "di_change": float(self.di_change),
            "di_aware": float(self.di_aware),
            "di_unaware": float(self.di_unaware),
            "b_still_disadvantaged": self.b_still_disadvantaged,
            "flip_set_matches_Q": self.flip_set_matches,
        }


def prop6_analysis(dist: EmpiricalDistribution, model: LRModel, data: RowDataset,
                   row_index: np.ndarray | None = None, tau: float = 0.5) -> ZeroingReport:
    """Effect of zeroing the protected coefficient of an aware model on ``dist``.

    ``dist`` must be ``from_rows(data)``. Q holds the B points whose aware score
    lies in [sigma(c_G), tau); with a 0.5 threshold these are exactly the points
    whose decision flips. For c_G >= 0 the set is empty.
    """
    if not model.aware:
        raise ValueError("prop6_analysis needs an aware model")
    if row_index is None:
        dist2, row_index = from_rows(data, return_index=True)
        if dist2.ids != dist.ids:
            raise ValueError("dist does not match the aggregation of data")
    c_g = model.pa_coefficient
    unaware = zero_pa(model)
    f = np.asarray(predict(model, data, dist, row_index).values)
    F = threshold(Predictor(f), tau)
    if c_g < 0:
        f_prime = np.empty(len(dist))
        f_prime[row_index] = unaware.row_scores(data)
        F_prime = threshold(Predictor(f_prime), tau)
    else:
        # zeroing a non-negative penalty is out of scope: report no change
        F_prime = F
    lo = float(sigmoid(c_g)) if c_g < 0 else tau
    q = dist.is_b & (f >= lo) & (f < tau)
    flips = F.array != F_prime.array
    m_b = group_mass(dist, Group.B)
    m_q = sum((dist[i].mass for i in np.flatnonzero(q)), Fraction(0))
    di_f = disparate_impact(dist, F)
    di_fp = disparate_impact(dist, F_prime)
    return ZeroingReport(
        c_G=c_g,
        mass_B=m_b,
        mass_Q=m_q,
        q_mask=q,
        flip_mask=flips,
        accuracy_bound=2 * float(sigmoid(-c_g)) * float(m_q),
        accuracy_change=accuracy(dist, F_prime) - accuracy(dist, F),
        predicted_di_change=-m_q / m_b,
        di_change=di_fp - di_f,
        di_aware=di_f,
        di_unaware=di_fp,
        b_still_disadvantaged=di_f >= m_q / m_b,
    )


def predicted_di_reduction(mass_q, mass_b) -> float:
    """DI reduction -P(Q)/P(B) expected from zeroing c_G when B stays disadvantaged."""
    return float(mass_q) / float(mass_b)
