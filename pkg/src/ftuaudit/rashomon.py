"""Model multiplicity bounds over finite empirical distributions.

Flipping the Bayes decision at a point x costs ``2 |p(x) - 1/2| mu(x)`` accuracy,
so the classifiers farthest from Bayes within an accuracy budget flip points in
order of increasing distance from 1/2. The profile tabulates that order:

* ``lambdas``  distinct distances ``|p(x) - 1/2|``
* ``mass_at``  mass at each distance
* ``cum_error`` cost of flipping everything strictly closer to 1/2

All values are exact Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .empdist import EmpiricalDistribution, Group, as_fraction, group_mass, require_both_groups
from .metrics import (
    HALF,
    Classifier,
    accuracy,
    bayes_classifier,
    disagreement,
    disparate_impact,
)


@dataclass(frozen=True)
class RashomonProfile:
    dist: EmpiricalDistribution
    bayes: Classifier
    lambdas: tuple[Fraction, ...]
    mass_at: Mapping[Fraction, Fraction]
    cum_error: Mapping[Fraction, Fraction]
    point_index: Mapping[Fraction, tuple[int, ...]]
    # position of every point's distance in ``lambdas``
    level_of: np.ndarray = field(repr=False)

    @property
    def full_flip_cost(self) -> Fraction:
        """Accuracy lost by the complement of the Bayes classifier."""
        top = self.lambdas[-1]
        return self.cum_error[top] + 2 * top * self.mass_at[top]

    @property
    def min_lambda(self) -> Fraction:
        return self.lambdas[0]


def build_profile(dist: EmpiricalDistribution, tie: str = "one") -> RashomonProfile:
    dists = [abs(p - HALF) for p in dist.label_rates]
    lambdas = tuple(sorted(set(dists)))
    pos = {lam: k for k, lam in enumerate(lambdas)}
    mass_at = {lam: Fraction(0) for lam in lambdas}
    members: dict = {lam: [] for lam in lambdas}
    for i, lam in enumerate(dists):
        mass_at[lam] += dist[i].mass
        members[lam].append(i)
    cum = {}
    running = Fraction(0)
    for lam in lambdas:
        cum[lam] = running
        running += 2 * lam * mass_at[lam]
    return RashomonProfile(
        dist=dist,
        bayes=bayes_classifier(dist, tie),
        lambdas=lambdas,
        mass_at=mass_at,
        cum_error=cum,
        point_index={lam: tuple(v) for lam, v in members.items()},
        level_of=np.array([pos[lam] for lam in dists], dtype=np.int64),
    )


def lambda_eps(profile: RashomonProfile, epsilon) -> Fraction:
    """Largest distance level whose cumulative flip cost e(lambda) is at most epsilon."""
    eps = as_fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    best = profile.lambdas[0]
    for lam in profile.lambdas:
        if profile.cum_error[lam] <= eps:
            best = lam
        else:
            break
    return best


@dataclass(frozen=True)
class BoundCertificate:
    epsilon: Fraction
    # budget actually spendable; smaller than epsilon only past the full flip cost
    effective_epsilon: Fraction
    lambda_eps: Fraction
    bound_value: Fraction
    flip_probability: Fraction
    achieving_classifier: Classifier
    achieved_accuracy: Fraction
    achieved_disagreement: Fraction

    def summary(self) -> dict:
        return {
            "epsilon": float(self.epsilon),
            "lambda_eps": float(self.lambda_eps),
            "bound": float(self.bound_value),
            "bound_exact": str(self.bound_value),
            "achieved_accuracy": float(self.achieved_accuracy),
            "achieved_disagreement": float(self.achieved_disagreement),
        }


def bound_value(profile: RashomonProfile, epsilon) -> Fraction:
    """Largest disagreement with Bayes reachable within accuracy loss epsilon.

    Past the full flip cost every point is already flipped and the value is 1.
    """
    eps = as_fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    if eps >= profile.full_flip_cost:
        return Fraction(1)
    lam = lambda_eps(profile, eps)
    below = sum((profile.mass_at[l] for l in profile.lambdas if l < lam), Fraction(0))
    return (eps - profile.cum_error[lam]) / (2 * lam) + below


def multiplicity_bound(profile: RashomonProfile, epsilon) -> BoundCertificate:
    """Tight bound on max d(F, B) over the epsilon-Rashomon set of B, with its achiever.

    The achiever flips every point closer to 1/2 than lambda_eps, flips points
    at lambda_eps with a common probability, and keeps the rest. Its accuracy
    and disagreement are recomputed from scratch and checked against the bound.
    """
    eps = as_fraction(epsilon)
    value = bound_value(profile, eps)
    full = profile.full_flip_cost
    lam = lambda_eps(profile, eps)
    B = profile.bayes.array
    if eps >= full:
        eff = full
        prob = Fraction(1)
        F = Classifier(1 - B)
    else:
        eff = eps
        prob = (eps - profile.cum_error[lam]) / (2 * lam * profile.mass_at[lam])
        k = profile.lambdas.index(lam)
        vals: list = []
        for i in range(len(profile.dist)):
            level = profile.level_of[i]
            flipped = 1 - int(B[i])
            if level < k:
                vals.append(flipped)
            elif level == k:
                vals.append(int(B[i]) + (flipped - int(B[i])) * prob)
            else:
                vals.append(int(B[i]))
        F = Classifier(vals)
    acc = accuracy(profile.dist, F)
    d = disagreement(profile.dist, F, profile.bayes)
    acc_b = accuracy(profile.dist, profile.bayes)
    if acc != acc_b - eff or d != value:
        raise AssertionError(f"bound certificate failed at epsilon={eps}: acc={acc}, d={d}, bound={value}")
    return BoundCertificate(eps, eff, lam, value, prob, F, acc, d)


def legacy_bound(profile: RashomonProfile, epsilon) -> Fraction:
    """epsilon / (2c) with c the smallest distance of p(x) from 1/2; needs c > 0."""
    c = profile.min_lambda
    if c == 0:
        raise ValueError("legacy bound needs every |p(x) - 1/2| > 0")
    return as_fraction(epsilon) / (2 * c)


def two_model_bound(profile: RashomonProfile, epsilon, delta) -> Fraction:
    """Bound on d(F, G) for F within epsilon and G within delta of Bayes accuracy."""
    eps, dlt = as_fraction(epsilon), as_fraction(delta)
    if eps < 0 or dlt < 0:
        raise ValueError("epsilon and delta must be nonnegative")
    return multiplicity_bound(profile, eps + dlt).bound_value


def di_difference_bound(dist: EmpiricalDistribution, F: Classifier, G: Classifier) -> Fraction:
    """d(F, G) / min group mass; deliberately not clipped to the DI range."""
    require_both_groups(dist)
    smaller = min(group_mass(dist, Group.A), group_mass(dist, Group.B))
    return disagreement(dist, F, G) / smaller


# --- achievable DI change for unaware models -----------------------------------

def deterministic_flip_set(profile: RashomonProfile, budget) -> np.ndarray:
    """Boolean mask of points a deterministic near-maximal H flips away from Bayes.

    Flips every level below lambda_eps, then points at lambda_eps in point
    order while the cumulative cost stays within the budget.
    """
    budget = as_fraction(budget)
    n = len(profile.dist)
    if budget >= profile.full_flip_cost:
        return np.ones(n, dtype=bool)
    lam = lambda_eps(profile, budget)
    k = profile.lambdas.index(lam)
    flip = profile.level_of < k
    spent = profile.cum_error[lam]
    for i in profile.point_index[lam]:
        cost = 2 * lam * profile.dist[i].mass
        if spent + cost <= budget:
            flip[i] = True
            spent += cost
    return flip


def is_unaware(dist: EmpiricalDistribution, F: Classifier) -> bool:
    """True if F agrees on every pair of points that differ only in group."""
    seen: dict = {}
    vals = F.values
    for i, p in enumerate(dist):
        if p.features is None:
            continue
        if p.features in seen and seen[p.features] != vals[i]:
            return False
        seen.setdefault(p.features, vals[i])
    return True


@dataclass(frozen=True)
class UnawareDIResult:
    G: Classifier
    di_change: Fraction  # DI(G) - DI(F)
    construction: str
    delta: Fraction
    flip_set_disagreement: Fraction  # d(H, B) of the deterministic H used
    lower_bound: Fraction  # d(H, B) / (2 * max group mass)
    in_rashomon_set: bool
    candidates: Mapping[str, tuple]


def _raise_lower(base: np.ndarray, U: np.ndarray, is_b: np.ndarray, raise_a: bool) -> np.ndarray:
    """Move ``base`` on U so DI moves one way: raise one group to 1, lower the other to 0."""
    G = base.copy()
    up = U & (~is_b if raise_a else is_b)
    down = U & (is_b if raise_a else ~is_b)
    G[up] = 1
    G[down] = 0
    return G


def unaware_achievable_di(dist: EmpiricalDistribution, F: Classifier, epsilon,
                          profile: RashomonProfile | None = None) -> UnawareDIResult:
    """Find G within epsilon accuracy of an unaware F whose DI differs substantially from F's.

    With delta = Acc(B) - Acc(F), a deterministic H flipping Bayes within budget
    epsilon + delta defines the set U where H and B differ. Four candidates are
    built on U: raising group A / lowering group B (or the mirror), applied to
    F and applied to B. Candidates outside the epsilon-Rashomon set of F are
    dropped; the one with the largest |DI change| is returned. The B-based pair
    always contains a member with |DI change| >= d(H, B) / (2 max group mass).
    """
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if not F.is_deterministic:
        raise ValueError("F must be deterministic")
    require_both_groups(dist)
    if not is_unaware(dist, F):
        raise ValueError("F uses the group: it differs on points that differ only in group")
    profile = profile or build_profile(dist)
    acc_b = accuracy(dist, profile.bayes)
    acc_f = accuracy(dist, F)
    delta = acc_b - acc_f
    U = deterministic_flip_set(profile, eps + delta)
    H = Classifier(np.where(U, 1 - profile.bayes.array, profile.bayes.array))
    d_hb = disagreement(dist, H, profile.bayes)
    larger = max(group_mass(dist, Group.A), group_mass(dist, Group.B))
    lower = d_hb / (2 * larger)

    di_f = disparate_impact(dist, F)
    cands = {}
    for base_name, base in (("F", F.array), ("B", profile.bayes.array)):
        for tag, raise_a in ((">", True), ("<", False)):
            G = Classifier(_raise_lower(base.astype(np.int8), U, dist.is_b, raise_a))
            ok = accuracy(dist, G) >= acc_f - eps
            cands[f"G{tag}[{base_name}]"] = (G, disparate_impact(dist, G) - di_f, ok)
    admissible = {k: v for k, v in cands.items() if v[2]}
    # F itself is always admissible; it is the fallback when U is empty
    best_name = max(admissible, key=lambda k: (abs(admissible[k][1]), k)) if admissible else None
    if best_name is None:
        G, change, ok = F, Fraction(0), True
        best_name = "F"
    else:
        G, change, ok = admissible[best_name]
    return UnawareDIResult(G, change, best_name, delta, d_hb, lower, ok,
                           {k: (v[1], v[2]) for k, v in cands.items()})
