"""Problem data and the ranked-prioritization objective.

A planner repeatedly splits a discrete effort budget across locations.
Each group of interest occupies the locations in known proportions, and
groups are indexed by priority: group 1 is the most vulnerable, group G
the least.  The round objective blends total expected reward with a
continuous rank-agreement score; because that score is itself a linear
function of the per-location rewards, the whole objective folds into a
single per-location coefficient vector (``gamma``), which keeps action
selection a linear assignment problem.

All types here are immutable after construction and every operation is a
pure function, so they are safe to share across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Tolerance for a density row to count as summing to one.
DENSITY_TOL = 1e-9
#: Tolerance for matching an effort value against the discrete grid.
GRID_TOL = 1e-9
#: Benefits closer than this count as tied in the Kendall tau.
KENDALL_TIE_TOL = 1e-12
#: Maximum allowed disagreement between the two objective formulations.
DUAL_FORM_TOL = 1e-9


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def grid_index(levels: np.ndarray, efforts) -> np.ndarray:
    """Map effort values onto indices of the ascending grid ``levels``.

    Raises ValueError if any effort is farther than ``GRID_TOL`` from every
    grid point.
    """
    e = np.atleast_1d(np.asarray(efforts, dtype=float))
    hi = np.clip(np.searchsorted(levels, e), 0, len(levels) - 1)
    lo = np.clip(hi - 1, 0, len(levels) - 1)
    idx = np.where(np.abs(levels[hi] - e) <= np.abs(levels[lo] - e), hi, lo)
    bad = np.abs(levels[idx] - e) > GRID_TOL
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(
            f"effort {e[i]!r} at position {i} is not on the effort grid"
        )
    return idx.astype(np.intp)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Static description of one allocation problem.

    density
        (G, N) matrix; row g holds the fraction of group g present at each
        location and sums to one.  Groups are ordered most-vulnerable first.
    budget
        Total effort available per round.
    effort_levels
        Ascending effort grid; the first level must be 0 so that spending
        nothing at a location is always feasible.
    lipschitz
        Slope bound on every true reward curve (reward per effort unit).
    lam
        Trade-off weight in (0, 1]: 1 means reward only, smaller values put
        more weight on ranked prioritization.
    horizon
        Number of rounds a run should last.
    group_weights
        Optional positive per-group importance multipliers (default 1).
    reward_weights
        Optional per-location reward coefficients (default 1); may be
        negative.
    granularity
        Unit in which effort levels and the budget are expressed; every
        level must be an integer multiple of it.
    """

    density: np.ndarray
    budget: float
    effort_levels: np.ndarray
    lipschitz: float
    lam: float
    horizon: int
    group_weights: np.ndarray | None = None
    reward_weights: np.ndarray | None = None
    granularity: float = 1.0

    def __post_init__(self):
        d = np.array(self.density, dtype=float)
        if d.ndim != 2:
            raise ValueError("density must be a (groups x locations) matrix")
        n_groups, n_locations = d.shape
        if n_groups < 2:
            raise ValueError("at least two groups are required")
        if n_locations < 1:
            raise ValueError("at least one location is required")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("densities must be finite and nonnegative")
        sums = d.sum(axis=1)
        off = np.abs(sums - 1.0) > DENSITY_TOL
        if np.any(off):
            g = int(np.argmax(off))
            raise ValueError(
                f"density row for group {g + 1} sums to {sums[g]!r}, expected 1"
            )

        levels = np.array(self.effort_levels, dtype=float)
        if levels.ndim != 1 or len(levels) < 1:
            raise ValueError("effort_levels must be a nonempty 1-D grid")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("effort_levels must be strictly ascending")
        if levels[0] != 0.0:
            raise ValueError("the lowest effort level must be 0")

        unit = float(self.granularity)
        if not (np.isfinite(unit) and unit > 0):
            raise ValueError("granularity must be a positive number")
        ratio = levels / unit
        if np.any(np.abs(ratio - np.rint(ratio)) > GRID_TOL):
            raise ValueError("every effort level must be a multiple of granularity")

        budget = float(self.budget)
        if not np.isfinite(budget) or budget < 0:
            raise ValueError("budget must be finite and nonnegative")
        if levels[-1] > budget + GRID_TOL:
            raise ValueError("the largest effort level exceeds the budget")

        lip = float(self.lipschitz)
        if not np.isfinite(lip) or lip < 0:
            raise ValueError("lipschitz must be finite and nonnegative")
        lam = float(self.lam)
        if not (0.0 < lam <= 1.0):
            raise ValueError("lam must lie in (0, 1]")
        horizon = int(self.horizon)
        if horizon < 1:
            raise ValueError("horizon must be at least 1")

        gw = self.group_weights
        gw = np.ones(n_groups) if gw is None else np.array(gw, dtype=float)
        if gw.shape != (n_groups,) or not np.all(np.isfinite(gw)) or np.any(gw < 0):
            raise ValueError("group_weights must be finite nonnegative, one per group")
        rw = self.reward_weights
        rw = np.ones(n_locations) if rw is None else np.array(rw, dtype=float)
        if rw.shape != (n_locations,) or not np.all(np.isfinite(rw)):
            raise ValueError("reward_weights must be finite, one per location")

        object.__setattr__(self, "density", _frozen(d))
        object.__setattr__(self, "budget", budget)
        object.__setattr__(self, "effort_levels", _frozen(levels))
        object.__setattr__(self, "lipschitz", lip)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "group_weights", _frozen(gw))
        object.__setattr__(self, "reward_weights", _frozen(rw))
        object.__setattr__(self, "granularity", unit)

    @property
    def n_groups(self) -> int:
        return self.density.shape[0]

    @property
    def n_locations(self) -> int:
        return self.density.shape[1]

    @property
    def n_levels(self) -> int:
        return len(self.effort_levels)

    @classmethod
    def from_counts(cls, counts, **kwargs) -> "ProblemInstance":
        """Build an instance from raw per-(group, location) head counts.

        Counts are normalized per group once here; the instance stores
        densities only.
        """
        c = np.asarray(counts, dtype=float)
        if c.ndim != 2:
            raise ValueError("counts must be a (groups x locations) matrix")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("counts must be finite and nonnegative")
        totals = c.sum(axis=1)
        if np.any(totals <= 0):
            g = int(np.argmax(totals <= 0))
            raise ValueError(f"group {g + 1} has zero total count")
        return cls(density=c / totals[:, None], **kwargs)

    def level_index(self, efforts) -> np.ndarray:
        """Indices of the given effort values on this instance's grid."""
        return grid_index(self.effort_levels, efforts)


@dataclass(frozen=True, eq=False)
class EffortVector:
    """One effort value per location; the combinatorial action of a round."""

    efforts: np.ndarray

    def __post_init__(self):
        e = np.atleast_1d(np.array(self.efforts, dtype=float))
        if e.ndim != 1:
            raise ValueError("efforts must be 1-D")
        object.__setattr__(self, "efforts", _frozen(e))

    def __len__(self) -> int:
        return len(self.efforts)


def validate_effort(instance: ProblemInstance, beta: EffortVector) -> None:
    """Check grid membership and the budget constraint; raise on violation."""
    if len(beta) != instance.n_locations:
        raise ValueError("effort vector length does not match the instance")
    instance.level_index(beta.efforts)
    total = float(beta.efforts.sum())
    if total > instance.budget + GRID_TOL:
        raise ValueError(f"total effort {total!r} exceeds budget {instance.budget!r}")


@dataclass(frozen=True, eq=False)
class GroupBenefit:
    """Expected benefit accruing to each group under some action."""

    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.array(self.xi, dtype=float))
        if x.ndim != 1 or len(x) < 2:
            raise ValueError("xi must hold one value per group, two groups minimum")
        object.__setattr__(self, "xi", _frozen(x))


def rank_coefficients(instance: ProblemInstance) -> np.ndarray:
    """Per-location coefficient of the rank-agreement score.

    For location i this is the average over all ordered group pairs (g, h),
    g higher priority than h, of the weighted density surplus
    ``a_g * d_gi - a_h * d_hi``.  Positive where high-priority groups are
    over-represented, so directing reward there raises the score.  With unit
    group weights every coefficient lies in [-1, 1].
    """
    n_groups = instance.n_groups
    # Group g gains (G-1-g) appearances as the favored member of a pair and
    # g appearances as the disfavored one (0-indexed).
    pair_coeff = instance.group_weights * (n_groups - 1 - 2 * np.arange(n_groups))
    return (pair_coeff @ instance.density) / math.comb(n_groups, 2)


def gamma(instance: ProblemInstance, q: np.ndarray, epsilon: float) -> np.ndarray:
    """Fold reward weights and rank coefficients into one vector.

    ``gamma_i = lam * c_i + (1 - lam) * (1 - epsilon) * q_i``.  The epsilon
    knob discounts the prioritization term while reward estimates are still
    coarse: at epsilon = 1 the vector reduces to ``lam * c`` and rank order
    is ignored entirely; at epsilon = 0 it is the terminal coefficient used
    for regret accounting.
    """
    eps = float(epsilon)
    if not (0.0 <= eps <= 1.0):
        raise ValueError("epsilon must lie in [0, 1]")
    q = np.asarray(q, dtype=float)
    return instance.lam * instance.reward_weights + (1.0 - instance.lam) * (1.0 - eps) * q


def mu_at(beta: EffortVector, mu: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    """Reward-table values at each location's chosen effort level."""
    table = np.asarray(mu, dtype=float)
    idx = instance.level_index(beta.efforts)
    return table[np.arange(instance.n_locations), idx]


def group_benefit(beta: EffortVector, mu, instance: ProblemInstance) -> GroupBenefit:
    """Density-weighted reward each group receives under ``beta``."""
    return GroupBenefit(instance.density @ mu_at(beta, mu, instance))


def prioritization_metric(beta: EffortVector, mu, instance: ProblemInstance) -> float:
    """Continuous rank-agreement score of an action.

    Computed two independent ways and cross-checked: the defining pairwise
    sum of weighted benefit gaps, and the per-location fold against
    ``rank_coefficients``.  Both must agree to within ``DUAL_FORM_TOL``.
    """
    w = instance.group_weights * group_benefit(beta, mu, instance).xi
    n_groups = instance.n_groups
    pairwise = 0.0
    for g in range(n_groups - 1):
        for h in range(g + 1, n_groups):
            pairwise += w[g] - w[h]
    pairwise /= math.comb(n_groups, 2)

    folded = float(mu_at(beta, mu, instance) @ rank_coefficients(instance))
    assert abs(pairwise - folded) <= DUAL_FORM_TOL, (
        f"prioritization forms disagree: {pairwise!r} vs {folded!r}"
    )
    return float(pairwise)


def objective_value(
    beta: EffortVector, mu, instance: ProblemInstance, epsilon: float = 0.0
) -> float:
    """Blended round objective ``lam * reward + (1-lam) * (1-eps) * score``.

    Cross-checked against the folded form ``sum_i mu_i(beta_i) * gamma_i``.
    """
    m = mu_at(beta, mu, instance)
    reward = float(instance.reward_weights @ m)
    score = prioritization_metric(beta, mu, instance)
    explicit = instance.lam * reward + (1.0 - instance.lam) * (1.0 - float(epsilon)) * score
    folded = float(m @ gamma(instance, rank_coefficients(instance), epsilon))
    assert abs(explicit - folded) <= DUAL_FORM_TOL, (
        f"objective forms disagree: {explicit!r} vs {folded!r}"
    )
    return float(explicit)


def kendall_tau(benefits, tie_tol: float = KENDALL_TIE_TOL) -> float:
    """Kendall tau of group benefits against the priority order 1..G.

    +1 when benefits strictly decrease with group index (perfect agreement),
    -1 when they strictly increase (complete disagreement).  Pairs whose
    benefits differ by at most ``tie_tol`` count as neither concordant nor
    discordant.
    """
    xi = benefits.xi if isinstance(benefits, GroupBenefit) else np.asarray(benefits, float)
    n_groups = len(xi)
    if n_groups < 2:
        raise ValueError("kendall_tau needs at least two groups")
    concordant = discordant = 0
    for g in range(n_groups - 1):
        for h in range(g + 1, n_groups):
            diff = xi[g] - xi[h]
            if diff > tie_tol:
                concordant += 1
            elif diff < -tie_tol:
                discordant += 1
    return (concordant - discordant) / math.comb(n_groups, 2)
