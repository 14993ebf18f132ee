"""Online allocation policies.

RankedCUCB keeps an optimistic index per (location, effort level) arm in
the folded-coefficient value space, tightens it across levels with the
Lipschitz/monotonicity structure of the reward curves, and hands the index
table to the exact knapsack oracle each round.  The baselines share the
same statistics and oracle: LIZARD optimizes reward alone, NaiveRank
weighs each location by its own rank coefficient, Random draws feasible
actions blindly, and Optimal replays the hindsight-best action from the
true reward model.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .model import (
    EffortVector,
    ProblemInstance,
    gamma,
    rank_coefficients,
)
from .oracle import solve_dp


class ArmStats:
    """Pull counts and cumulative observed reward per (location, level)."""

    def __init__(self, n_locations: int, n_levels: int):
        self.n = np.zeros((n_locations, n_levels), dtype=np.int64)
        self.reward_sum = np.zeros((n_locations, n_levels))

    def mean(self) -> np.ndarray:
        """Empirical mean reward; zero where an arm has never been pulled."""
        out = np.zeros_like(self.reward_sum)
        np.divide(self.reward_sum, self.n, out=out, where=self.n > 0)
        return out

    def record(self, level_indices: np.ndarray, observations: np.ndarray) -> None:
        rows = np.arange(len(level_indices))
        self.reward_sum[rows, level_indices] += observations
        self.n[rows, level_indices] += 1


def confidence_radius(gamma_i, t, n):
    """Half-width ``sqrt(3 * gamma_i**2 * ln(t) / (2 * n))`` of an arm's
    weighted-mean estimate after ``n`` pulls at round ``t``.

    Callers must ensure ``n >= 1`` and ``t >= 2``; unvisited arms are handled
    upstream with an optimistic cap instead of an infinite radius.
    """
    g = np.asarray(gamma_i, dtype=float)
    return np.sqrt(3.0 * g * g * np.log(t) / (2.0 * np.asarray(n, dtype=float)))


def self_ucb(stats: ArmStats, gamma_vec, t: int, clip: bool = True) -> np.ndarray:
    """Optimistic weighted value of each arm from its own pulls only.

    Visited arms take ``gamma_i * mean + radius``; unvisited arms take the
    cap ``max(0, gamma_i)``, the largest value a mean in [0, 1] can produce.
    With ``clip`` (the default), visited arms are also clipped into
    ``[min(0, gamma_i), max(0, gamma_i)]``; the true weighted value always
    lies there, so clipping never destroys a valid upper bound.
    """
    g = np.asarray(gamma_vec, dtype=float)[:, None]
    visited = stats.n > 0
    mean = stats.mean()
    log_t = np.log(t) if t > 1 else 0.0
    radius = np.zeros_like(mean)
    np.divide(3.0 * g * g * log_t, 2.0 * stats.n, out=radius, where=visited)
    np.sqrt(radius, out=radius)
    raw = g * mean + radius
    hi = np.maximum(0.0, g)
    lo = np.minimum(0.0, g)
    bounded = np.clip(raw, lo, hi) if clip else raw
    return np.where(visited, bounded, np.broadcast_to(hi, raw.shape))


def lipschitz_ucb(self_ucbs, levels, lipschitz: float, gamma_vec) -> np.ndarray:
    """Tightest bound per arm after transferring information across levels.

    Since rewards are monotone nondecreasing and Lipschitz in effort, the
    value at level j is bounded by the value at any level k plus the scaled
    slack ``|gamma_i| * L * max(0, psi_j - psi_k)``; take the minimum over
    all k (k = j included, so the result never exceeds the own-arm bound).
    """
    s = np.asarray(self_ucbs, dtype=float)
    lv = np.asarray(levels, dtype=float)
    scale = np.abs(np.asarray(gamma_vec, dtype=float))[:, None, None]
    slack = np.maximum(0.0, lv[:, None] - lv[None, :])  # slack[j, k]
    return (s[:, None, :] + scale * float(lipschitz) * slack[None, :, :]).min(axis=2)


class Policy:
    """Shared state: arm statistics, the round counter, and the update rule."""

    kind = "?"

    def __init__(self, instance: ProblemInstance, rng=None):
        self.instance = instance
        self.stats = ArmStats(instance.n_locations, instance.n_levels)
        self.t = 1
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def select_action(self) -> EffortVector:
        raise NotImplementedError

    def update(self, beta: EffortVector, observations) -> None:
        """Credit the round's observations to the arms ``beta`` played."""
        x = np.asarray(observations, dtype=float)
        if x.shape != (self.instance.n_locations,):
            raise ValueError("need one observation per location")
        if np.any(x < 0.0) or np.any(x > 1.0) or not np.all(np.isfinite(x)):
            raise ValueError("observations must lie in [0, 1]")
        idx = self.instance.level_index(beta.efforts)
        self.stats.record(idx, x)
        self.t += 1

    def _solve(self, weights) -> EffortVector:
        inst = self.instance
        return solve_dp(weights, inst.budget, inst.effort_levels, inst.granularity).beta


class RankedCUCB(Policy):
    """Optimistic index policy for the blended reward/prioritization objective.

    Each round t uses the discounted coefficient vector gamma(eps_t) with
    ``eps_t = t**(-1/3)``: rank order is ignored at t = 1 where reward
    estimates carry no signal, and takes full weight as estimates converge.
    """

    kind = "RankedCUCB"

    def __init__(self, instance: ProblemInstance, rng=None):
        super().__init__(instance, rng)
        self._q = rank_coefficients(instance)

    def select_action(self) -> EffortVector:
        eps = self.t ** (-1.0 / 3.0)
        g = gamma(self.instance, self._q, eps)
        bounds = self_ucb(self.stats, g, self.t)
        ucb = lipschitz_ucb(bounds, self.instance.effort_levels, self.instance.lipschitz, g)
        return self._solve(ucb)


class Lizard(Policy):
    """Reward-only combinatorial UCB: the same pipeline with lam forced to 1,
    so the coefficient vector collapses to the reward weights."""

    kind = "LIZARD"

    def select_action(self) -> EffortVector:
        g = self.instance.reward_weights
        bounds = self_ucb(self.stats, g, self.t)
        ucb = lipschitz_ucb(bounds, self.instance.effort_levels, self.instance.lipschitz, g)
        return self._solve(ucb)


class NaiveRank(Policy):
    """Weighs each location's plain reward UCB by its own rank coefficient,
    ignoring how the coefficients couple through the shared budget."""

    kind = "NaiveRank"

    def __init__(self, instance: ProblemInstance, rng=None):
        super().__init__(instance, rng)
        self._q = rank_coefficients(instance)
        self._ones = np.ones(instance.n_locations)

    def select_action(self) -> EffortVector:
        bounds = self_ucb(self.stats, self._ones, self.t)
        ucb = lipschitz_ucb(
            bounds, self.instance.effort_levels, self.instance.lipschitz, self._ones
        )
        return self._solve(self._q[:, None] * ucb)


class RandomPolicy(Policy):
    """Uniform feasible action via shuffled greedy level assignment."""

    kind = "Random"

    def select_action(self) -> EffortVector:
        inst = self.instance
        levels = inst.effort_levels
        remaining = inst.budget
        efforts = np.zeros(inst.n_locations)
        for i in self.rng.permutation(inst.n_locations):
            n_feasible = int(np.searchsorted(levels, remaining + 1e-9, side="right"))
            j = int(self.rng.integers(n_feasible))
            efforts[i] = levels[j]
            remaining -= levels[j]
        return EffortVector(efforts)


class OptimalPolicy(Policy):
    """Hindsight-best fixed action, computed once from the true reward model."""

    kind = "Optimal"

    def __init__(self, instance: ProblemInstance, rng=None, true_model=None):
        super().__init__(instance, rng)
        if true_model is None:
            raise ConfigurationError("the Optimal policy requires the true reward model")
        g0 = gamma(instance, rank_coefficients(instance), 0.0)
        alloc = solve_dp(
            g0[:, None] * true_model.mu,
            instance.budget,
            instance.effort_levels,
            instance.granularity,
        )
        self._best = alloc.beta

    def select_action(self) -> EffortVector:
        return self._best


POLICY_KINDS = ("RankedCUCB", "LIZARD", "NaiveRank", "Random", "Optimal")

_POLICY_CLASSES = {
    "RankedCUCB": RankedCUCB,
    "LIZARD": Lizard,
    "NaiveRank": NaiveRank,
    "Random": RandomPolicy,
    "Optimal": OptimalPolicy,
}


def make_policy(kind: str, instance: ProblemInstance, rng=None, true_model=None) -> Policy:
    """Instantiate a policy by name; only Optimal ever sees the true model."""
    cls = _POLICY_CLASSES.get(kind)
    if cls is None:
        raise ConfigurationError(
            f"unknown policy {kind!r}; expected one of {', '.join(POLICY_KINDS)}"
        )
    if kind == "Optimal":
        return cls(instance, rng, true_model=true_model)
    return cls(instance, rng)
