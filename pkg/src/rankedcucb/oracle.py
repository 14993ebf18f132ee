"""Exact solver for the per-round effort assignment.

Choosing one effort level per location under a total-effort budget is a
multiple-choice knapsack.  Because every level is an integer multiple of
the grid unit, a dynamic program over (location, consumed budget) solves
it exactly; an exhaustive solver provides an independent cross-check on
small instances.

Both solvers share one deterministic tie-break among optimal assignments:
highest value first, then least total effort, then effort pushed toward
the lowest location indices (the lexicographically largest effort vector).
Negative weights need no special casing: the zero level is always
feasible, so a location with nonpositive weights simply receives nothing.
"""

from __future__ import annotations

import itertools
import math

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import EffortVector, GRID_TOL

#: Reported value must re-evaluate to the DP's optimum within this.
VALUE_TOL = 1e-9
#: The exhaustive solver refuses instances with more assignments than this.
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class Allocation:
    """An effort vector plus the objective value it achieves."""

    beta: EffortVector
    value: float
    level_indices: np.ndarray

    def __post_init__(self):
        idx = np.array(self.level_indices, dtype=np.intp)
        idx.setflags(write=False)
        object.__setattr__(self, "level_indices", idx)
        object.__setattr__(self, "value", float(self.value))


def _validated(weights, budget, levels, unit):
    w = np.asarray(weights, dtype=float)
    lv = np.asarray(levels, dtype=float)
    if w.ndim != 2:
        raise ConfigurationError("weights must be a (locations x levels) table")
    if lv.ndim != 1 or len(lv) < 1:
        raise ConfigurationError("levels must be a nonempty 1-D grid")
    if w.shape[1] != len(lv):
        raise ConfigurationError(
            f"weight table has {w.shape[1]} level columns but {len(lv)} levels declared"
        )
    if not np.all(np.isfinite(w)):
        raise ConfigurationError("weights must all be finite")
    if np.any(np.diff(lv) <= 0) or lv[0] != 0.0:
        raise ConfigurationError("levels must be strictly ascending and start at 0")
    budget = float(budget)
    if not np.isfinite(budget) or budget < 0:
        raise ConfigurationError("budget must be finite and nonnegative")
    if unit is None:  # the exhaustive solver needs no integer grid
        return w, lv, None, budget, None
    unit = float(unit)
    if not np.isfinite(unit) or unit <= 0:
        raise ConfigurationError("unit must be a positive number")
    ratio = lv / unit
    costs = np.rint(ratio).astype(np.int64)
    if np.any(np.abs(ratio - costs) > GRID_TOL):
        raise ConfigurationError("every level must be an integer multiple of unit")
    return w, lv, costs, budget, unit


def solve_dp(weights, budget, levels, unit: float = 1.0) -> Allocation:
    """Exact assignment by dynamic programming over the integer budget grid.

    ``weights[i][j]`` is the objective contribution of playing level j at
    location i.  Runs in O(locations * levels * budget/unit).
    """
    w, lv, costs, budget, unit = _validated(weights, budget, levels, unit)
    n_locations, n_levels = w.shape
    cap = int(math.floor(budget / unit + GRID_TOL))

    # Suffix tables over remaining capacity: best value from location i on,
    # and the least total effort that attains it.
    val = np.zeros((n_locations + 1, cap + 1))
    eff = np.zeros((n_locations + 1, cap + 1))
    neg_inf = np.full(cap + 1, -np.inf)
    pos_inf = np.full(cap + 1, np.inf)
    for i in range(n_locations - 1, -1, -1):
        best_v = neg_inf.copy()
        best_e = pos_inf.copy()
        for j in range(n_levels):
            c = int(costs[j])
            if c > cap:
                break
            cand_v = neg_inf.copy()
            cand_e = pos_inf.copy()
            cand_v[c:] = val[i + 1, : cap + 1 - c] + w[i, j]
            cand_e[c:] = eff[i + 1, : cap + 1 - c] + lv[j]
            better = (cand_v > best_v) | ((cand_v == best_v) & (cand_e < best_e))
            best_v = np.where(better, cand_v, best_v)
            best_e = np.where(better, cand_e, best_e)
        val[i] = best_v
        eff[i] = best_e

    # Reconstruct; scanning levels high-to-low realizes the "effort at the
    # lowest indices" tie-break because equal-(value, effort) states keep
    # the largest feasible level at the earliest location.
    choice = np.empty(n_locations, dtype=np.intp)
    b = cap
    for i in range(n_locations):
        for j in range(n_levels - 1, -1, -1):
            c = int(costs[j])
            if c > b:
                continue
            if (
                w[i, j] + val[i + 1, b - c] == val[i, b]
                and lv[j] + eff[i + 1, b - c] == eff[i, b]
            ):
                choice[i] = j
                b -= c
                break
        else:  # pragma: no cover - the zero level always matches
            raise AssertionError("dp reconstruction failed")

    value = float(np.sum(w[np.arange(n_locations), choice]))
    assert abs(value - val[0, cap]) <= VALUE_TOL
    return Allocation(EffortVector(lv[choice]), value, choice)


def solve_brute(weights, budget, levels, max_assignments: int = BRUTE_FORCE_LIMIT) -> Allocation:
    """Exhaustive assignment search; the cross-check oracle for ``solve_dp``.

    Enumerates all levels**locations assignments, so it guards against
    instances larger than ``max_assignments``.
    """
    w, lv, _, budget, _ = _validated(weights, budget, levels, None)
    n_locations, n_levels = w.shape
    if n_levels**n_locations > max_assignments:
        raise ConfigurationError(
            f"{n_levels}**{n_locations} assignments exceed the brute-force guard"
        )

    location_range = np.arange(n_locations)
    best_key = None
    best_combo = None
    for combo in itertools.product(range(n_levels), repeat=n_locations):
        idx = np.array(combo, dtype=np.intp)
        total = float(lv[idx].sum())
        if total > budget + GRID_TOL:
            continue
        value = float(np.sum(w[location_range, idx]))
        key = (-value, total, tuple(-j for j in combo))
        if best_key is None or key < best_key:
            best_key = key
            best_combo = idx
    assert best_combo is not None  # the all-zeros assignment is always feasible
    value = float(np.sum(w[location_range, best_combo]))
    return Allocation(EffortVector(lv[best_combo]), value, best_combo)
