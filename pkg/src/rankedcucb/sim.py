"""Ground-truth environment: synthetic reward curves, group densities,
observation sampling, and the instance file format.

The true reward model is the simulator-side secret: policies never see it,
the harness uses it to score actions, and the Optimal baseline uses it to
compute the hindsight-best action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GenerationError, InstanceFormatError
from .model import EffortVector, ProblemInstance, _frozen, grid_index

#: Slack allowed when checking the reward-curve shape constraints.
CURVE_TOL = 1e-9

SCENARIOS = ("uniform", "adversarial")

#: Largest rank correlation tolerated between top-priority density and
#: end-of-grid reward in the adversarial scenario.
ADVERSARIAL_MAX_CORRELATION = -0.5


@dataclass(frozen=True, eq=False)
class RewardModel:
    """True mean reward per (location, effort level), on an effort grid.

    Curves are monotone nondecreasing in effort and live in [0, 1]; values
    between grid points are taken piecewise-linear, but nothing in the
    engine ever queries off the grid.
    """

    levels: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        lv = np.array(self.levels, dtype=float)
        m = np.array(self.mu, dtype=float)
        if lv.ndim != 1 or np.any(np.diff(lv) <= 0):
            raise ValueError("levels must be a strictly ascending 1-D grid")
        if m.ndim != 2 or m.shape[1] != len(lv):
            raise ValueError("mu must be a (locations x levels) table")
        if not np.all(np.isfinite(m)) or np.any(m < -CURVE_TOL) or np.any(m > 1 + CURVE_TOL):
            raise ValueError("mu values must lie in [0, 1]")
        if np.any(np.diff(m, axis=1) < -CURVE_TOL):
            raise ValueError("mu must be nondecreasing in effort")
        object.__setattr__(self, "levels", _frozen(lv))
        object.__setattr__(self, "mu", _frozen(np.clip(m, 0.0, 1.0)))

    @property
    def n_locations(self) -> int:
        return self.mu.shape[0]

    def mu_at(self, beta: EffortVector) -> np.ndarray:
        idx = grid_index(self.levels, beta.efforts)
        return self.mu[np.arange(self.n_locations), idx]


def reward_model_violations(model: RewardModel, lipschitz: float) -> list[str]:
    """Exhaustively check range, monotonicity, and the Lipschitz bound over
    every grid pair; returns one message per violation."""
    violations = []
    lv, m = model.levels, model.mu
    n_locations, n_levels = m.shape
    for i in range(n_locations):
        for j in range(n_levels):
            if not (-CURVE_TOL <= m[i, j] <= 1 + CURVE_TOL):
                violations.append(f"location {i}, level {j}: value {m[i, j]!r} outside [0, 1]")
            for k in range(j + 1, n_levels):
                gap = m[i, k] - m[i, j]
                if gap < -CURVE_TOL:
                    violations.append(
                        f"location {i}, levels {j}->{k}: reward decreases by {-gap!r}"
                    )
                if abs(gap) > lipschitz * (lv[k] - lv[j]) + CURVE_TOL:
                    violations.append(
                        f"location {i}, levels {j}->{k}: slope exceeds the Lipschitz bound"
                    )
    return violations


def _rank_correlation(x: np.ndarray, y: np.ndarray, tie_tol: float = 1e-12) -> float:
    """Kendall rank correlation between two vectors; tied pairs count as neither."""
    n = len(x)
    if n < 2:
        return 0.0
    concordant = discordant = 0
    for a in range(n - 1):
        for b in range(a + 1, n):
            dx, dy = x[a] - x[b], y[a] - y[b]
            if abs(dx) <= tie_tol or abs(dy) <= tie_tol:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / math.comb(n, 2)


def generate_instance(
    n_locations: int = 25,
    n_groups: int = 4,
    n_levels: int = 4,
    budget: float | None = None,
    lipschitz: float = 0.25,
    seed: int = 0,
    scenario: str = "uniform",
    *,
    lam: float = 0.8,
    horizon: int = 1000,
    max_retries: int = 50,
) -> tuple[ProblemInstance, RewardModel]:
    """Draw a synthetic instance plus its hidden reward model.

    Effort levels are 0..n_levels-1 with unit granularity, and the budget
    defaults to half the maximal total effort.  Reward curves start from a
    random base and climb by nonnegative increments of at most the
    Lipschitz slope per step, capped at 1, so the shape constraints hold by
    construction.  The adversarial scenario clusters the high-priority
    groups spatially, places the top-priority group where end-of-grid
    reward is lowest (rank correlation at most -0.5, verified with bounded
    retries) and the least-priority group where it is highest, and gives
    the top-priority stronghold a curve just below the best hotspot's so
    the reward/prioritization trade-off is genuinely present.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    if min(n_locations, n_levels) < 1 or n_groups < 2:
        raise ValueError("need at least one location, two groups, one level")
    levels = np.arange(n_levels, dtype=float)
    if budget is None:
        budget = n_locations * float(levels[-1]) / 2.0
    rng = np.random.default_rng(seed)

    # Higher-priority groups cluster into fewer locations in the adversarial
    # scenario (small Dirichlet concentration), which is what makes their
    # interests diverge from blanket reward chasing; the uniform scenario
    # spreads every group flat.
    if scenario == "adversarial":
        concentration = np.geomspace(0.15, 2.0, n_groups)
    else:
        concentration = np.ones(n_groups)

    for _ in range(max_retries):
        density = rng.gamma(concentration[:, None], size=(n_groups, n_locations))
        density /= density.sum(axis=1, keepdims=True)

        if scenario == "adversarial":
            # Near-linear curves with per-location slopes spread across the
            # allowed band, so locations separate quickly in raw reward.
            base = rng.uniform(0.0, 0.1, size=n_locations)
            slopes = rng.uniform(0.15 * lipschitz, lipschitz, size=n_locations)
            steps = slopes[:, None] * np.ones((n_locations, max(n_levels - 1, 0)))
        else:
            base = rng.uniform(0.0, 0.4, size=n_locations)
            steps = rng.uniform(0.0, lipschitz, size=(n_locations, max(n_levels - 1, 0)))
        steps = steps * (np.diff(levels) if n_levels > 1 else 1.0)
        mu = np.minimum(1.0, base[:, None] + np.concatenate(
            [np.zeros((n_locations, 1)), np.cumsum(steps, axis=1)], axis=1
        ))

        if scenario == "adversarial":
            # Permuting one group's density across locations keeps the row
            # normalized.  Put the top-priority group where the end-of-grid
            # reward is lowest and the least-priority group where it is
            # highest, recreating the tension between reward chasing and
            # protecting the most vulnerable.
            order_reward = np.argsort(mu[:, -1])
            top = np.sort(density[0])[::-1]
            density[0, order_reward] = top
            bottom = np.sort(density[-1])
            density[-1, order_reward] = bottom
            # The top-priority stronghold also gets a curve just below the
            # best hotspot's, so favoring it sacrifices only a sliver of
            # reward; without such a near-twin the reward-first and blended
            # allocations almost always coincide and the scenario would not
            # actually exhibit the trade-off.
            hot = int(np.argmax(mu[:, -1]))
            stronghold = int(np.argmax(density[0]))
            if hot != stronghold:
                mu[stronghold] = mu[hot] * (1.0 - rng.uniform(0.04, 0.10))
            if _rank_correlation(density[0], mu[:, -1]) > ADVERSARIAL_MAX_CORRELATION:
                continue

        instance = ProblemInstance(
            density=density,
            budget=budget,
            effort_levels=levels,
            lipschitz=lipschitz,
            lam=lam,
            horizon=horizon,
        )
        return instance, RewardModel(levels=levels, mu=mu)

    raise GenerationError(
        f"could not generate a {scenario!r} instance in {max_retries} attempts"
    )


def sample_observations(model: RewardModel, beta: EffortVector, rng: np.random.Generator) -> np.ndarray:
    """One Bernoulli observation per location with mean ``mu_i(beta_i)``."""
    p = model.mu_at(beta)
    return (rng.random(len(p)) < p).astype(float)


# --------------------------------------------------------------------------
# Instance file format
#
# Line 1        key=value header: groups, budget, levels (';'-separated),
#               lipschitz, lambda, horizon, plus optional granularity and
#               group_weights.
# Line 2        column header: location_id, count_group_1..G and, when
#               present, reward_weight.
# Data rows     one per location; counts are normalized per group at load.
# 'reward:'     optional marker introducing one row per location with the
#               true mean reward at each effort level.
# --------------------------------------------------------------------------

_REQUIRED_HEADER_KEYS = ("groups", "budget", "levels", "lipschitz", "lambda", "horizon")
_OPTIONAL_HEADER_KEYS = ("granularity", "group_weights")
_REWARD_MARKER = "reward:"


def save_instance(instance: ProblemInstance, path, model: RewardModel | None = None) -> None:
    """Write an instance (and optionally its reward model) to ``path``.

    Floats are written with full round-trip precision so that save followed
    by load reproduces every numeric field exactly.
    """
    parts = [
        f"groups={instance.n_groups}",
        f"budget={instance.budget!r}",
        "levels=" + ";".join(repr(float(v)) for v in instance.effort_levels),
        f"lipschitz={instance.lipschitz!r}",
        f"lambda={instance.lam!r}",
        f"horizon={instance.horizon}",
    ]
    if instance.granularity != 1.0:
        parts.append(f"granularity={instance.granularity!r}")
    if np.any(instance.group_weights != 1.0):
        parts.append("group_weights=" + ";".join(repr(float(v)) for v in instance.group_weights))
    lines = [", ".join(parts)]

    has_weights = bool(np.any(instance.reward_weights != 1.0))
    columns = ["location_id"] + [f"count_group_{g + 1}" for g in range(instance.n_groups)]
    if has_weights:
        columns.append("reward_weight")
    lines.append(",".join(columns))
    for i in range(instance.n_locations):
        row = [str(i)] + [repr(float(v)) for v in instance.density[:, i]]
        if has_weights:
            row.append(repr(float(instance.reward_weights[i])))
        lines.append(",".join(row))

    if model is not None:
        if model.mu.shape != (instance.n_locations, instance.n_levels):
            raise ValueError("reward model shape does not match the instance")
        lines.append(_REWARD_MARKER)
        for i in range(instance.n_locations):
            lines.append(",".join([str(i)] + [repr(float(v)) for v in model.mu[i]]))

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(line: str) -> dict:
    values = {}
    for piece in line.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise InstanceFormatError(f"header: expected key=value, got {piece!r}")
        key, _, raw = piece.partition("=")
        key = key.strip()
        if key not in _REQUIRED_HEADER_KEYS + _OPTIONAL_HEADER_KEYS:
            raise InstanceFormatError(f"header: unknown key {key!r}")
        values[key] = raw.strip()
    missing = [k for k in _REQUIRED_HEADER_KEYS if k not in values]
    if missing:
        raise InstanceFormatError(f"header: missing keys {', '.join(missing)}")
    return values


def _header_float(values: dict, key: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise InstanceFormatError(f"header: {key} is not a number: {values[key]!r}") from None


def load_instance(path) -> tuple[ProblemInstance, RewardModel | None]:
    """Read an instance file; returns the reward model too when a ``reward:``
    section is present.  Raises InstanceFormatError naming the offending
    row and column on malformed input."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) < 3:
        raise InstanceFormatError("file too short: need a header, columns, and data rows")

    header = _parse_header(lines[0])
    try:
        n_groups = int(header["groups"])
        horizon = int(header["horizon"])
        levels = np.array([float(v) for v in header["levels"].split(";")])
    except ValueError as exc:
        raise InstanceFormatError(f"header: {exc}") from None
    budget = _header_float(header, "budget")
    lipschitz = _header_float(header, "lipschitz")
    lam = _header_float(header, "lambda")
    granularity = _header_float(header, "granularity") if "granularity" in header else 1.0
    group_weights = None
    if "group_weights" in header:
        group_weights = np.array([float(v) for v in header["group_weights"].split(";")])

    expected = ["location_id"] + [f"count_group_{g + 1}" for g in range(n_groups)]
    columns = [c.strip() for c in lines[1].split(",")]
    has_weights = columns == expected + ["reward_weight"]
    if not has_weights and columns != expected:
        raise InstanceFormatError(
            f"column header mismatch: got {lines[1]!r}"
        )

    counts_rows: list[list[float]] = []
    weights: list[float] = []
    reward_rows: list[list[float]] = []
    in_reward = False
    for line in lines[2:]:
        if line.strip() == _REWARD_MARKER:
            in_reward = True
            continue
        cells = [c.strip() for c in line.split(",")]
        row_no = len(reward_rows) if in_reward else len(counts_rows)
        if not in_reward:
            if len(cells) != len(columns):
                raise InstanceFormatError(f"row {row_no}: expected {len(columns)} cells")
            if cells[0] != str(row_no):
                raise InstanceFormatError(
                    f"row {row_no}: expected location_id {row_no}, got {cells[0]!r}"
                )
            try:
                values = [float(c) for c in cells[1:]]
            except ValueError:
                raise InstanceFormatError(f"row {row_no}: non-numeric cell") from None
            for g, v in enumerate(values[:n_groups]):
                if v < 0:
                    raise InstanceFormatError(
                        f"row {row_no}, column count_group_{g + 1}: negative count {v!r}"
                    )
            counts_rows.append(values[:n_groups])
            if has_weights:
                weights.append(values[-1])
        else:
            if len(cells) != 1 + len(levels):
                raise InstanceFormatError(
                    f"reward row {row_no}: expected {1 + len(levels)} cells"
                )
            if cells[0] != str(row_no):
                raise InstanceFormatError(
                    f"reward row {row_no}: expected location_id {row_no}, got {cells[0]!r}"
                )
            try:
                reward_rows.append([float(c) for c in cells[1:]])
            except ValueError:
                raise InstanceFormatError(f"reward row {row_no}: non-numeric cell") from None

    if not counts_rows:
        raise InstanceFormatError("no location rows found")
    counts = np.array(counts_rows).T  # (groups, locations)
    totals = counts.sum(axis=1)
    for g, total in enumerate(totals):
        if total <= 0:
            raise InstanceFormatError(
                f"column count_group_{g + 1}: group total is {total!r}, cannot normalize"
            )

    try:
        instance = ProblemInstance.from_counts(
            counts,
            budget=budget,
            effort_levels=levels,
            lipschitz=lipschitz,
            lam=lam,
            horizon=horizon,
            group_weights=group_weights,
            reward_weights=np.array(weights) if has_weights else None,
            granularity=granularity,
        )
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None

    model = None
    if reward_rows:
        if len(reward_rows) != instance.n_locations:
            raise InstanceFormatError(
                f"reward section has {len(reward_rows)} rows, expected {instance.n_locations}"
            )
        mu = np.array(reward_rows)
        for i in range(mu.shape[0]):
            for j in range(mu.shape[1]):
                if not (-CURVE_TOL <= mu[i, j] <= 1 + CURVE_TOL):
                    raise InstanceFormatError(
                        f"reward row {i}, level {j}: value {mu[i, j]!r} outside [0, 1]"
                    )
                if j and mu[i, j] < mu[i, j - 1] - CURVE_TOL:
                    raise InstanceFormatError(
                        f"reward row {i}, level {j}: curve decreases"
                    )
        model = RewardModel(levels=levels, mu=mu)
        bad = reward_model_violations(model, lipschitz)
        if bad:
            raise InstanceFormatError(f"reward section: {bad[0]}")
    return instance, model
