"""Experiment driver: seeded policy runs, regret accounting, the Pareto
sweep over the trade-off weight, and the CSV artifacts downstream tools
consume.

Every stream (policy x lambda x seed) is an independent pure function of
its inputs, so streams may run sequentially or fan out across processes;
a single collector writes files in a fixed order either way, which keeps
output byte-identical across modes and invocations.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError
from .model import (
    EffortVector,
    ProblemInstance,
    gamma,
    group_benefit,
    kendall_tau,
    mu_at,
    prioritization_metric,
    rank_coefficients,
)
from .oracle import solve_dp
from .policies import POLICY_KINDS, make_policy
from .sim import RewardModel, generate_instance, load_instance, sample_observations

TIMESERIES_COLUMNS = ("policy", "lambda", "seed", "t", "reward", "prioritization", "objective", "regret")
PARETO_COLUMNS = ("policy", "lambda", "reward", "prioritization")
FINAL_COLUMNS = ("policy", "lambda", "seed", "regret_T", "kendall_tau")

#: Number of trailing rounds averaged into a Pareto point.
PARETO_WINDOW = 10


@dataclass(frozen=True)
class StreamKey:
    policy: str
    lam: float
    seed: int


@dataclass(frozen=True, eq=False)
class RunRecord:
    """One round of one stream, scored against the true reward model."""

    t: int
    beta: EffortVector
    reward: float
    prioritization: float
    objective: float
    regret: float


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs: instance source, policies, lambdas, horizon,
    seeds, smoothing half-life, and the output directory."""

    instance: dict
    policies: tuple[str, ...]
    lambdas: tuple[float, ...]
    horizon: int
    seeds: tuple[int, ...]
    half_life: float = 20.0
    out_dir: str = "out"

    def __post_init__(self):
        if not isinstance(self.instance, dict) or "source" not in self.instance:
            raise ConfigurationError("instance must be a mapping with a 'source' key")
        if self.instance["source"] not in ("generated", "file"):
            raise ConfigurationError("instance source must be 'generated' or 'file'")
        if self.instance["source"] == "file" and "path" not in self.instance:
            raise ConfigurationError("file instance source requires a 'path'")
        object.__setattr__(self, "policies", tuple(self.policies))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.policies:
            raise ConfigurationError("policy list must be nonempty")
        for name in self.policies:
            if name not in POLICY_KINDS:
                raise ConfigurationError(f"unknown policy {name!r}")
        if not self.lambdas:
            raise ConfigurationError("lambda list must be nonempty")
        if any(not (0.0 < v <= 1.0) for v in self.lambdas):
            raise ConfigurationError("every lambda must lie in (0, 1]")
        if not self.seeds:
            raise ConfigurationError("seed list must be nonempty")
        if int(self.horizon) < 1:
            raise ConfigurationError("horizon must be at least 1")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not float(self.half_life) > 0:
            raise ConfigurationError("half_life must be positive")
        object.__setattr__(self, "half_life", float(self.half_life))

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        missing = {"instance", "policies", "lambdas", "horizon", "seeds"} - set(raw)
        if missing:
            raise ConfigurationError(f"missing config keys: {sorted(missing)}")
        return cls(**raw)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(raw)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    instance: ProblemInstance
    model: RewardModel
    streams: tuple  # of (StreamKey, tuple[RunRecord, ...])


@dataclass(frozen=True)
class ParetoPoint:
    policy: str
    lam: float
    reward: float
    prioritization: float


def resolve_instance(config: ExperimentConfig) -> tuple[ProblemInstance, RewardModel]:
    src = config.instance
    if src["source"] == "generated":
        known = {"scenario", "locations", "groups", "levels", "budget", "lipschitz", "seed"}
        unknown = set(src) - known - {"source"}
        if unknown:
            raise ConfigurationError(f"unknown generated-instance keys: {sorted(unknown)}")
        return generate_instance(
            n_locations=int(src.get("locations", 25)),
            n_groups=int(src.get("groups", 4)),
            n_levels=int(src.get("levels", 4)),
            budget=src.get("budget"),
            lipschitz=float(src.get("lipschitz", 0.25)),
            seed=int(src.get("seed", 0)),
            scenario=src.get("scenario", "uniform"),
            horizon=config.horizon,
        )
    try:
        instance, model = load_instance(src["path"])
    except OSError as exc:
        raise ConfigurationError(f"cannot read instance file: {exc}") from None
    if model is None:
        raise ConfigurationError(
            f"instance file {src['path']} has no reward section; simulation needs the true model"
        )
    return instance, model


def _run_stream(args) -> tuple[StreamKey, tuple[RunRecord, ...]]:
    instance, model, kind, seed, horizon, opt_value, gamma0 = args
    rng = np.random.default_rng(seed)
    policy = make_policy(
        kind, instance, rng, true_model=model if kind == "Optimal" else None
    )
    mu = model.mu
    lam = instance.lam
    weights = instance.reward_weights
    records = []
    for t in range(1, horizon + 1):
        beta = policy.select_action()
        observations = sample_observations(model, beta, rng)
        policy.update(beta, observations)
        m = mu_at(beta, mu, instance)
        reward = float(weights @ m)
        prioritization = prioritization_metric(beta, mu, instance)
        objective = lam * reward + (1.0 - lam) * prioritization
        regret = opt_value - float(m @ gamma0)
        records.append(RunRecord(t, beta, reward, prioritization, objective, regret))
    return StreamKey(kind, lam, seed), tuple(records)


def run(config: ExperimentConfig, max_workers: int | None = None) -> ExperimentResult:
    """Run every (policy, lambda, seed) stream of the experiment.

    The hindsight-best action is computed once per lambda from the true
    model; per-round regret is measured against its terminal-coefficient
    value.  With ``max_workers`` > 1 streams execute in a process pool;
    results are collected in the same fixed order either way.
    """
    instance, model = resolve_instance(config)
    by_lambda = {}
    for lam in config.lambdas:
        inst_l = replace(instance, lam=lam)
        gamma0 = gamma(inst_l, rank_coefficients(inst_l), 0.0)
        best = solve_dp(
            gamma0[:, None] * model.mu, inst_l.budget, inst_l.effort_levels, inst_l.granularity
        )
        # Evaluate the optimum with the same expression used per round so
        # the Optimal stream's regret is exactly zero.
        m_best = model.mu[np.arange(inst_l.n_locations), best.level_indices]
        by_lambda[lam] = (inst_l, float(m_best @ gamma0), gamma0)

    tasks = []
    for kind in config.policies:
        for lam in config.lambdas:
            inst_l, opt_value, gamma0 = by_lambda[lam]
            for seed in config.seeds:
                tasks.append((inst_l, model, kind, seed, config.horizon, opt_value, gamma0))

    if max_workers is not None and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            streams = tuple(pool.map(_run_stream, tasks))
    else:
        streams = tuple(_run_stream(task) for task in tasks)
    return ExperimentResult(instance, model, streams)


def pareto_sweep(config: ExperimentConfig, max_workers: int | None = None) -> list[ParetoPoint]:
    """One (reward, prioritization) point per policy and lambda.

    Each point averages the final ``PARETO_WINDOW`` rounds of every seed's
    stream, evaluated on the true model.
    """
    result = run(config, max_workers=max_workers)
    window = min(PARETO_WINDOW, config.horizon)
    grouped: dict[tuple[str, float], list[tuple[float, float]]] = {}
    for key, records in result.streams:
        tail = records[-window:]
        grouped.setdefault((key.policy, key.lam), []).append(
            (
                float(np.mean([r.reward for r in tail])),
                float(np.mean([r.prioritization for r in tail])),
            )
        )
    points = []
    for kind in config.policies:
        for lam in config.lambdas:
            samples = grouped[(kind, lam)]
            points.append(
                ParetoPoint(
                    kind,
                    lam,
                    float(np.mean([s[0] for s in samples])),
                    float(np.mean([s[1] for s in samples])),
                )
            )
    return points


def smooth(series, half_life: float) -> np.ndarray:
    """Exponential moving average with the given half-life (in samples).

    A constant series is a fixed point, and the output approaches the input
    as the half-life shrinks to zero.
    """
    if not half_life > 0:
        raise ValueError("half_life must be positive")
    x = np.asarray(series, dtype=float)
    alpha = 1.0 - 2.0 ** (-1.0 / half_life)
    out = np.empty_like(x)
    if len(x) == 0:
        return out
    out[0] = x[0]
    for i in range(1, len(x)):
        out[i] = out[i - 1] + alpha * (x[i] - out[i - 1])
    return out


def average_regret(records) -> float:
    """Per-round average regret of one stream (the quantity that must decay)."""
    return float(np.mean([r.regret for r in records]))


def coverage_violation_rate(
    instance: ProblemInstance,
    model: RewardModel,
    t_snapshot: int,
    replications: int,
    seed: int = 0,
) -> float:
    """Fraction of replications where some arm's weighted mean estimate
    falls outside its confidence radius at round ``t_snapshot``.

    Arms are pulled on a fixed round-robin level schedule (every location
    plays level (t-1) mod J each round), which fixes the pull counts and
    lets each replication draw the binomial observation totals directly.
    The radius uses the terminal coefficient vector.
    """
    n_levels = instance.n_levels
    if t_snapshot < max(2, n_levels):
        raise ValueError("t_snapshot must cover at least one full level cycle")
    gamma0 = gamma(instance, rank_coefficients(instance), 0.0)
    mu = model.mu
    pulls = np.array(
        [(t_snapshot - 1 - j) // n_levels + 1 for j in range(n_levels)], dtype=np.int64
    )
    radius = np.sqrt(3.0 * gamma0[:, None] ** 2 * np.log(t_snapshot) / (2.0 * pulls[None, :]))
    weighted_truth = gamma0[:, None] * mu

    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(replications):
        totals = rng.binomial(pulls[None, :], mu)
        estimate = gamma0[:, None] * (totals / pulls[None, :])
        if np.any(np.abs(estimate - weighted_truth) > radius):
            violations += 1
    return violations / replications


def _format(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_timeseries(result: ExperimentResult, path) -> None:
    """Raw per-round rows for every stream, in fixed stream order."""
    lines = [",".join(TIMESERIES_COLUMNS)]
    for key, records in result.streams:
        for r in records:
            lines.append(
                ",".join(
                    (
                        key.policy,
                        repr(key.lam),
                        str(key.seed),
                        str(r.t),
                        repr(r.reward),
                        repr(r.prioritization),
                        repr(r.objective),
                        repr(r.regret),
                    )
                )
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_final(result: ExperimentResult, path) -> None:
    """Per-stream summary: average regret and the Kendall tau of the final
    action's group benefits."""
    lines = [",".join(FINAL_COLUMNS)]
    for key, records in result.streams:
        tau = kendall_tau(group_benefit(records[-1].beta, result.model.mu, result.instance))
        lines.append(
            ",".join(
                (
                    key.policy,
                    repr(key.lam),
                    str(key.seed),
                    repr(average_regret(records)),
                    repr(tau),
                )
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_pareto(points, path) -> None:
    lines = [",".join(PARETO_COLUMNS)]
    for p in points:
        lines.append(",".join((p.policy, repr(p.lam), repr(p.reward), repr(p.prioritization))))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
