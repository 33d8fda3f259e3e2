"""Trial generation and experiment execution.

One root seed is split into named, independent substreams (trial generation,
trust tie-breaking, malicious-index placement), so every method sees exactly
the same trial stream and adding or removing a method never perturbs the
data. Experiments are therefore paired comparisons and byte-reproducible for
a fixed seed.
"""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .aglrt import aglrt_decide
from .baselines import ReputationState, oblivious_decide, oracle_decide, reputation_decide
from .models import DecisionOutcome, Scenario, Trial, ValidationError
from .two_stage import (
    TwoStageConfig,
    optimize_thresholds,
    run_two_stage,
    worst_case_malicious_count,
)

__all__ = [
    "ExperimentConfig",
    "MethodStats",
    "ExperimentResult",
    "KNOWN_METHODS",
    "parse_method",
    "substream",
    "place_malicious",
    "sample_trial",
    "run_experiment",
    "sweep_malicious_fraction",
]

# Spawn-key tags of the named substreams hanging off the root seed.
_STREAM_TRIALS = 0
_STREAM_TIES = 1
_STREAM_PLACEMENT = 2

_BASELINE_ALIASES = {"baseline1": (1, 0.5), "baseline5": (5, 2.5)}
_BASELINE_PATTERN = re.compile(r"^baseline\((\d+),([0-9.]+)\)$")

KNOWN_METHODS = ("2sa", "aglrt", "oracle", "oblivious", "baseline1", "baseline5")


def parse_method(name: str) -> tuple:
    """Resolve a method name to ``(kind, params)``.

    Accepts the fixed names plus ``baseline(T,eta)`` for arbitrary
    reputation parameters.
    """
    if name in ("2sa", "aglrt", "oracle", "oblivious"):
        return name, None
    if name in _BASELINE_ALIASES:
        return "baseline", _BASELINE_ALIASES[name]
    match = _BASELINE_PATTERN.match(name)
    if match:
        return "baseline", (int(match.group(1)), float(match.group(2)))
    raise ValidationError(
        f"unknown method {name!r}; expected one of {KNOWN_METHODS} or 'baseline(T,eta)'"
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one experiment or sweep."""

    scenario: Scenario
    two_stage: TwoStageConfig
    trials: int
    seed: int
    methods: tuple
    sweep: Optional[tuple] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValidationError(f"trial count {self.trials!r} must be >= 1")
        if self.seed < 0:
            raise ValidationError(f"seed {self.seed!r} must be nonnegative")
        if not self.methods:
            raise ValidationError("no methods selected")
        for name in self.methods:
            parse_method(name)
        if self.sweep is not None:
            if len(self.sweep) == 0:
                raise ValidationError("sweep list is empty")
            if any(not 0.0 <= f <= 1.0 for f in self.sweep):
                raise ValidationError("sweep fractions must lie in [0, 1]")


@dataclass(frozen=True)
class MethodStats:
    """Aggregated per-method counts and rates for one experiment.

    Wall-clock latency is informational and excluded from equality: two runs
    with the same seed produce identical counts but not identical timings.
    """

    trials: int
    n_h0: int
    n_h1: int
    errors: int
    fa_count: int
    md_count: int
    mean_latency_s: float = field(compare=False)

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials

    @property
    def fa_rate(self) -> float:
        return self.fa_count / self.n_h0 if self.n_h0 else float("nan")

    @property
    def md_rate(self) -> float:
        return self.md_count / self.n_h1 if self.n_h1 else float("nan")


@dataclass(frozen=True)
class ExperimentResult:
    """Per-method statistics for one sweep point (or standalone run)."""

    malicious_fraction: float
    seed: int
    trials: int
    stats: dict
    stream_digest: str


def substream(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one named purpose under the root seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(stream, index)))


def sample_trial(scenario: Scenario, rng: np.random.Generator) -> Trial:
    """Draw one trial: event bit, reported measurements, trust scores.

    Malicious robots measure with their raw error rates and then invert the
    bit with the flip probability; trust scores are drawn from the pmf of
    the robot's true type, independent of everything else. The number of
    uniforms consumed per trial is fixed, so streams stay aligned whatever
    the truth vector contains.
    """
    n = scenario.n
    u_xi = rng.random()
    u_raw = rng.random(n)
    u_flip = rng.random(n)
    u_score = rng.random(n)
    xi = 1 if u_xi < scenario.prior_h1 else 0
    sensors = scenario.sensors
    attack = scenario.attack
    wrong_legit = sensors.p_fa_l if xi == 0 else sensors.p_md_l
    wrong_raw = attack.p_fa_m_raw if xi == 0 else attack.p_md_m_raw
    y = []
    for i, t_i in enumerate(scenario.truth):
        if t_i == 1:
            wrong = u_raw[i] < wrong_legit
        else:
            wrong = (u_raw[i] < wrong_raw) != (u_flip[i] < attack.p_f)
        y.append(xi ^ int(wrong))
    trust = scenario.trust
    a = []
    for i, t_i in enumerate(scenario.truth):
        pmf = trust.pmf_legit if t_i == 1 else trust.pmf_malicious
        u = u_score[i]
        acc = 0.0
        chosen = trust.alphabet[-1]
        for sym, q in zip(trust.alphabet, pmf):
            acc += q
            if u < acc:
                chosen = sym
                break
        a.append(chosen)
    return Trial(xi=xi, y=tuple(y), a=tuple(a), truth=tuple(scenario.truth))


def _stream_digest(trials) -> str:
    h = hashlib.sha256()
    for trial in trials:
        h.update(repr((trial.xi, trial.y, trial.a)).encode())
    return h.hexdigest()


def _make_decider(name: str, config: ExperimentConfig,
                  point_index: int) -> Callable[[Trial], DecisionOutcome]:
    """Build the per-trial decision callable for one method.

    Stateful methods (reputation, the two-stage tie-break stream) close over
    their own state; the trial stream itself is never touched.
    """
    scenario = config.scenario
    gamma_ts = scenario.gamma_ts
    kind, params = parse_method(name)
    if kind == "2sa":
        thresholds = optimize_thresholds(
            scenario.trust, scenario.sensors, config.two_stage, scenario.n,
            scenario.prior_h0, scenario.prior_h1,
        )
        tie_rng = substream(config.seed, _STREAM_TIES, point_index)

        def decide(trial: Trial) -> DecisionOutcome:
            return run_two_stage(trial, thresholds, scenario.trust,
                                 scenario.sensors, gamma_ts, tie_rng)

        return decide
    if kind == "aglrt":
        return lambda trial: aglrt_decide(trial, scenario.trust, scenario.sensors,
                                          scenario.prior_h0, scenario.prior_h1)
    if kind == "oracle":
        return lambda trial: oracle_decide(trial, scenario.sensors, gamma_ts)
    if kind == "oblivious":
        return lambda trial: oblivious_decide(trial, scenario.sensors, gamma_ts)
    if kind == "baseline":
        window, threshold = params
        state = ReputationState.initial(scenario.n, window, threshold)

        def decide_baseline(trial: Trial) -> DecisionOutcome:
            nonlocal state
            outcome, state = reputation_decide(trial, state, scenario.sensors,
                                               gamma_ts)
            return outcome

        return decide_baseline
    raise AssertionError(f"unhandled method kind {kind!r}")


def run_experiment(config: ExperimentConfig, point_index: int = 0) -> ExperimentResult:
    """Run every configured method over one shared trial stream.

    The stream is generated once and fed to all methods (paired
    comparison); per-method wall time is averaged into the result. The
    two-stage thresholds are optimized once, before the stream starts.
    """
    scenario = config.scenario
    rng = substream(config.seed, _STREAM_TRIALS, point_index)
    trials = [sample_trial(scenario, rng) for _ in range(config.trials)]
    n_h1 = sum(t.xi for t in trials)
    n_h0 = config.trials - n_h1
    stats = {}
    for name in config.methods:
        decide = _make_decider(name, config, point_index)
        errors = fa_count = md_count = 0
        start = time.perf_counter()
        for trial in trials:
            outcome = decide(trial)
            if outcome.hypothesis != trial.xi:
                errors += 1
                if trial.xi == 0:
                    fa_count += 1
                else:
                    md_count += 1
        elapsed = time.perf_counter() - start
        stats[name] = MethodStats(
            trials=config.trials, n_h0=n_h0, n_h1=n_h1, errors=errors,
            fa_count=fa_count, md_count=md_count,
            mean_latency_s=elapsed / config.trials,
        )
    return ExperimentResult(
        malicious_fraction=scenario.malicious_fraction,
        seed=config.seed,
        trials=config.trials,
        stats=stats,
        stream_digest=_stream_digest(trials),
    )


def place_malicious(scenario: Scenario, count: int, seed: int,
                    index: int = 0) -> Scenario:
    """Scenario with ``count`` malicious robots at seeded-shuffled indices.

    Decision rules are exchangeable across robot indices, so shuffling the
    placement guards against accidental position dependence without
    affecting statistics.
    """
    if not 0 <= count <= scenario.n:
        raise ValidationError(f"malicious count {count!r} outside 0..{scenario.n}")
    rng = substream(seed, _STREAM_PLACEMENT, index)
    order = rng.permutation(scenario.n)
    truth = [1] * scenario.n
    for i in order[:count]:
        truth[i] = 0
    return replace(scenario, truth=tuple(truth))


def _scenario_at_fraction(config: ExperimentConfig, fraction: float,
                          point_index: int) -> Scenario:
    n_mal = worst_case_malicious_count(fraction, config.scenario.n)
    return place_malicious(config.scenario, n_mal, config.seed, point_index)


def sweep_malicious_fraction(config: ExperimentConfig) -> list:
    """Run one experiment per configured malicious fraction.

    Each point rebuilds the truth vector for its fraction and hands the
    two-stage optimizer that same fraction as its proportion bound.
    """
    if config.sweep is None:
        raise ValidationError("config has no sweep fractions")
    results = []
    for j, fraction in enumerate(config.sweep):
        point_scenario = _scenario_at_fraction(config, fraction, j)
        point_config = replace(
            config,
            scenario=point_scenario,
            two_stage=replace(config.two_stage, m_bar=fraction),
            sweep=None,
        )
        result = run_experiment(point_config, point_index=j)
        results.append(replace(result, malicious_fraction=fraction))
    return results
