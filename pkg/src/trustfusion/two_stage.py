"""Two-stage decision pipeline with minimax threshold selection.

Stage one classifies each robot as trusted or not from its trust score via a
likelihood ratio threshold (with a randomized tie-break). Stage two fuses the
measurements of trusted robots with the standard weighted log-likelihood rule.
The thresholds are chosen offline to minimize the exact worst-case error
probability against an adversary that makes every trusted malicious robot
report the wrong bit, which is the error-maximizing strategy whenever the
legitimate sensors are better than coin flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .models import (
    DecisionOutcome,
    LegitimateSensorModel,
    Trial,
    TrustModel,
    ValidationError,
    ratio_set,
)
from .stats import binom_cdf, binom_pmf

__all__ = [
    "TwoStageConfig",
    "ThresholdChoice",
    "fusion_weights",
    "trust_probabilities",
    "accepts_h1",
    "fusion_statistic",
    "decide_hypothesis",
    "conditional_fa",
    "conditional_md",
    "worst_case_malicious_count",
    "worst_case_error",
    "worst_case_error_by_counts",
    "tie_break_grid",
    "optimize_thresholds",
    "classify_trust",
    "run_two_stage",
]


@dataclass(frozen=True)
class TwoStageConfig:
    """Offline parameters of the two-stage pipeline.

    ``m_bar`` is the assumed upper bound on the malicious proportion,
    ``delta_p`` the step of the tie-break probability grid, and ``gamma_ts``
    the fusion threshold (log prior ratio).
    """

    m_bar: float
    delta_p: float
    gamma_ts: float

    def __post_init__(self) -> None:
        # m_bar == 1 is allowed so sweeps can hand the pipeline an
        # all-malicious proportion bound; every formula stays valid there.
        if not 0.0 <= self.m_bar <= 1.0:
            raise ValidationError(f"m_bar={self.m_bar!r} outside [0, 1]")
        if not 0.0 < self.delta_p <= 1.0:
            raise ValidationError(f"delta_p={self.delta_p!r} outside (0, 1]")


@dataclass(frozen=True)
class ThresholdChoice:
    """Optimizer output: trust threshold, tie probability, achieved bound."""

    gamma_t: float
    p_t: float
    worst_case_pe: float


def fusion_weights(sensors: LegitimateSensorModel) -> tuple:
    """Log-likelihood weights (w1, w0) of a positive / negative report.

    Both are strictly positive because the sensor error rates are below 0.5.
    """
    w1 = math.log((1.0 - sensors.p_md_l) / sensors.p_fa_l)
    w0 = math.log((1.0 - sensors.p_fa_l) / sensors.p_md_l)
    return w1, w0


def trust_probabilities(model: TrustModel, gamma_t: float, p_t: float) -> tuple:
    """Probability of trusting a legitimate / malicious robot.

    A robot is trusted when its score's likelihood ratio strictly exceeds
    ``gamma_t``, and with probability ``p_t`` when it ties. Ties are decided
    by comparing the cached per-symbol ratios, so a threshold taken from
    ``ratio_set`` matches exactly.
    """
    p_trust_l = 0.0
    p_trust_m = 0.0
    for ratio, ql, qm in zip(model.ratios, model.pmf_legit, model.pmf_malicious):
        if ratio > gamma_t:
            p_trust_l += ql
            p_trust_m += qm
        elif ratio == gamma_t:
            p_trust_l += p_t * ql
            p_trust_m += p_t * qm
    return p_trust_l, p_trust_m


def accepts_h1(ones: int, trusted: int, gamma_ts: float, w1: float, w0: float) -> bool:
    """Fusion predicate: does a trusted set with ``ones`` positive reports
    out of ``trusted`` members decide for the event hypothesis?

    The fused statistic ``ones*w1 - (trusted-ones)*w0`` is compared against
    ``gamma_ts`` in the rearranged form below. The rearrangement avoids the
    catastrophic +/- cancellation of the naive running sum, so ties (which
    carry real probability mass, e.g. equal counts under symmetric sensors
    and even priors) are detected exactly and identically everywhere this
    predicate is used.
    """
    return ones * (w0 + w1) >= gamma_ts + trusted * w0


def fusion_statistic(y, t_hat, sensors: LegitimateSensorModel) -> float:
    """Weighted sum of trusted reports (diagnostic value only)."""
    w1, w0 = fusion_weights(sensors)
    ones = sum(yi for yi, ti in zip(y, t_hat) if ti == 1)
    trusted = sum(t_hat)
    return ones * (w0 + w1) - trusted * w0


def decide_hypothesis(y, t_hat, sensors: LegitimateSensorModel, gamma_ts: float) -> int:
    """Standard fused decision over the robots marked trusted in ``t_hat``."""
    w1, w0 = fusion_weights(sensors)
    ones = 0
    trusted = 0
    for yi, ti in zip(y, t_hat):
        if ti == 1:
            trusted += 1
            ones += yi
    return 1 if accepts_h1(ones, trusted, gamma_ts, w1, w0) else 0


def _min_accepting_ones(k_l: int, k_m_ones: int, trusted: int,
                        gamma_ts: float, w1: float, w0: float) -> int:
    """Smallest count of positive legitimate reports that triggers the event
    decision, given ``k_m_ones`` positive reports already fixed among the
    trusted malicious robots. Returns ``k_l + 1`` when no count does.

    Scanning the actual decision predicate (instead of inverting it with a
    ceiling) keeps the closed-form error and the simulated decisions in exact
    agreement at integer boundary cases.
    """
    for s in range(k_l + 1):
        if accepts_h1(s + k_m_ones, trusted, gamma_ts, w1, w0):
            return s
    return k_l + 1


def conditional_fa(k_l: int, k_m: int, gamma_ts: float,
                   sensors: LegitimateSensorModel, w1: float, w0: float) -> float:
    """False-alarm probability given the trusted-robot composition.

    Under the worst-case attack every trusted malicious robot reports 1 when
    the event is absent, so the decision hinges on the number of legitimate
    false alarms among the ``k_l`` trusted legitimate robots.
    """
    c = _min_accepting_ones(k_l, k_m, k_l + k_m, gamma_ts, w1, w0)
    if c == 0:
        return 1.0
    if c > k_l:
        return 0.0
    return 1.0 - binom_cdf(c - 1, sensors.p_fa_l, k_l)


def conditional_md(k_l: int, k_m: int, gamma_ts: float,
                   sensors: LegitimateSensorModel, w1: float, w0: float) -> float:
    """Missed-detection probability given the trusted-robot composition.

    Under the worst-case attack every trusted malicious robot reports 0 when
    the event is present; a miss occurs when the positive reports of the
    trusted legitimate robots stay below the accepting count.
    """
    c = _min_accepting_ones(k_l, 0, k_l + k_m, gamma_ts, w1, w0)
    if c == 0:
        return 0.0
    if c > k_l:
        return 1.0
    return binom_cdf(c - 1, 1.0 - sensors.p_md_l, k_l)


def worst_case_malicious_count(m_bar: float, n: int) -> int:
    """Malicious count implied by the proportion bound, rounded up.

    Rounding up preserves the worst-case guarantee when ``m_bar * n`` is not
    integral; the small epsilon keeps counts that are integral up to float
    noise (e.g. ``(1/3)*3``) from being bumped to the next integer.
    """
    return max(0, math.ceil(m_bar * n - 1e-9))


def worst_case_error_by_counts(model: TrustModel, sensors: LegitimateSensorModel,
                               gamma_ts: float, prior_h0: float, prior_h1: float,
                               n_legit: int, n_malicious: int,
                               gamma_t: float, p_t: float) -> float:
    """Exact error probability under the worst-case attack for fixed counts.

    Marginalizes over how many legitimate and malicious robots pass the
    trust stage (both binomial), with every trusted malicious robot
    reporting the wrong bit deterministically.
    """
    w1, w0 = fusion_weights(sensors)
    p_trust_l, p_trust_m = trust_probabilities(model, gamma_t, p_t)
    p_fa_total = 0.0
    p_md_total = 0.0
    for k_m in range(n_malicious + 1):
        weight_m = binom_pmf(k_m, p_trust_m, n_malicious)
        if weight_m == 0.0:
            continue
        for k_l in range(n_legit + 1):
            weight = weight_m * binom_pmf(k_l, p_trust_l, n_legit)
            if weight == 0.0:
                continue
            p_fa_total += weight * conditional_fa(k_l, k_m, gamma_ts, sensors, w1, w0)
            p_md_total += weight * conditional_md(k_l, k_m, gamma_ts, sensors, w1, w0)
    return prior_h0 * p_fa_total + prior_h1 * p_md_total


def worst_case_error(model: TrustModel, sensors: LegitimateSensorModel,
                     config: TwoStageConfig, n: int,
                     gamma_t: float, p_t: float,
                     prior_h0: float, prior_h1: float) -> float:
    """Worst-case error of the pipeline at the given thresholds."""
    n_malicious = worst_case_malicious_count(config.m_bar, n)
    return worst_case_error_by_counts(
        model, sensors, config.gamma_ts, prior_h0, prior_h1,
        n - n_malicious, n_malicious, gamma_t, p_t,
    )


def tie_break_grid(delta_p: float) -> list:
    """Grid {0, 1/m, 2/m, ..., 1} with step 1/m <= delta_p.

    Built from exact integer fractions rather than multiples of ``delta_p``
    so that refining the step yields a strict superset of every coarser grid
    (e.g. the 0.05 grid contains the 0.1 grid bit-for-bit), which makes the
    optimized error provably nonincreasing as the grid is refined.
    """
    m = max(1, math.ceil(1.0 / delta_p - 1e-9))
    return [i / m for i in range(m + 1)]


@lru_cache(maxsize=128)
def optimize_thresholds(model: TrustModel, sensors: LegitimateSensorModel,
                        config: TwoStageConfig, n: int,
                        prior_h0: float, prior_h1: float) -> ThresholdChoice:
    """Exhaustive minimax scan over the finite threshold grid.

    The trust threshold only needs to range over the per-symbol likelihood
    ratios; the tie probability ranges over the ``delta_p`` grid. Ties in
    the objective break toward the smaller threshold, then the smaller tie
    probability, so results are reproducible.
    """
    best: ThresholdChoice | None = None
    grid = tie_break_grid(config.delta_p)
    for gamma_t in ratio_set(model):
        for p_t in grid:
            pe = worst_case_error(model, sensors, config, n, gamma_t, p_t,
                                  prior_h0, prior_h1)
            if best is None or pe < best.worst_case_pe:
                best = ThresholdChoice(gamma_t=gamma_t, p_t=p_t, worst_case_pe=pe)
    assert best is not None
    return best


def classify_trust(model: TrustModel, gamma_t: float, p_t: float, a, rng) -> tuple:
    """Per-robot trust decisions from the score vector.

    Strictly above the threshold trusts, strictly below distrusts, and an
    exact tie trusts with probability ``p_t`` using ``rng`` (random draws are
    consumed only at ties).
    """
    t_hat = []
    for a_i in a:
        ratio = model.ratios[model.symbol_index(a_i)]
        if ratio > gamma_t:
            t_hat.append(1)
        elif ratio == gamma_t:
            t_hat.append(1 if rng.random() < p_t else 0)
        else:
            t_hat.append(0)
    return tuple(t_hat)


def run_two_stage(trial: Trial, thresholds: ThresholdChoice, model: TrustModel,
                  sensors: LegitimateSensorModel, gamma_ts: float, rng) -> DecisionOutcome:
    """Classify trust from the scores, then fuse the trusted measurements."""
    t_hat = classify_trust(model, thresholds.gamma_t, thresholds.p_t, trial.a, rng)
    hypothesis = decide_hypothesis(trial.y, t_hat, sensors, gamma_ts)
    return DecisionOutcome(
        hypothesis=hypothesis,
        t_hat=t_hat,
        diagnostics={
            "s_n": fusion_statistic(trial.y, t_hat, sensors),
            "trusted": float(sum(t_hat)),
        },
    )
