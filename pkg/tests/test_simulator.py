"""Trial generation statistics, stream pairing, reproducibility, sweeps."""

import math

import numpy as np
import pytest

from trustfusion.models import (
    LegitimateSensorModel,
    MaliciousStrategy,
    Scenario,
    TrustModel,
    ValidationError,
    effective_malicious_probs,
)
from trustfusion.simulator import (
    ExperimentConfig,
    parse_method,
    place_malicious,
    run_experiment,
    sample_trial,
    substream,
    sweep_malicious_fraction,
)
from trustfusion.two_stage import TwoStageConfig

TRUST = TrustModel(alphabet=(0, 1), pmf_legit=(0.2, 0.8), pmf_malicious=(0.8, 0.2))


def make_scenario(truth, p_f=0.99, raw=0.0, prior_h1=0.5):
    return Scenario(
        n=len(truth), truth=tuple(truth), prior_h0=1 - prior_h1, prior_h1=prior_h1,
        sensors=LegitimateSensorModel(0.15, 0.15),
        attack=MaliciousStrategy(raw, raw, p_f),
        trust=TRUST,
    )


def make_config(scenario, methods=("oracle",), trials=100, seed=7, sweep=None,
                m_bar=0.0):
    return ExperimentConfig(
        scenario=scenario,
        two_stage=TwoStageConfig(m_bar=m_bar, delta_p=0.05,
                                 gamma_ts=scenario.gamma_ts),
        trials=trials, seed=seed, methods=tuple(methods), sweep=sweep,
    )


class TestSampleTrial:
    def test_lengths_and_types(self):
        scenario = make_scenario((1, 0, 1))
        trial = sample_trial(scenario, substream(1, 0))
        assert trial.n == 3
        assert trial.truth == scenario.truth
        assert all(b in (0, 1) for b in trial.y)
        assert all(s in TRUST.alphabet for s in trial.a)

    def test_flipless_malicious_matches_legit_statistics(self):
        # raw rates equal to the legitimate ones and no flipping: measurement
        # marginals must coincide within binomial noise
        scenario = make_scenario((1, 0), p_f=0.0, raw=0.15)
        rng = substream(2, 0)
        draws = 100_000
        ones = np.zeros(2)
        h1 = 0
        for _ in range(draws):
            trial = sample_trial(scenario, rng)
            if trial.xi == 1:
                h1 += 1
                ones += trial.y
        for robot in range(2):
            rate = ones[robot] / h1
            sigma = math.sqrt(0.85 * 0.15 / h1)
            assert abs(rate - 0.85) <= 3 * sigma

    def test_malicious_marginal_matches_effective_probs(self):
        scenario = make_scenario((1, 0), p_f=0.8, raw=0.1)
        p_fa_m, p_md_m = effective_malicious_probs(scenario.attack)
        rng = substream(3, 0)
        draws = 100_000
        count = {0: [0, 0], 1: [0, 0]}  # xi -> [n_trials, ones of robot 1]
        for _ in range(draws):
            trial = sample_trial(scenario, rng)
            count[trial.xi][0] += 1
            count[trial.xi][1] += trial.y[1]
        rate_fa = count[0][1] / count[0][0]
        sigma = math.sqrt(p_fa_m * (1 - p_fa_m) / count[0][0])
        assert abs(rate_fa - p_fa_m) <= 3 * sigma
        rate_one_h1 = count[1][1] / count[1][0]
        sigma = math.sqrt(p_md_m * (1 - p_md_m) / count[1][0])
        assert abs((1 - rate_one_h1) - p_md_m) <= 3 * sigma

    def test_score_marginals_match_pmf(self):
        scenario = make_scenario((1, 0))
        rng = substream(4, 0)
        draws = 100_000
        ones = np.zeros(2)
        for _ in range(draws):
            trial = sample_trial(scenario, rng)
            ones += trial.a
        for robot, expected in ((0, 0.8), (1, 0.2)):
            sigma = math.sqrt(expected * (1 - expected) / draws)
            assert abs(ones[robot] / draws - expected) <= 3 * sigma

    def test_scores_independent_of_measurements(self):
        scenario = make_scenario((1, 1))
        rng = substream(5, 0)
        draws = 100_000
        ys, scores = [], []
        for _ in range(draws):
            trial = sample_trial(scenario, rng)
            ys.append(trial.y[0])
            scores.append(trial.a[0])
        corr = np.corrcoef(ys, scores)[0, 1]
        assert abs(corr) <= 3 / math.sqrt(draws)


class TestRunExperiment:
    def test_oracle_equals_oblivious_without_malicious(self):
        scenario = make_scenario((1,) * 5)
        result = run_experiment(make_config(scenario, ("oracle", "oblivious"),
                                            trials=500))
        assert result.stats["oracle"] == result.stats["oblivious"]

    def test_counting_identity(self):
        scenario = make_scenario((1, 1, 0, 0, 1))
        result = run_experiment(make_config(scenario, ("2sa", "aglrt", "oracle"),
                                            trials=400, m_bar=0.4))
        for stats in result.stats.values():
            assert stats.errors == stats.fa_count + stats.md_count
            assert stats.n_h0 + stats.n_h1 == stats.trials
            weighted = (stats.fa_rate * stats.n_h0 + stats.md_rate * stats.n_h1)
            assert weighted == pytest.approx(stats.errors)

    def test_seed_reproducibility(self):
        scenario = make_scenario((1, 0, 1))
        config = make_config(scenario, ("2sa", "oracle"), trials=300, m_bar=0.4)
        a = run_experiment(config)
        b = run_experiment(config)
        assert a.stream_digest == b.stream_digest
        assert a.stats == b.stats

    def test_method_subsets_share_the_stream(self):
        scenario = make_scenario((1, 0, 1))
        full = run_experiment(make_config(scenario, ("oracle", "oblivious"),
                                          trials=200))
        only = run_experiment(make_config(scenario, ("oblivious",), trials=200))
        assert full.stream_digest == only.stream_digest
        assert full.stats["oblivious"] == only.stats["oblivious"]

    def test_different_points_use_different_streams(self):
        scenario = make_scenario((1, 0, 1))
        config = make_config(scenario, ("oracle",), trials=50)
        assert (run_experiment(config, point_index=0).stream_digest
                != run_experiment(config, point_index=1).stream_digest)

    def test_unknown_method_rejected(self):
        scenario = make_scenario((1, 0))
        with pytest.raises(ValidationError):
            make_config(scenario, ("magic",))


class TestMethodParsing:
    def test_known_names(self):
        assert parse_method("2sa") == ("2sa", None)
        assert parse_method("baseline1") == ("baseline", (1, 0.5))
        assert parse_method("baseline5") == ("baseline", (5, 2.5))

    def test_generic_baseline(self):
        assert parse_method("baseline(3,1.5)") == ("baseline", (3, 1.5))

    def test_rejects_unknown(self):
        with pytest.raises(ValidationError):
            parse_method("baseline(x)")


class TestPlacement:
    def test_count_and_determinism(self):
        scenario = make_scenario((1,) * 10)
        placed = place_malicious(scenario, 4, seed=3)
        assert placed.n_malicious == 4
        assert placed == place_malicious(scenario, 4, seed=3)

    def test_different_seed_different_layout(self):
        scenario = make_scenario((1,) * 10)
        layouts = {place_malicious(scenario, 4, seed=s).truth for s in range(8)}
        assert len(layouts) > 1

    def test_count_bounds(self):
        scenario = make_scenario((1,) * 4)
        with pytest.raises(ValidationError):
            place_malicious(scenario, 5, seed=0)


class TestSweep:
    def test_fraction_grid(self):
        scenario = make_scenario((1,) * 6)
        config = make_config(scenario, ("oracle", "oblivious"), trials=60,
                             sweep=(0.0, 0.5, 1.0))
        results = sweep_malicious_fraction(config)
        assert [r.malicious_fraction for r in results] == [0.0, 0.5, 1.0]

    def test_fraction_zero_and_one_truths(self):
        scenario = make_scenario((1,) * 6)
        config = make_config(scenario, ("oracle",), trials=10, sweep=(0.0, 1.0))
        results = sweep_malicious_fraction(config)
        assert results[0].malicious_fraction == 0.0
        assert results[1].malicious_fraction == 1.0

    def test_resilient_methods_dominate_at_malicious_majority(self):
        scenario = make_scenario((1,) * 10)
        config = make_config(scenario,
                             ("2sa", "aglrt", "oblivious", "baseline5"),
                             trials=300, seed=11, sweep=(0.6, 0.8))
        for result in sweep_malicious_fraction(config):
            resilient = max(result.stats["2sa"].error_rate,
                            result.stats["aglrt"].error_rate)
            fragile = min(result.stats["oblivious"].error_rate,
                          result.stats["baseline5"].error_rate)
            assert resilient < fragile

    def test_sweep_requires_fractions(self):
        scenario = make_scenario((1,) * 4)
        with pytest.raises(ValidationError):
            sweep_malicious_fraction(make_config(scenario, ("oracle",), trials=5))
