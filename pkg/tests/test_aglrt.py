"""GLRT decider: hand examples, brute-force agreement, structural properties."""

import math

import numpy as np
import pytest

from oracles import glrt_branch_max_by_enumeration
from trustfusion.aglrt import (
    BRUTE_FORCE_MAX_N,
    aglrt_decide,
    brute_force_glrt,
    candidate_set,
    inner_max,
    mle_adversary_param,
)
from trustfusion.models import LegitimateSensorModel, Trial, TrustModel, ValidationError
from trustfusion.selfcheck import oracle_equivalence, random_instance
from trustfusion.stats import log_pow

BINARY_TRUST = TrustModel(alphabet=(0, 1), pmf_legit=(0.2, 0.8),
                          pmf_malicious=(0.8, 0.2))
SENSORS_15 = LegitimateSensorModel(0.15, 0.15)


def make_trial(y, a):
    return Trial(xi=0, y=tuple(y), a=tuple(a), truth=(1,) * len(y))


class TestCandidateSet:
    def test_single_robot(self):
        assert candidate_set(1).values == (0.0, 1.0)

    def test_two_robots(self):
        assert candidate_set(2).values == (0.0, 0.5, 1.0)

    def test_contains_endpoints_sorted_dedup(self):
        values = candidate_set(12).values
        assert values[0] == 0.0 and values[-1] == 1.0
        assert list(values) == sorted(set(values))

    def test_size_bound(self):
        for n in (1, 2, 5, 10, 37):
            assert len(candidate_set(n)) <= n * n + 1

    def test_zero_robots_rejected(self):
        with pytest.raises(ValidationError):
            candidate_set(0)

    def test_reduced_fractions_deduplicate(self):
        # 1/2, 2/4, 3/6 ... collapse; the raw enumeration is much larger
        values = candidate_set(6).values
        assert values.count(0.5) == 1


class TestInnerMax:
    def test_single_robot_example(self):
        result = inner_max(0.0, (1,), (1,), 1, BINARY_TRUST, SENSORS_15)
        assert result.t_hat == (1,)
        assert result.log_likelihood == pytest.approx(math.log(0.8 * 0.85))

    def test_tie_labels_legitimate(self):
        # symbol 0 has identical mass under both types, and the rate is set
        # equal to the sensor's missed-detection rate, so both labels carry
        # exactly the same weight for a positive report
        model = TrustModel(alphabet=(0, 1, 2), pmf_legit=(0.5, 0.3, 0.2),
                           pmf_malicious=(0.5, 0.2, 0.3))
        sensors = LegitimateSensorModel(0.1, 0.25)
        result = inner_max(0.25, (1, 1), (0, 0), 1, model, sensors)
        assert result.t_hat == (1, 1)

    def test_dominates_every_fixed_labeling(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n = int(rng.integers(1, 7))
            trial, trust, sensors, _, _ = random_instance(rng, n)
            p_m = float(rng.choice(candidate_set(n).values))
            best = inner_max(p_m, trial.a, trial.y, 1, trust, sensors)
            for mask in range(1 << n):
                t = tuple((mask >> i) & 1 for i in range(n))
                value = _fixed_labeling_loglik(t, p_m, trial, trust, sensors, 1)
                assert best.log_likelihood >= value - 1e-9

    def test_rate_outside_unit_interval_rejected(self):
        with pytest.raises(ValidationError):
            inner_max(1.5, (1,), (1,), 1, BINARY_TRUST, SENSORS_15)


def _fixed_labeling_loglik(t, p_m, trial, trust, sensors, branch):
    total = 0.0
    for t_i, a_i, y_i in zip(t, trial.a, trial.y):
        j = trust.symbol_index(a_i)
        if t_i == 1:
            total += trust.log_pmf_legit[j]
            if branch == 1:
                total += math.log(1 - sensors.p_md_l if y_i == 1 else sensors.p_md_l)
            else:
                total += math.log(sensors.p_fa_l if y_i == 1 else 1 - sensors.p_fa_l)
        else:
            total += trust.log_pmf_malicious[j]
            wrong = y_i != branch
            total += log_pow(p_m, 1) if wrong else log_pow(1 - p_m, 1)
    return total


class TestMleAdversaryParam:
    def test_half_wrong(self):
        assert mle_adversary_param((0, 0, 1), (0, 1, 1), 1) == pytest.approx(0.5)

    def test_all_malicious_all_missed(self):
        assert mle_adversary_param((0, 0, 0), (0, 0, 0), 1) == 1.0

    def test_no_malicious_canonical_zero(self):
        assert mle_adversary_param((1, 1), (0, 1), 1) == 0.0

    def test_null_branch_counts_positives(self):
        assert mle_adversary_param((0, 0, 1), (0, 1, 1), 0) == pytest.approx(0.5)

    def test_grid_search_confirms_maximizer(self):
        # likelihood of the malicious group at the closed-form rate beats a
        # 1e-4 grid over [0, 1]
        rng = np.random.default_rng(77)
        for _ in range(10):
            n = int(rng.integers(2, 8))
            t = tuple(int(b) for b in rng.integers(0, 2, n))
            y = tuple(int(b) for b in rng.integers(0, 2, n))
            if all(t_i == 1 for t_i in t):
                continue
            wrong = sum(1 for t_i, y_i in zip(t, y) if t_i == 0 and y_i == 0)
            total = sum(1 for t_i in t if t_i == 0)
            best = mle_adversary_param(t, y, 1)

            def loglik(p):
                return log_pow(p, wrong) + log_pow(1 - p, total - wrong)

            at_best = loglik(best)
            for i in range(10_001):
                assert at_best >= loglik(i / 10_000) - 1e-12


class TestAglrtDecide:
    def test_single_robot_hand_example(self):
        # event branch best 0.8*0.85 = 0.68; null branch best is the robot
        # labeled malicious with certain false alarms, weight 0.2
        trial = make_trial((1,), (1,))
        out = aglrt_decide(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)
        assert out.hypothesis == 1
        assert out.diagnostics["log_num"] == pytest.approx(math.log(0.68))
        assert out.diagnostics["log_den"] == pytest.approx(math.log(0.2))

    def test_unanimous_positive_with_clean_scores(self):
        trial = make_trial((1, 1, 1, 1), (1, 1, 1, 1))
        out = aglrt_decide(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)
        slow = brute_force_glrt(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)
        assert out.hypothesis == 1 and slow.hypothesis == 1

    def test_exact_threshold_tie_goes_to_null(self):
        # one robot whose score is uninformative and whose report is explained
        # identically by both branches: the ratio is exactly 1 and must fall
        # back to the null hypothesis under even priors
        model = TrustModel(alphabet=(0, 1, 2), pmf_legit=(0.5, 0.3, 0.2),
                           pmf_malicious=(0.5, 0.2, 0.3))
        trial = make_trial((1,), (0,))
        out = aglrt_decide(trial, model, SENSORS_15, 0.5, 0.5)
        assert out.diagnostics["log_ratio"] == 0.0
        assert out.hypothesis == 0

    def test_all_legit_labeling_flags_arbitrary_estimate(self):
        trial = make_trial((1, 1, 1), (1, 1, 1))
        out = aglrt_decide(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)
        assert out.diagnostics["adversary_estimate_arbitrary"] == 1.0
        assert out.adversary_estimate == 0.0

    def test_agrees_with_brute_force(self):
        ok, messages = oracle_equivalence(n_values=range(1, 6), instances_per_n=200,
                                          seed=5150)
        assert ok, "\n".join(messages)

    def test_branch_maxima_match_dense_grid_enumeration(self):
        rng = np.random.default_rng(808)
        for _ in range(10):
            n = int(rng.integers(1, 5))
            trial, trust, sensors, p0, p1 = random_instance(rng, n)
            out = aglrt_decide(trial, trust, sensors, p0, p1)
            for branch, key in ((1, "log_num"), (0, "log_den")):
                reference = glrt_branch_max_by_enumeration(trial, trust, sensors,
                                                           branch)
                # the dense grid only lower-bounds the exact maximum
                assert out.diagnostics[key] >= reference - 1e-9
                assert out.diagnostics[key] <= reference + 1e-3


class TestBruteForce:
    def test_refuses_large_networks(self):
        n = BRUTE_FORCE_MAX_N + 1
        trial = make_trial((1,) * n, (1,) * n)
        with pytest.raises(ValidationError):
            brute_force_glrt(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)

    def test_single_robot_decision(self):
        trial = make_trial((1,), (1,))
        out = brute_force_glrt(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)
        assert out.hypothesis == 1

    def test_all_ones_labeling_reports_zero_rate(self):
        trial = make_trial((1, 1), (1, 1))
        out = brute_force_glrt(trial, BINARY_TRUST, SENSORS_15, 0.5, 0.5)
        assert out.adversary_estimate == 0.0


class TestEquivalentThresholdRule:
    def test_labeling_matches_per_robot_ratio_threshold(self):
        # labeling by weight comparison == trust ratio vs measurement-dependent
        # threshold, for every robot and every interior candidate rate
        rng = np.random.default_rng(404)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            trial, trust, sensors, _, _ = random_instance(rng, n)
            for p_m in candidate_set(n).values:
                if p_m in (0.0, 1.0):
                    continue
                result = inner_max(p_m, trial.a, trial.y, 1, trust, sensors)
                for i in range(n):
                    j = trust.symbol_index(trial.a[i])
                    lr = trust.pmf_legit[j] / trust.pmf_malicious[j]
                    if trial.y[i] == 1:
                        threshold = (1 - p_m) / (1 - sensors.p_md_l)
                    else:
                        threshold = p_m / sensors.p_md_l
                    expected = 1 if lr >= threshold else 0
                    assert result.t_hat[i] == expected

    def test_dominant_scores_override_measurements(self):
        # near-perfect scores: the labeling is pure score thresholding for
        # every interior rate, whatever the measurements say
        model = TrustModel(alphabet=(0, 1), pmf_legit=(0.001, 0.999),
                           pmf_malicious=(0.999, 0.001))
        sensors = LegitimateSensorModel(0.15, 0.15)
        rng = np.random.default_rng(11)
        n = 8
        y = tuple(int(b) for b in rng.integers(0, 2, n))
        a = tuple(int(b) for b in rng.integers(0, 2, n))
        for p_m in candidate_set(n).values:
            if p_m in (0.0, 1.0):
                continue
            for branch in (0, 1):
                result = inner_max(p_m, a, y, branch, model, sensors)
                assert result.t_hat == a
