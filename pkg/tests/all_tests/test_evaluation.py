import math

import pytest
from fractions import Fraction

from src.core.analysis import guarantee_pair
from src.core.evaluation import (
    derive_stream,
    emit_curves,
    hoeffding_half_width,
    monte_carlo_expected_indegree,
    run_suite,
)
from src.core.exact_oracle import exact_distribution, expected_indegree
from src.core.graph_core import gen_random, max_k_indegree
from src.data.models import GuaranteeKind, MechanismKind, MechanismSpec, NominationGraph, Prediction, TrialConfig

@pytest.fixture
def random_pair_instance():
    """Random graph on five vertices with an accurate top-2 prediction"""
    g = gen_random(5, 0.5, 3)
    return g, Prediction(list(max_k_indegree(g, 2)[1]))

class TestStreams:
    """Test per-trial random streams and the Hoeffding width"""

    def test_derive_stream_reproducible(self):
        """Test the same indices reproduce the same draws"""
        assert derive_stream(5, 1, 2).random(4).tolist() == derive_stream(5, 1, 2).random(4).tolist()

    def test_derive_stream_independent_indices(self):
        """Test different trial indices give different draws"""
        assert derive_stream(5, 1).random(4).tolist() != derive_stream(5, 2).random(4).tolist()

    def test_hoeffding_formula(self):
        """Test sqrt(ln(2/conf) / 2T) * Delta_k"""
        assert hoeffding_half_width(200, 3, 0.05) == pytest.approx(math.sqrt(math.log(40) / 400) * 3)
        assert hoeffding_half_width(200, 0, 0.05) == 0

    def test_hoeffding_confidence_from_config(self, mock_config_file_path, config_file_with_data):
        """Test the configured confidence is used by default"""
        with mock_config_file_path(config_file_with_data):
            assert hoeffding_half_width(100, 1) == pytest.approx(hoeffding_half_width(100, 1, 0.05))

class TestMonteCarlo:
    """Test expected indegree estimation"""

    def test_estimate_within_interval_of_exact(self, random_pair_instance):
        """Test the Monte Carlo mean lands inside its interval around the exact value"""
        g, p = random_pair_instance
        spec = MechanismSpec(MechanismKind.RHO_PARTITION, k=2, rho="1/2")
        exact = expected_indegree(exact_distribution(spec, g, p), g)
        mean, ci = monte_carlo_expected_indegree(spec, g, p, trials=400, seed=11)
        assert abs(mean - float(exact)) <= ci

    @pytest.mark.parametrize("spec", [
        MechanismSpec(MechanismKind.RHO_PARTITION, k=2, rho="1/2"),
        MechanismSpec(MechanismKind.K_PARTITION_BASELINE, k=2),
        MechanismSpec(MechanismKind.RANDOMIZED_BIDIRECTIONAL),
    ], ids=lambda s: s.label())
    def test_interval_covers_exact_over_seeds(self, random_pair_instance, spec):
        """Test |mean - exact| <= half-width for at least 99 of 100 seeds"""
        g, p = random_pair_instance
        exact = float(expected_indegree(exact_distribution(spec, g, p), g))
        covered = 0
        for seed in range(100):
            mean, ci = monte_carlo_expected_indegree(spec, g, p, trials=300, seed=seed)
            covered += abs(mean - exact) <= ci
        assert covered >= 99

    def test_uniform_permutation_single_edge(self, single_edge_graph, predict_zero, uniform_spec):
        """Test the estimate of 1/2 on the single edge"""
        mean, ci = monte_carlo_expected_indegree(uniform_spec, single_edge_graph, predict_zero, 500, 3)
        assert abs(mean - 0.5) <= ci

    def test_rho_permutation_single_edge(self, single_edge_graph, predict_zero, rho_perm_spec):
        """Test the estimate of 2/3 for rho = 2/3"""
        mean, ci = monte_carlo_expected_indegree(rho_perm_spec, single_edge_graph, predict_zero, 5000, 8)
        assert abs(mean - 2 / 3) <= ci

    def test_empty_graph(self, uniform_spec, predict_zero):
        """Test no edges gives exactly 0"""
        assert monte_carlo_expected_indegree(uniform_spec, NominationGraph(4), predict_zero, 30, 0) == (0.0, 0.0)

    def test_reproducible_for_fixed_seed(self, random_pair_instance):
        """Test two runs with the same seed agree"""
        g, p = random_pair_instance
        spec = MechanismSpec(MechanismKind.K_PARTITION_BASELINE, k=2)
        first = monte_carlo_expected_indegree(spec, g, p, 50, 4)
        assert monte_carlo_expected_indegree(spec, g, p, 50, 4) == first

    def test_workers_do_not_change_result(self, random_pair_instance):
        """Test chunked trials reuse the same per-trial streams"""
        g, p = random_pair_instance
        spec = MechanismSpec(MechanismKind.RHO_PARTITION, k=2, rho="2/3")
        serial = monte_carlo_expected_indegree(spec, g, p, 60, 2, workers=1)
        assert monte_carlo_expected_indegree(spec, g, p, 60, 2, workers=2) == serial

    def test_deterministic_spec_has_no_interval(self, fig6_instances):
        """Test det-k reports its exact indegree with zero width"""
        g, p = fig6_instances[0]
        assert monte_carlo_expected_indegree(MechanismSpec(MechanismKind.DET_K, k=3), g, p, 100, 0) == (3.0, 0.0)

    @pytest.mark.parametrize("trials", [0, -3])
    def test_trials_must_be_positive(self, single_edge_graph, predict_zero, uniform_spec, trials):
        """Test trials < 1"""
        with pytest.raises(ValueError, match="trials must be at least 1."):
            monte_carlo_expected_indegree(uniform_spec, single_edge_graph, predict_zero, trials, 0)

    def test_incompatible_prediction(self, single_edge_graph, uniform_spec):
        """Test prediction size must match the mechanism k"""
        with pytest.raises(ValueError, match="selects k=1"):
            monte_carlo_expected_indegree(uniform_spec, single_edge_graph, Prediction([0, 1]), 10, 0)

class TestRunSuite:
    """Test suite evaluation over named instances"""

    def test_rows_follow_instance_order(self, fig3_instances, rho_perm_spec):
        """Test one row per instance, in order"""
        instances = [(f"fig3-{i}", g, p) for i, (g, p) in enumerate(fig3_instances)]
        report = run_suite(TrialConfig(rho_perm_spec, 200, 1), instances, workers=1)
        assert [row.instance_id for row in report.rows] == ["fig3-0", "fig3-1", "fig3-2"]
        assert report.spec_label == rho_perm_spec.label()
        assert report.trials == 200 and report.seed == 1
        assert report.alpha_hat is not None
        assert report.beta_hat <= report.alpha_hat

    def test_deterministic_suite_meets_guarantee(self, fig5_instances, bidirectional_spec):
        """Test fixed bidirectional ratios on the 2-selection family"""
        instances = [(f"fig5-{i}", g, p) for i, (g, p) in enumerate(fig5_instances)]
        report = run_suite(TrialConfig(bidirectional_spec, 1, 0), instances, workers=1)
        assert report.alpha_hat == 1.0
        assert report.beta_hat >= 0.5
        assert all(row.ci == 0.0 for row in report.rows)

    def test_single_accurate_instance(self, fig3_instances, rho_perm_spec):
        """Test alpha_hat equals beta_hat with one accurate instance"""
        report = run_suite(TrialConfig(rho_perm_spec, 50, 0), [("g1", *fig3_instances[0])], workers=1)
        assert report.alpha_hat == report.beta_hat

    def test_rho_partition_consistency(self):
        """Test accurate-prediction ratios stay above 3/4 up to the interval"""
        spec = MechanismSpec(MechanismKind.RHO_PARTITION, k=2, rho="1/2")
        instances = []
        for seed in range(5):
            g = gen_random(6, 0.5, seed)
            instances.append((f"r{seed}", g, Prediction(list(max_k_indegree(g, 2)[1]))))
        report = run_suite(TrialConfig(spec, 1000, 3), instances, workers=1)
        for row in report.rows:
            assert row.accurate
            assert row.ratio >= 0.75 - row.ci / row.delta_k

    def test_rho_partition_consistency_at_full_scale(self):
        """Test 20 accurate instances (n <= 8) at 10^5 trials, cross-checked exactly for n <= 6"""
        spec = MechanismSpec(MechanismKind.RHO_PARTITION, k=2, rho="1/2")
        instances = []
        for seed in range(20):
            g = gen_random(4 + seed % 5, 0.5, 50 + seed)
            instances.append((f"r{seed}", g, Prediction(list(max_k_indegree(g, 2)[1]))))
        report = run_suite(TrialConfig(spec, 100_000, 7), instances, workers=4)
        assert len(report.rows) == 20
        for row, (_, g, p) in zip(report.rows, instances):
            assert row.accurate
            assert row.mean >= 0.75 * row.delta_k - row.ci
            if g.n <= 6:
                exact = expected_indegree(exact_distribution(spec, g, p), g)
                assert abs(row.mean - float(exact)) <= row.ci

    def test_workers_default_from_config(self, fig3_instances, rho_perm_spec,
                                         mock_config_file_path, config_file_with_data):
        """Test the configured worker count is used when none is given"""
        instances = [("only", *fig3_instances[0])]
        with mock_config_file_path(config_file_with_data):
            report = run_suite(TrialConfig(rho_perm_spec, 20, 0), instances)
        assert len(report.rows) == 1

    def test_empty_instances(self, rho_perm_spec):
        """Test an empty instance list"""
        with pytest.raises(ValueError, match="instance list must not be empty."):
            run_suite(TrialConfig(rho_perm_spec, 10, 0), [], workers=1)

    def test_k_mismatch_rejected_before_running(self, fig5_instances, rho_perm_spec):
        """Test every instance is checked against the mechanism first"""
        g, p = fig5_instances[0]
        with pytest.raises(ValueError, match="selects k=1"):
            run_suite(TrialConfig(rho_perm_spec, 10, 0), [("bad", g, p)], workers=1)

class TestCurves:
    """Test theory curve rows"""

    def test_row_per_combination(self):
        """Test kinds x k x rho rows"""
        rows = emit_curves([GuaranteeKind.RHO_PARTITION, "k-partition"], range(1, 4), ["1/2", 1])
        assert len(rows) == 12
        first = rows[0]
        pair = guarantee_pair(GuaranteeKind.RHO_PARTITION, rho="1/2", k=1)
        assert (first.kind, first.k, first.rho) == (GuaranteeKind.RHO_PARTITION, 1, Fraction(1, 2))
        assert (first.alpha, first.beta) == (pair.alpha, pair.beta)

    def test_rho_ignored_by_kinds_without_it(self):
        """Test k-partition rows repeat the same pair for each rho"""
        rows = emit_curves(["k-partition"], [2], ["1/2", "3/4"])
        assert rows[0].alpha == rows[1].alpha == Fraction(7, 12)

    def test_empty_inputs(self):
        """Test empty k range or rho set"""
        with pytest.raises(ValueError, match="k range and rho set must not be empty."):
            emit_curves(["rho-partition"], [], ["1/2"])
        with pytest.raises(ValueError, match="k range and rho set must not be empty."):
            emit_curves(["rho-partition"], [1], [])

    def test_rho_below_guarantee_range(self):
        """Test rho-partition curves need rho >= 1/2"""
        with pytest.raises(ValueError, match="rho must be in"):
            emit_curves(["rho-partition"], [2], ["1/3"])

    def test_float_rho_rejected(self):
        """Test rho must be exact"""
        with pytest.raises(ValueError, match="exact rational"):
            emit_curves(["rho-partition"], [2], [0.5])
