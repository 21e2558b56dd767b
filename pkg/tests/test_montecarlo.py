import dataclasses
import math

import numpy as np
import pytest

from rfharvest import channel, harvesters, montecarlo, stats
from rfharvest.errors import ValidationError


def constant_model(level):
    return lambda x: np.full_like(np.asarray(x, dtype=float), level)


@pytest.fixture()
def base_plan(link_d5, nakagami5):
    return montecarlo.SimulationPlan(trials=40_000, blocks_per_trial=4, seed=123,
                                     model=harvesters.LinearHarvester(0.3),
                                     link=link_d5, channel=nakagami5,
                                     chunk_size=7_001)


class TestDeterminism:
    def test_identical_plans_identical_results(self, base_plan):
        a = montecarlo.simulate_energy(base_plan, 0.05)
        b = montecarlo.simulate_energy(base_plan, 0.05)
        assert a.mean_energy_mws == b.mean_energy_mws
        assert a.std_error == b.std_error

    def test_parallel_equals_sequential(self, base_plan):
        parallel = dataclasses.replace(base_plan, workers=4)
        seq_energy = montecarlo.simulate_energy(base_plan, 0.05)
        par_energy = montecarlo.simulate_energy(parallel, 0.05)
        assert seq_energy.mean_energy_mws == par_energy.mean_energy_mws

        edges = np.linspace(0.0, 0.2, 65)
        seq_hist = montecarlo.simulate_u_n(base_plan, edges)
        par_hist = montecarlo.simulate_u_n(parallel, edges)
        np.testing.assert_array_equal(seq_hist.counts, par_hist.counts)

        seq_fp = montecarlo.simulate_first_passage(base_plan, 0.01)
        par_fp = montecarlo.simulate_first_passage(parallel, 0.01)
        np.testing.assert_array_equal(seq_fp.blocks, par_fp.blocks)

    def test_seed_changes_results(self, base_plan):
        other = dataclasses.replace(base_plan, seed=124)
        a = montecarlo.simulate_energy(base_plan, 0.05)
        b = montecarlo.simulate_energy(other, 0.05)
        assert a.mean_energy_mws != b.mean_energy_mws


class TestEnergy:
    def test_zero_model(self, base_plan):
        plan = dataclasses.replace(base_plan, model=constant_model(0.0))
        result = montecarlo.simulate_energy(plan, 0.05)
        assert result.mean_energy_mws == 0.0
        assert result.std_error == 0.0

    def test_linear_model_closed_form(self, link_d5, nakagami5):
        plan = montecarlo.SimulationPlan(trials=400_000, blocks_per_trial=3, seed=5,
                                         model=harvesters.LinearHarvester(0.3),
                                         link=link_d5, channel=nakagami5)
        t_p = 0.05
        result = montecarlo.simulate_energy(plan, t_p)
        expected = 3 * t_p * stats.expected_power_linear(link_d5, nakagami5, 0.3)
        assert abs(result.mean_energy_mws - expected) <= 3.0 * result.std_error

    def test_ground_truth_against_quadrature(self, link_d5, nakagami5,
                                             rectenna_a_model):
        plan = montecarlo.SimulationPlan(trials=1_000_000, blocks_per_trial=1, seed=9,
                                         model=rectenna_a_model, link=link_d5,
                                         channel=nakagami5)
        t_p = 0.05
        result = montecarlo.simulate_energy(plan, t_p)
        expected = t_p * stats.expected_power_numeric(link_d5, nakagami5,
                                                      rectenna_a_model)
        assert result.mean_energy_mws == pytest.approx(expected, rel=0.005)


class TestAccumulatedHistogram:
    def test_deterministic_harvest_single_bin(self, base_plan):
        plan = dataclasses.replace(base_plan, blocks_per_trial=1,
                                   model=constant_model(0.05))
        edges = np.linspace(0.0, 0.2, 21)
        hist = montecarlo.simulate_u_n(plan, edges)
        assert hist.counts.sum() == plan.trials
        assert np.count_nonzero(hist.counts) == 1
        occupied = int(np.nonzero(hist.counts)[0][0])
        assert edges[occupied] <= 0.05 < edges[occupied + 1]

    def test_two_blocks_double_mass_point(self, base_plan):
        plan = dataclasses.replace(base_plan, blocks_per_trial=2,
                                   model=constant_model(0.05))
        edges = np.linspace(0.0, 0.2, 21)
        hist = montecarlo.simulate_u_n(plan, edges)
        occupied = int(np.nonzero(hist.counts)[0][0])
        assert edges[occupied] <= 0.10 < edges[occupied + 1]


class TestFirstPassage:
    def test_tiny_threshold_crosses_immediately(self, base_plan):
        plan = dataclasses.replace(base_plan, model=constant_model(1.0))
        samples = montecarlo.simulate_first_passage(plan, 1e-12)
        assert np.all(samples.blocks == 1)
        assert not samples.censored.any()

    def test_deterministic_accumulation(self, base_plan):
        plan = dataclasses.replace(base_plan, blocks_per_trial=8,
                                   model=constant_model(1.0))
        samples = montecarlo.simulate_first_passage(plan, 2.5)
        assert np.all(samples.blocks == 3)

    def test_censoring_flagged(self, base_plan):
        plan = dataclasses.replace(base_plan, blocks_per_trial=2,
                                   model=constant_model(1.0))
        samples = montecarlo.simulate_first_passage(plan, 2.5)
        assert samples.censored.all()
        with pytest.raises(ValidationError):
            samples.mean_blocks()

    def test_invalid_threshold(self, base_plan):
        with pytest.raises(ValidationError):
            montecarlo.simulate_first_passage(base_plan, 0.0)


class TestRfidEvents:
    def test_deterministic_success(self, base_plan):
        plan = dataclasses.replace(base_plan, model=constant_model(1.0))
        result = montecarlo.simulate_rfid(plan, theta_ber_mw=0.0,
                                          harvest_share=0.25, consumption_mw=0.5)
        assert result.frequency == 1.0

    def test_consumption_above_plateau(self, base_plan):
        plan = dataclasses.replace(base_plan, model=constant_model(1.0))
        result = montecarlo.simulate_rfid(plan, theta_ber_mw=0.0,
                                          harvest_share=0.25, consumption_mw=2.0)
        assert result.frequency == 0.0

    def test_std_error_is_binomial(self, base_plan):
        result = montecarlo.simulate_rfid(base_plan, theta_ber_mw=0.02,
                                          harvest_share=0.25, consumption_mw=1e-4)
        p = result.frequency
        assert result.std_error == pytest.approx(
            math.sqrt(p * (1 - p) / base_plan.trials), rel=1e-12)


class TestPlanValidation:
    def test_bad_counts(self, link_d5, nakagami5):
        with pytest.raises(ValidationError):
            montecarlo.SimulationPlan(trials=0, blocks_per_trial=1, seed=1,
                                      model=constant_model(1.0), link=link_d5,
                                      channel=nakagami5)
