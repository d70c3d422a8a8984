import numpy as np
import pytest

from stochdcopf.grid import GridCase, Node
from stochdcopf.scenarios import (DistributionSpec, ScenarioError, aggregate,
                                  dump_scenarios_text, fixed_set,
                                  parse_scenarios_text, sample)


def test_zero_forecast_gives_zero_errors(tb_case):
    silent = GridCase((Node(1), Node(2), Node(3, load=80.0)),
                      tb_case.generators, tb_case.lines, slack_node=3)
    scen = sample(silent, DistributionSpec(), 50, seed=1)
    assert np.all(scen.errors == 0.0)


def test_zero_sigma_factor_gives_zero_errors(tb_case):
    scen = sample(tb_case, DistributionSpec(sigma_factor=0.0), 50, seed=1)
    assert np.all(scen.errors == 0.0)


def test_sample_standard_deviation(tb_case):
    scen = sample(tb_case, DistributionSpec(), 100000, seed=42)
    std = scen.errors[2].std()
    assert abs(std - 3.0) / 3.0 < 0.02  # sigma = 0.15 * 20 MW


def test_sample_mean_near_zero(tb_case):
    n = 100000
    scen = sample(tb_case, DistributionSpec(), n, seed=5)
    se = 3.0 / np.sqrt(n)
    assert abs(scen.errors[2].mean()) < 3.0 * se
    assert np.all(scen.errors[:2] == 0.0)


def test_sample_reproducible_bitwise(tb_case):
    a = sample(tb_case, DistributionSpec(), 1000, seed=9)
    b = sample(tb_case, DistributionSpec(), 1000, seed=9)
    assert np.array_equal(a.errors, b.errors)
    assert a.case_hash == b.case_hash


def test_sample_count_validation(tb_case):
    with pytest.raises(ScenarioError):
        sample(tb_case, DistributionSpec(), 0, seed=1)


def test_sample_correlated(tb_case):
    corr = np.eye(3)
    scen = sample(tb_case, DistributionSpec(correlation=corr), 100, seed=3)
    plain = sample(tb_case, DistributionSpec(), 100, seed=3)
    assert np.allclose(scen.errors, plain.errors)


def test_sample_non_psd_correlation_rejected(tb_case):
    corr = np.array([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(ScenarioError, match="positive semidefinite"):
        sample(tb_case, DistributionSpec(correlation=corr), 10, seed=1)


def test_sample_asymmetric_correlation_rejected(tb_case):
    corr = np.eye(3)
    corr[0, 1] = 0.5
    with pytest.raises(ScenarioError, match="symmetric"):
        sample(tb_case, DistributionSpec(correlation=corr), 10, seed=1)


def test_fixed_set_uniform_masses(tb_atoms):
    assert np.allclose(tb_atoms.probabilities, 1.0 / 3.0)
    assert tb_atoms.n_scenarios == 3


def test_fixed_set_single_scenario():
    scen = fixed_set([[5.0]])
    assert scen.probabilities.tolist() == [1.0]


def test_fixed_set_empty_rejected():
    with pytest.raises(ScenarioError):
        fixed_set([])


def test_fixed_set_ragged_rejected():
    with pytest.raises(ScenarioError, match="ragged"):
        fixed_set([[1.0, 2.0], [1.0]])


def test_aggregate_values(tb_atoms):
    assert aggregate(tb_atoms, 0) == 20.0
    assert aggregate(tb_atoms, 2) == -20.0  # scenario 3 of the atom set
    cancel = fixed_set([[10.0], [-10.0]])
    assert aggregate(cancel, 0) == 0.0
    single = fixed_set([[20.0], [0.0], [0.0]])
    assert aggregate(single, 0) == 20.0


def test_aggregate_out_of_range(tb_atoms):
    with pytest.raises(IndexError):
        aggregate(tb_atoms, 3)


def test_aggregate_linear(tb_case):
    scen = sample(tb_case, DistributionSpec(), 10, seed=11)
    combined = fixed_set(scen.errors[:, :1] + scen.errors[:, 1:2])
    assert aggregate(combined, 0) == pytest.approx(
        aggregate(scen, 0) + aggregate(scen, 1), abs=1e-12)


def test_scenario_file_exact_round_trip(tb_case):
    scen = sample(tb_case, DistributionSpec(), 257, seed=77)
    back = parse_scenarios_text(dump_scenarios_text(scen))
    assert np.array_equal(back.errors, scen.errors)
    assert back.seed == scen.seed
    assert back.case_hash == scen.case_hash
    assert np.allclose(back.probabilities, scen.probabilities)


def test_scenario_file_header_mismatch_rejected(tb_case):
    scen = sample(tb_case, DistributionSpec(), 4, seed=1)
    text = dump_scenarios_text(scen).replace("# count 4", "# count 5")
    with pytest.raises(ScenarioError, match="count"):
        parse_scenarios_text(text)


def test_probabilities_must_sum_to_one():
    with pytest.raises(ScenarioError, match="sum to 1"):
        fixed_set([[1.0, 2.0]], probabilities=[0.7, 0.7])
