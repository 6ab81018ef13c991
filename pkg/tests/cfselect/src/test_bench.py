from io import StringIO
from math import log2, pi, sqrt
from pathlib import Path

import numpy as np
import pytest

from cfselect.src.bench import (
    CSV_HEADER,
    expected_linear_candidates,
    gen_channel,
    hmax_bound,
    hmax_mean,
    load_table,
    run_complexity_experiment,
    run_rate_experiment,
    scaling_check,
    trial_rng,
    write_csv,
)
from cfselect.src.channels import gen_gains
from cfselect.src.exceptions import (
    BudgetExceededError,
    ConfigError,
    InvalidInputError,
    ThresholdTableMissError,
)
from cfselect.src.models import ExperimentConfig, ResultRow
from cfselect.src.rings import RingId
from cfselect.src.thresholds import published_table, serialize

G = RingId.GAUSSIAN


def by_algorithm(rows: list[ResultRow], snr_db: float) -> dict[str, ResultRow]:
    return {row.algorithm: row for row in rows if row.snr_db == snr_db}


@pytest.mark.unittests
class TestChannels:
    def test_same_trial_should_give_the_same_gains(self) -> None:
        first = gen_gains(4, trial_rng(7, 3))
        second = gen_gains(4, trial_rng(7, 3))

        assert np.array_equal(first, second)

    def test_streams_should_differ_between_trials(self) -> None:
        assert not np.array_equal(
            gen_gains(4, trial_rng(7, 3)), gen_gains(4, trial_rng(7, 4))
        )

    def test_gains_should_be_unit_variance_rayleigh(self) -> None:
        gains = gen_gains(100_000, trial_rng(0, 0))

        assert np.mean(np.abs(gains) ** 2) == pytest.approx(1.0, abs=0.02)
        assert np.mean(np.abs(gains)) == pytest.approx(sqrt(pi / 4), abs=0.02)

    def test_gen_channel_should_apply_snr(self) -> None:
        ch = gen_channel(3, trial_rng(1, 0), snr_db=30.0)

        assert ch.users == 3
        assert ch.snr == pytest.approx(1000.0)

    def test_raise_invalid_input_error_for_no_users(self) -> None:
        with pytest.raises(InvalidInputError, match="must be positive"):
            gen_gains(0, trial_rng(0, 0))


@pytest.mark.unittests
class TestRateExperiment:
    def test_single_user_should_reach_channel_capacity(self) -> None:
        config = ExperimentConfig(
            G,
            users=1,
            snr_points_db=(20.0,),
            trials=1,
            algorithms=("ex2", "ll", "clll"),
        )
        capacity = log2(1 + 100.0 * np.abs(gen_gains(1, trial_rng(0, 0))[0]) ** 2)

        rows = run_rate_experiment(config)

        assert [row.algorithm for row in rows] == ["ex2", "ll", "clll"]
        assert all(row.mean_rate == pytest.approx(capacity) for row in rows)
        assert all(row.rate_std == 0.0 and row.mean_flops == 0.0 for row in rows)

    def test_optimal_search_should_not_lose_on_average(self) -> None:
        config = ExperimentConfig(
            G,
            users=3,
            snr_points_db=(10.0, 20.0),
            trials=8,
            algorithms=("ex2", "clll"),
        )
        rows = run_rate_experiment(config)

        for snr_db in (10.0, 20.0):
            means = by_algorithm(rows, snr_db)
            assert means["ex2"].mean_rate >= means["clll"].mean_rate - 1e-9

    def test_same_config_should_give_identical_csv(self) -> None:
        config = ExperimentConfig(
            G,
            users=2,
            snr_points_db=(10.0, 15.0),
            trials=4,
            seed=3,
            algorithms=("ex2", "ll"),
        )
        first, second = StringIO(), StringIO()

        write_csv(run_rate_experiment(config), first)
        write_csv(run_rate_experiment(config), second)

        assert first.getvalue() == second.getvalue()
        assert first.getvalue().splitlines()[0] == ",".join(CSV_HEADER)
        assert len(first.getvalue().splitlines()) == 5

    def test_csv_should_format_numbers_compactly(self) -> None:
        stream = StringIO()
        write_csv([ResultRow(20.0, "ex2", 2.5, 0.0, 1234.0, 12.5, 10)], stream)

        assert stream.getvalue().splitlines()[1] == "20,ex2,2.5,0,1234,12.5,10"

    def test_errors_should_name_the_trial(self) -> None:
        config = ExperimentConfig(
            G, users=3, snr_points_db=(20.0,), trials=2, algorithms=("linear",)
        )

        with pytest.raises(ThresholdTableMissError, match="Trial 0: No thresholds"):
            run_rate_experiment(config)

    def test_budget_errors_should_name_the_trial(self) -> None:
        config = ExperimentConfig(
            G,
            users=3,
            snr_points_db=(30.0,),
            trials=2,
            algorithms=("ex1",),
            budget=10,
        )

        with pytest.raises(BudgetExceededError, match="Trial 0: Exhaustive search"):
            run_rate_experiment(config)


@pytest.mark.unittests
class TestComplexityExperiment:
    def test_raise_config_error_without_flop_counting(self) -> None:
        config = ExperimentConfig(G, users=2, snr_points_db=(10.0,), trials=1)

        with pytest.raises(ConfigError, match="count_flops"):
            run_complexity_experiment(config)

    def test_every_algorithm_should_report_flops(self) -> None:
        config = ExperimentConfig(
            G,
            users=5,
            snr_points_db=(20.0,),
            trials=2,
            algorithms=("ex2", "ll", "clll", "linear"),
            count_flops=True,
        )
        rows = run_complexity_experiment(config)

        assert all(row.mean_flops > 0 for row in rows)


@pytest.mark.unittests
class TestTables:
    def test_missing_path_should_load_published_table(self) -> None:
        config = ExperimentConfig(G, users=5, snr_points_db=(20.0,))

        assert load_table(config) == published_table(G)

    def test_table_should_be_read_from_file(self, tmp_path: Path) -> None:
        path = tmp_path / "table.csv"
        path.write_text(serialize(published_table(RingId.EISENSTEIN)), encoding="utf-8")
        config = ExperimentConfig("eisenstein", 5, (20.0,), table_path=path)

        assert load_table(config) == published_table(RingId.EISENSTEIN)


@pytest.mark.unittests
class TestScaling:
    def test_raise_config_error_for_narrow_grid(self) -> None:
        config = ExperimentConfig(G, users=2, snr_points_db=(10.0, 20.0), trials=1)

        with pytest.raises(ConfigError, match="must span 2 decades"):
            scaling_check(config)

    def test_raise_config_error_for_hmax_bound_of_one_user(self) -> None:
        with pytest.raises(ConfigError, match="at least two users"):
            hmax_bound(1)

    @pytest.mark.parametrize("users", [5, 10])
    def test_mean_strongest_gain_should_respect_bound(self, users: int) -> None:
        assert hmax_mean(users, draws=100_000) <= hmax_bound(users)

    def test_expected_linear_candidates(self) -> None:
        assert expected_linear_candidates(G, 100.0, 0.5, 2.0) == pytest.approx(800.0)

    def test_small_grid_report(self) -> None:
        config = ExperimentConfig(
            G, users=2, snr_points_db=(10.0, 30.0), trials=3, algorithms=("ex2",)
        )
        report = scaling_check(config, l_values=[2, 3])

        assert report.snr_db == (10.0, 30.0)
        assert report.ex2_representatives[1] > report.ex2_representatives[0]
        assert report.linear_samples is None
        assert report.linear_snr_slope is None
        assert report.l_values == (2, 3)
        assert report.ex2_quantizations_by_l[1] > report.ex2_quantizations_by_l[0]
        assert report.ex2_l_slope is not None

    def test_linear_report_should_skip_ex2(self) -> None:
        config = ExperimentConfig(
            G, users=5, snr_points_db=(10.0, 30.0), trials=2, algorithms=("linear",)
        )
        report = scaling_check(config)

        assert report.ex2_representatives is None
        assert report.ex2_snr_slope is None
        assert report.linear_samples[1] > report.linear_samples[0]
        assert len(report.expected_linear_samples) == 2
        for examined, pool in zip(report.linear_examined, report.linear_samples):
            assert 0 < examined <= pool

    def test_raise_config_error_without_counted_algorithm(self) -> None:
        config = ExperimentConfig(
            G, users=2, snr_points_db=(10.0, 30.0), trials=1, algorithms=("clll",)
        )

        with pytest.raises(ConfigError, match="needs ex2 or linear"):
            scaling_check(config)

    def test_raise_config_error_for_exhaustive_bin(self) -> None:
        config = ExperimentConfig(
            G, users=5, snr_points_db=(0.0, 20.0), trials=1, algorithms=("linear",)
        )

        with pytest.raises(ConfigError, match="no sample grid"):
            scaling_check(config)


@pytest.mark.integtests
@pytest.mark.slowtests
class TestMonteCarloProperties:
    def test_counts_should_grow_linearly_with_snr(self) -> None:
        config = ExperimentConfig(
            G,
            users=5,
            snr_points_db=(10.0, 20.0, 30.0),
            trials=50,
            algorithms=("ex2",),
        )
        report = scaling_check(config)

        assert report.ex2_snr_slope == pytest.approx(1.0, abs=0.15)

    def test_denser_ring_and_optimal_search_should_lead(self) -> None:
        rates = {}
        for ring in (RingId.GAUSSIAN, RingId.EISENSTEIN):
            config = ExperimentConfig(
                ring,
                users=5,
                snr_points_db=(10.0, 20.0),
                trials=1000,
                algorithms=("ex2", "clll"),
            )
            rates[ring] = run_rate_experiment(config)

        for snr_db in (10.0, 20.0):
            gaussian = by_algorithm(rates[RingId.GAUSSIAN], snr_db)
            eisenstein = by_algorithm(rates[RingId.EISENSTEIN], snr_db)
            assert eisenstein["ex2"].mean_rate >= gaussian["ex2"].mean_rate
            assert gaussian["ex2"].mean_rate >= gaussian["clll"].mean_rate

    def test_linear_samples_should_grow_linearly_and_match_expected_count(
        self,
    ) -> None:
        config = ExperimentConfig(
            G,
            users=5,
            snr_points_db=(40.0, 50.0, 60.0),
            trials=300,
            algorithms=("linear",),
        )
        report = scaling_check(config)

        assert report.linear_snr_slope == pytest.approx(1.0, abs=0.15)
        assert report.linear_samples[0] == pytest.approx(
            report.expected_linear_samples[0], rel=0.3
        )

    def test_ex2_work_should_grow_cubically_with_users(self) -> None:
        config = ExperimentConfig(
            G,
            users=5,
            snr_points_db=(10.0, 20.0, 30.0),
            trials=20,
            algorithms=("ex2",),
        )
        report = scaling_check(config, l_values=[3, 5, 8])

        assert 2.5 <= report.ex2_l_slope <= 3.5

    def test_gap_to_clll_should_widen_with_users(self) -> None:
        gaps = []
        for users in (5, 10):
            config = ExperimentConfig(
                G,
                users=users,
                snr_points_db=(20.0,),
                trials=1000,
                algorithms=("ex2", "clll"),
            )
            rates = by_algorithm(run_rate_experiment(config), 20.0)
            gaps.append(rates["ex2"].mean_rate - rates["clll"].mean_rate)

        assert gaps[1] >= gaps[0]

    def test_ll_should_stay_within_one_percent_of_optimum(self) -> None:
        config = ExperimentConfig(
            G,
            users=5,
            snr_points_db=(20.0,),
            trials=1000,
            algorithms=("ex2", "ll"),
        )
        rates = by_algorithm(run_rate_experiment(config), 20.0)

        assert rates["ll"].mean_rate >= 0.99 * rates["ex2"].mean_rate

    def test_flops_should_order_linear_below_ex2_below_ll(self) -> None:
        config = ExperimentConfig(
            G,
            users=5,
            snr_points_db=(20.0, 30.0, 40.0),
            trials=500,
            algorithms=("ex2", "ll", "linear"),
            count_flops=True,
        )
        rows = run_complexity_experiment(config)

        gaps = []
        for snr_db in (20.0, 30.0, 40.0):
            flops = {
                name: row.mean_flops
                for name, row in by_algorithm(rows, snr_db).items()
            }
            assert flops["linear"] < flops["ex2"] < flops["ll"]
            gaps.append(flops["ex2"] - flops["linear"])
        assert gaps == sorted(gaps)
