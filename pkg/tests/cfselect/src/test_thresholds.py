from math import inf
from typing import Callable

import pytest

from cfselect.src.exceptions import (
    InvalidInputError,
    ThresholdParseError,
    ThresholdTableMissError,
)
from cfselect.src.models import Channel
from cfselect.src.rings import RingId
from cfselect.src.selectors.exhaustive import ExhaustiveTwoSelector
from cfselect.src.selectors.linear import LinearSearchSelector
from cfselect.src.thresholds import (
    TERMINAL_GAMMA,
    ThresholdBin,
    ThresholdTable,
    _round_down,
    build_table,
    gamma_opt_of,
    gamma_rand_fraction,
    lookup,
    published_table,
    parse,
    repair_monotonicity,
    serialize,
    training_channels,
)

G = RingId.GAUSSIAN
HEADER = "gaussian,1,10,0\n"


@pytest.mark.unittests
class TestLookup:
    @pytest.mark.parametrize(
        "users, snr_db, gamma",
        [
            (5, 3.0, None),
            (5, 5.0, 0.09),
            (5, 22.0, 0.28),
            (5, 39.9, 0.44),
            (5, 40.0, 0.71),
            (5, 65.0, 0.71),
            (10, 20.0, 0.12),
        ],
    )
    def test_published_table(
        self, users: int, snr_db: float, gamma: float | None
    ) -> None:
        assert lookup(published_table(G), users, snr_db) == gamma

    def test_raise_threshold_table_miss_error_for_missing_row(self) -> None:
        with pytest.raises(ThresholdTableMissError, match=r"L=6 .*\[5, 8, 10\]"):
            lookup(published_table(G), 6, 20.0)

    def test_snr_outside_every_bin_should_fall_back(self) -> None:
        table = ThresholdTable(G, {2: (ThresholdBin(10.0, 20.0, 0.3),)}, 1, 0)

        assert lookup(table, 2, 25.0) is None

    @pytest.mark.parametrize("ring", [RingId.GAUSSIAN, RingId.EISENSTEIN])
    def test_published_rows_should_be_monotone(self, ring: RingId) -> None:
        for row in published_table(ring).rows.values():
            gammas = [b.gamma for b in row if b.gamma is not None]

            assert gammas == sorted(gammas)


@pytest.mark.unittests
class TestSerialization:
    @pytest.mark.parametrize("ring", [RingId.GAUSSIAN, RingId.EISENSTEIN])
    def test_round_trip_should_be_exact(self, ring: RingId) -> None:
        table = published_table(ring)

        assert parse(serialize(table)) == table

    def test_serialized_text_layout(self) -> None:
        table = ThresholdTable(
            G,
            {2: (ThresholdBin(-inf, 5.0, None), ThresholdBin(5.0, inf, 0.123456789))},
            trials=10,
            rng_seed=7,
        )

        assert serialize(table) == "gaussian,1,10,7\n2,-inf,5,E\n2,5,inf,0.123457\n"

    @pytest.mark.parametrize(
        "text, line_number, message",
        [
            ("", 1, "missing header"),
            ("gaussian,1,10\n", 1, "expected header"),
            ("z[sqrt2],1,10,0\n", 1, "invalid header"),
            ("gaussian,1,0,0\n", 1, "must be positive"),
            (HEADER + "2,5,10\n", 2, "expected 'L,snr_lo_db"),
            (HEADER + "2,5,ten,0.2\n", 2, "invalid value"),
            (HEADER + "0,5,10,0.2\n", 2, "L must be positive"),
            (HEADER + "2,10,5,0.2\n", 2, "empty bin"),
            (HEADER + "2,5,10,1.5\n", 2, "outside"),
            (HEADER + "2,5,10,0.2\n2,8,15,0.3\n", 3, "overlapping"),
            (HEADER + "2,5,10,0.2\n2,12,15,0.3\n", 3, "gap"),
            (HEADER + "2,5,10,0.3\n2,10,15,0.2\n", 3, "decreases"),
            (HEADER + "2,5,10,0.2\n3,5,10,0.2\n", 1, "announces 1 rows"),
        ],
    )
    def test_raise_threshold_parse_error_with_line_number(
        self, text: str, line_number: int, message: str
    ) -> None:
        with pytest.raises(ThresholdParseError, match=message) as error:
            parse(text)

        assert error.value.line_number == line_number

    def test_exhaustive_marker_should_not_break_monotonicity(self) -> None:
        table = parse(HEADER + "2,-inf,5,E\n2,5,10,0.2\n2,10,inf,0.5\n")

        assert lookup(table, 2, 0.0) is None
        assert lookup(table, 2, 7.5) == 0.2


@pytest.mark.unittests
class TestGammaOpt:
    def test_single_user_region_should_be_cut_to_the_reachable_disc(
        self, unit_channel: Channel
    ) -> None:
        sample = gamma_opt_of(unit_channel, G, channel_id=4)

        # square [0.5, 0.5 + w] x [-w/2, w/2] inside |alpha|^2 <= 10/11
        assert sample.gamma_opt == pytest.approx(0.4275, abs=0.01)
        assert sample.channel_id == 4

    def test_figure_channel(self, figure_channel: Channel) -> None:
        assert gamma_opt_of(figure_channel, G).gamma_opt == pytest.approx(
            0.7071, abs=1e-3
        )

    @pytest.mark.parametrize("ring", [RingId.GAUSSIAN, RingId.EISENSTEIN])
    def test_gamma_should_lie_in_unit_interval(
        self, ring: RingId, make_channels: Callable[[int, float, int], list[Channel]]
    ) -> None:
        selector = ExhaustiveTwoSelector(ring)
        for index, ch in enumerate(make_channels(3, 20.0, 10)):
            gamma = gamma_opt_of(ch, ring, index, selector).gamma_opt

            assert 0 < gamma <= 1


@pytest.mark.unittests
class TestBuildTable:
    @pytest.mark.parametrize(
        "value, expected",
        [(0.70710678, 0.707106), (0.123456789, 0.123456), (0.5, 0.5)],
    )
    def test_round_down_should_keep_six_significant_digits(
        self, value: float, expected: float
    ) -> None:
        assert _round_down(value) == pytest.approx(expected, abs=1e-12)
        assert _round_down(value) <= value

    def test_repair_should_lower_earlier_bins(self) -> None:
        bins = (
            ThresholdBin(-inf, 5.0, None),
            ThresholdBin(5.0, 10.0, 0.3),
            ThresholdBin(10.0, 15.0, 0.2),
            ThresholdBin(15.0, inf, 0.5),
        )

        repaired, changed = repair_monotonicity(bins)

        assert changed
        assert [b.gamma for b in repaired] == [None, 0.2, 0.2, 0.5]

    def test_monotone_row_should_not_change(self) -> None:
        bins = (ThresholdBin(5.0, 10.0, 0.2), ThresholdBin(10.0, inf, 0.3))

        assert repair_monotonicity(bins) == (bins, False)

    def test_training_channels_should_share_gains_across_bins(self) -> None:
        low = list(training_channels(3, 10.0, trials=4, seed=1))
        high = list(training_channels(3, 30.0, trials=4, seed=1))

        assert all((a.h == b.h).all() for a, b in zip(low, high))
        assert [ch.snr_db for ch in high] == pytest.approx([30.0] * 4)

    def test_small_table_should_have_exhaustive_and_terminal_bins(self) -> None:
        table = build_table(G, l_values=[1], snr_bins=[0, 5], trials=3, seed=5)
        row = table.rows[1]

        assert [(b.snr_lo_db, b.snr_hi_db) for b in row] == [
            (-inf, 0.0),
            (0.0, 5.0),
            (5.0, 10.0),
            (10.0, inf),
        ]
        assert row[0].gamma is None and row[1].gamma is None
        assert 0 < row[2].gamma <= TERMINAL_GAMMA
        assert row[3].gamma == TERMINAL_GAMMA
        assert table.complete
        assert (table.trials, table.rng_seed) == (3, 5)

    def test_same_seed_should_give_the_same_table(self) -> None:
        first = build_table("gaussian", [2], [5], trials=3, seed=11)
        second = build_table("gaussian", [2], [5], trials=3, seed=11)

        assert serialize(first) == serialize(second)

    def test_bins_over_budget_should_be_marked_exhaustive(self) -> None:
        table = build_table(G, [2], [5, 10], trials=10, budget=1.0)

        assert not table.complete
        assert [b.gamma for b in table.rows[2][:3]] == [None, None, None]

    def test_raise_invalid_input_error_for_repeated_edges(self) -> None:
        with pytest.raises(InvalidInputError, match="must be distinct"):
            build_table(G, [2], [5, 5], trials=1)

    def test_raise_invalid_input_error_for_no_trials(self) -> None:
        with pytest.raises(InvalidInputError, match="Trials must be positive"):
            build_table(G, [2], [5], trials=0)


@pytest.mark.integtests
@pytest.mark.slowtests
class TestTrainedThresholds:
    def test_linear_search_should_reach_optimum_on_training_channels(self) -> None:
        table = build_table(G, [3], [10], trials=100, seed=3)
        linear = LinearSearchSelector(G, table)
        ex2 = ExhaustiveTwoSelector(G)
        channels = list(training_channels(3, 10.0, trials=100, seed=3))

        hits = [
            linear.select(ch).rate >= ex2.select(ch).rate - 1e-9 for ch in channels
        ]

        assert all(hits)

    def test_random_regions_should_be_mostly_narrow(self) -> None:
        fraction = gamma_rand_fraction(
            G, users=5, snr_db=20.0, channels=20, samples=50, seed=9
        )

        assert fraction >= 0.6

    @pytest.mark.parametrize(
        "users, expected, tolerance", [(5, 0.28, 0.07), (10, 0.12, 0.05)]
    )
    def test_regenerated_threshold_should_match_published_value(
        self, users: int, expected: float, tolerance: float
    ) -> None:
        table = build_table(G, [users], [20], trials=1000, seed=0)

        assert lookup(table, users, 20.0) == pytest.approx(expected, abs=tolerance)
