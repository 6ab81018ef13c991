from math import log2
from typing import Callable

import numpy as np
import pytest

from cfselect.src.exceptions import BudgetExceededError, InvalidInputError
from cfselect.src.flops import FlopCounter
from cfselect.src.models import Channel
from cfselect.src.rings import RingId
from cfselect.src.selectors.clll import CLLLSelector
from cfselect.src.selectors.exhaustive import (
    ExhaustiveOneSelector,
    ExhaustiveTwoSelector,
)
from cfselect.src.selectors.ll import LLSelector


@pytest.mark.unittests
class TestExhaustiveOneSelector:
    def test_single_user_should_pick_unit_vector(
        self, gaussian_ex1: ExhaustiveOneSelector, unit_channel: Channel
    ) -> None:
        result = gaussian_ex1.select(unit_channel)

        assert str(result.a_opt) == "[1]"
        assert result.rate == pytest.approx(log2(1 + unit_channel.snr))
        assert result.algorithm == "ex1"

    def test_raise_budget_exceeded_error_for_large_search(
        self, figure_channel: Channel
    ) -> None:
        selector = ExhaustiveOneSelector(RingId.GAUSSIAN, budget=100)

        with pytest.raises(BudgetExceededError, match="exceeds the budget"):
            selector.select(figure_channel)

    def test_search_size_should_grow_with_snr(self) -> None:
        selector = ExhaustiveOneSelector(RingId.GAUSSIAN)
        low = Channel.from_snr_db(np.array([1.0, 1.0]), 10.0)
        high = Channel.from_snr_db(np.array([1.0, 1.0]), 20.0)

        assert selector.search_size(high) > selector.search_size(low)


@pytest.mark.unittests
class TestExhaustiveTwoSelector:
    def test_single_user_should_pick_unit_vector(
        self, gaussian_ex2: ExhaustiveTwoSelector, unit_channel: Channel
    ) -> None:
        result = gaussian_ex2.select(unit_channel)

        assert str(result.a_opt) == "[1]"
        assert result.rate == pytest.approx(log2(1 + unit_channel.snr))

    @pytest.mark.parametrize("ring", [RingId.GAUSSIAN, RingId.EISENSTEIN])
    def test_should_match_exhaustive_search_in_the_ball(
        self,
        ring: RingId,
        make_channels: Callable[[int, float, int], list[Channel]],
    ) -> None:
        ex1, ex2 = ExhaustiveOneSelector(ring), ExhaustiveTwoSelector(ring)
        for ch in make_channels(2, 10.0, 30):
            assert ex2.select(ch).rate == pytest.approx(
                ex1.select(ch).rate, rel=1e-9, abs=1e-12
            )

    def test_full_disc_should_give_the_same_rate(
        self,
        gaussian_ex2: ExhaustiveTwoSelector,
        make_channels: Callable[[int, float, int], list[Channel]],
    ) -> None:
        full = ExhaustiveTwoSelector(RingId.GAUSSIAN, full_disc=True)
        for ch in make_channels(3, 15.0, 10):
            assert full.select(ch).rate == pytest.approx(
                gaussian_ex2.select(ch).rate, rel=1e-9
            )

    def test_should_not_lose_to_suboptimal_selectors(
        self,
        gaussian_ex2: ExhaustiveTwoSelector,
        gaussian_ll: LLSelector,
        gaussian_clll: CLLLSelector,
        make_channels: Callable[[int, float, int], list[Channel]],
    ) -> None:
        for ch in make_channels(3, 20.0, 20):
            best = gaussian_ex2.select(ch).rate

            assert best >= gaussian_ll.select(ch).rate - 1e-9
            assert best >= gaussian_clll.select(ch).rate - 1e-9

    def test_flops_should_be_reported(
        self, gaussian_ex2: ExhaustiveTwoSelector, figure_channel: Channel
    ) -> None:
        counter = FlopCounter()
        result = gaussian_ex2.select(figure_channel, counter)

        assert result.flops == counter.total_flops > 0
        assert result.candidates_examined > 0

    def test_flops_should_be_none_without_counter(
        self, gaussian_ex2: ExhaustiveTwoSelector, figure_channel: Channel
    ) -> None:
        assert gaussian_ex2.select(figure_channel).flops is None

    def test_raise_invalid_input_error_for_zero_gain(
        self, gaussian_ex2: ExhaustiveTwoSelector
    ) -> None:
        ch = Channel(np.array([1.0, 0.0]), snr=10.0)

        with pytest.raises(InvalidInputError, match="nonzero"):
            gaussian_ex2.select(ch)


@pytest.mark.integtests
@pytest.mark.slowtests
class TestExhaustiveAgreement:
    @pytest.mark.parametrize("ring", [RingId.GAUSSIAN, RingId.EISENSTEIN])
    @pytest.mark.parametrize(
        "users, snr_db",
        [(2, 5.0), (2, 10.0), (2, 15.0), (3, 5.0), (3, 10.0), (3, 15.0)],
    )
    def test_both_searches_should_agree(
        self,
        ring: RingId,
        users: int,
        snr_db: float,
        make_channels: Callable[[int, float, int], list[Channel]],
    ) -> None:
        ex1 = ExhaustiveOneSelector(ring, budget=1e8)
        ex2 = ExhaustiveTwoSelector(ring)
        for ch in make_channels(users, snr_db, 200):
            assert ex2.select(ch).rate == pytest.approx(
                ex1.select(ch).rate, rel=1e-9, abs=1e-12
            )
