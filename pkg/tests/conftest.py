# pylint: disable=redefined-outer-name

from math import inf, sqrt
from typing import Callable

import numpy as np
from pytest import fixture

from cfselect.src.channels import gen_channel, trial_rng
from cfselect.src.models import Channel
from cfselect.src.rings import RingId
from cfselect.src.selectors.clll import CLLLSelector
from cfselect.src.selectors.exhaustive import (
    ExhaustiveOneSelector,
    ExhaustiveTwoSelector,
)
from cfselect.src.selectors.ll import LLSelector
from cfselect.src.thresholds import ThresholdBin, ThresholdTable

SEED: int = 2024
RINGS: tuple[RingId, ...] = (RingId.GAUSSIAN, RingId.EISENSTEIN)
FIGURE_CHANNEL: tuple[complex, ...] = (1.0 + 0j, (1 + 1j) / sqrt(2))


@fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@fixture(scope="session")
def figure_channel() -> Channel:
    """Two users, h = [1, (1+i)/sqrt(2)], at 20 dB."""
    return Channel.from_snr_db(np.array(FIGURE_CHANNEL), 20.0)


@fixture(scope="session")
def unit_channel() -> Channel:
    return Channel.from_snr_db(np.array([1.0 + 0j]), 10.0)


@fixture(scope="session")
def make_channels() -> Callable[[int, float, int], list[Channel]]:
    """Returns a factory of seeded CN(0, 1) channels."""

    def factory(users: int, snr_db: float, count: int) -> list[Channel]:
        return [
            gen_channel(users, trial_rng(SEED, trial), snr_db) for trial in range(count)
        ]

    return factory


@fixture(scope="session")
def gaussian_ex1() -> ExhaustiveOneSelector:
    return ExhaustiveOneSelector(RingId.GAUSSIAN)


@fixture(scope="session")
def gaussian_ex2() -> ExhaustiveTwoSelector:
    return ExhaustiveTwoSelector(RingId.GAUSSIAN)


@fixture(scope="session")
def gaussian_ll() -> LLSelector:
    return LLSelector(RingId.GAUSSIAN)


@fixture(scope="session")
def gaussian_clll() -> CLLLSelector:
    return CLLLSelector(RingId.GAUSSIAN)


@fixture(scope="session")
def single_bin_table() -> ThresholdTable:
    """Gaussian table with one bin covering every SNR for L = 1 and L = 2."""
    row = (ThresholdBin(-inf, inf, 0.5),)
    return ThresholdTable(RingId.GAUSSIAN, {1: row, 2: row}, trials=1, rng_seed=0)


@fixture(scope="session")
def exhaustive_only_table() -> ThresholdTable:
    return ThresholdTable(
        RingId.GAUSSIAN, {2: (ThresholdBin(-inf, inf, None),)}, trials=1, rng_seed=0
    )
