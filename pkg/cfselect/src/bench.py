"""Monte Carlo experiments over seeded Rayleigh channels: mean rates, flop counts and
the growth of the candidate sets."""
import csv
from dataclasses import dataclass
from logging import getLogger
from math import log as math_log
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from cfselect.selector_constructor import create_selector
from cfselect.src.candidates import expected_s1_count, expected_s2_count
from cfselect.src.channels import gen_channel, gen_gains, trial_rng
from cfselect.src.exceptions import (
    BudgetExceededError,
    ConfigError,
    ThresholdTableMissError,
)
from cfselect.src.flops import FlopCounter
from cfselect.src.models import Channel, ExperimentConfig, ResultRow, SelectionResult
from cfselect.src.rings import RingId, ring_spec
from cfselect.src.selectors.exhaustive import ExhaustiveTwoSelector
from cfselect.src.selectors.linear import LinearSearchSelector
from cfselect.src.selectors.selector import Selector
from cfselect.src.thresholds import ThresholdTable, lookup, parse, published_table

__all__ = [
    "CSV_HEADER",
    "ScalingReport",
    "expected_linear_candidates",
    "expected_s1_count",
    "expected_s2_count",
    "gen_channel",
    "hmax_bound",
    "hmax_mean",
    "load_table",
    "run_complexity_experiment",
    "run_rate_experiment",
    "scaling_check",
    "trial_rng",
    "write_csv",
]

log = getLogger(__name__)

CSV_HEADER = (
    "snr_db",
    "algorithm",
    "mean_rate",
    "rate_std",
    "mean_flops",
    "mean_candidates",
    "trials",
)
MIN_SCALING_DECADES = 2.0


def load_table(config: ExperimentConfig) -> ThresholdTable:
    """Table named by the config, or the published one for its ring."""
    if config.table_path is None:
        log.info("No threshold table given, using the published one.")
        return published_table(config.ring)
    return parse(Path(config.table_path).read_text(encoding="utf-8"))


def _selectors(
    config: ExperimentConfig, table: ThresholdTable | None
) -> dict[str, Selector]:
    selectors = {}
    for name in config.algorithms:
        kwargs: dict[str, object] = {}
        if name == "ex1":
            kwargs["budget"] = config.budget
        if name == "linear":
            kwargs["table"] = table if table is not None else load_table(config)
        selectors[name] = create_selector(name, config.ring, **kwargs)
    return selectors


def _select(
    selector: Selector, trial: int, ch: Channel, counter: FlopCounter | None = None
) -> SelectionResult:
    try:
        return selector.select(ch, counter)
    except (BudgetExceededError, ThresholdTableMissError) as exc:
        raise type(exc)(f"Trial {trial}: {exc}") from exc


def _run(config: ExperimentConfig, table: ThresholdTable | None) -> list[ResultRow]:
    selectors = _selectors(config, table)
    rows = []
    for snr_db in config.snr_points_db:
        rates = {name: np.empty(config.trials) for name in selectors}
        flops = {name: np.zeros(config.trials) for name in selectors}
        examined = {name: np.empty(config.trials) for name in selectors}
        for trial in range(config.trials):
            ch = gen_channel(config.users, trial_rng(config.seed, trial), snr_db)
            for name, selector in selectors.items():
                counter = FlopCounter() if config.count_flops else None
                result = _select(selector, trial, ch, counter)
                rates[name][trial] = result.rate
                examined[name][trial] = result.candidates_examined
                if counter is not None:
                    flops[name][trial] = counter.total_flops
        for name in selectors:
            rows.append(
                ResultRow(
                    snr_db=float(snr_db),
                    algorithm=name,
                    mean_rate=float(np.mean(rates[name])),
                    rate_std=float(np.std(rates[name])),
                    mean_flops=float(np.mean(flops[name])),
                    mean_candidates=float(np.mean(examined[name])),
                    trials=config.trials,
                )
            )
        log.debug("SNR %s dB finished for %s.", snr_db, ", ".join(selectors))
    return rows


def run_rate_experiment(
    config: ExperimentConfig, table: ThresholdTable | None = None
) -> list[ResultRow]:
    """Mean and spread of the rate of every algorithm.

    Trial t uses the channel drawn from the stream (seed, t) at every SNR point and
    for every algorithm, so the comparisons are paired."""
    rows = _run(config, table)
    log.info(
        "Rate experiment finished: %s users, %s trials, %s SNR points.",
        config.users,
        config.trials,
        len(config.snr_points_db),
    )
    return rows


def run_complexity_experiment(
    config: ExperimentConfig, table: ThresholdTable | None = None
) -> list[ResultRow]:
    if not config.count_flops:
        raise ConfigError("The complexity experiment requires count_flops=True.")
    rows = _run(config, table)
    log.info("Complexity experiment finished over %s trials.", config.trials)
    return rows


def write_csv(rows: Iterable[ResultRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        values = row.as_dict()
        writer.writerow(
            [
                values[column]
                if isinstance(values[column], (str, int))
                else f"{values[column]:.10g}"
                for column in CSV_HEADER
            ]
        )


def hmax_bound(users: int) -> float:
    """Upper bound 4*log(L)/(1 - 1/L) on E[|h_max|^2] for i.i.d. CN(0, 1) gains."""
    if users < 2:
        raise ConfigError(f"The bound needs at least two users, got {users}.")
    return 4 * math_log(users) / (1 - 1 / users)


def hmax_mean(users: int, draws: int, seed: int = 0) -> float:
    gains = gen_gains(users * draws, trial_rng(seed, 0)).reshape(draws, users)
    return float(np.mean(np.max(np.abs(gains) ** 2, axis=1)))


def expected_linear_candidates(
    ring: RingId, snr: float, gamma: float, mean_hmax_sq: float
) -> float:
    """SNR / E[step^2]: the grid points of a valid range of area SNR."""
    return snr * mean_hmax_sq / (gamma**2 * ring_spec(ring).fundamental_area)


@dataclass(frozen=True)
class ScalingReport:
    """Mean counts per SNR point and their fitted log-log slopes.

    Linear-search samples are the grid points of the sampling sector inside the
    range |Re alpha|, |Im alpha| <= sqrt(SNR); `linear_examined` holds the samples
    actually visited before the stopping rule fired. The fit over L uses the
    scalar quantizations of the Exhaustive-II candidates, representatives times L."""

    snr_db: tuple[float, ...]
    ex2_representatives: tuple[float, ...] | None = None
    ex2_snr_slope: float | None = None
    expected_representatives: tuple[float, ...] | None = None
    linear_samples: tuple[float, ...] | None = None
    linear_snr_slope: float | None = None
    expected_linear_samples: tuple[float, ...] | None = None
    linear_examined: tuple[float, ...] | None = None
    l_values: tuple[int, ...] = ()
    ex2_quantizations_by_l: tuple[float, ...] = ()
    ex2_l_slope: float | None = None


def _slope(x: Iterable[float], y: Iterable[float]) -> float:
    slope, _ = np.polyfit(np.log10(list(x)), np.log10(list(y)), 1)
    return float(slope)


def _linear_pool(
    linear: LinearSearchSelector, ch: Channel, trial: int
) -> tuple[int, float]:
    samples = linear.sample_count(ch)
    if samples is None:
        raise ConfigError(
            f"Trial {trial}: the linear search is exhaustive at {ch.snr_db:g} dB "
            f"for L={ch.users}, it has no sample grid."
        )
    return samples, _select(linear, trial, ch).candidates_examined


def scaling_check(
    config: ExperimentConfig,
    l_values: Iterable[int] = (),
    table: ThresholdTable | None = None,
) -> ScalingReport:
    """Log-log slopes of the candidate counts against SNR and of the Exhaustive-II
    candidate work against L.

    Args:
        config: ring, users, SNR grid, trials and seed; `ex2` and `linear` in its
            algorithms select the SNR regressions to run.
        l_values: numbers of users for the regression over L at the highest SNR.
        table: thresholds of the linear search.

    Returns: ScalingReport with the mean counts and the fitted slopes."""
    snrs = sorted(config.snr_points_db)
    if len(snrs) < 2 or (snrs[-1] - snrs[0]) / 10 < MIN_SCALING_DECADES:
        raise ConfigError(
            f"The SNR grid must span {MIN_SCALING_DECADES:g} decades, got {snrs} dB."
        )
    with_ex2 = "ex2" in config.algorithms
    with_linear = "linear" in config.algorithms
    if not (with_ex2 or with_linear):
        raise ConfigError(
            "The scaling check needs ex2 or linear among the algorithms."
        )
    ex2 = ExhaustiveTwoSelector(config.ring)
    linear = None
    if with_linear:
        linear = LinearSearchSelector(
            config.ring, table if table is not None else load_table(config)
        )

    representatives, samples, examined, expected = [], [], [], []
    for snr_db in snrs:
        counts, pool, visited, hmax_sq = [], [], [], []
        for trial in range(config.trials):
            ch = gen_channel(config.users, trial_rng(config.seed, trial), snr_db)
            if with_ex2:
                counts.append(len(ex2.candidates(ch)))
            if linear is not None:
                size, seen = _linear_pool(linear, ch, trial)
                pool.append(size)
                visited.append(seen)
                hmax_sq.append(ch.h_max_sq)
        representatives.append(float(np.mean(counts)) if with_ex2 else 0.0)
        if linear is not None:
            samples.append(float(np.mean(pool)))
            examined.append(float(np.mean(visited)))
            gamma = lookup(linear.table, config.users, snr_db)
            expected.append(
                expected_linear_candidates(
                    config.ring, 10 ** (snr_db / 10), gamma, float(np.mean(hmax_sq))
                )
            )

    user_counts = tuple(sorted(set(l_values)))
    quantizations = []
    for users in user_counts:
        work = []
        for trial in range(config.trials):
            ch = gen_channel(users, trial_rng(config.seed, trial), snrs[-1])
            work.append(users * len(ex2.candidates(ch)))
        quantizations.append(float(np.mean(work)))

    snr_linear = [10 ** (snr / 10) for snr in snrs]
    report = ScalingReport(
        snr_db=tuple(snrs),
        ex2_representatives=tuple(representatives) if with_ex2 else None,
        ex2_snr_slope=_slope(snr_linear, representatives) if with_ex2 else None,
        expected_representatives=(
            tuple(
                expected_s1_count(config.ring, config.users, snr)
                + expected_s2_count(config.ring, config.users, snr)
                for snr in snr_linear
            )
            if with_ex2
            else None
        ),
        linear_samples=tuple(samples) if linear is not None else None,
        linear_snr_slope=_slope(snr_linear, samples) if linear is not None else None,
        expected_linear_samples=tuple(expected) if linear is not None else None,
        linear_examined=tuple(examined) if linear is not None else None,
        l_values=user_counts,
        ex2_quantizations_by_l=tuple(quantizations),
        ex2_l_slope=(
            _slope(user_counts, quantizations) if len(user_counts) > 1 else None
        ),
    )
    log.info(
        "Scaling check: slopes over SNR ex2 %s, linear %s; over L %s.",
        report.ex2_snr_slope,
        report.linear_snr_slope,
        report.ex2_l_slope,
    )
    return report
