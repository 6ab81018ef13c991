"""Step-size thresholds of the linear search: construction from training channels,
lookup, and a line-oriented text format."""
from dataclasses import dataclass, field
from logging import getLogger
from math import floor, inf, isfinite, log10, sqrt
from typing import Iterator, Sequence

import numpy as np

from cfselect.src.candidates import expected_s1_count, expected_s2_count
from cfselect.src.channels import gen_gains, trial_rng
from cfselect.src.exceptions import (
    CfSelectError,
    InvalidInputError,
    ReductionError,
    ThresholdParseError,
    ThresholdTableMissError,
)
from cfselect.src.geometry import (
    AlphaSector,
    clip_to_disc,
    orbit_square_width,
    random_cell_gamma,
    region_of_vector,
)
from cfselect.src.models import Channel, GammaSample
from cfselect.src.rate import quadratic_forms
from cfselect.src.rings import RingId, ring_spec
from cfselect.src.selectors.exhaustive import ExhaustiveTwoSelector

log = getLogger(__name__)

EXHAUSTIVE_BELOW_DB = 5.0
TERMINAL_GAMMA = 0.707107
DEFAULT_TRIALS = 1000
DEFAULT_TABLE_BUDGET = 5e9
SIGNIFICANT_DIGITS = 6
EXHAUSTIVE_MARKER = "E"


@dataclass(frozen=True)
class ThresholdBin:
    """gamma is None for bins served by the exhaustive search."""

    snr_lo_db: float
    snr_hi_db: float
    gamma: float | None

    def covers(self, snr_db: float) -> bool:
        return self.snr_lo_db <= snr_db < self.snr_hi_db


@dataclass(frozen=True)
class ThresholdTable:
    ring: RingId
    rows: dict[int, tuple[ThresholdBin, ...]]
    trials: int
    rng_seed: int
    complete: bool = field(default=True, compare=False)


def lookup(table: ThresholdTable, users: int, snr_db: float) -> float | None:
    """Threshold for L users at the given SNR; None means use the exhaustive search.

    Raises ThresholdTableMissError when the table has no row for L."""
    if users not in table.rows:
        raise ThresholdTableMissError(
            f"No thresholds for L={users} in the {table.ring.value} table "
            f"(available: {sorted(table.rows)})."
        )
    for threshold_bin in table.rows[users]:
        if threshold_bin.covers(snr_db):
            return threshold_bin.gamma
    return None


def _round_down(value: float) -> float:
    """Largest 6-significant-digit decimal not above value."""
    factor = 10.0 ** (SIGNIFICANT_DIGITS - 1 - floor(log10(value)))
    return floor(value * factor) / factor


def normalised_width(width: float, ch: Channel, ring: RingId) -> float:
    return width / sqrt(ring_spec(ring).fundamental_area / ch.h_max_sq)


def gamma_opt_of(
    ch: Channel,
    ring: RingId,
    channel_id: int = 0,
    selector: ExhaustiveTwoSelector | None = None,
) -> GammaSample:
    """Normalised width of the largest axis-aligned square inside the region of the
    optimal vector, maximised over the unit rotations of that region.

    The region is first cut to the disc |alpha|^2 <= SNR*a^H M a: the linear search
    evaluates every sample of that disc before its stopping rule can fire, so a
    grid finer than the square always lands on the optimum."""
    selector = selector or ExhaustiveTwoSelector(ring)
    a_opt = selector.select(ch).a_opt
    region = region_of_vector(
        ring, ch, a_opt, AlphaSector.for_channel(ring, ch, full_disc=True)
    )
    if region is None:
        raise ReductionError(f"The optimal vector {a_opt} owns no alpha region.")
    quadratic = float(quadratic_forms(ch, a_opt.as_complex()[None, :])[0])
    reachable = clip_to_disc(region, sqrt(ch.snr * quadratic))
    if reachable is None:
        log.debug("Region of %s lies outside the reachable disc.", a_opt)
        reachable = region
    gamma = normalised_width(orbit_square_width(reachable, ring), ch, ring)
    return GammaSample(gamma_opt=min(gamma, 1.0), channel_id=channel_id)


def training_channels(
    users: int, snr_db: float, trials: int, seed: int
) -> Iterator[Channel]:
    """Channels used to build a row; trial t draws its gains from the stream
    (seed, t, L), so every SNR bin of a row sees the same gains."""
    for trial in range(trials):
        gains = gen_gains(users, trial_rng(seed, trial, users))
        yield Channel.from_snr_db(gains, snr_db)


def repair_monotonicity(
    bins: Sequence[ThresholdBin],
) -> tuple[tuple[ThresholdBin, ...], bool]:
    """Makes gamma non-decreasing with SNR by lowering earlier bins."""
    repaired = list(bins)
    changed = False
    ceiling = inf
    for index in range(len(repaired) - 1, -1, -1):
        threshold_bin = repaired[index]
        if threshold_bin.gamma is None:
            continue
        if threshold_bin.gamma > ceiling:
            repaired[index] = ThresholdBin(
                threshold_bin.snr_lo_db, threshold_bin.snr_hi_db, ceiling
            )
            changed = True
        ceiling = min(ceiling, repaired[index].gamma or ceiling)
    return tuple(repaired), changed


def _bin_edges(snr_bins: Sequence[float]) -> list[tuple[float, float]]:
    edges = sorted(float(edge) for edge in snr_bins)
    if not edges or len(set(edges)) != len(edges):
        raise InvalidInputError(f"SNR bin edges must be distinct: {snr_bins}.")
    width = edges[-1] - edges[-2] if len(edges) > 1 else 5.0
    return list(zip(edges, edges[1:] + [edges[-1] + width]))


def build_table(
    ring: RingId,
    l_values: Sequence[int],
    snr_bins: Sequence[float],
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    budget: float = DEFAULT_TABLE_BUDGET,
) -> ThresholdTable:
    """Builds the threshold table from training channels.

    Args:
        ring: coefficient ring.
        l_values: numbers of users, one row each.
        snr_bins: lower edges of the finite SNR bins in dB; the last bin gets the
            width of the one before it.
        trials: training channels per bin, drawn at the bin's lower edge.
        seed: seed of the training channels.
        budget: bound on trials times the expected number of representatives of
            one exhaustive pass; bins above it are served by the exhaustive search.

    Returns: the table; `complete` is False when some bin hit the budget."""
    if trials < 1:
        raise InvalidInputError(f"Trials must be positive, got {trials}.")
    ring = RingId.parse(ring)
    selector = ExhaustiveTwoSelector(ring)
    complete = True
    rows: dict[int, tuple[ThresholdBin, ...]] = {}
    for users in sorted(set(l_values)):
        edges = _bin_edges(snr_bins)
        bins = [ThresholdBin(-inf, edges[0][0], None)]
        for snr_lo, snr_hi in edges:
            snr = 10 ** (snr_lo / 10)
            if snr_lo < EXHAUSTIVE_BELOW_DB:
                bins.append(ThresholdBin(snr_lo, snr_hi, None))
                continue
            work = expected_s1_count(ring, users, snr) + expected_s2_count(
                ring, users, snr
            )
            if trials * work > budget:
                log.warning(
                    "Bin [%s, %s) dB for L=%s exceeds the budget; marked exhaustive.",
                    snr_lo,
                    snr_hi,
                    users,
                )
                complete = False
                bins.append(ThresholdBin(snr_lo, snr_hi, None))
                continue

            gammas = []
            for trial, ch in enumerate(training_channels(users, snr_lo, trials, seed)):
                try:
                    gammas.append(gamma_opt_of(ch, ring, trial, selector).gamma_opt)
                except CfSelectError:
                    log.exception("Skipping training channel %s of L=%s.", trial, users)
            gamma = _round_down(min(gammas)) if gammas else None
            bins.append(ThresholdBin(snr_lo, snr_hi, gamma))
            log.debug("L=%s, [%s, %s) dB: gamma=%s.", users, snr_lo, snr_hi, gamma)

        bins.append(ThresholdBin(edges[-1][1], inf, TERMINAL_GAMMA))
        repaired, changed = repair_monotonicity(bins)
        if changed:
            log.warning("Thresholds of L=%s were lowered to keep them monotone.", users)
        rows[users] = repaired

    log.info("Threshold table for %s built over %s trials.", ring.value, trials)
    return ThresholdTable(ring, rows, trials, seed, complete)


def gamma_rand_fraction(
    ring: RingId,
    users: int,
    snr_db: float,
    channels: int,
    samples: int,
    seed: int = 0,
    bound: float = 0.47,
) -> float:
    """Share of regions hit by random alpha whose normalised square width is at
    most `bound`."""
    gammas = [
        random_cell_gamma(
            Channel.from_snr_db(gen_gains(users, trial_rng(seed, trial)), snr_db),
            ring,
            samples,
            trial_rng(seed, trial, 1),
        )
        for trial in range(channels)
    ]
    pooled = np.concatenate(gammas)
    if pooled.size == 0:
        return 0.0
    return float(np.mean(pooled <= bound))


_PUBLISHED_ROWS = {
    RingId.GAUSSIAN: {
        5: (0.09, 0.12, 0.21, 0.28, 0.33, 0.39, 0.44),
        8: (0.05, 0.07, 0.13, 0.16, 0.25, 0.32, 0.38),
        10: (0.05, 0.06, 0.10, 0.12, 0.17, 0.22, 0.29),
    },
    RingId.EISENSTEIN: {
        5: (0.10, 0.12, 0.20, 0.29, 0.33, 0.40, 0.44),
        8: (0.05, 0.08, 0.11, 0.16, 0.24, 0.32, 0.37),
        10: (0.05, 0.06, 0.09, 0.13, 0.18, 0.23, 0.28),
    },
}


def published_table(ring: RingId) -> ThresholdTable:
    """The published thresholds for L in {5, 8, 10} and 5 dB bins from 5 to 40 dB."""
    rows = {}
    for users, gammas in _PUBLISHED_ROWS[RingId.parse(ring)].items():
        bins = [ThresholdBin(-inf, 5.0, None)]
        bins += [
            ThresholdBin(5.0 * (index + 1), 5.0 * (index + 2), gamma)
            for index, gamma in enumerate(gammas)
        ]
        bins.append(ThresholdBin(40.0, inf, 0.71))
        rows[users] = tuple(bins)
    return ThresholdTable(RingId.parse(ring), rows, DEFAULT_TRIALS, 0)


def _format_number(value: float) -> str:
    if not isfinite(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def serialize(table: ThresholdTable) -> str:
    lines = [f"{table.ring.value},{len(table.rows)},{table.trials},{table.rng_seed}"]
    for users in sorted(table.rows):
        for threshold_bin in table.rows[users]:
            gamma = (
                EXHAUSTIVE_MARKER
                if threshold_bin.gamma is None
                else _format_number(threshold_bin.gamma)
            )
            lines.append(
                f"{users},{_format_number(threshold_bin.snr_lo_db)},"
                f"{_format_number(threshold_bin.snr_hi_db)},{gamma}"
            )
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> tuple[RingId, int, int, int]:
    fields = line.strip().split(",")
    if len(fields) != 4:
        raise ThresholdParseError(1, "expected header 'ring,L_count,trials,seed'.")
    try:
        ring = RingId.parse(fields[0])
        l_count, trials, seed = (int(value) for value in fields[1:])
    except ValueError as exc:
        raise ThresholdParseError(1, f"invalid header: {exc}") from exc
    if trials < 1 or l_count < 1:
        raise ThresholdParseError(1, "L_count and trials must be positive.")
    return ring, l_count, trials, seed


def _parse_row(line_number: int, line: str) -> tuple[int, ThresholdBin]:
    fields = line.strip().split(",")
    if len(fields) != 4:
        raise ThresholdParseError(
            line_number, "expected 'L,snr_lo_db,snr_hi_db,gamma'."
        )
    try:
        users = int(fields[0])
        snr_lo, snr_hi = float(fields[1]), float(fields[2])
        gamma = None if fields[3] == EXHAUSTIVE_MARKER else float(fields[3])
    except ValueError as exc:
        raise ThresholdParseError(line_number, f"invalid value: {exc}") from exc
    if users < 1:
        raise ThresholdParseError(line_number, f"L must be positive, got {users}.")
    if not snr_lo < snr_hi:
        raise ThresholdParseError(line_number, f"empty bin [{snr_lo}, {snr_hi}).")
    if gamma is not None and not 0 < gamma <= 1:
        raise ThresholdParseError(line_number, f"gamma {gamma} is outside (0, 1].")
    return users, ThresholdBin(snr_lo, snr_hi, gamma)


def parse(text: str) -> ThresholdTable:
    """Parses the text written by serialize. Raises ThresholdParseError with the
    1-based line number of the first problem."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ThresholdParseError(1, "missing header.")
    ring, l_count, trials, seed = _parse_header(lines[0])

    rows: dict[int, list[ThresholdBin]] = {}
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        users, threshold_bin = _parse_row(line_number, line)
        row = rows.setdefault(users, [])
        if row:
            previous = row[-1]
            if threshold_bin.snr_lo_db < previous.snr_hi_db:
                raise ThresholdParseError(line_number, "overlapping SNR bins.")
            if threshold_bin.snr_lo_db > previous.snr_hi_db:
                raise ThresholdParseError(line_number, "gap between SNR bins.")
            earlier = [b.gamma for b in row if b.gamma is not None]
            if (
                threshold_bin.gamma is not None
                and earlier
                and threshold_bin.gamma < max(earlier)
            ):
                raise ThresholdParseError(line_number, "gamma decreases with SNR.")
        row.append(threshold_bin)

    if len(rows) != l_count:
        raise ThresholdParseError(
            1, f"header announces {l_count} rows of L, found {len(rows)}."
        )
    return ThresholdTable(
        ring, {users: tuple(row) for users, row in rows.items()}, trials, seed
    )
