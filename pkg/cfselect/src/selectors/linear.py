from functools import lru_cache
from itertools import count as naturals
from logging import getLogger
from math import floor, pi, sqrt

import numpy as np

from cfselect.src.exceptions import ThresholdTableMissError
from cfselect.src.flops import FlopCounter, charge
from cfselect.src.models import Channel, CoeffVector, SelectionResult
from cfselect.src.rate import charge_quadratic_forms, quadratic_forms, rate_of_pair
from cfselect.src.rings import (
    FloatArray,
    IntArray,
    RingId,
    embed,
    quantize_array,
    ring_spec,
)
from cfselect.src.selectors.exhaustive import ExhaustiveTwoSelector
from cfselect.src.selectors.selector import Selector
from cfselect.src.thresholds import ThresholdTable, lookup

log = getLogger(__name__)


def _isqrt(values: IntArray) -> IntArray:
    """Elementwise integer square root of nonnegative integers."""
    roots = np.floor(np.sqrt(values.astype(np.float64))).astype(np.int64)
    roots -= (roots * roots > values).astype(np.int64)
    roots += ((roots + 1) * (roots + 1) <= values).astype(np.int64)
    return roots


def _in_sampling_sector(ring: RingId, k1: IntArray, k2: IntArray) -> np.ndarray:
    if ring_spec(ring).sampling_sector < pi:
        return (k1 > 0) & (k2 >= 0)
    return (k2 > 0) | ((k2 == 0) & (k1 > 0))


@lru_cache(maxsize=4096)
def sample_ring(ring: RingId, index: int) -> tuple[IntArray, IntArray]:
    """Integer grid points k1 + k2*i of the sampling sector with
    index <= |k1 + k2*i| < index + 1, sorted by norm and then by phase.

    The rings do not depend on the step size, so a ring built for one channel
    serves every later one."""
    low, high = index * index, (index + 1) * (index + 1)
    k1 = np.arange(-index, index + 1, dtype=np.int64)
    rest_low = low - k1 * k1
    start = np.where(
        rest_low > 0, _isqrt(np.maximum(rest_low - 1, 0)) + 1, 0
    ).astype(np.int64)
    stop = _isqrt(high - 1 - k1 * k1)
    counts = np.maximum(stop - start + 1, 0)
    first = np.cumsum(counts) - counts
    k1 = np.repeat(k1, counts)
    k2 = np.repeat(start, counts) + np.arange(k1.size) - np.repeat(first, counts)
    inside = _in_sampling_sector(ring, k1, k2)
    k1, k2 = k1[inside], k2[inside]
    order = np.lexsort((np.arctan2(k2, k1), k1 * k1 + k2 * k2))
    result = k1[order], k2[order]
    for array in result:
        array.setflags(write=False)
    return result


def sector_sample_count(ring: RingId, span: float) -> int:
    """Number of grid points of the sampling sector with |k1|, |k2| <= span.

    Samples of that box outside the disc of radius span are never visited: the
    stopping rule fires before |alpha|^2 reaches SNR*a^H M a < SNR."""
    reach = floor(span) if span >= 0 else 0
    if ring_spec(ring).sampling_sector < pi:
        return reach * (reach + 1)
    return 2 * reach * (reach + 1)


def _interleave(c1: IntArray, c2: IntArray) -> IntArray:
    keys = np.empty((c1.shape[0], 2 * c1.shape[1]), dtype=np.int64)
    keys[:, 0::2] = c1
    keys[:, 1::2] = c2
    return keys


class LinearSearchSelector(Selector):
    """Scans alpha = step*(k1 + k2*i) by increasing modulus and keeps the
    coefficient vector with the smallest effective noise P*a^H M a among those
    the samples quantize to.

    The step is gamma*sqrt(A0/|h_max|^2), gamma read from the threshold table. The
    scan stops at the first sample whose scaled Gaussian noise |alpha|^2*sigma2
    reaches the best effective noise found so far. Bins marked exhaustive and scans
    without a nonzero quantization are delegated to the fallback."""

    name = "linear"

    def __init__(
        self,
        ring: RingId | str,
        table: ThresholdTable,
        fallback: Selector | None = None,
        trace: list[tuple[complex, float]] | None = None,
    ) -> None:
        super().__init__(ring)
        self.table = table
        self.fallback = fallback or ExhaustiveTwoSelector(self.ring)
        self.trace = trace

    def step_size(self, ch: Channel) -> float | None:
        if self.table.ring is not self.ring:
            raise ThresholdTableMissError(
                f"Threshold table is for {self.table.ring.value}, "
                f"not {self.ring.value}."
            )
        gamma = lookup(self.table, ch.users, ch.snr_db)
        if gamma is None:
            return None
        return gamma * sqrt(ring_spec(self.ring).fundamental_area / ch.h_max_sq)

    def sample_count(self, ch: Channel) -> int | None:
        """Size of the sample pool over the range |Re alpha|, |Im alpha| <= sqrt(SNR),
        or None for an exhaustive bin."""
        step = self.step_size(ch)
        if step is None:
            return None
        return sector_sample_count(self.ring, sqrt(ch.snr) / step)

    def _delegate(
        self, ch: Channel, counter: FlopCounter | None, reason: str
    ) -> SelectionResult:
        log.debug("Linear search delegated to %s: %s", self.fallback.name, reason)
        result = self.fallback.select(ch, counter)
        return SelectionResult(
            a_opt=result.a_opt,
            rate=result.rate,
            alpha=result.alpha,
            candidates_examined=result.candidates_examined,
            flops=result.flops,
            algorithm=self.name,
        )

    def _score_rows(
        self, ch: Channel, rows: IntArray, scores: dict[bytes, float]
    ) -> tuple[FloatArray, np.ndarray]:
        """Effective noise P*a^H M a of distinct rows, looked up in `scores` when
        already known. Zero rows score inf.

        Returns: (values, mask of the rows evaluated here)."""
        values = np.full(rows.shape[0], np.inf)
        fresh = np.any(rows != 0, axis=1)
        for index in np.flatnonzero(fresh):
            known = scores.get(rows[index].tobytes())
            if known is not None:
                values[index], fresh[index] = known, False
        if fresh.any():
            block = rows[fresh]
            coeffs = embed(self.ring, block[:, 0::2], block[:, 1::2])
            values[fresh] = ch.power_p * quadratic_forms(ch, coeffs)
        return values, fresh

    def select(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> SelectionResult:
        step = self.step_size(ch)
        if step is None:
            return self._delegate(ch, counter, "exhaustive bin.")

        radius = sqrt(ch.snr)
        scores: dict[bytes, float] = {}
        best_value, best_key = np.inf, None
        evaluated = 0
        for index in naturals():
            if index * step > radius:
                break
            k1, k2 = sample_ring(self.ring, index)
            alphas = step * (k1 + 1j * k2)
            alphas = alphas[np.abs(alphas) <= radius]
            if alphas.size == 0:
                continue

            keys = _interleave(*quantize_array(self.ring, alphas[:, None] * ch.h))
            rows, first, inverse = np.unique(
                keys, axis=0, return_index=True, return_inverse=True
            )
            row_values, fresh = self._score_rows(ch, rows, scores)
            values = row_values[inverse.ravel()]
            floor_noise = np.abs(alphas) ** 2 * ch.sigma2
            running = np.minimum.accumulate(np.concatenate([[best_value], values]))
            stops = np.flatnonzero(floor_noise >= running[:-1])
            taken = int(stops[0]) if stops.size else alphas.size

            scored = fresh & (first < taken)
            charge(counter, muls=taken * (ch.users + 1))
            charge_quadratic_forms(counter, int(scored.sum()), ch.users)
            for row, value in zip(rows[scored], row_values[scored]):
                scores[row.tobytes()] = float(value)
            if self.trace is not None:
                self.trace.extend(
                    (complex(alpha), float(value))
                    for alpha, value in zip(alphas[:taken], values[:taken])
                )
            evaluated += taken
            if taken and values[:taken].min() < best_value:
                position = int(np.argmin(values[:taken]))
                best_value, best_key = float(values[position]), keys[position]
            if taken < alphas.size:
                break

        log.debug(
            "Linear search: step %.4g, %s of %s samples evaluated, %s vectors.",
            step,
            evaluated,
            sector_sample_count(self.ring, radius / step),
            len(scores),
        )
        if best_key is None:
            return self._delegate(ch, counter, "every sample quantizes to zero.")

        a_opt = CoeffVector.from_key(self.ring, best_key)
        evaluation = rate_of_pair(ch, a_opt)
        return SelectionResult(
            a_opt=a_opt,
            rate=evaluation.rate,
            alpha=evaluation.alpha,
            candidates_examined=evaluated,
            flops=counter.total_flops if counter is not None else None,
            algorithm=self.name,
        )
