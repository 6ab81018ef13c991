from logging import getLogger

import numpy as np

from cfselect.src.candidates import (
    build_candidates,
    completion_radius_sq,
    enumerate_ball,
    evaluate_keys,
    evaluate_representatives,
    select_from_keys,
    unit_vector_keys,
)
from cfselect.src.exceptions import BudgetExceededError
from cfselect.src.flops import FlopCounter
from cfselect.src.models import CandidateSet, Channel, SelectionResult
from cfselect.src.rings import RingId
from cfselect.src.selectors.selector import Selector

log = getLogger(__name__)

DEFAULT_BUDGET = 1e8


class ExhaustiveOneSelector(Selector):
    """Evaluates every vector inside the ball ||a|| <= sqrt(1 + SNR*||h||^2)."""

    name = "ex1"

    def __init__(self, ring: RingId | str, budget: float = DEFAULT_BUDGET) -> None:
        super().__init__(ring)
        self.budget = budget

    def search_size(self, ch: Channel) -> float:
        """L * phi^(2L), the size estimate compared with the budget."""
        return ch.users * ch.phi ** (2 * ch.users)

    def select(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> SelectionResult:
        size = self.search_size(ch)
        if size > self.budget:
            raise BudgetExceededError(
                f"Exhaustive search over {size:.3g} vectors exceeds the budget "
                f"of {self.budget:.3g} (L={ch.users}, SNR={ch.snr_db:.2f} dB)."
            )
        keys = enumerate_ball(self.ring, ch.users, ch.phi**2)
        values = evaluate_keys(ch, self.ring, keys, counter)
        log.debug("Exhaustive-I evaluated %s vectors.", keys.shape[0])
        return select_from_keys(ch, self.ring, keys, values, self.name, counter)


class ExhaustiveTwoSelector(Selector):
    """Evaluates the vectors owning a region of the alpha plane.

    Every region of alpha with a common quantization Q(alpha*h) is a convex
    polygon; quantizing each of its vertices with the full-direction quantizer
    recovers its vector. The unit vectors are always evaluated, and vectors whose
    MMSE scaling quantizes to zero are covered by a small norm-bounded search."""

    name = "ex2"

    def __init__(self, ring: RingId | str, full_disc: bool = False) -> None:
        super().__init__(ring)
        self.full_disc = full_disc

    def candidates(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> CandidateSet:
        return build_candidates(ch, self.ring, counter, self.full_disc)

    def select(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> SelectionResult:
        representatives = self.candidates(ch, counter).representatives()
        keys, values = evaluate_representatives(
            ch, self.ring, representatives, counter, unit_vector_keys(ch.users)
        )

        radius_sq = completion_radius_sq(ch, self.ring, float(values.min()))
        extra = enumerate_ball(self.ring, ch.users, radius_sq)
        if extra.shape[0]:
            keys = np.concatenate([keys, extra])
            values = np.concatenate(
                [values, evaluate_keys(ch, self.ring, extra, counter)]
            )
        log.debug(
            "Exhaustive-II: %s representatives, %s vectors (%s from the norm bound).",
            representatives.size,
            keys.shape[0],
            extra.shape[0],
        )
        return select_from_keys(ch, self.ring, keys, values, self.name, counter)
