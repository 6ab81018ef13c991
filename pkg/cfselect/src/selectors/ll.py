from logging import getLogger

import numpy as np

from cfselect.src.candidates import evaluate_representatives, select_from_keys
from cfselect.src.flops import FlopCounter, charge
from cfselect.src.geometry import AlphaSector, coset_points_in_box, sector_bounding_box
from cfselect.src.models import Channel, SelectionResult
from cfselect.src.rings import ComplexArray, ring_spec
from cfselect.src.selectors.selector import Selector

log = getLogger(__name__)


class LLSelector(Selector):
    """Vertices and edge midpoints of every single-user cell as representatives.

    The cells of user l are enumerated up to |a_l| <= phi, i.e. |alpha| <=
    phi / |h_l|. Crossings of edges of different users are never visited, so the
    optimum can be missed."""

    name = "ll"

    def representatives(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> ComplexArray:
        ch.require_nonzero_gains()
        spec = ring_spec(self.ring)
        offsets = spec.vertex_cosets + spec.edge_midpoint_cosets
        points = []
        for h_l in ch.h:
            sector = AlphaSector(ch.phi / abs(h_l), 0.0, spec.phase_sector)
            found = coset_points_in_box(
                self.ring, complex(h_l), sector_bounding_box(sector), offsets
            )
            charge(counter, adds=found.size, muls=found.size)
            points.append(found)
        return np.concatenate(points)

    def select(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> SelectionResult:
        representatives = self.representatives(ch, counter)
        keys, values = evaluate_representatives(
            ch, self.ring, representatives, counter
        )
        log.debug(
            "L-L: %s representatives, %s vectors.", representatives.size, keys.shape[0]
        )
        return select_from_keys(ch, self.ring, keys, values, self.name, counter)
