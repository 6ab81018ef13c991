"""Representatives of the alpha-plane regions and the evaluation of the candidate
coefficient vectors they induce."""
from logging import getLogger
from math import comb

import numpy as np
import numpy.typing as npt

from cfselect.src.exceptions import ReductionError
from cfselect.src.flops import FlopCounter, charge
from cfselect.src.geometry import (
    AlphaSector,
    Box,
    box_side_crossings,
    coset_points_in_box,
    edge_line_families,
    family_crossings,
    on_cell_edge,
    sector_bounding_box,
)
from cfselect.src.models import CandidateSet, Channel, CoeffVector, SelectionResult
from cfselect.src.rate import quadratic_forms, rate_of_pair
from cfselect.src.rings import (
    ComplexArray,
    FloatArray,
    IntArray,
    RingId,
    ball_points,
    embed,
    full_quantize_mask,
    orbit_representative_mask,
    ring_spec,
)

log = getLogger(__name__)

CHUNK_ELEMENTS = 400_000
TIE_TOLERANCE = 1e-12


def valid_range(ring: RingId, ch: Channel, full_disc: bool = False) -> Box:
    return sector_bounding_box(AlphaSector.for_channel(ring, ch, full_disc))


def _empty() -> ComplexArray:
    return np.empty(0, dtype=np.complex128)


def build_candidates(
    ch: Channel,
    ring: RingId,
    counter: FlopCounter | None = None,
    full_disc: bool = False,
) -> CandidateSet:
    """Collects the alpha representatives of every region meeting the valid range.

    Args:
        ch: the channel; every gain must be nonzero.
        ring: coefficient ring.
        counter: optional flop counter.
        full_disc: use the whole disc |alpha| <= sqrt(SNR) instead of one sector.

    Returns: CandidateSet with the cell vertices, the crossings of edges of two
        different users and the crossings of edges with the border of the range."""
    ch.require_nonzero_gains()
    box = valid_range(ring, ch, full_disc)
    spec = ring_spec(ring)
    gains = [complex(h_l) for h_l in ch.h]

    vertices = [
        coset_points_in_box(ring, h_l, box, spec.vertex_cosets) for h_l in gains
    ]
    alphas_s1 = np.concatenate(vertices) if vertices else _empty()
    charge(counter, adds=alphas_s1.size, muls=alphas_s1.size)

    families = [edge_line_families(ring, h_l) for h_l in gains]
    crossings = []
    for first in range(ch.users):
        for second in range(first + 1, ch.users):
            for family in families[first]:
                for other in families[second]:
                    points = family_crossings(family, other, box)
                    charge(counter, adds=points.size, muls=2 * points.size)
                    keep = on_cell_edge(ring, gains[first], points) & on_cell_edge(
                        ring, gains[second], points
                    )
                    crossings.append(points[keep])
    alphas_s2 = np.concatenate(crossings) if crossings else _empty()

    border = [box.corners()]
    for h_l, user_families in zip(gains, families):
        for family in user_families:
            points = box_side_crossings(family, box)
            border.append(points[on_cell_edge(ring, h_l, points)])
    alphas_boundary = np.concatenate(border)

    log.debug(
        "Representatives: %s cell vertices, %s edge crossings, %s border points.",
        alphas_s1.size,
        alphas_s2.size,
        alphas_boundary.size,
    )
    return CandidateSet(alphas_s1, alphas_s2, alphas_boundary)


def _cartesian_keys(
    c1: IntArray, c2: IntArray, mask: npt.NDArray[np.bool_]
) -> IntArray:
    """Every combination of the per-user options, as interleaved coordinate rows.

    Args:
        c1, c2: option coordinates of shape (N, L, 9).
        mask: which options are active, same shape.

    Returns: array of shape (M, 2L)."""
    count, users, _ = c1.shape
    rows = np.arange(count)
    keys = np.zeros((count, 2 * users), dtype=np.int64)
    for user in range(users):
        active = mask[rows, user]
        picked1 = c1[rows, user][active]
        picked2 = c2[rows, user][active]
        repeats = active.sum(axis=1)
        rows = np.repeat(rows, repeats)
        keys = np.repeat(keys, repeats, axis=0)
        keys[:, 2 * user] = picked1
        keys[:, 2 * user + 1] = picked2
    return keys


def expand_representatives(
    ch: Channel,
    ring: RingId,
    alphas: npt.ArrayLike,
    counter: FlopCounter | None = None,
) -> IntArray:
    """Applies the full-direction quantizer to alpha*h for every representative and
    returns the distinct nonzero candidate vectors as interleaved coordinate rows."""
    alphas = np.asarray(alphas, dtype=np.complex128).ravel()
    blocks = [np.empty((0, 2 * ch.users), dtype=np.int64)]
    chunk = max(1, CHUNK_ELEMENTS // (9 * ch.users))
    for start in range(0, alphas.size, chunk):
        scaled = alphas[start : start + chunk, None] * ch.h[None, :]
        charge(counter, muls=scaled.size)
        c1, c2, mask = full_quantize_mask(ring, scaled)
        blocks.append(np.unique(_cartesian_keys(c1, c2, mask), axis=0))
    unique = np.unique(np.concatenate(blocks), axis=0)
    return unique[np.any(unique != 0, axis=1)]


def unit_vector_keys(users: int) -> IntArray:
    keys = np.zeros((users, 2 * users), dtype=np.int64)
    keys[np.arange(users), 2 * np.arange(users)] = 1
    return keys


def evaluate_keys(
    ch: Channel, ring: RingId, keys: IntArray, counter: FlopCounter | None = None
) -> FloatArray:
    """Quadratic form a^H M a of every candidate row."""
    if keys.shape[0] == 0:
        return np.empty(0, dtype=np.float64)
    values = np.empty(keys.shape[0], dtype=np.float64)
    chunk = max(1, CHUNK_ELEMENTS // ch.users)
    for start in range(0, keys.shape[0], chunk):
        block = keys[start : start + chunk]
        coeffs = embed(ring, block[:, 0::2], block[:, 1::2])
        values[start : start + chunk] = quadratic_forms(ch, coeffs, counter)
    return values


def evaluate_representatives(
    ch: Channel,
    ring: RingId,
    alphas: npt.ArrayLike,
    counter: FlopCounter | None = None,
    seeds: IntArray | None = None,
) -> tuple[IntArray, FloatArray]:
    """Distinct nonzero vectors induced by the representatives, plus optional seed
    rows, with their quadratic forms."""
    keys = expand_representatives(ch, ring, alphas, counter)
    if seeds is not None:
        keys = np.unique(np.concatenate([keys, seeds]), axis=0)
    if keys.shape[0] == 0:
        raise ReductionError("No candidate vector was generated.")
    return keys, evaluate_keys(ch, ring, keys, counter)


def best_index(ring: RingId, keys: IntArray, values: FloatArray) -> int:
    """Index of the smallest quadratic form. Near ties prefer a vector whose first
    nonzero entry is a unit-orbit representative, then the lexicographically
    smallest coordinates."""
    best = float(values.min())
    tied = np.flatnonzero(values <= best + TIE_TOLERANCE * max(abs(best), 1e-300))
    candidates = keys[tied]
    first_nonzero = np.argmax(
        (candidates[:, 0::2] != 0) | (candidates[:, 1::2] != 0), axis=1
    )
    lead1 = candidates[np.arange(tied.size), 2 * first_nonzero]
    lead2 = candidates[np.arange(tied.size), 2 * first_nonzero + 1]
    canonical = orbit_representative_mask(ring, lead1, lead2)
    order = np.lexsort(tuple(candidates.T[::-1]) + (~canonical,))
    return int(tied[order[0]])


def enumerate_ball(
    ring: RingId, users: int, radius_sq: float, canonical: bool = True
) -> IntArray:
    """All nonzero vectors with squared norm <= radius_sq.

    Args:
        ring: coefficient ring.
        users: vector length.
        radius_sq: squared norm bound.
        canonical: keep one vector per unit orbit (first nonzero entry is an orbit
            representative).

    Returns: interleaved coordinate rows."""
    radius_sq = float(radius_sq) * (1 + 1e-12) + 1e-12
    c1, c2, norms = ball_points(ring, float(np.sqrt(radius_sq)))
    opening = np.ones(norms.shape, dtype=bool)
    if canonical:
        opening = (norms == 0) | orbit_representative_mask(ring, c1, c2)
    start1, start2, start_norms = c1[opening], c2[opening], norms[opening]

    keys = np.zeros((1, 0), dtype=np.int64)
    spent = np.zeros(1, dtype=np.float64)
    started = np.zeros(1, dtype=bool)
    for _ in range(users):
        pieces = []
        for begun in (False, True):
            rows = np.flatnonzero(started == begun)
            if rows.size == 0:
                continue
            opt1, opt2, opt_norms = (
                (c1, c2, norms) if begun else (start1, start2, start_norms)
            )
            counts = np.searchsorted(opt_norms, radius_sq - spent[rows], side="right")
            parent = np.repeat(rows, counts)
            first = np.cumsum(counts) - counts
            within = np.arange(parent.size) - np.repeat(first, counts)
            pieces.append(
                (
                    np.column_stack([keys[parent], opt1[within], opt2[within]]),
                    spent[parent] + opt_norms[within],
                    started[parent] | (opt_norms[within] > 0),
                )
            )
        keys = np.concatenate([piece[0] for piece in pieces])
        spent = np.concatenate([piece[1] for piece in pieces])
        started = np.concatenate([piece[2] for piece in pieces])
    return keys[started]


def completion_radius_sq(ch: Channel, ring: RingId, best_value: float) -> float:
    """Squared norm bound on vectors that beat `best_value` although the MMSE
    scaling of h quantizes to zero.

    Such a vector has |alpha| <= r / |h_max| at its own MMSE alpha, so its quadratic
    form is at least ||a||^2 - r^2 / (s*|h_max|^2); every vector also satisfies
    a^H M a >= ||a||^2 / phi^2."""
    radius = ring_spec(ring).covering_radius
    zero_cell_bound = best_value + radius**2 / (ch.mmse_scale * ch.h_max_sq)
    return min(zero_cell_bound, best_value * ch.phi**2)


def select_from_keys(
    ch: Channel,
    ring: RingId,
    keys: IntArray,
    values: FloatArray,
    algorithm: str,
    counter: FlopCounter | None = None,
) -> SelectionResult:
    index = best_index(ring, keys, values)
    a_opt = CoeffVector.from_key(ring, keys[index])
    evaluation = rate_of_pair(ch, a_opt)
    return SelectionResult(
        a_opt=a_opt,
        rate=evaluation.rate,
        alpha=evaluation.alpha,
        candidates_examined=int(keys.shape[0]),
        flops=counter.total_flops if counter is not None else None,
        algorithm=algorithm,
    )


def expected_s1_count(ring: RingId, users: int, snr: float) -> float:
    """Mean number of cell vertices in a valid range of area SNR, h_l ~ CN(0, 1)."""
    spec = ring_spec(ring)
    return len(spec.vertex_cosets) * snr * users / spec.fundamental_area


def expected_s2_count(ring: RingId, users: int, snr: float) -> float:
    """Mean number of crossings of edges of two different users: every pair of line
    families spans parallelograms of mean area 2*A0/SNR over the valid range."""
    spec = ring_spec(ring)
    families = spec.edge_direction_count
    return comb(users, 2) * families**2 * 0.5 * snr / spec.fundamental_area
