from logging import getLogger

import numpy as np

from cfselect.src.exceptions import InvalidInputError, ReductionError
from cfselect.src.flops import FlopCounter, charge
from cfselect.src.models import Channel, CoeffVector, SelectionResult
from cfselect.src.rate import gram_matrix, rate_of_pair
from cfselect.src.rings import (
    ComplexArray,
    IntArray,
    RingId,
    embed,
    multiply_coords,
    quantize,
)
from cfselect.src.selectors.selector import Selector

log = getLogger(__name__)

DEFAULT_DELTA = 0.99


def _qr(basis: ComplexArray, counter: FlopCounter | None) -> ComplexArray:
    size = basis.shape[0]
    charge(counter, adds=size**3, muls=size**3)
    return np.linalg.qr(basis, mode="r")


def reduce_basis(
    basis: ComplexArray,
    ring: RingId,
    delta: float = DEFAULT_DELTA,
    counter: FlopCounter | None = None,
) -> tuple[ComplexArray, IntArray, IntArray]:
    """Complex LLL reduction of the columns of `basis` over the given ring.

    Size reduction rounds the Gram-Schmidt coefficients with the ring quantizer, so
    the transform stays a matrix over the ring.

    Args:
        basis: square complex matrix whose columns span the lattice.
        ring: ring of the transform entries.
        delta: Lovasz parameter in (1/4, 1].
        counter: optional flop counter.

    Returns: (reduced basis, T1, T2) with reduced = basis @ embed(T1, T2)."""
    if not 0.25 < delta <= 1:
        raise InvalidInputError(f"LLL delta must lie in (1/4, 1], got {delta}.")
    reduced = np.array(basis, dtype=np.complex128)
    size = reduced.shape[1]
    t1 = np.eye(size, dtype=np.int64)
    t2 = np.zeros((size, size), dtype=np.int64)
    cap = 10_000 * size**2

    def size_reduce(target: int, pivot: int, r: ComplexArray) -> None:
        mu = r[pivot, target] / r[pivot, pivot]
        q = quantize(ring, complex(mu))
        if q.is_zero:
            return
        step = q.embedding
        reduced[:, target] -= step * reduced[:, pivot]
        r[:, target] -= step * r[:, pivot]
        d1, d2 = multiply_coords(ring, q.c1, q.c2, t1[:, pivot], t2[:, pivot])
        t1[:, target] -= d1
        t2[:, target] -= d2
        charge(counter, adds=2 * size, muls=2 * size + 1)

    k, iterations, swaps = 1, 0, 0
    r = _qr(reduced, counter)
    while k < size:
        iterations += 1
        if iterations > cap:
            raise ReductionError(f"LLL did not terminate within {cap} iterations.")
        size_reduce(k, k - 1, r)
        charge(counter, adds=2, muls=3)
        lovasz = abs(r[k, k]) ** 2 + abs(r[k - 1, k]) ** 2
        if lovasz < delta * abs(r[k - 1, k - 1]) ** 2:
            reduced[:, [k - 1, k]] = reduced[:, [k, k - 1]]
            t1[:, [k - 1, k]] = t1[:, [k, k - 1]]
            t2[:, [k - 1, k]] = t2[:, [k, k - 1]]
            r = _qr(reduced, counter)
            swaps += 1
            k = max(k - 1, 1)
            continue
        for pivot in range(k - 2, -1, -1):
            size_reduce(k, pivot, r)
        k += 1
    log.debug("LLL finished after %s iterations and %s swaps.", iterations, swaps)
    return reduced, t1, t2


def transform_determinant(ring: RingId, t1: IntArray, t2: IntArray) -> complex:
    return complex(np.linalg.det(embed(ring, t1, t2)))


class CLLLSelector(Selector):
    """Shortest column of the LLL-reduced basis L^H, where M = L L^H.

    ||L^H a||^2 = a^H M a, so a short lattice vector is a high-rate equation. Over
    Z[w] the size reduction rounds with the Eisenstein quantizer."""

    name = "clll"

    def __init__(self, ring: RingId | str, delta: float = DEFAULT_DELTA) -> None:
        super().__init__(ring)
        self.delta = delta

    def select(
        self, ch: Channel, counter: FlopCounter | None = None
    ) -> SelectionResult:
        _, factor = gram_matrix(ch)
        basis = factor.conj().T
        reduced, t1, t2 = reduce_basis(basis, self.ring, self.delta, counter)

        lengths = np.sum(np.abs(reduced) ** 2, axis=0)
        if counter is not None:
            counter.inner_products(count=ch.users, length=ch.users)
        shortest = int(np.argmin(lengths))
        a_opt = CoeffVector.from_coords(self.ring, t1[:, shortest], t2[:, shortest])
        evaluation = rate_of_pair(ch, a_opt)
        return SelectionResult(
            a_opt=a_opt,
            rate=evaluation.rate,
            alpha=evaluation.alpha,
            candidates_examined=ch.users,
            flops=counter.total_flops if counter is not None else None,
            algorithm=self.name,
        )
