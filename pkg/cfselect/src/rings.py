"""Gaussian and Eisenstein integers: exact arithmetic on basis coordinates,
nearest-point quantization and the geometry constants of their Voronoi cells."""
from dataclasses import dataclass
from enum import Enum
from logging import getLogger
from math import pi, sqrt

import numpy as np
import numpy.typing as npt

from cfselect.src.exceptions import InvalidInputError

log = getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
ComplexArray = npt.NDArray[np.complex128]

SQRT3 = sqrt(3.0)
TIE_TOLERANCE = 1e-12
FULL_TOLERANCE = 1e-9

_OFFSETS_C1 = np.array([-1, -1, -1, 0, 0, 0, 1, 1, 1], dtype=np.int64)
_OFFSETS_C2 = np.array([-1, 0, 1, -1, 0, 1, -1, 0, 1], dtype=np.int64)


class RingId(Enum):
    GAUSSIAN = "gaussian"
    EISENSTEIN = "eisenstein"

    @classmethod
    def parse(cls, name: "str | RingId") -> "RingId":
        """Accepts the canonical names and the usual short aliases.

        Args:
            name: ring name, e.g. "gaussian", "zi", "Z[i]", "eisenstein", "zw".

        Returns: the matching RingId."""
        if isinstance(name, RingId):
            return name
        key = str(name).strip().lower()
        if key in _RING_ALIASES:
            return _RING_ALIASES[key]
        raise InvalidInputError(f"Unknown ring name: {name!r}.")


_RING_ALIASES = {
    "gaussian": RingId.GAUSSIAN,
    "zi": RingId.GAUSSIAN,
    "z[i]": RingId.GAUSSIAN,
    "eisenstein": RingId.EISENSTEIN,
    "zw": RingId.EISENSTEIN,
    "z[w]": RingId.EISENSTEIN,
}


@dataclass(frozen=True)
class RingElement:
    c1: int
    c2: int
    ring: RingId

    @property
    def embedding(self) -> complex:
        b2 = RING_SPECS[self.ring].basis[1]
        return complex(self.c1 + self.c2 * b2.real, self.c2 * b2.imag)

    @property
    def norm(self) -> float:
        return abs(self.embedding) ** 2

    @property
    def is_zero(self) -> bool:
        return self.c1 == 0 and self.c2 == 0

    def __mul__(self, other: "RingElement") -> "RingElement":
        return multiply(self, other)

    def __str__(self) -> str:
        symbol = "i" if self.ring is RingId.GAUSSIAN else "w"
        if self.c2 == 0:
            return str(self.c1)
        if self.c1 == 0:
            return f"{self.c2}{symbol}"
        return f"{self.c1}{self.c2:+d}{symbol}"


@dataclass(frozen=True)
class RingSpec:
    """Constants of one ring. The basis is (1, b2) with b2**2 = p + q*b2 where
    (p, q) = square_coeffs; offsets are relative to a lattice point and listed
    counterclockwise."""

    ring: RingId
    basis: tuple[complex, complex]
    square_coeffs: tuple[int, int]
    unit_coords: tuple[tuple[int, int], ...]
    fundamental_area: float
    cell_vertex_offsets: tuple[complex, ...]
    vertex_cosets: tuple[complex, ...]
    edge_midpoint_cosets: tuple[complex, ...]
    edge_directions: tuple[complex, ...]
    edge_line_spacing: float
    edge_line_offset: float
    covering_radius: float
    sampling_sector: float

    @property
    def edge_direction_count(self) -> int:
        return len(self.edge_directions)

    @property
    def phase_sector(self) -> float:
        return 2 * pi / len(self.unit_coords)

    @property
    def units(self) -> tuple[RingElement, ...]:
        return tuple(RingElement(c1, c2, self.ring) for c1, c2 in self.unit_coords)


_OMEGA = complex(-0.5, SQRT3 / 2)

RING_SPECS: dict[RingId, RingSpec] = {
    RingId.GAUSSIAN: RingSpec(
        ring=RingId.GAUSSIAN,
        basis=(1 + 0j, 1j),
        square_coeffs=(-1, 0),
        unit_coords=((1, 0), (0, 1), (-1, 0), (0, -1)),
        fundamental_area=1.0,
        cell_vertex_offsets=(
            complex(0.5, -0.5),
            complex(0.5, 0.5),
            complex(-0.5, 0.5),
            complex(-0.5, -0.5),
        ),
        vertex_cosets=(complex(0.5, 0.5),),
        edge_midpoint_cosets=(complex(0.5, 0.0), complex(0.0, 0.5)),
        edge_directions=(1 + 0j, 1j),
        edge_line_spacing=1.0,
        edge_line_offset=0.5,
        covering_radius=sqrt(2.0) / 2,
        sampling_sector=pi / 2,
    ),
    RingId.EISENSTEIN: RingSpec(
        ring=RingId.EISENSTEIN,
        basis=(1 + 0j, _OMEGA),
        square_coeffs=(-1, -1),
        unit_coords=((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)),
        fundamental_area=SQRT3 / 2,
        cell_vertex_offsets=(
            complex(0.5, -SQRT3 / 6),
            complex(0.5, SQRT3 / 6),
            complex(0.0, SQRT3 / 3),
            complex(-0.5, SQRT3 / 6),
            complex(-0.5, -SQRT3 / 6),
            complex(0.0, -SQRT3 / 3),
        ),
        vertex_cosets=(complex(0.5, SQRT3 / 6), complex(0.0, SQRT3 / 3)),
        edge_midpoint_cosets=(0.5 + 0j, _OMEGA / 2, (1 + _OMEGA) / 2),
        edge_directions=(1 + 0j, _OMEGA, 1 + _OMEGA),
        edge_line_spacing=0.5,
        edge_line_offset=0.0,
        covering_radius=SQRT3 / 3,
        sampling_sector=pi,
    ),
}


def ring_spec(ring: RingId) -> RingSpec:
    return RING_SPECS[ring]


def _check_finite(values: npt.ArrayLike) -> None:
    if not np.all(np.isfinite(np.asarray(values))):
        raise InvalidInputError(f"Non-finite input: {values!r}.")


def embed(ring: RingId, c1: npt.ArrayLike, c2: npt.ArrayLike) -> ComplexArray:
    """Complex embedding c1 + c2*b2 of basis coordinates, elementwise."""
    b2 = RING_SPECS[ring].basis[1]
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    return (c1 + c2 * b2.real) + 1j * (c2 * b2.imag)


def to_basis(ring: RingId, z: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Real-valued basis coordinates (t1, t2) with z = t1 + t2*b2."""
    b2 = RING_SPECS[ring].basis[1]
    z = np.asarray(z, dtype=np.complex128)
    t2 = z.imag / b2.imag
    return z.real - t2 * b2.real, t2


def multiply_coords(
    ring: RingId,
    x1: npt.ArrayLike,
    x2: npt.ArrayLike,
    y1: npt.ArrayLike,
    y2: npt.ArrayLike,
) -> tuple[IntArray, IntArray]:
    p, q = RING_SPECS[ring].square_coeffs
    x1, x2 = np.asarray(x1, dtype=np.int64), np.asarray(x2, dtype=np.int64)
    y1, y2 = np.asarray(y1, dtype=np.int64), np.asarray(y2, dtype=np.int64)
    cross = x2 * y2
    return x1 * y1 + p * cross, x1 * y2 + x2 * y1 + q * cross


def multiply(x: RingElement, y: RingElement) -> RingElement:
    """Exact ring product of two elements of the same ring."""
    if x.ring is not y.ring:
        raise InvalidInputError(f"Cannot multiply {x.ring.value} by {y.ring.value}.")
    c1, c2 = multiply_coords(x.ring, x.c1, x.c2, y.c1, y.c2)
    return RingElement(int(c1), int(c2), x.ring)


def units(ring: RingId) -> list[RingElement]:
    return list(RING_SPECS[ring].units)


def covering_radius(ring: RingId) -> float:
    return RING_SPECS[ring].covering_radius


def neighbourhood(
    ring: RingId, z: npt.ArrayLike
) -> tuple[IntArray, IntArray, FloatArray]:
    """The 3x3 block of lattice points around the coordinate rounding of z.

    It always holds the nearest lattice point and every point tied with it, for
    both rings.

    Args:
        ring: ring to quantize onto.
        z: complex array of any shape.

    Returns: (c1, c2, squared distance), each shaped z.shape + (9,)."""
    z = np.asarray(z, dtype=np.complex128)
    _check_finite(z)
    t1, t2 = to_basis(ring, z)
    c1 = np.asarray(np.rint(t1), dtype=np.int64)[..., None] + _OFFSETS_C1
    c2 = np.asarray(np.rint(t2), dtype=np.int64)[..., None] + _OFFSETS_C2
    dist_sq = np.abs(z[..., None] - embed(ring, c1, c2)) ** 2
    return c1, c2, dist_sq


def quantize_array(ring: RingId, z: npt.ArrayLike) -> tuple[IntArray, IntArray]:
    """Elementwise nearest lattice point. Ties go to the lexicographically largest
    embedding, real part first."""
    z = np.asarray(z, dtype=np.complex128)
    c1, c2, dist_sq = neighbourhood(ring, z)
    scale = np.maximum(1.0, np.abs(z) ** 2)[..., None]
    nearest = dist_sq <= dist_sq.min(axis=-1, keepdims=True) + TIE_TOLERANCE * scale

    points = embed(ring, c1, c2)
    re = np.where(nearest, points.real, -np.inf)
    nearest &= re >= re.max(axis=-1, keepdims=True) - TIE_TOLERANCE
    im = np.where(nearest, points.imag, -np.inf)
    pick = np.argmax(im, axis=-1)[..., None]
    return (
        np.take_along_axis(c1, pick, axis=-1)[..., 0],
        np.take_along_axis(c2, pick, axis=-1)[..., 0],
    )


def full_quantize_mask(
    ring: RingId, z: npt.ArrayLike, tol: float | None = None
) -> tuple[IntArray, IntArray, npt.NDArray[np.bool_]]:
    """Vectorised full-direction quantizer.

    Args:
        ring: ring to quantize onto.
        z: complex array of any shape.
        tol: absolute distance tolerance; defaults to 1e-9 * max(1, |z|).

    Returns: neighbourhood coordinates and a mask of the points whose distance to
        z is within tol of the minimum."""
    z = np.asarray(z, dtype=np.complex128)
    c1, c2, dist_sq = neighbourhood(ring, z)
    dist = np.sqrt(dist_sq)
    if tol is None:
        limit = FULL_TOLERANCE * np.maximum(1.0, np.abs(z))[..., None]
    else:
        if tol <= 0:
            raise InvalidInputError(f"Tolerance must be positive, got {tol}.")
        limit = np.full(z.shape + (1,), tol)
    return c1, c2, dist <= dist.min(axis=-1, keepdims=True) + limit


def quantize(ring: RingId, z: complex) -> RingElement:
    c1, c2 = quantize_array(ring, np.array([z], dtype=np.complex128))
    return RingElement(int(c1[0]), int(c2[0]), ring)


def quantize_full(
    ring: RingId, z: complex, tol: float | None = None
) -> frozenset[RingElement]:
    c1, c2, mask = full_quantize_mask(ring, np.array([z], dtype=np.complex128), tol)
    return frozenset(
        RingElement(int(x), int(y), ring) for x, y in zip(c1[mask], c2[mask])
    )


def quantize_vector(ring: RingId, v: npt.ArrayLike) -> tuple[RingElement, ...]:
    c1, c2 = quantize_array(ring, np.atleast_1d(np.asarray(v, dtype=np.complex128)))
    return tuple(RingElement(int(x), int(y), ring) for x, y in zip(c1, c2))


def orbit_representative_mask(
    ring: RingId, c1: npt.ArrayLike, c2: npt.ArrayLike
) -> npt.NDArray[np.bool_]:
    """True where the embedding phase lies in [0, 2*pi/|units|), decided exactly
    on the integer coordinates."""
    c1 = np.asarray(c1, dtype=np.int64)
    c2 = np.asarray(c2, dtype=np.int64)
    if ring is RingId.GAUSSIAN:
        return (c1 > 0) & (c2 >= 0)
    # c1 + c2*w = (c1 - c2)*1 + c2*(1 + w); the sector is spanned by 1 and 1 + w
    return (c1 - c2 > 0) & (c2 >= 0)


def is_orbit_representative(element: RingElement) -> bool:
    return bool(orbit_representative_mask(element.ring, element.c1, element.c2))


def ball_points(ring: RingId, radius: float) -> tuple[IntArray, IntArray, FloatArray]:
    """All lattice points with |embedding| <= radius, sorted by norm.

    Returns: (c1, c2, squared norm) arrays."""
    span = int(np.ceil(2 * radius)) + 1
    grid = np.arange(-span, span + 1, dtype=np.int64)
    c1, c2 = (g.ravel() for g in np.meshgrid(grid, grid, indexing="ij"))
    norm_sq = np.abs(embed(ring, c1, c2)) ** 2
    keep = norm_sq <= radius**2 * (1 + 1e-12) + 1e-12
    order = np.argsort(norm_sq[keep], kind="stable")
    return c1[keep][order], c2[keep][order], norm_sq[keep][order]
