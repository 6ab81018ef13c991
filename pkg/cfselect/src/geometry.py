"""Alpha-plane geometry: per-user quantization cells, their edge lines, convex
region intersection and the largest inscribed axis-aligned square."""
from dataclasses import dataclass
from logging import getLogger
from math import ceil, cos, floor, pi, sqrt

import numpy as np
import numpy.typing as npt

from cfselect.src.exceptions import InvalidInputError
from cfselect.src.models import Channel, CoeffVector
from cfselect.src.rings import (
    ComplexArray,
    FloatArray,
    IntArray,
    RingElement,
    RingId,
    embed,
    full_quantize_mask,
    quantize_array,
    ring_spec,
    to_basis,
)

log = getLogger(__name__)

MERGE_TOLERANCE = 1e-9
CLIP_TOLERANCE = 1e-12
PARALLEL_TOLERANCE = 1e-12
DEGENERATE_AREA = 1e-15


@dataclass(frozen=True)
class Line2D:
    """The line {x : n.x = c}; as a half-plane it stands for n.x <= c."""

    normal: complex
    offset: float

    def __post_init__(self) -> None:
        length = abs(self.normal)
        if not np.isfinite(length) or length == 0:
            raise InvalidInputError(f"Line normal must be nonzero: {self.normal}.")
        object.__setattr__(self, "normal", complex(self.normal) / length)
        object.__setattr__(self, "offset", float(self.offset) / length)

    @classmethod
    def through(cls, start: complex, end: complex) -> "Line2D":
        """Line through two points with the normal pointing to the right of the
        direction start -> end (outward for a counterclockwise polygon)."""
        direction = complex(end) - complex(start)
        normal = -1j * direction
        return cls(normal, float((complex(start) * normal.conjugate()).real))

    def evaluate(self, points: npt.ArrayLike) -> FloatArray:
        """Signed distance n.x - c, positive outside the half-plane."""
        points = np.asarray(points, dtype=np.complex128)
        return (points * self.normal.conjugate()).real - self.offset

    def shifted(self, distance: float) -> "Line2D":
        return Line2D(self.normal, self.offset + distance)


@dataclass(frozen=True)
class ConvexCell:
    vertices: tuple[complex, ...]
    halfplanes: tuple[Line2D, ...]

    @classmethod
    def from_vertices(cls, vertices: npt.ArrayLike) -> "ConvexCell":
        points = [complex(v) for v in np.asarray(vertices, dtype=np.complex128)]
        if len(points) < 3:
            raise InvalidInputError(f"A cell needs at least 3 vertices: {points}.")
        edges = zip(points, points[1:] + points[:1])
        return cls(tuple(points), tuple(Line2D.through(p, q) for p, q in edges))

    @property
    def edge_count(self) -> int:
        return len(self.vertices)

    def vertex_array(self) -> ComplexArray:
        return np.asarray(self.vertices, dtype=np.complex128)

    @property
    def area(self) -> float:
        return polygon_area(self.vertex_array())

    @property
    def centroid(self) -> complex:
        return complex(np.mean(self.vertex_array()))

    def contains(self, point: complex, tol: float = MERGE_TOLERANCE) -> bool:
        return all(line.evaluate(point) <= tol for line in self.halfplanes)

    def rotated(self, factor: complex) -> "ConvexCell":
        return ConvexCell.from_vertices(self.vertex_array() * factor)


@dataclass(frozen=True)
class AlphaSector:
    """Disc sector {|alpha| <= radius, phase_lo <= arg(alpha) < phase_hi}."""

    radius: float
    phase_lo: float = 0.0
    phase_hi: float = pi / 2

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise InvalidInputError(f"Sector radius must be positive: {self.radius}.")
        if not 0 < self.phase_hi - self.phase_lo <= 2 * pi + 1e-12:
            raise InvalidInputError(
                f"Invalid phase range [{self.phase_lo}, {self.phase_hi})."
            )

    @classmethod
    def for_channel(
        cls, ring: RingId, ch: Channel, full_disc: bool = False
    ) -> "AlphaSector":
        phase_hi = 2 * pi if full_disc else ring_spec(ring).phase_sector
        return cls(radius=sqrt(ch.snr), phase_hi=phase_hi)

    @property
    def width(self) -> float:
        return self.phase_hi - self.phase_lo


@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.xmin), abs(self.xmax), abs(self.ymin), abs(self.ymax))

    def corners(self) -> ComplexArray:
        return np.array(
            [
                complex(self.xmin, self.ymin),
                complex(self.xmax, self.ymin),
                complex(self.xmax, self.ymax),
                complex(self.xmin, self.ymax),
            ]
        )

    def contains(self, points: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        points = np.asarray(points, dtype=np.complex128)
        tol = MERGE_TOLERANCE * self.scale
        return (
            (points.real >= self.xmin - tol)
            & (points.real <= self.xmax + tol)
            & (points.imag >= self.ymin - tol)
            & (points.imag <= self.ymax + tol)
        )

    def expanded(self, margin: float) -> "Box":
        return Box(
            self.xmin - margin,
            self.xmax + margin,
            self.ymin - margin,
            self.ymax + margin,
        )

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)


@dataclass(frozen=True)
class LineFamily:
    """Parallel lines {x : n.x = base + k*spacing, k integer} in the alpha plane."""

    normal: complex
    base: float
    spacing: float

    def offsets_in(self, box: Box) -> FloatArray:
        values = (box.corners() * self.normal.conjugate()).real
        tol = MERGE_TOLERANCE * box.scale
        k_lo = ceil((values.min() - tol - self.base) / self.spacing)
        k_hi = floor((values.max() + tol - self.base) / self.spacing)
        return self.base + self.spacing * np.arange(k_lo, k_hi + 1, dtype=np.float64)


def sector_bounding_box(sector: AlphaSector) -> Box:
    """Axis-aligned bounding box of a disc sector."""
    if sector.width >= 2 * pi - 1e-12:
        return Box(-sector.radius, sector.radius, -sector.radius, sector.radius)
    angles = [sector.phase_lo, sector.phase_hi]
    first_axis = ceil(sector.phase_lo / (pi / 2))
    angles += [
        k * pi / 2
        for k in range(first_axis, first_axis + 5)
        if sector.phase_lo < k * pi / 2 < sector.phase_hi
    ]
    points = np.concatenate(
        [[0j], sector.radius * np.exp(1j * np.asarray(angles, dtype=np.float64))]
    )
    # cos(pi/2) is not exactly 0
    on_axis = np.abs(points.real) < 1e-12 * sector.radius
    points = np.where(on_axis, 1j * points.imag, points)
    return Box(
        float(points.real.min()),
        float(points.real.max()),
        float(points.imag.min()),
        float(points.imag.max()),
    )


def polygon_area(vertices: npt.ArrayLike) -> float:
    points = np.asarray(vertices, dtype=np.complex128)
    if points.size < 3:
        return 0.0
    following = np.roll(points, -1)
    return 0.5 * float(np.sum((points.conj() * following).imag))


def merge_close_vertices(
    vertices: ComplexArray, tol: float = MERGE_TOLERANCE
) -> ComplexArray:
    if vertices.size == 0:
        return vertices
    scale = max(1.0, float(np.max(np.abs(vertices))))
    kept: list[complex] = []
    for vertex in vertices:
        if not kept or abs(vertex - kept[-1]) > tol * scale:
            kept.append(complex(vertex))
    while len(kept) > 1 and abs(kept[-1] - kept[0]) <= tol * scale:
        kept.pop()
    return np.asarray(kept, dtype=np.complex128)


def clip_halfplane(vertices: npt.ArrayLike, line: Line2D) -> ComplexArray:
    """Sutherland-Hodgman clip of a convex polygon by the half-plane n.x <= c.

    Args:
        vertices: polygon vertices in counterclockwise order.
        line: the bounding line of the half-plane.

    Returns: vertices of the clipped polygon (possibly empty)."""
    points = np.asarray(vertices, dtype=np.complex128)
    if points.size == 0:
        return points
    distance = line.evaluate(points)
    tol = CLIP_TOLERANCE * max(1.0, float(np.max(np.abs(points))))
    inside = distance <= tol
    if inside.all():
        return points
    if not inside.any():
        return np.empty(0, dtype=np.complex128)

    clipped: list[complex] = []
    count = points.size
    for index in range(count):
        following = (index + 1) % count
        if inside[index]:
            clipped.append(complex(points[index]))
        if inside[index] != inside[following]:
            start, end = points[index], points[following]
            ratio = distance[index] / (distance[index] - distance[following])
            clipped.append(complex(start + ratio * (end - start)))
    return merge_close_vertices(np.asarray(clipped, dtype=np.complex128))


def _box_polygon(box: Box) -> ComplexArray:
    return box.corners()


def cell_of(ring: RingId, h_l: complex, a_l: RingElement) -> ConvexCell:
    """Set of alpha with Q(alpha*h_l) = a_l: the Voronoi cell of a_l mapped by
    1/h_l."""
    if h_l == 0 or not np.isfinite(h_l):
        raise InvalidInputError(f"Channel gain must be finite and nonzero: {h_l}.")
    offsets = np.asarray(ring_spec(ring).cell_vertex_offsets, dtype=np.complex128)
    return ConvexCell.from_vertices((a_l.embedding + offsets) / complex(h_l))


def line_intersection(first: Line2D, second: Line2D) -> complex | None:
    n1, n2 = first.normal, second.normal
    det = n1.real * n2.imag - n1.imag * n2.real
    if abs(det) <= PARALLEL_TOLERANCE:
        return None
    x = (first.offset * n2.imag - second.offset * n1.imag) / det
    y = (n1.real * second.offset - n2.real * first.offset) / det
    return complex(x, y)


def lattice_points_in_box(
    ring: RingId, h_l: complex, box: Box, offset: complex = 0j
) -> tuple[ComplexArray, IntArray, IntArray]:
    """All alpha = (embedding(p) + offset) / h_l inside the closed box.

    Returns: (alphas, c1, c2) where (c1, c2) are the coordinates of p."""
    t1, t2 = to_basis(ring, box.corners() * complex(h_l) - offset)
    range1 = np.arange(floor(t1.min()) - 1, ceil(t1.max()) + 2, dtype=np.int64)
    range2 = np.arange(floor(t2.min()) - 1, ceil(t2.max()) + 2, dtype=np.int64)
    c1, c2 = (grid.ravel() for grid in np.meshgrid(range1, range2, indexing="ij"))
    alphas = (embed(ring, c1, c2) + offset) / complex(h_l)
    inside = box.contains(alphas)
    return alphas[inside], c1[inside], c2[inside]


def coset_points_in_box(
    ring: RingId, h_l: complex, box: Box, offsets: tuple[complex, ...]
) -> ComplexArray:
    points = [lattice_points_in_box(ring, h_l, box, offset)[0] for offset in offsets]
    return np.concatenate(points) if points else np.empty(0, dtype=np.complex128)


def edge_line_families(ring: RingId, h_l: complex) -> list[LineFamily]:
    """Edge lines of the cells of one user as families of parallel lines.

    Not every point of these lines is on a cell edge for Z[w]; see on_cell_edge."""
    if h_l == 0:
        raise InvalidInputError("Channel gain must be nonzero.")
    spec = ring_spec(ring)
    gain = abs(h_l)
    return [
        LineFamily(
            normal=complex(h_l).conjugate() * direction / gain,
            base=spec.edge_line_offset / gain,
            spacing=spec.edge_line_spacing / gain,
        )
        for direction in spec.edge_directions
    ]


def on_cell_edge(ring: RingId, h_l: complex, alphas: npt.ArrayLike) -> npt.NDArray:
    """True where alpha*h_l has at least two nearest lattice points."""
    alphas = np.asarray(alphas, dtype=np.complex128)
    if ring is RingId.GAUSSIAN or alphas.size == 0:
        return np.ones(alphas.shape, dtype=bool)
    _, _, mask = full_quantize_mask(ring, alphas * complex(h_l))
    return mask.sum(axis=-1) >= 2


def family_crossings(first: LineFamily, second: LineFamily, box: Box) -> ComplexArray:
    """Crossing points of every line of `first` with every line of `second` that
    fall inside the box."""
    n1, n2 = first.normal, second.normal
    det = n1.real * n2.imag - n1.imag * n2.real
    if abs(det) <= PARALLEL_TOLERANCE:
        return np.empty(0, dtype=np.complex128)
    c1 = first.offsets_in(box)[:, None]
    c2 = second.offsets_in(box)[None, :]
    x = (c1 * n2.imag - c2 * n1.imag) / det
    y = (n1.real * c2 - n2.real * c1) / det
    points = (x + 1j * y).ravel()
    return points[box.contains(points)]


def box_side_crossings(family: LineFamily, box: Box) -> ComplexArray:
    """Crossings of the family's lines with the four sides of the box."""
    offsets = family.offsets_in(box)
    n = family.normal
    found = []
    if abs(n.imag) > PARALLEL_TOLERANCE:
        for x in (box.xmin, box.xmax):
            found.append(x + 1j * (offsets - n.real * x) / n.imag)
    if abs(n.real) > PARALLEL_TOLERANCE:
        for y in (box.ymin, box.ymax):
            found.append((offsets - n.imag * y) / n.real + 1j * y)
    if not found:
        return np.empty(0, dtype=np.complex128)
    points = np.concatenate(found)
    return points[box.contains(points)]


def _wedge_lines(phase_lo: float, phase_hi: float) -> list[Line2D]:
    return [
        Line2D(-1j * np.exp(1j * phase_lo), 0.0),
        Line2D(1j * np.exp(1j * phase_hi), 0.0),
    ]


def _min_modulus(vertices: ComplexArray) -> float:
    """Distance from the origin to a convex polygon."""
    if vertices.size == 1:
        return float(abs(vertices[0]))
    if vertices.size >= 3 and all(
        line.evaluate(0j) <= 0 for line in ConvexCell.from_vertices(vertices).halfplanes
    ):
        return 0.0
    starts, ends = vertices, np.roll(vertices, -1)
    direction = ends - starts
    length_sq = np.maximum(np.abs(direction) ** 2, 1e-300)
    ratio = np.clip((-starts * direction.conj()).real / length_sq, 0.0, 1.0)
    return float(np.min(np.abs(starts + ratio * direction)))


def _polygon_meets_sector(vertices: ComplexArray, sector: AlphaSector) -> bool:
    if sector.width >= 2 * pi - 1e-12:
        return _min_modulus(vertices) <= sector.radius
    if sector.width > pi:
        middle = (sector.phase_lo + sector.phase_hi) / 2
        halves = (
            AlphaSector(sector.radius, sector.phase_lo, middle),
            AlphaSector(sector.radius, middle, sector.phase_hi),
        )
        return any(_polygon_meets_sector(vertices, half) for half in halves)
    clipped = vertices
    for line in _wedge_lines(sector.phase_lo, sector.phase_hi):
        clipped = clip_halfplane(clipped, line)
    return clipped.size > 0 and _min_modulus(clipped) <= sector.radius


def cells_in_sector(
    ring: RingId, h_l: complex, sector: AlphaSector
) -> list[tuple[RingElement, ConvexCell]]:
    """Every lattice point of one user whose cell intersects the sector."""
    if h_l == 0:
        raise InvalidInputError("Channel gain must be nonzero.")
    margin = ring_spec(ring).covering_radius / abs(h_l)
    search_box = sector_bounding_box(sector).expanded(margin)
    _, c1, c2 = lattice_points_in_box(ring, h_l, search_box)

    cells = []
    for x, y in zip(c1, c2):
        element = RingElement(int(x), int(y), ring)
        cell = cell_of(ring, h_l, element)
        if _polygon_meets_sector(cell.vertex_array(), sector):
            cells.append((element, cell))
    log.debug("Found %s cells of h=%s inside the sector.", len(cells), h_l)
    return cells


def region_of_vector(
    ring: RingId, ch: Channel, a: CoeffVector, sector: AlphaSector
) -> ConvexCell | None:
    """Intersection of the per-user cells of `a`, clipped to the sector's bounding
    box. None when the intersection is empty or degenerate."""
    if len(a) != ch.users:
        raise InvalidInputError(
            f"Coefficient vector has {len(a)} entries, the channel has {ch.users}."
        )
    if a.is_zero:
        raise InvalidInputError("The zero coefficient vector has no region.")
    ch.require_nonzero_gains()

    polygon = _box_polygon(sector_bounding_box(sector))
    for h_l, a_l in zip(ch.h, a.a):
        for line in cell_of(ring, complex(h_l), a_l).halfplanes:
            polygon = clip_halfplane(polygon, line)
            if polygon.size == 0:
                return None
    if polygon.size < 3 or abs(polygon_area(polygon)) <= DEGENERATE_AREA:
        return None
    return ConvexCell.from_vertices(polygon)


def clip_to_disc(
    cell: ConvexCell, radius: float, sides: int = 64
) -> ConvexCell | None:
    """Part of the cell inside the regular polygon with `sides` vertices inscribed in
    the circle |alpha| = radius. None when nothing of the cell is left."""
    polygon = cell.vertex_array()
    offset = radius * cos(pi / sides)
    for index in range(sides):
        normal = complex(np.exp(2j * pi * index / sides))
        polygon = clip_halfplane(polygon, Line2D(normal, offset))
        if polygon.size == 0:
            return None
    if polygon.size < 3 or abs(polygon_area(polygon)) <= DEGENERATE_AREA:
        return None
    return ConvexCell.from_vertices(polygon)


def _eroded(cell: ConvexCell, width: float) -> ComplexArray:
    """The set of square centres for which an axis-aligned square of the given
    width fits inside the cell."""
    vertices = cell.vertex_array()
    polygon = _box_polygon(
        Box(
            float(vertices.real.min()),
            float(vertices.real.max()),
            float(vertices.imag.min()),
            float(vertices.imag.max()),
        )
    )
    for line in cell.halfplanes:
        support = (abs(line.normal.real) + abs(line.normal.imag)) * width / 2
        polygon = clip_halfplane(polygon, line.shifted(-support))
        if polygon.size == 0:
            break
    return polygon


def largest_inscribed_axis_square(
    cell: ConvexCell, iterations: int = 60
) -> tuple[float, complex]:
    """Largest axis-aligned square inside a convex cell, by bisection on the width.

    Args:
        cell: convex polygon.
        iterations: bisection steps.

    Returns: (width, centre of one optimal square)."""
    if abs(cell.area) <= DEGENERATE_AREA:
        return 0.0, cell.centroid
    vertices = cell.vertex_array()
    low = 0.0
    high = float(min(np.ptp(vertices.real), np.ptp(vertices.imag)))
    best = _eroded(cell, 0.0)
    for _ in range(iterations):
        if high - low <= 1e-13 * max(1.0, high):
            break
        middle = (low + high) / 2
        region = _eroded(cell, middle)
        if region.size:
            low, best = middle, region
        else:
            high = middle
    center = complex(np.mean(best)) if best.size else cell.centroid
    return low, center


def orbit_square_width(cell: ConvexCell, ring: RingId) -> float:
    """Largest inscribed square width over the rotations of the cell by the units."""
    return max(
        largest_inscribed_axis_square(cell.rotated(unit.embedding))[0]
        for unit in ring_spec(ring).units
    )


def random_cell_gamma(
    ch: Channel, ring: RingId, samples: int, rng: np.random.Generator
) -> FloatArray:
    """Normalised square widths of the regions hit by uniformly drawn alpha.

    Alpha is drawn uniformly from the sector; draws whose quantization is the zero
    vector are skipped.

    Returns: one value in (0, 1] per region hit."""
    sector = AlphaSector.for_channel(ring, ch)
    full = AlphaSector.for_channel(ring, ch, full_disc=True)
    radius = sector.radius * np.sqrt(rng.random(samples))
    phase = sector.phase_lo + sector.width * rng.random(samples)
    alphas = radius * np.exp(1j * phase)
    c1, c2 = quantize_array(ring, alphas[:, None] * ch.h[None, :])
    scale = sqrt(ring_spec(ring).fundamental_area / ch.h_max_sq)

    gammas = []
    for row1, row2 in zip(c1, c2):
        a = CoeffVector.from_coords(ring, row1, row2)
        if a.is_zero:
            continue
        region = region_of_vector(ring, ch, a, full)
        if region is not None:
            gammas.append(min(orbit_square_width(region, ring) / scale, 1.0))
    return np.asarray(gammas, dtype=np.float64)
