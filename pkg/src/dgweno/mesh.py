"""Uniform structured interval and quadrilateral meshes with face connectivity."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .basis import face_rule

SIDES = ("xlo", "xhi", "ylo", "yhi")


class BoundaryTag(enum.Enum):
    PERIODIC = "periodic"
    INFLOW = "inflow"
    REFLECTING_WALL = "wall"
    OUTFLOW = "outflow"
    TIME_DEPENDENT_DIRICHLET = "dirichlet"


TagSpec = Union[BoundaryTag, Callable[[np.ndarray], BoundaryTag]]


@dataclass(frozen=True)
class Cell:
    id: int
    vertices: np.ndarray  # (2**dim, dim)
    volume: float
    h: float
    faces: tuple[int, ...]  # indexed by local face 2 * axis + side


@dataclass(frozen=True)
class Face:
    id: int
    left: int
    right: int | None
    tag: BoundaryTag | None
    normal: np.ndarray  # unit, left -> right; outward for boundary faces
    measure: float
    center: np.ndarray
    axis: int
    partner: int | None = None  # periodic twin of a boundary face

    @property
    def is_boundary(self) -> bool:
        return self.right is None


class Mesh:
    """Uniform Cartesian mesh on a box in one or two dimensions.

    Cells are numbered with x fastest.  Local faces of a cell are numbered
    ``2 * axis + side`` with side 0 at the low end of the axis.
    """

    def __init__(self, bounds, counts, tags: Mapping[str, TagSpec]):
        self.dim = len(counts)
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        self.counts = tuple(int(n) for n in counts)
        self.spacing = np.array([(hi - lo) / n for (lo, hi), n in zip(self.bounds, self.counts)])
        self.cell_volume = float(np.prod(self.spacing))
        # h_e is the cell diameter
        self.cell_size = float(np.linalg.norm(self.spacing))
        self.periodic = tuple(
            tags[SIDES[2 * a]] is BoundaryTag.PERIODIC for a in range(self.dim)
        )
        self.ncells = int(np.prod(self.counts))
        self._build(tags)

    # -- construction ------------------------------------------------------

    def cell_index(self, idx: Sequence[int]) -> int:
        e = idx[0]
        if self.dim == 2:
            e += self.counts[0] * idx[1]
        return int(e)

    def _multi_index(self, e: int) -> tuple[int, ...]:
        if self.dim == 1:
            return (e,)
        return (e % self.counts[0], e // self.counts[0])

    def _build(self, tags: Mapping[str, TagSpec]) -> None:
        dim, counts = self.dim, self.counts
        lo = np.array([b[0] for b in self.bounds])
        ncells = self.ncells

        multi = np.array([self._multi_index(e) for e in range(ncells)]).reshape(ncells, dim)
        self.cell_origin = lo + multi * self.spacing
        self.cell_center = self.cell_origin + 0.5 * self.spacing

        nloc = 2 * dim
        self.neighbors = -np.ones((ncells, nloc), dtype=np.int64)
        self.cell_faces = -np.ones((ncells, nloc), dtype=np.int64)
        faces: list[Face] = []
        boundary_tags: dict[tuple[int, int], BoundaryTag] = {}

        def face_measure(axis: int) -> float:
            return float(np.prod([self.spacing[d] for d in range(dim) if d != axis]))

        for axis in range(dim):
            unit = np.zeros(dim)
            unit[axis] = 1.0
            meas = face_measure(axis)
            for e in range(ncells):
                idx = list(multi[e])
                center = self.cell_center[e].copy()
                if idx[axis] + 1 < counts[axis]:
                    nb_idx = idx.copy()
                    nb_idx[axis] += 1
                    nb = self.cell_index(nb_idx)
                    center[axis] = self.cell_origin[e, axis] + self.spacing[axis]
                    fid = len(faces)
                    faces.append(Face(fid, e, nb, None, unit.copy(), meas, center, axis))
                    self.cell_faces[e, 2 * axis + 1] = fid
                    self.cell_faces[nb, 2 * axis] = fid
                    self.neighbors[e, 2 * axis + 1] = nb
                    self.neighbors[nb, 2 * axis] = e

            # boundary faces on both ends of this axis
            lo_side, hi_side = SIDES[2 * axis], SIDES[2 * axis + 1]
            lo_spec, hi_spec = tags[lo_side], tags[hi_side]
            periodic = lo_spec is BoundaryTag.PERIODIC
            for e in range(ncells):
                idx = list(multi[e])
                for side, spec in ((0, lo_spec), (1, hi_spec)):
                    edge = 0 if side == 0 else counts[axis] - 1
                    if idx[axis] != edge:
                        continue
                    center = self.cell_center[e].copy()
                    center[axis] = self.cell_origin[e, axis] + side * self.spacing[axis]
                    tag = spec(center) if callable(spec) else spec
                    if not isinstance(tag, BoundaryTag):
                        raise TypeError(f"boundary spec for {SIDES[2 * axis + side]} gave {tag!r}")
                    if (tag is BoundaryTag.PERIODIC) != periodic:
                        raise ValueError("periodic tags must cover whole opposite sides")
                    normal = (1.0 if side else -1.0) * unit
                    fid = len(faces)
                    faces.append(Face(fid, e, None, tag, normal, meas, center, axis))
                    self.cell_faces[e, 2 * axis + side] = fid
                    boundary_tags[(e, 2 * axis + side)] = tag

            if periodic:
                # pair the two boundary faces of each grid line and wrap neighbors
                for e in range(ncells):
                    idx = list(multi[e])
                    if idx[axis] != 0:
                        continue
                    far = idx.copy()
                    far[axis] = counts[axis] - 1
                    e_far = self.cell_index(far)
                    f_lo = self.cell_faces[e, 2 * axis]
                    f_hi = self.cell_faces[e_far, 2 * axis + 1]
                    faces[f_lo] = _with_partner(faces[f_lo], int(f_hi))
                    faces[f_hi] = _with_partner(faces[f_hi], int(f_lo))
                    self.neighbors[e, 2 * axis] = e_far
                    self.neighbors[e_far, 2 * axis + 1] = e

        self.faces = faces
        self.boundary_tags = boundary_tags
        corners = np.array(list(np.ndindex(*(2,) * dim)))[:, ::-1] if dim == 2 else np.array([[0], [1]])
        self.cells = [
            Cell(
                e,
                self.cell_origin[e] + corners * self.spacing,
                self.cell_volume,
                self.cell_size,
                tuple(int(f) for f in self.cell_faces[e]),
            )
            for e in range(ncells)
        ]

    # -- queries -----------------------------------------------------------

    @property
    def measure(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    @property
    def period(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.bounds])

    @property
    def interior_faces(self) -> list[Face]:
        return [f for f in self.faces if not f.is_boundary]

    @property
    def boundary_faces(self) -> list[Face]:
        return [f for f in self.faces if f.is_boundary]

    def outward_normal(self, local_face: int) -> np.ndarray:
        axis, side = divmod(local_face, 2)
        n = np.zeros(self.dim)
        n[axis] = 1.0 if side else -1.0
        return n

    def to_physical(self, ref_points: np.ndarray) -> np.ndarray:
        """Map reference points (n, dim) into every cell: (ncells, n, dim)."""
        return self.cell_origin[:, None, :] + ref_points[None, :, :] * self.spacing

    def local_face_measure(self, local_face: int) -> float:
        axis = local_face // 2
        return float(np.prod([self.spacing[d] for d in range(self.dim) if d != axis]))

    def __repr__(self) -> str:
        return f"Mesh(dim={self.dim}, counts={self.counts}, bounds={self.bounds})"


def _with_partner(face: Face, partner: int) -> Face:
    return Face(face.id, face.left, face.right, face.tag, face.normal, face.measure,
                face.center, face.axis, partner)


def build_structured_mesh(
    bounds: Sequence[tuple[float, float]],
    counts: Sequence[int],
    boundary: Mapping[str, TagSpec] | BoundaryTag | None = None,
) -> Mesh:
    """Build a uniform Cartesian mesh.

    ``boundary`` maps side names (``xlo``, ``xhi``, ``ylo``, ``yhi``) to a
    :class:`BoundaryTag` or to a callable returning a tag for a face center.
    A single tag applies to every side; ``None`` means fully periodic.
    """
    if len(bounds) != len(counts) or len(counts) not in (1, 2):
        raise ValueError("bounds and counts must both have length 1 or 2")
    for (lo, hi), n in zip(bounds, counts):
        if not lo < hi:
            raise ValueError(f"empty axis extent ({lo}, {hi})")
        if int(n) < 1:
            raise ValueError(f"cell counts must be >= 1, got {n}")
    dim = len(counts)
    sides = SIDES[: 2 * dim]
    if boundary is None:
        boundary = BoundaryTag.PERIODIC
    if isinstance(boundary, BoundaryTag):
        tags = {s: boundary for s in sides}
    else:
        missing = set(sides) - set(boundary)
        extra = set(boundary) - set(sides)
        if missing or extra:
            raise ValueError(f"boundary spec needs exactly the sides {sides}")
        tags = dict(boundary)
    for a in range(dim):
        lo_p = tags[sides[2 * a]] is BoundaryTag.PERIODIC
        hi_p = tags[sides[2 * a + 1]] is BoundaryTag.PERIODIC
        if lo_p != hi_p:
            raise ValueError(f"periodic side {sides[2 * a]}/{sides[2 * a + 1]} lacks its partner")
    return Mesh(bounds, counts, tags)


def face_trace_points(mesh: Mesh, face: Face, order: int) -> list[tuple[np.ndarray, float]]:
    """Physical Gauss points and weights on ``face``; weights sum to its measure."""
    if face.id >= len(mesh.faces) or mesh.faces[face.id] is not face:
        raise ValueError("face does not belong to this mesh")
    if mesh.dim == 1:
        return [(face.center.copy(), 1.0)]
    axis = face.axis
    rule = face_rule(2, 2 * axis, order)
    t_axis = 1 - axis
    start = face.center[t_axis] - 0.5 * mesh.spacing[t_axis]
    out = []
    for pt, w in zip(rule.points, rule.weights):
        x = face.center.copy()
        x[t_axis] = start + pt[t_axis] * mesh.spacing[t_axis]
        out.append((x, float(w * face.measure)))
    return out
