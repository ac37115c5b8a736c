import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgweno.mesh import BoundaryTag, build_structured_mesh, face_trace_points

P, W, O = BoundaryTag.PERIODIC, BoundaryTag.REFLECTING_WALL, BoundaryTag.OUTFLOW


def test_two_periodic_cells():
    mesh = build_structured_mesh([(0.0, 1.0)], [2], P)
    assert mesh.ncells == 2
    assert [c.volume for c in mesh.cells] == [0.5, 0.5]
    interior = mesh.interior_faces
    assert len(interior) == 1 and interior[0].center[0] == 0.5
    bnd = mesh.boundary_faces
    assert sorted(f.center[0] for f in bnd) == [0.0, 1.0]
    assert {mesh.faces[f.partner].center[0] for f in bnd} == {0.0, 1.0}
    # the wrap makes the cells each other's neighbors on both sides
    assert list(mesh.neighbors[0]) == [1, 1]


def test_unit_square_four_by_four():
    mesh = build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], [4, 4], P)
    assert mesh.ncells == 16
    assert mesh.cell_size == pytest.approx(math.sqrt(2) / 4)
    assert all(c.h == pytest.approx(math.sqrt(2) / 4) for c in mesh.cells)
    assert len(mesh.interior_faces) == 24
    assert len(mesh.boundary_faces) == 16
    assert all(f.partner is not None for f in mesh.boundary_faces)


def test_double_mach_grid():
    mesh = build_structured_mesh([(0.0, 4.0), (0.0, 1.0)], [192, 48], O)
    assert mesh.cell_volume == pytest.approx(4.0 / (192 * 48), rel=1e-14)


def test_mismatched_periodic_pairing():
    with pytest.raises(ValueError):
        build_structured_mesh([(0.0, 1.0)], [4], {"xlo": P, "xhi": W})


@pytest.mark.parametrize("counts", [[0], [-1]])
def test_zero_counts(counts):
    with pytest.raises(ValueError):
        build_structured_mesh([(0.0, 1.0)], counts)


def test_empty_extent():
    with pytest.raises(ValueError):
        build_structured_mesh([(1.0, 1.0)], [3])


def test_callable_side_tags():
    def bottom(c):
        return BoundaryTag.TIME_DEPENDENT_DIRICHLET if c[0] < 1 / 6 else W

    mesh = build_structured_mesh([(0, 4), (0, 1)], [24, 6],
                                 {"xlo": O, "xhi": O, "ylo": bottom, "yhi": O})
    tags = {f.tag for f in mesh.boundary_faces if f.axis == 1 and f.normal[1] < 0}
    assert tags == {BoundaryTag.TIME_DEPENDENT_DIRICHLET, W}


def test_face_trace_points_1d():
    mesh = build_structured_mesh([(0.0, 1.0)], [4])
    pts = face_trace_points(mesh, mesh.faces[0], 3)
    assert len(pts) == 1 and pts[0][1] == 1.0


def test_face_trace_points_2d_weights_and_integral():
    mesh = build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], [4, 4], O)
    face = next(f for f in mesh.faces if f.measure == 0.25)
    assert sum(w for _, w in face_trace_points(mesh, face, 3)) == pytest.approx(0.25, abs=1e-13)

    mesh = build_structured_mesh([(0.0, 1.0), (0.0, 1.0)], [2, 2], O)
    # bottom face of cell 0 runs from (0, 0) to (0.5, 0)
    face = mesh.faces[mesh.cell_faces[0, 2]]
    pts = face_trace_points(mesh, face, 2)
    assert all(x[1] == 0.0 for x, _ in pts)
    # int_0^0.5 x dx = 0.125
    assert sum(w * x[0] for x, w in pts) == pytest.approx(0.125, abs=1e-15)


def test_face_trace_points_foreign_face():
    a = build_structured_mesh([(0.0, 1.0)], [4])
    b = build_structured_mesh([(0.0, 1.0)], [2])
    with pytest.raises(ValueError):
        face_trace_points(a, b.faces[0], 2)


mesh_args = st.tuples(
    st.integers(1, 2),
    st.lists(st.integers(1, 7), min_size=2, max_size=2),
    st.lists(st.booleans(), min_size=2, max_size=2),
)


def _build(args):
    dim, counts, periodic = args
    tags = {}
    for a, s in enumerate("xy"[:dim]):
        tags[s + "lo"] = tags[s + "hi"] = P if periodic[a] else O
    return build_structured_mesh([(0.0, 1.0), (-1.0, 2.0)][:dim], counts[:dim], tags)


@given(mesh_args)
@settings(max_examples=40, deadline=None)
def test_structural_invariants(args):
    mesh = _build(args)
    assert sum(c.volume for c in mesh.cells) == pytest.approx(mesh.measure, rel=1e-12)
    for c in mesh.cells:
        assert c.volume > 0 and c.h > 0 and len(c.faces) == 2 * mesh.dim
    for f in mesh.faces:
        assert np.linalg.norm(f.normal) == pytest.approx(1.0, abs=1e-14)
        if f.right is None:
            assert isinstance(f.tag, BoundaryTag)
        else:
            assert f.left != f.right and f.tag is None
            assert f.id in mesh.cell_faces[f.left] and f.id in mesh.cell_faces[f.right]


@given(mesh_args)
@settings(max_examples=40, deadline=None)
def test_closed_surface_identity(args):
    mesh = _build(args)
    for e in range(mesh.ncells):
        total = sum(mesh.faces[f].measure * mesh.outward_normal(lf)
                    for lf, f in enumerate(mesh.cell_faces[e]))
        assert np.max(np.abs(total)) < 1e-12
        # outward normals agree with the stored left-to-right orientation
        for lf, fid in enumerate(mesh.cell_faces[e]):
            f = mesh.faces[fid]
            sign = 1.0 if f.left == e else -1.0
            if f.right is not None and f.left != f.right:
                assert np.allclose(sign * f.normal, mesh.outward_normal(lf))
