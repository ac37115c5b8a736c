import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgweno.basis import ReferenceElement, gauss_rule, local_mass_matrix, reference_basis, tensor_basis
from dgweno.mesh import build_structured_mesh


def test_linear_hats_at_midpoint():
    v, g = reference_basis(1, 0.5)
    assert np.allclose(v, [0.5, 0.5])
    assert np.allclose(g[:, 0], [-1.0, 1.0])


def test_kronecker_at_node():
    v, _ = reference_basis(2, 0.0)
    assert np.allclose(v, [1.0, 0.0, 0.0], atol=1e-14)


def test_bilinear_center():
    v, _ = reference_basis(1, (0.5, 0.5))
    assert np.allclose(v, 0.25)


def test_point_outside_reference_element():
    with pytest.raises(ValueError):
        reference_basis(2, 1.5)


def test_gauss_midpoint_rule():
    r = gauss_rule(1, 1)
    assert r.points[0, 0] == 0.5 and r.weights[0] == 1.0


def test_gauss_two_points_cubic():
    r = gauss_rule(1, 2)
    assert r.weights @ r.points[:, 0] ** 3 == pytest.approx(0.25, abs=1e-15)


def test_gauss_2d_weight_sum():
    r = gauss_rule(2, 3)
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(r.weights > 0)


def test_gauss_rejects_zero_points():
    with pytest.raises(ValueError):
        gauss_rule(1, 0)


def _cell(length, dim=1, p=1):
    mesh = build_structured_mesh([(0.0, length)] * dim, [1] * dim)
    return mesh.cells[0]


def test_mass_p1_unit_cell():
    assert np.allclose(local_mass_matrix(1, _cell(1.0)), [[1 / 3, 1 / 6], [1 / 6, 1 / 3]])


def test_mass_scales_with_length():
    h = 0.37
    assert np.allclose(local_mass_matrix(1, _cell(h)), h * np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]]))


def test_mass_p2_row_sums():
    h = 0.25
    M = local_mass_matrix(2, _cell(h))
    assert np.allclose(M.sum(axis=1), np.array([1, 4, 1]) / 6 * h)


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("dim", [1, 2])
def test_reference_element_invariants(p, dim):
    ref = ReferenceElement(p, dim)
    assert ref.ndofs == (p + 1) ** dim
    assert np.max(np.abs(ref.phi.sum(axis=1) - 1.0)) < 1e-13
    assert np.max(np.abs(ref.dphi.sum(axis=2))) < 1e-12
    assert np.max(np.abs(tensor_basis(p, ref.nodes) - np.eye(ref.ndofs))) < 1e-12
    np.linalg.cholesky(ref.mass)


@given(st.integers(1, 3), st.integers(1, 2), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_quadrature_integrates_degree_p(p, dim, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(p + 1,) * dim)
    r = gauss_rule(dim, p + 1)
    k = np.arange(p + 1)
    if dim == 1:
        approx = r.weights @ np.polynomial.polynomial.polyval(r.points[:, 0], c)
        exact = np.sum(c / (k + 1))
    else:
        approx = r.weights @ np.polynomial.polynomial.polyval2d(r.points[:, 0], r.points[:, 1], c)
        exact = np.sum(c / np.outer(k + 1, k + 1))
    assert approx == pytest.approx(exact, abs=1e-12)
