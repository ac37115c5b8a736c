import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgweno.dg import reference_element
from dgweno.laws import Euler, conserved_from_primitive, pressure
from dgweno.mesh import build_structured_mesh
from dgweno.problems import (
    BENCHMARKS,
    T_CRITICAL_BURGERS,
    ExactSolutionUnavailable,
    burgers_exact,
    exact_solution,
    get_benchmark,
    project_initial_condition,
)
from dgweno.riemann import ExactRiemannSolver, star_pressure_function


def _cell_means(field):
    return field.at_quadrature()[..., 0] @ field.ref.quad.weights


def _mesh(problem, counts=None):
    return build_structured_mesh(list(problem.bounds), list(counts or problem.counts), problem.boundary)


@pytest.mark.parametrize("name", BENCHMARKS)
def test_catalog_is_complete_and_finite(name):
    prob = get_benchmark(name)
    assert prob.t_final > 0
    mesh = _mesh(prob, [8] * prob.dim)
    field = project_initial_condition(prob, mesh, reference_element(2, prob.dim))
    assert np.all(np.isfinite(field.coeffs))
    assert field.coeffs.shape[-1] == prob.law.m
    if isinstance(prob.law, Euler):
        prob.law.check(field.coeffs)


def test_unknown_benchmark():
    with pytest.raises(KeyError):
        get_benchmark("noh")


def test_paper_setup_values():
    assert get_benchmark("sod").t_final == 0.231
    kpp = get_benchmark("kpp")
    assert kpp.initial(np.zeros((1, 2)))[0, 0] == pytest.approx(3.5 * np.pi)
    assert kpp.initial(np.array([[1.5, 0.0]]))[0, 0] == pytest.approx(0.25 * np.pi)
    blast = get_benchmark("blast_wave")
    for x, p in ((0.05, 1000.0), (0.5, 0.1), (0.95, 100.0)):
        U = blast.initial(np.array([[x]]))
        assert pressure(U)[0] == pytest.approx(p)
    assert get_benchmark("lax").bounds == ((0.0, 2.0),)
    assert get_benchmark("double_mach").bounds == ((0.0, 4.0), (0.0, 1.0))
    assert T_CRITICAL_BURGERS == pytest.approx(1 / (2 * np.pi))


def test_shu_osher_split():
    prob = get_benchmark("shu_osher")
    rho = prob.initial(np.array([[-4.01], [-3.99]]))[:, 0]
    assert rho[0] == pytest.approx(3.857143)
    assert rho[1] == pytest.approx(1 + 0.2 * np.sin(5 * -3.99))


def test_constant_projection_is_exact():
    prob = get_benchmark("advect_smooth")
    prob.initial = lambda x: np.full(x.shape[:-1] + (1,), 0.3)
    mesh = _mesh(prob, [5])
    for method in ("l2", "interpolate"):
        f = project_initial_condition(prob, mesh, reference_element(3, 1), method)
        assert np.max(np.abs(f.coeffs - 0.3)) < 1e-14


def test_cell_averages_of_cosine():
    prob = get_benchmark("advect_smooth")
    errs = []
    for n in (16, 32):
        mesh = _mesh(prob, [n])
        ref = reference_element(2, 1)
        f = project_initial_condition(prob, mesh, ref, "interpolate")
        means = _cell_means(f)
        a = np.arange(n) / n
        exact = (np.sin(2 * np.pi * (a + 1 / n - 0.5)) - np.sin(2 * np.pi * (a - 0.5))) / (2 * np.pi) * n
        errs.append(np.max(np.abs(means - exact)))
    assert errs[0] < 16.0**-4 * 10
    assert np.log2(errs[0] / errs[1]) > 3.8


def test_l2_projection_preserves_cell_averages():
    prob = get_benchmark("advect_smooth")
    n = 16
    mesh = _mesh(prob, [n])
    f = project_initial_condition(prob, mesh, reference_element(2, 1), "l2")
    means = _cell_means(f)
    a = np.arange(n) / n
    exact = (np.sin(2 * np.pi * (a + 1 / n - 0.5)) - np.sin(2 * np.pi * (a - 0.5))) / (2 * np.pi) * n
    assert np.max(np.abs(means - exact)) < 1e-7


def test_kpp_keeps_nodal_values():
    prob = get_benchmark("kpp")
    mesh = _mesh(prob, [16, 16])
    ref = reference_element(2, 2)
    f = project_initial_condition(prob, mesh, ref)
    vals = np.unique(np.round(f.coeffs, 12))
    assert set(vals) == {round(0.25 * np.pi, 12), round(3.5 * np.pi, 12)}


def test_unknown_projection():
    prob = get_benchmark("sod")
    with pytest.raises(ValueError):
        project_initial_condition(prob, _mesh(prob, [4]), reference_element(1, 1), "spline")


def test_advection_exact_is_periodic():
    prob = get_benchmark("advect_smooth")
    x = np.linspace(0, 1, 11)[:, None]
    assert np.allclose(exact_solution(prob, x, 1.0), prob.initial(x), atol=1e-14)
    assert np.allclose(exact_solution(prob, x, 0.25), prob.initial(x - 0.25), atol=1e-14)


def test_burgers_exact_examples():
    assert burgers_exact(np.array([[0.5]]), 0.1)[0, 0] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ExactSolutionUnavailable):
        burgers_exact(np.array([[0.3]]), T_CRITICAL_BURGERS)
    with pytest.raises(ExactSolutionUnavailable):
        exact_solution(get_benchmark("burgers_sine"), np.array([[0.3]]), 1.0)


@given(st.floats(0, 1), st.floats(0, 0.99))
@settings(max_examples=60, deadline=None)
def test_burgers_characteristic_residual(x, frac):
    t = frac * T_CRITICAL_BURGERS
    u = burgers_exact(np.array([[x]]), t)[0, 0]
    assert abs(u - np.sin(2 * np.pi * (x - u * t))) < 1e-12


def test_no_exact_solution_for_blast():
    with pytest.raises(ExactSolutionUnavailable):
        exact_solution(get_benchmark("blast_wave"), np.array([[0.5]]), 0.01)


def test_sod_star_state():
    s = ExactRiemannSolver((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
    assert s.star.p == pytest.approx(0.30313, abs=5e-6)
    assert s.star.u == pytest.approx(0.92745, abs=5e-6)
    assert abs(star_pressure_function(s.star.p, s.left, s.right)) < 1e-12


def test_sod_exact_profile_regions():
    prob = get_benchmark("sod")
    x = np.array([[0.1], [0.95]])
    U = exact_solution(prob, x, 0.231)
    assert np.allclose(U[0], [1.0, 0.0, 2.5]) and np.allclose(U[1], [0.125, 0.0, 0.25])


def test_modified_sod_has_sonic_rarefaction():
    s = ExactRiemannSolver((1.0, 0.75, 1.0), (0.125, 0.0, 0.1))
    a_l = np.sqrt(1.4)
    head = 0.75 - a_l
    a_star = a_l * (s.star.p / 1.0) ** (0.4 / 2.8)
    tail = s.star.u - a_star
    assert head < 0 < tail


def test_rankine_hugoniot_on_sod_shock():
    s = ExactRiemannSolver((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
    S = s.shock_speed("right")
    euler = Euler()
    Ur = conserved_from_primitive(0.125, 0.0, 0.1)
    Us = conserved_from_primitive(s.star.rho_right, s.star.u, s.star.p)
    jump = euler.flux(Us)[..., 0] - euler.flux(Ur)[..., 0] - S * (Us - Ur)
    assert np.max(np.abs(jump)) < 1e-10
    with pytest.raises(ValueError):
        s.shock_speed("left")


states = st.tuples(st.floats(0.1, 5), st.floats(-2, 2), st.floats(0.1, 5))


@given(states, states)
@settings(max_examples=50, deadline=None)
def test_riemann_far_field_and_degenerate(left, right):
    s = ExactRiemannSolver(left, right)
    assert np.allclose(s.sample(-1e6), left) and np.allclose(s.sample(1e6), right)
    same = ExactRiemannSolver(left, left)
    for xi in (-3.0, 0.0, 0.7):
        assert np.allclose(same.sample(xi), left, rtol=1e-10)
