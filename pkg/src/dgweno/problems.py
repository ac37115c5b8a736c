"""Benchmark problems: domains, initial/boundary data and exact solutions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import gauss_rule, tensor_basis
from .dg import StateField, dirichlet_rule
from .laws import KPP, Burgers, ConservationLaw, Euler, LinearAdvection, conserved_from_primitive
from .mesh import BoundaryTag, Mesh
from .riemann import ExactRiemannSolver

GAMMA = 1.4
T_CRITICAL_BURGERS = 1.0 / (2.0 * np.pi)


class ExactSolutionUnavailable(LookupError):
    pass


@dataclass
class BenchmarkProblem:
    name: str
    law: ConservationLaw
    bounds: tuple
    counts: tuple
    boundary: dict
    t_final: float
    initial: Callable[[np.ndarray], np.ndarray]
    exact: Callable[[np.ndarray, float], np.ndarray] | None = None
    ghost_rules: dict = field(default_factory=dict)
    description: str = ""
    projection: str = "interpolate"

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")

    @property
    def dim(self) -> int:
        return len(self.bounds)


# -- initial data --------------------------------------------------------------


def _advect_smooth_u0(x):
    return np.cos(2.0 * np.pi * (x[..., 0] - 0.5))[..., None]


def _advect_composite_u0(x):
    x = x[..., 0]
    u = np.zeros_like(x)
    u = np.where((x >= 0.15) & (x <= 0.45), 1.0, u)
    bump = np.cos(10.0 * np.pi / 3.0 * (x - 0.7)) ** 2
    u = np.where((x > 0.55) & (x < 0.85), bump, u)
    return u[..., None]


def _burgers_u0(x):
    return np.sin(2.0 * np.pi * x[..., 0])[..., None]


def _sbr_u0(x):
    X, Y = x[..., 0], x[..., 1]
    r_hump = np.hypot(X - 0.25, Y - 0.5) / 0.15
    r_cone = np.hypot(X - 0.5, Y - 0.25) / 0.15
    r_cyl = np.hypot(X - 0.5, Y - 0.75) / 0.15
    u = np.zeros_like(X)
    slotted = (r_cyl <= 1.0) & ((np.abs(X - 0.5) >= 0.025) | (Y >= 0.85))
    u = np.where(slotted, 1.0, u)
    u = np.where(r_cone <= 1.0, 1.0 - r_cone, u)
    u = np.where(r_hump <= 1.0, 0.25 + 0.25 * np.cos(np.pi * r_hump), u)
    return u[..., None]


def _sbr_velocity(x):
    return 2.0 * np.pi * np.stack([0.5 - x[..., 1], x[..., 0] - 0.5], axis=-1)


def _kpp_u0(x):
    r = np.hypot(x[..., 0], x[..., 1])
    return np.where(r <= 1.0, 3.5 * np.pi, 0.25 * np.pi)[..., None]


def _riemann_ic(left, right, x0, gamma=GAMMA):
    UL = conserved_from_primitive(left[0], left[1], left[2], gamma)
    UR = conserved_from_primitive(right[0], right[1], right[2], gamma)

    def u0(x):
        return np.where((x[..., 0] < x0)[..., None], UL, UR)

    return u0


def _riemann_exact(left, right, x0, gamma=GAMMA):
    solver = ExactRiemannSolver(left, right, gamma)

    def exact(x, t):
        x = np.asarray(x)[..., 0]
        if t <= 0:
            xi = np.where(x < x0, -np.inf, np.inf)
        else:
            xi = (x - x0) / t
        prim = solver.sample_array(xi)
        return conserved_from_primitive(prim[..., 0], prim[..., 1], prim[..., 2], gamma)

    exact.solver = solver
    return exact


def _periodic_shift_exact(u0, velocity, lo, hi):
    def exact(x, t):
        xs = lo + np.mod(x[..., :1] - velocity * t - lo, hi - lo)
        return u0(xs)

    return exact


def _rotation_exact(x, t):
    angle = -2.0 * np.pi * t
    c, s = np.cos(angle), np.sin(angle)
    dx, dy = x[..., 0] - 0.5, x[..., 1] - 0.5
    back = np.stack([0.5 + c * dx - s * dy, 0.5 + s * dx + c * dy], axis=-1)
    return _sbr_u0(back)


def burgers_exact(x, t, tol: float = 1e-13, max_iter: int = 100):
    """Solution of u_t + (u^2/2)_x = 0 with u0 = sin(2 pi x) before shock formation.

    Solves ``u = sin(2 pi (x - u t))`` with Newton iterations kept inside the
    bracket [-1, 1] (bisection fallback).
    """
    if t >= T_CRITICAL_BURGERS:
        raise ExactSolutionUnavailable(f"Burgers solution has a shock for t >= {T_CRITICAL_BURGERS:.6f}")
    x = np.asarray(x, dtype=float)[..., 0]
    twopi = 2.0 * np.pi
    u = np.sin(twopi * x)
    lo = -np.ones_like(x)
    hi = np.ones_like(x)
    for _ in range(max_iter):
        arg = twopi * (x - u * t)
        g = u - np.sin(arg)
        lo = np.where(g < 0, u, lo)
        hi = np.where(g > 0, u, hi)
        if np.max(np.abs(g)) < tol:
            return u[..., None]
        dg = 1.0 + twopi * t * np.cos(arg)
        new = u - g / dg
        outside = (new <= lo) | (new >= hi)
        u = np.where(outside, 0.5 * (lo + hi), new)
    raise RuntimeError(
        f"Burgers Newton iteration did not converge: max residual {np.max(np.abs(g)):.3e}"
    )


# -- catalog -------------------------------------------------------------------


def _euler_states(left, right):
    return (
        conserved_from_primitive(left[0], left[1], left[2], GAMMA),
        conserved_from_primitive(right[0], right[1], right[2], GAMMA),
    )


def _double_mach():
    post = conserved_from_primitive(
        8.0, [8.25 * np.cos(np.pi / 6), -8.25 * np.sin(np.pi / 6)], 116.5, GAMMA
    )
    pre = conserved_from_primitive(1.4, [0.0, 0.0], 1.0, GAMMA)

    def shocked(x, t):
        return x[..., 0] < 1.0 / 6.0 + (x[..., 1] + 20.0 * t) / np.sqrt(3.0)

    def u0(x):
        return np.where(shocked(x, 0.0)[..., None], post, pre)

    def boundary_state(x, t):
        return np.where(shocked(x, t)[..., None], post, pre)

    def bottom(center):
        return BoundaryTag.TIME_DEPENDENT_DIRICHLET if center[0] < 1.0 / 6.0 else BoundaryTag.REFLECTING_WALL

    D = BoundaryTag.TIME_DEPENDENT_DIRICHLET
    return BenchmarkProblem(
        "double_mach", Euler(dim=2, gamma=GAMMA), ((0.0, 4.0), (0.0, 1.0)), (192, 48),
        {"xlo": D, "xhi": BoundaryTag.OUTFLOW, "ylo": bottom, "yhi": D},
        0.2, u0, None, {D: dirichlet_rule(boundary_state)},
        "Mach 10 shock reflecting off a wedge",
    )


def _build(name: str) -> BenchmarkProblem:
    P = BoundaryTag.PERIODIC
    W = BoundaryTag.REFLECTING_WALL
    I = BoundaryTag.INFLOW
    O = BoundaryTag.OUTFLOW

    if name == "advect_smooth":
        return BenchmarkProblem(
            name, LinearAdvection(1.0, dim=1), ((0.0, 1.0),), (128,), {"xlo": P, "xhi": P}, 1.0,
            _advect_smooth_u0, _periodic_shift_exact(_advect_smooth_u0, 1.0, 0.0, 1.0),
            description="periodic transport of a cosine wave", projection="l2",
        )
    if name == "advect_composite":
        return BenchmarkProblem(
            name, LinearAdvection(1.0, dim=1), ((0.0, 1.0),), (128,), {"xlo": P, "xhi": P}, 1.0,
            _advect_composite_u0, _periodic_shift_exact(_advect_composite_u0, 1.0, 0.0, 1.0),
            description="periodic transport of a step and a smooth bump",
        )
    if name == "burgers_sine":
        return BenchmarkProblem(
            name, Burgers(), ((0.0, 1.0),), (128,), {"xlo": P, "xhi": P}, 0.1,
            _burgers_u0, burgers_exact, description="inviscid Burgers, sine wave before shock formation",
            projection="l2",
        )
    if name == "solid_body_rotation":
        return BenchmarkProblem(
            name, LinearAdvection(_sbr_velocity, dim=2), ((0.0, 1.0), (0.0, 1.0)), (128, 128),
            {s: I for s in ("xlo", "xhi", "ylo", "yhi")}, 1.0, _sbr_u0, _rotation_exact,
            {I: dirichlet_rule([0.0])}, "hump, cone and slotted cylinder rotating once",
        )
    if name == "kpp":
        return BenchmarkProblem(
            name, KPP(), ((-2.0, 2.0), (-2.5, 1.5)), (128, 128),
            {s: I for s in ("xlo", "xhi", "ylo", "yhi")}, 1.0, _kpp_u0, None,
            {I: dirichlet_rule([0.25 * np.pi])}, "nonconvex KPP rotating wave",
        )
    if name == "sod":
        left, right = (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)
        return BenchmarkProblem(
            name, Euler(1, GAMMA), ((0.0, 1.0),), (128,), {"xlo": W, "xhi": W}, 0.231,
            _riemann_ic(left, right, 0.5), _riemann_exact(left, right, 0.5),
            description="Sod shock tube",
        )
    if name == "sod_modified":
        left, right = (1.0, 0.75, 1.0), (0.125, 0.0, 0.1)
        UL, _ = _euler_states(left, right)
        return BenchmarkProblem(
            name, Euler(1, GAMMA), ((0.0, 1.0),), (128,), {"xlo": I, "xhi": W}, 0.2,
            _riemann_ic(left, right, 0.5), _riemann_exact(left, right, 0.5),
            {I: dirichlet_rule(UL)}, "Sod tube with a sonic rarefaction",
        )
    if name == "lax":
        left, right = (0.445, 0.698, 3.528), (0.5, 0.0, 0.571)
        return BenchmarkProblem(
            name, Euler(1, GAMMA), ((0.0, 2.0),), (512,), {"xlo": O, "xhi": O}, 0.14,
            _riemann_ic(left, right, 1.0), _riemann_exact(left, right, 1.0),
            description="Lax shock tube",
        )
    if name == "shu_osher":
        UL = conserved_from_primitive(3.857143, 2.629369, 10.3333, GAMMA)

        def u0(x):
            xx = x[..., 0]
            UR = conserved_from_primitive(1.0 + 0.2 * np.sin(5.0 * xx), np.zeros_like(xx),
                                          np.ones_like(xx), GAMMA)
            return np.where((xx < -4.0)[..., None], UL, UR)

        return BenchmarkProblem(
            name, Euler(1, GAMMA), ((-5.0, 5.0),), (512,), {"xlo": I, "xhi": W}, 1.8,
            u0, None, {I: dirichlet_rule(UL)}, "shock interacting with a density sine wave",
        )
    if name == "blast_wave":
        def u0(x):
            xx = x[..., 0]
            p = np.where(xx < 0.1, 1000.0, np.where(xx > 0.9, 100.0, 0.1))
            return conserved_from_primitive(np.ones_like(xx), np.zeros_like(xx), p, GAMMA)

        return BenchmarkProblem(
            name, Euler(1, GAMMA), ((0.0, 1.0),), (512,), {"xlo": W, "xhi": W}, 0.038,
            u0, None, description="Woodward-Colella interacting blast waves",
        )
    if name == "double_mach":
        return _double_mach()
    raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")


BENCHMARKS = (
    "advect_smooth", "advect_composite", "burgers_sine", "solid_body_rotation", "kpp",
    "sod", "sod_modified", "lax", "shu_osher", "blast_wave", "double_mach",
)


def get_benchmark(name: str) -> BenchmarkProblem:
    return _build(name)


def project_initial_condition(
    problem: BenchmarkProblem, mesh: Mesh, ref, method: str | None = None
) -> StateField:
    """Initial field by nodal interpolation or cell-wise L2 projection.

    ``method`` defaults to the problem's own choice.  Interpolation keeps the
    pointwise values of discontinuous data such as the KPP disk, where a
    projection would over/undershoot inside the cells straddling the jump.
    The smooth convergence problems use the L2 projection (Gauss rule two
    points richer than the volume rule), which makes the initial error
    independent of where the Lagrange nodes sit.
    """
    method = method or problem.projection
    if method == "interpolate":
        return StateField(mesh, ref, problem.initial(mesh.to_physical(ref.nodes)))
    if method != "l2":
        raise ValueError(f"unknown projection method {method!r}")
    rule = gauss_rule(ref.dim, ref.p + 3)
    phi = tensor_basis(ref.p, rule.points)
    u0 = problem.initial(mesh.to_physical(rule.points))
    rhs = np.einsum("qj,q,eqc->ejc", phi, rule.weights, u0)
    return StateField(mesh, ref, np.einsum("ij,ejc->eic", np.linalg.inv(ref.mass), rhs))


def exact_solution(problem: BenchmarkProblem, x, t: float) -> np.ndarray:
    if problem.exact is None:
        raise ExactSolutionUnavailable(f"no exact solution for {problem.name}")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != problem.dim:
        x = x.reshape(x.shape + (1,)) if problem.dim == 1 else x
    return problem.exact(x, t)
