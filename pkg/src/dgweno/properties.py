"""Randomized and oracle-based invariant checks with TAP-style output.

Each case draws its data from a fixed seed and returns a defect that must
not exceed the case tolerance.  A second run with a fresh seed is reported
but never fails the suite.  Oracles are written out here by hand; they do
not call the helper that computes the checked quantity.
"""

from __future__ import annotations

import csv
import fnmatch
import sys
import tempfile
import time
import traceback
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .basis import gauss_rule, local_mass_matrix, tensor_basis
from .dg import DGOperator, GhostPolicy, StateField, reference_element
from .laws import KPP, Burgers, Euler, LinearAdvection, conserved_from_primitive, hll_flux, llf_flux
from .mesh import BoundaryTag, build_structured_mesh
from .problems import burgers_exact
from .riemann import ExactRiemannSolver
from .sensor import SensorConfig, WenoSensor
from .stabilization import SemiDiscreteScheme, stabilization_term
from .timestepping import TABLEAUX, step

Check = Callable[[np.random.Generator], float]


@dataclass(frozen=True)
class OracleCase:
    name: str
    seed: int
    tolerance: float
    oracle: str
    check: Check = field(repr=False)


@dataclass
class CaseResult:
    name: str
    seed: int
    defect: float
    tolerance: float
    blocking: bool
    seconds: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.defect <= self.tolerance)


@dataclass
class SuiteReport:
    results: list[CaseResult]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results if r.blocking)

    @property
    def failures(self) -> list[CaseResult]:
        return [r for r in self.results if r.blocking and not r.passed]


REGISTRY: dict[str, OracleCase] = {}


def register(name: str, tolerance: float, oracle: str, seed: int | None = None):
    """Decorator adding a check to the registry; the seed defaults to a hash of the name."""

    def wrap(fn: Check) -> Check:
        if name in REGISTRY:
            raise ValueError(f"duplicate case {name!r}")
        s = zlib.crc32(name.encode()) if seed is None else seed
        REGISTRY[name] = OracleCase(name, s, tolerance, oracle, fn)
        return fn

    return wrap


def select(pattern: str | None) -> list[OracleCase]:
    """Cases whose name contains ``pattern`` or matches it as a glob."""
    cases = list(REGISTRY.values())
    if not pattern:
        return cases
    return [c for c in cases if pattern in c.name or fnmatch.fnmatchcase(c.name, pattern)]


def run_case(case: OracleCase, seed: int | None = None, blocking: bool = True) -> CaseResult:
    seed = case.seed if seed is None else seed
    start = time.perf_counter()
    try:
        defect = float(case.check(np.random.default_rng(seed)))
        if np.isnan(defect):
            defect = np.inf
        err = None
    except Exception:  # a crashing check is a failed case, not a suite error
        defect, err = np.inf, traceback.format_exc(limit=3).strip().splitlines()[-1]
    return CaseResult(case.name, seed, defect, case.tolerance, blocking,
                      time.perf_counter() - start, err)


def run_suite(pattern: str | None = None, stream=None, fresh: bool = True) -> SuiteReport:
    """Run the selected cases (plus one fresh-seed pass each) and print TAP lines."""
    out = stream if stream is not None else sys.stdout
    cases = select(pattern)
    results = []
    n_lines = len(cases) * (2 if fresh else 1)
    print("TAP version 13", file=out)
    print(f"1..{n_lines}", file=out)
    k = 0
    fresh_rng = np.random.default_rng()
    for case in cases:
        runs = [run_case(case)]
        if fresh:
            runs.append(run_case(case, int(fresh_rng.integers(2**31)), blocking=False))
        for r in runs:
            k += 1
            status = "ok" if r.passed else "not ok"
            tag = "" if r.blocking else " [fresh seed]"
            directive = "" if r.blocking or r.passed else " # TODO non-blocking fresh seed"
            print(f"{status} {k} - {r.name}{tag}{directive}", file=out)
            detail = f"  # seed={r.seed} defect={r.defect:.3e} tol={r.tolerance:.1e} time={r.seconds:.2f}s"
            if r.error:
                detail += f" error={r.error}"
            print(detail, file=out)
            results.append(r)
    report = SuiteReport(results)
    print(f"# blocking failures: {len(report.failures)}", file=out)
    return report


# -- shared data generators (inputs only, never the checked quantity) -------------


def _random_mesh(rng, dim=None, periodic=None, min_cells=2, max_cells=6):
    dim = dim or int(rng.integers(1, 3))
    counts = rng.integers(min_cells, max_cells + 1, size=dim)
    bounds = [(lo, lo + w) for lo, w in zip(rng.uniform(-1, 1, dim), rng.uniform(0.5, 3, dim))]
    if periodic is None:
        periodic = rng.random(dim) < 0.5
    periodic = np.broadcast_to(periodic, (dim,))
    tags = {}
    for a, side in enumerate(("x", "y")[:dim]):
        t = BoundaryTag.PERIODIC if periodic[a] else BoundaryTag.OUTFLOW
        tags[side + "lo"] = tags[side + "hi"] = t
    return build_structured_mesh(bounds, counts, tags)


def _euler_prims(rng, n, dim):
    rho = rng.uniform(0.1, 10.0, n)
    vel = rng.uniform(-3.0, 3.0, (n, dim))
    p = rng.uniform(0.1, 10.0, n)
    return rho, vel, p


def _unit_normals(rng, n, dim):
    v = rng.normal(size=(n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _euler_normal_flux(rho, vel, p, n, gamma=1.4):
    """Hand-written F(U).n from primitive variables."""
    vn = np.sum(vel * n, axis=-1)
    E = p / (gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
    cols = [rho * vn]
    cols += [rho * vel[:, a] * vn + p * n[:, a] for a in range(vel.shape[1])]
    cols.append((E + p) * vn)
    return np.stack(cols, axis=-1)


def _smooth_random_field(rng, mesh, ref, m, base, amp):
    """Cell-wise random nodal data around ``base`` with amplitude ``amp``."""
    return base + amp * rng.uniform(-1.0, 1.0, (mesh.ncells, ref.ndofs, m))


def _valid_euler_field(rng, mesh, ref):
    xn = mesh.to_physical(ref.nodes)
    rho = 1.0 + 0.5 * rng.random(xn.shape[:2])
    vel = rng.uniform(-0.5, 0.5, xn.shape)
    p = 1.0 + 0.5 * rng.random(xn.shape[:2])
    return conserved_from_primitive(rho, vel, p)


def _law_samples(rng, dim):
    if dim == 1:
        return [LinearAdvection(velocity=np.array([rng.uniform(-2, 2)])), Burgers(), Euler(dim=1)]
    return [LinearAdvection(velocity=rng.uniform(-2, 2, 2), dim=2), KPP(), Euler(dim=2)]


def _field_for(rng, law, mesh, ref):
    if isinstance(law, Euler):
        return _valid_euler_field(rng, mesh, ref)
    if isinstance(law, KPP):
        return rng.uniform(np.pi / 4, 3.5 * np.pi, (mesh.ncells, ref.ndofs, 1))
    return rng.normal(size=(mesh.ncells, ref.ndofs, 1))


def _cell_integrals(U, mesh, ref):
    """Per-cell integrals by a Gauss rule independent of the stored mass matrix."""
    rule = gauss_rule(mesh.dim, ref.p + 2)
    phi = tensor_basis(ref.p, rule.points)
    return mesh.cell_volume * np.einsum("q,qj,ejc->ec", rule.weights, phi, U)


# -- mesh ---------------------------------------------------------------------------


@register("mesh.connectivity_roundtrip", 0.0, "face lists of both adjacent cells contain every interior face")
def _mesh_roundtrip(rng):
    bad = 0
    for _ in range(5):
        mesh = _random_mesh(rng)
        for f in mesh.faces:
            if f.right is None:
                bad += f.id not in mesh.cell_faces[f.left]
            else:
                bad += (f.id not in mesh.cell_faces[f.left]) + (f.id not in mesh.cell_faces[f.right])
    return bad


@register("mesh.periodic_wrap", 1e-12, "shifting a periodic boundary face center by the period lands on its partner")
def _mesh_wrap(rng):
    worst = 0.0
    for _ in range(5):
        mesh = _random_mesh(rng, periodic=True)
        for f in mesh.faces:
            if f.partner is None:
                continue
            shift = np.zeros(mesh.dim)
            shift[f.axis] = -np.sign(f.normal[f.axis]) * (mesh.bounds[f.axis][1] - mesh.bounds[f.axis][0])
            worst = max(worst, float(np.max(np.abs(f.center + shift - mesh.faces[f.partner].center))))
    return worst


@register("mesh.divergence_identity", 1e-12, "sum of measure times outward normal over a cell's faces")
def _mesh_divergence(rng):
    worst = 0.0
    for _ in range(5):
        mesh = _random_mesh(rng)
        for e in range(mesh.ncells):
            total = np.zeros(mesh.dim)
            for fid in mesh.cell_faces[e]:
                f = mesh.faces[fid]
                sign = 1.0 if f.left == e and (f.right is None or f.right != e) else -1.0
                total += sign * f.measure * f.normal
            worst = max(worst, float(np.max(np.abs(total))))
    return worst


# -- basis and quadrature -------------------------------------------------------------


@register("basis.quadrature_exactness", 1e-12, "analytic monomial integrals on the unit box")
def _quad_exact(rng):
    worst = 0.0
    for p in (1, 2, 3):
        for dim in (1, 2):
            ref = reference_element(p, dim)
            deg = 2 * p + 1  # p+1 Gauss points per axis
            c = rng.normal(size=(deg + 1,) * dim)
            k = np.arange(deg + 1)
            pts = ref.quad.points
            if dim == 1:
                vals = np.polynomial.polynomial.polyval(pts[:, 0], c)
                exact = np.sum(c / (k + 1))
            else:
                vals = np.polynomial.polynomial.polyval2d(pts[:, 0], pts[:, 1], c)
                exact = np.sum(c / np.outer(k + 1, k + 1))
            worst = max(worst, abs(ref.quad.weights @ vals - exact) / max(1.0, abs(exact)))
    return worst


@register("basis.mass_cholesky", 0.0, "Cholesky factorization succeeds and the matrix is symmetric")
def _mass_spd(rng):
    bad = 0.0
    for p in (1, 2, 3):
        for dim in (1, 2):
            mesh = _random_mesh(rng, dim=dim)
            M = local_mass_matrix(p, mesh.cells[0])
            bad += float(np.max(np.abs(M - M.T)) > 1e-14 * np.max(np.abs(M)))
            try:
                np.linalg.cholesky(M)
            except np.linalg.LinAlgError:
                bad += 1.0
    return bad


@register("basis.interpolation_exactness", 1e-11, "direct evaluation of the polynomial at 50 random points")
def _interp_exact(rng):
    worst = 0.0
    for p in (1, 2, 3):
        for dim in (1, 2):
            ref = reference_element(p, dim)
            c = rng.normal(size=(p + 1,) * dim)
            pts = rng.random((50, dim))

            def poly(x):
                if dim == 1:
                    return np.polynomial.polynomial.polyval(x[:, 0], c)
                return np.polynomial.polynomial.polyval2d(x[:, 0], x[:, 1], c)

            interp = tensor_basis(p, pts) @ poly(ref.nodes)
            worst = max(worst, float(np.max(np.abs(interp - poly(pts)))))
    return worst


# -- conservation laws and numerical fluxes ----------------------------------------------


def _flux_pairs(rng, n=1000):
    """Random valid Euler state pairs with their primitives, for both dimensions."""
    for dim in (1, 2):
        a = _euler_prims(rng, n, dim)
        b = _euler_prims(rng, n, dim)
        yield dim, a, b, _unit_normals(rng, n, dim) if dim == 2 else np.sign(rng.normal(size=(n, 1)))


@register("laws.flux_consistency", 1e-13, "hand-written Euler and scalar normal fluxes")
def _flux_consistency(rng):
    worst = 0.0
    for dim, (rho, vel, p), _, n in _flux_pairs(rng):
        U = conserved_from_primitive(rho, vel, p)
        exact = _euler_normal_flux(rho, vel, p, n)
        scale = np.maximum(1.0, np.abs(exact))
        for flux in (llf_flux, hll_flux):
            worst = max(worst, float(np.max(np.abs(flux(Euler(dim=dim), U, U, n) - exact) / scale)))
    u = rng.uniform(-3, 3, (1000, 1))
    worst = max(worst, float(np.max(np.abs(llf_flux(Burgers(), u, u, np.ones((1000, 1))) - 0.5 * u**2))))
    n2 = _unit_normals(rng, 1000, 2)
    kpp = np.sin(u[:, 0]) * n2[:, 0] + np.cos(u[:, 0]) * n2[:, 1]
    worst = max(worst, float(np.max(np.abs(llf_flux(KPP(), u, u, n2)[:, 0] - kpp))))
    v = rng.uniform(-2, 2, 2)
    adv = LinearAdvection(velocity=v, dim=2)
    worst = max(worst, float(np.max(np.abs(llf_flux(adv, u, u, n2)[:, 0] - u[:, 0] * (n2 @ v)))))
    return worst


@register("laws.flux_conservation", 1e-13, "swap of states and normal negates the flux")
def _flux_conservation(rng):
    worst = 0.0
    for dim, a, b, n in _flux_pairs(rng):
        UL, UR = conserved_from_primitive(*a), conserved_from_primitive(*b)
        law = Euler(dim=dim)
        for flux in (llf_flux, hll_flux):
            H1 = flux(law, UL, UR, n)
            H2 = flux(law, UR, UL, -n)
            worst = max(worst, float(np.max(np.abs(H1 + H2) / np.maximum(1.0, np.abs(H1)))))
    uL, uR = rng.uniform(-3, 3, (2, 1000, 1))
    n2 = _unit_normals(rng, 1000, 2)
    for law, n in ((Burgers(), np.sign(rng.normal(size=(1000, 1)))), (KPP(), n2)):
        worst = max(worst, float(np.max(np.abs(llf_flux(law, uL, uR, n) + llf_flux(law, uR, uL, -n)))))
    return worst


@register("laws.llf_monotonicity", 1e-6, "central differences in each argument away from kinks")
def _llf_monotone(rng):
    worst, d = 0.0, 1e-6
    n1 = np.ones((2000, 1))
    n2 = _unit_normals(rng, 2000, 2)
    for law, n, speed in (
        (Burgers(), n1, lambda u, n: np.abs(u[:, 0] * n[:, 0])),
        (KPP(), n2, None),
        (LinearAdvection(velocity=np.array([0.7, -1.3]), dim=2), n2, None),
    ):
        uL, uR = rng.uniform(-3, 3, (2, len(n), 1))
        if speed is not None:  # avoid the switch between the two local speeds
            keep = np.abs(speed(uL, n) - speed(uR, n)) > 1e-3
            uL, uR, n = uL[keep], uR[keep], n[keep]
        dL = (llf_flux(law, uL + d, uR, n) - llf_flux(law, uL - d, uR, n)) / (2 * d)
        dR = (llf_flux(law, uL, uR + d, n) - llf_flux(law, uL, uR - d, n)) / (2 * d)
        worst = max(worst, float(np.max(-dL)), float(np.max(dR)))
    return max(worst, 0.0)


@register("laws.hll_intermediate_density", 1e-12, "HLL intermediate state from Davis bounds written out by hand")
def _hll_positive(rng):
    worst = 0.0
    g = 1.4
    for dim, (rL, vL, pL), (rR, vR, pR), n in _flux_pairs(rng):
        UL, UR = conserved_from_primitive(rL, vL, pL), conserved_from_primitive(rR, vR, pR)
        aL, aR = np.sqrt(g * pL / rL), np.sqrt(g * pR / rR)
        vnL, vnR = np.sum(vL * n, -1), np.sum(vR * n, -1)
        sm = np.minimum(vnL - aL, vnR - aR)
        sp = np.maximum(vnL + aL, vnR + aR)
        FL, FR = _euler_normal_flux(rL, vL, pL, n), _euler_normal_flux(rR, vR, pR, n)
        Ustar = (sp[:, None] * UR - sm[:, None] * UL - (FR - FL)) / (sp - sm)[:, None]
        worst = max(worst, float(np.max(-Ustar[:, 0])))
        # the code's subsonic flux must be FL + sm (U* - UL)
        sub = (sm < 0) & (sp > 0)
        H = hll_flux(Euler(dim=dim), UL[sub], UR[sub], n[sub])
        expect = FL[sub] + sm[sub, None] * (Ustar[sub] - UL[sub])
        worst = max(worst, float(np.max(np.abs(H - expect) / np.maximum(1.0, np.abs(expect)))))
    return max(worst, 0.0)


# -- DG operator ---------------------------------------------------------------------------


@register("dg.free_stream", 1e-12, "a constant state has zero residual")
def _free_stream(rng):
    worst = 0.0
    for dim in (1, 2):
        for law in _law_samples(rng, dim):
            for periodic in (True, False):
                mesh = _random_mesh(rng, dim=dim, periodic=periodic)
                p = int(rng.integers(1, 4))
                ref = reference_element(p, dim)
                if isinstance(law, Euler):
                    state = conserved_from_primitive(rng.uniform(0.5, 2), rng.uniform(-1, 1, dim), rng.uniform(0.5, 2))
                else:
                    state = np.array([rng.uniform(1.0, 3.0)])
                U = np.broadcast_to(state, (mesh.ncells, ref.ndofs, law.m)).copy()
                R = DGOperator(law, mesh, ref).residual(U)
                worst = max(worst, float(np.max(np.abs(R))) / max(1.0, float(np.max(np.abs(state)))))
    return worst


@register("dg.discrete_conservation", 1e-12, "Gauss-rule integral of the time derivative over the periodic domain")
def _dg_conservation(rng):
    worst = 0.0
    for dim in (1, 2):
        for law in _law_samples(rng, dim):
            mesh = _random_mesh(rng, dim=dim, periodic=True, min_cells=3)
            ref = reference_element(int(rng.integers(1, 4)), dim)
            U = _field_for(rng, law, mesh, ref)
            for scheme in ("dg", "weno"):
                sd = SemiDiscreteScheme(law, mesh, ref, scheme)
                dU = sd(U)
                total = _cell_integrals(dU, mesh, ref).sum(axis=0)
                scale = max(1.0, float(np.abs(_cell_integrals(np.abs(dU), mesh, ref)).sum()))
                worst = max(worst, float(np.max(np.abs(total))) / scale)
    return worst


@register("dg.l2_dissipation", 1e-12, "energy rate U^T R(U) for periodic linear advection with LLF")
def _l2_dissipation(rng):
    worst = 0.0
    for dim in (1, 2):
        for _ in range(3):
            law = LinearAdvection(velocity=rng.uniform(-2, 2, dim), dim=dim)
            mesh = _random_mesh(rng, dim=dim, periodic=True)
            ref = reference_element(int(rng.integers(1, 4)), dim)
            U = rng.normal(size=(mesh.ncells, ref.ndofs, 1))
            R = DGOperator(law, mesh, ref, flux="llf").residual(U)
            rate = float(np.sum(U * R))
            worst = max(worst, rate / max(1.0, float(np.sum(U * U))))
    return max(worst, 0.0)


@register("dg.linearity", 1e-12, "residual of a combination equals the combination of residuals")
def _dg_linearity(rng):
    worst = 0.0
    for dim in (1, 2):
        law = LinearAdvection(velocity=rng.uniform(-2, 2, dim), dim=dim)
        mesh = _random_mesh(rng, dim=dim)
        ref = reference_element(int(rng.integers(1, 4)), dim)
        op = DGOperator(law, mesh, ref)
        U, V = rng.normal(size=(2, mesh.ncells, ref.ndofs, 1))
        a, b = rng.normal(size=2)
        lhs = op.residual(a * U + b * V)
        rhs = a * op.residual(U) + b * op.residual(V)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(lhs)))))
    return worst


@register("dg.p0_upwind", 1e-12, "first-order upwind finite volumes, 64 cells, 10 forward Euler steps")
def _p0_upwind(rng):
    ncell, steps = 64, 10
    v = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    mesh = build_structured_mesh([(0.0, 1.0)], [ncell])
    ref = reference_element(0, 1)
    op = DGOperator(LinearAdvection(velocity=np.array([v])), mesh, ref, flux="llf")
    u = rng.random(ncell)
    U = u[:, None, None].copy()
    h = 1.0 / ncell
    dt = 0.5 * h / abs(v)
    for _ in range(steps):
        U = U + dt * op.mass.solve(op.residual(U))
        upwind = np.roll(u, 1) if v > 0 else np.roll(u, -1)
        u = u - dt * abs(v) / h * (u - upwind)
    return float(np.max(np.abs(U[:, 0, 0] - u)))


# -- stabilization ---------------------------------------------------------------------------


@register("stabilization.positive_semidefinite", 1e-12, "U.s(U) >= 0 and a symmetric cell operator")
def _stab_psd(rng):
    worst = 0.0
    for dim in (1, 2):
        mesh = _random_mesh(rng, dim=dim)
        ref = reference_element(int(rng.integers(1, 4)), dim)
        fld = StateField(mesh, ref, rng.normal(size=(mesh.ncells, ref.ndofs, 2)))
        for e in range(mesh.ncells):
            s = stabilization_term(fld, e, float(rng.random()), float(rng.uniform(0.01, 2)))
            worst = max(worst, -float(np.sum(fld.coeffs[e] * s)))
        sd = SemiDiscreteScheme(LinearAdvection(velocity=np.ones(dim), dim=dim), mesh, ref, "lo")
        worst = max(worst, float(np.max(np.abs(sd.K - sd.K.T))))
    return max(worst, 0.0)


@register("stabilization.constants_in_kernel", 1e-13, "cell-wise constant fields give a zero term")
def _stab_kernel(rng):
    worst = 0.0
    for dim in (1, 2):
        mesh = _random_mesh(rng, dim=dim)
        ref = reference_element(int(rng.integers(1, 4)), dim)
        c = rng.normal(size=(mesh.ncells, 1, 3)) * 10
        fld = StateField(mesh, ref, np.broadcast_to(c, (mesh.ncells, ref.ndofs, 3)).copy())
        for e in range(mesh.ncells):
            s = stabilization_term(fld, e, 1.0, 1.0)
            worst = max(worst, float(np.max(np.abs(s))) / max(1.0, float(np.max(np.abs(c[e])))))
    return worst


@register("stabilization.scheme_algebra", 1e-13, "gamma forced to 1 matches LO and gamma forced to 0 matches DG")
def _stab_algebra(rng):
    worst = 0.0
    for dim in (1, 2):
        for law in _law_samples(rng, dim)[1:]:
            mesh = _random_mesh(rng, dim=dim, periodic=True, min_cells=3)
            ref = reference_element(int(rng.integers(1, 4)), dim)
            U = _field_for(rng, law, mesh, ref)
            weno = SemiDiscreteScheme(law, mesh, ref, "weno")
            for forced, label in ((1.0, "lo"), (0.0, "dg")):
                weno.gamma_override = forced
                other = SemiDiscreteScheme(law, mesh, ref, label)
                a, b = weno.residual(U), other.residual(U)
                worst = max(worst, float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b)))))
    return worst


# -- sensor ------------------------------------------------------------------------------------


def _rough_field(rng, mesh, ref):
    kind = rng.integers(3)
    if kind == 0:
        return rng.normal(size=(mesh.ncells, ref.ndofs)) * 10.0 ** rng.uniform(-6, 6)
    if kind == 1:
        u = np.where(rng.random((mesh.ncells, 1)) < 0.5, 0.0, 1.0)
        return np.broadcast_to(u, (mesh.ncells, ref.ndofs)).copy()
    return np.sin(7 * mesh.to_physical(ref.nodes).sum(-1)) + 0.1 * rng.normal(size=(mesh.ncells, ref.ndofs))


@register("sensor.range", 0.0, "0 <= gamma <= 1 for random, step and noisy fields in both variants")
def _sensor_range(rng):
    worst = 0.0
    for _ in range(6):
        mesh = _random_mesh(rng, max_cells=8)
        ref = reference_element(int(rng.integers(1, 4)), mesh.dim)
        u = _rough_field(rng, mesh, ref)
        for cfg in (SensorConfig(q=float(rng.uniform(1, 4)), b=float(rng.random())),
                    SensorConfig(variant="zhao", theta=float(rng.uniform(0.5, 3)))):
            g = WenoSensor(mesh, ref, cfg).evaluate(u).gamma
            if not np.all(np.isfinite(g)):
                return np.inf
            worst = max(worst, float(np.max(-g)), float(np.max(g - 1.0)))
    return max(worst, 0.0)


@register("sensor.polynomial_exactness", 1e-9, "a single global polynomial of degree <= p per axis")
def _sensor_exact(rng):
    worst = 0.0
    for dim in (1, 2):
        for p in (1, 2, 3):
            mesh = _random_mesh(rng, dim=dim, periodic=False, min_cells=4, max_cells=7)
            ref = reference_element(p, dim)
            c = rng.normal(size=(p + 1,) * dim)
            lo = np.array([b[0] for b in mesh.bounds])
            xn = mesh.to_physical(ref.nodes) - lo
            if dim == 1:
                u = np.polynomial.polynomial.polyval(xn[..., 0], c)
            else:
                u = np.polynomial.polynomial.polyval2d(xn[..., 0], xn[..., 1], c)
            g = WenoSensor(mesh, ref).evaluate(u).gamma
            interior = np.all(mesh.neighbors >= 0, axis=1)
            worst = max(worst, float(np.max(g[interior])))
    return worst


@register("sensor.scale_invariance", 1e-12, "gamma of c*u equals gamma of u")
def _sensor_scale(rng):
    worst = 0.0
    for _ in range(6):
        mesh = _random_mesh(rng, max_cells=8)
        ref = reference_element(int(rng.integers(1, 4)), mesh.dim)
        u = rng.normal(size=(mesh.ncells, ref.ndofs))
        c = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        sensor = WenoSensor(mesh, ref)
        worst = max(worst, float(np.max(np.abs(sensor.evaluate(c * u).gamma - sensor.evaluate(u).gamma))))
    return worst


@register("sensor.mean_preservation", 1e-12, "Gauss-rule cell means of the reconstruction and the data")
def _sensor_means(rng):
    worst = 0.0
    for _ in range(6):
        mesh = _random_mesh(rng, max_cells=8)
        ref = reference_element(int(rng.integers(1, 4)), mesh.dim)
        u = _rough_field(rng, mesh, ref)
        rec = WenoSensor(mesh, ref).evaluate(u).reconstruction
        a = _cell_integrals(u[..., None], mesh, ref)
        b = _cell_integrals(rec[..., None], mesh, ref)
        scale = max(1e-300, mesh.cell_volume * float(np.max(np.abs(u))))
        worst = max(worst, float(np.max(np.abs(a - b))) / scale)
    return worst


@register("sensor.discontinuity_response", 0.0,
          "nodal samples of a unit step at a face (value 1/2 on the face): both adjacent cells exceed 0.5")
def _sensor_step(rng):
    # With the jump exactly between cells both neighbors would be cell-wise
    # constant, where gamma is zero by definition; the half value on the
    # shared face nodes gives both cells a nonconstant polynomial.
    worst = 0.0
    for dim in (1, 2):
        for p in (1, 2, 3):
            n = int(rng.integers(4, 9))
            # open boundaries (a periodic wrap would add a second jump), and
            # the step kept off the boundary cells so both sides have a
            # constant neighbor
            mesh = build_structured_mesh([(0.0, 1.0)] * dim, [n] * dim, BoundaryTag.OUTFLOW)
            ref = reference_element(p, dim)
            xf = int(rng.integers(2, n - 1)) / n
            x = mesh.to_physical(ref.nodes)[..., 0]
            u = np.where(np.abs(x - xf) < 1e-12, 0.5, np.where(x < xf, 0.0, 1.0))
            g = WenoSensor(mesh, ref, SensorConfig(q=1.0, b=0.0)).evaluate(u).gamma
            adjacent = np.abs(mesh.cell_center[:, 0] - xf) < 0.5 * mesh.spacing[0] * (1 + 1e-9)
            worst = max(worst, 0.5 - float(np.min(g[adjacent])))
    return max(worst, 0.0)


# -- time integration -----------------------------------------------------------------------------


def _butcher(tableau):
    """Butcher (A, b) of a Shu-Osher tableau by expanding each stage in the stage slopes."""
    alpha, beta = tableau
    s = len(alpha)
    coef = [np.zeros(s)]  # stage j = u + dt * coef[j] . k
    for i in range(s):
        c = np.zeros(s)
        for j, (a, b) in enumerate(zip(alpha[i], beta[i])):
            c += a * coef[j]
            c[j] += b
        coef.append(c)
    return np.array(coef[:s]), coef[s]


def _order_defect(A, b, order):
    """Largest violation of the rooted-tree order conditions up to ``order`` (at most 4)."""
    c = A.sum(axis=1)
    conds = [(b.sum(), 1.0)]
    if order >= 2:
        conds.append((b @ c, 1 / 2))
    if order >= 3:
        conds += [(b @ c**2, 1 / 3), (b @ A @ c, 1 / 6)]
    if order >= 4:
        conds += [(b @ c**3, 1 / 4), (b @ (c * (A @ c)), 1 / 8), (b @ A @ c**2, 1 / 12), (b @ A @ A @ c, 1 / 24)]
    return max(abs(v - t) for v, t in conds)


@register("time.convex_identity", 1e-14, "nonnegative Shu-Osher coefficients and a zero right-hand side leaving the state unchanged up to rounding")
def _time_identity(rng):
    worst = 0.0
    u = rng.normal(size=(7, 3, 2)) * 1e3
    for name, (alpha, beta) in TABLEAUX.items():
        for arow, brow in zip(alpha, beta):
            if abs(sum(arow) - 1.0) > 1e-14 or min(min(arow), min(brow)) < 0.0:
                worst = np.inf
        out = step(name, lambda v, t: np.zeros_like(v), u, float(rng.uniform(1e-3, 1)))
        worst = max(worst, float(np.max(np.abs(out - u) / np.abs(u))))
    return worst


@register("time.order", 0.1, "fitted slope of errors on u' = -u over four halvings of dt")
def _time_order(rng):
    worst = 0.0
    for name, order in (("ssprk22", 2), ("ssprk33", 3), ("ssprk54", 4)):
        u0 = float(rng.uniform(0.5, 2.0))
        dts = 0.1 / 2.0 ** np.arange(5)
        errs = []
        for dt in dts:
            u = np.array([u0])
            for k in range(int(round(1.0 / dt))):
                u = step(name, lambda v, t: -v, u, dt, k * dt)
            errs.append(abs(u[0] - u0 * np.exp(-1.0)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        worst = max(worst, abs(slope - order))
    return worst


@register("time.tree_conditions", 1e-12, "rooted-tree order conditions of the Butcher form")
def _time_trees(rng):
    orders = {"ssprk22": 2, "ssprk33": 3, "ssprk54": 4}
    return max(_order_defect(*_butcher(TABLEAUX[name]), k) for name, k in orders.items())


@register("time.mass_conservation", 1e-11, "relative change of the domain integral per step on periodic runs")
def _time_mass(rng):
    worst = 0.0
    for dim, law in ((1, Burgers()), (2, KPP()), (1, Euler(dim=1))):
        mesh = _random_mesh(rng, dim=dim, periodic=True, min_cells=4, max_cells=8)
        ref = reference_element(int(rng.integers(1, 4)), dim)
        U = _field_for(rng, law, mesh, ref)
        sd = SemiDiscreteScheme(law, mesh, ref, "weno")
        for k in range(3):
            before = _cell_integrals(U, mesh, ref).sum(axis=0)
            U = step("ssprk33", sd, U, 1e-3 * mesh.spacing.min())
            after = _cell_integrals(U, mesh, ref).sum(axis=0)
            worst = max(worst, float(np.max(np.abs(after - before) / np.maximum(1.0, np.abs(before)))))
    return worst


# -- reference solutions -----------------------------------------------------------------------------


def _random_riemann(rng):
    while True:
        L = (rng.uniform(0.1, 5), rng.uniform(-1, 1), rng.uniform(0.1, 5))
        R = (rng.uniform(0.1, 5), rng.uniform(-1, 1), rng.uniform(0.1, 5))
        try:
            return L, R, ExactRiemannSolver(L, R)
        except ValueError:
            continue


@register("problems.riemann_far_field", 1e-14, "rays far outside the wave fan return the input states")
def _riemann_far(rng):
    worst = 0.0
    for _ in range(50):
        L, R, rs = _random_riemann(rng)
        worst = max(worst, float(np.max(np.abs(np.subtract(rs.sample(-1e6), L)))),
                    float(np.max(np.abs(np.subtract(rs.sample(1e6), R)))))
    return worst


@register("problems.riemann_degenerate", 1e-12, "equal states give that state on every ray")
def _riemann_same(rng):
    worst = 0.0
    for _ in range(20):
        s = (rng.uniform(0.1, 5), rng.uniform(-1, 1), rng.uniform(0.1, 5))
        rs = ExactRiemannSolver(s, s)
        for xi in rng.uniform(-10, 10, 10):
            worst = max(worst, float(np.max(np.abs(np.subtract(rs.sample(xi), s)))))
    return worst


@register("problems.burgers_newton", 1e-12, "characteristic residual u - sin(2 pi (x - u t))")
def _burgers_newton(rng):
    x = rng.random((500, 1))
    worst = 0.0
    for t in rng.uniform(0, 0.99 / (2 * np.pi), 10):
        u = burgers_exact(x, t)[..., 0]
        worst = max(worst, float(np.max(np.abs(u - np.sin(2 * np.pi * (x[:, 0] - u * t))))))
    return worst


def _euler_flux_1d(rho, u, p, g=1.4):
    E = p / (g - 1) + 0.5 * rho * u * u
    return np.array([rho * u, rho * u * u + p, (E + p) * u]), np.array([rho, rho * u, E])


@register("problems.rankine_hugoniot", 1e-10, "jump conditions across the computed shock")
def _rankine_hugoniot(rng):
    worst = 0.0
    cases = [((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))]
    for _ in range(20):
        rhoL, pL = rng.uniform(1, 5, 2)
        cases.append(((rhoL, rng.uniform(-0.5, 0.5), pL), (rng.uniform(0.1, 1), rng.uniform(-0.5, 0.5), rng.uniform(0.05, 0.5))))
    for L, R in cases:
        rs = ExactRiemannSolver(L, R)
        st = rs.star
        if st.p <= R[2]:
            continue
        s = rs.shock_speed("right")
        F1, U1 = _euler_flux_1d(*R)
        F2, U2 = _euler_flux_1d(st.rho_right, st.u, st.p)
        worst = max(worst, float(np.max(np.abs((F2 - F1) - s * (U2 - U1)) / np.maximum(1.0, np.abs(F2)))))
    return worst


def _bisection_star(L, R, g=1.4):
    """Star pressure and velocity by bisection on the two-wave velocity balance."""

    def wave(p, rho, pk):
        a = np.sqrt(g * pk / rho)
        if p > pk:
            return (p - pk) * np.sqrt(2 / ((g + 1) * rho) / (p + (g - 1) / (g + 1) * pk))
        return 2 * a / (g - 1) * ((p / pk) ** ((g - 1) / (2 * g)) - 1)

    def balance(p):
        return wave(p, L[0], L[2]) + wave(p, R[0], R[2]) + R[1] - L[1]

    lo, hi = 1e-12, 1.0
    while balance(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if balance(mid) < 0 else (lo, mid)
    p = 0.5 * (lo + hi)
    return p, 0.5 * (L[1] + R[1]) + 0.5 * (wave(p, R[0], R[2]) - wave(p, L[0], L[2]))


@register("problems.riemann_star_bisection", 1e-10, "bisection on the pressure balance, Sod and random pairs")
def _riemann_star(rng):
    sod = ExactRiemannSolver((1.0, 0.0, 1.0), (0.125, 0.0, 0.1)).star
    # published five-digit Sod star values
    worst = 0.0 if abs(sod.p - 0.30313) < 5e-6 and abs(sod.u - 0.92745) < 5e-6 else 1.0
    for _ in range(20):
        L, R, rs = _random_riemann(rng)
        p, u = _bisection_star(L, R)
        worst = max(worst, abs(rs.star.p - p) / p, abs(rs.star.u - u) / max(1.0, abs(u)))
    return worst


# -- harness -----------------------------------------------------------------------------------------


def _small_config(**kw):
    from .harness import RunConfig

    base = dict(problem="sod", p=1, counts=(32,), t_final=0.02)
    base.update(kw)
    return RunConfig(**base)


@register("harness.label_algebra", 1e-13, "one step of WENO with forced gamma against DG and LO")
def _harness_labels(rng):
    from .harness import build_run

    worst = 0.0
    for problem in ("sod", "advect_composite"):
        cfg = _small_config(problem=problem, p=int(rng.integers(1, 4)))
        _, weno, f0 = build_run(cfg)
        for forced, label in ((0.0, "dg"), (1.0, "lo")):
            weno.gamma_override = forced
            _, other, _ = build_run(cfg.replace(scheme=label))
            dt = 1e-3
            a = step("ssprk33", weno, f0.coeffs, dt)
            b = step("ssprk33", other, f0.coeffs, dt)
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


@register("harness.determinism", 0.0, "byte comparison of two solution files from identical configs")
def _harness_determinism(rng):
    from .harness import run_simulation

    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for k in range(2):
            out = Path(tmp) / str(k)
            run_simulation(_small_config(out=str(out), dump_sensor=True))
            blobs.append((out / "solution.csv").read_bytes() + (out / "sensor.csv").read_bytes())
    return float(blobs[0] != blobs[1])


@register("harness.ranges_match_dump", 0.0, "min/max recomputed from the written solution file")
def _harness_ranges(rng):
    from .harness import run_simulation

    worst = 0.0
    with tempfile.TemporaryDirectory() as tmp:
        for problem, counts in (("sod", (32,)), ("kpp", (6, 6))):
            rep = run_simulation(_small_config(problem=problem, counts=counts, out=tmp, t_final=0.01))
            with open(Path(tmp) / "solution.csv") as fh:
                rows = list(csv.DictReader(fh))
            for name, (lo, hi) in rep.ranges.items():
                vals = [float(r[name]) for r in rows]
                worst = max(worst, abs(min(vals) - lo), abs(max(vals) - hi))
    return worst


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="run the invariant suite")
    parser.add_argument("--filter", default=None)
    args = parser.parse_args(argv)
    return 0 if run_suite(args.filter).ok else 1


if __name__ == "__main__":
    sys.exit(main())
