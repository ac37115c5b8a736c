"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Reference numbers are the published tables and figure captions; the lines
are repeated in the terminal summary under "acceptance criteria".
"""

import io
import math
import time

import numpy as np
import pytest

from dgweno.harness import RunConfig, convergence_study, run_simulation
from dgweno.laws import pressure
from dgweno.properties import run_suite

pytestmark = pytest.mark.acceptance

# DG L1 errors per degree for E_h = 16, 32, ... (published tables)
ADVECTION_DG = {
    1: [7.28e-03, 1.67e-03, 3.97e-04, 9.69e-05, 2.39e-05],
    2: [1.59e-04, 1.95e-05, 2.43e-06, 3.03e-07, 3.78e-08],
    3: [3.86e-06, 2.40e-07, 1.50e-08, 9.35e-10],
}
BURGERS_DG = {
    1: [8.59e-03, 2.07e-03, 5.17e-04, 1.32e-04, 3.36e-05],
    2: [3.52e-04, 9.34e-05, 1.21e-05, 1.54e-06, 1.95e-07],
    3: [1.28e-04, 8.65e-06, 5.10e-07, 3.22e-08],
}
MESHES = [16, 32, 64, 128, 256]


def _convergence(problem, table, verdict, label):
    start = time.perf_counter()
    ok = True
    for p, ref in table.items():
        rows = convergence_study(RunConfig(problem=problem, p=p), MESHES[: len(ref)])
        by = {s: [r for r in rows if r.scheme == s] for s in ("dg", "lo", "weno")}
        rel = [abs(r.error / e - 1.0) for r, e in zip(by["dg"], ref)]
        worst = max(rel)
        ok &= verdict(f"{label} p={p} DG errors within 10% of table", worst <= 0.10,
                      "max rel. deviation %.3f (%s)" % (worst, ", ".join("%.2e" % r.error for r in by["dg"])))
        for scheme, target, tol in (("dg", p + 1, 0.15), ("lo", 1.0, 0.15), ("weno", p + 1, 0.3)):
            eoc = by[scheme][-1].eoc
            ok &= verdict(f"{label} p={p} {scheme.upper()} finest EOC {target}±{tol}",
                          abs(eoc - target) <= tol, "EOC %.3f" % eoc)
        if p == 1:
            ratio = by["weno"][-1].error / by["dg"][-1].error
            ok &= verdict(f"{label} p=1 WENO within 2x of DG at E_h=256", ratio <= 2.0,
                          "WENO %.3e, DG %.3e, ratio %.2f" % (by["weno"][-1].error, by["dg"][-1].error, ratio))
    wall = time.perf_counter() - start
    ok &= verdict(f"{label} runtime < 5 min", wall < 300, "%.0f s" % wall)
    return ok


def test_criterion1_advection_convergence(verdict):
    assert _convergence("advect_smooth", ADVECTION_DG, verdict, "C1 advection")


def test_criterion2_burgers_convergence(verdict):
    assert _convergence("burgers_sine", BURGERS_DG, verdict, "C2 Burgers")


def _range(rep, comp):
    return rep.ranges[comp]


def test_criterion3_solid_body_rotation(verdict):
    start = time.perf_counter()
    cfg = RunConfig(problem="solid_body_rotation", p=2, counts=(64, 64), write_files=False)
    weno = run_simulation(cfg)
    dg = run_simulation(cfg.replace(scheme="dg"))
    wall = time.perf_counter() - start
    lo, hi = _range(weno, "u")
    dlo, dhi = _range(dg, "u")
    ok = verdict("C3 rotation WENO completes", weno.success, str(weno.failure or ""))
    ok &= verdict("C3 rotation WENO range within [-0.02, 1.02]", lo >= -0.02 and hi <= 1.02,
                  "[%.4f, %.4f]" % (lo, hi))
    ok &= verdict("C3 rotation WENO max >= 0.85", hi >= 0.85, "max %.4f" % hi)
    ok &= verdict("C3 rotation DG over/undershoot", dhi > 1.05 or dlo < -0.05, "[%.4f, %.4f]" % (dlo, dhi))
    ok &= verdict("C3 rotation runtime < 10 min", wall < 600, "%.0f s" % wall)
    assert ok


def test_criterion4_kpp(verdict):
    start = time.perf_counter()
    cfg = RunConfig(problem="kpp", p=2, counts=(64, 64), write_files=False)
    weno = run_simulation(cfg)
    dg = run_simulation(cfg.replace(scheme="dg"))
    wall = time.perf_counter() - start
    a, b = math.pi / 4, 3.5 * math.pi
    lo, hi = _range(weno, "u")
    dlo, dhi = _range(dg, "u")
    ok = verdict("C4 KPP WENO completes", weno.success, str(weno.failure or ""))
    ok &= verdict("C4 KPP WENO range within [pi/4-0.1, 7pi/2+0.1]", lo >= a - 0.1 and hi <= b + 0.1,
                  "[%.4f, %.4f]" % (lo, hi))
    ok &= verdict("C4 KPP DG violates bounds by > 1", dlo < a - 1.0 or dhi > b + 1.0,
                  "[%.4f, %.4f]%s" % (dlo, dhi, "" if dg.success else " (stopped at t=%.4f)" % dg.t))
    ok &= verdict("C4 KPP runtime < 10 min", wall < 600, "%.0f s" % wall)
    assert ok


def _sod_like(problem, label, verdict, with_dg):
    start = time.perf_counter()
    cfg = RunConfig(problem=problem, p=2, counts=(128,), write_files=False)
    weno = run_simulation(cfg)
    lo_rep = run_simulation(cfg.replace(scheme="lo"))
    dg = run_simulation(cfg.replace(scheme="dg")) if with_dg else None
    wall = time.perf_counter() - start
    ok = verdict(f"{label} WENO and LO complete", weno.success and lo_rep.success)
    ew, el = weno.l1_error["rho"], lo_rep.l1_error["rho"]
    ok &= verdict(f"{label} WENO density L1 < LO density L1", ew < el, "WENO %.3e, LO %.3e" % (ew, el))
    return ok, weno, dg, wall


def test_criterion5_sod(verdict):
    ok, weno, dg, wall = _sod_like("sod", "C5 Sod", verdict, True)
    lo, hi = _range(weno, "rho")
    ok &= verdict("C5 Sod WENO density within [0.115, 1.01]", lo >= 0.115 and hi <= 1.01, "[%.4f, %.4f]" % (lo, hi))
    dlo, dhi = _range(dg, "rho")
    note = "" if dg.success else " (last valid state, DG stopped at t=%.4f)" % dg.t
    ok &= verdict("C5 Sod DG overshoot > 1.005 or undershoot < 0.120", dhi > 1.005 or dlo < 0.120,
                  "[%.4f, %.4f]%s" % (dlo, dhi, note))
    ok &= verdict("C5 Sod runtime < 1 min", wall < 60, "%.0f s" % wall)
    assert ok


def test_criterion6_modified_sod(verdict):
    ok, _, _, wall = _sod_like("sod_modified", "C6 modified Sod", verdict, False)
    ok &= verdict("C6 modified Sod runtime < 1 min", wall < 60, "%.0f s" % wall)
    assert ok


def _physical(rep):
    U = rep.field.coeffs
    return bool(np.all(np.isfinite(U)) and U[..., 0].min() > 0 and pressure(U).min() > 0)


def test_criterion7_robustness(verdict):
    start = time.perf_counter()
    ok = True
    for problem in ("lax", "shu_osher", "blast_wave"):
        for p in (1, 2):
            rep = run_simulation(RunConfig(problem=problem, p=p, counts=(512,), write_files=False))
            ok &= verdict(f"C7 {problem} p={p} E_h=512 completes with positive density/pressure",
                          rep.success and _physical(rep),
                          "t=%.4f, steps %d, %.0f s%s" % (rep.t, rep.steps, rep.wall_time,
                                                           "" if rep.success else ", " + rep.failure["message"]))
    rep = run_simulation(RunConfig(problem="double_mach", p=2, counts=(96, 24), write_files=False))
    ok &= verdict("C7 double_mach p=2 96x24 completes with positive density/pressure",
                  rep.success and _physical(rep),
                  "t=%.4f, steps %d, %.0f s%s" % (rep.t, rep.steps, rep.wall_time,
                                                   "" if rep.success else ", " + rep.failure["message"]))
    wall = time.perf_counter() - start
    ok &= verdict("C7 runtime < 20 min", wall < 1200, "%.0f s" % wall)
    assert ok


def test_criterion8_property_suite(verdict):
    start = time.perf_counter()
    stream = io.StringIO()
    report = run_suite(stream=stream)
    wall = time.perf_counter() - start
    failed = ", ".join(r.name for r in report.failures) or "none"
    ok = verdict("C8 property suite 100% pass", report.ok, "blocking failures: " + failed)
    ok &= verdict("C8 runtime < 2 min", wall < 120, "%.1f s" % wall)
    assert ok
