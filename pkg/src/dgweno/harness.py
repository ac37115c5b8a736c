"""Run driver: time loop, error norms, convergence tables, sensor comparison, file output."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .basis import gauss_rule, tensor_basis
from .dg import GhostPolicy, StateField, reference_element
from .laws import Euler, InvalidStateError
from .mesh import build_structured_mesh
from .problems import (
    BenchmarkProblem,
    ExactSolutionUnavailable,
    exact_solution,
    get_benchmark,
    project_initial_condition,
)
from .sensor import SensorConfig
from .stabilization import SCHEMES, SemiDiscreteScheme
from .timestepping import ORDER_TO_SCHEME, TABLEAUX, cfl_timestep, step, viscous_timestep


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def read_config_file(path) -> dict:
    """Raw key/value pairs of a JSON config file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


@dataclass
class RunConfig:
    problem: str = "advect_smooth"
    scheme: str = "weno"
    p: int = 2
    counts: tuple[int, ...] | None = None
    flux: str | None = None
    # sensor
    sensor: str = "relative"
    q: float = 1.0
    b: float = 0.0
    theta: float = 1.0
    neighbor_weight: float = 0.001
    derivative_weight: float = 1.0
    # time stepping
    cfl: float = 0.3
    t_final: float | None = None
    time_scheme: str | None = None
    dt: float | None = None
    # initial data and errors
    projection: str | None = None
    error_points: int | None = None
    # output
    out: str | None = None
    dump_sensor: bool = False
    write_files: bool = True

    def __post_init__(self):
        if self.counts is not None:
            self.counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        self.validate()

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ConfigError(f"p must be a positive integer, got {self.p!r}")
        if self.cfl <= 0:
            raise ConfigError("cfl must be positive")
        if self.time_scheme is not None and self.time_scheme not in TABLEAUX:
            raise ConfigError(f"unknown time scheme {self.time_scheme!r}")
        if self.flux is not None and self.flux not in ("llf", "hll"):
            raise ConfigError(f"unknown flux {self.flux!r}")
        if self.projection not in (None, "l2", "interpolate"):
            raise ConfigError(f"unknown projection {self.projection!r}")
        try:
            self.sensor_config()
        except ValueError as err:
            raise ConfigError(str(err)) from None

    def sensor_config(self) -> SensorConfig:
        return SensorConfig(
            q=self.q, b=self.b, variant=self.sensor, theta=self.theta,
            neighbor_weight=self.neighbor_weight, derivative_weight=self.derivative_weight,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigError(str(err)) from None

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_dict(read_config_file(path))

    def replace(self, **changes) -> "RunConfig":
        data = asdict(self)
        data.update(changes)
        return RunConfig(**data)


@dataclass
class RunReport:
    config: RunConfig
    success: bool
    t: float
    steps: int
    wall_time: float
    ranges: dict[str, tuple[float, float]]
    l1_error: dict[str, float] | None
    dissipation: float
    field: StateField
    failure: dict | None = None
    gamma: np.ndarray | None = None
    nu: np.ndarray | None = None
    outputs: list[str] = field(default_factory=list)

    def metrics(self) -> dict:
        return {
            "problem": self.config.problem,
            "scheme": self.config.scheme,
            "p": self.config.p,
            "counts": list(self.field.mesh.counts),
            "success": self.success,
            "t": self.t,
            "steps": self.steps,
            "wall_time": self.wall_time,
            "ranges": {k: list(v) for k, v in self.ranges.items()},
            "l1_error": self.l1_error,
            "dissipation": self.dissipation,
            "failure": self.failure,
        }


def component_names(problem: BenchmarkProblem) -> list[str]:
    if isinstance(problem.law, Euler):
        return ["rho"] + [f"m{a}" for a in "xy"[: problem.dim]] + ["E"]
    return ["u"]


def nodal_ranges(field: StateField, names: list[str]) -> dict[str, tuple[float, float]]:
    U = field.coeffs
    return {n: (float(U[..., c].min()), float(U[..., c].max())) for c, n in enumerate(names)}


def l1_error(field: StateField, problem: BenchmarkProblem, t: float, npoints: int | None = None) -> np.ndarray:
    """Per-component ``sum_e int_K |u_h - u_exact|`` with a (p+2)-point Gauss rule per axis."""
    rule = gauss_rule(field.mesh.dim, npoints or field.p + 2)
    x = field.mesh.to_physical(rule.points)
    uh = np.einsum("qj,ejc->eqc", tensor_basis(field.p, rule.points), field.coeffs)
    ue = exact_solution(problem, x, t)
    return np.einsum("eqc,q->c", np.abs(uh - ue), rule.weights) * field.mesh.cell_volume


def compute_eoc(errors) -> list[float]:
    """Pairwise orders ``log(E2/E1) / log(h2/h1)`` for a list of ``(h, E)``."""
    errors = [(float(h), float(e)) for h, e in errors]
    if len(errors) < 2:
        raise ValueError("need at least two (h, error) pairs")
    for h, e in errors:
        if h <= 0 or e <= 0:
            raise ValueError("mesh sizes and errors must be positive")
    for (h1, _), (h2, _) in zip(errors, errors[1:]):
        if not h2 < h1:
            raise ValueError("mesh sizes must decrease strictly")
    return [math.log(e2 / e1) / math.log(h2 / h1) for (h1, e1), (h2, e2) in zip(errors, errors[1:])]


def _first_bad_cell(U: np.ndarray) -> int:
    bad = ~np.isfinite(U).reshape(len(U), -1).all(axis=1)
    return int(np.argmax(bad))


def build_run(config: RunConfig, problem: BenchmarkProblem | None = None):
    problem = problem or get_benchmark(config.problem)
    if config.flux == "hll" and not isinstance(problem.law, Euler):
        raise ConfigError("the HLL flux is only available for the Euler equations")
    counts = config.counts or problem.counts
    if len(counts) != problem.dim:
        raise ConfigError(f"{problem.name} needs {problem.dim} mesh counts, got {len(counts)}")
    mesh = build_structured_mesh(problem.bounds, counts, problem.boundary)
    ref = reference_element(config.p, problem.dim)
    policy = GhostPolicy(problem.ghost_rules)
    scheme = SemiDiscreteScheme(
        problem.law, mesh, ref, config.scheme, policy, config.flux, config.sensor_config()
    )
    field0 = project_initial_condition(problem, mesh, ref, config.projection)
    return problem, scheme, field0


def integrate(scheme: SemiDiscreteScheme, U: np.ndarray, t_final: float, cfl: float,
              time_scheme: str, dt_fixed: float | None = None, t0: float = 0.0):
    """Advance ``U`` to ``t_final``; returns (U, t, steps).

    An InvalidStateError leaves with ``step``, ``time`` and ``state`` (the
    last valid coefficients) attached.
    """
    t, steps = t0, 0
    h, p = scheme.mesh.cell_size, scheme.ref.p
    while t < t_final * (1.0 - 1e-14):
        remaining = t_final - t
        try:
            if dt_fixed is not None:
                dt = min(dt_fixed, remaining)
            else:
                dt = cfl_timestep(scheme.max_speed(U), h, p, cfl, remaining)
                dt = min(dt, viscous_timestep(scheme.max_viscosity(U), scheme.viscous_radius, time_scheme))
            Unew = step(time_scheme, scheme, U, dt, t)
            if not np.all(np.isfinite(Unew)):
                raise InvalidStateError("non-finite state", cell=_first_bad_cell(Unew))
        except InvalidStateError as err:
            err.step = steps + 1
            err.time = t
            err.state = U
            raise
        U, t, steps = Unew, t + dt, steps + 1
    return U, t, steps


def run_simulation(config: RunConfig, problem: BenchmarkProblem | None = None) -> RunReport:
    problem, scheme, field0 = build_run(config, problem)
    names = component_names(problem)
    t_final = config.t_final if config.t_final is not None else problem.t_final
    time_scheme = config.time_scheme or "ssprk33"
    failure = None
    start = time.perf_counter()
    U = field0.coeffs
    t, steps = 0.0, 0
    try:
        U, t, steps = integrate(scheme, U, t_final, config.cfl, time_scheme, config.dt)
    except InvalidStateError as err:
        failure = {
            "message": str(err),
            "step": getattr(err, "step", None),
            "time": getattr(err, "time", None),
            "cell": err.cell,
            "stage": err.stage,
        }
        steps = (getattr(err, "step", None) or 1) - 1
        t = getattr(err, "time", None) or 0.0
        U = getattr(err, "state", U)
    wall = time.perf_counter() - start
    final = StateField(field0.mesh, field0.ref, U)

    errors = None
    if failure is None:
        try:
            err = l1_error(final, problem, t, config.error_points)
            errors = {n: float(e) for n, e in zip(names, err)}
        except ExactSolutionUnavailable:
            pass

    gamma = nu = None
    if scheme.last is not None:
        gamma, nu = scheme.last.gamma, scheme.last.nu
    report = RunReport(
        config, failure is None, t, steps, wall, nodal_ranges(final, names), errors,
        scheme.dissipation, final, failure, gamma, nu,
    )
    if config.out and config.write_files:
        write_outputs(report, problem, scheme, Path(config.out))
    return report


# -- output ---------------------------------------------------------------------


def write_solution_csv(path: Path, field: StateField, names: list[str]) -> None:
    xn = field.nodes()
    axes = ["x", "y"][: field.mesh.dim]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_id"] + axes + names)
        for e in range(field.mesh.ncells):
            for j in range(field.ref.ndofs):
                w.writerow([e] + [repr(float(v)) for v in xn[e, j]] +
                           [repr(float(v)) for v in field.coeffs[e, j]])


def write_sensor_csv(path: Path, scheme: SemiDiscreteScheme, U: np.ndarray) -> None:
    gamma = scheme.gamma(U)
    nu = scheme.max_speed(U) * scheme.mesh.cell_size / (2 * scheme.ref.p)
    beta = None
    if scheme.sensor is not None:
        beta = scheme.sensor.evaluate(U[..., scheme.sensor.config.component]).beta
    nloc = 2 * scheme.mesh.dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_id", "gamma", "nu"] + [f"beta_{l}" for l in range(nloc + 1)])
        for e in range(scheme.mesh.ncells):
            b = ["" if beta is None or np.isnan(v) else repr(float(v))
                 for v in (beta[e] if beta is not None else [np.nan] * (nloc + 1))]
            w.writerow([e, repr(float(gamma[e])), repr(float(nu[e]))] + b)


def write_vtk(path: Path, field: StateField, names: list[str]) -> None:
    """Legacy ASCII unstructured grid; each cell split into p x p quads over its nodes."""
    mesh, p = field.mesh, field.p
    pts = field.nodes().reshape(-1, 2)
    N = field.ref.ndofs
    quads = []
    for e in range(mesh.ncells):
        base = e * N
        for jy in range(p):
            for jx in range(p):
                a = base + jy * (p + 1) + jx
                quads.append((a, a + 1, a + p + 2, a + p + 1))
    lines = ["# vtk DataFile Version 3.0", "dg solution", "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {len(pts)} double"]
    lines += [f"{x!r} {y!r} 0.0" for x, y in pts]
    lines.append(f"CELLS {len(quads)} {5 * len(quads)}")
    lines += ["4 " + " ".join(map(str, q)) for q in quads]
    lines.append(f"CELL_TYPES {len(quads)}")
    lines += ["9"] * len(quads)
    lines.append(f"POINT_DATA {len(pts)}")
    values = field.coeffs.reshape(-1, field.m)
    for c, name in enumerate(names):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(v)) for v in values[:, c]]
    path.write_text("\n".join(lines) + "\n")


def write_outputs(report: RunReport, problem: BenchmarkProblem, scheme: SemiDiscreteScheme, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    names = component_names(problem)
    files = [out / "solution.csv", out / "metrics.json"]
    write_solution_csv(files[0], report.field, names)
    files[1].write_text(json.dumps(report.metrics(), indent=2) + "\n")
    if report.config.dump_sensor and report.success:
        files.append(out / "sensor.csv")
        write_sensor_csv(files[-1], scheme, report.field.coeffs)
    if problem.dim == 2:
        files.append(out / "solution.vtk")
        write_vtk(files[-1], report.field, names)
    report.outputs = [str(f) for f in files]


# -- experiments ----------------------------------------------------------------


@dataclass
class ConvergenceRow:
    scheme: str
    cells: int
    h: float
    error: float
    eoc: float | None


def convergence_study(config: RunConfig, meshes, schemes=("dg", "lo", "weno")) -> list[ConvergenceRow]:
    """L1 errors and EOCs per scheme over 1D meshes (or n x n in 2D).

    Time integration uses the SSP scheme of order p+1 unless the config
    names one explicitly.
    """
    problem = get_benchmark(config.problem)
    if problem.exact is None:
        raise ExactSolutionUnavailable(f"no exact solution for {problem.name}")
    meshes = [int(n) for n in meshes]
    time_scheme = config.time_scheme or ORDER_TO_SCHEME.get(config.p + 1)
    if time_scheme is None:
        raise ConfigError(f"no SSP scheme of order {config.p + 1}")
    rows: list[ConvergenceRow] = []
    for sch in schemes:
        errs = []
        for n in meshes:
            cfg = config.replace(scheme=sch, counts=(n,) * problem.dim, time_scheme=time_scheme,
                                 write_files=False)
            rep = run_simulation(cfg, problem)
            if not rep.success:
                raise InvalidStateError(f"{sch} run on {n} cells failed: {rep.failure['message']}")
            h = (problem.bounds[0][1] - problem.bounds[0][0]) / n
            errs.append((h, next(iter(rep.l1_error.values()))))
        eocs = [None] + (compute_eoc(errs) if len(errs) > 1 else [])
        rows += [ConvergenceRow(sch, n, h, e, o) for n, (h, e), o in zip(meshes, errs, eocs)]
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "eoc.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme", "E_h", "h", "error", "eoc"])
            for r in rows:
                w.writerow([r.scheme, r.cells, repr(r.h), f"{r.error:.6e}",
                            "" if r.eoc is None else f"{r.eoc:.4f}"])
    return rows


DEFAULT_SENSORS = {
    "gamma": {"sensor": "relative", "b": 0.0},
    "gamma_b0.1": {"sensor": "relative", "b": 0.1},
    "gamma_b0.2": {"sensor": "relative", "b": 0.2},
    "gamma_zhao": {"sensor": "zhao", "theta": 1.0},
}


def compare_sensors(config: RunConfig, sensors: dict | None = None) -> dict[str, RunReport]:
    """One WENO run per sensor variant; writes a density overlay CSV when ``out`` is set."""
    sensors = sensors or DEFAULT_SENSORS
    reports = {}
    for label, changes in sensors.items():
        cfg = config.replace(scheme="weno", write_files=False, **changes)
        reports[label] = run_simulation(cfg)
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        labels = list(reports)
        ref_field = reports[labels[0]].field
        x = ref_field.nodes()[..., 0].reshape(-1)
        with open(out / "sensors.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x"] + [f"rho_{l}" for l in labels])
            cols = [reports[l].field.coeffs[..., 0].reshape(-1) for l in labels]
            for i in range(len(x)):
                w.writerow([repr(float(x[i]))] + [repr(float(c[i])) for c in cols])
        summary = {l: {"dissipation": r.dissipation, "success": r.success,
                       "ranges": {k: list(v) for k, v in r.ranges.items()},
                       "l1_error": r.l1_error} for l, r in reports.items()}
        (out / "metrics.json").write_text(json.dumps(summary, indent=2) + "\n")
    return reports
