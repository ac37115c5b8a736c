"""Explicit SSP Runge-Kutta steppers and CFL time-step selection."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .laws import InvalidStateError
from .stabilization import cell_wave_speeds

Rhs = Callable[[np.ndarray, float], np.ndarray]

# Shu-Osher form: stage i = sum_j alpha[i][j] u_j + dt * beta[i][j] L(u_j)
_SSPRK22 = (
    [[1.0], [0.5, 0.5]],
    [[1.0], [0.0, 0.5]],
)
_SSPRK33 = (
    [[1.0], [0.75, 0.25], [1.0 / 3.0, 0.0, 2.0 / 3.0]],
    [[1.0], [0.0, 0.25], [0.0, 0.0, 2.0 / 3.0]],
)
# Spiteri & Ruuth SSPRK(5,4)
_SSPRK54 = (
    [
        [1.0],
        [0.444370493651235, 0.555629506348765],
        [0.620101851488403, 0.0, 0.379898148511597],
        [0.178079954393132, 0.0, 0.0, 0.821920045606868],
        [0.0, 0.0, 0.517231671970585, 0.096059710526147, 0.386708617503269],
    ],
    [
        [0.391752226571890],
        [0.0, 0.368410593050371],
        [0.0, 0.0, 0.251891774271694],
        [0.0, 0.0, 0.0, 0.544974750228521],
        [0.0, 0.0, 0.0, 0.063692468666290, 0.226007483236906],
    ],
)

TABLEAUX = {"ssprk22": _SSPRK22, "ssprk33": _SSPRK33, "ssprk54": _SSPRK54}
ORDER_TO_SCHEME = {2: "ssprk22", 3: "ssprk33", 4: "ssprk54"}


@dataclass
class TimeStepConfig:
    cfl: float = 0.3
    t_final: float = 1.0
    scheme: str = "ssprk33"
    dt: float | None = None

    def __post_init__(self):
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        if self.scheme not in TABLEAUX:
            raise ValueError(f"unknown time scheme {self.scheme!r}")


def _eval(rhs: Rhs, u, t, stage: int):
    try:
        return rhs(u, t)
    except InvalidStateError as err:
        err.stage = stage
        raise


def ssp_rk3_step(rhs: Rhs, u: np.ndarray, dt: float, t: float = 0.0) -> np.ndarray:
    """Optimal three-stage third-order SSP Runge-Kutta step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u1 = u + dt * _eval(rhs, u, t, 1)
    u2 = 0.75 * u + 0.25 * u1 + 0.25 * dt * _eval(rhs, u1, t + dt, 2)
    return u / 3.0 + 2.0 / 3.0 * u2 + 2.0 / 3.0 * dt * _eval(rhs, u2, t + 0.5 * dt, 3)


def shu_osher_step(tableau, rhs: Rhs, u: np.ndarray, dt: float, t: float = 0.0) -> np.ndarray:
    alpha, beta = tableau
    stages = [u]
    times = [t]
    derivs: dict[int, np.ndarray] = {}
    for i, (arow, brow) in enumerate(zip(alpha, beta)):
        new = 0.0
        tn = 0.0
        for j, (a, b) in enumerate(zip(arow, brow)):
            if a:
                new = new + a * stages[j]
                tn += a * times[j]
            if b:
                if j not in derivs:
                    derivs[j] = _eval(rhs, stages[j], times[j], j + 1)
                new = new + (b * dt) * derivs[j]
                tn += b * dt
        stages.append(new)
        times.append(tn)
    return stages[-1]


def ssp_step_of_order(order: int, rhs: Rhs, u: np.ndarray, dt: float, t: float = 0.0) -> np.ndarray:
    if order not in ORDER_TO_SCHEME:
        raise ValueError(f"no SSP scheme of order {order}; available: {sorted(ORDER_TO_SCHEME)}")
    return step(ORDER_TO_SCHEME[order], rhs, u, dt, t)


def step(scheme: str, rhs: Rhs, u: np.ndarray, dt: float, t: float = 0.0) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if scheme == "ssprk33":
        return ssp_rk3_step(rhs, u, dt, t)
    return shu_osher_step(TABLEAUX[scheme], rhs, u, dt, t)


def cfl_timestep(lam: np.ndarray, h: float, p: int, cfl: float, remaining: float = np.inf) -> float:
    """``cfl * min_e h_e / (lambda_e (2p + 1))`` clamped to the remaining time."""
    lam_max = float(np.max(lam)) if np.size(lam) else 0.0
    if lam_max <= 0.0:
        return float(remaining)
    return float(min(cfl * h / (lam_max * (2 * p + 1)), remaining))


@lru_cache(maxsize=None)
def real_stability_bound(scheme: str, resolution: float = 1e-4) -> float:
    """Largest x with |R(-y)| <= 1 for all y in [0, x], R the scheme's stability polynomial."""
    y = np.arange(0.0, 10.0, resolution)
    amp = step(scheme, lambda u, t: -y * u, np.ones_like(y), 1.0)
    unstable = np.nonzero(np.abs(amp) > 1.0 + 1e-12)[0]
    return float(y[unstable[0] - 1]) if unstable.size else float(y[-1])


def viscous_timestep(nu_max: float, radius: float, scheme: str, safety: float = 0.5,
                     remaining: float = np.inf) -> float:
    """Step keeping ``dt * nu * rho(M^-1 K)`` at ``safety`` times the real stability bound."""
    if nu_max <= 0.0 or radius <= 0.0:
        return float(remaining)
    return float(min(safety * real_stability_bound(scheme) / (nu_max * radius), remaining))


def stable_timestep(law, field, cfl: float, remaining: float = np.inf) -> float:
    """CFL step for ``field`` with lambda_e re-evaluated from the current data."""
    Uq = field.at_quadrature()
    law.check(Uq)
    lam = cell_wave_speeds(law, Uq, field.mesh.to_physical(field.ref.quad.points))
    return cfl_timestep(lam, field.mesh.cell_size, field.p, cfl, remaining)
