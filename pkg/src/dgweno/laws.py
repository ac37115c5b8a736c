"""Physical fluxes, wave-speed bounds and the LLF/HLL numerical fluxes.

All functions are vectorized: states carry the component axis last,
``U.shape == (..., m)``, normals ``n.shape == (..., dim)`` or ``(dim,)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np


class InvalidStateError(ArithmeticError):
    """Raised when an Euler state has nonpositive density or pressure."""

    def __init__(self, message: str, cell: int | None = None, stage: int | None = None):
        super().__init__(message)
        self.cell = cell
        self.stage = stage

    def __str__(self) -> str:
        msg = super().__str__()
        if self.cell is not None:
            msg += f" (cell {self.cell})"
        if self.stage is not None:
            msg += f" (RK stage {self.stage})"
        return msg


Velocity = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


class ConservationLaw:
    """Base class; subclasses define ``flux`` and ``wave_speed``."""

    name: str = "law"
    m: int = 1
    dim: int = 1
    default_flux: str = "llf"

    def flux(self, U: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        raise NotImplementedError

    def wave_speed(self, U: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        """Spectral bound of the flux Jacobian, used for lambda_e and the CFL."""
        raise NotImplementedError

    def normal_speed(self, UL, UR, n, x=None) -> np.ndarray:
        """Maximum wave speed of the 1D Riemann problem in direction ``n``."""
        raise NotImplementedError

    def normal_flux(self, U, n, x=None) -> np.ndarray:
        return np.sum(self.flux(U, x) * np.asarray(n)[..., None, :], axis=-1)

    def check(self, U: np.ndarray) -> None:
        """Raise :class:`InvalidStateError` for nonphysical states."""


def _dot(a, b):
    """Last-axis dot product; faster than sum(a * b) for the short axis."""
    out = a[..., 0] * b[..., 0]
    for d in range(1, a.shape[-1]):
        out = out + a[..., d] * b[..., d]
    return out


@dataclass
class LinearAdvection(ConservationLaw):
    velocity: Velocity = None
    dim: int = 1
    name = "advection"

    def __post_init__(self):
        if self.velocity is None:
            self.velocity = np.ones(self.dim)
        if not callable(self.velocity):
            self.velocity = np.atleast_1d(np.asarray(self.velocity, dtype=float))
            if self.velocity.size != self.dim:
                raise ValueError("velocity size must match dim")

    def v(self, shape: tuple[int, ...], x: np.ndarray | None) -> np.ndarray:
        if callable(self.velocity):
            if x is None:
                raise ValueError("position-dependent velocity needs x")
            # the solver passes the same point arrays every stage; skip re-evaluation
            cache = self.__dict__.setdefault("_v_cache", [])
            for xc, vc in cache:
                if xc is x:
                    return vc
            vx = self.velocity(x)
            cache.append((x, vx))
            del cache[:-4]
            return vx
        return np.broadcast_to(self.velocity, shape + (self.dim,))

    def normal_flux(self, U, n, x=None):
        v = self.v(U.shape[:-1], x)
        vn = _dot(v, n)
        return U * vn[..., None]

    def flux(self, U, x=None):
        v = self.v(U.shape[:-1], x)
        return U[..., :, None] * v[..., None, :]

    def wave_speed(self, U, x=None):
        v = self.v(U.shape[:-1], x)
        return np.linalg.norm(v, axis=-1)

    def normal_speed(self, UL, UR, n, x=None):
        v = self.v(UL.shape[:-1], x)
        return np.abs(_dot(v, n))


@dataclass
class Burgers(ConservationLaw):
    dim: int = 1
    name = "burgers"

    def __post_init__(self):
        if self.dim != 1:
            raise ValueError("Burgers is implemented in 1D only")

    def flux(self, U, x=None):
        return 0.5 * U[..., :, None] ** 2

    def wave_speed(self, U, x=None):
        return np.abs(U[..., 0])

    def normal_speed(self, UL, UR, n, x=None):
        # |F'(u)| = |u| is convex, so the segment maximum sits at an endpoint
        scale = np.abs(np.asarray(n)[..., 0])
        return np.maximum(np.abs(UL[..., 0]), np.abs(UR[..., 0])) * scale


@dataclass
class KPP(ConservationLaw):
    dim: int = 2
    name = "kpp"

    def __post_init__(self):
        if self.dim != 2:
            raise ValueError("KPP is two-dimensional")

    def flux(self, U, x=None):
        return np.stack([np.sin(U), np.cos(U)], axis=-1)

    def wave_speed(self, U, x=None):
        return np.ones(U.shape[:-1])

    def normal_speed(self, UL, UR, n, x=None):
        return np.ones(UL.shape[:-1])


@dataclass
class Euler(ConservationLaw):
    dim: int = 1
    gamma: float = 1.4
    name = "euler"
    default_flux = "hll"

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if self.dim not in (1, 2):
            raise ValueError("Euler supports dim 1 or 2")

    @property
    def m(self) -> int:
        return self.dim + 2

    def primitives(self, U):
        rho = U[..., 0]
        mom = U[..., 1:1 + self.dim]
        vel = mom / rho[..., None]
        p = (self.gamma - 1.0) * (U[..., -1] - 0.5 * np.sum(mom * vel, axis=-1))
        return rho, vel, p

    def check(self, U):
        rho = U[..., 0]
        mom = U[..., 1:1 + self.dim]
        with np.errstate(divide="ignore", invalid="ignore"):
            rhoe = U[..., -1] - 0.5 * np.sum(mom * mom, axis=-1) / rho
        bad = ~((rho > 0.0) & (rhoe > 0.0))
        if np.any(bad):
            where = np.argwhere(bad)[0]
            raise InvalidStateError(
                f"nonphysical Euler state at index {tuple(int(i) for i in where)}: "
                f"rho={rho[tuple(where)]:.6g}, rho*e={rhoe[tuple(where)]:.6g}",
                cell=int(where[0]) if where.size else None,
            )

    def flux(self, U, x=None):
        rho, vel, p = self.primitives(U)
        d = self.dim
        F = np.empty(U.shape + (d,))
        F[..., 0, :] = U[..., 1:1 + d]
        F[..., 1:1 + d, :] = U[..., 1:1 + d, None] * vel[..., None, :]
        for a in range(d):
            F[..., 1 + a, a] += p
        F[..., -1, :] = (U[..., -1] + p)[..., None] * vel
        return F

    def normal_flux(self, U, n, x=None):
        rho, vel, p = self.primitives(U)
        vn = np.sum(vel * n, axis=-1)
        out = U * vn[..., None]
        out[..., 1:1 + self.dim] += p[..., None] * n
        out[..., -1] += p * vn
        return out

    def sound_speed(self, U):
        rho, _, p = self.primitives(U)
        return np.sqrt(self.gamma * p / rho)

    def wave_speed(self, U, x=None):
        rho, vel, p = self.primitives(U)
        return np.linalg.norm(vel, axis=-1) + np.sqrt(self.gamma * p / rho)

    def normal_speed(self, UL, UR, n, x=None):
        _, vL, pL = self.primitives(UL)
        _, vR, pR = self.primitives(UR)
        aL = np.sqrt(self.gamma * pL / UL[..., 0])
        aR = np.sqrt(self.gamma * pR / UR[..., 0])
        return np.maximum(np.abs(np.sum(vL * n, -1)) + aL, np.abs(np.sum(vR * n, -1)) + aR)

    def davis_bounds(self, UL, UR, n):
        _, vL, pL = self.primitives(UL)
        _, vR, pR = self.primitives(UR)
        aL = np.sqrt(self.gamma * pL / UL[..., 0])
        aR = np.sqrt(self.gamma * pR / UR[..., 0])
        vnL = np.sum(vL * n, -1)
        vnR = np.sum(vR * n, -1)
        return np.minimum(vnL - aL, vnR - aR), np.maximum(vnL + aL, vnR + aR)


def conserved_from_primitive(rho, vel, p, gamma: float = 1.4) -> np.ndarray:
    """Pack (rho, velocity, pressure) into conserved Euler variables."""
    rho = np.asarray(rho, dtype=float)
    vel = np.asarray(vel, dtype=float)
    if vel.ndim == rho.ndim:
        vel = vel[..., None]
    p = np.asarray(p, dtype=float)
    E = p / (gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
    return np.concatenate([rho[..., None], rho[..., None] * vel, E[..., None]], axis=-1)


# -- module-level operations ---------------------------------------------------


def physical_flux(law: ConservationLaw, U, x=None) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    law.check(U)
    return law.flux(U, x)


def pressure(U, gamma: float = 1.4) -> np.ndarray | float:
    U = np.asarray(U, dtype=float)
    d = U.shape[-1] - 2
    rho = U[..., 0]
    mom = U[..., 1:1 + d]
    p = (gamma - 1.0) * (U[..., -1] - 0.5 * np.sum(mom * mom, axis=-1) / rho)
    if np.any(~(rho > 0)) or np.any(~(p > 0)):
        raise InvalidStateError(f"nonpositive density or pressure: rho={rho}, p={p}")
    return p if p.ndim else float(p)


def max_wavespeed_normal(law: ConservationLaw, UL, UR, n, x=None):
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    law.check(UL)
    law.check(UR)
    s = law.normal_speed(UL, UR, np.asarray(n, dtype=float), x)
    return s if np.ndim(s) else float(s)


def llf_flux(law: ConservationLaw, UL, UR, n, x=None, check: bool = True) -> np.ndarray:
    """Local Lax-Friedrichs flux ``n.(F(UL)+F(UR))/2 - s+/2 (UR - UL)``."""
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    n = np.asarray(n, dtype=float)
    if check:
        law.check(UL)
        law.check(UR)
    fl = law.normal_flux(UL, n, x)
    fr = law.normal_flux(UR, n, x)
    s = law.normal_speed(UL, UR, n, x)
    return 0.5 * (fl + fr) - 0.5 * s[..., None] * (UR - UL)


def hll_flux(law: Euler, UL, UR, n, x=None, check: bool = True) -> np.ndarray:
    """HLL flux with Davis wave-speed bounds."""
    if not isinstance(law, Euler):
        raise TypeError("HLL is implemented for the Euler equations only")
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    n = np.asarray(n, dtype=float)
    if check:
        law.check(UL)
        law.check(UR)
    fl = law.normal_flux(UL, n)
    fr = law.normal_flux(UR, n)
    sm, sp = law.davis_bounds(UL, UR, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = (sp[..., None] * fl - sm[..., None] * fr + (sm * sp)[..., None] * (UR - UL)) / (sp - sm)[..., None]
    out = np.where((sm > 0.0)[..., None], fl, mid)
    return np.where((sp < 0.0)[..., None], fr, out)


NUMERICAL_FLUXES = {"llf": llf_flux, "hll": hll_flux}
