"""Low-order artificial viscosity and its sensor-weighted adaptive version."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dg import DGOperator, GhostPolicy, StateField
from .laws import ConservationLaw
from .mesh import Mesh
from .basis import ReferenceElement
from .sensor import SensorConfig, WenoSensor

SCHEMES = ("dg", "lo", "weno")


@dataclass
class ViscosityReport:
    nu: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray


def stiffness_matrix(mesh: Mesh, ref: ReferenceElement) -> np.ndarray:
    """``K_ij = int grad(phi_i) . grad(phi_j)`` on one (uniform) cell."""
    w = ref.quad.weights
    K = np.zeros((ref.ndofs, ref.ndofs))
    for d in range(mesh.dim):
        D = ref.dphi[d]
        K += (D.T @ (w[:, None] * D)) * (mesh.cell_volume / mesh.spacing[d] ** 2)
    return K


def cell_wave_speeds(law: ConservationLaw, Uq: np.ndarray, xq: np.ndarray | None = None) -> np.ndarray:
    """lambda_e as the maximum wave speed over the volume quadrature points."""
    return np.max(law.wave_speed(Uq, xq), axis=1)


def viscosity_parameter(law: ConservationLaw, field: StateField, e: int | None = None) -> np.ndarray | float:
    """``nu_e = lambda_e h_e / (2 p)`` for cell ``e`` (or all cells)."""
    p = field.p
    if p < 1:
        raise ValueError("viscosity needs p >= 1")
    Uq = field.at_quadrature()
    law.check(Uq)
    xq = field.mesh.to_physical(field.ref.quad.points)
    nu = cell_wave_speeds(law, Uq, xq) * field.mesh.cell_size / (2 * p)
    return nu if e is None else float(nu[e])


def stabilization_term(field: StateField, e: int, gamma: float, nu: float) -> np.ndarray:
    """``gamma nu int grad(phi_i) . grad(U_h)`` for all test functions, (N, m)."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    K = stiffness_matrix(field.mesh, field.ref)
    return gamma * nu * (K @ field.coeffs[e])


class SemiDiscreteScheme:
    """``dU/dt = M^-1 (R(U) - s(U))`` for the DG, LO and WENO schemes.

    ``dg`` uses gamma = 0, ``lo`` gamma = 1 and ``weno`` the smoothness
    sensor evaluated on the stage solution.
    """

    def __init__(
        self,
        law: ConservationLaw,
        mesh: Mesh,
        ref: ReferenceElement,
        scheme: str = "weno",
        policy: GhostPolicy | None = None,
        flux: str | None = None,
        sensor: SensorConfig | None = None,
    ):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.scheme = scheme
        self.law, self.mesh, self.ref = law, mesh, ref
        self.dg = DGOperator(law, mesh, ref, policy, flux)
        self.K = stiffness_matrix(mesh, ref)
        # spectral radius of M^-1 K; limits explicit steps once viscosity is on
        self.viscous_radius = float(np.max(np.abs(np.linalg.eigvals(self.dg.mass.inverse_block @ self.K))))
        self.sensor = WenoSensor(mesh, ref, sensor) if scheme == "weno" else None
        self.last: ViscosityReport | None = None
        self.dissipation = 0.0
        self.gamma_override: np.ndarray | float | None = None

    @property
    def mass(self):
        return self.dg.mass

    def gamma(self, U: np.ndarray) -> np.ndarray:
        if self.gamma_override is not None:
            return np.broadcast_to(np.asarray(self.gamma_override, float), (self.mesh.ncells,))
        if self.scheme == "dg":
            return np.zeros(self.mesh.ncells)
        if self.scheme == "lo":
            return np.ones(self.mesh.ncells)
        return self.sensor(U)

    def residual(self, U: np.ndarray, t: float = 0.0) -> np.ndarray:
        """``R(U) - s(U)`` before the mass inverse."""
        R = self.dg.residual(U, t)
        gamma = self.gamma(U)
        Uq = self.ref.phi @ U
        lam = cell_wave_speeds(self.law, Uq, self.dg.xq)
        nu = lam * self.mesh.cell_size / (2 * self.ref.p)
        coef = gamma * nu
        if np.any(coef):
            R -= coef[:, None, None] * (self.K @ U)
        self.last = ViscosityReport(nu, gamma, lam)
        self.dissipation += float(coef.sum())
        return R

    def __call__(self, U: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.dg.mass.solve(self.residual(U, t))

    def max_viscosity(self, U: np.ndarray) -> float:
        """Largest nu_e the stabilization can switch on (gamma = 1); zero for plain DG."""
        if self.scheme == "dg" and self.gamma_override is None:
            return 0.0
        return float(np.max(self.max_speed(U))) * self.mesh.cell_size / (2 * self.ref.p)

    def max_speed(self, U: np.ndarray) -> np.ndarray:
        Uq = self.ref.phi @ U
        self.law.check(Uq)
        return cell_wave_speeds(self.law, Uq, self.dg.xq)
