"""Semi-discrete DG residual, block mass operator and boundary ghost states."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .basis import ReferenceElement
from .laws import ConservationLaw, Euler, InvalidStateError, NUMERICAL_FLUXES
from .mesh import BoundaryTag, Mesh


@lru_cache(maxsize=None)
def reference_element(p: int, dim: int) -> ReferenceElement:
    return ReferenceElement(p, dim)


@dataclass
class StateField:
    """Nodal coefficients of a DG function, shape (ncells, N, m)."""

    mesh: Mesh
    ref: ReferenceElement
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim == 2:
            self.coeffs = self.coeffs[..., None]
        expected = (self.mesh.ncells, self.ref.ndofs)
        if self.coeffs.shape[:2] != expected:
            raise ValueError(f"coefficient blocks {self.coeffs.shape[:2]} != {expected}")

    @property
    def p(self) -> int:
        return self.ref.p

    @property
    def m(self) -> int:
        return self.coeffs.shape[-1]

    def copy(self) -> "StateField":
        return StateField(self.mesh, self.ref, self.coeffs.copy())

    def at_quadrature(self) -> np.ndarray:
        return self.ref.phi @ self.coeffs

    def nodes(self) -> np.ndarray:
        """Physical coordinates of the Lagrange nodes, (ncells, N, dim)."""
        return self.mesh.to_physical(self.ref.nodes)

    def integral(self) -> np.ndarray:
        """Domain integral of every component."""
        w = self.ref.quad.weights * self.mesh.cell_volume
        return np.einsum("q,eqc->c", w, self.at_quadrature())


# -- boundary treatment --------------------------------------------------------

GhostRule = Callable[[np.ndarray, np.ndarray, np.ndarray, float], np.ndarray]


def copy_rule(U_in, n, x, t):
    return U_in.copy()


def reflect_rule(U_in, n, x, t):
    d = n.shape[-1]
    out = U_in.copy()
    mom = U_in[..., 1:1 + d]
    mn = np.sum(mom * n, axis=-1, keepdims=True)
    out[..., 1:1 + d] = mom - 2.0 * mn * n
    return out


def dirichlet_rule(state) -> GhostRule:
    """Exterior state prescribed as a constant vector or a function of (x, t)."""
    if callable(state):
        def rule(U_in, n, x, t):
            return np.asarray(state(x, t), dtype=float).reshape(U_in.shape)
    else:
        value = np.asarray(state, dtype=float)

        def rule(U_in, n, x, t):
            return np.broadcast_to(value, U_in.shape).copy()
    return rule


@dataclass
class GhostPolicy:
    rules: dict = field(default_factory=dict)

    def __post_init__(self):
        defaults = {BoundaryTag.OUTFLOW: copy_rule, BoundaryTag.REFLECTING_WALL: reflect_rule}
        self.rules = {**defaults, **dict(self.rules)}

    def __call__(self, tag: BoundaryTag, U_in, n, x, t) -> np.ndarray:
        try:
            rule = self.rules[tag]
        except KeyError:
            raise KeyError(f"no ghost rule for boundary tag {tag}") from None
        return rule(U_in, n, x, t)


def ghost_state(policy: GhostPolicy, tag: BoundaryTag, U_in, n, x, t: float) -> np.ndarray:
    """Exterior trace for a boundary point (or arrays of points)."""
    U_in = np.asarray(U_in, dtype=float)
    n = np.atleast_1d(np.asarray(n, dtype=float))
    n = np.broadcast_to(n, U_in.shape[:-1] + n.shape[-1:])
    x = np.asarray(x, dtype=float)
    return policy(tag, U_in, n, x, t)


# -- mass ----------------------------------------------------------------------


def _apply_block(block: np.ndarray, U: np.ndarray) -> np.ndarray:
    if U.ndim == 2:
        return U @ block.T
    return block @ U


class BlockMass:
    """Block-diagonal mass operator of a uniform mesh (all blocks equal)."""

    def __init__(self, mesh: Mesh, ref: ReferenceElement):
        self.ncells = mesh.ncells
        self.block = mesh.cell_volume * ref.mass
        self.inverse_block = np.linalg.inv(self.block)
        # reject a numerically singular block
        np.linalg.cholesky(self.block)

    @property
    def blocks(self) -> np.ndarray:
        return np.broadcast_to(self.block, (self.ncells,) + self.block.shape)

    def apply(self, U: np.ndarray) -> np.ndarray:
        return _apply_block(self.block, U)

    def solve(self, R: np.ndarray) -> np.ndarray:
        return _apply_block(self.inverse_block, R)


def assemble_mass(mesh: Mesh, ref: ReferenceElement) -> BlockMass:
    if ref.dim != mesh.dim:
        raise ValueError("reference element and mesh dimensions differ")
    return BlockMass(mesh, ref)


# -- residual ------------------------------------------------------------------


class DGOperator:
    """Precomputed DG residual ``R(U) = volume - surface`` on a uniform mesh."""

    def __init__(
        self,
        law: ConservationLaw,
        mesh: Mesh,
        ref: ReferenceElement,
        policy: GhostPolicy | None = None,
        flux: str | None = None,
    ):
        if ref.dim != mesh.dim or law.dim != mesh.dim:
            raise ValueError("law, mesh and reference element dimensions differ")
        flux = flux or law.default_flux
        if flux not in NUMERICAL_FLUXES:
            raise ValueError(f"unknown numerical flux {flux!r}")
        if flux == "hll" and not isinstance(law, Euler):
            raise ValueError("HLL flux requires the Euler equations")
        self.law, self.mesh, self.ref = law, mesh, ref
        self.policy = policy or GhostPolicy()
        self.flux_name = flux
        self.numerical_flux = NUMERICAL_FLUXES[flux]
        self.mass = assemble_mass(mesh, ref)

        dim, vol = mesh.dim, mesh.cell_volume
        w = ref.quad.weights
        self.xq = mesh.to_physical(ref.quad.points)
        self.vol_mats = np.stack(
            [(w[:, None] * ref.dphi[d]).T * (vol / mesh.spacing[d]) for d in range(dim)]
        )  # (dim, N, nq)

        nloc = 2 * dim
        self.face_phi = np.stack(ref.face_phi)  # (nloc, nqf, N)
        self.surf_mats = np.stack(
            [
                (ref.face_phi[lf] * ref.face_quad[lf].weights[:, None]).T * mesh.local_face_measure(lf)
                for lf in range(nloc)
            ]
        )  # (nloc, N, nqf)
        self.surf_flat = np.ascontiguousarray(
            self.surf_mats.transpose(1, 0, 2).reshape(ref.ndofs, -1)
        )  # (N, nloc * nqf), matches H.reshape(ne, nloc * nqf, m)
        self.normals = np.stack([mesh.outward_normal(lf) for lf in range(nloc)])[:, None, :]
        self.xf = np.stack(
            [mesh.to_physical(ref.face_quad[lf].points) for lf in range(nloc)], axis=1
        )  # (ne, nloc, nqf, dim)

        nbr = mesh.neighbors
        self.has_nbr = nbr >= 0
        self.nbr_idx = np.where(self.has_nbr, nbr, np.arange(mesh.ncells)[:, None])
        self.opp_idx = np.broadcast_to(np.arange(nloc) ^ 1, nbr.shape)
        groups: dict = {}
        for (e, lf), tag in mesh.boundary_tags.items():
            if tag is BoundaryTag.PERIODIC:
                continue
            groups.setdefault(tag, ([], []))
            groups[tag][0].append(e)
            groups[tag][1].append(lf)
        self.boundary_groups = {
            tag: (np.array(es), np.array(lfs)) for tag, (es, lfs) in groups.items()
        }
        for tag in self.boundary_groups:
            if tag not in self.policy.rules:
                raise KeyError(f"no ghost rule for boundary tag {tag}")

    # traces -------------------------------------------------------------------

    def traces(self, U: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Interior and exterior traces at all face points, (ne, nloc, nqf, m)."""
        inner = self.face_phi[None] @ U[:, None]
        outer = inner[self.nbr_idx, self.opp_idx]
        for tag, (es, lfs) in self.boundary_groups.items():
            n = np.broadcast_to(self.normals[lfs], inner[es, lfs].shape[:-1] + (self.mesh.dim,))
            outer[es, lfs] = self.policy(tag, inner[es, lfs], n, self.xf[es, lfs], t)
        return inner, outer

    def face_fluxes(self, U: np.ndarray, t: float, check: bool = True) -> np.ndarray:
        inner, outer = self.traces(U, t)
        if check:
            self.law.check(inner)
            self.law.check(outer)
        return self.numerical_flux(self.law, inner, outer, self.normals, self.xf, check=False)

    def residual(self, U: np.ndarray, t: float = 0.0, check: bool = True) -> np.ndarray:
        """``R(U)`` without the mass inverse, shape (ne, N, m)."""
        Uq = self.ref.phi @ U
        if check:
            self.law.check(Uq)
        F = self.law.flux(Uq, self.xq)
        R = self.vol_mats[0] @ F[..., 0]
        for d in range(1, self.mesh.dim):
            R += self.vol_mats[d] @ F[..., d]
        H = self.face_fluxes(U, t, check)
        ne, m = U.shape[0], U.shape[-1]
        R -= self.surf_flat @ H.reshape(ne, -1, m)
        return R


def dg_rhs(
    law: ConservationLaw,
    field: StateField,
    policy: GhostPolicy | None = None,
    flux: str | None = None,
    t: float = 0.0,
) -> np.ndarray:
    """Bare DG residual of ``field``; build a :class:`DGOperator` for repeated use."""
    op = DGOperator(law, field.mesh, field.ref, policy, flux)
    return op.residual(field.coeffs, t)
