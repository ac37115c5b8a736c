"""Hermite-WENO reconstruction and the cell-wise smoothness sensors.

Each cell gets one candidate per face neighbor: the Q_p polynomial on the
cell that keeps the cell average of the DG solution and best matches the
neighbor's values and scaled first derivatives at the neighbor's Gauss
points.  Candidates are blended with WENO weights driven by the scaled
Sobolev semi-norm, and the sensor measures how far the blend is from the
DG polynomial.  Everything reduces to fixed matrices on a uniform mesh, so
the whole field is processed with a handful of matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ReferenceElement, derivative_multi_indices, tensor_basis
from .mesh import Mesh

RELATIVE = "relative"
ZHAO = "zhao"


@dataclass(frozen=True)
class SensorConfig:
    q: float = 1.0
    b: float = 0.0
    variant: str = RELATIVE
    theta: float = 1.0
    neighbor_weight: float = 0.001
    eps_factor: float = 1e-12
    component: int = 0
    derivative_weight: float = 1.0

    def __post_init__(self):
        if self.q < 1.0:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")
        if self.variant not in (RELATIVE, ZHAO):
            raise ValueError(f"unknown sensor variant {self.variant!r}")
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")
        if self.derivative_weight < 0.0:
            raise ValueError("derivative_weight must be nonnegative")
        if self.eps_factor <= 0.0:
            raise ValueError("eps_factor must be positive")
        # central weight 1 - 4 * w must stay positive in 2D
        if not 0.0 < self.neighbor_weight < 0.25:
            raise ValueError("neighbor_weight must lie in (0, 0.25)")


def regularizer(eps_factor: float, norm2, scale):
    """WENO epsilon ``eps_factor * (|U|_e^2 + max|u|^2)``.

    Both terms scale like the square of the data, so the weights, and with
    them the sensor, are invariant under u -> c u.  The additive 1e-150
    only guards the all-zero cell.
    """
    return eps_factor * (norm2 + np.square(scale)) + 1e-150


@dataclass
class CandidateSet:
    polys: np.ndarray  # (1 + m_e, N); row 0 is the cell's own polynomial
    beta: np.ndarray  # (1 + m_e,)
    linear_weights: np.ndarray  # (1 + m_e,)
    weights: np.ndarray | None = None

    @property
    def m_e(self) -> int:
        return len(self.beta) - 1


def seminorm_factor(mesh: Mesh, ref: ReferenceElement) -> np.ndarray:
    """Matrix G with ``|G v|^2 = ||v||_e^2`` for nodal coefficients v.

    Rows are weighted derivative values at the quadrature points, so the
    semi-norm of a constant comes out at roundoff squared instead of the
    roundoff of a cancelling quadratic form.
    """
    dim, h_e = mesh.dim, mesh.cell_size
    sw = np.sqrt(ref.quad.weights * mesh.cell_volume)
    rows = []
    for k in derivative_multi_indices(dim, ref.p):
        D = tensor_basis(ref.p, ref.quad.points, k)
        D = D / np.prod(mesh.spacing ** np.array(k))
        rows.append(h_e ** (sum(k) - 0.5 * dim) * sw[:, None] * D)
    return np.vstack(rows)


def seminorm_matrix(mesh: Mesh, ref: ReferenceElement) -> np.ndarray:
    """Gram matrix S with ``v^T S v = ||v||_e^2`` for nodal coefficients v."""
    G = seminorm_factor(mesh, ref)
    return G.T @ G


def scaled_sobolev_seminorm(coeffs, mesh: Mesh, ref: ReferenceElement) -> float:
    """Scaled Sobolev semi-norm of the cell polynomial with nodal ``coeffs``."""
    v = np.asarray(coeffs, dtype=float).reshape(-1)
    return float(np.linalg.norm(seminorm_factor(mesh, ref) @ v))


def candidate_operators(ref: ReferenceElement, derivative_weight: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Matrices (C_own, C_nbr), each (nloc, N, N), giving candidate coefficients.

    Candidate for local face ``lf`` is ``C_own[lf] @ U_e + C_nbr[lf] @ U_nbr``.
    Derivatives are matched in reference units (h times the physical
    derivative), which makes the operators mesh-size independent;
    ``derivative_weight`` scales those rows relative to the value rows.
    """
    dim, N = ref.dim, ref.ndofs
    pts = ref.quad.points
    g = ref.quad.weights @ ref.phi  # integrals of the basis on the reference cell
    own_tabs = [ref.phi] + [derivative_weight * ref.dphi[d] for d in range(dim)]
    B = np.vstack(own_tabs)

    mean_part = np.outer(g, g) / (g @ g)  # coefficients g (g.u)/(g.g) keep the mean of u
    Z = np.linalg.svd(g[None, :])[2][1:].T  # (N, N-1) orthonormal basis of g^perp

    nloc = 2 * dim
    C_own = np.empty((nloc, N, N))
    C_nbr = np.empty((nloc, N, N))
    for lf in range(nloc):
        axis, side = divmod(lf, 2)
        shifted = pts.copy()
        shifted[:, axis] += 1.0 if side else -1.0
        rows = [tensor_basis(ref.p, shifted)]
        for d in range(dim):
            k = [0] * dim
            k[d] = 1
            rows.append(derivative_weight * tensor_basis(ref.p, shifted, tuple(k)))
        A = np.vstack(rows)
        # Mean-constrained least squares through the null space of g^T: a
        # particular solution fixes the mean, the SVD-based pseudoinverse
        # fits the rest without squaring the condition number of A.
        AZ = A @ Z
        if np.linalg.matrix_rank(AZ) < N - 1:
            raise np.linalg.LinAlgError("rank-deficient Hermite fit")
        fit = Z @ np.linalg.pinv(AZ)
        C_nbr[lf] = fit @ B
        C_own[lf] = (np.eye(N) - fit @ A) @ mean_part
    return C_own, C_nbr


@dataclass
class SensorResult:
    gamma: np.ndarray  # (ne,)
    ratio: np.ndarray  # relative difference r per cell
    beta: np.ndarray  # (ne, 1 + nloc), NaN for missing neighbors
    weights: np.ndarray  # (ne, 1 + nloc)
    reconstruction: np.ndarray  # (ne, N)


class WenoSensor:
    """Vectorized HWENO reconstruction and sensor for one mesh/element pair."""

    def __init__(self, mesh: Mesh, ref: ReferenceElement, config: SensorConfig | None = None):
        self.mesh, self.ref = mesh, ref
        self.config = config or SensorConfig()
        # square triangular factor: |R v| = |G v| at the cost of an N x N product
        self.R = np.linalg.qr(seminorm_factor(mesh, ref), mode="r")
        self._RT = np.ascontiguousarray(self.R.T)
        self.C_own, self.C_nbr = candidate_operators(ref, self.config.derivative_weight)
        nloc, N = self.C_own.shape[:2]
        self._nloc = nloc
        # one product maps [u_e, u_nbr_0, ..., u_nbr_last] to all neighbor candidates
        op = np.zeros(((1 + nloc) * N, nloc * N))
        op[:N] = self.C_own.transpose(2, 0, 1).reshape(N, nloc * N)
        for f in range(nloc):
            op[(1 + f) * N:(2 + f) * N, f * N:(f + 1) * N] = self.C_nbr[f].T
        self._stencil_op = op
        nbr = mesh.neighbors
        self.has_nbr = nbr >= 0
        self.nbr_idx = np.where(self.has_nbr, nbr, np.arange(mesh.ncells)[:, None])
        self.m_e = self.has_nbr.sum(axis=1)
        self._has_boundary = not bool(self.has_nbr.all())
        w = self.config.neighbor_weight
        lin = np.zeros((mesh.ncells, 1 + nbr.shape[1]))
        lin[:, 0] = 1.0 - w * self.m_e
        lin[:, 1:] = np.where(self.has_nbr, w, 0.0)
        self.linear_weights = lin

    def candidates(self, u: np.ndarray) -> np.ndarray:
        """All candidates, (ne, 1 + nloc, N); rows of missing neighbors are zero."""
        ne, N = u.shape
        out = np.empty((ne, 1 + self._nloc, N))
        out[:, 0] = u
        stencil = np.concatenate([u, u[self.nbr_idx].reshape(ne, -1)], axis=1)
        np.matmul(stencil, self._stencil_op, out=out[:, 1:].reshape(ne, -1))
        if self._has_boundary:
            out[:, 1:] *= self.has_nbr[:, :, None]
        return out

    def smoothness(self, cands: np.ndarray) -> np.ndarray:
        y = cands @ self._RT
        return np.einsum("...i,...i->...", y, y)

    def weights(self, beta: np.ndarray, eps: np.ndarray) -> np.ndarray:
        alpha = self.linear_weights / (eps[:, None] + beta) ** 2
        return alpha / alpha.sum(axis=1, keepdims=True)

    def evaluate(self, u: np.ndarray) -> SensorResult:
        """Sensor for the scalar nodal field ``u`` of shape (ne, N)."""
        cfg = self.config
        cands = self.candidates(u)
        beta = self.smoothness(cands)
        norm2 = np.maximum(beta[:, 0], 0.0)
        scale = np.max(np.abs(u), axis=1)
        omega = self.weights(beta, regularizer(cfg.eps_factor, norm2, scale))
        recon = np.einsum("el,eli->ei", omega, cands)
        diff = u - recon
        num2 = self.smoothness(diff)

        # cells that are constant up to roundoff carry no sensor signal
        flat = np.sqrt(norm2) <= 1e-10 * scale + 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(flat, 0.0, np.sqrt(num2) / np.sqrt(norm2))

        if cfg.variant == ZHAO:
            gamma = self._zhao(omega)
        else:
            gamma = np.minimum(1.0, ratio) ** cfg.q
            gamma = np.where(ratio < cfg.b, 0.0, gamma)
        gamma = np.where(flat & (cfg.variant != ZHAO), 0.0, gamma)
        beta_out = np.where(np.concatenate([np.ones((len(u), 1), bool), self.has_nbr], 1), beta, np.nan)
        return SensorResult(np.clip(gamma, 0.0, 1.0), ratio, beta_out, omega, recon)

    def _zhao(self, omega: np.ndarray) -> np.ndarray:
        theta = self.config.theta
        lin = self.linear_weights
        present = lin > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            dev = np.where(present, np.abs(omega / lin - 1.0) ** theta, 0.0)
            lin_min = np.min(np.where(present, lin, np.inf), axis=1)
        denom = np.abs(1.0 / lin_min - 1.0) ** theta + self.m_e
        return dev.sum(axis=1) / denom

    def __call__(self, U: np.ndarray) -> np.ndarray:
        """Sensor values for a full state (ne, N, m) using the configured component."""
        return self.evaluate(U[..., self.config.component]).gamma


# -- per-cell operations ---------------------------------------------------------


def _scalar(field, config: SensorConfig) -> np.ndarray:
    return field.coeffs[..., config.component]


def hermite_candidates(field, e: int, config: SensorConfig | None = None) -> CandidateSet:
    config = config or SensorConfig()
    sensor = WenoSensor(field.mesh, field.ref, config)
    cands = sensor.candidates(_scalar(field, config))[e]
    keep = np.concatenate([[True], sensor.has_nbr[e]])
    polys = cands[keep]
    beta = sensor.smoothness(polys)
    return CandidateSet(polys, beta, sensor.linear_weights[e][keep])


def nonlinear_weights(cands: CandidateSet, config: SensorConfig | None = None) -> np.ndarray:
    config = config or SensorConfig()
    eps = regularizer(config.eps_factor, max(cands.beta[0], 0.0), np.max(np.abs(cands.polys[0])))
    alpha = cands.linear_weights / (eps + cands.beta) ** 2
    cands.weights = alpha / alpha.sum()
    return cands.weights


def weno_reconstruct(field, e: int, config: SensorConfig | None = None) -> np.ndarray:
    cands = hermite_candidates(field, e, config)
    omega = nonlinear_weights(cands, config)
    return omega @ cands.polys


def smoothness_gamma(field, e: int, config: SensorConfig | None = None) -> float:
    config = config or SensorConfig()
    if config.variant != RELATIVE:
        raise ValueError("smoothness_gamma expects the relative sensor variant")
    sensor = WenoSensor(field.mesh, field.ref, config)
    return float(sensor.evaluate(_scalar(field, config)).gamma[e])


def zhao_gamma(cands: CandidateSet, config: SensorConfig | None = None, weights=None) -> float:
    """Deviation of nonlinear from ideal weights, normalized into [0, 1]."""
    config = config or SensorConfig(variant=ZHAO)
    omega = np.asarray(weights if weights is not None else
                       (cands.weights if cands.weights is not None else nonlinear_weights(cands, config)))
    ideal = np.asarray(cands.linear_weights)
    theta = config.theta
    num = np.sum(np.abs(omega / ideal - 1.0) ** theta)
    den = abs(1.0 / ideal.min() - 1.0) ** theta + (len(ideal) - 1)
    return float(num / den)
