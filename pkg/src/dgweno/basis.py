"""Lagrange nodal bases on [0, 1]^dim, Gauss rules and tabulated values."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from numpy.polynomial import polynomial as P


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, dim)
    weights: np.ndarray  # (nq,)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.weights)


def gauss_rule(dim: int, npoints: int) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule on the unit interval/square.

    Exact for polynomials of degree ``2 * npoints - 1`` in each variable.
    """
    if npoints < 1:
        raise ValueError(f"npoints must be >= 1, got {npoints}")
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")

    x, w = np.polynomial.legendre.leggauss(npoints)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    if dim == 1:
        return QuadratureRule(x[:, None], w)

    # x-index runs fastest, matching the node ordering of the basis
    xx, yy = np.meshgrid(x, x, indexing="xy")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    ww = np.outer(w, w).ravel()
    return QuadratureRule(pts, ww)


@lru_cache(maxsize=None)
def _lagrange_monomials(p: int) -> np.ndarray:
    """Monomial coefficients C[k, j] of the equispaced 1D Lagrange polynomials."""
    nodes = np.linspace(0.0, 1.0, p + 1)
    vander = np.vander(nodes, p + 1, increasing=True)
    return np.linalg.inv(vander)


def lagrange_1d(p: int, xi: np.ndarray, deriv: int = 0) -> np.ndarray:
    """Values (or derivatives) of all 1D Lagrange polynomials at ``xi``.

    No domain check: callers extrapolate to neighboring cells on purpose.
    Returns an array of shape ``xi.shape + (p + 1,)``.
    """
    coef = _lagrange_monomials(p)
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape + (p + 1,))
    for j in range(p + 1):
        c = coef[:, j]
        if deriv:
            c = P.polyder(c, deriv) if deriv <= p else np.zeros(1)
        out[..., j] = P.polyval(xi, c)
    return out


def tensor_basis(p: int, points: np.ndarray, deriv: tuple[int, ...] | None = None) -> np.ndarray:
    """Tensor-product basis values at ``points`` of shape (n, dim).

    ``deriv`` is a multi-index of reference derivative orders per axis.
    Returns (n, (p+1)**dim) with basis index ``j = jy * (p + 1) + jx``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dim = points.shape[1]
    if deriv is None:
        deriv = (0,) * dim
    vals = lagrange_1d(p, points[:, 0], deriv[0])
    for d in range(1, dim):
        vd = lagrange_1d(p, points[:, d], deriv[d])
        vals = (vd[:, :, None] * vals[:, None, :]).reshape(len(points), -1)
    return vals


def reference_basis(p: int, point, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Basis values (N,) and reference gradients (N, dim) at a single point."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    if dim is not None and pt.size != dim:
        raise ValueError(f"point has {pt.size} coordinates, expected {dim}")
    if p < 1:
        raise ValueError(f"degree must be >= 1, got {p}")
    if np.any(pt < -1e-12) or np.any(pt > 1.0 + 1e-12):
        raise ValueError(f"point {pt} lies outside the reference element")
    pts = pt[None, :]
    d = pt.size
    values = tensor_basis(p, pts)[0]
    grads = np.empty((values.size, d))
    for a in range(d):
        k = [0] * d
        k[a] = 1
        grads[:, a] = tensor_basis(p, pts, tuple(k))[0]
    return values, grads


def derivative_multi_indices(dim: int, max_order: int, min_order: int = 1) -> list[tuple[int, ...]]:
    """All multi-indices k with min_order <= |k| <= max_order."""
    out = []
    for k in product(range(max_order + 1), repeat=dim):
        if min_order <= sum(k) <= max_order:
            out.append(k)
    return sorted(out, key=lambda k: (sum(k), tuple(-c for c in k)))


@dataclass(frozen=True)
class ReferenceElement:
    """Q_p Lagrange element on [0, 1]^dim with its tabulated data."""

    p: int
    dim: int
    nodes: np.ndarray = field(init=False)
    quad: QuadratureRule = field(init=False)
    phi: np.ndarray = field(init=False)  # (nq, N)
    dphi: np.ndarray = field(init=False)  # (dim, nq, N), reference gradients
    mass: np.ndarray = field(init=False)  # reference mass matrix
    face_quad: tuple = field(init=False)  # per local face: QuadratureRule on that face
    face_phi: tuple = field(init=False)  # per local face: (nqf, N)

    def __post_init__(self):
        p, dim = self.p, self.dim
        if p < 0:
            raise ValueError(f"degree must be >= 0, got {p}")
        if dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {dim}")
        set_ = object.__setattr__

        # p = 0 is the finite-volume limit; its single node sits at the centroid
        x1 = np.linspace(0.0, 1.0, p + 1) if p else np.array([0.5])
        if dim == 1:
            nodes = x1[:, None]
        else:
            xx, yy = np.meshgrid(x1, x1, indexing="xy")
            nodes = np.column_stack([xx.ravel(), yy.ravel()])
        set_(self, "nodes", nodes)

        quad = gauss_rule(dim, p + 1)
        set_(self, "quad", quad)
        phi = tensor_basis(p, quad.points)
        set_(self, "phi", phi)
        dphi = np.stack([tensor_basis(p, quad.points, _unit(dim, a)) for a in range(dim)])
        set_(self, "dphi", dphi)
        set_(self, "mass", phi.T @ (quad.weights[:, None] * phi))

        fq, fphi = [], []
        for lf in range(2 * dim):
            rule = face_rule(dim, lf, p + 1)
            fq.append(rule)
            fphi.append(tensor_basis(p, rule.points))
        set_(self, "face_quad", tuple(fq))
        set_(self, "face_phi", tuple(fphi))

    @property
    def ndofs(self) -> int:
        return (self.p + 1) ** self.dim

    def derivative_tables(self, points: np.ndarray, max_order: int | None = None) -> dict:
        """Reference derivative tables D^k phi at ``points`` for 1 <= |k| <= max_order."""
        if max_order is None:
            max_order = self.p
        return {
            k: tensor_basis(self.p, points, k)
            for k in derivative_multi_indices(self.dim, max_order)
        }


def _unit(dim: int, axis: int) -> tuple[int, ...]:
    k = [0] * dim
    k[axis] = 1
    return tuple(k)


def face_rule(dim: int, local_face: int, npoints: int) -> QuadratureRule:
    """Gauss rule on local face ``2 * axis + side`` of the reference element.

    Points are reference coordinates on the face; weights sum to one.
    """
    axis, side = divmod(local_face, 2)
    if dim == 1:
        return QuadratureRule(np.array([[float(side)]]), np.array([1.0]))
    g = gauss_rule(1, npoints)
    t = g.points[:, 0]
    pts = np.empty((len(t), 2))
    pts[:, axis] = float(side)
    pts[:, 1 - axis] = t
    return QuadratureRule(pts, g.weights.copy())


def local_mass_matrix(p: int, cell) -> np.ndarray:
    """Mass matrix of a Cartesian cell: volume times the reference mass matrix."""
    vol = float(cell.volume)
    if not vol > 0.0:
        raise ValueError(f"degenerate cell with volume {vol}")
    dim = np.asarray(cell.vertices).shape[-1]
    return vol * ReferenceElement(p, dim).mass
