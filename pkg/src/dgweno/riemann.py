"""Exact Riemann solver for the 1D Euler equations of an ideal gas.

Follows the classical pressure-function approach: Newton iteration for the
star pressure started from the two-rarefaction guess, then self-similar
sampling along rays x/t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: float
    p: float


@dataclass(frozen=True)
class StarRegion:
    p: float
    u: float
    rho_left: float
    rho_right: float
    iterations: int


def _pressure_function(p, s: PrimitiveState, gamma):
    """Velocity jump f_K(p) across the left or right wave and its derivative."""
    a = np.sqrt(gamma * s.p / s.rho)
    if p > s.p:
        A = 2.0 / ((gamma + 1.0) * s.rho)
        B = (gamma - 1.0) / (gamma + 1.0) * s.p
        q = np.sqrt(A / (p + B))
        return (p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + B))
    z = (gamma - 1.0) / (2.0 * gamma)
    f = 2.0 * a / (gamma - 1.0) * ((p / s.p) ** z - 1.0)
    df = (p / s.p) ** (-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * a)
    return f, df


def star_pressure_function(p, left: PrimitiveState, right: PrimitiveState, gamma=1.4):
    fl, _ = _pressure_function(p, left, gamma)
    fr, _ = _pressure_function(p, right, gamma)
    return fl + fr + (right.u - left.u)


class ExactRiemannSolver:
    def __init__(self, left, right, gamma: float = 1.4, tol: float = 1e-12, max_iter: int = 100):
        self.left = left if isinstance(left, PrimitiveState) else PrimitiveState(*map(float, left))
        self.right = right if isinstance(right, PrimitiveState) else PrimitiveState(*map(float, right))
        self.gamma = gamma
        self.star = self._solve_star(tol, max_iter)

    def _solve_star(self, tol, max_iter) -> StarRegion:
        L, R, g = self.left, self.right, self.gamma
        aL = np.sqrt(g * L.p / L.rho)
        aR = np.sqrt(g * R.p / R.rho)
        du = R.u - L.u
        if 2.0 * (aL + aR) / (g - 1.0) <= du:
            raise ValueError("initial data generate vacuum")
        z = (g - 1.0) / (2.0 * g)
        p = ((aL + aR - 0.5 * (g - 1.0) * du) / (aL / L.p ** z + aR / R.p ** z)) ** (1.0 / z)
        p = max(p, tol)
        for it in range(1, max_iter + 1):
            fl, dfl = _pressure_function(p, L, g)
            fr, dfr = _pressure_function(p, R, g)
            p_new = p - (fl + fr + du) / (dfl + dfr)
            if p_new < 0.0:
                p_new = tol
            change = 2.0 * abs(p_new - p) / (p_new + p)
            p = p_new
            if change < tol:
                break
        else:
            raise RuntimeError(f"star pressure did not converge in {max_iter} iterations")
        fl, _ = _pressure_function(p, L, g)
        fr, _ = _pressure_function(p, R, g)
        u = 0.5 * (L.u + R.u) + 0.5 * (fr - fl)
        return StarRegion(p, u, self._star_density(p, L), self._star_density(p, R), it)

    def _star_density(self, p, s: PrimitiveState) -> float:
        g = self.gamma
        if p > s.p:
            r = p / s.p
            gm = (g - 1.0) / (g + 1.0)
            return s.rho * (r + gm) / (gm * r + 1.0)
        return s.rho * (p / s.p) ** (1.0 / g)

    def shock_speed(self, side: str) -> float:
        """Speed of the shock on ``side`` ('left' or 'right'); ValueError if rarefaction."""
        g, st = self.gamma, self.star
        s = self.left if side == "left" else self.right
        if st.p <= s.p:
            raise ValueError(f"the {side} wave is a rarefaction")
        a = np.sqrt(g * s.p / s.rho)
        root = np.sqrt((g + 1.0) / (2.0 * g) * st.p / s.p + (g - 1.0) / (2.0 * g))
        return s.u - a * root if side == "left" else s.u + a * root

    def sample(self, xi: float) -> tuple[float, float, float]:
        """Primitive state (rho, u, p) on the ray x/t = xi."""
        g, st, L, R = self.gamma, self.star, self.left, self.right
        if xi <= st.u:
            s, sign, rho_star = L, 1.0, st.rho_left
        else:
            s, sign, rho_star = R, -1.0, st.rho_right
        a = np.sqrt(g * s.p / s.rho)
        # mirror the right wave onto the left-wave formulas
        x = sign * xi
        u = sign * s.u
        ustar = sign * st.u
        if st.p > s.p:
            shock = u - a * np.sqrt((g + 1.0) / (2.0 * g) * st.p / s.p + (g - 1.0) / (2.0 * g))
            if x <= shock:
                return s.rho, s.u, s.p
            return rho_star, st.u, st.p
        head = u - a
        a_star = a * (st.p / s.p) ** ((g - 1.0) / (2.0 * g))
        tail = ustar - a_star
        if x <= head:
            return s.rho, s.u, s.p
        if x >= tail:
            return rho_star, st.u, st.p
        c = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * a) * (u - x)
        rho = s.rho * c ** (2.0 / (g - 1.0))
        vel = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * u + x)
        p = s.p * c ** (2.0 * g / (g - 1.0))
        return rho, sign * vel, p

    def sample_array(self, xi: np.ndarray) -> np.ndarray:
        """Primitive states for an array of rays, shape xi.shape + (3,)."""
        xi = np.asarray(xi, dtype=float)
        flat = np.array([self.sample(v) for v in xi.ravel()]).reshape(xi.shape + (3,))
        return flat
