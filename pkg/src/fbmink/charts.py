"""Parametric charts with exact first and second derivatives.

The surface engine consumes charts through a single batched interface:
``evaluate(U)`` maps parameter points (m, k) to positions (m, n), Jacobians
(m, n, k) and second derivatives (m, k, k, n).  Everything downstream
(fundamental forms, quadrature, the Reilly terms) differentiates nothing
itself, so charts are the only place derivative bookkeeping lives.

Spherical caps use standard polar coordinates on S^{n-1}: with angles
theta_0..theta_{q-1} (q = n-1) the unit vector has components

    c_j = prod_{a<j} sin(theta_a) * (cos(theta_j) if j < q else 1),

a pure product of single-angle factors, so first and second derivatives
follow from the product rule with no quotients (safe at small angles).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np


def sphere_embedding(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Polar coordinates on S^q embedded in R^{q+1}, with two derivatives.

    Parameters: angles (m, q).  Returns (c, dc, d2c) with shapes
    (m, q+1), (m, q+1, q), (m, q+1, q, q).
    """
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    m, q = angles.shape
    sin, cos = np.sin(angles), np.cos(angles)

    # factor tables: component j uses angle a as sin for a<j, cos for a=j (j<q)
    F = np.ones((m, q + 1, q))
    F1 = np.zeros((m, q + 1, q))
    F2 = np.zeros((m, q + 1, q))
    for j in range(q + 1):
        for a in range(min(j, q)):
            F[:, j, a] = sin[:, a]
            F1[:, j, a] = cos[:, a]
            F2[:, j, a] = -sin[:, a]
        if j < q:
            F[:, j, j] = cos[:, j]
            F1[:, j, j] = -sin[:, j]
            F2[:, j, j] = -cos[:, j]

    used = np.zeros((q + 1, q), dtype=bool)
    for j in range(q + 1):
        used[j, : min(j, q)] = True
        if j < q:
            used[j, j] = True

    c = np.prod(F, axis=2)
    dc = np.zeros((m, q + 1, q))
    d2c = np.zeros((m, q + 1, q, q))
    for j in range(q + 1):
        for a in range(q):
            if not used[j, a]:
                continue
            rest = np.ones(m)
            for ap in range(q):
                if ap != a and used[j, ap]:
                    rest = rest * F[:, j, ap]
            dc[:, j, a] = F1[:, j, a] * rest
            d2c[:, j, a, a] = F2[:, j, a] * rest
            for b in range(a + 1, q):
                if not used[j, b]:
                    continue
                rest2 = np.ones(m)
                for ap in range(q):
                    if ap not in (a, b) and used[j, ap]:
                        rest2 = rest2 * F[:, j, ap]
                val = F1[:, j, a] * F1[:, j, b] * rest2
                d2c[:, j, a, b] = val
                d2c[:, j, b, a] = val
    return c, dc, d2c


def sphere_angles(directions: np.ndarray) -> np.ndarray:
    """Inverse of sphere_embedding: unit vectors (m, q+1) to angles (m, q)."""
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    m, dim = d.shape
    q = dim - 1
    angles = np.empty((m, q))
    for j in range(q - 1):
        tail = np.linalg.norm(d[:, j + 1:], axis=1)
        angles[:, j] = np.arctan2(tail, d[:, j])
    angles[:, q - 1] = np.arctan2(d[:, q], d[:, q - 1])
    return angles


def full_sphere_box(q: int) -> list[tuple[float, float]]:
    """Angle box covering all of S^q: q-1 colatitudes in [0,pi], one in [0,2pi]."""
    if q == 0:
        return []
    return [(0.0, math.pi)] * (q - 1) + [(0.0, 2.0 * math.pi)]


def sphere_param_box(q: int, t_min: float, t_max: float) -> list[tuple[float, float]]:
    """Parameter box for a polar cap of S^q: restricted polar angle, rest full."""
    return [(t_min, t_max)] + full_sphere_box(q - 1)


class Chart(Protocol):
    """Batched parametrization of a k-dimensional patch in R^n."""

    dim: int
    ambient_dim: int
    domain: list[tuple[float, float]]
    boundary_axes: list[int]

    def evaluate(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ...

    def normal_hint(self, U: np.ndarray, X: np.ndarray) -> np.ndarray:
        ...


@dataclass
class SphericalCapChart:
    """Cap of a Euclidean sphere: center + radius * omega(angles).

    ``frame`` has orthonormal columns, the first being the polar axis.  The
    cap spans polar angles [t_min, t_max]; when used as a free-boundary
    surface the face t = t_max is the ring on the support.
    """

    center: np.ndarray
    radius: float
    frame: np.ndarray          # (n, n), columns orthonormal, frame[:, 0] = axis
    t_max: float
    t_min: float = 0.0
    outward: bool = True       # hint points away from the center when True

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.frame = np.asarray(self.frame, dtype=float)
        n = self.center.shape[0]
        self.ambient_dim = n
        self.dim = n - 1
        self.domain = sphere_param_box(self.dim, self.t_min, self.t_max)
        self.boundary_axes = [0]

    def evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        c, dc, d2c = sphere_embedding(U)
        X = self.center + self.radius * c @ self.frame.T
        J = self.radius * np.einsum("ik,mka->mia", self.frame, dc)
        H = self.radius * np.einsum("ik,mkab->mabi", self.frame, d2c)
        return X, J, H

    def unit_direction(self, U):
        """omega(U): unit vector from the center, shape (m, n)."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        c, _, _ = sphere_embedding(U)
        return c @ self.frame.T

    def normal_hint(self, U, X):
        d = X - self.center
        return d if self.outward else -d


def axis_frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal frame whose first column is the given unit axis."""
    axis = np.asarray(axis, dtype=float)
    n = axis.shape[0]
    cols = [axis / np.linalg.norm(axis)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        v = e.copy()
        for b in cols:
            v -= np.dot(v, b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
        if len(cols) == n:
            break
    return np.stack(cols, axis=1)


@dataclass
class RadialBumpProfile:
    """Rotationally symmetric bump p(t) = (1 - (t/t_max)^2)^power.

    Vanishes together with its first and second derivative at t = t_max for
    power >= 3, so the perturbed cap keeps its boundary ring, the free
    boundary angle, and the boundary second fundamental form exactly.
    """

    t_max: float
    power: int = 3

    def evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        m, q = U.shape
        t = U[:, 0]
        tm2 = self.t_max ** 2
        z = t * t / tm2
        base = 1.0 - z
        p = base ** self.power
        dp_dt = self.power * base ** (self.power - 1) * (-2.0 * t / tm2)
        d2p_dt2 = (self.power * (self.power - 1) * base ** (self.power - 2)
                   * (4.0 * t * t / tm2 ** 2)
                   - self.power * base ** (self.power - 1) * 2.0 / tm2)
        dp = np.zeros((m, q))
        dp[:, 0] = dp_dt
        d2p = np.zeros((m, q, q))
        d2p[:, 0, 0] = d2p_dt2
        return p, dp, d2p


@dataclass
class PerturbedCapChart:
    """Cap displaced along its gbar-unit normal by epsilon * profile.

    The base cap's chart normal is exp(-phi(X)) * (X - center)/radius, which
    is radial from the cap center, so the perturbed surface stays a radial
    graph about that center and all derivatives remain closed-form.  ``model``
    supplies phi and its two derivative tensors.
    """

    base: SphericalCapChart
    model: object              # SpaceFormModel
    epsilon: float
    profile: object            # evaluate(U) -> (p, dp, d2p)

    def __post_init__(self):
        self.ambient_dim = self.base.ambient_dim
        self.dim = self.base.dim
        self.domain = self.base.domain
        self.boundary_axes = self.base.boundary_axes

    def evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        X, J, H = self.base.evaluate(U)
        m, n = X.shape
        k = self.dim
        p, dp, d2p = self.profile.evaluate(U)

        phi = self.model.phi(X)
        dphi = self.model.phi_grad(X)
        d2phi = self.model.phi_hess(X)
        s = np.exp(-phi)                                  # conformal unit scale
        # chain rule for s(X(u)): ds_a = -s <dphi, J_a>
        dphi_J = np.einsum("mi,mia->ma", dphi, J)
        ds = -s[:, None] * dphi_J
        # d2s_ab = s (dphi_J_a dphi_J_b - <dphi, H_ab> - J_a^T d2phi J_b)
        dphi_H = np.einsum("mi,mabi->mab", dphi, H)
        JdJ = np.einsum("mia,mij,mjb->mab", J, d2phi, J)
        d2s = s[:, None, None] * (dphi_J[:, :, None] * dphi_J[:, None, :]
                                  - dphi_H - JdJ)

        # amplitude A(u) = eps/r * p(u) * s(u); X_eps = X + A (X - center)
        r = self.base.radius
        A = (self.epsilon / r) * p * s
        dA = (self.epsilon / r) * (dp * s[:, None] + p[:, None] * ds)
        d2A = (self.epsilon / r) * (d2p * s[:, None, None]
                                    + dp[:, :, None] * ds[:, None, :]
                                    + ds[:, :, None] * dp[:, None, :]
                                    + p[:, None, None] * d2s)

        Q = X - self.base.center
        Xp = X + A[:, None] * Q
        Jp = J * (1.0 + A)[:, None, None] + Q[:, :, None] * dA[:, None, :]
        Jt = np.transpose(J, (0, 2, 1))    # (m, k, n): rows are d_a X
        Hp = (H * (1.0 + A)[:, None, None, None]
              + dA[:, :, None, None] * Jt[:, None, :, :]
              + dA[:, None, :, None] * Jt[:, :, None, :]
              + d2A[:, :, :, None] * Q[:, None, None, :])
        return Xp, Jp, Hp

    def normal_hint(self, U, X):
        return X - self.base.center


@dataclass
class PolarPlanarChart:
    """Polar patch of a hyperplane: center + s * (in-plane unit direction).

    Parameters are (s, sphere angles of S^{n-2}); for n = 3 that is (s, psi).
    ``hint`` fixes the orientation of the constant plane normal.
    """

    center: np.ndarray
    plane_frame: np.ndarray    # (n, n-1), orthonormal columns spanning the plane
    radius: float
    hint: np.ndarray
    s_min: float = 0.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.plane_frame = np.asarray(self.plane_frame, dtype=float)
        self.hint = np.asarray(self.hint, dtype=float)
        n = self.center.shape[0]
        if n < 3:
            raise ValueError("polar planar patches need ambient dimension >= 3")
        self.ambient_dim = n
        self.dim = n - 1
        self.domain = [(self.s_min, self.radius)] + full_sphere_box(n - 2)
        self.boundary_axes = [0]

    def evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        m = U.shape[0]
        s = U[:, 0]
        ang = U[:, 1:]
        c, dc, d2c = sphere_embedding(ang)        # on S^{n-2} in R^{n-1}
        w = c @ self.plane_frame.T                # (m, n) unit in-plane direction
        dw = np.einsum("ik,mka->mia", self.plane_frame, dc)
        d2w = np.einsum("ik,mkab->mabi", self.plane_frame, d2c)

        n, k = self.ambient_dim, self.dim
        X = self.center + s[:, None] * w
        J = np.empty((m, n, k))
        J[:, :, 0] = w
        J[:, :, 1:] = s[:, None, None] * dw
        H = np.zeros((m, k, k, n))
        H[:, 0, 1:, :] = np.transpose(dw, (0, 2, 1))
        H[:, 1:, 0, :] = np.transpose(dw, (0, 2, 1))
        H[:, 1:, 1:, :] = s[:, None, None, None] * d2w
        return X, J, H

    def normal_hint(self, U, X):
        return np.broadcast_to(self.hint, X.shape).copy()


@dataclass
class PlanarBoxChart:
    """Affine box patch of a hyperplane (used for umbilicity certification)."""

    origin: np.ndarray
    plane_frame: np.ndarray    # (n, n-1) orthonormal columns
    extent: float
    hint: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.plane_frame = np.asarray(self.plane_frame, dtype=float)
        self.hint = np.asarray(self.hint, dtype=float)
        n = self.origin.shape[0]
        self.ambient_dim = n
        self.dim = n - 1
        self.domain = [(-self.extent, self.extent)] * (n - 1)
        self.boundary_axes = []

    def evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        m, k = U.shape
        X = self.origin + U @ self.plane_frame.T
        J = np.broadcast_to(self.plane_frame, (m,) + self.plane_frame.shape).copy()
        H = np.zeros((m, k, k, self.ambient_dim))
        return X, J, H

    def normal_hint(self, U, X):
        return np.broadcast_to(self.hint, X.shape).copy()


@dataclass
class FiniteDifferenceChart:
    """Wraps a plain position callable; derivatives by central differences.

    Fourth-order stencils at step ``h`` (default 1e-5) give Jacobians and
    second derivatives accurate enough for diagnostic use on user charts
    that cannot supply exact derivatives.
    """

    position: Callable[[np.ndarray], np.ndarray]
    dim: int
    ambient_dim: int
    domain: list
    boundary_axes: list
    hint_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    step: float = 1e-5

    def evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        m, k = U.shape
        f = self.position
        X = np.atleast_2d(f(U))
        h = self.step

        def shift(i, amount):
            V = U.copy()
            V[:, i] += amount
            return np.atleast_2d(f(V))

        J = np.empty((m, self.ambient_dim, k))
        for a in range(k):
            J[:, :, a] = (8.0 * (shift(a, h) - shift(a, -h))
                          - (shift(a, 2 * h) - shift(a, -2 * h))) / (12.0 * h)
        H = np.empty((m, k, k, self.ambient_dim))
        for a in range(k):
            H[:, a, a, :] = (16.0 * (shift(a, h) + shift(a, -h))
                             - (shift(a, 2 * h) + shift(a, -2 * h))
                             - 30.0 * X) / (12.0 * h * h)
        for a in range(k):
            for b in range(a + 1, k):
                def shift2(da, db):
                    V = U.copy()
                    V[:, a] += da
                    V[:, b] += db
                    return np.atleast_2d(f(V))
                mixed = (shift2(h, h) - shift2(h, -h)
                         - shift2(-h, h) + shift2(-h, -h)) / (4.0 * h * h)
                mixed2 = (shift2(h / 2, h / 2) - shift2(h / 2, -h / 2)
                          - shift2(-h / 2, h / 2) + shift2(-h / 2, -h / 2)) / (h * h)
                val = (4.0 * mixed2 - mixed) / 3.0
                H[:, a, b, :] = val
                H[:, b, a, :] = val
        return X, J, H

    def normal_hint(self, U, X):
        if self.hint_fn is None:
            raise ValueError("finite-difference chart needs an orientation hint")
        return self.hint_fn(U, X)
