"""Tensor-product Gauss-Legendre quadrature over surfaces and star-shaped regions.

Surfaces integrate over their chart parameter box.  Volume integrals use the
cone decomposition of a star-shaped region: with star center x0 and boundary
pieces X(u), the map (s, u) -> x0 + s (X(u) - x0) has Jacobian determinant
s^{n-1} det[X - x0 | dX], so each boundary piece contributes one smooth
tensor-product integral.  The split along the corner ring Gamma is automatic
because the cap and the support face are separate pieces.

Gauss-Legendre nodes are interior, so polar-coordinate axes (t = 0) and cone
apexes (s = 0) are never evaluated.  Node reductions use a fixed-order
pairwise sum to keep results bit-stable under repetition and threading.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import StarShapeViolated
from .surfaces import FreeBoundarySurface, SurfaceGeometry, curvature_arrays, surface_geometry

DEFAULT_LEVELS = {2: 32, 3: 24, 4: 12, 5: 8}


def default_level(n: int) -> int:
    """Default nodes per axis for ambient dimension n (cost grows as level^n)."""
    return DEFAULT_LEVELS.get(n, 6)


def pairwise_sum(values: np.ndarray) -> float:
    """Fixed-order pairwise reduction; independent of BLAS and thread count."""
    a = np.asarray(values, dtype=float).ravel()
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size % 2:
            a = np.concatenate([a, [0.0]])
        a = a[0::2] + a[1::2]
    return float(a[0])


@functools.lru_cache(maxsize=64)
def _gauss_unit(level: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    x, w = np.polynomial.legendre.leggauss(level)
    return tuple(0.5 * (x + 1.0)), tuple(0.5 * w)


def gauss_nodes(level: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [lo, hi]."""
    xu, wu = _gauss_unit(level)
    span = hi - lo
    return lo + span * np.asarray(xu), span * np.asarray(wu)


def tensor_grid(level: int, box: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product nodes over a box: returns (points (m, k), weights (m,))."""
    axes, weights = [], []
    for lo, hi in box:
        x, w = gauss_nodes(level, lo, hi)
        axes.append(x)
        weights.append(w)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([mm.ravel() for mm in mesh], axis=1)
    wt = functools.reduce(np.multiply.outer, weights).ravel()
    return pts, wt


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes-per-axis for tensor-product Gauss-Legendre quadrature."""

    level: int

    def __post_init__(self):
        if self.level < 2:
            raise ValueError("quadrature level must be at least 2")


class SurfaceQuadrature:
    """Cached geometry at the tensor nodes of a surface chart."""

    def __init__(self, surf: FreeBoundarySurface, rule: QuadratureRule):
        self.surf = surf
        self.rule = rule
        self.params, self.box_weights = tensor_grid(rule.level, surf.chart.domain)
        self.geo: SurfaceGeometry = surface_geometry(surf, self.params)
        self.weights = self.box_weights * self.geo.area_element
        self._curv = None

    @property
    def count(self) -> int:
        return self.params.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self.geo.x

    def curvature(self):
        if self._curv is None:
            self._curv = curvature_arrays(self.surf, self.geo)
        return self._curv

    def integral(self, values: np.ndarray) -> float:
        return pairwise_sum(np.asarray(values, dtype=float) * self.weights)

    def area(self) -> float:
        return self.integral(np.ones(self.count))


def surface_integral(surf: FreeBoundarySurface, integrand: Callable,
                     rule: QuadratureRule) -> float:
    """Integral over the surface of integrand(nodes) with the gbar area measure.

    ``integrand`` receives the SurfaceQuadrature and returns node values of
    shape (m,); use ``nodes.points`` for positions and ``nodes.curvature()``
    for curvature fields.
    """
    nodes = SurfaceQuadrature(surf, rule)
    return nodes.integral(np.asarray(integrand(nodes), dtype=float))


# -- star-shaped regions -------------------------------------------------------


@dataclass
class RegionPiece:
    """One smooth boundary piece of a star-shaped region."""

    label: str                       # "cap" or "support"
    surface: FreeBoundarySurface     # oriented out of the region


@dataclass
class DomainRegion:
    """A star-shaped region given by its boundary pieces and a star center.

    ``contains_fn`` is an optional closed-form membership test (vectorized
    over points) used by Monte Carlo oracles and orientation ray tests.
    """

    model: object
    star_center: np.ndarray
    pieces: list[RegionPiece]
    contains_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ray_exit_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        self.star_center = np.asarray(self.star_center, dtype=float)

    def contains(self, x: np.ndarray) -> np.ndarray:
        if self.contains_fn is None:
            raise NotImplementedError("region has no closed-form membership test")
        return self.contains_fn(np.asarray(x, dtype=float))

    def radial_extent(self, directions: np.ndarray) -> np.ndarray:
        """Distance from the star center to the boundary along unit directions."""
        if self.ray_exit_fn is None:
            raise NotImplementedError("region has no closed-form radial extent")
        return self.ray_exit_fn(np.asarray(directions, dtype=float))


class RegionQuadrature:
    """Cached cone-decomposition nodes for a star-shaped region."""

    def __init__(self, region: DomainRegion, rule: QuadratureRule):
        self.region = region
        self.rule = rule
        x0 = region.star_center
        n = x0.shape[0]
        pts_list, wt_list = [], []
        for piece in region.pieces:
            surf = piece.surface
            s_nodes, s_w = gauss_nodes(rule.level, 0.0, 1.0)
            U, bw = tensor_grid(rule.level, surf.chart.domain)
            geo = surface_geometry(surf, U)
            spread = geo.x - x0                          # (m, n)
            # star-shape check: boundary must face away from the center
            facing = np.einsum("mi,mi->m", spread, geo.nu_delta)
            if np.any(facing <= 0.0):
                raise StarShapeViolated(
                    f"piece '{piece.label}' faces the star center "
                    f"(min <X - x0, nu> = {float(np.min(facing)):.3e})")
            cone_jac = np.abs(np.linalg.det(
                np.concatenate([spread[:, :, None], geo.jac], axis=2)))
            # nodes: x0 + s * spread for every (s, u) pair
            pts = x0 + s_nodes[:, None, None] * spread[None, :, :]
            radial = (s_nodes ** (n - 1))[:, None] * s_w[:, None]
            wt = radial * (bw * cone_jac)[None, :]
            pts_list.append(pts.reshape(-1, n))
            wt_list.append(wt.ravel())
        self.points = np.concatenate(pts_list, axis=0)
        self.flat_weights = np.concatenate(wt_list, axis=0)
        phi = region.model.phi(self.points)
        self.weights = self.flat_weights * np.exp(n * phi)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def integral(self, values: np.ndarray) -> float:
        return pairwise_sum(np.asarray(values, dtype=float) * self.weights)

    def volume(self) -> float:
        return self.integral(np.ones(self.count))


def domain_integral(region: DomainRegion, integrand: Callable,
                    rule: QuadratureRule) -> float:
    """Integral over the region of integrand(x) with the gbar volume measure.

    ``integrand`` maps point batches (m, n) to values (m,).
    """
    nodes = RegionQuadrature(region, rule)
    return nodes.integral(np.asarray(integrand(nodes.points), dtype=float))


# -- refinement studies ----------------------------------------------------------


@dataclass
class ConvergenceTable:
    """Values of a quantity at increasing quadrature levels."""

    levels: list[int]
    values: list[float]
    errors: list[float] = field(default_factory=list)      # |v - v_finest|
    orders: list[float] = field(default_factory=list)      # between consecutive levels

    @property
    def converged_value(self) -> float:
        return self.values[-1]

    @property
    def observed_order(self) -> float:
        finite = [o for o in self.orders if math.isfinite(o)]
        if not finite:
            return math.inf
        return min(finite)


def refine_study(fn: Callable[[int], float], levels: Sequence[int],
                 floor: float = 1e-14) -> ConvergenceTable:
    """Evaluate fn at each level and estimate the observed convergence order.

    Orders are computed from errors against the finest level; pairs of errors
    already at the rounding floor give order +inf (converged), matching the
    behaviour of constant integrands whose values repeat identically.
    """
    levels = list(levels)
    if len(levels) < 2:
        raise ValueError("refinement needs at least two levels")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must increase strictly")
    values = [float(fn(level)) for level in levels]
    ref = values[-1]
    scale = max(abs(ref), 1.0)
    errors = [abs(v - ref) for v in values]
    orders = []
    for i in range(len(levels) - 2):
        e0, e1 = errors[i], errors[i + 1]
        if e1 <= floor * scale or e0 <= floor * scale:
            orders.append(math.inf)
            continue
        ratio = levels[i + 1] / levels[i]
        orders.append(math.log(e0 / e1) / math.log(ratio))
    return ConvergenceTable(levels=levels, values=values, errors=errors, orders=orders)
