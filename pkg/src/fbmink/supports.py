"""Umbilical support hypersurfaces and their chart realizations.

Every supported case realizes the support S as either a Euclidean sphere or a
Euclidean plane inside the conformal chart of its model.  ``B_int`` denotes
the region the support bounds (the side caps are carved from), and for the
geodesic-sphere supports and the spherical hyperplane an extra half-region
constraint restricts where the weight stays positive.

Sign conventions: ``signed_distance`` is negative inside ``B_int`` and zero on
S; ``outward_normal`` is the gbar-unit normal pointing out of ``B_int``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import ambient
from .ambient import ModelKind, SpaceFormModel
from .errors import PointNotOnSupport

# Euclidean tolerance for "this point sits on the support realization".
ON_SUPPORT_TOL = 1e-10


class SupportKind(enum.Enum):
    EUCLIDEAN_SPHERE = "euclidean_sphere"
    EUCLIDEAN_PLANE = "euclidean_plane"
    HYP_GEODESIC_SPHERE = "hyp_geodesic_sphere"
    HOROSPHERE = "horosphere"
    EQUIDISTANT = "equidistant"
    HYP_GEODESIC_PLANE = "hyp_geodesic_plane"
    SPH_GEODESIC_SPHERE = "sph_geodesic_sphere"
    SPH_HYPERPLANE = "sph_hyperplane"


class HalfRegion(enum.Enum):
    """Extra constraint carving B_int^+ out of B_int, where one is required."""

    NONE = "none"
    LAST_COORD_POSITIVE = "last_coord_positive"
    UNIT_BALL = "unit_ball"


@dataclass(frozen=True)
class SphereShape:
    """Euclidean sphere |x - center| = radius; B_int is the inside."""

    center: tuple
    radius: float

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        return np.linalg.norm(np.asarray(x, float) - c, axis=-1) - self.radius

    def euclidean_outward(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        d = np.asarray(x, float) - c
        return d / np.linalg.norm(d, axis=-1, keepdims=True)


@dataclass(frozen=True)
class PlaneShape:
    """Euclidean plane <normal_in, x> = offset; B_int is the normal_in side."""

    normal_in: tuple   # unit vector pointing into B_int
    offset: float

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        a = np.asarray(self.normal_in, dtype=float)
        return self.offset - np.sum(np.asarray(x, float) * a, axis=-1)

    def euclidean_outward(self, x: np.ndarray) -> np.ndarray:
        a = np.asarray(self.normal_in, dtype=float)
        out = np.broadcast_to(-a, np.asarray(x, float).shape).copy()
        return out


@dataclass(frozen=True)
class SupportSpec:
    """A support hypersurface: model, chart realization, and curvature kappa."""

    kind: SupportKind
    model: SpaceFormModel
    kappa: float
    shape: object                      # SphereShape or PlaneShape
    half_region: HalfRegion
    params: dict = field(default_factory=dict, compare=False)

    @property
    def requires_half_region(self) -> bool:
        return self.half_region is not HalfRegion.NONE

    @property
    def n(self) -> int:
        return self.model.n

    # -- geometry ------------------------------------------------------------

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        """Negative strictly inside B_int, zero on S, positive outside."""
        return self.shape.signed_distance(x)

    def outward_normal(self, x: np.ndarray) -> np.ndarray:
        """gbar-unit normal along S pointing out of B_int (chart components)."""
        x = np.asarray(x, dtype=float)
        sd = np.abs(self.signed_distance(x))
        if np.any(sd > ON_SUPPORT_TOL):
            worst = float(np.max(sd))
            raise PointNotOnSupport(
                f"point is {worst:.3e} off the {self.kind.value} realization")
        unit = self.shape.euclidean_outward(x)
        # gbar-unit: |v|_gbar = exp(phi) |v|_delta
        return unit * np.exp(-self.model.phi(x))[..., None]

    def half_region_margin(self, x: np.ndarray) -> np.ndarray:
        """Positive where the half-region constraint holds (inf if none)."""
        x = np.asarray(x, dtype=float)
        if self.half_region is HalfRegion.LAST_COORD_POSITIVE:
            return x[..., -1]
        if self.half_region is HalfRegion.UNIT_BALL:
            return 1.0 - np.linalg.norm(x, axis=-1)
        return np.full(x.shape[:-1], np.inf)

    def in_admissible_region(self, x: np.ndarray) -> np.ndarray:
        """Interior of B_int intersected with the half-region constraint."""
        x = np.asarray(x, dtype=float)
        ok = self.model.contains(x) & (self.signed_distance(x) < 0.0)
        if self.requires_half_region:
            ok = ok & (self.half_region_margin(x) > 0.0)
        return ok


# -- constructors -------------------------------------------------------------


def euclidean_sphere(n: int, radius: float = 1.0) -> SupportSpec:
    if radius <= 0:
        raise ValueError("sphere radius must be positive")
    return SupportSpec(
        kind=SupportKind.EUCLIDEAN_SPHERE,
        model=ambient.euclidean(n),
        kappa=1.0 / radius,
        shape=SphereShape(center=(0.0,) * n, radius=radius),
        half_region=HalfRegion.LAST_COORD_POSITIVE,
        params={"radius": radius},
    )


def euclidean_plane(n: int) -> SupportSpec:
    a = (0.0,) * (n - 1) + (1.0,)
    return SupportSpec(
        kind=SupportKind.EUCLIDEAN_PLANE,
        model=ambient.euclidean(n),
        kappa=0.0,
        shape=PlaneShape(normal_in=a, offset=0.0),
        half_region=HalfRegion.NONE,
        params={},
    )


def hyp_geodesic_sphere(n: int, geodesic_radius: Optional[float] = None,
                        chart_radius: Optional[float] = None) -> SupportSpec:
    """Geodesic sphere in the Poincare ball, centered at the origin.

    Accepts either the intrinsic radius R (chart radius tanh(R/2)) or the
    chart radius directly.  kappa = coth R = (1 + rho^2) / (2 rho).
    """
    if (geodesic_radius is None) == (chart_radius is None):
        raise ValueError("give exactly one of geodesic_radius, chart_radius")
    if geodesic_radius is not None:
        if geodesic_radius <= 0:
            raise ValueError("geodesic radius must be positive")
        rho = math.tanh(geodesic_radius / 2.0)
    else:
        rho = float(chart_radius)
        if not 0.0 < rho < 1.0:
            raise ValueError("chart radius must lie in (0, 1)")
    kappa = (1.0 + rho * rho) / (2.0 * rho)
    return SupportSpec(
        kind=SupportKind.HYP_GEODESIC_SPHERE,
        model=ambient.poincare_ball(n),
        kappa=kappa,
        shape=SphereShape(center=(0.0,) * n, radius=rho),
        half_region=HalfRegion.LAST_COORD_POSITIVE,
        params={"chart_radius": rho},
    )


def horosphere(n: int) -> SupportSpec:
    a = (0.0,) * (n - 1) + (1.0,)
    return SupportSpec(
        kind=SupportKind.HOROSPHERE,
        model=ambient.upper_half_space(n),
        kappa=1.0,
        shape=PlaneShape(normal_in=a, offset=1.0),
        half_region=HalfRegion.NONE,
        params={},
    )


def equidistant(n: int, theta: float) -> SupportSpec:
    """Equidistant hypersurface {x_1 tan(theta) + x_n = 1} in the half space.

    theta in (0, pi/2); kappa = cos(theta) in (0, 1).  The inward direction
    (into B_int) is (sin theta, 0, ..., cos theta).
    """
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError("theta must lie in (0, pi/2)")
    a = [0.0] * n
    a[0] = math.sin(theta)
    a[-1] = math.cos(theta)
    return SupportSpec(
        kind=SupportKind.EQUIDISTANT,
        model=ambient.upper_half_space(n),
        kappa=math.cos(theta),
        shape=PlaneShape(normal_in=tuple(a), offset=math.cos(theta)),
        half_region=HalfRegion.NONE,
        params={"theta": theta},
    )


def hyp_geodesic_plane(n: int) -> SupportSpec:
    a = (1.0,) + (0.0,) * (n - 1)
    return SupportSpec(
        kind=SupportKind.HYP_GEODESIC_PLANE,
        model=ambient.upper_half_space(n),
        kappa=0.0,
        shape=PlaneShape(normal_in=a, offset=0.0),
        half_region=HalfRegion.NONE,
        params={},
    )


def sph_geodesic_sphere(n: int, geodesic_radius: Optional[float] = None,
                        chart_radius: Optional[float] = None) -> SupportSpec:
    """Geodesic sphere in the stereographic sphere model, centered at the origin.

    Intrinsic radius R must satisfy 0 < R < pi/2 (so that kappa = cot R > 0
    and the enclosed region stays in one hemisphere); the chart radius is
    tan(R/2), so chart_radius must lie in (0, tan(pi/4)) = (0, 1).
    """
    if (geodesic_radius is None) == (chart_radius is None):
        raise ValueError("give exactly one of geodesic_radius, chart_radius")
    if geodesic_radius is not None:
        if not 0.0 < geodesic_radius < math.pi / 2.0:
            raise ValueError("geodesic radius must lie in (0, pi/2)")
        rho = math.tan(geodesic_radius / 2.0)
    else:
        rho = float(chart_radius)
        if not 0.0 < rho < 1.0:
            raise ValueError("chart radius must lie in (0, 1), i.e. R < pi/2")
    kappa = (1.0 - rho * rho) / (2.0 * rho)
    return SupportSpec(
        kind=SupportKind.SPH_GEODESIC_SPHERE,
        model=ambient.sphere_stereographic(n),
        kappa=kappa,
        shape=SphereShape(center=(0.0,) * n, radius=rho),
        half_region=HalfRegion.LAST_COORD_POSITIVE,
        params={"chart_radius": rho},
    )


def sph_hyperplane(n: int) -> SupportSpec:
    a = (0.0,) * (n - 1) + (1.0,)
    return SupportSpec(
        kind=SupportKind.SPH_HYPERPLANE,
        model=ambient.sphere_stereographic(n),
        kappa=0.0,
        shape=PlaneShape(normal_in=a, offset=0.0),
        half_region=HalfRegion.UNIT_BALL,
        params={},
    )


_SUPPORT_PARAM_KEYS = {
    SupportKind.EUCLIDEAN_SPHERE: {"radius"},
    SupportKind.EUCLIDEAN_PLANE: set(),
    SupportKind.HYP_GEODESIC_SPHERE: {"geodesic_radius", "chart_radius"},
    SupportKind.HOROSPHERE: set(),
    SupportKind.EQUIDISTANT: {"theta"},
    SupportKind.HYP_GEODESIC_PLANE: set(),
    SupportKind.SPH_GEODESIC_SPHERE: {"geodesic_radius", "chart_radius"},
    SupportKind.SPH_HYPERPLANE: set(),
}


def make_support(kind: SupportKind | str, n: int, **params) -> SupportSpec:
    """Uniform constructor used by the CLI configuration layer."""
    kind = SupportKind(kind) if not isinstance(kind, SupportKind) else kind
    unknown = set(params) - _SUPPORT_PARAM_KEYS[kind]
    if unknown:
        raise ValueError(
            f"unknown parameter(s) {sorted(unknown)} for support {kind.value}; "
            f"allowed: {sorted(_SUPPORT_PARAM_KEYS[kind])}")
    if kind is SupportKind.EUCLIDEAN_SPHERE:
        return euclidean_sphere(n, params.get("radius", 1.0))
    if kind is SupportKind.EUCLIDEAN_PLANE:
        return euclidean_plane(n)
    if kind is SupportKind.HYP_GEODESIC_SPHERE:
        if "geodesic_radius" in params:
            return hyp_geodesic_sphere(n, geodesic_radius=params["geodesic_radius"])
        return hyp_geodesic_sphere(n, chart_radius=params.get("chart_radius", 0.5))
    if kind is SupportKind.HOROSPHERE:
        return horosphere(n)
    if kind is SupportKind.EQUIDISTANT:
        return equidistant(n, params.get("theta", math.pi / 6.0))
    if kind is SupportKind.HYP_GEODESIC_PLANE:
        return hyp_geodesic_plane(n)
    if kind is SupportKind.SPH_GEODESIC_SPHERE:
        if "geodesic_radius" in params:
            return sph_geodesic_sphere(n, geodesic_radius=params["geodesic_radius"])
        return sph_geodesic_sphere(n, chart_radius=params.get("chart_radius", 0.5))
    if kind is SupportKind.SPH_HYPERPLANE:
        return sph_hyperplane(n)
    raise ValueError(f"unknown support kind {kind!r}")


ALL_SUPPORT_KINDS = tuple(SupportKind)


# -- samplers (seed-controlled, used by identity checks and tests) ------------


def _plane_frame(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to unit vector a."""
    n = a.shape[0]
    basis = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        v = e - np.dot(e, a) * a
        for b in basis:
            v -= np.dot(v, b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
        if len(basis) == n - 1:
            break
    return np.stack(basis, axis=1)   # (n, n-1)


def sample_support_points(s: SupportSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points on the chart realization of S, inside the model chart domain.

    The Neumann identity holds on all of S, so sampling is not restricted to
    the admissible region; it only avoids the chart boundary where conformal
    factors degenerate.
    """
    n = s.n
    if isinstance(s.shape, SphereShape):
        d = rng.normal(size=(count, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return np.asarray(s.shape.center, float) + s.shape.radius * d
    a = np.asarray(s.shape.normal_in, float)
    p0 = s.shape.offset * a
    frame = _plane_frame(a)
    pts = np.empty((count, n))
    have = 0
    while have < count:
        coeff = rng.uniform(-1.5, 1.5, size=(count, n - 1))
        cand = p0 + coeff @ frame.T
        keep = s.model.contains(cand)
        if s.model.kind is ModelKind.UPPER_HALF_SPACE:
            keep &= cand[:, -1] > 0.05     # stay away from the chart boundary
        cand = cand[keep]
        take = min(count - have, cand.shape[0])
        pts[have:have + take] = cand[:take]
        have += take
    return pts


def _sampling_box(s: SupportSpec) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box enclosing a healthy slice of the admissible region.

    Kept away from chart boundaries so that closed-form quantities stay well
    scaled and finite-difference oracles remain accurate.
    """
    n = s.n
    lo, hi = -np.ones(n), np.ones(n)
    if isinstance(s.shape, SphereShape):
        r = s.shape.radius
        lo, hi = -r * np.ones(n), r * np.ones(n)
    elif s.model.kind is ModelKind.UPPER_HALF_SPACE:
        lo, hi = -2.0 * np.ones(n), 2.0 * np.ones(n)
        lo[-1], hi[-1] = 0.3, 3.5
        if s.kind is SupportKind.HOROSPHERE:
            lo[-1], hi[-1] = 1.0, 4.0
    return lo, hi


def sample_admissible_points(s: SupportSpec, count: int,
                             rng: np.random.Generator) -> np.ndarray:
    """Rejection-sample points of the admissible region of s."""
    lo, hi = _sampling_box(s)
    pts = np.empty((count, s.n))
    have = 0
    while have < count:
        cand = rng.uniform(lo, hi, size=(4 * count, s.n))
        cand = cand[s.in_admissible_region(cand)]
        take = min(count - have, cand.shape[0])
        pts[have:have + take] = cand[:take]
        have += take
    return pts
