"""Construction of free-boundary caps over umbilical supports.

An umbilical cap is the portion of a Euclidean chart sphere that meets the
support realization orthogonally:

* plane-type supports: the half of the sphere S(c, r) on the B_int side,
  with c on the plane (optionally displaced for tilt experiments);
* sphere-type supports (chart radius R): the sphere S(c, r) with
  |c| = sqrt(R^2 + r^2), so the two spheres cross at right angles along the
  ring Gamma, and the cap is the part inside the support ball.

Each scenario bundles the surface, the support face it cuts out, a
star-shaped integration region for the enclosed volume, and the paired
weight.  Perturbed caps displace the base cap along its gbar-unit normal by
epsilon times a profile that vanishes to second order at the ring, so the
free-boundary data at Gamma is preserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quadrature as quad
from .ambient import ModelKind, SpaceFormModel
from .charts import (
    PerturbedCapChart,
    PolarPlanarChart,
    RadialBumpProfile,
    SphericalCapChart,
    axis_frame,
    sphere_angles,
)
from .errors import (
    DimensionTooLow,
    InadmissiblePlacement,
    OrthogonalityInfeasible,
    ValidationFailed,
)
from .supports import PlaneShape, SphereShape, SupportSpec
from .surfaces import FreeBoundarySurface, boundary_orthogonality
from .weights import WeightField, weight_for_support

ADMISSIBILITY_MARGIN = 1e-6


@dataclass(frozen=True)
class CapSpec:
    """Placement parameters of a cap over a support.

    ``tilt`` (plane-type supports) moves the sphere center off the plane by
    r sin(tilt) along the inward normal, breaking orthogonality on purpose.
    ``center_distance`` (sphere-type supports) overrides the orthogonal
    distance sqrt(R^2 + r^2) for the same end.  ``axis`` picks the placement
    direction; in-plane ``center_shift`` coefficients move the anchor of a
    plane-type cap inside its plane.
    """

    support: SupportSpec
    radius: float
    axis: Optional[tuple] = None
    tilt: float = 0.0
    center_distance: Optional[float] = None
    center_shift: Optional[tuple] = None


@dataclass(frozen=True)
class PerturbationSpec:
    """Normal perturbation: epsilon times a radial bump profile.

    ``power`` >= 3 keeps the profile and its first two derivatives zero at
    the boundary ring; lower powers are rejected because they would change
    the contact angle or the boundary second fundamental form.
    """

    epsilon: float
    power: int = 3
    profile: Optional[object] = None   # custom (p, dp, d2p) provider


@dataclass
class CapScenario:
    """A fully assembled verification scenario."""

    support: SupportSpec
    weight: WeightField
    surface: FreeBoundarySurface       # the cap Sigma
    face: FreeBoundarySurface          # the support face T, oriented out of Omega
    region: quad.DomainRegion          # Omega, star-shaped
    spec: CapSpec
    perturbation: Optional[PerturbationSpec] = None
    description: str = ""

    @property
    def model(self) -> SpaceFormModel:
        return self.support.model

    @property
    def n(self) -> int:
        return self.support.n

    @property
    def epsilon(self) -> float:
        return self.perturbation.epsilon if self.perturbation else 0.0


def _default_axis(s: SupportSpec) -> np.ndarray:
    n = s.n
    if isinstance(s.shape, SphereShape):
        a = np.zeros(n)
        a[-1] = 1.0
        return a
    return np.asarray(s.shape.normal_in, dtype=float)


def _plane_anchor(s: SupportSpec, shift: Optional[tuple]) -> np.ndarray:
    a = np.asarray(s.shape.normal_in, dtype=float)
    anchor = s.shape.offset * a
    if s.model.kind is ModelKind.UPPER_HALF_SPACE and anchor[-1] < 1e-9:
        lift = np.zeros(s.n)
        lift[-1] = 1.0
        # the support plane contains the vertical direction here, so the
        # lifted anchor stays on the plane and clear of the chart boundary
        anchor = anchor + lift
    if shift is not None:
        frame = axis_frame(a)[:, 1:]
        anchor = anchor + frame @ np.asarray(shift, dtype=float)
        if abs(float(s.signed_distance(anchor))) > 1e-12:
            raise InadmissiblePlacement("center shift left the support plane")
    return anchor


def _sphere_membership(shape, x: np.ndarray) -> np.ndarray:
    return shape.signed_distance(x) <= 0.0


def _halfspace_ball_min_height(center: np.ndarray, r: float, a: np.ndarray,
                               offset: float) -> float:
    """Exact min of x_n over the closed set B(center, r) & {<a, x> >= offset}."""
    an = a[-1]
    cn = center[-1]
    if an <= 0.0:
        return cn - r
    slack = float(np.dot(a, center)) - offset
    if slack - r * an >= 0.0:
        return cn - r
    # the minimizer sits on the slicing disk of the support plane
    disk_r = math.sqrt(max(r * r - slack * slack, 0.0))
    return (cn - slack * an) - disk_r * math.sqrt(max(1.0 - an * an, 0.0))


def placement_margins(s: SupportSpec, center: np.ndarray, r: float) -> dict:
    """Closed-form margins of the closed region to chart and half-region walls.

    Computed before any chart evaluation, so an out-of-chart placement is
    reported as InadmissiblePlacement instead of a low-level evaluation error.
    """
    center = np.asarray(center, dtype=float)
    out: dict[str, float] = {}
    if s.model.kind is ModelKind.UPPER_HALF_SPACE:
        if isinstance(s.shape, PlaneShape):
            a = np.asarray(s.shape.normal_in, dtype=float)
            out["chart"] = _halfspace_ball_min_height(center, r, a, s.shape.offset)
        else:
            out["chart"] = float(center[-1]) - r
    elif s.model.kind is ModelKind.POINCARE_BALL:
        if isinstance(s.shape, SphereShape):
            out["chart"] = 1.0 - s.shape.radius
        else:
            out["chart"] = 1.0 - (float(np.linalg.norm(center)) + r)
    if s.half_region.name == "LAST_COORD_POSITIVE":
        out["half_region"] = float(center[-1]) - r
    elif s.half_region.name == "UNIT_BALL":
        out["half_region"] = 1.0 - (float(np.linalg.norm(center)) + r)
    return out


def _placement_precheck(s: SupportSpec, center: np.ndarray, r: float) -> None:
    for name, value in placement_margins(s, center, r).items():
        if value <= ADMISSIBILITY_MARGIN:
            raise InadmissiblePlacement(
                f"{name} margin {value:.3e} for cap radius {r} on {s.kind.value}")


def make_umbilical_cap(spec: CapSpec) -> CapScenario:
    """Build the scenario for an umbilical cap (or a deliberately tilted one)."""
    s = spec.support
    r = float(spec.radius)
    if r <= 0.0:
        raise OrthogonalityInfeasible("cap radius must be positive")
    axis = np.asarray(spec.axis, dtype=float) if spec.axis is not None else _default_axis(s)
    axis = axis / np.linalg.norm(axis)

    if isinstance(s.shape, PlaneShape):
        scenario = _plane_cap(spec, s, r, axis)
    else:
        scenario = _sphere_cap(spec, s, r, axis)
    _check_admissible(scenario)
    return scenario


def _plane_cap(spec: CapSpec, s: SupportSpec, r: float, a: np.ndarray) -> CapScenario:
    if s.model.n < 3:
        # the support face is a polar disk, which needs n - 1 >= 2
        raise DimensionTooLow(
            "plane-type supports need ambient dimension >= 3, got "
            f"{s.model.n}")
    if spec.center_distance is not None:
        raise OrthogonalityInfeasible("center_distance applies to sphere supports only")
    anchor = _plane_anchor(s, spec.center_shift)
    sin_tilt = math.sin(spec.tilt)
    if not -1.0 < sin_tilt < 1.0:
        raise OrthogonalityInfeasible("tilt must keep the center within one radius")
    center = anchor + r * sin_tilt * a
    _placement_precheck(s, center, r)
    t_max = math.acos(-sin_tilt)
    cap_chart = SphericalCapChart(center=center, radius=r, frame=axis_frame(a),
                                  t_max=t_max, outward=True)
    surface = FreeBoundarySurface(model=s.model, chart=cap_chart, support=s)

    ring_radius = r * math.cos(spec.tilt)
    face_chart = PolarPlanarChart(center=anchor, plane_frame=axis_frame(a)[:, 1:],
                                  radius=ring_radius, hint=-a)
    face = FreeBoundarySurface(model=s.model, chart=face_chart, support=None)

    plane = s.shape

    def contains(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside_half = plane.signed_distance(x) <= 0.0
        inside_ball = np.linalg.norm(x - center, axis=-1) <= r
        return inside_half & inside_ball

    def ray_exit(directions: np.ndarray) -> np.ndarray:
        return _ray_sphere_exit(anchor, center, r, directions)

    region = quad.DomainRegion(
        model=s.model, star_center=anchor,
        pieces=[quad.RegionPiece("cap", surface)],
        contains_fn=contains, ray_exit_fn=ray_exit,
    )
    return CapScenario(support=s, weight=weight_for_support(s), surface=surface,
                       face=face, region=region, spec=spec,
                       description=f"cap r={r} on {s.kind.value}")


def _sphere_cap(spec: CapSpec, s: SupportSpec, r: float, axis: np.ndarray) -> CapScenario:
    n = s.n
    if spec.tilt:
        raise OrthogonalityInfeasible("tilt applies to plane supports; use center_distance")
    if spec.center_shift is not None:
        raise OrthogonalityInfeasible("center_shift applies to plane supports only")
    R = s.shape.radius
    d = spec.center_distance if spec.center_distance is not None else math.hypot(R, r)
    if not abs(d - r) < R < d + r:
        raise OrthogonalityInfeasible(
            f"spheres at distance {d} with radii {R}, {r} do not intersect transversally")
    center = d * axis
    _placement_precheck(s, center, r)
    cos_cap = (d * d + r * r - R * R) / (2.0 * d * r)
    t_max = math.acos(np.clip(cos_cap, -1.0, 1.0))
    cap_chart = SphericalCapChart(center=center, radius=r, frame=axis_frame(-axis),
                                  t_max=t_max, outward=True)
    surface = FreeBoundarySurface(model=s.model, chart=cap_chart, support=s)

    cos_face = (d * d + R * R - r * r) / (2.0 * d * R)
    t_face = math.acos(np.clip(cos_face, -1.0, 1.0))
    face_chart = SphericalCapChart(center=np.zeros(n), radius=R,
                                   frame=axis_frame(axis), t_max=t_face, outward=True)
    face = FreeBoundarySurface(model=s.model, chart=face_chart, support=None)

    ball = s.shape
    star = 0.5 * ((d - r) + R) * axis

    def contains(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (_sphere_membership(ball, x)
                & (np.linalg.norm(x - center, axis=-1) <= r))

    def ray_exit(directions: np.ndarray) -> np.ndarray:
        to_cap = _ray_sphere_exit(star, center, r, directions)
        to_support = _ray_sphere_exit(star, np.zeros(n), R, directions)
        return np.minimum(to_cap, to_support)

    region = quad.DomainRegion(
        model=s.model, star_center=star,
        pieces=[quad.RegionPiece("cap", surface), quad.RegionPiece("support", face)],
        contains_fn=contains, ray_exit_fn=ray_exit,
    )
    return CapScenario(support=s, weight=weight_for_support(s), surface=surface,
                       face=face, region=region, spec=spec,
                       description=f"cap r={r} inside {s.kind.value}")


def _ray_sphere_exit(origin: np.ndarray, center: np.ndarray, radius: float,
                     directions: np.ndarray) -> np.ndarray:
    """Positive ray parameter where origin + s * dir leaves the sphere."""
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    oc = origin - center
    b = np.einsum("mi,i->m", d, oc)
    c = float(np.dot(oc, oc)) - radius * radius
    disc = b * b - c
    disc = np.maximum(disc, 0.0)
    return -b + np.sqrt(disc)


def make_perturbed_cap(spec: CapSpec, perturbation: PerturbationSpec) -> CapScenario:
    """Displace an umbilical cap along its unit normal by a conforming bump."""
    base = make_umbilical_cap(spec)
    cap_chart: SphericalCapChart = base.surface.chart
    profile = perturbation.profile
    if profile is None:
        if perturbation.power < 3:
            raise ValidationFailed(
                "perturbation_profile",
                "bump power below 3 would move the boundary ring data")
        profile = RadialBumpProfile(t_max=cap_chart.t_max, power=perturbation.power)
    _check_profile_conforms(profile, cap_chart)
    probe, _ = quad.tensor_grid(8, cap_chart.domain)
    Xp_probe, _, _ = cap_chart.evaluate(probe)
    p_probe, _, _ = profile.evaluate(probe)
    reach = float(np.max(np.abs(p_probe) * np.exp(-base.model.phi(Xp_probe))))
    _placement_precheck(base.support, cap_chart.center,
                        cap_chart.radius + abs(perturbation.epsilon) * reach)
    pchart = PerturbedCapChart(base=cap_chart, model=base.model,
                               epsilon=perturbation.epsilon, profile=profile)
    surface = FreeBoundarySurface(model=base.model, chart=pchart, support=base.support)

    center = cap_chart.center
    r = cap_chart.radius
    frame = cap_chart.frame
    model = base.model
    base_contains = base.region.contains_fn
    s = base.support

    def contains(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        v = x - center
        dist = np.linalg.norm(v, axis=-1)
        dist_safe = np.where(dist > 0, dist, 1.0)
        dirs = v / dist_safe[..., None]
        comps = dirs @ frame
        angles = sphere_angles(comps)
        clamped = angles.copy()
        clamped[:, 0] = np.minimum(clamped[:, 0], cap_chart.t_max)
        p, _, _ = profile.evaluate(clamped)
        p = np.where(angles[:, 0] <= cap_chart.t_max, p, 0.0)
        on_sphere = center + r * dirs
        ok_chart = model.contains(on_sphere)
        scale = np.where(ok_chart, np.exp(-model.phi(np.where(ok_chart[..., None],
                                                              on_sphere, center))), 0.0)
        r_eff = r + perturbation.epsilon * p * scale
        inside_cap = dist <= r_eff
        inside_support_side = s.signed_distance(x) <= 1e-15
        return inside_cap & inside_support_side

    region = quad.DomainRegion(
        model=base.model, star_center=base.region.star_center,
        pieces=[quad.RegionPiece("cap", surface)] + base.region.pieces[1:],
        contains_fn=contains, ray_exit_fn=None,
    )
    scenario = CapScenario(support=base.support, weight=base.weight, surface=surface,
                           face=base.face, region=region, spec=spec,
                           perturbation=perturbation,
                           description=base.description + f" perturbed eps={perturbation.epsilon}")
    _check_admissible(scenario)
    return scenario


def _check_profile_conforms(profile, cap_chart: SphericalCapChart) -> None:
    """The bump and its first derivatives must vanish on the boundary ring."""
    q = cap_chart.dim
    psis = np.linspace(0.1, 6.2, 7)
    U = np.zeros((psis.size, q))
    U[:, 0] = cap_chart.t_max
    if q >= 2:
        U[:, -1] = psis
    p, dp, _ = profile.evaluate(U)
    if np.max(np.abs(p)) > 1e-12 or np.max(np.abs(dp)) > 1e-12:
        raise ValidationFailed(
            "perturbation_profile",
            "profile or its gradient is nonzero at the boundary ring")


# -- admissibility -------------------------------------------------------------


def region_margins(scenario: CapScenario, level: int = 6) -> dict:
    """Worst-case margins of the region nodes against every constraint."""
    nodes = quad.RegionQuadrature(scenario.region, quad.QuadratureRule(level))
    pts = nodes.points
    s = scenario.support
    model = s.model
    out = {"support_interior": float(np.min(-s.signed_distance(pts)))}
    if s.requires_half_region:
        out["half_region"] = float(np.min(s.half_region_margin(pts)))
    if model.kind is ModelKind.POINCARE_BALL:
        out["chart"] = float(np.min(1.0 - np.linalg.norm(pts, axis=-1)))
    elif model.kind is ModelKind.UPPER_HALF_SPACE:
        out["chart"] = float(np.min(pts[:, -1]))
    out["weight_min"] = float(np.min(scenario.weight.value(pts)))
    return out


def _check_admissible(scenario: CapScenario) -> None:
    margins = region_margins(scenario)
    for name, value in margins.items():
        threshold = 0.0 if name == "weight_min" else ADMISSIBILITY_MARGIN
        if value <= threshold:
            raise InadmissiblePlacement(
                f"{name} margin {value:.3e} at cap r={scenario.spec.radius} "
                f"on {scenario.support.kind.value}")


@dataclass
class ValidationReport:
    """Outcome of scenario validation: named checks with values and verdicts."""

    checks: dict
    passed: bool

    def failing(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v["passed"]]


def validate_scenario(scenario: CapScenario, orthogonality_tol: float = 1e-8,
                      on_support_tol: float = 1e-8,
                      strict: bool = True) -> ValidationReport:
    """Run the geometric validity checks a scenario must pass before reports.

    Raises ValidationFailed (naming the failed check) when strict.
    """
    checks = {}
    angle_err, support_err = boundary_orthogonality(scenario.surface)
    checks["boundary_orthogonality"] = {
        "value": angle_err, "threshold": orthogonality_tol,
        "passed": angle_err <= orthogonality_tol}
    checks["boundary_on_support"] = {
        "value": support_err, "threshold": on_support_tol,
        "passed": support_err <= on_support_tol}
    margins = region_margins(scenario)
    worst = min(v for k, v in margins.items() if k != "weight_min")
    checks["admissibility_margin"] = {
        "value": worst, "threshold": ADMISSIBILITY_MARGIN,
        "passed": worst >= ADMISSIBILITY_MARGIN}
    checks["weight_positive"] = {
        "value": margins["weight_min"], "threshold": 0.0,
        "passed": margins["weight_min"] > 0.0}
    report = ValidationReport(checks=checks, passed=all(v["passed"] for v in checks.values()))
    if strict and not report.passed:
        name = report.failing()[0]
        info = checks[name]
        raise ValidationFailed(
            name, f"value {info['value']:.3e} violates threshold {info['threshold']:.3e}")
    return report


# -- canonical placements --------------------------------------------------------


def default_cap_spec(s: SupportSpec) -> CapSpec:
    """A comfortable placement for each support kind (used by CLI defaults)."""
    if isinstance(s.shape, SphereShape):
        return CapSpec(support=s, radius=0.5 * s.shape.radius)
    kind = s.kind.value
    if kind == "euclidean_plane":
        return CapSpec(support=s, radius=1.0)
    if kind == "sph_hyperplane":
        return CapSpec(support=s, radius=0.6)
    return CapSpec(support=s, radius=0.3)
