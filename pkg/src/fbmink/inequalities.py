"""Weighted integral inequalities and the Reilly-type identity checker.

Every report evaluates both sides of one inequality with tensor-product
Gauss-Legendre quadrature on a cap scenario, audits the pointwise curvature
hypothesis the theorem assumes, and returns the signed deficit.  Deficits are
oriented so that a nonnegative value means the inequality holds:

* Minkowski:     deficit = (int_S V)^2 - n/(n-1) int_O V * int_S H V
* second order:  deficit = (int_S H V)^2 - 2(n-1)/(n-2) int_S V * int_S s2 V
* almost Schur:  deficit = C_n int_S |Ric0|^2 V - int_S (R - R^V)^2 V

The identity checker integrates every term of the weighted Reilly formula
for a supplied smooth test function; for static weights the interior
curvature term vanishes identically, so the residual isolates quadrature
and geometry errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ambient import (
    ambient_laplacian,
    covariant_hessian,
    metric_at,
)
from .errors import DimensionTooLow, NonSmoothTestFunction, WeightNonpositive
from .families import CapScenario
from .quadrature import (
    QuadratureRule,
    RegionQuadrature,
    SurfaceQuadrature,
    default_level,
    pairwise_sum,
)
from .surfaces import (
    FreeBoundarySurface,
    boundary_orthogonality,
    boundary_principal_direction_residual,
    condition_convexity,
    condition_substatic,
    normal_derivatives,
)
from .weights import WeightField


# -- hypothesis audit -----------------------------------------------------------


@dataclass
class HypothesisAudit:
    """Pointwise margins of the curvature hypotheses over the cap nodes.

    ``convexity_min`` is the least eigenvalue of h - (V_nu / V) g and
    ``substatic_min`` the least eigenvalue of the boundary static tensor
    (V h - V_nu g)(H g - h); a theorem's hypothesis holds when the matching
    margin is nonnegative (up to quadrature-level noise).
    """

    convexity_min: float
    substatic_min: float
    weight_min: float
    orthogonality: float
    on_support: float
    principal_direction_residual: float

    def to_dict(self) -> dict:
        return {
            "convexity_min": self.convexity_min,
            "substatic_min": self.substatic_min,
            "weight_min": self.weight_min,
            "orthogonality": self.orthogonality,
            "on_support": self.on_support,
            "principal_direction_residual": self.principal_direction_residual,
        }


def hypothesis_audit(scenario: CapScenario, rule: Optional[QuadratureRule] = None) -> HypothesisAudit:
    rule = rule or QuadratureRule(default_level(scenario.n))
    sq = SurfaceQuadrature(scenario.surface, rule)
    geo = sq.geo
    V = scenario.weight
    angle_err, support_err = boundary_orthogonality(scenario.surface)
    return HypothesisAudit(
        convexity_min=condition_convexity(scenario.surface, V, geo),
        substatic_min=condition_substatic(scenario.surface, V, geo),
        weight_min=float(np.min(V.value(geo.x))),
        orthogonality=angle_err,
        on_support=support_err,
        principal_direction_residual=boundary_principal_direction_residual(scenario.surface),
    )


# -- inequality reports ----------------------------------------------------------


THEOREM_IDS = {
    "minkowski": "Minkowski",
    "alexandrov_fenchel": "AF",
    "almost_schur": "AlmostSchur",
}

DEFAULT_EQUALITY_TOL = 1e-6


@dataclass
class InequalityReport:
    theorem: str
    n: int
    level: int
    lhs: float
    rhs: float
    deficit: float
    relative_deficit: float
    hypothesis: str
    hypothesis_margin: float
    hypothesis_ok: bool
    equality_tolerance: float = DEFAULT_EQUALITY_TOL
    integrals: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def equality_flag(self) -> bool:
        return abs(self.relative_deficit) <= self.equality_tolerance

    def holds(self, tolerance: float = 1e-9) -> bool:
        return self.deficit >= -tolerance * max(abs(self.lhs), abs(self.rhs), 1.0)

    def to_dict(self) -> dict:
        return {
            "theorem_id": THEOREM_IDS.get(self.theorem, self.theorem),
            "n": self.n,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "relative_deficit": self.relative_deficit,
            "equality_flag": self.equality_flag,
            "hypothesis": {"name": self.hypothesis,
                           "margin": self.hypothesis_margin,
                           "ok": self.hypothesis_ok},
            "integrals": dict(self.integrals),
            "extras": dict(self.extras),
            "quadrature_meta": {"level": self.level},
        }


def _surface_weight_data(scenario: CapScenario, rule: QuadratureRule):
    sq = SurfaceQuadrature(scenario.surface, rule)
    Vs = scenario.weight.value(sq.geo.x)
    if np.min(Vs) <= 0.0:
        raise WeightNonpositive(
            f"weight reaches {np.min(Vs):.3e} on the cap; placement must keep it positive")
    return sq, Vs


def minkowski_report(scenario: CapScenario, rule: Optional[QuadratureRule] = None,
                     hypothesis_tol: float = 1e-9,
                     equality_tolerance: float = DEFAULT_EQUALITY_TOL) -> InequalityReport:
    """Weighted volumetric lower bound for (int_S V)^2 on free-boundary caps."""
    n = scenario.n
    rule = rule or QuadratureRule(default_level(scenario.n))
    sq, Vs = _surface_weight_data(scenario, rule)
    rq = RegionQuadrature(scenario.region, rule)
    H = sq.curvature().H
    area_v = sq.integral(Vs)
    mean_v = sq.integral(H * Vs)
    vol_v = rq.integral(scenario.weight.value(rq.points))
    lhs = area_v ** 2
    rhs = n / (n - 1.0) * vol_v * mean_v
    deficit = lhs - rhs
    margin = condition_convexity(scenario.surface, scenario.weight, sq.geo)
    return InequalityReport(
        theorem="minkowski", n=n, level=rule.level,
        lhs=lhs, rhs=rhs, deficit=deficit,
        relative_deficit=deficit / max(abs(lhs), abs(rhs), 1e-300),
        hypothesis="convexity", hypothesis_margin=margin,
        hypothesis_ok=margin >= -hypothesis_tol,
        equality_tolerance=equality_tolerance,
        integrals={"weighted_area": area_v, "weighted_mean_curvature": mean_v,
                   "weighted_volume": vol_v},
    )


def af_report(scenario: CapScenario, rule: Optional[QuadratureRule] = None,
              hypothesis_tol: float = 1e-9,
              equality_tolerance: float = DEFAULT_EQUALITY_TOL) -> InequalityReport:
    """Second-order curvature-integral bound (quadratic in int H V)."""
    n = scenario.n
    if n < 3:
        raise DimensionTooLow("the second-order inequality needs ambient dimension >= 3")
    rule = rule or QuadratureRule(default_level(scenario.n))
    sq, Vs = _surface_weight_data(scenario, rule)
    curv = sq.curvature()
    area_v = sq.integral(Vs)
    mean_v = sq.integral(curv.H * Vs)
    sigma2_v = sq.integral(curv.sigma2 * Vs)
    lhs = mean_v ** 2
    rhs = 2.0 * (n - 1.0) / (n - 2.0) * area_v * sigma2_v
    deficit = lhs - rhs

    # normalized restatement: int (H - Hbar_V)^2 V <= (n-1)/(n-2) int |h0|^2 V
    h_mean = mean_v / area_v
    spread = sq.integral((curv.H - h_mean) ** 2 * Vs)
    traceless = sq.integral((curv.norm_h_sq - curv.H ** 2 / (n - 1.0)) * Vs)
    normalized_deficit = (n - 1.0) / (n - 2.0) * traceless - spread

    margin = condition_substatic(scenario.surface, scenario.weight, sq.geo)
    return InequalityReport(
        theorem="alexandrov_fenchel", n=n, level=rule.level,
        lhs=lhs, rhs=rhs, deficit=deficit,
        relative_deficit=deficit / max(abs(lhs), abs(rhs), 1e-300),
        hypothesis="substatic", hypothesis_margin=margin,
        hypothesis_ok=margin >= -hypothesis_tol,
        equality_tolerance=equality_tolerance,
        integrals={"weighted_area": area_v, "weighted_mean_curvature": mean_v,
                   "weighted_sigma2": sigma2_v},
        extras={"normalized_lhs": spread,
                "normalized_rhs": (n - 1.0) / (n - 2.0) * traceless,
                "normalized_deficit": normalized_deficit},
    )


def schur_report(scenario: CapScenario, rule: Optional[QuadratureRule] = None,
                 hypothesis_tol: float = 1e-9,
                 equality_tolerance: float = DEFAULT_EQUALITY_TOL) -> InequalityReport:
    """Almost-constancy of the scalar curvature against the traceless Ricci."""
    n = scenario.n
    if n < 4:
        raise DimensionTooLow(
            f"the scalar-curvature bound needs ambient dimension >= 4, got {n}")
    rule = rule or QuadratureRule(default_level(scenario.n))
    sq, Vs = _surface_weight_data(scenario, rule)
    curv = sq.curvature()
    geo = sq.geo
    area_v = sq.integral(Vs)
    scal_mean = sq.integral(curv.scal * Vs) / area_v
    lhs = sq.integral((curv.scal - scal_mean) ** 2 * Vs)

    traceless = curv.ric - curv.scal[:, None, None] / (n - 1.0) * geo.g
    mixed = np.einsum("mab,mbc->mac", geo.g_inv, traceless)
    norm_sq = np.einsum("mab,mba->m", mixed, mixed)
    coeff = 4.0 * (n - 1.0) * (n - 2.0) / (n - 3.0) ** 2
    rhs = coeff * sq.integral(norm_sq * Vs)
    deficit = rhs - lhs

    margin = condition_substatic(scenario.surface, scenario.weight, geo)
    return InequalityReport(
        theorem="almost_schur", n=n, level=rule.level,
        lhs=lhs, rhs=rhs, deficit=deficit,
        relative_deficit=deficit / max(abs(lhs), abs(rhs), 1e-300),
        hypothesis="substatic", hypothesis_margin=margin,
        hypothesis_ok=margin >= -hypothesis_tol,
        equality_tolerance=equality_tolerance,
        integrals={"weighted_area": area_v, "scal_mean": scal_mean},
        extras={"lhs_label": "weighted variance of scalar curvature",
                "rhs_label": "traceless Ricci bound"},
    )


REPORT_BUILDERS: dict[str, Callable[..., InequalityReport]] = {
    "minkowski": minkowski_report,
    "af": af_report,
    "schur": schur_report,
}


# -- smooth test functions for the identity checker -------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A C^2 function on the chart with exact flat derivatives."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]


def coordinate_function(i: int, n: int) -> TestFunction:
    def val(x):
        return np.asarray(x, dtype=float)[..., i]

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[..., i] = 1.0
        return g

    def hess(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape + (n,))

    return TestFunction(name=f"x{i + 1}", value=val, gradient=grad, hessian=hess)


def coordinate_square_function(i: int, n: int) -> TestFunction:
    def val(x):
        return np.asarray(x, dtype=float)[..., i] ** 2

    def grad(x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[..., i] = 2.0 * x[..., i]
        return g

    def hess(x):
        x = np.asarray(x, dtype=float)
        h = np.zeros(x.shape + (n,))
        h[..., i, i] = 2.0
        return h

    return TestFunction(name=f"x{i + 1}^2", value=val, gradient=grad, hessian=hess)


def weight_test_function(V: WeightField) -> TestFunction:
    return TestFunction(name="V", value=V.value,
                        gradient=V.euclidean_gradient, hessian=V.euclidean_hessian)


def resolve_test_function(name: str, scenario: CapScenario) -> TestFunction:
    n = scenario.n
    key = name.strip().lower().replace(" ", "")
    if key == "v":
        return weight_test_function(scenario.weight)
    if key.startswith("x") and key.endswith("^2"):
        idx = int(key[1:-2]) - 1
        if not 0 <= idx < n:
            raise NonSmoothTestFunction(f"coordinate index out of range in {name!r}")
        return coordinate_square_function(idx, n)
    if key.startswith("x"):
        idx = int(key[1:]) - 1
        if not 0 <= idx < n:
            raise NonSmoothTestFunction(f"coordinate index out of range in {name!r}")
        return coordinate_function(idx, n)
    raise NonSmoothTestFunction(
        f"unknown test function {name!r}; choose V, x<i> or x<i>^2")


# -- the weighted Reilly-type identity --------------------------------------------


@dataclass
class ReillyReport:
    function: str
    level: int
    residual: float
    relative_residual: float
    lhs_volume: float
    rhs_volume_static: float
    boundary: dict

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "level": self.level,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
            "lhs_volume": self.lhs_volume,
            "rhs_volume_static": self.rhs_volume_static,
            "boundary": {k: dict(v) for k, v in self.boundary.items()},
        }


def _boundary_piece_terms(piece: FreeBoundarySurface, V: WeightField,
                          f: TestFunction, rule: QuadratureRule) -> dict:
    """The three boundary integrals of the identity over one smooth piece."""
    model = piece.model
    sq = SurfaceQuadrature(piece, rule)
    geo = sq.geo
    x, nu, jac = geo.x, geo.nu, geo.jac
    curv = sq.curvature()

    Vv = V.value(x)
    dV = V.euclidean_gradient(x)
    d2V = V.euclidean_hessian(x)
    fv = f.value(x)
    df = f.gradient(x)
    d2f = f.hessian(x)

    f_nu = np.einsum("mi,mi->m", df, nu)
    V_nu = np.einsum("mi,mi->m", dV, nu)
    u = f_nu - V_nu / Vv * fv

    # covariant tangential gradients (parameter components, lower index)
    f_a = np.einsum("mi,mia->ma", df, jac)
    V_a = np.einsum("mi,mia->ma", dV, jac)
    w_a = f_a - (V_a * fv[:, None]) / Vv[:, None]
    w_up = np.einsum("mab,mb->ma", geo.g_inv, w_a)

    # intrinsic Laplacians through the ambient ones
    hess_f = covariant_hessian(model, x, df, d2f)
    hess_V = covariant_hessian(model, x, dV, d2V)
    lap_f = ambient_laplacian(model, x, df, d2f)
    lap_V = ambient_laplacian(model, x, dV, d2V)
    hess_f_nn = np.einsum("mij,mi,mj->m", hess_f, nu, nu)
    hess_V_nn = np.einsum("mij,mi,mj->m", hess_V, nu, nu)
    lap_p_f = lap_f - hess_f_nn - curv.H * f_nu
    lap_p_V = lap_V - hess_V_nn - curv.H * V_nu

    # tangential derivative of u along the parameter directions
    dnu = normal_derivatives(piece, geo)
    dfnu_a = (np.einsum("mij,mia,mj->ma", d2f, jac, nu)
              + np.einsum("mi,mai->ma", df, dnu))
    dVnu_a = (np.einsum("mij,mia,mj->ma", d2V, jac, nu)
              + np.einsum("mi,mai->ma", dV, dnu))
    ratio_a = (dVnu_a * Vv[:, None] - V_nu[:, None] * V_a) / Vv[:, None] ** 2
    u_a = dfnu_a - ratio_a * fv[:, None] - (V_nu / Vv)[:, None] * f_a

    term_mixed = Vv * u * (lap_p_f - lap_p_V / Vv * fv)
    term_grad = -Vv * np.einsum("ma,ma->m", u_a, w_up)
    quad_form = geo.h - (V_nu / Vv)[:, None, None] * geo.g
    term_h = Vv * curv.H * u ** 2 + np.einsum("mab,ma,mb->m",
                                              quad_form, w_up, w_up) * Vv

    return {
        "mixed": float(pairwise_sum(term_mixed * sq.weights)),
        "gradient": float(pairwise_sum(term_grad * sq.weights)),
        "curvature": float(pairwise_sum(term_h * sq.weights)),
    }


def reilly_residual(scenario: CapScenario, function: str | TestFunction = "V",
                    rule: Optional[QuadratureRule] = None) -> ReillyReport:
    """Integrate every term of the weighted Reilly identity and report the gap.

    The checker takes a supplied smooth function; it does not solve boundary
    value problems.  For static weights the interior curvature term is zero
    in exact arithmetic and is still integrated as a cross-check.
    """
    rule = rule or QuadratureRule(default_level(scenario.n))
    f = function if isinstance(function, TestFunction) else resolve_test_function(function, scenario)
    V = scenario.weight
    model = scenario.model
    n = scenario.n
    K = model.K

    rq = RegionQuadrature(scenario.region, rule)
    x = rq.points
    Vv = V.value(x)
    dV = V.euclidean_gradient(x)
    d2V = V.euclidean_hessian(x)
    fv = f.value(x)
    df = f.gradient(x)
    d2f = f.hessian(x)

    hess_f = covariant_hessian(model, x, df, d2f)
    hess_V = covariant_hessian(model, x, dV, d2V)
    lap_f = ambient_laplacian(model, x, df, d2f)
    lap_V = ambient_laplacian(model, x, dV, d2V)

    gbar = metric_at(model, x)
    gbar_inv_diag = np.exp(-2.0 * model.phi(x))   # conformal metrics invert by scaling

    amb_term = lap_f - lap_V / Vv * fv
    tensor = hess_f - hess_V / Vv[:, None, None] * fv[:, None, None]
    tensor_norm_sq = gbar_inv_diag ** 2 * np.einsum("mij,mij->m", tensor, tensor)
    lhs_volume = rq.integral(Vv * (amb_term ** 2 - tensor_norm_sq))

    # static tensor lapbar(V) gbar - hessbar(V) + V Ricbar, Ricbar = (n-1) K gbar
    static = (lap_V[:, None, None] * gbar - hess_V
              + (n - 1.0) * K * Vv[:, None, None] * gbar)
    w_chart = gbar_inv_diag[:, None] * (df - dV * (fv / Vv)[:, None])
    rhs_volume = rq.integral(np.einsum("mij,mi,mj->m", static, w_chart, w_chart))

    boundary = {}
    for label, piece in (("cap", scenario.surface), ("support", scenario.face)):
        boundary[label] = _boundary_piece_terms(piece, V, f, rule)
    boundary_total = sum(sum(d.values()) for d in boundary.values())

    residual = lhs_volume - rhs_volume - boundary_total
    scale = max(abs(lhs_volume), abs(rhs_volume),
                max((abs(v) for d in boundary.values() for v in d.values()), default=0.0))
    relative = residual / scale if scale > 1e-20 else 0.0
    return ReillyReport(
        function=f.name, level=rule.level,
        residual=float(residual), relative_residual=float(relative),
        lhs_volume=float(lhs_volume), rhs_volume_static=float(rhs_volume),
        boundary=boundary,
    )
