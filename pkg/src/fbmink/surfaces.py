"""Immersed hypersurface geometry in a conformal space-form chart.

The engine evaluates, on batches of parameter points: induced metric,
gbar-unit normal, second fundamental form, mean and intrinsic curvature, and
the boundary quantities of free-boundary surfaces (conormal, orthogonality
against the support, principal-direction residual).

Sign convention for the second fundamental form:

    h_ab = -gbar( d2X_ab + Gamma(d_aX, d_bX), nu )

which makes H = (n-1)/r > 0 for the Euclidean r-sphere with outward normal.
The Weingarten relation in chart components then reads

    d_a nu^k = h_a^b d_bX^k - Gamma^k_ij d_aX^i nu^j

and is used wherever exact normal derivatives are needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ambient import SpaceFormModel, christoffel_apply
from .errors import DegenerateImmersion, NoBoundary, WeightNonpositive
from .supports import SupportSpec, SphereShape
from .charts import (
    PlanarBoxChart,
    SphericalCapChart,
    axis_frame,
)

DEGENERACY_FLOOR = 1e-12   # det(g) below this aborts with DegenerateImmersion


@dataclass(frozen=True)
class FreeBoundarySurface:
    """A parametrized hypersurface immersed in a space-form chart.

    ``support`` may be None for auxiliary patches (support faces of an
    integration region, closed test surfaces); free-boundary checks then
    refuse to run.  Orientation is carried by the chart's normal hint.
    """

    model: SpaceFormModel
    chart: object
    support: Optional[SupportSpec] = None
    closed: bool = False

    @property
    def param_dim(self) -> int:
        return self.chart.dim


@dataclass
class SurfaceGeometry:
    """Batched first/second fundamental data at parameter points."""

    params: np.ndarray          # (m, k)
    x: np.ndarray               # (m, n)
    jac: np.ndarray             # (m, n, k)
    phi: np.ndarray             # (m,)
    factor: np.ndarray          # (m,)  exp(2 phi)
    g: np.ndarray               # (m, k, k)
    g_inv: np.ndarray           # (m, k, k)
    det_g: np.ndarray           # (m,)
    area_element: np.ndarray    # (m,)  sqrt(det g)
    nu_delta: np.ndarray        # (m, n) Euclidean unit normal
    nu: np.ndarray              # (m, n) gbar-unit normal, chart components
    h: np.ndarray               # (m, k, k)

    @property
    def count(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class FundamentalForms:
    """Single-point first/second fundamental forms, spec-facing view."""

    g: np.ndarray
    h: np.ndarray
    nu: np.ndarray
    area_element: float
    x: np.ndarray
    jacobian: np.ndarray
    nu_delta: np.ndarray


@dataclass(frozen=True)
class CurvatureData:
    """Pointwise curvature bundle derived from the fundamental forms."""

    H: float
    norm_h_sq: float
    sigma2: float
    ric: np.ndarray
    scal: float


def _cross_normal(jac: np.ndarray) -> np.ndarray:
    """Generalized cross product of the k = n-1 Jacobian columns.

    Component i is (-1)^i det(jac with row i removed); batched over axis 0.
    """
    m, n, k = jac.shape
    if k != n - 1:
        raise ValueError("normal requires a codimension-one immersion")
    out = np.empty((m, n))
    rows = np.arange(n)
    sign = 1.0
    for i in range(n):
        keep = rows != i
        out[:, i] = sign * np.linalg.det(jac[:, keep, :])
        sign = -sign
    return out


def surface_geometry(surf: FreeBoundarySurface, U: np.ndarray) -> SurfaceGeometry:
    """Evaluate fundamental data at parameter points U of shape (m, k)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    model = surf.model
    X, J, H2 = surf.chart.evaluate(U)
    model.require_inside(X)

    phi = model.phi(X)
    factor = np.exp(2.0 * phi)
    gram = np.einsum("mia,mib->mab", J, J)
    g = factor[:, None, None] * gram
    det_g = np.linalg.det(g)
    if np.any(det_g < DEGENERACY_FLOOR):
        raise DegenerateImmersion(
            f"induced metric degenerate: min det g = {float(np.min(det_g)):.3e}")
    g_inv = np.linalg.inv(g)

    w = _cross_normal(J)
    hint = surf.chart.normal_hint(U, X)
    sgn = np.sign(np.einsum("mi,mi->m", w, hint))
    if np.any(sgn == 0.0):
        raise DegenerateImmersion("orientation hint is tangent to the surface")
    nu_delta = w * (sgn / np.linalg.norm(w, axis=1))[:, None]
    nu = np.exp(-phi)[:, None] * nu_delta

    # h_ab = -gbar(d2X + Gamma(dX,dX), nu) = -e^{phi} <d2X + Gamma(dX,dX), nu_delta>
    dphi = model.phi_grad(X)
    k = J.shape[2]
    Jt = np.transpose(J, (0, 2, 1))            # (m, k, n)
    gam = christoffel_apply(dphi[:, None, None, :], Jt[:, :, None, :], Jt[:, None, :, :])
    accel = H2 + gam                            # (m, k, k, n)
    h = -np.exp(phi)[:, None, None] * np.einsum("mabi,mi->mab", accel, nu_delta)

    return SurfaceGeometry(
        params=U, x=X, jac=J, phi=phi, factor=factor, g=g, g_inv=g_inv,
        det_g=det_g, area_element=np.sqrt(det_g), nu_delta=nu_delta, nu=nu, h=h,
    )


def fundamental_forms(surf: FreeBoundarySurface, u: np.ndarray) -> FundamentalForms:
    geo = surface_geometry(surf, np.atleast_2d(np.asarray(u, dtype=float)))
    return FundamentalForms(
        g=geo.g[0], h=geo.h[0], nu=geo.nu[0],
        area_element=float(geo.area_element[0]),
        x=geo.x[0], jacobian=geo.jac[0], nu_delta=geo.nu_delta[0],
    )


# -- curvature ----------------------------------------------------------------


@dataclass
class CurvatureArrays:
    H: np.ndarray               # (m,)
    norm_h_sq: np.ndarray       # (m,)
    sigma2: np.ndarray          # (m,)
    ric: np.ndarray             # (m, k, k)
    scal: np.ndarray            # (m,)
    shape_operator: np.ndarray  # (m, k, k), h with one index raised


def curvature_arrays(surf: FreeBoundarySurface, geo: SurfaceGeometry) -> CurvatureArrays:
    """Mean curvature, |h|^2, sigma_2, and the Gauss-equation intrinsic Ricci.

    Ric_ab = (n-2) K g_ab + H h_ab - (h g^{-1} h)_ab and
    scal = (n-1)(n-2) K + H^2 - |h|^2 for a hypersurface of a space form.
    """
    K = surf.model.K
    n = surf.model.n
    S = np.einsum("mab,mbc->mac", geo.g_inv, geo.h)
    H = np.einsum("maa->m", S)
    norm_h_sq = np.einsum("mab,mba->m", S, S)
    sigma2 = 0.5 * (H * H - norm_h_sq)
    hgh = np.einsum("mab,mbc,mcd->mad", geo.h, geo.g_inv, geo.h)
    ric = (n - 2.0) * K * geo.g + H[:, None, None] * geo.h - hgh
    scal = (n - 1.0) * (n - 2.0) * K + H * H - norm_h_sq
    return CurvatureArrays(H=H, norm_h_sq=norm_h_sq, sigma2=sigma2,
                           ric=ric, scal=scal, shape_operator=S)


def curvature_data(surf: FreeBoundarySurface, u: np.ndarray) -> CurvatureData:
    geo = surface_geometry(surf, np.atleast_2d(np.asarray(u, dtype=float)))
    arr = curvature_arrays(surf, geo)
    return CurvatureData(H=float(arr.H[0]), norm_h_sq=float(arr.norm_h_sq[0]),
                         sigma2=float(arr.sigma2[0]), ric=arr.ric[0],
                         scal=float(arr.scal[0]))


def principal_curvatures(geo: SurfaceGeometry) -> np.ndarray:
    """Eigenvalues of the shape operator, batched: (m, k), ascending.

    Solved as the symmetric generalized problem (h, g) through a Cholesky
    congruence so that numpy's batched eigensolver applies.
    """
    L = np.linalg.cholesky(geo.g)
    tmp = np.linalg.solve(L, geo.h)
    A = np.linalg.solve(L, np.transpose(tmp, (0, 2, 1)))
    A = 0.5 * (A + np.transpose(A, (0, 2, 1)))
    return np.linalg.eigvalsh(A)


def normal_derivatives(surf: FreeBoundarySurface, geo: SurfaceGeometry) -> np.ndarray:
    """Chart partials d_a nu^k via the Weingarten relation, shape (m, k, n)."""
    S = np.einsum("mab,mbc->mac", geo.g_inv, geo.h)    # h_a^b
    tangent = np.einsum("mab,mib->mai", S, geo.jac)    # h_a^b d_bX
    dphi = surf.model.phi_grad(geo.x)
    Jt = np.transpose(geo.jac, (0, 2, 1))
    gam = christoffel_apply(dphi[:, None, :], Jt, geo.nu[:, None, :])
    return tangent - gam


# -- boundary operations --------------------------------------------------------


def _require_boundary(surf: FreeBoundarySurface):
    if surf.closed or not surf.chart.boundary_axes:
        raise NoBoundary("surface is closed; boundary operations need a flag")
    if surf.support is None:
        raise NoBoundary("surface carries no support to be orthogonal to")


def boundary_parameters(surf: FreeBoundarySurface, samples_per_axis: int = 24) -> np.ndarray:
    """Parameter grid on the boundary face (the max end of the first axis)."""
    dom = surf.chart.domain
    k = surf.chart.dim
    axes = []
    for a in range(1, k):
        lo, hi = dom[a]
        pad = 1e-3 * (hi - lo)
        axes.append(np.linspace(lo + pad, hi - pad, samples_per_axis))
    if axes:
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([mm.ravel() for mm in mesh], axis=1)
    else:
        pts = np.zeros((1, 0))
    t_face = np.full((pts.shape[0], 1), dom[0][1])
    return np.hstack([t_face, pts])


def boundary_orthogonality(surf: FreeBoundarySurface, samples_per_axis: int = 24,
                           allow_closed: bool = False) -> tuple[float, float]:
    """(max |gbar(nu, N)|, max |signed distance|) along the boundary ring.

    Conformality makes gbar angles equal Euclidean chart angles, so the
    cosine is evaluated on the Euclidean unit vectors.
    """
    if surf.closed and allow_closed:
        return 0.0, 0.0
    _require_boundary(surf)
    U = boundary_parameters(surf, samples_per_axis)
    geo = surface_geometry(surf, U)
    s = surf.support
    sd = np.abs(s.signed_distance(geo.x))
    unit_out = s.shape.euclidean_outward(geo.x)
    cosang = np.abs(np.einsum("mi,mi->m", geo.nu_delta, unit_out))
    return float(np.max(cosang)), float(np.max(sd))


def boundary_conormal(surf: FreeBoundarySurface, geo: SurfaceGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Outward unit conormal at boundary-face points of the given geometry.

    Returns (mu_param (m, k), mu_chart (m, n)); parameter components satisfy
    g(mu, d_psi) = 0 for every boundary tangent and g(mu, mu) = 1, with mu
    pointing out of the parameter domain (increasing first axis).
    """
    m, k = geo.params.shape
    grad_t = geo.g_inv[:, :, 0]
    norm = np.sqrt(geo.g_inv[:, 0, 0])
    mu_param = grad_t / norm[:, None]
    mu_chart = np.einsum("mia,ma->mi", geo.jac, mu_param)
    return mu_param, mu_chart


def boundary_principal_direction_residual(surf: FreeBoundarySurface,
                                          samples_per_axis: int = 24) -> float:
    """max |h(e, mu)| over normalized boundary tangents e and the conormal mu.

    Zero (to rounding) whenever the free-boundary surface meets an umbilical
    support orthogonally; a nonzero value flags a broken hypothesis.
    """
    _require_boundary(surf)
    U = boundary_parameters(surf, samples_per_axis)
    geo = surface_geometry(surf, U)
    mu_param, _ = boundary_conormal(surf, geo)
    k = geo.params.shape[1]
    if k < 2:
        return 0.0
    h_mu = np.einsum("mab,mb->ma", geo.h, mu_param)
    worst = 0.0
    for a in range(1, k):
        e = np.zeros(k)
        e[a] = 1.0
        gee = geo.g[:, a, a]
        vals = np.abs(h_mu[:, a]) / np.sqrt(gee)
        worst = max(worst, float(np.max(vals)))
    return worst


# -- hypothesis fields -----------------------------------------------------------


def convexity_eigenvalues(surf: FreeBoundarySurface, weight, geo: SurfaceGeometry) -> np.ndarray:
    """Eigenvalues of h - (V_nu / V) g against g, batched: (m, k).

    The minimum over nodes is the numerical margin of the weighted convexity
    hypothesis h >= (V_nu / V) g.
    """
    V = weight.value(geo.x)
    if np.any(V <= 0.0):
        raise WeightNonpositive("weight must be positive on the surface")
    Vnu = weight.directional(geo.x, geo.nu)
    kappas = principal_curvatures(geo)
    return kappas - (Vnu / V)[:, None]


def substatic_eigenvalues(surf: FreeBoundarySurface, weight, geo: SurfaceGeometry) -> np.ndarray:
    """Values (V kappa_i - V_nu)(H - kappa_i) per node and principal direction."""
    V = weight.value(geo.x)
    if np.any(V <= 0.0):
        raise WeightNonpositive("weight must be positive on the surface")
    Vnu = weight.directional(geo.x, geo.nu)
    kappas = principal_curvatures(geo)
    H = np.sum(kappas, axis=1, keepdims=True)
    return (V[:, None] * kappas - Vnu[:, None]) * (H - kappas)


def _as_geometry(surf: FreeBoundarySurface, U) -> SurfaceGeometry:
    if isinstance(U, SurfaceGeometry):
        return U
    return surface_geometry(surf, U)


def condition_convexity(surf: FreeBoundarySurface, weight, U) -> float:
    geo = _as_geometry(surf, U)
    return float(np.min(convexity_eigenvalues(surf, weight, geo)))


def condition_substatic(surf: FreeBoundarySurface, weight, U) -> float:
    geo = _as_geometry(surf, U)
    return float(np.min(substatic_eigenvalues(surf, weight, geo)))


# -- support patches ---------------------------------------------------------------


def support_patch(s: SupportSpec, extent: float = 0.6) -> FreeBoundarySurface:
    """The support's own realization as a surface, oriented out of B_int.

    Running this through the curvature pipeline certifies h = kappa g.
    """
    n = s.n
    if isinstance(s.shape, SphereShape):
        center = np.asarray(s.shape.center, dtype=float)
        axis = np.zeros(n)
        axis[-1] = 1.0
        chart = SphericalCapChart(center=center, radius=s.shape.radius,
                                  frame=axis_frame(axis), t_min=0.15,
                                  t_max=0.15 + extent, outward=True)
        return FreeBoundarySurface(model=s.model, chart=chart, support=s)
    a = np.asarray(s.shape.normal_in, dtype=float)
    anchor = s.shape.offset * a
    if s.model.kind.value == "upper_half_space":
        # keep the patch clear of the chart boundary x_n = 0
        if abs(a[-1]) < 1e-12:
            lift = np.zeros(n)
            lift[-1] = 1.0
            anchor = anchor + lift
        extent = min(extent, 0.4)
    basis = _plane_basis(a)
    chart = PlanarBoxChart(origin=anchor, plane_frame=basis, extent=extent, hint=-a)
    return FreeBoundarySurface(model=s.model, chart=chart, support=s)


def _plane_basis(a: np.ndarray) -> np.ndarray:
    frame = axis_frame(a)
    return frame[:, 1:]


def support_umbilicity_residual(s: SupportSpec, samples: int = 50,
                                seed: int = 0) -> float:
    """max over sampled patch points of ||h - kappa g|| (max-abs entries)."""
    surf = support_patch(s)
    rng = np.random.default_rng(seed)
    dom = surf.chart.domain
    U = np.column_stack([rng.uniform(lo, hi, samples) for lo, hi in dom])
    geo = surface_geometry(surf, U)
    res = geo.h - s.kappa * geo.g
    return float(np.max(np.abs(res)))
