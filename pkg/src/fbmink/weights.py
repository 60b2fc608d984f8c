"""Closed-form weight functions paired with each support case.

Each weight V satisfies ``Hess V = -K V gbar`` in its model (so also
``lap V + n K V = 0``) and ``dV(N) = kappa V`` along its support, N the
gbar-unit normal of B_int.  Values and both flat derivatives are exact;
covariant quantities are assembled through the ambient module.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import ambient
from .ambient import SpaceFormModel
from .errors import WeightNonpositive
from .supports import SupportKind, SupportSpec


class WeightFormula(enum.Enum):
    EUCLID_XN = "euclid_xn"                  # V = x_n
    EUCLID_ONE = "euclid_one"                # V = 1
    HYP_BALL = "hyp_ball"                    # V = 2 x_n / (1 - |x|^2)
    HYP_HALFSPACE = "hyp_halfspace"          # V = 1 / x_n
    SPH_GEODESIC_BALL = "sph_geodesic_ball"  # V = 2 x_n / (1 + |x|^2)
    SPH_HYPERPLANE = "sph_hyperplane"        # V = (1 - |x|^2) / (1 + |x|^2)


_BINDING = {
    SupportKind.EUCLIDEAN_SPHERE: WeightFormula.EUCLID_XN,
    SupportKind.EUCLIDEAN_PLANE: WeightFormula.EUCLID_ONE,
    SupportKind.HYP_GEODESIC_SPHERE: WeightFormula.HYP_BALL,
    SupportKind.HOROSPHERE: WeightFormula.HYP_HALFSPACE,
    SupportKind.EQUIDISTANT: WeightFormula.HYP_HALFSPACE,
    SupportKind.HYP_GEODESIC_PLANE: WeightFormula.HYP_HALFSPACE,
    SupportKind.SPH_GEODESIC_SPHERE: WeightFormula.SPH_GEODESIC_BALL,
    SupportKind.SPH_HYPERPLANE: WeightFormula.SPH_HYPERPLANE,
}


@dataclass(frozen=True)
class WeightField:
    """A static weight V on a space-form model, with exact flat derivatives."""

    model: SpaceFormModel
    formula: WeightFormula

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        f = self.formula
        if f is WeightFormula.EUCLID_XN:
            return x[..., -1].copy()
        if f is WeightFormula.EUCLID_ONE:
            return np.ones(x.shape[:-1])
        if f is WeightFormula.HYP_BALL:
            return 2.0 * x[..., -1] / (1.0 - np.sum(x * x, axis=-1))
        if f is WeightFormula.HYP_HALFSPACE:
            return 1.0 / x[..., -1]
        if f is WeightFormula.SPH_GEODESIC_BALL:
            return 2.0 * x[..., -1] / (1.0 + np.sum(x * x, axis=-1))
        r2 = np.sum(x * x, axis=-1)
        return (1.0 - r2) / (1.0 + r2)

    def euclidean_gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        f = self.formula
        if f is WeightFormula.EUCLID_XN:
            g = np.zeros_like(x)
            g[..., -1] = 1.0
            return g
        if f is WeightFormula.EUCLID_ONE:
            return np.zeros_like(x)
        if f is WeightFormula.HYP_BALL:
            w = 1.0 / (1.0 - np.sum(x * x, axis=-1))
            g = 4.0 * x[..., -1][..., None] * x * (w * w)[..., None]
            g[..., -1] += 2.0 * w
            return g
        if f is WeightFormula.HYP_HALFSPACE:
            g = np.zeros_like(x)
            g[..., -1] = -1.0 / x[..., -1] ** 2
            return g
        if f is WeightFormula.SPH_GEODESIC_BALL:
            u = 1.0 / (1.0 + np.sum(x * x, axis=-1))
            g = -4.0 * x[..., -1][..., None] * x * (u * u)[..., None]
            g[..., -1] += 2.0 * u
            return g
        u = 1.0 / (1.0 + np.sum(x * x, axis=-1))
        return -4.0 * x * (u * u)[..., None]

    def euclidean_hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        eye = np.eye(n)
        en = np.zeros(n)
        en[-1] = 1.0
        f = self.formula
        if f in (WeightFormula.EUCLID_XN, WeightFormula.EUCLID_ONE):
            return np.zeros(x.shape[:-1] + (n, n))
        if f is WeightFormula.HYP_HALFSPACE:
            h = np.zeros(x.shape[:-1] + (n, n))
            h[..., -1, -1] = 2.0 / x[..., -1] ** 3
            return h
        outer = x[..., :, None] * x[..., None, :]
        sym_en = en[:, None] * x[..., None, :] + x[..., :, None] * en[None, :]
        xn = x[..., -1][..., None, None]
        if f is WeightFormula.HYP_BALL:
            w = 1.0 / (1.0 - np.sum(x * x, axis=-1))
            w = w[..., None, None]
            return 4.0 * w * w * (sym_en + xn * eye) + 16.0 * xn * outer * w ** 3
        if f is WeightFormula.SPH_GEODESIC_BALL:
            u = 1.0 / (1.0 + np.sum(x * x, axis=-1))
            u = u[..., None, None]
            return -4.0 * u * u * (sym_en + xn * eye) + 16.0 * xn * outer * u ** 3
        u = 1.0 / (1.0 + np.sum(x * x, axis=-1))
        u = u[..., None, None]
        return -4.0 * u * u * eye + 16.0 * outer * u ** 3

    # -- covariant quantities -------------------------------------------------

    def ambient_gradient(self, x: np.ndarray) -> np.ndarray:
        """Chart components of the gbar-gradient, exp(-2 phi) * flat gradient."""
        return np.exp(-2.0 * self.model.phi(x))[..., None] * self.euclidean_gradient(x)

    def covariant_hessian(self, x: np.ndarray) -> np.ndarray:
        """Chart components of Hess_gbar V (a covariant 2-tensor)."""
        return ambient.covariant_hessian(
            self.model, x, self.euclidean_gradient(x), self.euclidean_hessian(x))

    def laplacian(self, x: np.ndarray) -> np.ndarray:
        return ambient.ambient_laplacian(
            self.model, x, self.euclidean_gradient(x), self.euclidean_hessian(x))

    def directional(self, x: np.ndarray, direction: np.ndarray) -> np.ndarray:
        """dV applied to a chart-component vector (metric-free pairing)."""
        return np.sum(self.euclidean_gradient(x) * direction, axis=-1)


@dataclass(frozen=True)
class WeightEval:
    """Pointwise evaluation record: value plus covariant derivatives."""

    value: np.ndarray
    ambient_gradient: np.ndarray
    ambient_hessian: np.ndarray


def weight_for_support(s: SupportSpec) -> WeightField:
    """The statically paired weight for a support case (no overrides exist)."""
    return WeightField(model=s.model, formula=_BINDING[s.kind])


def weight_eval(w: WeightField, x: np.ndarray) -> WeightEval:
    w.model.require_inside(x)
    return WeightEval(
        value=w.value(x),
        ambient_gradient=w.ambient_gradient(x),
        ambient_hessian=w.covariant_hessian(x),
    )


def require_positive(w: WeightField, x: np.ndarray) -> np.ndarray:
    v = w.value(x)
    if np.any(v <= 0.0):
        raise WeightNonpositive(
            f"weight {w.formula.value} is nonpositive at a sampled point "
            f"(min value {float(np.min(v)):.3e})")
    return v


# -- identity residuals --------------------------------------------------------


def hessian_identity_residual(w: WeightField, points: np.ndarray) -> float:
    """max-abs chart components of Hess V + K V gbar over the given points."""
    x = np.asarray(points, dtype=float)
    w.model.require_inside(x)
    hess = w.covariant_hessian(x)
    gbar = w.model.conformal_factor(x)[..., None, None] * np.eye(w.model.n)
    res = hess + w.model.K * w.value(x)[..., None, None] * gbar
    return float(np.max(np.abs(res)))


def neumann_identity_residual(w: WeightField, s: SupportSpec,
                              points: np.ndarray) -> float:
    """max |dV(N) - kappa V| over points on S, N the outward gbar-unit normal."""
    x = np.asarray(points, dtype=float)
    nbar = s.outward_normal(x)
    res = w.directional(x, nbar) - s.kappa * w.value(x)
    return float(np.max(np.abs(res)))
