"""Fluid variables from the geometric scalars and the equations of motion.

Geometric units, c = 1. The coupling kappa only rescales pressure and
energy density; it defaults to 1 and is configurable everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import MetricChart, VectorField
from .classify import VelocityAnalysis
from .curvature import scale_free
from .expr import Expr


@dataclass
class FluidState:
    p: float
    mu: float
    kappa: float = 1.0
    w: float | None = None


def fluid_from_AB(a: float, b: float, kappa: float = 1.0,
                  n: int = 4) -> FluidState:
    """Invert A = kappa (p - mu)/(2 - n), B = kappa (p + mu)."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if n < 4:
        raise ValueError("dimension must be >= 4")
    mu = ((n - 2) * a + b) / (2.0 * kappa)
    p = b / kappa - mu
    return FluidState(p=p, mu=mu, kappa=kappa)


def AB_from_fluid(p: float, mu: float, kappa: float = 1.0,
                  n: int = 4) -> tuple[float, float]:
    a = kappa * (p - mu) / (2.0 - n)
    b = kappa * (p + mu)
    return a, b


def motion_residuals(chart: MetricChart, field: VectorField, points, *,
                     kappa: float = 1.0,
                     perturb_p: Expr | None = None) -> tuple[float, float]:
    """Residuals of the two projected conservation equations:

    r1:  u^k d_k mu + (p + mu) nabla_k u^k
    r2:  (d_j + u_j u^k d_k) p + (p + mu) u^k nabla_k u_j
    """
    analysis = VelocityAnalysis(chart, field, kappa=kappa, perturb_p=perturb_p)
    r1 = r2 = 0.0
    for point in points:
        fp = analysis.at(point)
        n = fp.n
        dmu = np.array(fp.mu_jet.grad)
        dp = np.array(fp.p_jet.grad)
        p_plus_mu = fp.p_jet.value + fp.mu_jet.value
        divu = fp.f_jet.value * (n - 1)
        accel = fp.uupv @ fp.nabla_u
        lhs1 = float(fp.uupv @ dmu) + p_plus_mu * divu
        r1 = max(r1, abs(lhs1) / (1.0 + abs(p_plus_mu * divu)
                                  + abs(float(fp.uupv @ dmu))))
        lhs2 = dp + fp.uv * float(fp.uupv @ dp) + p_plus_mu * accel
        r2 = max(r2, scale_free(lhs2, dp, p_plus_mu * accel))
    return r1, r2


@dataclass
class EosReport:
    parallel_residual: float   # size of grad p wedge grad mu
    w: float | None            # least-squares slope of p against mu
    degenerate_fit: bool       # both gradients vanish: slope undefined
    min_p_plus_mu: float
    p_plus_mu_positive: bool


def eos_check(grad_p, grad_mu, p_values, mu_values,
              *, degenerate_tol: float = 1e-10) -> EosReport:
    """Equation-of-state behaviour over the sampled points.

    ``grad_p``/``grad_mu`` are per-point gradient vectors; the parallelism
    residual is max |dp ^ dmu| / (1 + |dp||dmu|).
    """
    worst = 0.0
    moving = False
    for dp, dmu in zip(grad_p, grad_mu):
        dp = np.asarray(dp)
        dmu = np.asarray(dmu)
        wedge = np.outer(dp, dmu) - np.outer(dmu, dp)
        np_, nm = float(np.max(np.abs(dp))), float(np.max(np.abs(dmu)))
        worst = max(worst, float(np.max(np.abs(wedge))) / (1.0 + np_ * nm))
        if max(np_, nm) > degenerate_tol:
            moving = True
    p_arr = np.asarray(list(p_values), dtype=float)
    mu_arr = np.asarray(list(mu_values), dtype=float)
    denom = float(mu_arr @ mu_arr)
    if moving and denom > degenerate_tol:
        w = float(p_arr @ mu_arr) / denom
    else:
        w = None
    p_plus_mu = p_arr + mu_arr
    return EosReport(
        parallel_residual=worst,
        w=w,
        degenerate_fit=not moving,
        min_p_plus_mu=float(np.min(np.abs(p_plus_mu))),
        p_plus_mu_positive=bool(np.all(p_plus_mu > 0)))


@dataclass
class HomotheticReport:
    consistent: bool           # the three conditions agree at every point
    homothetic_points: int
    proper_points: int
    conditions: list           # per point: (|A-B| small, |grad rho| small, EoS match)


def homothetic_check(a_values, b_values, grad_rho_norms, p_values, mu_values,
                     n: int, *, tol: float = 1e-7) -> HomotheticReport:
    """Same verdict from |A-B|, |grad rho| and p = (3-n)/(n-1) mu pointwise."""
    ratio = (3.0 - n) / (n - 1.0)
    conditions = []
    homothetic = proper = 0
    consistent = True
    for a, b, gr, p, mu in zip(a_values, b_values, grad_rho_norms,
                               p_values, mu_values):
        c1 = abs(a - b) <= tol * (1.0 + abs(a) + abs(b))
        c2 = gr <= tol * (1.0 + abs(a) + abs(b))
        c3 = abs(p - ratio * mu) <= tol * (1.0 + abs(p) + abs(mu))
        conditions.append((c1, c2, c3))
        if c1 != c2 or c2 != c3:
            consistent = False
        if c1:
            homothetic += 1
        else:
            proper += 1
    return HomotheticReport(consistent=consistent,
                            homothetic_points=homothetic,
                            proper_points=proper, conditions=conditions)
