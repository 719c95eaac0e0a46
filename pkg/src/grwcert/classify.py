"""Perfect-fluid classification and the full chain of theorem-level checks:
fluid decomposition, closedness, torse-forming structure, potential
reconstruction, gradient-rescaled (Chen) vector, conformal-Killing gradient
law, purely electric Weyl, the identity ladder, and the soliton form.

Scalar fields and their gradients are computed end to end in jet
arithmetic from a closed-form velocity field; the only quadrature in the
module is the line integral reconstructing a potential from an already
closed 1-form (whose derivative structure is then taken from the form
itself, not from differencing).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chart import ChartPoint, MetricChart, VectorField
from .curvature import JetStack, PointwiseFieldError, scale_free
from .expr import Expr, eval_jet3
from .jets import Jet3, jet_tables

LADDER_NAMES = (
    "bianchi-contract",
    "ricci-curl",
    "b-transport",
    "b-transport-half",
    "gamma-comoving",
    "b-comoving",
    "torse-source",
    "bu-closed",
    "gamma-aligned",
)


class FluidDecompositionError(ValueError):
    pass


class SpacelikeAnomalyError(FluidDecompositionError):
    """The distinguished eigendirection of R^i_j is not timelike."""


class UnclusteredError(FluidDecompositionError):
    """Eigenvalues split neither as (n-1)+1 nor as a single cluster."""


class OrientationTieError(FluidDecompositionError):
    """u^1 = 0: the chart cannot orient the velocity deterministically."""


class NotClosedError(ValueError):
    """Potential reconstruction refused: the 1-form is not closed."""


class QuadratureError(RuntimeError):
    """Composite Gauss-Legendre refinement failed to converge."""


@dataclass
class FluidDecomposition:
    """A, B and the unit timelike velocity extracted from the Ricci tensor.

    ``degenerate`` marks the Einstein case (all eigenvalues coincide):
    B is set to 0 and no velocity is defined.
    """

    a: float
    b: float
    u: np.ndarray | None          # covariant components, unit, u^1 > 0
    u_up: np.ndarray | None
    residual: float
    degenerate: bool


def fluid_decompose(cp, cluster_tol: float = 1e-6) -> FluidDecomposition:
    """Eigen-split the mixed Ricci tensor R^i_j into (n-1)-fold A and A-B.

    Works on anything exposing ``g``, ``g_inv``, ``ricci`` and ``n``.
    """
    n = cp.n
    mixed = cp.g_inv @ cp.ricci
    eigvals, eigvecs = np.linalg.eig(mixed)
    scale = max(1.0, float(np.max(np.abs(eigvals.real))))
    if np.max(np.abs(eigvals.imag)) > 1e-9 * scale:
        raise UnclusteredError(
            f"complex eigenvalues of R^i_j (max imag {np.max(np.abs(eigvals.imag)):.3e})")
    vals = eigvals.real
    order = np.argsort(vals)
    svals = vals[order]

    if svals[-1] - svals[0] < cluster_tol * scale:
        a = float(np.mean(svals))
        residual = scale_free(cp.ricci - a * cp.g, cp.ricci, a * cp.g)
        return FluidDecomposition(a=a, b=0.0, u=None, u_up=None,
                                  residual=residual, degenerate=True)

    def split_ok(idx_distinct, idx_cluster):
        cluster = svals[idx_cluster]
        spread = float(cluster.max() - cluster.min())
        gap = abs(float(svals[idx_distinct] - np.mean(cluster)))
        return spread < cluster_tol * scale and gap > cluster_tol * scale

    low_ok = split_ok(0, slice(1, n))
    high_ok = split_ok(n - 1, slice(0, n - 1))
    if low_ok == high_ok:
        raise UnclusteredError(
            f"eigenvalues {np.sort(vals)} match neither an Einstein point "
            f"nor an (n-1)+1 split at tolerance {cluster_tol}")
    pos = 0 if low_ok else n - 1
    distinguished = float(svals[pos])
    cluster_vals = np.delete(svals, pos)
    a = float(np.mean(cluster_vals))
    b = a - distinguished

    vec = np.real(eigvecs[:, order[pos]])
    norm = float(vec @ cp.g @ vec)
    if norm >= 0.0:
        raise SpacelikeAnomalyError(
            f"distinguished eigendirection has g(v, v) = {norm:.6g} >= 0")
    u_up = vec / np.sqrt(-norm)
    if abs(u_up[0]) < 1e-12:
        raise OrientationTieError("u^1 = 0; cannot orient the velocity")
    if u_up[0] < 0.0:
        u_up = -u_up
    u = cp.g @ u_up
    model = a * cp.g + b * np.outer(u, u)
    residual = scale_free(cp.ricci - model, cp.ricci, model)
    return FluidDecomposition(a=a, b=b, u=u, u_up=u_up,
                              residual=residual, degenerate=False)


# ---------------------------------------------------------------------------
# Jet pipeline for a closed-form velocity field.
# ---------------------------------------------------------------------------

@dataclass
class FieldPoint:
    """Jets of every velocity-derived object at one point."""

    stack: JetStack
    point: ChartPoint
    u: list                    # covariant component jets, order 3
    u_up: list
    nabla_u_jets: list         # [k][j] = nabla_k u_j, order 2
    f_jet: Jet3                # expansion / (n-1)
    omega_jets: list           # omega_k = f u_k - (nabla_k u_j) u^j, order 2
    a_jet: Jet3
    b_jet: Jet3
    gamma_jet: Jet3
    p_jet: Jet3
    mu_jet: Jet3
    unit_residual: float

    @property
    def n(self) -> int:
        return self.stack.n

    @property
    def g(self) -> np.ndarray:
        n = self.n
        return np.array([[self.stack.gj[i][j].value for j in range(n)]
                         for i in range(n)])

    @property
    def g_inv(self) -> np.ndarray:
        n = self.n
        return np.array([[self.stack.ginvj[i][j].value for j in range(n)]
                         for i in range(n)])

    @property
    def uv(self) -> np.ndarray:
        return np.array([j.value for j in self.u])

    @property
    def uupv(self) -> np.ndarray:
        return np.array([j.value for j in self.u_up])

    @property
    def du(self) -> np.ndarray:
        """Raw partials d_k u_j."""
        return np.array([[self.u[j].grad[k] for j in range(self.n)]
                         for k in range(self.n)])

    @property
    def nabla_u(self) -> np.ndarray:
        return np.array([[self.nabla_u_jets[k][j].value for j in range(self.n)]
                         for k in range(self.n)])

    @property
    def omegav(self) -> np.ndarray:
        return np.array([j.value for j in self.omega_jets])

    def omega_curl(self) -> np.ndarray:
        n = self.n
        return np.array([[self.omega_jets[j].grad[k] - self.omega_jets[k].grad[j]
                          for j in range(n)] for k in range(n)])


class VelocityAnalysis:
    """Ties a closed-form covariant velocity field to the curvature stack."""

    def __init__(self, chart: MetricChart, field: VectorField | None = None,
                 *, kappa: float = 1.0,
                 perturb_b: Expr | None = None,
                 perturb_p: Expr | None = None):
        field = field if field is not None else chart.velocity
        if field is None or not field.closed_form:
            raise PointwiseFieldError(
                "velocity field is not differentiable: closed-form components required")
        if not field.covariant:
            raise PointwiseFieldError("velocity field must be covariant")
        self.chart = chart
        self.field = field
        self.kappa = float(kappa)
        self.perturb_b = perturb_b
        self.perturb_p = perturb_p

    def at(self, point: ChartPoint, stack: JetStack | None = None) -> FieldPoint:
        chart = self.chart
        n = chart.n
        if stack is None:
            stack = JetStack(chart, point)
        u = [eval_jet3(c, point, chart.params) for c in self.field.components]
        u_up = []
        for i in range(n):
            acc = stack.ginvj[i][0] * u[0]
            for j in range(1, n):
                acc = acc + stack.ginvj[i][j] * u[j]
            u_up.append(acc)
        nabla = [[None] * n for _ in range(n)]
        for k in range(n):
            for j in range(n):
                acc = u[j].deriv(k)
                for a in range(n):
                    acc = acc - stack.gam[a][k][j] * u[a].truncated(2)
                nabla[k][j] = acc
        norm = u_up[0] * u[0]
        for i in range(1, n):
            norm = norm + u_up[i] * u[i]
        unit_residual = abs(norm.value + 1.0)
        div = stack.ginvj[0][0].truncated(2) * nabla[0][0]
        first = True
        for k in range(n):
            for j in range(n):
                if first:
                    first = False
                    continue
                div = div + stack.ginvj[k][j].truncated(2) * nabla[k][j]
        f_jet = div * (1.0 / (n - 1))
        omega = []
        for k in range(n):
            acc = f_jet * u[k].truncated(2)
            for j in range(n):
                acc = acc - nabla[k][j] * u_up[j].truncated(2)
            omega.append(acc)
        ruu = stack.riccij[0][0] * (u_up[0].truncated(1) * u_up[0].truncated(1))
        for i in range(n):
            for j in range(n):
                if i == 0 and j == 0:
                    continue
                ruu = ruu + stack.riccij[i][j] * (
                    u_up[i].truncated(1) * u_up[j].truncated(1))
        a_jet = (stack.rsj + ruu) * (1.0 / (n - 1))
        b_jet = ruu + a_jet
        if self.perturb_b is not None:
            b_jet = b_jet + eval_jet3(self.perturb_b, point, chart.params).truncated(1)
        gamma_jet = a_jet * float(n - 2) + b_jet
        mu_jet = gamma_jet * (1.0 / (2.0 * self.kappa))
        p_jet = b_jet * (1.0 / self.kappa) - mu_jet
        if self.perturb_p is not None:
            p_jet = p_jet + eval_jet3(self.perturb_p, point, chart.params).truncated(1)
        return FieldPoint(stack=stack, point=point, u=u, u_up=u_up,
                          nabla_u_jets=nabla, f_jet=f_jet, omega_jets=omega,
                          a_jet=a_jet, b_jet=b_jet, gamma_jet=gamma_jet,
                          p_jet=p_jet, mu_jet=mu_jet,
                          unit_residual=unit_residual)


@dataclass
class ScalarFields:
    a: float
    b: float
    gamma: float
    grad_a: np.ndarray
    grad_b: np.ndarray
    grad_gamma: np.ndarray


def scalar_fields_at(chart: MetricChart, field: VectorField,
                     point: ChartPoint) -> ScalarFields:
    """A, B, gamma = (n-2)A + B and their gradients, all through jets."""
    fp = VelocityAnalysis(chart, field).at(point)
    return ScalarFields(a=fp.a_jet.value, b=fp.b_jet.value,
                        gamma=fp.gamma_jet.value,
                        grad_a=np.array(fp.a_jet.grad),
                        grad_b=np.array(fp.b_jet.grad),
                        grad_gamma=np.array(fp.gamma_jet.grad))


def closedness_residual(chart: MetricChart, field: VectorField,
                        point: ChartPoint) -> float:
    """Scale-free curl residual of a closed-form covariant field."""
    if not field.closed_form:
        raise PointwiseFieldError("closedness needs closed-form components")
    n = chart.n
    comps = [eval_jet3(c, point, chart.params) for c in field.components]
    du = np.array([[comps[j].grad[k] for j in range(n)] for k in range(n)])
    return scale_free(du - du.T, du)


def check_closed(chart: MetricChart, field: VectorField, points) -> float:
    """Max residual of nabla_k u_j - nabla_j u_k over the points.

    The covariant curl equals the partial curl (symmetric connection);
    grad_vector_at asserts that identity, here the raw partials suffice.
    """
    return max(closedness_residual(chart, field, p) for p in points)


def check_geodesic(chart: MetricChart, field: VectorField, points) -> float:
    """Max residual of u^k nabla_k u_j over the points."""
    analysis = VelocityAnalysis(chart, field)
    worst = 0.0
    for p in points:
        fp = analysis.at(p)
        acc = fp.uupv @ fp.nabla_u
        worst = max(worst, scale_free(acc, fp.nabla_u))
    return worst


@dataclass
class TorseFormingData:
    f: float
    omega: np.ndarray
    residual: float
    alignment_residual: float      # |(nabla_k u_j) u^j| = |omega - f u|
    f_cross_residual: float | None  # against -u^m d_m gamma / (2B(n-1))


def torse_decompose(nabla_u: np.ndarray, u: np.ndarray, g: np.ndarray,
                    g_inv: np.ndarray, *, b: float | None = None,
                    grad_gamma: np.ndarray | None = None) -> TorseFormingData:
    """Split nabla u into f (g + u x u) and report the defect."""
    n = len(u)
    u_up = g_inv @ u
    f = float(np.einsum("kj,kj->", g_inv, nabla_u)) / (n - 1)
    misalign = nabla_u @ u_up          # (nabla_k u_j) u^j
    omega = f * u - misalign
    model = f * (np.outer(u, u) + g)
    residual = scale_free(nabla_u - model, nabla_u, model)
    alignment = scale_free(misalign, nabla_u)
    f_cross = None
    if b is not None and grad_gamma is not None and abs(b) > 1e-12:
        f_ref = -float(u_up @ grad_gamma) / (2.0 * b * (n - 1))
        f_cross = abs(f - f_ref) / (1.0 + abs(f))
    return TorseFormingData(f=f, omega=omega, residual=residual,
                            alignment_residual=alignment,
                            f_cross_residual=f_cross)


def concircular_check(chart: MetricChart, omega_field: VectorField,
                      points) -> float:
    """Closedness residual of a candidate gradient 1-form."""
    return max(closedness_residual(chart, omega_field, p) for p in points)


# ---------------------------------------------------------------------------
# Potential reconstruction: axis-aligned staircase line integral.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _leggauss(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return tuple(nodes), tuple(weights)


def _staircase(integrand, base, target, axis_order, quad_order, panels) -> float:
    total = 0.0
    current = np.asarray(base, dtype=float).copy()
    target = np.asarray(target, dtype=float)
    nodes, weights = _leggauss(quad_order)
    for axis in axis_order:
        a, b = current[axis], target[axis]
        if a != b:
            for panel in range(panels):
                lo = a + (b - a) * panel / panels
                hi = a + (b - a) * (panel + 1) / panels
                mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
                for node, weight in zip(nodes, weights):
                    x = current.copy()
                    x[axis] = mid + half * node
                    total += weight * half * float(integrand(x)[axis])
        current[axis] = b
    return float(total)


@dataclass
class PotentialResult:
    value: float
    path_defect: float         # ascending vs descending staircase orderings
    refinement_error: float    # panel-doubling change on the ascending path


def _integrate_form(integrand, n, base, target, quad_order, panels,
                    refine_tol=1e-8) -> PotentialResult:
    ascending = tuple(range(n))
    descending = tuple(reversed(ascending))
    coarse = _staircase(integrand, base, target, ascending, quad_order, panels)
    fine = _staircase(integrand, base, target, ascending, quad_order, 2 * panels)
    drift = abs(fine - coarse)
    if drift > refine_tol * (1.0 + abs(fine)):
        raise QuadratureError(
            f"staircase quadrature did not converge (panel doubling moved "
            f"the value by {drift:.3e})")
    other = _staircase(integrand, base, target, descending, quad_order,
                       2 * panels)
    return PotentialResult(value=fine, path_defect=abs(fine - other),
                           refinement_error=drift)


def reconstruct_potential(chart: MetricChart, field: VectorField, basepoint,
                          point: ChartPoint, *, quad_order: int = 8,
                          panels: int = 4, closed_tol: float = 1e-6,
                          verify_closed: bool = True) -> PotentialResult:
    """Line-integrate a closed covariant field from basepoint to point.

    The path is the axis-aligned staircase taking coordinates in ascending
    order; the defect against the descending ordering is always reported.
    """
    if verify_closed:
        resid = closedness_residual(chart, field, point)
        if resid > closed_tol:
            raise NotClosedError(
                f"form is not closed (curl residual {resid:.3e} > {closed_tol})")
    base = np.asarray(basepoint, dtype=float)
    integrand = lambda x: field.values(ChartPoint(tuple(x)), chart.params)
    return _integrate_form(integrand, chart.n, base, point.array(),
                           quad_order, panels)


def _omega_values(chart: MetricChart, field: VectorField, coords) -> np.ndarray:
    """Value-level omega = f u - (nabla u) u^ at arbitrary coordinates.

    Needs only metric first derivatives, so the staircase integrand stays
    cheap: order-1 jets for g and u, plain numpy for the Christoffels.
    """
    n = chart.n
    point = ChartPoint(tuple(coords))
    g = np.empty((n, n))
    dg = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            jet = eval_jet3(chart.metric[i][j], point, chart.params)
            g[i, j] = g[j, i] = jet.value
            dg[:, i, j] = dg[:, j, i] = jet.grad
    g_inv = np.linalg.inv(g)
    gamma = 0.5 * np.einsum(
        "ml,jlk->mjk",
        g_inv, dg + np.einsum("klj->jlk", dg) - np.einsum("ljk->jlk", dg))
    u = np.empty(n)
    du = np.empty((n, n))
    for j in range(n):
        jet = eval_jet3(field.components[j], point, chart.params)
        u[j] = jet.value
        du[:, j] = jet.grad
    nabla = du - np.einsum("akj,a->kj", gamma, u)
    u_up = g_inv @ u
    f = float(np.einsum("kj,kj->", g_inv, nabla)) / (n - 1)
    return f * u - nabla @ u_up


def _structured_scalar_jet(n: int, value: float, grad_jets) -> Jet3:
    """Jet of a potential whose exact gradient is the given closed form.

    The value comes from quadrature; every derivative level is read off the
    form's own jets (symmetrized), so no differencing enters.
    """
    t = jet_tables(n)
    grad = np.array([j.value for j in grad_jets])
    full = np.array([[j.grad[i] for j in grad_jets] for i in range(n)])
    sym = 0.5 * (full + full.T)
    hess = sym[t.i2, t.j2]
    third = np.empty(len(t.i3))
    for slot, (i, j, k) in enumerate(zip(t.i3, t.j3, t.k3)):
        third[slot] = (grad_jets[k].d2(i, j) + grad_jets[j].d2(i, k)
                       + grad_jets[i].d2(j, k)) / 3.0
    return Jet3(n, 3, value, grad, hess, third)


@dataclass
class ChenPointData:
    sigma: float
    rho: float
    x: np.ndarray                  # covariant Chen vector e^{-sigma} u
    chen_residual: float           # nabla_k X_l - rho g_kl
    ckv_residual: float            # nabla_j rho - (A-B)/(1-n) X_j
    timelike_residual: float       # X^j X_j + e^{-2 sigma}
    path_defect: float
    omega_closed: float
    proper: bool                   # |A - B| above tolerance
    grad_rho_norm: float


@dataclass
class ChenReport:
    points: list
    chen_residual: float
    ckv_residual: float
    omega_closed: float
    path_defect: float
    proper_count: int
    homothetic_count: int


def chen_check(chart: MetricChart, field: VectorField, basepoint, points, *,
               quad_order: int = 8, panels: int = 4, closed_tol: float = 1e-6,
               branch_tol: float = 1e-7, kappa: float = 1.0,
               analysis: VelocityAnalysis | None = None,
               field_points: dict | None = None) -> ChenReport:
    """Rescale u by the reconstructed potential and test the gradient laws."""
    analysis = analysis or VelocityAnalysis(chart, field, kappa=kappa)
    base = np.asarray(basepoint, dtype=float)
    integrand = lambda x: _omega_values(chart, field, x)
    data = []
    for p in points:
        fp = field_points[p] if field_points else analysis.at(p)
        omega_resid = scale_free(fp.omega_curl(),
                                 np.array([[j.grad[k] for j in fp.omega_jets]
                                           for k in range(chart.n)]))
        if omega_resid > closed_tol:
            raise NotClosedError(
                f"omega is not closed at {p.coords} "
                f"(residual {omega_resid:.3e} > {closed_tol})")
        pot = _integrate_form(integrand, chart.n, base, p.array(),
                              quad_order, panels)
        data.append(_chen_point(fp, pot, omega_resid, branch_tol))
    return ChenReport(
        points=data,
        chen_residual=max(d.chen_residual for d in data),
        ckv_residual=max(d.ckv_residual for d in data),
        omega_closed=max(d.omega_closed for d in data),
        path_defect=max(d.path_defect for d in data),
        proper_count=sum(d.proper for d in data),
        homothetic_count=sum(not d.proper for d in data),
    )


def _chen_point(fp: FieldPoint, pot: PotentialResult, omega_resid: float,
                branch_tol: float) -> ChenPointData:
    n = fp.n
    sigma_jet = _structured_scalar_jet(n, pot.value, fp.omega_jets)
    scaling = (-sigma_jet).exp()
    x_jets = [scaling * fp.u[j] for j in range(n)]
    xv = np.array([j.value for j in x_jets])
    dx = np.array([[x_jets[j].grad[k] for j in range(n)] for k in range(n)])
    gamma_vals = np.array([[[fp.stack.gam[m][j][k].value for k in range(n)]
                            for j in range(n)] for m in range(n)])
    nabla_x = dx - np.einsum("akj,a->kj", gamma_vals, xv)
    rho_jet = scaling.truncated(2) * fp.f_jet
    g = fp.g
    chen_resid = scale_free(nabla_x - rho_jet.value * g, nabla_x,
                            rho_jet.value * g)
    a, b = fp.a_jet.value, fp.b_jet.value
    grad_rho = np.array(rho_jet.grad)
    ckv_rhs = ((a - b) / (1.0 - n)) * xv
    ckv_resid = scale_free(grad_rho - ckv_rhs, grad_rho, ckv_rhs)
    proper = abs(a - b) > branch_tol * (1.0 + abs(a) + abs(b))
    x_norm = float(xv @ fp.g_inv @ xv)        # must be -e^{-2 sigma} < 0
    scale_sq = scaling.value * scaling.value
    timelike_resid = abs(x_norm + scale_sq) / (1.0 + scale_sq)
    return ChenPointData(sigma=pot.value, rho=rho_jet.value, x=xv,
                         chen_residual=chen_resid, ckv_residual=ckv_resid,
                         timelike_residual=timelike_resid,
                         path_defect=pot.path_defect,
                         omega_closed=omega_resid, proper=proper,
                         grad_rho_norm=float(np.max(np.abs(grad_rho))))


@dataclass
class WeylElectricResult:
    electric_residual: float   # C_{jkl}{}^m u_m
    weyl_norm: float           # scale-free size of C itself


def weyl_electric_check(cp, u_cov: np.ndarray) -> WeylElectricResult:
    u_up = cp.g_inv @ np.asarray(u_cov, dtype=float)
    contracted = np.einsum("jkla,a->jkl", cp.weyl, u_up)
    return WeylElectricResult(
        electric_residual=scale_free(contracted, cp.weyl),
        weyl_norm=scale_free(cp.weyl, cp.riem))


@dataclass
class IdentityLadderReport:
    residuals: dict
    per_point: list

    def worst(self) -> float:
        return max(self.residuals.values())


def ladder_residuals_at(fp: FieldPoint) -> dict:
    """All nine intermediate identities at one point, scale-free."""
    n = fp.n
    g = fp.g
    u = fp.uv
    u_up = fp.uupv
    nabla = fp.nabla_u
    a, b = fp.a_jet.value, fp.b_jet.value
    da = np.array(fp.a_jet.grad)
    db = np.array(fp.b_jet.grad)
    dgam = np.array(fp.gamma_jet.grad)
    divu = fp.f_jet.value * (n - 1)
    u_dot_db = float(u_up @ db)
    u_dot_dgam = float(u_up @ dgam)
    accel = u_up @ nabla                      # u^k nabla_k u_j
    out = {}

    lhs = u_dot_db * u + b * accel + b * divu * u
    rhs = 0.5 * ((n - 2) * da - db)
    out["bianchi-contract"] = scale_free(lhs - rhs, lhs, rhs)

    t3 = (np.einsum("k,j,l->kjl", db, u, u)
          + b * np.einsum("kj,l->kjl", nabla, u)
          + b * np.einsum("j,kl->kjl", u, nabla))
    lhs = t3 - np.einsum("ljk->kjl", t3)      # nabla_k(Bu_ju_l) - nabla_l(Bu_ju_k)
    rhs = -(np.einsum("k,jl->kjl", dgam, g)
            - np.einsum("l,jk->kjl", dgam, g)) / (2 * (n - 1))
    out["ricci-curl"] = scale_free(lhs - rhs, lhs, rhs)

    lhs = db + u * u_dot_db + b * accel
    rhs = (dgam + u * u_dot_dgam) / (2 * (n - 1))
    out["b-transport"] = scale_free(lhs - rhs, lhs, rhs)

    rhs = 0.5 * (dgam + u * u_dot_dgam)
    out["b-transport-half"] = scale_free(lhs - rhs, lhs, rhs)

    resid = dgam + u * u_dot_dgam
    out["gamma-comoving"] = scale_free(resid, dgam)

    resid = db + u * u_dot_db + b * accel
    out["b-comoving"] = scale_free(resid, db, b * accel)

    lhs = b * (nabla + np.einsum("k,j->kj", u, accel))
    rhs = (np.einsum("j,k->kj", u, dgam) - g * u_dot_dgam) / (2 * (n - 1))
    out["torse-source"] = scale_free(lhs - rhs, lhs, rhs)

    m = np.einsum("k,j->kj", db, u) + b * nabla   # nabla_k (B u_j)
    out["bu-closed"] = scale_free(m - m.T, m)

    resid = np.einsum("j,k->jk", u, dgam) - np.einsum("k,j->jk", u, dgam)
    out["gamma-aligned"] = scale_free(resid, np.einsum("j,k->jk", u, dgam))
    return out


def identity_ladder(chart: MetricChart, field: VectorField, points, *,
                    perturb_b: Expr | None = None,
                    analysis: VelocityAnalysis | None = None) -> IdentityLadderReport:
    analysis = analysis or VelocityAnalysis(chart, field, perturb_b=perturb_b)
    per_point = [ladder_residuals_at(analysis.at(p)) for p in points]
    residuals = {name: max(pp[name] for pp in per_point)
                 for name in LADDER_NAMES}
    return IdentityLadderReport(residuals=residuals, per_point=per_point)


@dataclass
class SolitonReport:
    lam: list
    eta: list
    theta: list
    residual: float
    gradient_soliton: bool


def soliton_form_check(chart: MetricChart, field: VectorField, basepoint,
                       points, *, quad_order: int = 8, panels: int = 4,
                       closed_tol: float = 1e-6, flag_tol: float = 1e-7,
                       analysis: VelocityAnalysis | None = None,
                       field_points: dict | None = None) -> SolitonReport:
    """Check Ricci + Hess(theta) - eta dtheta x dtheta = lam g with
    lam = A + f, eta = B + f, theta the potential of the closed u."""
    analysis = analysis or VelocityAnalysis(chart, field)
    base = np.asarray(basepoint, dtype=float)
    integrand = lambda x: field.values(ChartPoint(tuple(x)), chart.params)
    lams, etas, thetas = [], [], []
    worst = 0.0
    for p in points:
        resid = closedness_residual(chart, field, p)
        if resid > closed_tol:
            raise NotClosedError(
                f"u is not closed at {p.coords} (residual {resid:.3e})")
        pot = _integrate_form(integrand, chart.n, base, p.array(),
                              quad_order, panels)
        fp = field_points[p] if field_points else analysis.at(p)
        worst = max(worst, _soliton_residual_at(fp, pot.value, lams, etas))
        thetas.append(pot.value)
    spread = max(lams) - min(lams)
    gradient_soliton = spread < flag_tol and max(abs(e) for e in etas) < flag_tol
    return SolitonReport(lam=lams, eta=etas, theta=thetas, residual=worst,
                         gradient_soliton=gradient_soliton)


def _soliton_residual_at(fp: FieldPoint, theta0: float, lams, etas) -> float:
    n = fp.n
    theta_jet = _structured_scalar_jet(n, theta0, fp.u)
    gamma_vals = np.array([[[fp.stack.gam[m][j][k].value for k in range(n)]
                            for j in range(n)] for m in range(n)])
    grad_theta = np.array(theta_jet.grad)
    hess_cov = theta_jet.hess_matrix() - np.einsum(
        "aij,a->ij", gamma_vals, grad_theta)
    ricci = np.array([[fp.stack.riccij[i][j].value for j in range(n)]
                      for i in range(n)])
    lam = fp.a_jet.value + fp.f_jet.value
    eta = fp.b_jet.value + fp.f_jet.value
    lams.append(lam)
    etas.append(eta)
    lhs = ricci + hess_cov - eta * np.outer(grad_theta, grad_theta)
    rhs = lam * fp.g
    return scale_free(lhs - rhs, lhs, rhs)
