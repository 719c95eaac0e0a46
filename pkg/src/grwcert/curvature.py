"""Curvature stack at a point: metric jets through the Weyl divergence.

Index conventions, pinned by the oracle suite before any theorem-level
check (unit round sphere: scalar curvature +2; exponential warp, n=4:
Ricci = +3 g):

    R_{jkl}{}^m = d_k Gamma^m_{jl} - d_j Gamma^m_{kl}
                  + Gamma^b_{jl} Gamma^m_{kb} - Gamma^b_{kl} Gamma^m_{jb}
    Ricci_{jl}  = R_{jml}{}^m
    C_{jklm}    = R_{jklm} + [g_{jm}R_{kl} - g_{km}R_{jl}
                  + R_{jm}g_{kl} - R_{km}g_{jl}]/(n-2)
                  - R [g_{jm}g_{kl} - g_{mk}g_{jl}] / ((n-1)(n-2))
    divWeyl[j,k,l] = nabla_m C_{jkl}{}^m   (divergence on the 4th slot)

Everything runs in jet arithmetic: metric jets to order 3 give Christoffel
jets to order 2, Riemann/Weyl jets to order 1, and the Weyl divergence at
order 0. No finite differences anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import ChartPoint, MetricChart, VectorField
from .expr import eval_jet3
from .jets import Jet3

# div-Weyl / Cotton proportionality, one constant per dimension, determined
# by a dev-time oracle run on non-conformally-flat metrics and then asserted
# across the whole catalog (tests/test_curvature.py). In this module's slot
# convention the combination carrying the (j,k) antisymmetry is
#   cotton[j,k,l] = nabla_j R_{kl} - nabla_k R_{jl}
#                   - (g_{kl} d_j R - g_{jl} d_k R) / (2(n-1)).
COTTON_COEFF = {3: 0.0, 4: -0.5, 5: -2.0 / 3.0, 6: -0.75, 7: -0.8, 8: -5.0 / 6.0}


def scale_free(residual, *references) -> float:
    """max-abs of residual over (1 + max-abs of the dominant inputs)."""
    r = float(np.max(np.abs(residual))) if np.size(residual) else 0.0
    s = 0.0
    for ref in references:
        if np.size(ref):
            s = max(s, float(np.max(np.abs(ref))))
    return r / (1.0 + s)


class PointwiseFieldError(ValueError):
    """Raised when a jet-level operation receives a pointwise-only field."""


@dataclass
class CurvaturePoint:
    """Every curvature object at one chart point, as plain arrays."""

    point: ChartPoint
    n: int
    g: np.ndarray          # (n, n)
    g_inv: np.ndarray      # (n, n)
    dg: np.ndarray         # (n, n, n): dg[k, i, j] = d_k g_ij
    gamma: np.ndarray      # (n, n, n): gamma[m, j, k] = Gamma^m_{jk}
    dgamma: np.ndarray     # (n, n, n, n): dgamma[a, m, j, k] = d_a Gamma^m_{jk}
    d2gamma: np.ndarray    # (n, n, n, n, n): d_a d_b Gamma^m_{jk}
    riem: np.ndarray       # (n, n, n, n): riem[j, k, l, m] = R_{jkl}{}^m
    driem: np.ndarray      # (n, n, n, n, n): driem[a, ...] = d_a R_{jkl}{}^m
    ricci: np.ndarray      # (n, n)
    rs: float              # scalar curvature
    drs: np.ndarray        # (n,): nabla_j R = d_j R
    dricci: np.ndarray     # (n, n, n): dricci[k, j, l] = nabla_k R_{jl}
    weyl: np.ndarray       # (n, n, n, n): C_{jklm}, zero grid for n < 3
    divweyl: np.ndarray    # (n, n, n): nabla_m C_{jkl}{}^m


class JetStack:
    """All jet-level curvature grids at one point; built eagerly, shared."""

    def __init__(self, chart: MetricChart, point: ChartPoint):
        self.chart = chart
        self.point = point
        n = self.n = chart.n
        rng = range(n)

        gj = [[None] * n for _ in rng]
        for i in rng:
            for j in range(i, n):
                jet = eval_jet3(chart.metric[i][j], point, chart.params)
                gj[i][j] = gj[j][i] = jet
        self.gj = gj
        self.ginvj = jet_matrix_inverse(gj)

        # d_a g_ij as order-2 jets
        dgj = [[[gj[i][j].deriv(a) for j in rng] for i in rng] for a in rng]
        self.dgj = dgj

        # Gamma^m_{jk} = 1/2 g^{ml} (d_j g_lk + d_k g_lj - d_l g_jk), order 2
        gam = [[[None] * n for _ in rng] for _ in rng]
        for j in rng:
            for k in range(j, n):
                combos = [dgj[j][l][k] + dgj[k][l][j] - dgj[l][j][k] for l in rng]
                for m in rng:
                    acc = self.ginvj[m][0].truncated(2) * combos[0]
                    for l in range(1, n):
                        acc = acc + self.ginvj[m][l].truncated(2) * combos[l]
                    gam[m][j][k] = gam[m][k][j] = acc * 0.5
        self.gam = gam

        # R_{jkl}^m, order 1; antisymmetric in (j, k)
        zero1 = Jet3.empty(n, 1)
        riem = [[[[zero1] * n for _ in rng] for _ in rng] for _ in rng]
        for j in rng:
            for k in range(j + 1, n):
                for l in rng:
                    for m in rng:
                        acc = gam[m][j][l].deriv(k) - gam[m][k][l].deriv(j)
                        for b in rng:
                            acc = acc + gam[b][j][l].truncated(1) * gam[m][k][b].truncated(1)
                            acc = acc - gam[b][k][l].truncated(1) * gam[m][j][b].truncated(1)
                        riem[j][k][l][m] = acc
                        riem[k][j][l][m] = -acc
        self.riemj = riem

        # Ricci_{jl} = R_{jml}^m, scalar R = g^{jl} Ricci_{jl}; order 1
        ricc = [[None] * n for _ in rng]
        for j in rng:
            for l in rng:
                acc = riem[j][0][l][0]
                for m in range(1, n):
                    acc = acc + riem[j][m][l][m]
                ricc[j][l] = acc
        self.riccij = ricc
        rs = Jet3.empty(n, 1)
        for j in rng:
            for l in rng:
                rs = rs + self.ginvj[j][l].truncated(1) * ricc[j][l]
        self.rsj = rs

        if n >= 3:
            self.weylj = self._build_weyl()
        else:
            self.weylj = [[[[zero1] * n for _ in rng] for _ in rng] for _ in rng]

    def _build_weyl(self):
        n, rng = self.n, range(self.n)
        g, ricc, rs = self.gj, self.riccij, self.rsj
        c1 = 1.0 / (n - 2)
        c2 = 1.0 / ((n - 1) * (n - 2))
        zero1 = Jet3.empty(n, 1)
        weyl = [[[[zero1] * n for _ in rng] for _ in rng] for _ in rng]
        for j in rng:
            for k in range(j + 1, n):
                for l in rng:
                    for m in range(l + 1, n):
                        low = self.riemj[j][k][l][0].truncated(1) * g[0][m].truncated(1)
                        for a in range(1, n):
                            low = low + self.riemj[j][k][l][a].truncated(1) * g[a][m].truncated(1)
                        gt = lambda i, o: g[i][o].truncated(1)
                        rt = lambda i, o: ricc[i][o].truncated(1)
                        term = (gt(j, m) * rt(k, l) - gt(k, m) * rt(j, l)
                                + rt(j, m) * gt(k, l) - rt(k, m) * gt(j, l)) * c1
                        trace = rs.truncated(1) * (
                            gt(j, m) * gt(k, l) - gt(m, k) * gt(j, l)) * c2
                        val = low + term - trace
                        weyl[j][k][l][m] = val
                        weyl[k][j][l][m] = -val
                        weyl[j][k][m][l] = -val
                        weyl[k][j][m][l] = val
        return weyl

    # -- plain-array extraction ------------------------------------------

    def to_point(self) -> CurvaturePoint:
        n, rng = self.n, range(self.n)
        g = np.array([[self.gj[i][j].value for j in rng] for i in rng])
        g_inv = np.array([[self.ginvj[i][j].value for j in rng] for i in rng])
        dg = np.array([[[self.gj[i][j].grad[k] for j in rng] for i in rng]
                       for k in rng])
        gamma = np.array([[[self.gam[m][j][k].value for k in rng] for j in rng]
                          for m in rng])
        dgamma = np.empty((n, n, n, n))
        d2gamma = np.empty((n, n, n, n, n))
        for m in rng:
            for j in rng:
                for k in rng:
                    jet = self.gam[m][j][k]
                    dgamma[:, m, j, k] = jet.grad
                    d2gamma[:, :, m, j, k] = jet.hess_matrix()
        riem = np.empty((n, n, n, n))
        driem = np.empty((n, n, n, n, n))
        for j in rng:
            for k in rng:
                for l in rng:
                    for m in rng:
                        jet = self.riemj[j][k][l][m]
                        riem[j, k, l, m] = jet.value
                        driem[:, j, k, l, m] = jet.grad
        ricci = np.array([[self.riccij[j][l].value for l in rng] for j in rng])
        rs = self.rsj.value
        drs = np.array(self.rsj.grad)
        dricci_part = np.empty((n, n, n))
        for j in rng:
            for l in rng:
                dricci_part[:, j, l] = self.riccij[j][l].grad
        dricci = (dricci_part
                  - np.einsum("akj,al->kjl", gamma, ricci)
                  - np.einsum("akl,ja->kjl", gamma, ricci))
        weyl = np.empty((n, n, n, n))
        dweyl_part = np.empty((n, n, n, n, n))
        for j in rng:
            for k in rng:
                for l in rng:
                    for m in rng:
                        jet = self.weylj[j][k][l][m]
                        weyl[j, k, l, m] = jet.value
                        dweyl_part[:, j, k, l, m] = jet.grad
        divweyl = self._divergence_weyl(g_inv, gamma, weyl, dweyl_part, dg)
        return CurvaturePoint(point=self.point, n=n, g=g, g_inv=g_inv, dg=dg,
                              gamma=gamma, dgamma=dgamma, d2gamma=d2gamma,
                              riem=riem, driem=driem, ricci=ricci, rs=rs,
                              drs=drs, dricci=dricci, weyl=weyl,
                              divweyl=divweyl)

    @staticmethod
    def _divergence_weyl(g_inv, gamma, weyl, dweyl, dg):
        """nabla_m C_{jkl}{}^m from C jets, raising the last slot exactly.

        d_a g^{mp} = -g^{mb} (d_a g_bc) g^{cp}, so the partial term is
        d_m (C_{jkla} g^{am}) = (d_m C_{jkla}) g^{am} + C_{jkla} d_m g^{am}.
        """
        dginv = -np.einsum("mb,abc,cp->amp", g_inv, dg, g_inv)
        cup = np.einsum("jkla,am->jklm", weyl, g_inv)
        partial = (np.einsum("mjkla,am->jkl", dweyl, g_inv)
                   + np.einsum("jkla,mam->jkl", weyl, dginv))
        corrections = (np.einsum("amj,aklm->jkl", gamma, cup)
                       + np.einsum("amk,jalm->jkl", gamma, cup)
                       + np.einsum("aml,jkam->jkl", gamma, cup))
        trace = np.einsum("mma->a", gamma)
        return partial - corrections + np.einsum("a,jkla->jkl", trace, cup)


def jet_matrix_inverse(rows) -> list:
    """Gauss-Jordan inverse of a matrix of jets (partial pivoting on values)."""
    n = len(rows)
    a = [list(r) for r in rows]
    nvars = a[0][0].n
    inv = [[Jet3.constant(nvars, 1.0 if i == j else 0.0) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].value))
        if abs(a[piv][col].value) < 1e-14:
            raise np.linalg.LinAlgError("metric matrix is singular")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            inv[col], inv[piv] = inv[piv], inv[col]
        r = a[col][col].reciprocal()
        a[col] = [x * r for x in a[col]]
        inv[col] = [x * r for x in inv[col]]
        for row in range(n):
            if row == col:
                continue
            factor = a[row][col]
            if factor.value == 0.0 and not factor.grad.any() \
                    and not factor.hess.any() and not factor.third.any():
                continue
            a[row] = [x - factor * y for x, y in zip(a[row], a[col])]
            inv[row] = [x - factor * y for x, y in zip(inv[row], inv[col])]
    return inv


def curvature_at(chart: MetricChart, point: ChartPoint) -> CurvaturePoint:
    """Full curvature stack at one point (pure; safe to run in parallel)."""
    return JetStack(chart, point).to_point()


def grad_vector_at(chart: MetricChart, field: VectorField, point: ChartPoint):
    """Covariant derivative of a lowered closed-form field.

    Returns (nabla[k, j] = nabla_k v_j, dnabla[a, k, j] = d_a nabla_k v_j).
    The antisymmetric part of nabla v equals the partial curl exactly
    (Christoffel symmetry); this is asserted before returning.
    """
    if not field.closed_form:
        raise PointwiseFieldError(
            "field is not differentiable: pointwise rule, no components")
    if not field.covariant:
        raise PointwiseFieldError("expected a covariant (lowered) field")
    stack = JetStack(chart, point)
    n = chart.n
    v = [eval_jet3(c, point, chart.params) for c in field.components]
    nabla = np.empty((n, n))
    dnabla = np.empty((n, n, n))
    curl = np.empty((n, n))
    for k in range(n):
        for j in range(n):
            jet = v[j].deriv(k)
            curl[k, j] = jet.value
            for a in range(n):
                jet = jet - stack.gam[a][k][j] * v[a]
            nabla[k, j] = jet.value
            dnabla[:, k, j] = jet.grad
    anti_cov = nabla - nabla.T
    anti_partial = curl - curl.T
    gap = scale_free(anti_cov - anti_partial, anti_partial)
    if gap > 1e-10:
        raise AssertionError(
            f"covariant curl deviates from partial curl by {gap:.3e}")
    return nabla, dnabla


def cotton_combination(cp: CurvaturePoint) -> np.ndarray:
    """The (j,k)-antisymmetric Ricci-gradient combination matching divWeyl."""
    n = cp.n
    grad_term = np.einsum("kl,j->jkl", cp.g, cp.drs) - np.einsum(
        "jl,k->jkl", cp.g, cp.drs)
    return (np.einsum("jkl->jkl", cp.dricci) - np.einsum("kjl->jkl", cp.dricci)
            - grad_term / (2.0 * (n - 1)))


def first_bianchi_residual(cp: CurvaturePoint) -> float:
    cyc = (cp.riem + np.einsum("kljm->jklm", cp.riem)
           + np.einsum("ljkm->jklm", cp.riem))
    return scale_free(cyc, cp.riem)


def weyl_trace_residual(cp: CurvaturePoint) -> float:
    """Max over all six g-traces of C; each should vanish identically."""
    traces = [
        np.einsum("jm,jklm->kl", cp.g_inv, cp.weyl),
        np.einsum("jl,jklm->km", cp.g_inv, cp.weyl),
        np.einsum("jk,jklm->lm", cp.g_inv, cp.weyl),
        np.einsum("kl,jklm->jm", cp.g_inv, cp.weyl),
        np.einsum("km,jklm->jl", cp.g_inv, cp.weyl),
        np.einsum("lm,jklm->jk", cp.g_inv, cp.weyl),
    ]
    return max(scale_free(t, cp.weyl) for t in traces)


def second_bianchi_residual(chart: MetricChart, point: ChartPoint) -> float:
    """Cyclic covariant derivative of the lowered Riemann tensor."""
    cp = curvature_at(chart, point)
    low = np.einsum("jklm,mp->jklp", cp.riem, cp.g)
    dlow = (np.einsum("ajklm,mp->ajklp", cp.driem, cp.g)
            + np.einsum("jklm,amp->ajklp", cp.riem, cp.dg))
    nabla = (dlow
             - np.einsum("baj,bklp->ajklp", cp.gamma, low)
             - np.einsum("bak,jblp->ajklp", cp.gamma, low)
             - np.einsum("bal,jkbp->ajklp", cp.gamma, low)
             - np.einsum("bap,jklb->ajklp", cp.gamma, low))
    cyc = (nabla + np.einsum("jkalp->ajklp", nabla)
           + np.einsum("kajlp->ajklp", nabla))
    return scale_free(cyc, nabla)
