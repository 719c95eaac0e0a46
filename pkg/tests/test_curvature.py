import numpy as np
import pytest

from grwcert.chart import ChartInput, ChartPoint, VectorField, compile_chart, sample_points
from grwcert.curvature import (COTTON_COEFF, PointwiseFieldError,
                               cotton_combination, curvature_at,
                               first_bianchi_residual, grad_vector_at,
                               scale_free, second_bianchi_residual,
                               weyl_trace_residual)
from grwcert.expr import parse

from .oracles import (desitter_ricci, sphere2_curvature,
                      warped_flat_curvature, warped_nabla_u)


def make_chart(name, dim, signature, coords, metric, ranges, **kw):
    return compile_chart(ChartInput(name=name, dimension=dim,
                                    signature=signature, coordinates=coords,
                                    metric=metric, ranges=ranges, **kw))


@pytest.fixture(scope="module")
def minkowski():
    return make_chart("minkowski", 4, "lorentzian", ["t", "x", "y", "z"],
                      {"1,1": "-1", "2,2": "1", "3,3": "1", "4,4": "1"},
                      {"t": (-1, 1), "x": (-1, 1), "y": (-1, 1), "z": (-1, 1)})


@pytest.fixture(scope="module")
def desitter():
    return make_chart("desitter", 4, "lorentzian", ["t", "x", "y", "z"],
                      {"1,1": "-1", "2,2": "exp(2*t)", "3,3": "exp(2*t)",
                       "4,4": "exp(2*t)"},
                      {"t": (-0.5, 0.5), "x": (-1, 1), "y": (-1, 1),
                       "z": (-1, 1)})


@pytest.fixture(scope="module")
def sphere2():
    return make_chart("s2", 2, "riemannian", ["theta", "phi"],
                      {"1,1": "1", "2,2": "sin(theta)^2"},
                      {"theta": (0.3, 2.84), "phi": (0, 6.2)})


class TestConventionPins:
    """Hand-coded Christoffel oracles fix the sign conventions."""

    def test_unit_sphere_scalar_curvature_is_two(self, sphere2):
        for p in sample_points(sphere2, 10, seed=1):
            cp = curvature_at(sphere2, p)
            assert cp.rs == pytest.approx(2.0, abs=1e-10)

    def test_sphere_matches_oracle_tensors(self, sphere2):
        p = ChartPoint((1.2, 0.4))
        cp = curvature_at(sphere2, p)
        _, riem_o, ricci_o, scalar_o = sphere2_curvature(1.2)
        np.testing.assert_allclose(cp.riem, riem_o, atol=1e-12)
        np.testing.assert_allclose(cp.ricci, ricci_o, atol=1e-12)
        assert cp.rs == pytest.approx(scalar_o, abs=1e-12)

    def test_desitter_ricci_is_three_g(self, desitter):
        for p in sample_points(desitter, 10, seed=2):
            cp = curvature_at(desitter, p)
            resid = np.max(np.abs(cp.ricci - 3.0 * cp.g)) / np.max(np.abs(cp.g))
            assert resid < 1e-9

    def test_desitter_matches_oracle(self, desitter):
        p = ChartPoint((0.3, 0.1, -0.2, 0.4))
        cp = curvature_at(desitter, p)
        _, ricci_o = desitter_ricci(4, 0.3)
        np.testing.assert_allclose(cp.ricci, ricci_o, atol=1e-12)

    def test_quadratic_warp_full_hand_assembly(self):
        chart = make_chart("qt2", 4, "lorentzian", ["t", "x", "y", "z"],
                           {"1,1": "-1", "2,2": "t^4", "3,3": "t^4",
                            "4,4": "t^4"},
                           {"t": (1, 2), "x": (-1, 1), "y": (-1, 1),
                            "z": (-1, 1)})
        for t0 in (1.2, 1.5, 1.9):
            cp = curvature_at(chart, ChartPoint((t0, 0.3, -0.2, 0.9)))
            _, riem_o, ricci_o = warped_flat_curvature(
                4, t0 ** 2, 2 * t0, 2.0)
            np.testing.assert_allclose(cp.riem, riem_o, atol=1e-12)
            np.testing.assert_allclose(cp.ricci, ricci_o, atol=1e-12)
            # settles the first- vs second-derivative time-time row
            assert cp.ricci[0, 0] == pytest.approx(-3 * 2.0 / t0 ** 2,
                                                   abs=1e-12)
            assert cp.ricci[0, 0] != pytest.approx(-3 * 2 * t0 / t0 ** 2,
                                                   abs=1e-3)


class TestChristoffelDerivatives:
    def test_desitter_closed_forms(self, desitter):
        # q = e^t: Gamma^t_{xx} = q q' = e^{2t}, Gamma^x_{tx} = q'/q = 1
        t0 = 0.3
        cp = curvature_at(desitter, ChartPoint((t0, 0.1, -0.2, 0.4)))
        q2 = np.exp(2 * t0)
        assert cp.gamma[0, 1, 1] == pytest.approx(q2, rel=1e-12)
        assert cp.gamma[1, 0, 1] == pytest.approx(1.0, abs=1e-12)
        # first derivative along t and vanishing spatial derivatives
        assert cp.dgamma[0, 0, 1, 1] == pytest.approx(2 * q2, rel=1e-12)
        assert cp.dgamma[0, 1, 0, 1] == pytest.approx(0.0, abs=1e-12)
        assert np.max(np.abs(cp.dgamma[1:])) < 1e-12
        # second derivative d_t d_t Gamma^t_{xx} = 4 e^{2t}
        assert cp.d2gamma[0, 0, 0, 1, 1] == pytest.approx(4 * q2, rel=1e-12)


class TestFlatness:
    def test_minkowski_everything_vanishes(self, minkowski):
        for p in sample_points(minkowski, 10, seed=3):
            cp = curvature_at(minkowski, p)
            for arr in (cp.riem, cp.ricci, cp.weyl, cp.divweyl, cp.gamma):
                assert np.max(np.abs(arr)) < 1e-12
            assert abs(cp.rs) < 1e-12


class TestInvariants:
    CHARTS = {}

    def _generic4(self):
        return make_chart("generic4", 4, "lorentzian", ["t", "x", "y", "z"],
                          {"1,1": "-1", "2,2": "t^2*(1+0.3*x^2)",
                           "3,3": "t^4", "4,4": "t^2+y^2"},
                          {"t": (1, 2), "x": (-1, 1), "y": (-1, 1),
                           "z": (-1, 1)})

    def test_first_bianchi(self):
        chart = self._generic4()
        for p in sample_points(chart, 10, seed=4):
            assert first_bianchi_residual(curvature_at(chart, p)) < 1e-10

    def test_ricci_symmetry_and_weyl_traces(self):
        chart = self._generic4()
        for p in sample_points(chart, 10, seed=5):
            cp = curvature_at(chart, p)
            assert scale_free(cp.ricci - cp.ricci.T, cp.ricci) < 1e-12
            assert weyl_trace_residual(cp) < 1e-12

    def test_second_bianchi_spot_check(self):
        chart = self._generic4()
        for p in sample_points(chart, 20, seed=6):
            assert second_bianchi_residual(chart, p) < 1e-9

    def test_second_bianchi_across_catalog(self):
        from grwcert.grw import catalog_get, catalog_names
        for name in catalog_names():
            chart = catalog_get(name).chart
            for p in sample_points(chart, 20, seed=6):
                assert second_bianchi_residual(chart, p) < 1e-9, name

    @pytest.mark.parametrize("dim", [4, 5])
    def test_cotton_consistency_generic(self, dim):
        metric = {"1,1": "-1", "2,2": "t^2*(1+0.3*x^2)", "3,3": "t^4",
                  "4,4": "t^2+y^2"}
        coords = ["t", "x", "y", "z"]
        ranges = {"t": (1, 2), "x": (-1, 1), "y": (-1, 1), "z": (-1, 1)}
        if dim == 5:
            metric["5,5"] = "1+0.5*w^2+t^2"
            coords.append("w")
            ranges["w"] = (-1, 1)
        chart = make_chart(f"generic{dim}", dim, "lorentzian", coords,
                           metric, ranges)
        c = COTTON_COEFF[dim]
        assert c == -(dim - 3) / (dim - 2)
        for p in sample_points(chart, 10, seed=7):
            cp = curvature_at(chart, p)
            cot = cotton_combination(cp)
            assert scale_free(cp.divweyl - c * cot, cot, cp.divweyl) < 1e-8

    def test_cotton_consistency_across_catalog(self):
        from grwcert.grw import catalog_get, catalog_names
        for name in catalog_names():
            chart = catalog_get(name).chart
            c = COTTON_COEFF[chart.n]
            for p in sample_points(chart, 5, seed=8):
                cp = curvature_at(chart, p)
                cot = cotton_combination(cp)
                assert scale_free(cp.divweyl - c * cot, cot, cp.divweyl) < 1e-8, name


class TestGradVector:
    def test_constant_field_on_minkowski(self, minkowski):
        field = VectorField(components=tuple(
            parse(s, minkowski.coordinates) for s in ("-1", "0", "0", "0")))
        nabla, dnabla = grad_vector_at(minkowski, field,
                                       ChartPoint((0.5, 0.1, 0.2, 0.3)))
        assert np.max(np.abs(nabla)) == 0.0
        assert np.max(np.abs(dnabla)) == 0.0

    def test_grw_torse_forming_gradient(self, desitter):
        field = VectorField(components=tuple(
            parse(s, desitter.coordinates) for s in ("-1", "0", "0", "0")))
        p = ChartPoint((0.25, 0.4, -0.1, 0.7))
        nabla, _ = grad_vector_at(desitter, field, p)
        q = np.exp(0.25)
        expected = warped_nabla_u(4, q, q)   # (q'/q)(g + u u) with q = e^t
        np.testing.assert_allclose(nabla, expected, atol=1e-11)

    def test_curl_component_value(self, minkowski):
        field = VectorField(components=tuple(
            parse(s, minkowski.coordinates) for s in ("-1", "t", "0", "0")))
        p = ChartPoint((1.0 - 1e-9, 0.0, 0.0, 0.0))
        nabla, _ = grad_vector_at(minkowski, field, p)
        # d_1 v_2 - d_2 v_1 = 1 exactly
        assert nabla[0, 1] - nabla[1, 0] == pytest.approx(1.0, abs=1e-14)

    def test_pointwise_field_rejected(self, minkowski):
        field = VectorField(components=None,
                            pointwise=lambda p: np.array([-1.0, 0, 0, 0]))
        with pytest.raises(PointwiseFieldError):
            grad_vector_at(minkowski, field, ChartPoint((0, 0, 0, 0)))
