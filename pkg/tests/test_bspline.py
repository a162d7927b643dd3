"""Tests for the univariate/tensor B-spline kernel."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from c2patch.bspline import (KnotVector, SplineFunction1D, SplineSpace1D,
                             TensorSplineSpace, elevate_multiplicity,
                             eval_tensor, insert_knot, make_knot_vector,
                             refine_to, uniform_inner_knots, unit_spline)


def space(p, r, k, inner=None):
    inner = uniform_inner_knots(k) if inner is None else inner
    return SplineSpace1D(make_knot_vector(p, r, k, inner))


class TestKnotVector:
    def test_t3_52_matches_listed_vector(self):
        kv = make_knot_vector(5, 2, 3, (0.25, 0.5, 0.75))
        expect = [0.0] * 6 + [0.25] * 3 + [0.5] * 3 + [0.75] * 3 + [1.0] * 6
        assert_allclose(kv.knots, expect)
        assert kv.dim == 15

    def test_no_interior_knots_is_polynomial_space(self):
        kv = make_knot_vector(5, 2, 0)
        assert_allclose(kv.knots, [0.0] * 6 + [1.0] * 6)
        assert kv.dim == 6

    def test_single_knot_multiplicity_three(self):
        kv = make_knot_vector(6, 3, 1, (0.5,))
        assert kv.multiplicities == (7, 3, 7)
        assert kv.dim == 10

    def test_dimension_formula(self):
        for p, r, k in [(5, 2, 3), (6, 3, 2), (7, 4, 1), (5, 2, 0)]:
            kv = make_knot_vector(p, r, k, uniform_inner_knots(k))
            assert kv.dim == p + 1 + k * (p - r)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            make_knot_vector(5, 5, 0)
        with pytest.raises(ValueError):
            make_knot_vector(5, 2, 2, (0.5, 0.25))
        with pytest.raises(ValueError):
            make_knot_vector(5, 2, 1, (1.5,))
        with pytest.raises(ValueError):
            KnotVector(5, (0.0, 0.5, 1.0), (6, 6, 6))

    def test_elevate_single(self):
        kv = make_knot_vector(5, 2, 3, (0.25, 0.5, 0.75))
        up = elevate_multiplicity(kv, 1, 1)
        assert up.multiplicities == (6, 4, 3, 3, 6)
        assert up.dim == kv.dim + 1

    def test_elevate_twice_drops_smoothness(self):
        kv = make_knot_vector(5, 2, 3, (0.25, 0.5, 0.75))
        up = elevate_multiplicity(kv, 2, 2)
        assert up.multiplicities == (6, 3, 5, 3, 6)
        assert up.dim == kv.dim + 2

    def test_elevate_composition_matches_direct(self):
        kv = make_knot_vector(5, 4, 3, (0.25, 0.5, 0.75))
        two = elevate_multiplicity(elevate_multiplicity(kv, 1, 1), 3, 1)
        direct = KnotVector(5, kv.breakpoints, (6, 2, 1, 2, 6))
        assert two == direct

    def test_elevate_overflow(self):
        kv = make_knot_vector(5, 2, 1, (0.5,))
        with pytest.raises(ValueError):
            elevate_multiplicity(kv, 1, 3)


class TestBasisEvaluation:
    def test_partition_of_unity(self):
        rng = np.random.default_rng(17)
        for p, r, k in [(5, 2, 3), (6, 3, 2), (3, 1, 4)]:
            s = space(p, r, k)
            for x in rng.uniform(0.0, 1.0, 1000):
                _, d = s.eval_basis(x, 1)
                assert abs(d[0].sum() - 1.0) < 1e-12
                assert abs(d[1].sum()) < 1e-9

    def test_endpoint_derivatives(self):
        # first/second derivatives of the first basis functions at 0
        s = space(5, 2, 3, (0.25, 0.5, 0.75))
        p, tau1 = 5, 0.25
        first, d = s.eval_basis(0.0, 2)
        assert first == 0
        assert d[0][0] == pytest.approx(1.0)
        assert d[1][0] == pytest.approx(-p / tau1)
        assert d[1][1] == pytest.approx(p / tau1)
        assert d[2][0] == pytest.approx(p * (p - 1) / tau1 ** 2)
        assert d[2][1] == pytest.approx(-2 * p * (p - 1) / tau1 ** 2)
        assert d[2][2] == pytest.approx(p * (p - 1) / tau1 ** 2)

    def test_local_support_and_nonnegativity(self):
        s = space(5, 2, 3)
        t = s.knots
        xs = np.linspace(0, 1, 101)
        vals = np.zeros((len(xs), s.dim))
        for i, x in enumerate(xs):
            first, d = s.eval_basis(x)
            vals[i, first:first + 6] = d[0]
        assert (vals >= -1e-14).all()
        for j in range(s.dim):
            outside = (xs < t[j] - 1e-12) | (xs > t[j + 6] + 1e-12)
            assert np.abs(vals[outside, j]).max(initial=0.0) == 0.0

    def test_derivatives_match_finite_differences(self):
        s = space(5, 2, 2, (0.3, 0.7))
        c = rng_coeffs(s)
        f = SplineFunction1D(s, c)
        h = 1e-5
        for x in (0.12, 0.44, 0.61, 0.93):
            d1 = (f(x + h) - f(x - h)) / (2 * h)
            d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
            assert abs(f(x, 1) - d1) < 1e-6 * max(1, abs(d1))
            assert abs(f(x, 2) - d2) < 1e-5 * max(1, abs(d2))

    def test_high_order_derivatives_vanish(self):
        s = space(3, 2, 0)
        _, d = s.eval_basis(0.4, 5)
        assert np.abs(d[4]).max() == 0.0
        assert np.abs(d[5]).max() == 0.0

    def test_smoothness_jumps_at_knots(self):
        # C^{p-m} at a knot of multiplicity m: jumps vanish up to p-m,
        # the next order jumps for at least one basis function
        kv = elevate_multiplicity(make_knot_vector(5, 2, 3, (0.25, 0.5, 0.75)), 2, 1)
        s = SplineSpace1D(kv)
        tau, mult = 0.5, 4
        for order in range(5 - mult + 1):
            jump = _basis_jumps(s, tau, order)
            scale = max(1.0, _jump_scale(s, tau, order))
            assert np.abs(jump).max() / scale < 1e-9
        jump = _basis_jumps(s, tau, 5 - mult + 1)
        assert np.abs(jump).max() > 1e-6 * _jump_scale(s, tau, 5 - mult + 1)

    def test_out_of_range(self):
        s = space(5, 2, 0)
        with pytest.raises(ValueError):
            s.eval_basis(1.5)


def _basis_jumps(s, tau, order):
    jumps = np.zeros(s.dim)
    fr = s.find_span(tau, "right") - s.degree
    _, dr = s.eval_basis(tau, order, side="right")
    fl = s.find_span(tau, "left") - s.degree
    _, dl = s.eval_basis(tau, order, side="left")
    jumps[fr:fr + s.degree + 1] += dr[order]
    jumps[fl:fl + s.degree + 1] -= dl[order]
    return jumps


def _jump_scale(s, tau, order):
    _, dr = s.eval_basis(tau, order, side="right")
    _, dl = s.eval_basis(tau, order, side="left")
    return max(np.abs(dr[order]).max(), np.abs(dl[order]).max())


def rng_coeffs(s, seed=0):
    return np.random.default_rng(seed).standard_normal(s.dim)


class TestGreville:
    def test_polynomial_space(self):
        s = space(5, 4, 0)
        assert_allclose(s.greville(), [0, 0.2, 0.4, 0.6, 0.8, 1.0])

    def test_t3_52_values(self):
        s = space(5, 2, 3, (0.25, 0.5, 0.75))
        g = s.greville()
        assert len(g) == 15
        assert_allclose(g[:3], [0.0, 1 / 20, 1 / 10])
        assert g[-1] == pytest.approx(1.0)

    def test_strictly_increasing_for_moderate_multiplicity(self):
        for p, r, k in [(5, 2, 3), (6, 3, 2), (5, 4, 4)]:
            s = space(p, r, k)
            g = s.greville()
            assert (np.diff(g) > 0).all()


class TestInterpolation:
    def test_constants(self):
        s = space(5, 2, 3)
        c = s.interpolate(np.ones(s.dim))
        assert_allclose(c, 1.0, atol=1e-13)

    def test_linear_precision(self):
        s = space(5, 2, 2, (0.4, 0.7))
        xi = s.greville()
        c = s.interpolate(xi)
        assert_allclose(c, xi, atol=1e-13)

    def test_round_trip(self):
        s = space(5, 2, 3)
        c = rng_coeffs(s, 3)
        vals = s.eval_function(c, s.greville())[0]
        assert np.abs(s.interpolate(vals) - c).max() < 1e-12


class TestTensor:
    def test_constant(self):
        s = space(5, 2, 1, (0.5,))
        ts = TensorSplineSpace(s, s)
        coeffs = np.ones(ts.shape)
        for u, v in [(0.0, 0.3), (0.7, 0.7), (1.0, 1.0)]:
            assert eval_tensor(ts, coeffs, u, v) == pytest.approx(1.0)

    def test_separable(self):
        s = space(5, 2, 1, (0.5,))
        ts = TensorSplineSpace(s, s)
        cu, cv = rng_coeffs(s, 1), rng_coeffs(s, 2)
        coeffs = np.outer(cu, cv)
        fu = SplineFunction1D(s, cu)
        fv = SplineFunction1D(s, cv)
        for u, v in [(0.1, 0.9), (0.55, 0.2)]:
            assert eval_tensor(ts, coeffs, u, v) == pytest.approx(
                float(fu(u)) * float(fv(v)))
            assert eval_tensor(ts, coeffs, u, v, du=1) == pytest.approx(
                float(fu(u, 1)) * float(fv(v)))

    def test_linear_precision_derivative(self):
        s = space(5, 2, 1, (0.5,))
        ts = TensorSplineSpace(s, s)
        xi = s.greville()
        coeffs = np.tile(s.interpolate(xi)[:, None], (1, s.dim))
        assert eval_tensor(ts, coeffs, 0.3, 0.8, du=1) == pytest.approx(1.0)
        assert eval_tensor(ts, coeffs, 0.3, 0.8, dv=1) == pytest.approx(0.0, abs=1e-12)


class TestInsertion:
    def test_single_insertion_preserves_function(self):
        s = space(5, 2, 2, (0.3, 0.6))
        c = rng_coeffs(s, 5)
        kv2, c2 = insert_knot(s.kv, c, 0.45)
        s2 = SplineSpace1D(kv2)
        assert kv2.dim == s.dim + 1
        for x in np.linspace(0, 1, 17):
            assert s2.eval_function(c2, [x])[0, 0] == pytest.approx(
                s.eval_function(c, [x])[0, 0], abs=1e-12)

    def test_refine_to_dyadic(self):
        s = space(5, 2, 0)
        c = rng_coeffs(s, 6)
        target = make_knot_vector(5, 2, 3, uniform_inner_knots(3))
        c2 = refine_to(s.kv, target, c)
        s2 = SplineSpace1D(target)
        for x in np.linspace(0, 1, 17):
            assert s2.eval_function(c2, [x])[0, 0] == pytest.approx(
                s.eval_function(c, [x])[0, 0], abs=1e-12)

    def test_refine_to_rejects_coarsening(self):
        fine = make_knot_vector(5, 2, 3, uniform_inner_knots(3))
        coarse = make_knot_vector(5, 2, 1, (0.5,))
        with pytest.raises(ValueError):
            refine_to(fine, coarse, np.zeros(fine.dim))


knot_counts = st.integers(min_value=0, max_value=4)
degrees = st.integers(min_value=1, max_value=7)


@st.composite
def random_spaces(draw):
    p = draw(degrees)
    r = draw(st.integers(min_value=0, max_value=p - 1))
    k = draw(knot_counts)
    inner = sorted(draw(st.lists(
        st.floats(min_value=0.05, max_value=0.95), min_size=k, max_size=k,
        unique=True)))
    if any(b - a < 1e-3 for a, b in zip(inner, inner[1:])):
        inner = [(i + 1) / (k + 1) for i in range(k)]
    return SplineSpace1D(make_knot_vector(p, r, k, inner))


@given(random_spaces(), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=60, deadline=None)
def test_property_partition_of_unity(s, x):
    _, d = s.eval_basis(x)
    assert abs(d[0].sum() - 1.0) < 1e-12


@given(random_spaces())
@settings(max_examples=40, deadline=None)
def test_property_greville_round_trip(s):
    c = np.random.default_rng(11).standard_normal(s.dim)
    vals = s.eval_function(c, s.greville())[0]
    assert np.abs(s.interpolate(vals) - c).max() < 1e-10 * max(
        1.0, np.abs(c).max())


@given(random_spaces())
@settings(max_examples=40, deadline=None)
def test_property_insertion_dimension(s):
    new = 0.37
    if s.kv.multiplicity_of(new) >= s.degree:
        return
    kv2, _ = insert_knot(s.kv, np.zeros(s.dim), new)
    assert kv2.dim == s.dim + 1


def test_unit_spline():
    s = space(5, 2, 1, (0.5,))
    f = unit_spline(s, 3)
    first, d = s.eval_basis(0.3)
    assert f(0.3) == pytest.approx(d[0][3 - first])


def test_functional_wrappers():
    from c2patch.bspline import (eval_basis, greville_abscissae,
                                 interpolate_at_greville)
    s = space(5, 2, 1, (0.5,))
    first, d = eval_basis(s, 0.25, 1)
    assert d.shape == (2, 6)
    xi = greville_abscissae(s)
    assert_allclose(xi, s.greville())
    f = interpolate_at_greville(s, xi)
    assert f(0.37) == pytest.approx(0.37)  # linear precision
