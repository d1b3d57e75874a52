import cmath
import math
import random
from fractions import Fraction

import pytest
from scipy import integrate

from holofeyn.errors import (CoincidentPoints, DegreeMismatch, NonConvergence,
                             NonPositiveEpsilon, NonPositiveT, ParseError)
from holofeyn.amplitude import (ExactConst, Kernel, SchwingerIntegrand,
                                TestForm, bm_kernel, dbar_star_heat,
                                default_test_form, evaluate_W, heat_kernel,
                                mc_oracle_W, propagator_product,
                                regularized_propagator,
                                required_test_form_degree, wick_reduce)
from holofeyn.charts import QuadratureConfig
from holofeyn.graphs import DecoratedGraph, bigon, single_edge, triangle
from holofeyn.graphpoly import m_inverse
from holofeyn.symbolic import Polynomial


### kernels

def test_heat_kernel_normalizes():
    # int h(t, z) dx dy = 1 at d = 1
    t = 0.3
    val, err = integrate.dblquad(
        lambda y, x: heat_kernel(t, (complex(x, y),)),
        -9, 9, -9, 9, epsabs=1e-10)
    assert abs(val - 1.0) < 1e-6


def test_heat_kernel_rejects_bad_t():
    with pytest.raises(NonPositiveT):
        heat_kernel(0.0, (1j,))
    with pytest.raises(NonPositiveT):
        dbar_star_heat(-1.0, (1j,))


def _zbar_derivative(f, z, c, h=1e-5):
    # (d/dx + i d/dy)/2 applied to the c-th coordinate
    def shift(dz):
        zz = list(z)
        zz[c] += dz
        return f(tuple(zz))
    ddx = (shift(h) - shift(-h)) / (2 * h)
    ddy = (shift(1j * h) - shift(-1j * h)) / (2 * h)
    return 0.5 * (ddx + 1j * ddy)


@pytest.mark.parametrize("d", [1, 2])
def test_heat_form_is_closed(d):
    # d_t h + sum_c d/dzbar_c [ zbar_c h / t ] = 0, which is the
    # coefficient identity behind (d_t + dbar) P_t = 0
    rng = random.Random(7 + d)
    for _ in range(5):
        t = rng.uniform(0.2, 2.0)
        z = tuple(complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                  for _ in range(d))
        h = 1e-5
        dt = (heat_kernel(t + h, z) - heat_kernel(t - h, z)) / (2 * h)
        total = 0j
        for c in range(d):
            # unfold the stored alternating sign: this is zbar_c h / t
            def g_c(zz, c=c):
                return (-1) ** c * dbar_star_heat(t, zz)[c]
            total += _zbar_derivative(g_c, z, c)
        assert abs(dt + total) < 1e-5 * (1 + abs(dt))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_bm_kernel_homogeneity(d):
    # c_i(lam u) = lam^(1 - 2d) c_i(u) for real lam > 0
    z = tuple(complex(0.3 + c, -0.2 * c - 0.4) for c in range(d))
    w = (0j,) * d
    lam = 1.7
    a = bm_kernel(tuple(lam * x for x in z), w)
    b = bm_kernel(z, w)
    for c in range(d):
        assert abs(a[c] - lam ** (1 - 2 * d) * b[c]) < 1e-12 * abs(b[c])


def test_bm_kernel_rejects_coincident():
    with pytest.raises(CoincidentPoints):
        bm_kernel((1j,), (1j,))


@pytest.mark.parametrize("d", [1, 2])
def test_regularized_propagator_matches_t_integral(d):
    # the incomplete-gamma closed form against direct quadrature of
    # int_eps^L dbar*H dt, coefficient by coefficient
    z = tuple(complex(0.8, 0.3 * (c + 1)) for c in range(d))
    w = tuple(complex(-0.2 * c, 0.1) for c in range(d))
    eps, L = 0.05, 3.0
    closed = regularized_propagator(eps, L, z, w)
    u = tuple(z[c] - w[c] for c in range(d))
    for c in range(d):
        re, _ = integrate.quad(lambda t: dbar_star_heat(t, u)[c].real,
                               eps, L, epsabs=1e-12, epsrel=1e-10)
        im, _ = integrate.quad(lambda t: dbar_star_heat(t, u)[c].imag,
                               eps, L, epsabs=1e-12, epsrel=1e-10)
        assert abs(closed[c] - complex(re, im)) < 1e-9 * (1 + abs(closed[c]))


def test_regularized_propagator_limits():
    z, w = (0.7 - 0.4j,), (0j,)
    full = regularized_propagator(0.0, math.inf, z, w)
    assert abs(full[0] - bm_kernel(z, w)[0]) < 1e-14
    with pytest.raises(NonPositiveEpsilon):
        regularized_propagator(-0.1, 1.0, z, w)
    with pytest.raises(NonPositiveEpsilon):
        regularized_propagator(0.5, 0.5, z, w)


def test_kernel_bundle():
    k = Kernel(2)
    z = (1 + 1j, 0.5j)
    w = (0.2, -0.3 + 0.1j)
    assert k.bm(z, w) == bm_kernel(z, w)
    assert k.heat(0.4, z, w) == heat_kernel(
        0.4, tuple(z[c] - w[c] for c in range(2)))


### exact constants

def test_exact_const_arithmetic():
    i = ExactConst(0, 1)
    assert (i * i).value() == -1
    c = ExactConst(Fraction(3, 4), 0, 2) * ExactConst(0, -2, -1)
    assert c == ExactConst(0, Fraction(-3, 2), 1)
    assert abs(c.value() - complex(0, -1.5 * math.pi)) < 1e-15
    assert (c * 0).is_zero()


### test forms

def test_test_form_round_trip():
    g = triangle(2)
    phi = TestForm(2, 3, [[0.3 + 0.1j, -0.2j], [1.0, 0.5 - 0.5j]],
                   width=Fraction(1, 3), ground_width=2,
                   normalization=Fraction(7, 2),
                   poly={((1, 2, 1),): Fraction(2, 5),
                         ((1, 1, 1), (2, 2, 2)): -3},
                   selection=[(2, 1)])
    again = TestForm.from_dict(phi.to_dict())
    assert again.dim == phi.dim and again.n_vertices == phi.n_vertices
    assert again.momenta == phi.momenta
    assert again.width == phi.width
    assert again.ground_width == phi.ground_width
    assert again.normalization == phi.normalization
    assert again.poly == phi.poly
    assert again.selection == phi.selection


def test_test_form_from_dict_rejects_garbage():
    with pytest.raises(ParseError):
        TestForm.from_dict({"dim": 1})
    with pytest.raises(ParseError):
        TestForm.from_dict({"dim": 1, "vertices": 2,
                            "momenta": [[[0.1, 0.2]]], "width": "0"})
    with pytest.raises(ParseError):
        TestForm.from_dict({"dim": 1, "vertices": 2,
                            "momenta": [[[0.1, 0.2]]],
                            "selection": [[5, 1]]})


def test_dbar_adds_one_generator():
    g = single_edge()
    phi = default_test_form(g).with_selection([])
    terms = phi.dbar()
    assert len(terms) == 1
    term = terms[0]
    assert term.selection == ((1, 1),)
    # coefficient is -kbar - (a/2) w against the constant profile
    vals = {"w1_1": 0.7 + 0.2j, "wb1_1": 0.7 - 0.2j, "kb1_1": 0.3 - 0.4j}
    expect = -(0.3 - 0.4j) - 0.5 * (0.7 + 0.2j)
    assert abs(term.poly.evaluate(vals) - expect) < 1e-15


def test_dbar_of_full_selection_vanishes():
    g = single_edge()
    phi = default_test_form(g).with_selection([(1, 1)])
    assert phi.dbar() == []


### the propagator product and degrees

def test_required_degree_examples():
    assert required_test_form_degree(single_edge()) == 1
    assert required_test_form_degree(single_edge(3)) == 1
    assert required_test_form_degree(bigon()) == 1
    assert required_test_form_degree(bigon(2)) == 0
    assert required_test_form_degree(triangle()) == 2
    assert required_test_form_degree(triangle(2)) == 1
    assert required_test_form_degree(triangle(3)) == 0


def test_propagator_product_bigon_components():
    # both edges run 1 -> 2, so rho = -1 twice and each
    # dy_e = -dwb/(2 t_e) + wb dt_e/(2 t_e^2)
    g = bigon()
    el = propagator_product(g)
    vals = {"t1": 2.0, "t2": 3.0, "wb1_1": 5.0}
    c = el.extract_component(["dt1", "dwb1_1"])
    assert abs(c.evaluate(vals) - (-5.0 / 48.0)) < 1e-15
    c2 = el.extract_component(["dt1", "dt2"])
    assert abs(c2.evaluate(vals) - 25.0 / 144.0) < 1e-15


def test_propagator_product_decorations_scale():
    g0 = bigon()
    g1 = DecoratedGraph(1, 2, [(1, 2), (1, 2)], decorations=[[2], [0]])
    base = propagator_product(g0).extract_component(["dt1", "dwb1_1"])
    dec = propagator_product(g1).extract_component(["dt1", "dwb1_1"])
    vals = {"t1": 0.7, "t2": 1.3, "wb1_1": 2.0 + 1.0j}
    y1 = -vals["wb1_1"] / (2 * vals["t1"])  # tail 1, ground head dropped
    assert abs(dec.evaluate(vals) - base.evaluate(vals) * y1 ** 2) < 1e-14


### Wick reduction

def test_wick_reduce_single_edge_structure():
    g = single_edge()
    si = wick_reduce(g, None, default_test_form(g))
    assert si.den_power == 2
    vals = {"t1": 0.9}
    k = si.test_form.momenta[0][0]
    # exponent -2 k kbar t/(1 + a t), rational part const * t / (1 + a t)^2
    arg = si.exp_num.evaluate({**vals, "k1_1": k, "kb1_1": k.conjugate()})
    den = si.den_base.evaluate(vals)
    assert abs(arg / den - (-2 * k * k.conjugate() * 0.9 / 1.9)) < 1e-14


def test_wick_reduce_wrong_degree_gives_zero():
    g = triangle()   # needs degree 2
    phi = default_test_form(g).with_selection([(1, 1)])
    si = wick_reduce(g, None, phi)
    assert si.is_zero()
    assert evaluate_W(g, None, phi, 0.1, 1.0).value == 0


def test_wick_reduce_rejects_mismatched_form():
    g = triangle()
    phi = default_test_form(bigon())
    with pytest.raises(DegreeMismatch):
        wick_reduce(g, None, phi)


def test_bigon_exponent_matches_laplacian_inverse():
    # at width -> 0 the exponent is -2 kbar M^-1 k with
    # M^-1 = t1 t2 / (t1 + t2) for the bigon
    g = bigon()
    phi = default_test_form(g, width=Fraction(1, 10 ** 9))
    si = wick_reduce(g, None, phi)
    minv = m_inverse(g)[0][0]
    k = phi.momenta[0][0]
    for t1, t2 in [(0.3, 0.8), (1.5, 0.2)]:
        vals = {"t1": t1, "t2": t2, "k1_1": k, "kb1_1": k.conjugate()}
        got = si.exp_num.evaluate(vals) / si.den_base.evaluate(vals)
        want = -2 * k.conjugate() * minv.evaluate(vals) * k
        assert abs(got - want) < 1e-6 * abs(want)


def test_exponent_real_part_nonpositive():
    rng = random.Random(11)
    for g in [single_edge(), bigon(), triangle(), triangle(2)]:
        phi = default_test_form(g)
        si = wick_reduce(g, None, phi)
        for _ in range(20):
            t = tuple(rng.uniform(0.01, 10.0) for _ in range(g.n_edges))
            vals = si._values(t)
            den = si.den_base.evaluate(vals)
            assert den > 0
            assert (si.exp_num.evaluate(vals) / den).real < 1e-12


def test_exponent_vanishes_at_zero_momentum():
    g = triangle()
    phi = TestForm(1, 3, [[0.0], [0.0]])
    si = wick_reduce(g, None, phi)
    assert si.exp_num.is_zero() or all(
        abs(si.exp_num.evaluate(si._values(t))) < 1e-15
        for t in [(0.5, 1.0, 2.0)])


@pytest.mark.parametrize("g", [single_edge(), bigon(), triangle(),
                               single_edge(2), triangle(2)])
def test_rational_part_homogeneity(g):
    # with the test-form width sent to zero the rational part of the
    # integrand scales as lam^(d(n-1) - d m) under t -> lam t, and the
    # exponent argument scales as lam
    phi = default_test_form(g, width=Fraction(1, 10 ** 12))
    si = wick_reduce(g, None, phi)
    if si.is_zero():
        pytest.skip("degenerate pairing")
    lam = 1.7
    rng = random.Random(5)
    t = tuple(rng.uniform(0.3, 2.0) for _ in range(g.n_edges))
    ts = tuple(lam * x for x in t)

    def rational(tv):
        vals = si._values(tv)
        return si.num.evaluate(vals) / si.den_base.evaluate(vals) \
            ** si.den_power

    def exponent(tv):
        vals = si._values(tv)
        return si.exp_num.evaluate(vals) / si.den_base.evaluate(vals)

    deg = g.dim * (g.n_vertices - 1) - g.dim * g.n_edges
    assert abs(rational(ts) - lam ** deg * rational(t)) \
        < 1e-9 * abs(rational(t))
    assert abs(exponent(ts) - lam * exponent(t)) < 1e-9 * abs(exponent(t))


def test_wick_reduce_kills_position_variables():
    for g in [bigon(), triangle(), triangle(2)]:
        si = wick_reduce(g, None, default_test_form(g))
        for poly in [si.num, si.exp_num, si.den_base]:
            for name in poly.vars:
                if name.startswith("w"):
                    i = poly.vars.index(name)
                    assert all(exp[i] == 0 for exp in poly.terms)


### the single-edge anchor

def _single_edge_closed_form(phi, eps, L):
    # W(eps, L) = N * (8 pi / (g kbar)) [e^{-2 k kbar u(eps)} - e^{-2 k kbar u(L)}]
    # with u(x) = x / (1 + a x); direct t-integration of the reduced
    # integrand, derived by hand from the position-space pairing
    k = phi.momenta[0][0]
    kb = k.conjugate()
    a = float(phi.width)
    gw = float(phi.ground_width)
    N = float(phi.normalization)

    def u(x):
        return 1.0 / a if math.isinf(x) else x / (1.0 + a * x)
    return N * (8.0 * math.pi / (gw * kb)) * \
        (cmath.exp(-2 * k * kb * u(eps)) - cmath.exp(-2 * k * kb * u(L)))


@pytest.mark.parametrize("eps,L", [(0.1, 1.0), (0.0, 1.0), (0.25, 7.0),
                                   (0.0, math.inf), (0.5, math.inf)])
def test_single_edge_anchor(eps, L):
    g = single_edge()
    phi = default_test_form(g, width=Fraction(2, 3), ground_width=Fraction(3))
    res = evaluate_W(g, None, phi, eps, L)
    ref = _single_edge_closed_form(phi, eps, L)
    assert abs(res.value - ref) < 1e-9 * abs(ref)
    assert res.error < 1e-6 * abs(ref) + 1e-12


### evaluation routes

def test_polar_route_matches_box_route():
    for g in [bigon(), triangle()]:
        phi = default_test_form(g)
        polar = evaluate_W(g, None, phi, 0.0, 1.0)
        box = evaluate_W(g, None, phi, 1e-6, 1.0)
        # the box misses the [0, 1e-6] slivers, so agreement is limited
        # by that mass, not by quadrature error
        assert abs(polar.value - box.value) < 1e-4 * abs(polar.value)


def test_refinement_stability():
    # W(eps, L) approaches the eps = 0 value monotonically once eps is
    # small; the rate is slower than linear (single-edge subgraphs are
    # marginal at d = 1 and contribute eps log eps shells)
    g = bigon()
    phi = default_test_form(g)
    w0 = evaluate_W(g, None, phi, 0.0, 1.5).value
    gaps = [abs(evaluate_W(g, None, phi, eps, 1.5).value - w0)
            for eps in (0.2, 0.1, 0.05)]
    assert gaps[2] < gaps[1] < gaps[0]


def test_short_circuit_matches_direct_quadrature():
    g = bigon(2)
    phi = default_test_form(g)
    fast = evaluate_W(g, None, phi, 0.1, 1.0)
    assert fast.value == 0 and fast.evaluations == 0
    slow = evaluate_W(g, None, phi, 0.1, 1.0, short_circuit=False)
    assert abs(slow.value) < 1e-6


def test_evaluate_rejects_bad_range():
    g = single_edge()
    phi = default_test_form(g)
    with pytest.raises(NonPositiveEpsilon):
        evaluate_W(g, None, phi, -0.1, 1.0)
    with pytest.raises(NonPositiveEpsilon):
        evaluate_W(g, None, phi, 1.0, 0.5)


def test_evaluate_raises_on_tiny_budget():
    g = triangle()
    phi = default_test_form(g)
    cfg = QuadratureConfig(max_evals=50)
    with pytest.raises(NonConvergence):
        evaluate_W(g, None, phi, 0.1, 1.0, cfg)


### Monte Carlo oracle

def test_mc_oracle_needs_positive_eps():
    g = single_edge()
    with pytest.raises(NonPositiveEpsilon):
        mc_oracle_W(g, None, default_test_form(g), 0.0, 1.0, samples=10)


def test_mc_oracle_deterministic_across_threads():
    g = bigon()
    phi = default_test_form(g)
    r1 = mc_oracle_W(g, None, phi, 0.1, 1.0, samples=150000, seed=42,
                     threads=1)
    r4 = mc_oracle_W(g, None, phi, 0.1, 1.0, samples=150000, seed=42,
                     threads=4)
    assert r1.value == r4.value and r1.error == r4.error
    other = mc_oracle_W(g, None, phi, 0.1, 1.0, samples=150000, seed=43)
    assert other.value != r1.value


@pytest.mark.parametrize("g,samples", [
    (single_edge(), 200000),
    (bigon(), 200000),
    (triangle(), 200000),
    (DecoratedGraph(1, 2, [(1, 2), (2, 1)], decorations=[[1], [0]]), 400000),
])
def test_mc_oracle_agrees_with_quadrature(g, samples):
    phi = default_test_form(g)
    quad = evaluate_W(g, None, phi, 0.1, 1.0)
    mc = mc_oracle_W(g, None, phi, 0.1, 1.0, samples=samples, seed=7,
                     threads=2)
    assert abs(quad.value - mc.value) < 3.0 * mc.error


def test_mc_oracle_degenerate_graph_is_exact_zero():
    g = bigon(2)
    res = mc_oracle_W(g, None, default_test_form(g), 0.1, 1.0, samples=10)
    assert res.value == 0 and res.error == 0
