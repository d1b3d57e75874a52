import math
import random

import numpy
import pytest

from holofeyn.errors import (ConstraintViolated, NonPositiveT,
                             NonConvergence, EmptySubset)
from holofeyn.charts import (CornerChart, QuadratureConfig, blow_down,
                             lift_interior, boundary_decomposition,
                             boundary_sphere_quadrature,
                             sphere_orthant_nodes)
from holofeyn.graphs import single_edge, bigon, triangle


### blow-down and lift

def test_blow_down_triangle_example():
    g = triangle()
    chart = CornerChart(g, [g.subset([0, 1])])
    point = {"rho1": 2.0, "xi1": 0.6, "xi2": 0.8, "t3": 7.0}
    assert blow_down(chart, point) == (1.2, 1.6, 7.0)


def test_blow_down_rho_zero_pins_subset():
    g = triangle()
    chart = CornerChart(g, [g.full_subset()])
    s = 1.0 / math.sqrt(3.0)
    point = {"rho1": 0.0, "xi1": s, "xi2": s, "xi3": s}
    assert blow_down(chart, point) == (0.0, 0.0, 0.0)


def test_blow_down_checks_constraints():
    g = bigon()
    chart = CornerChart(g, [g.full_subset()])
    with pytest.raises(ConstraintViolated):
        blow_down(chart, {"rho1": 1.0, "xi1": 1.0, "xi2": 1.0})
    with pytest.raises(ConstraintViolated):
        blow_down(chart, {"rho1": -1.0, "xi1": 0.6, "xi2": 0.8})


def test_lift_interior_examples():
    g = bigon()
    point = lift_interior((3.0, 4.0), [g.full_subset()])
    assert point["rho1"] == 5.0
    assert point["xi1"] == 0.6 and point["xi2"] == 0.8

    g3 = triangle()
    point = lift_interior((1.0, 1.0, 1.0), [g3.subset([0, 1])])
    assert abs(point["rho1"] - math.sqrt(2)) < 1e-15
    assert abs(point["xi1"] - 1 / math.sqrt(2)) < 1e-15
    assert point["t3"] == 1.0


def test_lift_rejects_nonpositive():
    g = bigon()
    with pytest.raises(NonPositiveT):
        lift_interior((1.0, 0.0), [g.full_subset()])


def test_round_trip_random_chains():
    rng = random.Random(4)
    g = triangle()
    chains = [
        [g.full_subset()],
        [g.subset([0, 2])],
        [g.full_subset(), g.subset([0, 1])],
        [g.full_subset(), g.subset([1, 2]), g.subset([2])],
    ]
    for chain in chains:
        chart = CornerChart(g, chain)
        for _ in range(25):
            t = tuple(rng.uniform(0.05, 5.0) for _ in range(3))
            point = lift_interior(t, chart)
            assert all(abs(r) < 1e-12
                       for r in chart.constraint_residuals(point))
            back = blow_down(chart, point)
            assert max(abs(a - b) for a, b in zip(t, back)) < 1e-12


def test_chain_must_strictly_decrease():
    g = triangle()
    with pytest.raises(AssertionError):
        CornerChart(g, [g.subset([0, 1]), g.subset([0, 1])])
    with pytest.raises(EmptySubset):
        CornerChart(g, [g.subset([])])


### boundary decomposition

def test_boundary_decomposition_counts():
    assert _face_counts(single_edge()) == (1, 1)
    assert _face_counts(bigon()) == (3, 2)
    assert _face_counts(triangle()) == (7, 3)


def _face_counts(g):
    faces = boundary_decomposition(g, 1.0)
    origin = [f for f in faces if f.side == "origin"]
    outer = [f for f in faces if f.side == "outer"]
    return len(origin), len(outer)


def test_boundary_decomposition_signs():
    faces = boundary_decomposition(triangle(), 1.0)
    by_subset = {f.subset.indices: f.sign for f in faces
                 if f.side == "origin"}
    assert by_subset[(1,)] == -1
    assert by_subset[(2,)] == 1
    assert by_subset[(1, 2)] == 1
    assert by_subset[(0, 1, 2)] == 1


def test_boundary_faces_lex_order():
    faces = [f for f in boundary_decomposition(bigon(), 1.0)
             if f.side == "origin"]
    assert [f.subset.indices for f in faces] == [(0,), (0, 1), (1,)]


### sphere quadrature

def test_sphere_measure_two_coords():
    g = bigon()
    est = boundary_sphere_quadrature(g.full_subset(), lambda xi: 1.0)
    assert abs(est.value - math.pi / 2) < 1e-8


def test_sphere_measure_three_coords():
    g = triangle()
    est = boundary_sphere_quadrature(g.full_subset(), lambda xi: 1.0)
    assert abs(est.value - math.pi / 2) < 1e-7


def test_sphere_odd_function_vanishes():
    g = bigon()
    est = boundary_sphere_quadrature(g.full_subset(),
                                     lambda xi: xi[0] - xi[1])
    assert abs(est.value) < 1e-10


def test_sphere_single_coordinate_point():
    g = single_edge()
    est = boundary_sphere_quadrature(g.full_subset(), lambda xi: 3.25)
    assert est.value == 3.25 and est.error == 0.0


def test_sphere_complex_integrand():
    g = bigon()
    est = boundary_sphere_quadrature(g.full_subset(),
                                     lambda xi: complex(1.0, xi[0]))
    assert abs(est.value.real - math.pi / 2) < 1e-8
    # integral of cos(theta) over the quarter circle = 1
    assert abs(est.value.imag - 1.0) < 1e-8


def test_sphere_budget_exhaustion_raises():
    g = triangle()
    cfg = QuadratureConfig(rtol=1e-12, atol=1e-15, max_evals=50)
    with pytest.raises(NonConvergence):
        boundary_sphere_quadrature(g.full_subset(),
                                   lambda xi: math.sin(40.0 * xi[0]), cfg)


def test_sphere_nodes_match_analytic():
    for r, expect in ((2, math.pi / 2), (3, math.pi / 2),
                      (4, math.pi ** 2 / 8)):
        nodes, w = sphere_orthant_nodes(r, order=40)
        assert abs(w.sum() - expect) < 1e-6
        assert numpy.all(nodes > 0)
        assert numpy.allclose((nodes ** 2).sum(axis=1), 1.0)


def test_sphere_nodes_agree_with_adaptive():
    g = triangle()
    f = lambda xi: xi[0] ** 2 * xi[1] + 0.3 * xi[2]
    est = boundary_sphere_quadrature(g.full_subset(), f)
    nodes, w = sphere_orthant_nodes(3, order=40)
    fixed = sum(w[i] * f(tuple(nodes[i])) for i in range(len(w)))
    assert abs(est.value - fixed) < 1e-6
