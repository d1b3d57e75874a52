"""Compactified Schwinger space: corner charts for nested chains of edge
subsets, blow-down and interior-lift maps, the boundary-face decomposition
of the box [0, L]^{|edges|}, and quadrature over positive-orthant spheres.

Chart coordinates for a chain S_1 > S_2 > ... > S_m (strict inclusions):
one rho_i >= 0 per chain level, xi_e for e in S_1, and the untouched t_e
for e outside S_1.  The blow-down map is

    t_e = (prod over levels i with e in S_i of rho_i) * xi_e

and the chart carries one sphere constraint per level:

    sum over e in S_i minus S_{i+1} of xi_e^2  +  rho_{i+1}^2  =  1

(with the last level reading sum over e in S_m of xi_e^2 = 1).
"""

import math
import warnings
from collections import namedtuple

import numpy
from scipy import integrate

from .errors import (ConstraintViolated, NonPositiveT, NonConvergence,
                     EmptySubset)
from .graphs import EdgeSubset, permutation_sign

_CONSTRAINT_TOL = 1e-9


class QuadratureConfig(object):
    """Tolerances and budget for adaptive quadrature."""

    def __init__(self, rtol=1e-6, atol=1e-12, max_evals=2000000, threads=1):
        assert rtol > 0 and atol >= 0 and max_evals > 0
        self.rtol = rtol
        self.atol = atol
        self.max_evals = int(max_evals)
        self.threads = int(threads)

    def __repr__(self):
        return ("QuadratureConfig(rtol=%g, atol=%g, max_evals=%d)"
                % (self.rtol, self.atol, self.max_evals))


QuadEstimate = namedtuple("QuadEstimate", ["value", "error", "evaluations"])


### corner charts

class CornerChart(object):
    """Chart of the iterated real blow-up indexed by a strictly decreasing
    chain of nonempty edge subsets.

    >>> from .graphs import triangle
    >>> g = triangle()
    >>> chart = CornerChart(g, [g.subset([0, 1])])
    >>> chart.rho_names, chart.xi_names, chart.t_names
    (('rho1',), ('xi1', 'xi2'), ('t3',))
    """

    def __init__(self, graph, chain):
        chain = tuple(s if isinstance(s, EdgeSubset) else graph.subset(s)
                      for s in chain)
        assert chain, "empty chart chain"
        for s in chain:
            if not s.indices:
                raise EmptySubset("chart chain with empty subset")
        for a, b in zip(chain, chain[1:]):
            assert set(b.indices) < set(a.indices), \
                "chain must strictly decrease"
        self.graph = graph
        self.chain = chain
        self.rho_names = tuple("rho%d" % (i + 1) for i in range(len(chain)))
        self.xi_names = tuple("xi%d" % (e + 1) for e in chain[0].indices)
        self.t_names = tuple("t%d" % (e + 1)
                             for e in range(graph.n_edges)
                             if e not in chain[0])

    @property
    def depth(self):
        return len(self.chain)

    def levels_of_edge(self, e):
        return [i for i, s in enumerate(self.chain) if e in s]

    def constraint_residuals(self, point):
        out = []
        m = len(self.chain)
        for i in range(m):
            inner = set(self.chain[i + 1].indices) if i + 1 < m else set()
            total = sum(point["xi%d" % (e + 1)] ** 2
                        for e in self.chain[i].indices if e not in inner)
            if i + 1 < m:
                total += point["rho%d" % (i + 2)] ** 2
            out.append(total - 1.0)
        return out

    def __repr__(self):
        return "CornerChart(%r)" % ([list(s.indices) for s in self.chain],)


def blow_down(chart, point):
    """Map chart coordinates to the t-point (tuple in edge order).

    Interior iff all rho_i > 0; rho_i = 0 pins every t_e with e in S_i to 0.
    """
    g = chart.graph
    rho = []
    for name in chart.rho_names:
        v = float(point[name])
        if v < 0:
            raise ConstraintViolated("negative %s" % name)
        rho.append(v)
    for name in chart.xi_names + chart.t_names:
        if float(point[name]) < 0:
            raise ConstraintViolated("negative %s" % name)
    res = chart.constraint_residuals(point)
    if any(abs(r) > _CONSTRAINT_TOL for r in res):
        raise ConstraintViolated("sphere constraints violated: %r" % (res,))
    out = []
    s1 = set(chart.chain[0].indices)
    for e in range(g.n_edges):
        if e in s1:
            v = float(point["xi%d" % (e + 1)])
            for i in chart.levels_of_edge(e):
                v *= rho[i]
            out.append(v)
        else:
            out.append(float(point["t%d" % (e + 1)]))
    return tuple(out)


def lift_interior(t_point, chain):
    """Inverse of blow_down on the interior.

    t_point: t values in edge order (all > 0); chain: list of EdgeSubset or
    a CornerChart.  Returns the chart coordinate dict.
    """
    if isinstance(chain, CornerChart):
        chart = chain
    else:
        graph = chain[0].graph
        chart = CornerChart(graph, chain)
    t_point = tuple(float(t) for t in t_point)
    assert len(t_point) == chart.graph.n_edges
    for t in t_point:
        if t <= 0:
            raise NonPositiveT("lift_interior requires positive t")
    point = {}
    norms = []
    for s in chart.chain:
        norms.append(math.sqrt(sum(t_point[e] ** 2 for e in s.indices)))
    prev = 1.0
    for i, norm in enumerate(norms):
        point["rho%d" % (i + 1)] = norm / prev
        prev = norm
    m = len(chart.chain)
    for pos, s in enumerate(chart.chain):
        inner = set(chart.chain[pos + 1].indices) if pos + 1 < m else set()
        for e in s.indices:
            if e not in inner:
                point["xi%d" % (e + 1)] = t_point[e] / norms[pos]
    for e in range(chart.graph.n_edges):
        if e not in chart.chain[0]:
            point["t%d" % (e + 1)] = t_point[e]
    return point


### boundary decomposition

class BoundaryFace(object):
    """One face of the boundary of the compactified box [0, L]^{edges}."""

    def __init__(self, side, subset, sign, chart=None, pinned=(), L=None):
        assert side in ("origin", "outer")
        self.side = side
        self.subset = subset
        self.sign = sign
        self.chart = chart
        self.pinned = tuple(pinned)
        self.L = L

    def __repr__(self):
        return ("BoundaryFace(%s, edges=%r, sign=%+d)"
                % (self.side, list(self.subset.indices), self.sign))


def boundary_decomposition(g, L):
    """Faces of the boundary: one origin face per nonempty edge subset (in
    lexicographic subset order, signed by the complement-then-subset edge
    permutation) and one outer face per edge pinned at t_e = L (signed by
    the 1-based edge position)."""
    g.check_no_self_loops()
    g.check_connected()
    m = g.n_edges
    faces = []
    subsets = []
    for mask in range(1, 2 ** m):
        subsets.append(tuple(i for i in range(m) if mask >> i & 1))
    subsets.sort()
    for indices in subsets:
        sub = g.subset(indices)
        chart = CornerChart(g, [sub])
        faces.append(BoundaryFace("origin", sub,
                                  permutation_sign(g, sub).sign,
                                  chart=chart, pinned=(0,)))
    for e in range(m):
        faces.append(BoundaryFace("outer", g.subset([e]),
                                  (-1) ** (e + 1), L=L))
    return faces


### quadrature over the positive-orthant sphere

class _BudgetExceeded(Exception):
    pass


def _simplex_nquad(fn, dim, cfg):
    """Adaptive integral of fn(s tuple) over the open simplex
    {s_i >= 0, sum s_i <= 1} in `dim` variables."""
    counter = [0]

    def wrapped(*args):
        counter[0] += 1
        if counter[0] > cfg.max_evals:
            raise _BudgetExceeded()
        return fn(args)

    def make_range(*rest):
        return (0.0, max(0.0, 1.0 - sum(rest)))

    ranges = [make_range] * dim
    opts = {"epsabs": cfg.atol, "epsrel": cfg.rtol, "limit": 120}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.nquad(wrapped, ranges,
                                            opts=[opts] * dim)
        except _BudgetExceeded:
            raise NonConvergence(
                "quadrature budget of %d evaluations exhausted"
                % cfg.max_evals)
    return value, abserr, counter[0]


def boundary_sphere_quadrature(sub, f, cfg=None):
    """Integrate f over the positive orthant of the unit sphere in the
    xi_e coordinates of `sub`.

    f receives a tuple of xi values (in increasing edge order of sub) and
    may return float or complex.  The integral uses the substitution
    xi = s/|s| with s on the standard simplex, whose surface-measure
    Jacobian is |s|^{-|sub|}.  Raises NonConvergence when the budget runs
    out or the reported error exceeds 10x the requested tolerance.

    >>> from .graphs import bigon
    >>> g = bigon()
    >>> est = boundary_sphere_quadrature(g.full_subset(), lambda xi: 1.0)
    >>> abs(est.value - math.pi / 2) < 1e-8
    True
    """
    if cfg is None:
        cfg = QuadratureConfig()
    r = len(sub)
    if r == 0:
        raise EmptySubset("sphere quadrature over empty subset")
    if r == 1:
        return QuadEstimate(f((1.0,)), 0.0, 1)
    probe = f(tuple(1.0 / math.sqrt(r) for _ in range(r)))
    is_complex = isinstance(probe, complex)

    def xi_of(s_free):
        s = list(s_free) + [1.0 - sum(s_free)]
        if s[-1] < 0.0:
            s[-1] = 0.0
        norm = math.sqrt(sum(x * x for x in s))
        return tuple(x / norm for x in s), norm

    def real_part(s_free):
        xi, norm = xi_of(s_free)
        return (f(xi) * norm ** (-r)).real

    def imag_part(s_free):
        xi, norm = xi_of(s_free)
        return (f(xi) * norm ** (-r)).imag

    if is_complex:
        re, re_err, n1 = _simplex_nquad(real_part, r - 1, cfg)
        im, im_err, n2 = _simplex_nquad(imag_part, r - 1, cfg)
        value = complex(re, im)
        error = re_err + im_err
        evals = n1 + n2
    else:
        def scalar(s_free):
            xi, norm = xi_of(s_free)
            return f(xi) * norm ** (-r)
        value, error, evals = _simplex_nquad(scalar, r - 1, cfg)
    if error > 10.0 * max(cfg.atol, cfg.rtol * abs(value)):
        raise NonConvergence(
            "sphere quadrature error %g above tolerance (value %r)"
            % (error, value))
    return QuadEstimate(value, error, evals)


def sphere_orthant_nodes(r, order=24):
    """Fixed product Gauss-Legendre nodes and weights for the positive
    sphere orthant in r coordinates, as numpy arrays (nodes shape (N, r)).

    Non-adaptive companion to boundary_sphere_quadrature for vectorized
    scans; sum(w * f(nodes)) approximates the same integral.
    """
    assert r >= 1
    if r == 1:
        return numpy.ones((1, 1)), numpy.ones(1)
    x, w = numpy.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    grids = numpy.meshgrid(*([x] * (r - 1)), indexing="ij")
    wgrids = numpy.meshgrid(*([w] * (r - 1)), indexing="ij")
    u = [g.ravel() for g in grids]
    weight = numpy.ones_like(u[0])
    for wg in wgrids:
        weight = weight * wg.ravel()
    # map the cube to the simplex: s_j = u_j * (1 - s_1 - ... - s_{j-1})
    s = []
    remaining = numpy.ones_like(u[0])
    for j in range(r - 1):
        sj = u[j] * remaining
        weight = weight * remaining
        remaining = remaining - sj
        s.append(sj)
    s.append(remaining)
    s = numpy.stack(s, axis=1)
    norm = numpy.sqrt((s * s).sum(axis=1))
    nodes = s / norm[:, None]
    weight = weight * norm ** (-r)
    return nodes, weight
