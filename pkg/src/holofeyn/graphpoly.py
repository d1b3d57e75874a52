"""Graph polynomials: weighted Laplacian, Kirchhoff (tree) polynomial,
cut-formula inverse, discrete Green's function d^{-1}, and the corner-chart
rho-degree analysis.

Everything here is exact.  Two independent code paths are kept on purpose
and asserted against each other:

  * kirchhoff_polynomial enumerates spanning trees, while LaplacianData also
    computes det(M) by fraction-free elimination; the Kirchhoff identity
    det(M) * prod(t) = sum over trees is asserted on construction.
  * d_inverse is computed from M^{-1} and re-derived through a two-family
    cut enumeration; both the equality and the numerator-inclusion property
    (every numerator monomial, after clearing t_e, is a tree monomial with
    coefficient +-1) are asserted.
"""

from fractions import Fraction
from itertools import combinations

from .errors import EmptySubset
from .graphs import (DecoratedGraph, EdgeSubset, incidence_matrix,
                     spanning_trees, first_betti, _components_of_edges,
                     subset_components)
from .symbolic import Polynomial, RationalFunction


def t_variables(m):
    return ["t%d" % (e + 1) for e in range(m)]


### fraction-free determinant

def _bareiss_det(mat, zero, one):
    """Determinant of a square Polynomial matrix by the Bareiss algorithm.
    All intermediate divisions are exact."""
    n = len(mat)
    if n == 0:
        return one
    m = [list(row) for row in mat]
    sign = 1
    prev = None
    for k in range(n - 1):
        if m[k][k].is_zero():
            for r in range(k + 1, n):
                if not m[r][k].is_zero():
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return zero
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                m[i][j] = num if prev is None else num.exact_divide(prev)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign == 1 else det * -1


### spanning 2-forests and cut polynomials

_FOREST_CACHE = {}


def _two_forests(g):
    """All spanning 2-forests as (component_a, component_b, edge combo)."""
    key = (g.n_vertices, g.edges)
    if key in _FOREST_CACHE:
        return _FOREST_CACHE[key]
    out = []
    n = g.n_vertices
    for combo in combinations(range(g.n_edges), n - 2):
        comps = _components_of_edges([g.edges[i] for i in combo],
                                     range(1, n + 1))
        if len(comps) != 2:
            continue
        a, b = comps
        out.append((a, b, combo))
    _FOREST_CACHE[key] = out
    return out


def cut_polynomial(g, v1, v2):
    """Sum over cuts C separating v1 from v2 of the monomial prod_{e in C} t_e.
    Overlapping vertex sets give the zero polynomial (empty cut family)."""
    v1, v2 = set(v1), set(v2)
    tvars = t_variables(g.n_edges)
    p = Polynomial.zero(tvars)
    if v1 & v2:
        return p
    all_edges = frozenset(range(g.n_edges))
    terms = {}
    for a, b, combo in _two_forests(g):
        if (v1 <= a and v2 <= b) or (v1 <= b and v2 <= a):
            c = all_edges - frozenset(combo)
            exp = tuple(1 if e in c else 0 for e in range(g.n_edges))
            terms[exp] = terms.get(exp, 0) + 1
    for exp, coeff in terms.items():
        assert coeff == 1
        p = p + Polynomial(tvars, {exp: Fraction(1)})
    return p


### Laplacian data

class LaplacianData(object):
    """Weighted Laplacian M(t), its Kirchhoff polynomial, and the per-entry
    cut polynomials of the inverse.  Construction asserts the Kirchhoff
    identity det(M) * prod(t) = tree polynomial exactly."""

    def __init__(self, graph, matrix, tree_polynomial, det_polynomial,
                 cut_polynomials):
        self.graph = graph
        self.matrix = matrix
        self.tree_polynomial = tree_polynomial
        self.det_polynomial = det_polynomial
        self.cut_polynomials = cut_polynomials
        assert det_polynomial == tree_polynomial
        r = len(matrix)
        for i in range(r):
            for j in range(i):
                assert matrix[i][j] == matrix[j][i]


_LAPLACIAN_CACHE = {}


def weighted_laplacian(g):
    """M_{ij}(t) = sum_e rho^e_i (1/t_e) rho^e_j with the last vertex
    grounded, as a matrix of RationalFunction."""
    if g in _LAPLACIAN_CACHE:
        return _LAPLACIAN_CACHE[g]
    rho = incidence_matrix(g)
    n = g.n_vertices
    m = g.n_edges
    tvars = t_variables(m)
    one = Polynomial.constant(tvars, 1)
    zero = Polynomial.zero(tvars)

    def t_mono(exp_fn):
        return Polynomial(tvars,
                          {tuple(exp_fn(e) for e in range(m)): Fraction(1)})

    t_all = t_mono(lambda e: 1)

    # matrix over rational functions
    matrix = []
    for i in range(n - 1):
        row = []
        for j in range(n - 1):
            num = zero
            for e in range(m):
                if rho[e][i] and rho[e][j]:
                    coeff = rho[e][i] * rho[e][j]
                    num = num + t_mono(lambda f, e=e: 0 if f == e else 1) * coeff
            row.append(RationalFunction(num, t_all))
        matrix.append(row)

    # Kirchhoff polynomial two ways
    tree_poly = zero
    for tree in spanning_trees(g):
        inside = set(tree.indices)
        exp = tuple(0 if e in inside else 1 for e in range(m))
        tree_poly = tree_poly + Polynomial(tvars, {exp: Fraction(1)})

    # N_{ij} = M_{ij} * prod(t) is polynomial; det(N) = det(M) * prod(t)^{n-1}
    nmat = [[matrix[i][j].num * _mono_quotient(matrix[i][j].den, t_all, tvars)
             for j in range(n - 1)] for i in range(n - 1)]
    det_n = _bareiss_det(nmat, zero, one)
    det_poly = det_n.shift_exponents(tuple(n - 2 for _ in range(m))) \
        if n >= 2 else det_n
    assert all(all(x >= 0 for x in exp) for exp in det_poly.terms)

    cuts_by_entry = {}
    for i in range(n - 1):
        for j in range(i, n - 1):
            cp = cut_polynomial(g, {i + 1, j + 1}, {n})
            cuts_by_entry[(i, j)] = cp
            cuts_by_entry[(j, i)] = cp

    data = LaplacianData(g, matrix, tree_poly, det_poly, cuts_by_entry)
    _LAPLACIAN_CACHE[g] = data
    return data


def _mono_quotient(den, t_all, tvars):
    """den divides t_all as monomials; return the quotient monomial so that
    num/den * t_all = num * quotient."""
    (dexp, dcoeff), = den.terms.items()
    (aexp, _), = t_all.terms.items()
    q = tuple(a - d for a, d in zip(aexp, dexp))
    assert all(x >= 0 for x in q)
    return Polynomial(tvars, {q: Fraction(1) / dcoeff})


def kirchhoff_polynomial(g):
    """Sum over spanning trees T of prod_{e not in T} t_e."""
    return weighted_laplacian(g).tree_polynomial


_MINV_CACHE = {}


def m_inverse(g):
    """(M^{-1})^{ij} = cut_polynomial({i,j},{ground}) / kirchhoff, asserted
    against M * M^{-1} = Id exactly.  The identity is checked with cleared
    denominators (both are nonzero): for each i, l

        sum_j (M_{ij} * prod t) * cut_{jl}  =  delta_{il} * prod(t) * K,

    a pure polynomial equality, which avoids the rational-function
    normalization cost on larger graphs."""
    if g in _MINV_CACHE:
        return _MINV_CACHE[g]
    data = weighted_laplacian(g)
    n = g.n_vertices
    m = g.n_edges
    tvars = t_variables(m)
    k = data.tree_polynomial
    inv = [[RationalFunction(data.cut_polynomials[(i, j)], k)
            for j in range(n - 1)] for i in range(n - 1)]
    t_all = Polynomial(tvars, {tuple(1 for _ in range(m)): Fraction(1)})
    nmat = [[data.matrix[i][j].num
             * _mono_quotient(data.matrix[i][j].den, t_all, tvars)
             for j in range(n - 1)] for i in range(n - 1)]
    rhs = t_all * k
    zero = Polynomial.zero(tvars)
    for i in range(n - 1):
        for l in range(n - 1):
            acc = zero
            for j in range(n - 1):
                acc = acc + nmat[i][j] * data.cut_polynomials[(j, l)]
            assert acc == (rhs if i == l else zero)
    _MINV_CACHE[g] = inv
    return inv


_DINV_CACHE = {}


def d_inverse(g):
    """(d^{-1})^{ej} = (1/t_e) sum_i rho^e_i (M^{-1})^{ij}, indexed
    [edge][relative vertex].

    Asserted equal to the two-family cut formula

        ( sum over cuts separating {j, head(e)} | {ground, tail(e)}
        - sum over cuts separating {j, tail(e)} | {ground, head(e)} )
        of prod_{f in C} t_f / (t_e * kirchhoff),

    and every numerator monomial after clearing t_e is a tree monomial of
    the Kirchhoff polynomial with coefficient +-1 (so |d^{-1}| <= 2 on the
    positive orthant, each family being bounded by 1).
    """
    if g in _DINV_CACHE:
        return _DINV_CACHE[g]
    minv = m_inverse(g)
    data = weighted_laplacian(g)
    k = data.tree_polynomial
    rho = incidence_matrix(g)
    n = g.n_vertices
    m = g.n_edges
    tvars = t_variables(m)
    out = []
    for e in range(m):
        t, h = g.edges[e]
        te = Polynomial.variable(tvars, "t%d" % (e + 1))
        row = []
        for j in range(1, n):
            acc = RationalFunction(Polynomial.zero(tvars), te)
            for i in range(n - 1):
                if rho[e][i]:
                    acc = acc + minv[i][j - 1] * rho[e][i]
            entry = acc / RationalFunction(te)

            plus = cut_polynomial(g, {j, h}, {n, t})
            minus = cut_polynomial(g, {j, t}, {n, h})
            num = plus - minus
            assert entry == RationalFunction(num, te * k)

            shifted = num.shift_exponents(
                tuple(1 if f == e else 0 for f in range(m)))
            for exp, coeff in shifted.terms.items():
                assert all(x >= 0 for x in exp)
                assert exp in k.terms
                assert coeff in (1, -1)
            row.append(entry)
        out.append(row)
    _DINV_CACHE[g] = out
    return out


### corner charts over polynomials

def corner_expand(p, sub):
    """Substitute t_e -> rho * xi_e for e in sub and collect by rho-power.

    Returns a sorted list of (rho-degree, Polynomial) pairs over the
    variables (xi_e for e in sub; t_e for e not in sub).
    """
    if isinstance(sub, EdgeSubset):
        indices = set(sub.indices)
        m = sub.graph.n_edges
    else:
        indices = set(sub)
        m = len(p.vars)
    if not indices:
        raise EmptySubset("corner_expand with empty edge subset")
    assert len(p.vars) == m
    new_vars = (["rho"]
                + ["xi%d" % (e + 1) for e in sorted(indices)]
                + ["t%d" % (e + 1) for e in range(m) if e not in indices])
    var_map = {"t%d" % (e + 1): [("rho", 1), ("xi%d" % (e + 1), 1)]
               for e in indices}
    q = p.remap_exponents(new_vars, var_map)
    collected = q.collect("rho")
    return sorted(collected.items())


def min_rho_power_of_boundary(g, n, m):
    """The proof's lower bound for the leading rho-power of the origin
    boundary integrand: d|V| - (d-1)|E| - m*d - 1, with m the number of
    connected components.  Decorations do not shift the bound (each y-power
    contributes a bounded chart-smooth factor).

    >>> from .graphs import triangle, cycle, single_edge
    >>> min_rho_power_of_boundary(triangle(2), None, 1)
    0
    >>> min_rho_power_of_boundary(cycle(4, 2), None, 1)
    1
    >>> min_rho_power_of_boundary(single_edge(1), None, 1)
    0
    """
    d = g.dim
    return d * g.n_vertices - (d - 1) * g.n_edges - m * d - 1
