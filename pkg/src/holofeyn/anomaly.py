"""Boundary faces of the Schwinger orthant and the operators they carry.

After the position integrals a graph pairing lives on the orthant
t_e > 0 of Schwinger parameters.  Its boundary stratum at t -> 0 is the
sphere of simultaneous collapse directions, and the pairing of the
lower-degree components of the propagator product with that sphere
either vanishes for reasons visible on the graph or concentrates to a
constant-coefficient differential operator in the holomorphic
derivatives at coincident points.  This module

  * decides the vanishing exactly (`anomaly_vanishes_exactly`), with an
    integer certificate: a too-dense connected edge subset kills the
    pairing identically, and otherwise the leftover radial power is
    positive exactly when the edge count is slack;
  * computes the collapse-sphere pairing numerically for any test form
    (`face_integral`);
  * extracts the induced operator for a Laman graph as a table of
    momentum monomials (`anomaly_symbol`) and applies such a table to a
    test form (`o_apply`);
  * assembles the signed sum of corner pairings over the Laman
    subgraphs of a larger graph (`quadratic_residual`), whose
    cancellation exercises every orientation convention in the package
    at once;
  * measures the outer faces t_e = L (`outer_boundary_decay`), which
    die off as L grows, so nothing accumulates at infinity.

The radial limits are taken symbolically, by filtering the exact
numerator, denominator, and exponent polynomials to their leading
graded parts in the collapsing slots; quadrature only ever sees the
finite limit function on the sphere.
"""

import cmath
import itertools
import math
from collections import namedtuple

from .amplitude import (IntegralResult, TestForm, _block,
                        _check_decorations, _complex_nquad,
                        _resolve_selection, component_reduce)
from .charts import QuadratureConfig, boundary_sphere_quadrature
from .errors import DegreeMismatch, NotLaman
from .graphs import (EdgeSubset, _components_of_edges,
                     _connected_edge_subsets, _mask_stats, _sparsity_ok,
                     is_laman, laman_subgraphs, permutation_sign)
from .symbolic import Polynomial, permutation_parity

### exact vanishing certificates

# Pairing the collapse sphere with an ascending wedge of dt's produces,
# per missing edge e, the surface measure weighted by (-1)^e xi_e; the
# overall boundary orientation of the orthant at t -> 0 contributes one
# more global sign.  Calibrated once against the single-edge heat
# concentration limit (see tests); every other sign in this module is
# relative to this one.
_FACE_SIGN = -1

VanishingResult = namedtuple("VanishingResult",
                             ["vanishes", "power", "witness"])


def radial_power(g, dim=None):
    """Net power of the radial variable in the full-collapse face
    integrand after the position integrals:

        d |V| - (d - 1) |E| - (d + 1) * (number of components).

    Nonnegative whenever every connected subgraph is sparse, zero
    exactly for disjoint unions of Laman graphs, and any positive value
    makes the radial limit vanish.

    >>> from .graphs import triangle, single_edge, cycle
    >>> radial_power(triangle(), 1)
    1
    >>> radial_power(single_edge())
    0
    >>> radial_power(cycle(4, 2))
    1
    >>> radial_power(triangle(2))
    0
    """
    d = g.dim if dim is None else dim
    comps = _components_of_edges(list(g.edges), range(1, g.n_vertices + 1))
    return d * g.n_vertices - (d - 1) * g.n_edges - (d + 1) * len(comps)


def anomaly_vanishes_exactly(g, n=None, dim=None):
    """Exact decision for the vanishing of the full-collapse pairing.

    Returns VanishingResult(vanishes, power, witness).  `witness`, when
    not None, is a connected edge subset with d|V'| < (d-1)|E'| + d + 1;
    its presence makes the relevant component of the propagator product
    identically zero before any limit is taken.  Without a witness the
    pairing vanishes if and only if `power` (see radial_power) is
    positive.  Decorations n are validated but do not affect the
    decision.

    >>> from .graphs import triangle, bigon, single_edge
    >>> anomaly_vanishes_exactly(triangle(), dim=1)
    VanishingResult(vanishes=True, power=1, witness=None)
    >>> anomaly_vanishes_exactly(single_edge()).vanishes
    False
    >>> anomaly_vanishes_exactly(bigon(2)).witness.indices
    (0, 1)
    >>> anomaly_vanishes_exactly(triangle(2)).vanishes
    False
    """
    d = g.dim if dim is None else dim
    g.check_no_self_loops()
    _check_decorations(g, n)
    best = None
    for mask in _connected_edge_subsets(g):
        snv, sne = _mask_stats(g, mask)
        if not _sparsity_ok(d, snv, sne):
            idx = tuple(i for i in range(g.n_edges) if mask >> i & 1)
            if best is None or idx < best:
                best = idx
    power = radial_power(g, d)
    if best is not None:
        return VanishingResult(True, power, EdgeSubset(g, best))
    return VanishingResult(power > 0, power, None)


### symbolic radial limits

def _graded_min(poly, positions):
    """Minimum total degree over the given variable positions, or None
    for the zero polynomial."""
    if poly is None or not poly.terms:
        return None
    return min(sum(exp[p] for p in positions) for exp in poly.terms)


def _graded_part(poly, positions, degree):
    """Subpolynomial of the terms with the given total degree in the
    given variable positions."""
    terms = {exp: c for exp, c in poly.terms.items()
             if sum(exp[p] for p in positions) == degree}
    return Polynomial(poly.vars, terms)


def _staged_limit(si, stages):
    """Iterated radial limit of the integrand, as a callable on a full
    variable dictionary, or None when the limit is identically zero.

    Each stage is (edge indices, power): the matching Schwinger slots
    are scaled to zero a full order faster than everything after them,
    weighted by rho^power, where `power` must count the collapsing dt's
    of the paired component (one less than the collapsing edges).  A
    single stage over all edges is the face limit; a stage for a
    subgraph followed by one for its complement is the corner where the
    subgraph collapses first.  Filtering keeps, per stage, the leading
    graded parts of the numerator, denominator, and exponent in the
    collapsing slots.  Sparsity of each collapsing subgraph makes the
    limit finite; that is asserted, not handled.
    """
    vars_ = si.num.vars
    num, den, expn = si.num, si.den_base, si.exp_num
    pw = si.den_power
    for collapse, power in stages:
        tpos = [vars_.index("t%d" % (e + 1)) for e in collapse]
        dmin = _graded_min(den, tpos)
        assert dmin is not None
        den = _graded_part(den, tpos, dmin)
        target = dmin * pw - power
        nmin = _graded_min(num, tpos)
        assert nmin >= target, "radial limit diverges: the collapse is " \
            "denser than the sparsity count allows"
        if nmin > target:
            return None
        num = _graded_part(num, tpos, target)
        if num.is_zero():
            return None
        if expn is not None:
            emin = _graded_min(expn, tpos)
            assert emin is None or emin >= dmin, \
                "exponent diverges at the collapse"
            part = _graded_part(expn, tpos, dmin)
            expn = None if part.is_zero() else part
    cval = si.constant.value()
    den0, low, exp0 = den, num, expn

    def limit(vals):
        d = den0.evaluate(vals)
        out = cval * low.evaluate(vals) / d ** pw
        if exp0 is not None:
            out = out * cmath.exp(exp0.evaluate(vals) / d)
        return out

    return limit


def _momentum_values(phi):
    vals = {}
    for i in range(1, phi.n_vertices):
        for c in range(1, phi.dim + 1):
            z = complex(phi.momenta[i - 1][c - 1])
            vals["k%d_%d" % (i, c)] = z
            vals["kb%d_%d" % (i, c)] = z.conjugate()
    return vals


def _face_pieces(g, n, phi):
    """One entry per surviving missing edge of the full-collapse face:
    (missing edge index, orientation sign, radial limit callable)."""
    m = g.n_edges
    pieces = []
    for eh in range(m):
        keep = tuple(e for e in range(m) if e != eh)
        si = component_reduce(g, n, phi, keep)
        if si.is_zero():
            continue
        lim = _staged_limit(si, [(tuple(range(m)), m - 1)])
        if lim is None:
            continue
        pieces.append((eh, (-1) ** eh, lim))
    return pieces


def face_integral(g, n=None, phi=None, cfg=None, rho=None):
    """Pairing of the test form with the full collapse sphere t -> 0.

    Integrates the radial limits of the one-dt-short components of the
    propagator product over the positive sphere in the Schwinger
    parameters.  Exact zero components are skipped, so a vanishing
    certificate (see anomaly_vanishes_exactly) makes this return an
    exact 0 without quadrature.

    With `rho` the radial limit is not taken: the face integrand is
    evaluated at t = rho xi with the measure weight rho^(|E|-1), which
    is the quantity the limit formalizes.  It converges to the default
    value as rho -> 0 and gives certificate-free numerical evidence for
    the vanishing decisions, since nothing is skipped on exactness
    grounds.
    """
    assert phi is not None
    g.check_no_self_loops()
    g.check_connected()
    if cfg is None:
        cfg = QuadratureConfig()
    m = g.n_edges
    count = [0]
    if rho is not None:
        rho = float(rho)
        assert rho > 0.0
        sis = []
        for eh in range(m):
            keep = tuple(e for e in range(m) if e != eh)
            si = component_reduce(g, n, phi, keep)
            if not si.is_zero():
                sis.append((eh, (-1) ** eh, si))
        if not sis:
            return IntegralResult(0j, 0.0, 0)
        weight = rho ** (m - 1)

        def f_rho(xi):
            count[0] += 1
            ts = tuple(rho * x for x in xi)
            total = 0j
            for eh, sgn, si in sis:
                total += sgn * xi[eh] * complex(si.evaluate(ts))
            return _FACE_SIGN * weight * total

        est = boundary_sphere_quadrature(g.full_subset(), f_rho, cfg)
        return IntegralResult(est.value, est.error, count[0])
    pieces = _face_pieces(g, n, phi)
    if not pieces:
        return IntegralResult(0j, 0.0, 0)
    kv = _momentum_values(phi)

    def f(xi):
        count[0] += 1
        vals = dict(kv)
        for e in range(m):
            vals["t%d" % (e + 1)] = xi[e]
        total = 0j
        for eh, sgn, lim in pieces:
            total += sgn * xi[eh] * lim(vals)
        return _FACE_SIGN * total

    est = boundary_sphere_quadrature(g.full_subset(), f, cfg)
    return IntegralResult(est.value, est.error, count[0])


### the induced operator of a Laman graph

def _momentum_names(d, nv):
    return _block("k", nv, d)


class AnomalySymbol(object):
    """The full-collapse pairing of a Laman graph as an operator.

    `coeffs` maps exponent tuples over the flattened momentum block
    (k1_1 .. k{n-1}_d) to complex numbers; the pairing with a test form
    is recovered by trading each momentum factor for the matching
    holomorphic derivative at the grounded coincident point (o_apply).
    Every key has the same total degree `order`, which counts the edge
    decorations plus edges minus one.
    """

    def __init__(self, dim, n_vertices, coeffs, error=0.0, evaluations=0):
        self.dim = dim
        self.n_vertices = n_vertices
        self.coeffs = dict(coeffs)
        self.error = error
        self.evaluations = evaluations
        orders = set(sum(a) for a in self.coeffs)
        assert len(orders) <= 1, "mixed-order symbol"
        self.order = orders.pop() if orders else 0
        for a in self.coeffs:
            assert len(a) == dim * (n_vertices - 1)

    def evaluate(self, momenta):
        """Value of the symbol on flattened complex momenta (one row per
        relative vertex, as in TestForm)."""
        flat = [complex(momenta[i][c]) for i in range(self.n_vertices - 1)
                for c in range(self.dim)]
        total = 0j
        for a, s in self.coeffs.items():
            term = s
            for j, e in enumerate(a):
                if e:
                    term = term * flat[j] ** e
            total += term
        return total

    def items(self):
        return sorted(self.coeffs.items())

    def to_dict(self):
        names = _momentum_names(self.dim, self.n_vertices)
        coeffs = []
        for a, s in self.items():
            mono = " ".join("%s^%d" % (names[j], e) if e > 1 else names[j]
                            for j, e in enumerate(a) if e) or "1"
            coeffs.append({"monomial": mono, "re": s.real, "im": s.imag})
        return {"dim": self.dim, "vertices": self.n_vertices,
                "order": self.order, "error": self.error,
                "coefficients": coeffs}


def anomaly_symbol(g, n=None, cfg=None, dim=None):
    """Extract the operator induced by the full collapse of a Laman
    graph, as an AnomalySymbol.

    The graph must be connected and Laman for its own dimension (pass
    `dim` only as a cross-check); otherwise NotLaman is raised, since a
    non-Laman collapse induces the zero operator and has no symbol
    worth tabulating.  The extraction pairs a plane-wave form, keeps
    the momenta symbolic through the radial limit, and integrates each
    momentum coefficient over the collapse sphere separately, so the
    result is exact in the momenta.  The coefficients do not depend on
    the test form width, and the antiholomorphic momenta drop out;
    both facts are asserted.

    >>> from .graphs import single_edge
    >>> sym = anomaly_symbol(single_edge())
    >>> sym.order
    0
    >>> abs(sym.coeffs[(0,)] - 2j) < 1e-12
    True
    """
    g.check_no_self_loops()
    g.check_connected()
    if dim is not None and dim != g.dim:
        raise DegreeMismatch("symbol requested for d=%d but the graph "
                             "carries d=%d" % (dim, g.dim))
    d, nv, m = g.dim, g.n_vertices, g.n_edges
    res = is_laman(g, d)
    if not res.is_laman:
        raise NotLaman("the collapse of this graph induces the zero "
                       "operator; no symbol to extract")
    n = _check_decorations(g, n)
    order = sum(sum(row) for row in n) + m - 1
    phi = TestForm(d, nv, [[0j] * d for _ in range(nv - 1)])
    knames = _momentum_names(d, nv)
    kbnames = _block("kb", nv, d)

    # one rational function of t per missing edge and momentum monomial
    by_alpha = {}
    for eh in range(m):
        keep = tuple(e for e in range(m) if e != eh)
        si = component_reduce(g, None if n is None else n, phi, keep)
        if si.is_zero():
            continue
        vars_ = si.num.vars
        tpos = [vars_.index("t%d" % (e + 1)) for e in range(m)]
        kpos = [vars_.index(name) for name in knames]
        kbpos = [vars_.index(name) for name in kbnames]
        dmin = _graded_min(si.den_base, tpos)
        den0 = _graded_part(si.den_base, tpos, dmin)
        target = dmin * si.den_power - (m - 1)
        nmin = _graded_min(si.num, tpos)
        assert nmin >= target, "radial limit diverges on a Laman graph"
        if nmin > target:
            continue
        low = _graded_part(si.num, tpos, target)
        emin = _graded_min(si.exp_num, tpos)
        assert emin is None or emin > dmin, \
            "exponent survived the collapse of a Laman graph"
        split = {}
        for exp, c in low.terms.items():
            assert not any(exp[p] for p in kbpos), \
                "antiholomorphic momenta survived the radial limit"
            alpha = tuple(exp[p] for p in kpos)
            assert sum(alpha) == order, "operator order mismatch"
            tonly = list(exp)
            for p in kpos:
                tonly[p] = 0
            split.setdefault(alpha, {})[tuple(tonly)] = c
        cval = si.constant.value()
        for alpha, terms in split.items():
            by_alpha.setdefault(alpha, []).append(
                (eh, (-1) ** eh, cval, Polynomial(vars_, terms), den0,
                 si.den_power))

    cg = complex(phi.ground_constant.value())
    coeffs = {}
    err = 0.0
    evals = 0
    for alpha in sorted(by_alpha):
        pieces = by_alpha[alpha]

        def f(xi):
            vals = {"t%d" % (e + 1): xi[e] for e in range(m)}
            total = 0j
            for eh, sgn, cval, low, den0, pw in pieces:
                total += (sgn * xi[eh] * cval * low.evaluate(vals)
                          / den0.evaluate(vals) ** pw)
            return _FACE_SIGN * total

        est = boundary_sphere_quadrature(g.full_subset(), f,
                                         cfg or QuadratureConfig())
        coeffs[alpha] = est.value / cg
        err += est.error / abs(cg)
        evals += est.evaluations
    return AnomalySymbol(d, nv, coeffs, err, evals)


def o_apply(symbol, phi):
    """Apply an AnomalySymbol to a test form: differentiate the scalar
    part holomorphically, restrict all relative positions to the
    grounded point, and keep the form's own normalization and grounded
    Gaussian.  Each momentum monomial k^alpha acts on
    exp(w.k) p(w, wbar, kbar) as the Leibniz sum over splittings of
    alpha between the plane wave and p.  The form must pair the empty
    antiholomorphic selection (plane-wave degree); anything else raises
    DegreeMismatch.
    """
    if phi.dim != symbol.dim or phi.n_vertices != symbol.n_vertices:
        raise DegreeMismatch("symbol built for d=%d, n=%d" %
                             (symbol.dim, symbol.n_vertices))
    sel = _resolve_selection(phi, 0)
    if sel is None:
        raise DegreeMismatch("the operator pairs plane-wave degree; the "
                             "form carries a nonempty selection")
    d, nv = phi.dim, phi.n_vertices
    wnames = _block("w", nv, d)
    flatk = [complex(phi.momenta[i][c]) for i in range(nv - 1)
             for c in range(d)]
    origin = {}
    for name in phi.poly.vars:
        if name.startswith("wb") or name.startswith("w"):
            origin[name] = 0.0
    for i in range(1, nv):
        for c in range(1, d + 1):
            origin["kb%d_%d" % (i, c)] = \
                flatk[(i - 1) * d + (c - 1)].conjugate()
    total = 0j
    for alpha, s in symbol.items():
        acc = 0j
        for beta in itertools.product(*(range(a + 1) for a in alpha)):
            q = phi.poly
            coeff = 1
            for j, b in enumerate(beta):
                coeff *= math.comb(alpha[j], b)
                for _ in range(b):
                    q = q.partial_derivative(wnames[j])
                if q.is_zero():
                    break
            if q.is_zero():
                continue
            val = complex(q.evaluate(origin)) * coeff
            for j, b in enumerate(beta):
                if alpha[j] - b:
                    val = val * flatk[j] ** (alpha[j] - b)
            acc += val
        total += s * acc
    scale = complex(phi.ground_constant.value()) * float(phi.normalization)
    return total * scale


### corner cancellation among Laman subgraphs

QuadraticResult = namedtuple("QuadraticResult",
                             ["value", "error", "terms", "evaluations"])

QuadraticTerm = namedtuple("QuadraticTerm", ["indices", "sign", "value",
                                             "error"])


def _shuffle_parity(keep, subidx):
    """Sign of regrouping the ascending dt wedge over `keep` into the
    sub-collapse block followed by the complement block, each
    ascending."""
    first = [p for p, e in enumerate(keep) if e in subidx]
    second = [p for p, e in enumerate(keep) if e not in subidx]
    return permutation_parity(first + second)


def _corner_integral(g, n, phi, sub, cfg):
    """Pairing of the test form with the corner stratum where the edges
    of `sub` collapse together while the complement stays on its own
    sphere.  Returns (value, error, evaluations)."""
    m = g.n_edges
    subidx = tuple(sub.indices)
    comp = tuple(sub.complement_indices())
    subset_of = set(subidx)
    pieces = []
    for ei, eh in enumerate(subidx):
        for fi, fh in enumerate(comp):
            keep = tuple(e for e in range(m) if e != eh and e != fh)
            si = component_reduce(g, n, phi, keep)
            if si.is_zero():
                continue
            lim = _staged_limit(si, [(subidx, len(subidx) - 1),
                                     (comp, len(comp) - 1)])
            if lim is None:
                continue
            sgn = _shuffle_parity(keep, subset_of) \
                * (-1) ** ei * (-1) ** fi
            pieces.append((ei, fi, sgn, lim))
    if not pieces:
        return 0j, 0.0, 0
    kv = _momentum_values(phi)
    count = [0]
    inner_err = [0.0]

    def outer(xi):
        def inner(tau):
            count[0] += 1
            vals = dict(kv)
            for p, e in enumerate(subidx):
                vals["t%d" % (e + 1)] = xi[p]
            for p, e in enumerate(comp):
                vals["t%d" % (e + 1)] = tau[p]
            total = 0j
            for ei, fi, sgn, lim in pieces:
                total += sgn * xi[ei] * tau[fi] * lim(vals)
            return _FACE_SIGN * total

        est = boundary_sphere_quadrature(g.subset(comp), inner, cfg)
        inner_err[0] = max(inner_err[0], est.error)
        return est.value

    est = boundary_sphere_quadrature(g.subset(subidx), outer, cfg)
    return est.value, est.error + inner_err[0], count[0]


def quadratic_residual(g, n=None, phi=None, cfg=None):
    """Signed sum of the iterated-collapse pairings over the Laman
    subgraphs of g.

    Each proper Laman subgraph contributes the stratum where its edges
    collapse on their own sphere a full order faster than the
    complementary edges, which then collapse on theirs; the pairing of
    the test form with that stratum composes the operator of the
    subgraph with the operator of the quotient.  The weight is the
    parity of reordering (complement edges, subgraph edges) back into
    the edge order.
    The face pairing of the antiholomorphic derivative of the test form
    vanishes whenever the ambient graph is not Laman, which forces the
    signed strata to cancel; the returned value is the measured
    residual and should be compared against the scale of the
    individual terms.
    """
    assert phi is not None
    g.check_no_self_loops()
    g.check_connected()
    if cfg is None:
        cfg = QuadratureConfig()
    d, m = g.dim, g.n_edges
    terms = []
    total = 0j
    err = 0.0
    evals = 0
    for sub in laman_subgraphs(g, d):
        subidx = tuple(sub.indices)
        comp = tuple(sub.complement_indices())
        if not comp:
            continue
        sign = permutation_sign(g, sub).sign
        value, e, ev = _corner_integral(g, n, phi, sub, cfg)
        terms.append(QuadraticTerm(subidx, sign, value, e))
        total += sign * value
        err += e
        evals += ev
    return QuadraticResult(total, err, tuple(terms), evals)


### decay of the outer boundary

def outer_boundary_decay(g, n=None, phi=None, lengths=(1.0, 2.0, 4.0, 8.0),
                         cfg=None):
    """Magnitudes of the boundary faces at t_e = L for each cutoff L.

    For each length the faces where one Schwinger parameter sits at the
    cutoff while the rest fill the cube [0, L] are summed with the
    alternating orientation signs and the total magnitude is returned;
    the Gaussian damping of the propagators makes the sequence decay as
    the cutoff grows, which is what licenses dropping the outer
    boundary from every integration by parts.
    """
    assert phi is not None
    g.check_no_self_loops()
    g.check_connected()
    if cfg is None:
        cfg = QuadratureConfig()
    m = g.n_edges
    mags = []
    for L in lengths:
        L = float(L)
        assert L > 0.0
        total = 0j
        for eh in range(m):
            keep = tuple(e for e in range(m) if e != eh)
            si = component_reduce(g, n, phi, keep)
            if si.is_zero():
                continue
            if m == 1:
                val = complex(si.evaluate((L,)))
            else:
                def f(ts):
                    t_full = list(ts)
                    t_full.insert(eh, L)
                    return complex(si.evaluate(tuple(t_full)))

                counter = [0]
                val, _ = _complex_nquad(f, [(0.0, L)] * (m - 1), cfg,
                                        counter)
            total += (-1) ** eh * val
        mags.append(abs(total))
    return tuple(mags)
