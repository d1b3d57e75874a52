"""Decorated directed multigraphs, subgraph algebra, spanning structure
enumeration, and Laman classification.

Vertices are 1..n with the last vertex grounded everywhere in the package
(it is the one dropped from incidence and Laplacian data).  Edge order and
vertex order are the list orders and are significant: all permutation signs
are computed relative to them.
"""

from collections import namedtuple
from itertools import combinations

from .errors import (SelfLoop, Disconnected, EmptyEdgeSet, EmptySubset,
                     OverlappingVertexSets, ParseError)
from .symbolic import permutation_parity


class DecoratedGraph(object):
    """Directed ordered multigraph with ambient dimension and per-edge
    decorations n(e) in (Z>=0)^d.

    >>> g = DecoratedGraph(1, 2, [(1, 2)])
    >>> g.n_edges, g.n_vertices, g.decorations
    (1, 2, ((0,),))
    """

    def __init__(self, dim, n_vertices, edges, decorations=None):
        if dim < 1:
            raise ParseError("dimension must be positive")
        if n_vertices < 1:
            raise ParseError("need at least one vertex")
        self.dim = dim
        self.n_vertices = n_vertices
        self.edges = tuple((int(t), int(h)) for t, h in edges)
        for t, h in self.edges:
            if not (1 <= t <= n_vertices and 1 <= h <= n_vertices):
                raise ParseError("edge endpoint out of range: (%d, %d)" % (t, h))
        if decorations is None:
            decorations = [tuple([0] * dim)] * len(self.edges)
        self.decorations = tuple(tuple(int(x) for x in dec)
                                 for dec in decorations)
        if len(self.decorations) != len(self.edges):
            raise ParseError("one decoration per edge required")
        for dec in self.decorations:
            if len(dec) != dim:
                raise ParseError("decoration length must equal dim")
            if any(x < 0 for x in dec):
                raise ParseError("decorations must be non-negative")

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def ground(self):
        return self.n_vertices

    def has_self_loop(self):
        return any(t == h for t, h in self.edges)

    def check_no_self_loops(self):
        for i, (t, h) in enumerate(self.edges):
            if t == h:
                raise SelfLoop("edge %d is a self-loop at vertex %d" % (i + 1, t))

    def check_connected(self):
        if not is_connected(self):
            raise Disconnected("graph is not connected")

    def full_subset(self):
        return EdgeSubset(self, range(self.n_edges))

    def subset(self, indices):
        return EdgeSubset(self, indices)

    def decoration_total(self):
        return sum(sum(dec) for dec in self.decorations)

    def __repr__(self):
        return "DecoratedGraph(dim=%d, n=%d, edges=%r)" % (
            self.dim, self.n_vertices, list(self.edges))

    def __eq__(self, other):
        return (isinstance(other, DecoratedGraph)
                and self.dim == other.dim
                and self.n_vertices == other.n_vertices
                and self.edges == other.edges
                and self.decorations == other.decorations)

    def __hash__(self):
        return hash((self.dim, self.n_vertices, self.edges, self.decorations))

    def to_text(self):
        lines = ["dim %d" % self.dim, "vertices %d" % self.n_vertices]
        for (t, h), dec in zip(self.edges, self.decorations):
            lines.append("edge %d %d n=%s" % (t, h, ",".join(map(str, dec))))
        return "\n".join(lines) + "\n"


class EdgeSubset(object):
    """Subset of the edges of a parent graph, with the induced edge order.

    The materialized subgraph is edge-generated: its vertex set is the set
    of endpoints of the chosen edges.
    """

    def __init__(self, graph, indices):
        self.graph = graph
        idx = tuple(sorted(set(int(i) for i in indices)))
        for i in idx:
            if not (0 <= i < graph.n_edges):
                raise ParseError("edge index %d out of range" % i)
        self.indices = idx

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in set(self.indices)

    def __eq__(self, other):
        return (isinstance(other, EdgeSubset)
                and (self.graph is other.graph or self.graph == other.graph)
                and self.indices == other.indices)

    def __hash__(self):
        return hash(self.indices)

    def edges(self):
        return [self.graph.edges[i] for i in self.indices]

    def vertices(self):
        vs = set()
        for i in self.indices:
            t, h = self.graph.edges[i]
            vs.add(t)
            vs.add(h)
        return vs

    def mask(self):
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m

    def complement_indices(self):
        inside = set(self.indices)
        return tuple(i for i in range(self.graph.n_edges) if i not in inside)

    def __repr__(self):
        return "EdgeSubset(%r)" % (list(self.indices),)


SignedPermutation = namedtuple("SignedPermutation", ["sign"])

LamanResult = namedtuple("LamanResult", ["is_laman", "witness",
                                         "equality_holds"])


### connectivity helpers

def _components_of_edges(edge_list, vertices=None):
    """Connected components (as frozensets of vertices) of the graph with
    the given edges; `vertices` may add isolated vertices."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    if vertices:
        for v in vertices:
            parent.setdefault(v, v)
    for t, h in edge_list:
        parent.setdefault(t, t)
        parent.setdefault(h, h)
        union(t, h)
    comps = {}
    for v in parent:
        comps.setdefault(find(v), set()).add(v)
    return [frozenset(c) for c in comps.values()]


def is_connected(g):
    comps = _components_of_edges(g.edges, range(1, g.n_vertices + 1))
    return len(comps) == 1


def subset_components(sub):
    """Components of the edge-generated subgraph (no isolated vertices)."""
    return _components_of_edges(sub.edges())


def subset_is_connected(sub):
    return len(subset_components(sub)) == 1


### incidence and betti numbers

def incidence_matrix(g):
    """rho[e][i] = +1 if head(e) = i+1, -1 if tail(e) = i+1, else 0.
    The grounded (last) vertex's column is omitted."""
    g.check_no_self_loops()
    g.check_connected()
    n = g.n_vertices
    rho = [[0] * (n - 1) for _ in range(g.n_edges)]
    for e, (t, h) in enumerate(g.edges):
        if h < n:
            rho[e][h - 1] += 1
        if t < n:
            rho[e][t - 1] -= 1
    return rho


def first_betti(obj):
    """|E| - |V| + #components for a graph or an edge-generated subgraph."""
    if isinstance(obj, DecoratedGraph):
        comps = _components_of_edges(obj.edges, range(1, obj.n_vertices + 1))
        return obj.n_edges - obj.n_vertices + len(comps)
    if isinstance(obj, EdgeSubset):
        if not obj.indices:
            raise EmptyEdgeSet("first_betti of empty edge subset")
        comps = subset_components(obj)
        nv = sum(len(c) for c in comps)
        return len(obj.indices) - nv + len(comps)
    raise TypeError("expected DecoratedGraph or EdgeSubset")


### Laman classification

def _sparsity_ok(d, nv, ne):
    return d * nv >= (d - 1) * ne + d + 1


def _connected_edge_subsets(g):
    """All nonempty edge subsets whose edge-generated subgraph is connected,
    as bitmasks.  Grown by breadth-first extension over adjacency, which
    visits each connected subset exactly once."""
    m = g.n_edges
    adjacent = [0] * m
    for i in range(m):
        ti, hi = g.edges[i]
        for j in range(m):
            if i != j:
                tj, hj = g.edges[j]
                if len({ti, hi} & {tj, hj}) > 0:
                    adjacent[i] |= 1 << j
    seen = set()
    out = []
    for start in range(m):
        frontier = [1 << start]
        while frontier:
            s = frontier.pop()
            if s in seen:
                continue
            seen.add(s)
            out.append(s)
            grow = 0
            i = 0
            ss = s
            while ss:
                if ss & 1:
                    grow |= adjacent[i]
                ss >>= 1
                i += 1
            grow &= ~s
            i = 0
            while grow:
                if grow & 1:
                    frontier.append(s | (1 << i))
                grow >>= 1
                i += 1
    return out


def _mask_stats(g, mask):
    nv = set()
    ne = 0
    i = 0
    while mask:
        if mask & 1:
            t, h = g.edges[i]
            nv.add(t)
            nv.add(h)
            ne += 1
        mask >>= 1
        i += 1
    return len(nv), ne


def is_laman(g, d):
    """Laman test for ambient dimension d.

    Checks the sparsity inequality d|V'| >= (d-1)|E'| + d + 1 for every
    edge-generated subgraph and the equality for the whole graph.  Only
    connected subgraphs are enumerated here: a disconnected subgraph whose
    components all satisfy the inequality satisfies it strictly (summing the
    component inequalities gives a slack of (#components - 1)(d + 1)), so
    the verdict agrees with checking every edge subset.
    """
    g.check_no_self_loops()
    g.check_connected()
    nv, ne = g.n_vertices, g.n_edges
    equality = (d * nv == (d - 1) * ne + d + 1)
    witness = None
    for mask in _connected_edge_subsets(g):
        snv, sne = _mask_stats(g, mask)
        if not _sparsity_ok(d, snv, sne):
            witness = EdgeSubset(g, [i for i in range(ne) if mask >> i & 1])
            break
    ok = equality and witness is None
    return LamanResult(ok, witness, equality)


def is_laman_brute_force(g, d):
    """Reference implementation: check all 2^|E| - 1 edge subsets."""
    g.check_no_self_loops()
    g.check_connected()
    nv, ne = g.n_vertices, g.n_edges
    if d * nv != (d - 1) * ne + d + 1:
        return False
    for r in range(1, ne + 1):
        for combo in combinations(range(ne), r):
            vs = set()
            for i in combo:
                t, h = g.edges[i]
                vs.add(t)
                vs.add(h)
            if not _sparsity_ok(d, len(vs), r):
                return False
    return True


def laman_subgraphs(g, d):
    """All connected edge-generated Laman subgraphs, in lexicographic
    edge-subset order."""
    g.check_no_self_loops()
    g.check_connected()
    masks = _connected_edge_subsets(g)
    bad = []
    for mask in masks:
        snv, sne = _mask_stats(g, mask)
        if not _sparsity_ok(d, snv, sne):
            bad.append(mask)
    out = []
    for mask in masks:
        snv, sne = _mask_stats(g, mask)
        if d * snv != (d - 1) * sne + d + 1:
            continue
        if any(b & mask == b for b in bad):
            continue
        out.append(EdgeSubset(g, [i for i in range(g.n_edges)
                                  if mask >> i & 1]))
    out.sort(key=lambda s: s.indices)
    return out


def sparsity_violation(g, d=None):
    """First connected edge subset with d|V'| < (d-1)|E'| + d + 1, as an
    EdgeSubset, or None when every connected subgraph satisfies the
    inequality.  Such a subset certifies that the graph integral vanishes.

    >>> sparsity_violation(bigon(2), 2).indices
    (0, 1)
    >>> sparsity_violation(triangle(), 2) is None
    True
    >>> sparsity_violation(triangle(), 1) is None
    True
    """
    if d is None:
        d = g.dim
    g.check_no_self_loops()
    g.check_connected()
    best = None
    for mask in _connected_edge_subsets(g):
        snv, sne = _mask_stats(g, mask)
        if not _sparsity_ok(d, snv, sne):
            idx = tuple(i for i in range(g.n_edges) if mask >> i & 1)
            if best is None or idx < best:
                best = idx
    if best is None:
        return None
    return EdgeSubset(g, best)


### subgraph algebra

def quotient(g, sub):
    """Collapse each connected component of `sub` to a single vertex.

    Remaining edges keep their order and decorations; collapsing may create
    self-loops, which stay representable.  Vertex classes are ordered by
    minimal original member, except that the class containing the grounded
    vertex is placed last.
    """
    if not sub.indices:
        raise EmptySubset("quotient by empty edge subset")
    comps = subset_components(sub)
    cls = {}
    for c in comps:
        rep = min(c)
        for v in c:
            cls[v] = rep
    for v in range(1, g.n_vertices + 1):
        cls.setdefault(v, v)
    reps = sorted(set(cls.values()))
    ground_rep = cls[g.n_vertices]
    reps = [r for r in reps if r != ground_rep] + [ground_rep]
    renumber = {r: i + 1 for i, r in enumerate(reps)}
    new_edges = []
    new_decs = []
    for i in range(g.n_edges):
        if i in sub:
            continue
        t, h = g.edges[i]
        new_edges.append((renumber[cls[t]], renumber[cls[h]]))
        new_decs.append(g.decorations[i])
    return DecoratedGraph(g.dim, len(reps), new_edges, new_decs)


def complement(g, sub):
    """Keep all vertices of g, drop the edges of `sub`."""
    if not sub.indices:
        raise EmptySubset("complement of empty edge subset")
    keep = sub.complement_indices()
    return DecoratedGraph(g.dim, g.n_vertices,
                          [g.edges[i] for i in keep],
                          [g.decorations[i] for i in keep])


def permutation_sign(g, sub):
    """Sign of reordering (complement edges, then sub edges, each in induced
    order) back into the full edge order."""
    if not sub.indices:
        raise EmptySubset("permutation sign of empty edge subset")
    arrangement = list(sub.complement_indices()) + list(sub.indices)
    return SignedPermutation(permutation_parity(arrangement))


### spanning structures

def spanning_trees(g):
    """Yield the edge subsets of all spanning trees."""
    g.check_no_self_loops()
    g.check_connected()
    n = g.n_vertices
    for combo in combinations(range(g.n_edges), n - 1):
        if _is_forest(g, combo) and _covers_all(g, combo):
            yield EdgeSubset(g, combo)


def _is_forest(g, combo):
    parent = list(range(g.n_vertices + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in combo:
        t, h = g.edges[i]
        rt, rh = find(t), find(h)
        if rt == rh:
            return False
        parent[rt] = rh
    return True


def _covers_all(g, combo):
    vs = set()
    for i in combo:
        t, h = g.edges[i]
        vs.add(t)
        vs.add(h)
    return len(vs) == g.n_vertices


def _two_forest_split(g, combo):
    """For an acyclic edge selection of size n-2, the two component vertex
    sets (isolated vertices included); None if the selection has a cycle."""
    if not _is_forest(g, combo):
        return None
    comps = _components_of_edges([g.edges[i] for i in combo],
                                 range(1, g.n_vertices + 1))
    if len(comps) != 2:
        return None
    return comps


def cuts(g, v1, v2):
    """Yield all cut sets C: complements of spanning 2-forests whose two
    trees separate v1 from v2.  Every yielded C has |C| = h1(g) + 1."""
    g.check_no_self_loops()
    g.check_connected()
    v1, v2 = set(v1), set(v2)
    if v1 & v2:
        raise OverlappingVertexSets("vertex sets overlap: %r" % (v1 & v2,))
    h1 = first_betti(g)
    n = g.n_vertices
    for combo in combinations(range(g.n_edges), n - 2):
        comps = _two_forest_split(g, combo)
        if comps is None:
            continue
        a, b = comps
        if (v1 <= a and v2 <= b) or (v1 <= b and v2 <= a):
            c = EdgeSubset(g, [i for i in range(g.n_edges) if i not in combo])
            assert len(c) == h1 + 1
            yield c


def cut_masks(g, v1, v2):
    """Cut enumeration tolerating overlapping vertex sets (empty family);
    used by the d-inverse identity where overlapping families drop out."""
    if set(v1) & set(v2):
        return []
    return list(cuts(g, v1, v2))


### text format

def parse_graph(text, dim_override=None):
    """Parse the package's graph text format.

    dim D / vertices N / edge T H [n=a,b,...] with '#' comments.  Edge order
    is file order; vertices are 1..N.
    """
    dim = None
    n_vertices = None
    edges = []
    decorations = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "dim":
                dim = int(parts[1])
            elif parts[0] == "vertices":
                n_vertices = int(parts[1])
            elif parts[0] == "edge":
                t, h = int(parts[1]), int(parts[2])
                dec = None
                for p in parts[3:]:
                    if p.startswith("n="):
                        dec = tuple(int(x) for x in p[2:].split(","))
                    else:
                        raise ParseError("line %d: unknown field %r"
                                         % (lineno, p))
                edges.append((t, h))
                decorations.append(dec)
            else:
                raise ParseError("line %d: unknown statement %r"
                                 % (lineno, parts[0]))
        except (ValueError, IndexError):
            raise ParseError("line %d: malformed statement %r" % (lineno, raw))
    if dim_override is not None:
        dim = dim_override
    if dim is None:
        raise ParseError("missing 'dim' statement")
    if n_vertices is None:
        raise ParseError("missing 'vertices' statement")
    decs = []
    for dec in decorations:
        if dec is None:
            dec = tuple([0] * dim)
        if len(dec) != dim:
            raise ParseError("decoration %r does not match dim %d" % (dec, dim))
        decs.append(dec)
    return DecoratedGraph(dim, n_vertices, edges, decs)


### ready-made graphs used throughout the tests and docs

def single_edge(d=1):
    return DecoratedGraph(d, 2, [(1, 2)])


def bigon(d=1):
    return DecoratedGraph(d, 2, [(1, 2), (1, 2)])


def triangle(d=1):
    return DecoratedGraph(d, 3, [(1, 2), (2, 3), (3, 1)])


def cycle(k, d=1):
    edges = [(i, i + 1) for i in range(1, k)] + [(k, 1)]
    return DecoratedGraph(d, k, edges)
