import pytest

from holofeyn.errors import (SelfLoop, Disconnected, EmptyEdgeSet,
                             EmptySubset, OverlappingVertexSets, ParseError)
from holofeyn.graphs import (DecoratedGraph, EdgeSubset, incidence_matrix,
                             first_betti, is_laman, is_laman_brute_force,
                             laman_subgraphs, quotient, complement,
                             permutation_sign, spanning_trees, cuts,
                             parse_graph, single_edge, bigon, triangle,
                             cycle, is_connected, subset_is_connected)

from corpus import exhaustive_corpus, random_corpus


### incidence and betti numbers

def test_incidence_triangle():
    assert incidence_matrix(triangle()) == [[-1, 1], [0, -1], [1, 0]]


def test_incidence_bigon():
    assert incidence_matrix(bigon()) == [[-1], [-1]]


def test_incidence_rejects_self_loop():
    g = DecoratedGraph(1, 2, [(1, 2), (2, 2)])
    with pytest.raises(SelfLoop):
        incidence_matrix(g)


def test_incidence_rejects_disconnected():
    g = DecoratedGraph(1, 4, [(1, 2), (3, 4)])
    with pytest.raises(Disconnected):
        incidence_matrix(g)


def test_first_betti_values():
    assert first_betti(single_edge()) == 0
    assert first_betti(bigon()) == 1
    assert first_betti(triangle()) == 1
    assert first_betti(DecoratedGraph(1, 4, [(1, 2), (3, 4)])) == 0


def test_first_betti_subset():
    g = triangle()
    assert first_betti(g.full_subset()) == 1
    assert first_betti(g.subset([0, 1])) == 0
    with pytest.raises(EmptyEdgeSet):
        first_betti(g.subset([]))


### text format

def test_parse_round_trip():
    text = "dim 2\nvertices 3\nedge 1 2 n=1,0  # decorated\nedge 2 3\nedge 3 1 n=0,2\n"
    g = parse_graph(text)
    assert g.dim == 2 and g.n_vertices == 3
    assert g.edges == ((1, 2), (2, 3), (3, 1))
    assert g.decorations == ((1, 0), (0, 0), (0, 2))
    assert parse_graph(g.to_text()) == g


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_graph("vertices 2\nedge 1 2\n")  # missing dim
    with pytest.raises(ParseError):
        parse_graph("dim 1\nvertices 2\nedge 1 3\n")  # vertex out of range
    with pytest.raises(ParseError):
        parse_graph("dim 2\nvertices 2\nedge 1 2 n=1\n")  # wrong length
    with pytest.raises(ParseError):
        parse_graph("dim 1\nvertices 2\nedge 1 2 m=3\n")  # unknown field
    with pytest.raises(ParseError):
        parse_graph("dim 1\nvertices 2\nedgy 1 2\n")  # unknown statement


### Laman classification

def test_laman_examples():
    assert is_laman(single_edge(), 1).is_laman
    assert is_laman(bigon(), 1).is_laman
    assert not is_laman(triangle(), 1).is_laman
    assert is_laman(triangle(), 2).is_laman
    assert not is_laman(cycle(4), 2).is_laman
    assert is_laman(cycle(4), 3).is_laman


def test_laman_parallel_edges_fail_at_d2():
    res = is_laman(bigon(), 2)
    assert not res.is_laman
    assert res.witness is not None
    assert res.witness.indices == (0, 1)


def test_laman_k4_minus_edge_d2():
    g = DecoratedGraph(2, 4, [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3)])
    assert is_laman(g, 2).is_laman


def test_laman_d1_means_two_vertices():
    for g in random_corpus(count=40, seed=7):
        assert is_laman(g, 1).is_laman == (g.n_vertices == 2)


def test_laman_matches_brute_force_small():
    for g in exhaustive_corpus(max_vertices=3, max_edges=4):
        for d in (1, 2, 3):
            assert is_laman(g, d).is_laman == is_laman_brute_force(g, d)


def test_laman_subgraphs_triangle():
    subs = laman_subgraphs(triangle(), 1)
    assert [s.indices for s in subs] == [(0,), (1,), (2,)]
    # at d=2 a single edge satisfies 2·2 = 1·1 + 3, so the three edges
    # qualify alongside the full triangle
    subs = laman_subgraphs(triangle(), 2)
    assert [s.indices for s in subs] == [(0,), (0, 1, 2), (1,), (2,)]


def test_laman_subgraphs_are_connected_and_laman():
    for g in random_corpus(count=15, seed=11):
        for d in (1, 2):
            for s in laman_subgraphs(g, d):
                assert subset_is_connected(s)
                sub_g = DecoratedGraph(g.dim, *_relabel(g, s))
                assert is_laman_brute_force(sub_g, d)


def _relabel(g, sub):
    vs = sorted(sub.vertices())
    renumber = {v: i + 1 for i, v in enumerate(vs)}
    edges = [(renumber[t], renumber[h]) for t, h in sub.edges()]
    return len(vs), edges


### subgraph algebra

def test_permutation_sign_examples():
    g = triangle()
    assert permutation_sign(g, g.subset([1])).sign == -1
    assert permutation_sign(g, g.subset([2])).sign == 1
    assert permutation_sign(g, g.subset([1, 2])).sign == 1
    assert permutation_sign(g, g.subset([0])).sign == 1
    with pytest.raises(EmptySubset):
        permutation_sign(g, g.subset([]))


def test_quotient_triangle():
    g = triangle()
    q = quotient(g, g.subset([0]))
    assert q.n_vertices == 2 and q.n_edges == 2
    assert q.edges == ((1, 2), (2, 1))  # ground image stays last


def test_quotient_can_create_self_loop():
    q = quotient(bigon(), bigon().subset([0]))
    assert q.n_vertices == 1
    assert q.edges == ((1, 1),)


def test_complement_triangle():
    g = triangle()
    c = complement(g, g.subset([1]))
    assert c.edges == ((1, 2), (3, 1))
    assert c.n_vertices == 3


### spanning structures

def test_spanning_trees_counts():
    assert len(list(spanning_trees(triangle()))) == 3
    assert len(list(spanning_trees(bigon()))) == 2
    assert len(list(spanning_trees(single_edge()))) == 1


def test_cuts_bigon():
    g = bigon()
    cs = list(cuts(g, {1}, {2}))
    assert [c.indices for c in cs] == [(0, 1)]


def test_cuts_triangle():
    g = triangle()
    cs = sorted(c.indices for c in cuts(g, {1}, {3}))
    assert cs == [(0, 2), (1, 2)]


def test_cuts_overlap_raises():
    with pytest.raises(OverlappingVertexSets):
        list(cuts(triangle(), {1, 2}, {2, 3}))


def test_cut_sizes_random():
    for g in random_corpus(count=10, seed=3):
        n = g.n_vertices
        h1 = first_betti(g)
        for c in cuts(g, {1}, {n}):
            assert len(c) == h1 + 1


### corpus sanity

def test_exhaustive_corpus_connected_and_sized():
    corpus = exhaustive_corpus()
    assert len(corpus) > 400
    for g in corpus:
        assert is_connected(g)
        assert g.n_vertices <= 4 and g.n_edges <= 6


def test_random_corpus_deterministic():
    a = random_corpus(count=5, seed=1)
    b = random_corpus(count=5, seed=1)
    assert all(x == y for x, y in zip(a, b))
