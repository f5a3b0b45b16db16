"""Property tests over randomly drawn small structures."""

import hypothesis.strategies as st
from hypothesis import given, settings

from fpduality.hom import check_hom, find_hom
from fpduality.patterns import builtin, decide_fpp
from fpduality.relstruct import (
    GRAPH_SIG,
    ColouredStructure,
    Structure,
    as_coloured,
    canonical_form,
    decode_graph,
    disjoint_union,
    encode_graph,
    gaifman,
    relabel,
)


@st.composite
def digraphs(draw, max_n=4, loops=True):
    n = draw(st.integers(1, max_n))
    pool = [(x, y) for x in range(n) for y in range(n) if loops or x != y]
    arcs = draw(st.lists(st.sampled_from(pool), max_size=8, unique=True)) if pool else []
    return Structure(GRAPH_SIG, range(n), {"E": arcs})


@st.composite
def coloured(draw, max_n=4, vpalette=("a", "b"), epalette=("x", "y")):
    S = draw(digraphs(max_n))
    vcol = {x: draw(st.sampled_from(vpalette)) for x in S.domain}
    ecol = {occ: draw(st.sampled_from(epalette)) for occ in S.occurrences()}
    return ColouredStructure(S, vcol, ecol)


@settings(max_examples=60, deadline=None)
@given(digraphs())
def test_gaifman_symmetric_loopless(S):
    g = gaifman(S)
    arcs = g.relations["adj"]
    assert all((y, x) in arcs for x, y in arcs)
    assert all(x != y for x, y in arcs)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.data())
def test_decode_encode_identity(n, data):
    pool = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = data.draw(st.lists(st.sampled_from(pool), unique=True)) if pool else []
    _, back = decode_graph(encode_graph(range(n), edges))
    assert back == {frozenset(e) for e in edges}


@settings(max_examples=40, deadline=None)
@given(coloured(), st.permutations(list(range(4))))
def test_canonical_invariant_under_relabelling(CS, perm):
    mapping = {x: 10 + perm[x] for x in CS.domain}
    assert canonical_form(CS) == canonical_form(relabel(CS, mapping))


@settings(max_examples=30, deadline=None)
@given(coloured(max_n=3), coloured(max_n=3), coloured(max_n=3))
def test_hom_composition(A, B, C):
    h, g = find_hom(A, B), find_hom(B, C)
    if h is not None and g is not None:
        assert check_hom(A, C, {x: g[h[x]] for x in A.domain})


@settings(max_examples=25, deadline=None)
@given(digraphs(max_n=3, loops=False), digraphs(max_n=3, loops=False))
def test_decide_respects_disjoint_union(A, B):
    V = builtin("vertex-no-mono-tri")
    AB = disjoint_union(as_coloured(A), as_coloured(B)).base
    expected = decide_fpp(A, V) is not None and decide_fpp(B, V) is not None
    assert (decide_fpp(AB, V) is not None) == expected
