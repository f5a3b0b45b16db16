import itertools
import random

import pytest

from fpduality.errors import CapExceeded, FPDError
from fpduality.hom import check_hom, find_hom
from fpduality.patterns import Problem, is_valid
from fpduality.products import (
    STAR,
    TruncatedProduct,
    assemble_partial_homs,
    coordinate_projection,
    forecast_size,
    iterated_truncated_product,
    product,
    projection_checked,
    truncated_product,
)
from fpduality.relstruct import (
    GRAPH_SIG,
    ColouredStructure,
    Structure,
    as_coloured,
    induced,
)
from conftest import K, P, arc, oracle_all_homs, random_coloured


def mono_arc_problem():
    a = arc()
    pats = [
        ColouredStructure(a, {0: c, 1: c}, {occ: "-" for occ in a.occurrences()})
        for c in ("1", "2")
    ]
    return Problem(GRAPH_SIG, ("1", "2"), ("-",), pats, name="mono-arc")


def test_product_examples():
    Pr, codes = product(K(2), K(3))
    assert Pr.size == 6
    # projections are homomorphisms
    for coord in (0, 1):
        target = K(2) if coord == 0 else K(3)
        h = {i: codes[i][coord] for i in Pr.domain}
        assert check_hom(as_coloured(Pr), as_coloured(target), h)
    two_edges, _ = product(K(2), K(2))
    from fpduality.relstruct import components

    assert len(components(two_edges)) == 2 and two_edges.n_tuples == 4


def test_product_universal_property():
    rng = random.Random(6)
    smalls = []
    for _ in range(8):
        n = rng.randint(1, 3)
        arcs = [(x, y) for x in range(n) for y in range(n) if rng.random() < 0.4]
        smalls.append(Structure(GRAPH_SIG, range(n), {"E": arcs}))
    for A, B in itertools.combinations(smalls, 2):
        Pr, _ = product(A, B)
        for Cs in smalls[:4]:
            lhs = find_hom(Cs, Pr) is not None
            rhs = find_hom(Cs, A) is not None and find_hom(Cs, B) is not None
            assert lhs == rhs


def test_truncated_sizes():
    S3 = as_coloured(Structure(GRAPH_SIG, range(3), {}))
    assert truncated_product(S3, 2).size == 6
    mixed = ColouredStructure(Structure(GRAPH_SIG, range(3), {}), {0: "a", 1: "a", 2: "b"}, {})
    assert forecast_size(mixed, 3) == 15
    assert truncated_product(mixed, 3).size == 15


def test_truncated_loop_example():
    L = Structure(GRAPH_SIG, [0], {"E": [(0, 0)]})
    LC = ColouredStructure(L, {0: "c"}, {("E", (0, 0)): "red"})
    prod = truncated_product(LC, 2)
    assert prod.size == 2
    mat = prod.coloured
    assert set(mat.relations["E"]) == {(0, 0), (1, 1)}
    assert set(mat.ecol.values()) == {"red"}


def test_star_count_and_colour_coherence(rng):
    for _ in range(15):
        CS = random_coloured(rng, rng.randint(1, 4), ("a", "b"), ("x", "y"), p=0.4)
        prod = truncated_product(CS, 3)
        for vec in prod.coords:
            assert sum(1 for c in vec if c == STAR) == 1
            non_star = [c for c in vec if c != STAR]
            assert len({CS.vcol[c] for c in non_star}) <= 1
        mat = prod.coloured
        for (name, t), colour in mat.ecol.items():
            stars = {prod.star_index(i) for i in t}
            for pos in range(prod.p):
                if pos in stars:
                    continue
                projected = tuple(prod.coords[i][pos] for i in t)
                assert projected in CS.relations[name]
                assert CS.ecol[(name, projected)] == colour


def test_membership_oracle_matches_materialization(rng):
    for _ in range(10):
        CS = random_coloured(rng, rng.randint(1, 3), ("a", "b"), ("x",), p=0.5)
        prod = truncated_product(CS, 3)
        mat = prod.coloured
        for t in itertools.product(range(prod.size), repeat=2):
            holds, colour = prod.holds_tuple("E", t)
            assert holds == (t in mat.relations["E"])
            if holds:
                assert colour == mat.ecol[("E", t)]


def test_iterated_examples(rng):
    CS = random_coloured(rng, 2, ("a",), ("x",), p=0.6)
    assert iterated_truncated_product(CS, 5, 4) is CS  # empty fold
    one = iterated_truncated_product(CS, 2, 2)
    direct = truncated_product(CS, 2)
    assert one.coloured == direct.coloured


def test_projection_examples(rng):
    CS = random_coloured(rng, 3, ("a", "b"), ("x",), p=0.4)
    prod = truncated_product(CS, 2)
    keep, mapping = coordinate_projection(prod, 0)
    assert all(prod.star_index(i) != 0 for i in keep)
    sub, mapping = projection_checked(prod, 0)
    assert check_hom(sub, CS, mapping)
    with pytest.raises(FPDError):
        coordinate_projection(prod, 5)


def test_lemma47_validity_preserved(rng):
    Pm = mono_arc_problem()
    done = 0
    while done < 30:
        CS = random_coloured(rng, rng.randint(1, 5), ("1", "2"), ("-",), p=0.35)
        if not is_valid(CS, Pm):
            continue
        done += 1
        assert is_valid(truncated_product(CS, 3).coloured, Pm)


def test_lemma48_assembly(rng):
    done = 0
    while done < 30:
        U = random_coloured(rng, rng.randint(1, 3), ("1", "2"), ("-",), p=0.5)
        S = random_coloured(rng, rng.randint(2, 5), ("1", "2"), ("-",), p=0.3)
        blocks = [[] for _ in range(3)]
        for x in S.domain:
            blocks[rng.randrange(3)].append(x)
        piece_homs = []
        ok = True
        for i in range(3):
            piece = induced(S, set(S.domain) - set(blocks[i]))
            h = find_hom(piece, U)
            if h is None:
                ok = False
                break
            piece_homs.append(h)
        if not ok:
            continue
        prod = truncated_product(U, 3)
        stilde = assemble_partial_homs(S, blocks, piece_homs, prod)
        assert check_hom(S, prod.coloured, stilde)
        done += 1


def test_iterated_validity_for_small_patterns(rng):
    Pm = mono_arc_problem()
    done = 0
    while done < 10:
        CS = random_coloured(rng, rng.randint(1, 3), ("1", "2"), ("-",), p=0.4)
        if not is_valid(CS, Pm):
            continue
        done += 1
        chain = iterated_truncated_product(CS, 3, 4)
        assert is_valid(chain.coloured, Pm)


def test_cap_forecast():
    big = as_coloured(Structure(GRAPH_SIG, range(30), {}))
    with pytest.raises(CapExceeded) as err:
        truncated_product(big, 5, cap=1000)
    assert err.value.forecast == 5 * 30 ** 4


def test_diagonal_embeds_base(rng):
    # x -> (x,..,x,*) is a colour-preserving hom of the base into the product
    CS = random_coloured(rng, 3, ("a", "b"), ("x", "y"), p=0.5)
    prod = truncated_product(CS, 3)
    diag = {x: prod.code[(x, x, STAR)] for x in CS.domain}
    assert check_hom(CS, prod.coloured, diag)
