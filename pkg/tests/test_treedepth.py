import itertools
import math
import random
from fractions import Fraction

import pytest

from fpduality.errors import CapExceeded, FPDError
from fpduality.relstruct import (
    GRAPH_SIG,
    Signature,
    Structure,
    gaifman,
    induced,
)
from fpduality.treedepth import (
    Partition,
    RootedForest,
    closure,
    find_ltd_partition,
    grad,
    is_elimination_tree,
    is_uniformly_k_sparse,
    tree_depth,
    verify_ltd_partition,
)
from conftest import C, K, P, digraph

RSIG = Signature([("R", 3)])


def test_rooted_forest_validation():
    f = RootedForest([0, 1, 2], {1: 0, 2: 1})
    assert f.roots == (0,) and f.height == 3
    with pytest.raises(FPDError):
        RootedForest([0, 1], {0: 1, 1: 0})


def test_closure_examples():
    single = RootedForest([0], {})
    assert set(closure(single, GRAPH_SIG).relations["E"]) == {(0, 0)}
    chain = RootedForest([0, 1], {1: 0})
    assert set(closure(chain, GRAPH_SIG).relations["E"]) == {
        (0, 0), (0, 1), (1, 0), (1, 1),
    }
    assert len(closure(chain, RSIG).relations["R"]) == 8


def test_elimination_tree_examples():
    p3 = P(3)
    star_mid = RootedForest([0, 1, 2], {0: 1, 2: 1})
    chain = RootedForest([0, 1, 2], {1: 0, 2: 1})
    star_end = RootedForest([0, 1, 2], {1: 0, 2: 0})
    assert is_elimination_tree(p3, 1, star_mid)
    assert is_elimination_tree(p3, 0, chain)
    assert not is_elimination_tree(p3, 0, star_end)
    with pytest.raises(FPDError):
        is_elimination_tree(p3, 0, RootedForest([0, 1], {1: 0}))


def test_lemma_elimination_iff_closure_small():
    # two independent implementations agree on all connected graphs <= 4
    sig = GRAPH_SIG
    for n in range(1, 5):
        pairs = list(itertools.combinations(range(n), 2))
        trees = []
        for parents in itertools.product(range(-1, n), repeat=n):
            mapping = {i: p for i, p in enumerate(parents) if p >= 0}
            if sum(1 for p in parents if p < 0) != 1:
                continue
            try:
                trees.append(RootedForest(range(n), mapping))
            except FPDError:
                continue
        for mask in range(2 ** len(pairs)):
            edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            S = __import__("fpduality").encode_graph(range(n), edges)
            from fpduality.relstruct import is_connected

            if not is_connected(S):
                continue
            for Y in trees:
                via_recursion = is_elimination_tree(S, Y.roots[0], Y)
                clos = closure(Y, sig)
                via_closure = S.relations["E"] <= clos.relations["E"]
                assert via_recursion == via_closure


def test_tree_depth_examples():
    assert tree_depth(Structure(GRAPH_SIG, [0], {}))[0] == 1
    assert tree_depth(P(4))[0] == 3
    assert tree_depth(P(7))[0] == 3
    assert tree_depth(K(4))[0] == 4
    with pytest.raises(CapExceeded):
        tree_depth(P(13))


def test_tree_depth_path_log_formula():
    # td(P_n) = ceil(log2(n+1)), cross-checked by the exact search
    for n in range(1, 9):
        assert tree_depth(P(n))[0] == math.ceil(math.log2(n + 1))


def test_tree_depth_witness_is_valid():
    rng = random.Random(4)
    for _ in range(20):
        n = rng.randint(1, 6)
        arcs = [(x, y) for x in range(n) for y in range(n) if rng.random() < 0.3]
        S = digraph(n, arcs)
        value, witness = tree_depth(S)
        assert witness.height == value
        clos = closure(witness, S.signature)
        for name in S.signature.names:
            assert S.relations[name] <= clos.relations[name]


def test_tree_depth_gaifman_lemma():
    rng = random.Random(9)
    for _ in range(25):
        n = rng.randint(1, 6)
        tuples = [
            tuple(rng.randrange(n) for _ in range(3))
            for _ in range(rng.randint(0, 6))
        ]
        S = Structure(RSIG, range(n), {"R": tuples})
        assert tree_depth(S)[0] == tree_depth(gaifman(S))[0]


def test_tree_depth_monotone_under_induced():
    rng = random.Random(12)
    for _ in range(15):
        n = rng.randint(1, 6)
        arcs = [(x, y) for x in range(n) for y in range(n) if rng.random() < 0.4]
        S = digraph(n, arcs)
        td_all = tree_depth(S)[0]
        for _ in range(4):
            subset = {x for x in range(n) if rng.random() < 0.6}
            if subset:
                assert tree_depth(induced(S, subset))[0] <= td_all


def test_grad_examples():
    assert grad(Structure(GRAPH_SIG, range(3), {}), 2) == 0
    assert grad(K(3), 0) == 1
    assert grad(K(4), 0) == Fraction(3, 2)
    with pytest.raises(CapExceeded):
        grad(K(9), 0)


def test_grad_monotone():
    rng = random.Random(31)
    for _ in range(8):
        n = rng.randint(2, 5)
        edges = [
            e for e in itertools.combinations(range(n), 2) if rng.random() < 0.6
        ]
        G = __import__("fpduality").encode_graph(range(n), edges)
        values = [grad(G, r) for r in range(3)]
        assert values == sorted(values)  # nondecreasing in r
        if edges:
            sub = __import__("fpduality").encode_graph(range(n), edges[:-1])
            assert grad(sub, 1) <= grad(G, 1)


def test_verify_ltd_examples():
    star = __import__("fpduality").encode_graph(range(4), [(0, 1), (0, 2), (0, 3)])
    assert verify_ltd_partition(star, Partition({0: 1, 1: 2, 2: 2, 3: 2}, q=2), 2)
    p4 = P(4)
    assert not verify_ltd_partition(p4, Partition({x: 1 for x in range(4)}, q=1), 1)
    empty = Structure(GRAPH_SIG, [], {})
    assert verify_ltd_partition(empty, Partition({}, q=3), 2)


def test_find_ltd_partition():
    p4 = P(4)
    # q=2, p=2 is impossible: both parts together induce all of P4 (td 3)
    assert find_ltd_partition(p4, 2, 2) is None
    found = find_ltd_partition(p4, 3, 2)
    assert found is not None and verify_ltd_partition(p4, found, 3)
    k4 = K(4)
    singletons = find_ltd_partition(k4, 2, 4)
    assert singletons is not None and verify_ltd_partition(k4, singletons, 2)
    assert find_ltd_partition(k4, 2, 2) is None


def test_sparse_examples():
    ok, _ = is_uniformly_k_sparse(K(4), 1)
    assert not ok
    ok, orientation = is_uniformly_k_sparse(P(6), 1)
    assert ok
    indeg = {}
    for e, h in orientation.items():
        assert h in e
        indeg[h] = indeg.get(h, 0) + 1
    assert all(v <= 1 for v in indeg.values())


def test_sparse_matches_density_oracle():
    rng = random.Random(77)
    for _ in range(25):
        n = rng.randint(1, 7)
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.5]
        G = __import__("fpduality").encode_graph(range(n), edges)
        for k in (1, 2):
            ok, orientation = is_uniformly_k_sparse(G, k)
            # oracle: every vertex subset spans at most k*|subset| edges
            dense = True
            for r in range(1, n + 1):
                for sub in itertools.combinations(range(n), r):
                    spanned = sum(1 for e in edges if set(e) <= set(sub))
                    if spanned > k * r:
                        dense = False
            assert ok == dense
            if ok:
                indeg = {}
                for e, h in orientation.items():
                    indeg[h] = indeg.get(h, 0) + 1
                assert all(v <= k for v in indeg.values())
