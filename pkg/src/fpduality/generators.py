"""Deterministic input-class generators for the verification harness.

Every emitted structure is audited against its class (degree, tree-depth,
sparsity) and carries a stamp recording the audit, so the harness never
feeds out-of-class inputs to a duality check.
"""

from __future__ import annotations

import itertools
import random

from .errors import FPDError
from .enumeration import enumerate_connected_structures, graph_degree, tuple_degree
from .relstruct import GRAPH_SIG, Structure, is_connected, symmetric_closure
from .treedepth import Partition, is_uniformly_k_sparse, tree_depth, verify_ltd_partition
from .universal import witness_gn


def degree_graphs(b, max_n):
    """All connected loopless graphs of degree <= b with <= max_n vertices,
    up to isomorphism, as symmetric closures."""
    for S in enumerate_connected_structures(
        GRAPH_SIG, max_n, graph_degree_cap=b, undirected=True, allow_loops=False
    ):
        assert all(graph_degree(S, x) <= b for x in S.domain)
        yield S, {"class": f"degree{b}", "n": S.size}


def degree_digraphs(b, max_n):
    """All connected digraphs with every element in <= b tuples, up to iso."""
    for S in enumerate_connected_structures(
        GRAPH_SIG, max_n, tuple_degree_cap=b, undirected=False, allow_loops=True
    ):
        assert all(tuple_degree(S, x) <= b for x in S.domain)
        yield S, {"class": f"degree{b}-digraph", "n": S.size}


def random_digraphs(seed, count, max_n, arc_prob=0.3):
    rng = random.Random(seed)
    for i in range(count):
        n = rng.randint(1, max_n)
        arcs = [
            (x, y)
            for x in range(n)
            for y in range(n)
            if rng.random() < arc_prob
        ]
        yield Structure(GRAPH_SIG, range(n), {"E": arcs}), {
            "class": "random-digraph",
            "seed": seed,
            "index": i,
        }


def bounded_td_structures(p, seed, count, max_n=7, arc_prob=0.35):
    """Seeded connected digraphs with verified tree-depth <= p."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        n = rng.randint(1, max_n)
        arcs = [(x, y) for x in range(n) for y in range(n) if rng.random() < arc_prob]
        S = Structure(GRAPH_SIG, range(n), {"E": arcs})
        if not is_connected(S):
            continue
        td, _ = tree_depth(S)
        if td <= p:
            made += 1
            yield S, {"class": f"bounded-td-{p}", "td": td, "seed": seed}


def sparse_witnesses(ns):
    """The G_n family with its in-degree-<=2 orientation audit."""
    for n in ns:
        G, specials, orientation = witness_gn(n)
        ok, _ = is_uniformly_k_sparse(G, 2)
        assert ok
        yield G, {"class": "k-sparse-witness", "n": n, "specials": specials}


def _oriented_forest(rng, n):
    """A random oriented forest on n elements (arcs toward/away at random)."""
    arcs = []
    for x in range(1, n):
        parent = rng.randrange(x)
        arcs.append((parent, x) if rng.random() < 0.5 else (x, parent))
    return arcs


def ltd_partitioned_structures(seed, count, q, p, max_n=8):
    """Seeded sparse digraphs together with a verified LTD partition.

    Built from oriented forests plus an occasional 4-cycle chord, so the
    leave-one-part-out pieces stay within reach of small core unions; each
    emitted partition is re-verified (any p of the q parts induce tree-depth
    at most p).
    """
    rng = random.Random(seed)
    made = 0
    while made < count:
        n = rng.randint(4, max_n)
        arcs = set(_oriented_forest(rng, n))
        if n >= 4 and rng.random() < 0.5:
            cyc = rng.sample(range(n), 4)
            extra = [
                (cyc[0], cyc[1]), (cyc[1], cyc[2]), (cyc[2], cyc[3]), (cyc[3], cyc[0]),
            ]
            arcs |= set(extra)
        S = Structure(GRAPH_SIG, range(n), {"E": arcs})
        if not is_connected(S):
            continue
        part_of = {x: (x % q) + 1 for x in S.domain}
        partition = Partition(part_of, q=q)
        if not verify_ltd_partition(S, partition, p):
            continue
        made += 1
        yield S, partition, {"class": f"ltd-q{q}-p{p}", "seed": seed, "n": n}


def generator_for(spec, seed=0, max_n=6, count=50):
    """CLI-facing dispatch from a class spec string."""
    if spec.startswith("degree") and spec.endswith("-digraph"):
        return (pair for pair in degree_digraphs(int(spec[6:-8]), max_n))
    if spec.startswith("degree"):
        return (pair for pair in degree_graphs(int(spec[6:]), max_n))
    if spec.startswith("bounded-td-"):
        return bounded_td_structures(int(spec[11:]), seed, count, max_n=max_n)
    if spec == "k-sparse-witness":
        return sparse_witnesses(range(2, 2 + count))
    if spec == "random-digraph":
        return random_digraphs(seed, count, max_n)
    raise FPDError(f"unknown generator class {spec!r}")
