"""Shared builders and independent brute-force oracles.

The oracles deliberately avoid the library's search kernels: homomorphisms
are enumerated with itertools.product and checked with hand-rolled loops, so
oracle agreement tests mean something.
"""

import itertools
import random

import pytest

from fpduality.relstruct import (
    GRAPH_SIG,
    ColouredStructure,
    Signature,
    Structure,
    as_coloured,
    encode_graph,
)


def K(n):
    return encode_graph(range(n), [(a, b) for a in range(n) for b in range(a + 1, n)])


def C(n):
    return encode_graph(range(n), [(i, (i + 1) % n) for i in range(n)])


def P(n):
    return encode_graph(range(n), [(i, i + 1) for i in range(n - 1)])


def arc(x=0, y=1):
    return Structure(GRAPH_SIG, [x, y], {"E": [(x, y)]})


def digraph(n, arcs):
    return Structure(GRAPH_SIG, range(n), {"E": arcs})


def random_digraph(rng, n, p=0.3, loops=True):
    arcs = [
        (x, y)
        for x in range(n)
        for y in range(n)
        if (loops or x != y) and rng.random() < p
    ]
    return Structure(GRAPH_SIG, range(n), {"E": arcs})


def random_coloured(rng, n, vpalette, epalette, p=0.3, loops=True):
    S = random_digraph(rng, n, p, loops)
    return ColouredStructure(
        S,
        {x: rng.choice(vpalette) for x in S.domain},
        {occ: rng.choice(epalette) for occ in S.occurrences()},
    )


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def oracle_is_hom(A, B, mapping):
    """Hand-rolled colour-preserving homomorphism check."""
    A, B = as_coloured(A), as_coloured(B)
    for x in A.domain:
        if mapping[x] not in set(B.domain):
            return False
        if B.vcol[mapping[x]] != A.vcol[x]:
            return False
    for name in A.signature.names:
        for t in A.base.relations[name]:
            img = tuple(mapping[e] for e in t)
            if img not in B.base.relations[name]:
                return False
            if B.ecol[(name, img)] != A.ecol[(name, t)]:
                return False
    return True


def oracle_all_homs(A, B):
    """Every colour-preserving homomorphism, by full enumeration."""
    A, B = as_coloured(A), as_coloured(B)
    out = []
    dom, tgt = list(A.domain), list(B.domain)
    if not dom:
        return [{}]
    for values in itertools.product(tgt, repeat=len(dom)):
        mapping = dict(zip(dom, values))
        if oracle_is_hom(A, B, mapping):
            out.append(mapping)
    return out


def oracle_isomorphic(A, B):
    """Brute-force coloured isomorphism by permutation search."""
    A, B = as_coloured(A), as_coloured(B)
    if A.size != B.size or A.signature != B.signature:
        return False
    dom, tgt = list(A.domain), list(B.domain)
    for perm in itertools.permutations(tgt):
        mapping = dict(zip(dom, perm))
        if not oracle_is_hom(A, B, mapping):
            continue
        inverse = {v: k for k, v in mapping.items()}
        if oracle_is_hom(B, A, inverse):
            return True
    return False


def oracle_decide_fpp(S, problem):
    """Naive double loop: all colourings x all pattern maps.

    Mirrors the problem semantics including the undirected convention
    (symmetric closure, arc pairs coloured together).
    """
    from fpduality.relstruct import symmetric_closure

    if problem.undirected:
        S = symmetric_closure(S)
    occs = S.occurrences()
    units, done = [], set()
    for occ in occs:
        if occ in done:
            continue
        name, t = occ
        unit = {occ}
        if problem.undirected and len(t) == 2 and (name, (t[1], t[0])) in set(occs):
            unit.add((name, (t[1], t[0])))
        done |= unit
        units.append(sorted(unit))
    for vcombo in itertools.product(problem.vpalette, repeat=len(S.domain)):
        vcol = dict(zip(S.domain, vcombo))
        for ecombo in itertools.product(problem.epalette, repeat=len(units)):
            ecol = {}
            for unit, colour in zip(units, ecombo):
                for occ in unit:
                    ecol[occ] = colour
            CS = ColouredStructure(S, vcol, ecol)
            if not any(oracle_all_homs(p.body, CS) for p in problem.patterns):
                return True
    return False


@pytest.fixture
def rng():
    return random.Random(20240817)
