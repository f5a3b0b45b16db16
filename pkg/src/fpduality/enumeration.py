"""Exhaustive enumeration of small structures, up to isomorphism or labelled.

The iso-free enumerator grows connected structures one tuple at a time
(every connected structure has a tuple order whose prefixes stay connected),
deduplicating by canonical form.  The labelled enumerator ranges over all
relation subsets on all label subsets and is guarded by a candidate-count
forecast, since it is only feasible for very small label pools.
"""

from __future__ import annotations

import itertools

from .errors import CapExceeded, FPDError
from .relstruct import (
    ColouredStructure,
    Structure,
    as_coloured,
    canonical_form,
    is_connected,
    symmetric_closure,
)

LABELLED_GUARD = 2_000_000


def graph_degree(S, x):
    """Number of distinct Gaifman neighbours (loop adds nothing)."""
    return len(S.neighbours(x))


def tuple_degree(S, x):
    return len(S.incident(x))


def _degree_ok(S, tuple_cap, graph_cap):
    for x in S.domain:
        if tuple_cap is not None and tuple_degree(S, x) > tuple_cap:
            return False
        if graph_cap is not None and graph_degree(S, x) > graph_cap:
            return False
    return True


def _expansions(S, sig, max_size, undirected, allow_loops):
    """All structures obtained by adding one tuple (with new elements allowed)."""
    n = S.size
    out = []
    for name, arity in sig.symbols:
        if undirected and arity != 2:
            raise FPDError("undirected enumeration expects binary symbols")
        max_new = min(arity, max_size - n)
        for new_count in range(0, max_new + 1):
            fresh = tuple(range(n, n + new_count))
            pool = tuple(S.domain) + fresh
            for t in itertools.product(pool, repeat=arity):
                used_fresh = [x for x in t if x >= n]
                if sorted(set(used_fresh)) != list(fresh):
                    continue  # fresh elements in order of introduction, all used
                first_pos = [min(i for i, e in enumerate(t) if e == f) for f in fresh]
                if first_pos != sorted(first_pos):
                    continue
                if n > 0 and not any(x < n for x in t):
                    continue  # keep growth connected
                if not allow_loops and arity == 2 and t[0] == t[1]:
                    continue
                if t in S.relations[name]:
                    continue
                if undirected and (t[1], t[0]) in S.relations[name]:
                    continue
                rels = {r: set(S.relations[r]) for r in sig.names}
                rels[name].add(t)
                if undirected and arity == 2:
                    rels[name].add((t[1], t[0]))
                out.append(Structure(sig, pool, rels))
    return out


def enumerate_connected_structures(
    signature,
    max_size,
    tuple_degree_cap=None,
    graph_degree_cap=None,
    undirected=False,
    allow_loops=True,
):
    """All connected structures with <= max_size elements, up to isomorphism.

    Undirected mode enumerates symmetric closures and compares degrees in the
    graph sense.
    """
    if max_size < 1:
        return []
    seeds = []
    single = Structure(signature, [0], {})
    seeds.append(single)
    if allow_loops:
        loopable = [name for name, arity in signature.symbols]
        for r in range(1, len(loopable) + 1):
            for combo in itertools.combinations(loopable, r):
                rels = {
                    name: [tuple([0] * signature.arity(name))] for name in combo
                }
                seeds.append(Structure(signature, [0], rels))
    seen = {}
    frontier = []
    for S in seeds:
        if not _degree_ok(S, tuple_degree_cap, graph_degree_cap):
            continue
        key = canonical_form(S, cap=max(max_size, 10))
        if key not in seen:
            seen[key] = S
            frontier.append(S)
    while frontier:
        next_frontier = []
        for S in frontier:
            for T in _expansions(S, signature, max_size, undirected, allow_loops):
                if not _degree_ok(T, tuple_degree_cap, graph_degree_cap):
                    continue
                key = canonical_form(T, cap=max(max_size, 10))
                if key not in seen:
                    seen[key] = T
                    next_frontier.append(T)
        frontier = next_frontier
    return [seen[k] for k in sorted(seen)]


def colourings_of(S, vpalette, epalette, undirected=False):
    """All total (vcol, ecol) colourings of S, as coloured structures.

    In undirected mode the two arcs of an edge are coloured together.
    """
    occs = S.occurrences()
    if undirected:
        units, done = [], set()
        for name, t in occs:
            if (name, t) in done:
                continue
            unit = {(name, t)}
            if len(t) == 2 and (name, (t[1], t[0])) in set(occs):
                unit.add((name, (t[1], t[0])))
            done |= unit
            units.append(sorted(unit))
    else:
        units = [[occ] for occ in occs]
    domain = list(S.domain)
    for vcombo in itertools.product(vpalette, repeat=len(domain)):
        vcol = dict(zip(domain, vcombo))
        for ecombo in itertools.product(epalette, repeat=len(units)):
            ecol = {}
            for unit, colour in zip(units, ecombo):
                for occ in unit:
                    ecol[occ] = colour
            yield ColouredStructure(S, vcol, ecol)


def labelled_structures(signature, labels, undirected=False, allow_loops=True):
    """All structures with domain a nonempty subset of `labels` (guarded)."""
    labels = sorted(labels)
    total = 0
    for k in range(1, len(labels) + 1):
        slots = 0
        for name, arity in signature.symbols:
            if undirected:
                slots += k * (k - 1) // 2 + (k if allow_loops else 0)
            else:
                slots += k ** arity if allow_loops else k ** arity - k
        total += _comb(len(labels), k) * (2 ** slots)
    if total > LABELLED_GUARD:
        raise CapExceeded(
            f"labelled enumeration would scan {total} candidates; "
            "use the reduced (iso-deduplicated) mode instead",
            forecast=total,
        )
    out = []
    for k in range(1, len(labels) + 1):
        for dom in itertools.combinations(labels, k):
            domset = set(dom)
            slot_list = []
            for name, arity in signature.symbols:
                if undirected:
                    pairs = [
                        (x, y) for x, y in itertools.combinations(dom, 2)
                    ]
                    if allow_loops:
                        pairs += [(x, x) for x in dom]
                    slot_list += [(name, t) for t in pairs]
                else:
                    for t in itertools.product(dom, repeat=arity):
                        if not allow_loops and len(set(t)) < arity:
                            continue
                        slot_list.append((name, t))
            for mask in range(2 ** len(slot_list)):
                rels = {name: set() for name in signature.names}
                for i, (name, t) in enumerate(slot_list):
                    if mask >> i & 1:
                        rels[name].add(t)
                        if undirected:
                            rels[name].add((t[1], t[0]))
                out.append(Structure(signature, domset, rels))
    return out


def _comb(n, k):
    import math

    return math.comb(n, k)
