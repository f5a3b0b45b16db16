"""Homomorphism search and core computation for (coloured) structures.

One backtracking kernel serves coloured and uncoloured inputs: plain
structures are promoted to single-colour coloured structures.  The search is
deterministic: source elements are ordered by decreasing degree (ties by id),
candidates are scanned in sorted order.
"""

from __future__ import annotations

import itertools

from .errors import BudgetExceeded, CapExceeded, FPDError
from . import relstruct
from .relstruct import ColouredStructure, as_coloured, induced, is_isomorphic

CORE_CAP = 10
ENUM_BUDGET = 2_000_000


def check_hom(A, B, mapping):
    """True iff `mapping` is a colour-preserving homomorphism A -> B."""
    A, B = as_coloured(A), as_coloured(B)
    if A.signature != B.signature:
        return False
    if set(mapping) != set(A.domain):
        return False
    if any(v not in set(B.domain) for v in mapping.values()):
        return False
    for x in A.domain:
        if B.vcol[mapping[x]] != A.vcol[x]:
            return False
    for (name, t), colour in A.ecol.items():
        img = tuple(mapping[x] for x in t)
        if img not in B.relations[name]:
            return False
        if B.ecol[(name, img)] != colour:
            return False
    return True


class _Matcher:
    """Backtracking with forward-checked candidate sets.

    The target's (symbol, position, element) index is cached on the target
    structure, so matching many sources against one big target is cheap.
    """

    def __init__(self, A, B):
        if A.signature != B.signature:
            raise FPDError("find_hom: signature mismatch")
        self.A, self.B = A, B
        self.pos_index = B.base.position_index()
        self.order = sorted(A.domain, key=lambda x: (-len(A.base.incident(x)), x))

    def initial_candidates(self):
        A, B = self.A, self.B
        base = {}
        for x in A.domain:
            cands = {v for v in B.domain if B.vcol[v] == A.vcol[x]}
            # x occurring at (name, i) forces its image to occur there too
            positions = set()
            for name, t in A.base.incident(x):
                for i, e in enumerate(t):
                    if e == x:
                        positions.add((name, i))
            for name, i in positions:
                cands = {v for v in cands if (name, i, v) in self.pos_index}
            if not cands:
                return None
            base[x] = cands
        return base

    def _consistent(self, x, v, assigned):
        """Check tuples of A through x whose other elements are assigned."""
        A, B = self.A, self.B
        assigned[x] = v
        try:
            for name, t in A.base.incident(x):
                if all(e in assigned for e in t):
                    img = tuple(assigned[e] for e in t)
                    if img not in B.relations[name]:
                        return False
                    if B.ecol[(name, img)] != A.ecol[(name, t)]:
                        return False
            return True
        finally:
            del assigned[x]

    def _prune(self, x, cands, assigned):
        """Filter neighbour candidates against partially assigned tuples."""
        A, B = self.A, self.B
        out = cands
        for name, t in A.base.incident(x):
            unassigned = [e for e in set(t) if e not in assigned]
            if len(unassigned) != 1:
                continue
            (y,) = unassigned
            colour = A.ecol[(name, t)]
            allowed = set()
            for bt in self._match_partial(name, t, assigned):
                if B.ecol[(name, bt)] != colour:
                    continue
                vals = {bt[i] for i, e in enumerate(t) if e == y}
                if len(vals) == 1:
                    allowed |= vals
            new = allowed & out[y] if len(allowed) < len(out[y]) else out[y] & allowed
            if not new:
                return None
            if out is cands:
                out = dict(cands)
            out[y] = new
        return out

    def _match_partial(self, name, t, assigned):
        """Target tuples agreeing with the assigned positions of t."""
        best = None
        for i, e in enumerate(t):
            if e in assigned:
                bucket = self.pos_index.get((name, i, assigned[e]), [])
                if best is None or len(bucket) < len(best):
                    best = bucket
        if best is None:
            return list(self.B.relations[name])
        out = []
        for bt in best:
            ok = True
            for i, e in enumerate(t):
                if e in assigned and bt[i] != assigned[e]:
                    ok = False
                    break
            if ok:
                out.append(bt)
        return out

    def solutions(self, budget=None):
        cands0 = self.initial_candidates()
        if cands0 is None:
            return
        counter = itertools.count()

        def extend(i, assigned, cands):
            if budget is not None and next(counter) > budget:
                raise BudgetExceeded("homomorphism search budget exceeded")
            if i == len(self.order):
                yield dict(assigned)
                return
            x = self.order[i]
            for v in sorted(cands[x]):
                if not self._consistent(x, v, assigned):
                    continue
                assigned[x] = v
                pruned = self._prune(x, cands, assigned)
                if pruned is not None:
                    yield from extend(i + 1, assigned, pruned)
                del assigned[x]

        yield from extend(0, {}, cands0)


def _components_of(CS):
    return [frozenset(c.domain) for c in relstruct.components(CS.base)]


def _coloured_components(B):
    if getattr(B, "_comp_cache", None) is None:
        B._comp_cache = tuple(
            ColouredStructure(
                comp,
                {x: B.vcol[x] for x in comp.domain},
                {occ: B.ecol[occ] for occ in comp.occurrences()},
            )
            for comp in B.base.component_structures()
        )
    return B._comp_cache


def _find_connected(A, B, budget):
    """Match connected A against B, one target component at a time."""
    bcomps = B.base.component_structures()
    if len(bcomps) <= 1:
        return next(_Matcher(A, B).solutions(budget), None)
    for sub in _coloured_components(B):
        found = next(_Matcher(A, sub).solutions(budget), None)
        if found is not None:
            return found
    return None


def find_hom(A, B, budget=None):
    """A colour-preserving homomorphism A -> B, or None.

    Connected components of A are matched independently; a connected source
    maps inside a single component of B, so disjoint-union-like targets are
    searched per cached component.
    """
    A, B = as_coloured(A), as_coloured(B)
    if A.signature != B.signature:
        raise FPDError("find_hom: signature mismatch")
    acomps = _components_of(A)
    if len(acomps) <= 1:
        return _find_connected(A, B, budget)
    mapping = {}
    for comp in acomps:
        part = _find_connected(induced(A, comp), B, budget)
        if part is None:
            return None
        mapping.update(part)
    return mapping


def enumerate_homs(A, B, limit=None, budget=ENUM_BUDGET):
    """All colour-preserving homomorphisms A -> B in deterministic order."""
    A, B = as_coloured(A), as_coloured(B)
    if limit is None and B.size > 0 and B.size ** A.size > budget:
        raise BudgetExceeded(
            f"enumerate_homs: |B|^|A| = {B.size ** A.size} exceeds budget; pass limit="
        )
    out = []
    if A.size == 0:
        return [{}]
    for h in _Matcher(A, B).solutions(budget):
        out.append(h)
        if limit is not None and len(out) >= limit:
            break
    return out


def hom_equivalent(A, B):
    """Colour-homomorphic both ways."""
    return find_hom(A, B) is not None and find_hom(B, A) is not None


def _proper_retract_step(CS):
    """An endomorphism into an induced substructure missing one element."""
    for x in CS.domain:
        target = induced(CS, set(CS.domain) - {x})
        h = find_hom(CS, target)
        if h is not None:
            return target, h
    return None


def core(CS, cap=CORE_CAP):
    """The core: iterated proper-retract descent to a retract-free structure."""
    CS = as_coloured(CS)
    if CS.size > cap:
        raise CapExceeded(f"core cap {cap} exceeded (size {CS.size})", forecast=CS.size)
    current = CS
    while True:
        step = _proper_retract_step(current)
        if step is None:
            return current
        current = step[0]


def is_core(CS):
    """No proper retract: no colour-hom into any proper induced substructure."""
    CS = as_coloured(CS)
    return _proper_retract_step(CS) is None
