"""Forbidden-patterns problems: validity and the brute-force decision oracle.

A problem fixes a signature, vertex/edge palettes and a set of connected
fully-coloured patterns.  A coloured structure is valid iff no pattern maps
into it colour-preservingly; the decision procedure searches for a colouring
making the input valid.

Problems over undirected graphs carry `undirected=True`: inputs and patterns
are normalized to symmetric closures and the two arcs of an edge are coloured
as one unit, so answers do not depend on the chosen encoding orientation.
"""

from __future__ import annotations

import itertools

from .errors import BudgetExceeded, FPDError
from .hom import find_hom
from .relstruct import (
    GRAPH_SIG,
    ColouredStructure,
    Structure,
    as_coloured,
    base_of,
    canonical_form,
    diameter,
    encode_graph,
    is_connected,
    symmetric_closure,
)


class Pattern:
    """A connected, fully coloured finite structure used as an obstruction."""

    def __init__(self, body):
        body = as_coloured(body)
        if body.size == 0:
            raise FPDError("patterns must be nonempty")
        if not is_connected(body.base):
            raise FPDError("patterns must be connected")
        self.body = body

    @property
    def size(self):
        return self.body.size

    def diameter(self):
        return diameter(self.body.base)

    def __repr__(self):
        return f"Pattern(n={self.size})"


class Problem:
    """Signature, palettes, and canonically deduplicated patterns."""

    def __init__(self, signature, vpalette, epalette, patterns, undirected=False, name=None):
        self.signature = signature
        self.vpalette = tuple(vpalette)
        self.epalette = tuple(epalette)
        self.undirected = bool(undirected)
        self.name = name
        if len(set(self.vpalette)) != len(self.vpalette) or not self.vpalette:
            raise FPDError("vertex palette must be a nonempty ordered set")
        if len(set(self.epalette)) != len(self.epalette) or not self.epalette:
            raise FPDError("edge palette must be a nonempty ordered set")
        seen = {}
        for p in patterns:
            p = p if isinstance(p, Pattern) else Pattern(p)
            if p.body.signature != signature:
                raise FPDError("pattern over a different signature")
            if not set(p.body.vcol.values()) <= set(self.vpalette):
                raise FPDError("pattern vertex colour outside the palette")
            if not set(p.body.ecol.values()) <= set(self.epalette):
                raise FPDError("pattern tuple colour outside the palette")
            if self.undirected:
                p = Pattern(_normalize_coloured(p.body))
            seen.setdefault(canonical_form(p.body), p)
        self.patterns = tuple(seen[k] for k in sorted(seen))

    def __repr__(self):
        return f"Problem({self.name or 'anon'}, |V|={len(self.vpalette)}, |E|={len(self.epalette)}, {len(self.patterns)} patterns)"


def _normalize_coloured(CS):
    """Symmetric closure of a coloured structure; arc pairs share a colour."""
    CS = as_coloured(CS)
    closed = symmetric_closure(CS.base)
    ecol = {}
    for name, t in closed.occurrences():
        if (name, t) in CS.ecol:
            ecol[(name, t)] = CS.ecol[(name, t)]
        else:
            ecol[(name, t)] = CS.ecol[(name, (t[1], t[0]))]
    for name, t in closed.occurrences():
        if len(t) == 2 and ecol[(name, t)] != ecol[(name, (t[1], t[0]))]:
            raise FPDError(f"arc pair {t} carries two colours in an undirected problem")
    return ColouredStructure(closed, dict(CS.vcol), ecol)


def is_valid(CS, problem):
    """True iff no pattern of the problem maps into CS colour-preservingly."""
    CS = as_coloured(CS)
    if CS.signature != problem.signature:
        raise FPDError("structure signature does not match the problem")
    if not set(CS.vcol.values()) <= set(problem.vpalette):
        raise FPDError("vertex colour outside the problem palette")
    if not set(CS.ecol.values()) <= set(problem.epalette):
        raise FPDError("tuple colour outside the problem palette")
    for p in problem.patterns:
        if find_hom(p.body, CS) is not None:
            return False
    return True


def _colour_units(S, problem):
    """Tuple-colouring units: occurrence singletons, or arc orbits if undirected."""
    units = []
    seen = set()
    for occ in S.occurrences():
        if occ in seen:
            continue
        name, t = occ
        if problem.undirected and len(t) == 2 and (name, (t[1], t[0])) in set(S.occurrences()):
            unit = frozenset({occ, (name, (t[1], t[0]))})
        else:
            unit = frozenset({occ})
        seen |= unit
        units.append(tuple(sorted(unit)))
    return units


class _AnchoredChecker:
    """Incremental pattern detection inside a partially coloured structure.

    A pattern can only become embeddable when the last item of some image
    gets its colour, so each assignment is checked by anchoring a pattern
    element (or a whole pattern occurrence) on the fresh item and extending
    over the coloured part.
    """

    def __init__(self, S, patterns):
        self.S = S
        self.pos_index = S.position_index()
        self.bodies = [p.body for p in patterns]
        self.orders = {}
        for body in self.bodies:
            for anchor in body.domain:
                self.orders[(id(body), anchor)] = self._bfs_order(body, anchor)

    @staticmethod
    def _bfs_order(body, anchor):
        from collections import deque

        order = [anchor]
        seen = {anchor}
        queue = deque([anchor])
        while queue:
            v = queue.popleft()
            for w in sorted(body.neighbours(v)):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    queue.append(w)
        return order

    def _seed_consistent(self, body, pm, ecol):
        """Tuples of the pattern fully mapped by pm exist with right colours."""
        for f in pm:
            for name, t in body.incident(f):
                if all(e in pm for e in t):
                    img = tuple(pm[e] for e in t)
                    if img not in self.S.relations[name]:
                        return False
                    if ecol.get((name, img)) != body.ecol[(name, t)]:
                        return False
        return True

    def _extend(self, body, rest, pm, vcol, ecol):
        if not rest:
            return True
        f = rest[0]
        # candidate images from tuples already partially mapped through f
        cands = None
        for name, t in body.incident(f):
            mapped = [(j, pm[e]) for j, e in enumerate(t) if e in pm]
            if not mapped:
                continue
            j0, v0 = mapped[0]
            here = set()
            for bt in self.pos_index.get((name, j0, v0), []):
                if any(bt[j] != v for j, v in mapped):
                    continue
                here |= {bt[j] for j, e in enumerate(t) if e == f}
            cands = here if cands is None else cands & here
            if not cands:
                return False
        if cands is None:
            cands = set(self.S.domain)
        colour = body.vcol[f]
        for v in sorted(cands):
            if vcol.get(v) != colour:
                continue
            pm[f] = v
            ok = True
            for name, t in body.incident(f):
                if all(e in pm for e in t):
                    img = tuple(pm[e] for e in t)
                    if img not in self.S.relations[name] or ecol.get((name, img)) != body.ecol[(name, t)]:
                        ok = False
                        break
            if ok and self._extend(body, rest[1:], pm, vcol, ecol):
                return True
            del pm[f]
        return False

    def hits_vertex(self, x, vcol, ecol, edge_phase):
        """Some pattern embeds into the coloured part using vertex x."""
        for body in self.bodies:
            if not edge_phase and body.occurrences():
                continue
            for anchor in body.domain:
                if body.vcol[anchor] != vcol[x]:
                    continue
                pm = {anchor: x}
                if not self._seed_consistent(body, pm, ecol):
                    continue
                order = self.orders[(id(body), anchor)]
                if self._extend(body, order[1:], pm, vcol, ecol):
                    return True
        return False

    def hits_unit(self, unit, vcol, ecol):
        """Some pattern embeds using one of the freshly coloured occurrences."""
        for name, t in unit:
            colour = ecol[(name, t)]
            for body in self.bodies:
                for pname, pt in body.occurrences():
                    if pname != name or body.ecol[(pname, pt)] != colour:
                        continue
                    pm = {}
                    ok = True
                    for e, v in zip(pt, t):
                        if pm.get(e, v) != v or body.vcol[e] != vcol.get(v):
                            ok = False
                            break
                        pm[e] = v
                    if not ok or not self._seed_consistent(body, pm, ecol):
                        continue
                    order = self.orders[(id(body), pt[0])]
                    rest = [f for f in order if f not in pm]
                    if self._extend(body, rest, pm, vcol, ecol):
                        return True
        return False


def decide_fpp(S, problem, budget=None):
    """A colouring (vcol, ecol) making S valid, or None if none exists.

    Backtracks over vertex colours, then tuple colours; each assignment is
    checked by anchored pattern search over the coloured part only.  Never
    silently wrong: if the node budget runs out, BudgetExceeded is raised.
    """
    S = base_of(S)
    if S.signature != problem.signature:
        raise FPDError("structure signature does not match the problem")
    if problem.undirected:
        S = symmetric_closure(S)
    units = _colour_units(S, problem)
    vorder = list(S.domain)
    nodes = itertools.count()
    checker = _AnchoredChecker(S, problem.patterns)

    def assign_edges(i, vcol, ecol):
        if budget is not None and next(nodes) > budget:
            raise BudgetExceeded("decide_fpp budget exceeded")
        if i == len(units):
            return dict(vcol), dict(ecol)
        for colour in problem.epalette:
            for occ in units[i]:
                ecol[occ] = colour
            if not checker.hits_unit(units[i], vcol, ecol):
                found = assign_edges(i + 1, vcol, ecol)
                if found is not None:
                    return found
            for occ in units[i]:
                del ecol[occ]
        return None

    def assign_vertices(i, vcol):
        if budget is not None and next(nodes) > budget:
            raise BudgetExceeded("decide_fpp budget exceeded")
        if i == len(vorder):
            return assign_edges(0, vcol, {})
        x = vorder[i]
        for colour in problem.vpalette:
            vcol[x] = colour
            if not checker.hits_vertex(x, vcol, {}, edge_phase=False):
                found = assign_vertices(i + 1, vcol)
                if found is not None:
                    return found
            del vcol[x]
        return None

    witness = assign_vertices(0, {})
    if witness is None:
        return None
    vcol, ecol = witness
    assert is_valid(ColouredStructure(S, vcol, ecol), problem)
    return vcol, ecol


def params(problem):
    """(m, p): max pattern Gaifman diameter and max pattern size; (0,0) if none."""
    if not problem.patterns:
        return 0, 0
    return (
        max(p.diameter() for p in problem.patterns),
        max(p.size for p in problem.patterns),
    )


def _mono_triangle(vcolour, ecolour):
    tri = symmetric_closure(encode_graph([0, 1, 2], [(0, 1), (1, 2), (2, 0)]))
    return Pattern(
        ColouredStructure(
            tri,
            {x: vcolour for x in tri.domain},
            {occ: ecolour for occ in tri.occurrences()},
        )
    )


def _coloured_triangle(vcolours, ecolour):
    tri = symmetric_closure(encode_graph([0, 1, 2], [(0, 1), (1, 2), (2, 0)]))
    return Pattern(
        ColouredStructure(
            tri,
            {x: vcolours[x] for x in tri.domain},
            {occ: ecolour for occ in tri.occurrences()},
        )
    )


def _mono_edge(vcolour, ecolour):
    edge = encode_graph([0, 1], [(0, 1)])
    return Pattern(
        ColouredStructure(
            edge,
            {x: vcolour for x in edge.domain},
            {occ: ecolour for occ in edge.occurrences()},
        )
    )


BUILTIN_NAMES = ("vertex-no-mono-tri", "tri-free-tri", "edge-no-mono-tri")


def builtin(name):
    """The three undirected graph problems of the worked examples."""
    if name == "vertex-no-mono-tri":
        vp = ("1", "2")
        return Problem(
            GRAPH_SIG, vp, ("-",),
            [_mono_triangle(c, "-") for c in vp],
            undirected=True, name=name,
        )
    if name == "edge-no-mono-tri":
        ep = ("1", "2")
        return Problem(
            GRAPH_SIG, ("-",), ep,
            [_mono_triangle("-", c) for c in ep],
            undirected=True, name=name,
        )
    if name == "tri-free-tri":
        vp = ("1", "2", "3")
        patterns = [_mono_edge(c, "-") for c in vp]
        for combo in itertools.product(vp, repeat=3):
            patterns.append(_coloured_triangle(dict(enumerate(combo)), "-"))
        return Problem(GRAPH_SIG, vp, ("-",), patterns, undirected=True, name=name)
    raise FPDError(f"unknown builtin problem {name!r}; known: {BUILTIN_NAMES}")
