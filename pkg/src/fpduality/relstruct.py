"""Finite relational structures, coloured structures, and structural utilities.

Elements are dense nonnegative integers; external names are attached only at
file load/save time.  Structures and coloured structures are immutable after
construction, so every operation here is safe to call concurrently.
"""

from __future__ import annotations

import itertools
from collections import deque

from .errors import CapExceeded, FPDError

# A tuple occurrence is a pair (relation name, tuple of elements).
Occurrence = tuple


class Signature:
    """Ordered list of relation symbols with arities."""

    def __init__(self, symbols):
        symbols = tuple((str(name), int(arity)) for name, arity in symbols)
        names = [name for name, _ in symbols]
        if len(set(names)) != len(names):
            raise FPDError("duplicate relation symbol names")
        for name, arity in symbols:
            if arity < 1:
                raise FPDError(f"arity of {name} must be >= 1")
        self.symbols = symbols
        self._arity = dict(symbols)

    @property
    def names(self):
        return tuple(name for name, _ in self.symbols)

    def arity(self, name):
        return self._arity[name]

    @property
    def max_arity(self):
        return max((a for _, a in self.symbols), default=0)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        inner = ", ".join(f"{n}/{a}" for n, a in self.symbols)
        return f"Signature({inner})"


GRAPH_SIG = Signature([("E", 2)])


class Structure:
    """A finite relational structure over a fixed signature.

    `relations` maps each symbol name to a frozenset of element tuples.
    Per-element incidence and Gaifman adjacency are precomputed.
    """

    def __init__(self, signature, domain, relations, names=None):
        self.signature = signature
        self.domain = tuple(sorted(set(int(x) for x in domain)))
        domset = set(self.domain)
        rels = {}
        for name, arity in signature.symbols:
            tuples = frozenset(tuple(int(x) for x in t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise FPDError(f"tuple {t} has wrong arity for {name}/{arity}")
                if not set(t) <= domset:
                    raise FPDError(f"tuple {t} of {name} mentions elements outside the domain")
            rels[name] = tuples
        unknown = set(relations) - set(signature.names)
        if unknown:
            raise FPDError(f"relations not in signature: {sorted(unknown)}")
        self.relations = rels
        self.names = tuple(names) if names is not None else None

        incident = {x: [] for x in self.domain}
        adj = {x: set() for x in self.domain}
        for name in signature.names:
            for t in sorted(rels[name]):
                occ = (name, t)
                for x in set(t):
                    incident[x].append(occ)
                for x, y in itertools.combinations(set(t), 2):
                    adj[x].add(y)
                    adj[y].add(x)
        self._incident = {x: tuple(v) for x, v in incident.items()}
        self._adj = {x: frozenset(v) for x, v in adj.items()}
        self._position_index = None
        self._component_cache = None

    def position_index(self):
        """(symbol, position, element) -> tuple list; built once, cached."""
        if self._position_index is None:
            index = {}
            for name in self.signature.names:
                for t in sorted(self.relations[name]):
                    for i, v in enumerate(t):
                        index.setdefault((name, i, v), []).append(t)
            self._position_index = index
        return self._position_index

    def component_structures(self):
        """Induced substructures per connected component; built once, cached."""
        if self._component_cache is None:
            self._component_cache = tuple(components(self))
        return self._component_cache

    def occurrences(self):
        """All tuple occurrences, sorted."""
        out = []
        for name in self.signature.names:
            out.extend((name, t) for t in sorted(self.relations[name]))
        return out

    def incident(self, x):
        return self._incident[x]

    def neighbours(self, x):
        """Gaifman neighbours of x (loopless, symmetric)."""
        return self._adj[x]

    def holds(self, name, t):
        return tuple(t) in self.relations[name]

    @property
    def size(self):
        return len(self.domain)

    @property
    def n_tuples(self):
        return sum(len(v) for v in self.relations.values())

    def labelled_key(self):
        """Bytes identifying this structure up to label-preserving equality."""
        parts = [repr(self.signature.symbols), repr(self.domain)]
        for name in self.signature.names:
            parts.append(name + repr(sorted(self.relations[name])))
        return "|".join(parts).encode()

    def __eq__(self, other):
        return (
            isinstance(other, Structure)
            and self.signature == other.signature
            and self.domain == other.domain
            and self.relations == other.relations
        )

    def __hash__(self):
        return hash(self.labelled_key())

    def __repr__(self):
        return f"Structure({self.signature!r}, n={self.size}, tuples={self.n_tuples})"


class ColouredStructure:
    """A structure with total vertex- and tuple-colour maps."""

    def __init__(self, base, vcol, ecol):
        self.base = base
        vcol = dict(vcol)
        ecol = {(name, tuple(t)): c for (name, t), c in dict(ecol).items()}
        if set(vcol) != set(base.domain):
            raise FPDError("vertex colouring must cover exactly the domain")
        if set(ecol) != set(base.occurrences()):
            raise FPDError("tuple colouring must cover exactly the tuple set")
        self.vcol = vcol
        self.ecol = ecol

    @property
    def signature(self):
        return self.base.signature

    @property
    def domain(self):
        return self.base.domain

    @property
    def size(self):
        return self.base.size

    @property
    def relations(self):
        return self.base.relations

    def occurrences(self):
        return self.base.occurrences()

    def incident(self, x):
        return self.base.incident(x)

    def neighbours(self, x):
        return self.base.neighbours(x)

    def labelled_key(self):
        vp = repr(sorted((x, repr(c)) for x, c in self.vcol.items()))
        ep = repr(sorted((name, t, repr(c)) for (name, t), c in self.ecol.items()))
        return self.base.labelled_key() + b"#" + vp.encode() + b"#" + ep.encode()

    def __eq__(self, other):
        return (
            isinstance(other, ColouredStructure)
            and self.base == other.base
            and self.vcol == other.vcol
            and self.ecol == other.ecol
        )

    def __hash__(self):
        return hash(self.labelled_key())

    def __repr__(self):
        return f"ColouredStructure({self.base!r})"


def as_coloured(S, vcolour="_", ecolour="_"):
    """Promote a plain structure to a single-colour coloured structure."""
    if isinstance(S, ColouredStructure):
        return S
    return ColouredStructure(
        S, {x: vcolour for x in S.domain}, {occ: ecolour for occ in S.occurrences()}
    )


def base_of(S):
    return S.base if isinstance(S, ColouredStructure) else S


def tuple_set(S):
    """E(S): one occurrence per (symbol, tuple) pair holding in S."""
    return frozenset(base_of(S).occurrences())


def gaifman(S):
    """The Gaifman graph: loopless symmetric structure over {adj/2}."""
    S = base_of(S)
    arcs = set()
    for x in S.domain:
        for y in S.neighbours(x):
            arcs.add((x, y))
    return Structure(Signature([("adj", 2)]), S.domain, {"adj": arcs})


def _component_sets(S):
    S = base_of(S)
    seen = set()
    comps = []
    for start in S.domain:
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in S.neighbours(x):
                if y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def components(S):
    """Connected components as induced substructures (singletons included)."""
    return [induced(S, comp) for comp in _component_sets(S)]


def is_connected(S):
    return len(_component_sets(S)) <= 1


def induced(S, subset):
    """Substructure induced by `subset`: keeps tuples entirely inside it."""
    subset = frozenset(subset)
    B = base_of(S)
    if not subset <= set(B.domain):
        raise FPDError("induced(): subset has elements outside the domain")
    rels = {
        name: [t for t in B.relations[name] if set(t) <= subset]
        for name in B.signature.names
    }
    sub = Structure(B.signature, subset, rels)
    if isinstance(S, ColouredStructure):
        return ColouredStructure(
            sub,
            {x: S.vcol[x] for x in sub.domain},
            {occ: S.ecol[occ] for occ in sub.occurrences()},
        )
    return sub


def relabel(S, mapping):
    """Apply an injective relabelling to the domain."""
    B = base_of(S)
    if len(set(mapping.values())) != len(B.domain):
        raise FPDError("relabel(): mapping must be injective and total")
    rels = {
        name: [tuple(mapping[x] for x in t) for t in B.relations[name]]
        for name in B.signature.names
    }
    out = Structure(B.signature, [mapping[x] for x in B.domain], rels)
    if isinstance(S, ColouredStructure):
        return ColouredStructure(
            out,
            {mapping[x]: c for x, c in S.vcol.items()},
            {(name, tuple(mapping[x] for x in t)): c for (name, t), c in S.ecol.items()},
        )
    return out


def disjoint_union(A, B):
    """Disjoint union A+B of coloured structures, domains relabelled apart."""
    out, _ = disjoint_union_many([A, B])
    return out


def disjoint_union_many(parts):
    """Disjoint union of coloured structures.

    Returns (union, provenance) where provenance[new element] = (part index,
    original element).
    """
    parts = [as_coloured(P) for P in parts]
    if parts:
        sig = parts[0].signature
        for P in parts[1:]:
            if P.signature != sig:
                raise FPDError("disjoint union: signature mismatch")
    else:
        raise FPDError("disjoint union of nothing")
    offset = 0
    vcol, ecol, provenance = {}, {}, {}
    rels = {name: [] for name in sig.names}
    for i, P in enumerate(parts):
        mapping = {x: offset + j for j, x in enumerate(P.domain)}
        for x in P.domain:
            vcol[mapping[x]] = P.vcol[x]
            provenance[mapping[x]] = (i, x)
        for (name, t), c in P.ecol.items():
            nt = tuple(mapping[x] for x in t)
            rels[name].append(nt)
            ecol[(name, nt)] = c
        offset += P.size
    out = ColouredStructure(Structure(sig, range(offset), rels), vcol, ecol)
    return out, provenance


def degree(S, x):
    """Number of distinct tuple occurrences mentioning x."""
    B = base_of(S)
    if x not in B._incident:
        raise FPDError(f"element {x} not in domain")
    return len(B.incident(x))


def bfs_distances(S, start, limit=None):
    """Gaifman-graph distances from `start` (up to `limit` if given)."""
    B = base_of(S)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if limit is not None and dist[x] >= limit:
            continue
        for y in B.neighbours(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ball(S, centre, radius):
    """Elements at Gaifman distance <= radius from `centre`."""
    return frozenset(bfs_distances(S, centre, limit=radius))


def diameter(S):
    """Max over x of max Gaifman distance from x; requires connectivity."""
    B = base_of(S)
    if B.size == 0:
        raise FPDError("diameter of the empty structure")
    if not is_connected(B):
        raise FPDError("diameter of a disconnected structure")
    best = 0
    for x in B.domain:
        dist = bfs_distances(B, x)
        best = max(best, max(dist.values()))
    return best


def encode_graph(vertices, edges):
    """Encode a loopless undirected graph as the symmetric closure over {E/2}."""
    arcs = []
    for e in edges:
        x, y = tuple(e)
        if x == y:
            raise FPDError(f"loop at {x}: only simple graphs are encoded")
        arcs.append((x, y))
        arcs.append((y, x))
    return Structure(GRAPH_SIG, vertices, {"E": arcs})


def decode_graph(S):
    """Adjacency of a structure over one binary symbol, any orientation mix.

    Loops come back as singleton frozensets.
    """
    B = base_of(S)
    if len(B.signature.symbols) != 1 or B.signature.max_arity != 2:
        raise FPDError("decode_graph expects a single binary relation")
    name = B.signature.names[0]
    edges = {frozenset(t) for t in B.relations[name]}
    return set(B.domain), edges


def symmetric_closure(S):
    """Symmetric closure of every binary relation (normal form for graphs)."""
    B = base_of(S)
    rels = {}
    for name, arity in B.signature.symbols:
        ts = set(B.relations[name])
        if arity == 2:
            ts |= {(y, x) for x, y in ts}
        rels[name] = ts
    return Structure(B.signature, B.domain, rels)


# ---------------------------------------------------------------------------
# Canonical forms (colour refinement + individualization, minimum labelling)
# ---------------------------------------------------------------------------

CANON_CAP = 10
_CANON_LEAF_CAP = 200_000


def _refine(CS, classes):
    """Stable colour refinement of an ordered partition (dict elem -> class)."""
    B = CS.base
    while True:
        profiles = {}
        for x in B.domain:
            prof = []
            for name, t in B.incident(x):
                cls = tuple(classes[e] for e in t)
                pos = tuple(i for i, e in enumerate(t) if e == x)
                prof.append((name, repr(CS.ecol[(name, t)]), cls, pos))
            profiles[x] = (classes[x], tuple(sorted(prof)))
        order = sorted(set(profiles.values()))
        new = {x: order.index(profiles[x]) for x in B.domain}
        if new == classes:
            return classes
        classes = new


def _serialize_with(CS, label):
    B = CS.base
    parts = [repr(B.signature.symbols), str(B.size)]
    vseq = [repr(CS.vcol[x]) for x in sorted(B.domain, key=lambda x: label[x])]
    parts.append(",".join(vseq))
    for name in B.signature.names:
        rows = sorted(
            (tuple(label[e] for e in t), repr(CS.ecol[(name, t)]))
            for t in B.relations[name]
        )
        parts.append(name + repr(rows))
    return "|".join(parts).encode()


def canonical_form(S, cap=CANON_CAP):
    """Canonical key: equal keys iff colour-and-relation-preserving isomorphism.

    Colour refinement narrows the search; remaining ties are broken by
    individualization, taking the lexicographically minimal serialization.
    """
    CS = as_coloured(S)
    B = CS.base
    if B.size > cap:
        raise CapExceeded(
            f"canonical_form cap {cap} exceeded (size {B.size}); "
            "raise the cap only for structures you really need canonicalized",
            forecast=B.size,
        )
    if B.size == 0:
        return _serialize_with(CS, {})

    init_order = sorted({repr(CS.vcol[x]) for x in B.domain})
    classes = {x: init_order.index(repr(CS.vcol[x])) for x in B.domain}
    best = [None]
    leaves = [0]

    def class_lists(classes):
        buckets = {}
        for x in sorted(B.domain):
            buckets.setdefault(classes[x], []).append(x)
        return [buckets[c] for c in sorted(buckets)]

    def search(classes):
        classes = _refine(CS, classes)
        lists = class_lists(classes)
        target = next((lst for lst in lists if len(lst) > 1), None)
        if target is None:
            leaves[0] += 1
            if leaves[0] > _CANON_LEAF_CAP:
                raise CapExceeded("canonical_form search blow-up", forecast=leaves[0])
            label = {}
            for lst in lists:
                label[lst[0]] = len(label)
            key = _serialize_with(CS, label)
            if best[0] is None or key < best[0]:
                best[0] = key
            return
        for x in target:
            refined = dict(classes)
            # individualize x below its class
            for y in B.domain:
                if refined[y] > refined[x] or (refined[y] == refined[x] and y != x):
                    refined[y] += 1
            search(refined)

    search(classes)
    return best[0]


def is_isomorphic(A, B, cap=CANON_CAP):
    A, B = as_coloured(A), as_coloured(B)
    if A.signature != B.signature or A.size != B.size:
        return False
    return canonical_form(A, cap=cap) == canonical_form(B, cap=cap)
