"""Elimination trees, forest closures, exact tree-depth, low tree-depth
decompositions, shallow-minor density (grad), and uniform sparsity.

Tree-depth is computed by memoized recursion over connected element subsets,
mirroring the elimination-tree definition: pick a root, recurse on the
components left after trimming the root out of every hyperedge.  The witness
forest is rebuilt from the recorded optimal roots and independently satisfies
S ⊆ clos(witness).
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from fractions import Fraction

from .errors import CapExceeded, FPDError
from .relstruct import Structure, base_of, induced

TD_CAP = 12
GRAD_CAP = 8


class RootedForest:
    """Rooted trees over a set of elements; parent map, roots have none."""

    def __init__(self, nodes, parent):
        self.nodes = frozenset(nodes)
        self.parent = dict(parent)
        if not set(self.parent) <= self.nodes:
            raise FPDError("parent map mentions unknown nodes")
        for child, par in self.parent.items():
            if par not in self.nodes:
                raise FPDError("parent outside the node set")
        self.roots = tuple(sorted(self.nodes - set(self.parent)))
        # acyclicity: walking up from every node must reach a root
        for x in self.nodes:
            seen = set()
            while x in self.parent:
                if x in seen:
                    raise FPDError("parent map has a cycle")
                seen.add(x)
                x = self.parent[x]

    def depth(self, x):
        d = 1
        while x in self.parent:
            d += 1
            x = self.parent[x]
        return d

    @property
    def height(self):
        return max((self.depth(x) for x in self.nodes), default=0)

    def ancestors(self, x):
        out = [x]
        while x in self.parent:
            x = self.parent[x]
            out.append(x)
        return out

    def comparable(self, x, y):
        return x in self.ancestors(y) or y in self.ancestors(x)

    def __repr__(self):
        return f"RootedForest(n={len(self.nodes)}, height={self.height})"


class Partition:
    """Total map element -> part index in {1..q}."""

    def __init__(self, part_of, q=None):
        self.part_of = {x: int(i) for x, i in dict(part_of).items()}
        if any(i < 1 for i in self.part_of.values()):
            raise FPDError("part indices are 1-based")
        self.q = int(q) if q is not None else max(self.part_of.values(), default=1)
        if any(i > self.q for i in self.part_of.values()):
            raise FPDError("part index exceeds q")

    def parts(self):
        out = {i: set() for i in range(1, self.q + 1)}
        for x, i in self.part_of.items():
            out[i].add(x)
        return out


def closure(forest, signature):
    """clos(F, sigma): every tuple whose elements form a chain w.r.t. <=_F."""
    nodes = sorted(forest.nodes)
    anc = {x: set(forest.ancestors(x)) for x in nodes}

    def chain(elems):
        return all(x in anc[y] or y in anc[x] for x, y in itertools.combinations(elems, 2))

    rels = {}
    for name, arity in signature.symbols:
        rels[name] = [t for t in itertools.product(nodes, repeat=arity) if chain(set(t))]
    return Structure(signature, nodes, rels)


def _hyperedges(S):
    S = base_of(S)
    out = set()
    for name in S.signature.names:
        for t in S.relations[name]:
            out.add(frozenset(t))
    return out


def _hyper_components(elements, hyperedges):
    """Components of the trimmed hypergraph on `elements`."""
    adj = {x: set() for x in elements}
    for he in hyperedges:
        he = he & elements
        for x, y in itertools.combinations(sorted(he), 2):
            adj[x].add(y)
            adj[y].add(x)
    seen, comps = set(), []
    for start in sorted(elements):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    queue.append(y)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def is_elimination_tree(S, root, forest):
    """The recursive elimination-tree condition for a connected S.

    Implemented on the induced hypergraph with root trimming, independently of
    closure(): hyperedges keep connecting their remnants after the root
    leaves, every component left after trimming must descend into a single
    child subtree, and roots not touched by a component are skipped on the
    way down (so the tree may be deeper than the recursion strictly needs).
    """
    S = base_of(S)
    if forest.nodes != frozenset(S.domain):
        raise FPDError("elimination tree must cover exactly the domain")
    if len(_hyper_components(frozenset(S.domain), _hyperedges(S))) != 1:
        raise FPDError("is_elimination_tree expects a connected structure")
    if forest.roots != (root,):
        return False
    children = {x: [] for x in forest.nodes}
    for child, par in forest.parent.items():
        children[par].append(child)

    def subtree(x):
        out = {x}
        for c in children[x]:
            out |= subtree(c)
        return out

    sub_of = {x: frozenset(subtree(x)) for x in forest.nodes}

    def contained(comp, hyperedges, t):
        """comp (nonempty, connected under the trimmed hyperedges) descends
        through the subtree rooted at t."""
        if not comp <= sub_of[t]:
            return False
        if t in comp:
            rest = frozenset(comp - {t})
            if not rest:
                return True
            trimmed = {he & rest for he in hyperedges if he & rest}
            comps = _hyper_components(rest, trimmed)
            for sub in comps:
                homes = [c for c in children[t] if sub <= sub_of[c]]
                if len(homes) != 1:
                    return False
                if not contained(sub, {he for he in trimmed if he <= sub}, homes[0]):
                    return False
            return True
        homes = [c for c in children[t] if comp <= sub_of[c]]
        if len(homes) != 1:
            return False
        return contained(comp, hyperedges, homes[0])

    return contained(frozenset(S.domain), _hyperedges(S), root)


def tree_depth(S, cap=TD_CAP):
    """(value, witness): minimum elimination-forest height and a witness.

    Exponential-exact memoized recursion over subsets; per-component trees
    are assembled into a forest.
    """
    S = base_of(S)
    if S.size > cap:
        raise CapExceeded(f"tree_depth cap {cap} exceeded (size {S.size})", forecast=S.size)
    hyperedges = _hyperedges(S)
    memo = {}

    def td_connected(elements):
        if elements in memo:
            return memo[elements]
        if len(elements) == 1:
            (x,) = elements
            memo[elements] = (1, x, [])
            return memo[elements]
        best = None
        for r in sorted(elements):
            rest = frozenset(elements - {r})
            comps = _hyper_components(rest, {he & rest for he in hyperedges if he & rest})
            worst = 0
            for comp in comps:
                worst = max(worst, td_connected(comp)[0])
                if best is not None and 1 + worst >= best[0]:
                    break
            value = 1 + worst
            if best is None or value < best[0]:
                best = (value, r, comps)
        memo[elements] = best
        return best

    parent = {}
    value = 0

    def build(elements, par):
        _, r, comps = td_connected(elements)
        if par is not None:
            parent[r] = par
        for comp in comps:
            build(comp, r)

    for comp in _hyper_components(frozenset(S.domain), hyperedges):
        v, _, _ = td_connected(comp)
        value = max(value, v)
        build(comp, None)
    witness = RootedForest(S.domain, parent)
    return value, witness


def _undirected_edges(S):
    S = base_of(S)
    edges = set()
    for he in _hyperedges(S):
        if len(he) == 2:
            edges.add(he)
        elif len(he) > 2:
            raise FPDError("expected a graph (binary tuples only)")
        # loops (singleton hyperedges) are rejected below
    for he in _hyperedges(S):
        if len(he) == 1:
            raise FPDError("expected a loopless graph")
    return edges


def grad(S, r, cap=GRAD_CAP):
    """Greatest average density |E(G|P)|/|P| over families of disjoint
    connected parts of radius <= r (the rank-r shallow-minor density)."""
    S = base_of(S)
    if S.size > cap:
        raise CapExceeded(f"grad cap {cap} exceeded (size {S.size})", forecast=S.size)
    edges = _undirected_edges(S)
    elems = sorted(S.domain)

    def radius_ok(part):
        if len(part) == 1:
            return True
        sub_adj = {x: {y for y in S.neighbours(x) if y in part} for x in part}
        for centre in part:
            dist = {centre: 0}
            queue = deque([centre])
            while queue:
                x = queue.popleft()
                for y in sub_adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        queue.append(y)
            if len(dist) == len(part) and max(dist.values()) <= r:
                return True
        return False

    parts = []
    for k in range(1, len(elems) + 1):
        for combo in itertools.combinations(elems, k):
            part = frozenset(combo)
            if radius_ok(part):
                parts.append(part)

    best = Fraction(0)

    def minor_edges(family):
        count = 0
        for a, b in itertools.combinations(family, 2):
            if any(frozenset((x, y)) in edges for x in a for y in b):
                count += 1
        return count

    def extend(start, family, used):
        nonlocal best
        if family:
            best = max(best, Fraction(minor_edges(family), len(family)))
        for i in range(start, len(parts)):
            if parts[i] & used:
                continue
            extend(i + 1, family + [parts[i]], used | parts[i])

    extend(0, [], frozenset())
    return best


def verify_ltd_partition(S, partition, p, cap=TD_CAP):
    """True iff every union of <= p parts induces tree-depth <= p."""
    S = base_of(S)
    if set(partition.part_of) != set(S.domain):
        raise FPDError("partition must cover exactly the domain")
    parts = partition.parts()
    ids = sorted(parts)
    for k in range(1, min(p, len(ids)) + 1):
        for combo in itertools.combinations(ids, k):
            subset = set().union(*(parts[i] for i in combo))
            sub = induced(S, subset)
            if sub.size == 0:
                continue
            if tree_depth(sub, cap=cap)[0] > p:
                return False
    return True


def find_ltd_partition(S, p, q, cap=TD_CAP, seed=0, attempts=2000):
    """A partition passing verify_ltd_partition, by exhaustive search for
    |S| <= 8 and seeded greedy repair above; None means "not found"."""
    S = base_of(S)
    elems = sorted(S.domain)
    if not elems:
        return Partition({}, q=q)
    if len(elems) <= 8:
        # restricted-growth enumeration: parts are interchangeable
        def assignments(i, maxused, current):
            if i == len(elems):
                yield dict(current)
                return
            for part in range(1, min(maxused + 1, q) + 1):
                current[elems[i]] = part
                yield from assignments(i + 1, max(maxused, part), current)
                del current[elems[i]]

        for part_of in assignments(0, 0, {}):
            cand = Partition(part_of, q=q)
            if verify_ltd_partition(S, cand, p, cap=cap):
                return cand
        return None
    rng = random.Random(seed)
    for _ in range(attempts):
        cand = Partition({x: rng.randrange(1, q + 1) for x in elems}, q=q)
        for _ in range(20):
            if verify_ltd_partition(S, cand, p, cap=cap):
                return cand
            x = rng.choice(elems)
            part_of = dict(cand.part_of)
            part_of[x] = rng.randrange(1, q + 1)
            cand = Partition(part_of, q=q)
        if verify_ltd_partition(S, cand, p, cap=cap):
            return cand
    return None


def _max_flow(nodes, capacity, source, sink):
    """Edmonds-Karp on an arc-capacity dict; mutates capacity to residuals."""
    adjacency = {n: [] for n in nodes}
    for (u, v) in list(capacity):
        adjacency[u].append(v)
        adjacency[v].append(u)
        capacity.setdefault((v, u), 0)
    flow = 0
    while True:
        prev = {source: None}
        queue = deque([source])
        while queue and sink not in prev:
            u = queue.popleft()
            for v in adjacency[u]:
                if v not in prev and capacity.get((u, v), 0) > 0:
                    prev[v] = u
                    queue.append(v)
        if sink not in prev:
            return flow
        # augment by 1 (all capacities here are small integers; bottleneck >= 1)
        bottleneck = None
        v = sink
        while prev[v] is not None:
            u = prev[v]
            c = capacity[(u, v)]
            bottleneck = c if bottleneck is None else min(bottleneck, c)
            v = u
        v = sink
        while prev[v] is not None:
            u = prev[v]
            capacity[(u, v)] -= bottleneck
            capacity[(v, u)] += bottleneck
            v = u
        flow += bottleneck


def is_uniformly_k_sparse(S, k):
    """Orientation with max in-degree <= k, via max flow on the incidence
    network (edge nodes supply 1, vertex nodes drain k).

    Returns (ok, orientation); orientation maps each undirected edge
    (frozenset) to its head on success.
    """
    S = base_of(S)
    edges = sorted(_undirected_edges(S), key=sorted)
    if not edges:
        return True, {}
    source, sink = ("s",), ("t",)
    nodes = [source, sink]
    nodes += [("e", i) for i in range(len(edges))]
    nodes += [("v", x) for x in S.domain]
    capacity = {}
    for i, e in enumerate(edges):
        capacity[(source, ("e", i))] = 1
        for x in sorted(e):
            capacity[(("e", i), ("v", x))] = 1
    for x in S.domain:
        capacity[(("v", x), sink)] = k
    if _max_flow(nodes, capacity, source, sink) < len(edges):
        return False, None
    orientation = {}
    for i, e in enumerate(edges):
        for x in sorted(e):
            # a saturated edge->vertex arc has residual 0 forward, 1 backward
            if capacity.get((("e", i), ("v", x)), 0) == 0 and capacity.get((("v", x), ("e", i)), 0) >= 1:
                orientation[e] = x
                break
    assert len(orientation) == len(edges)
    return True, orientation
