"""Universal templates: the bounded-degree construction, the low-tree-depth
construction (cores union + iterated truncated products), the constructive
yes-instance embedding, the duality verification harness, and the uniformly
2-sparse counterexample family.

Bounded-degree carrier: vertices are pairs (v, member) where the member is a
small valid coloured structure containing label v; a tuple holds on such
pairs iff every member holds it (same labels, same colour) and, around every
endpoint, all members agree on the labelled coloured radius-m ball.  Members
come in two flavours:

* "labelled": every valid member with labels inside {1..X}, the literal
  construction; feasible only for tiny X.
* "reduced": one canonical representative per isomorphism class.  Validity
  arguments are member-local, so the carrier stays sound, and inputs of size
  <= X still embed through their own canonical copy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import CapExceeded, FPDError, LabellingError
from .hom import check_hom, find_hom, is_core
from .enumeration import (
    colourings_of,
    enumerate_connected_structures,
    graph_degree,
    labelled_structures,
    tuple_degree,
)
from .patterns import is_valid, params
from .products import (
    STAR,
    TruncatedProduct,
    assemble_partial_homs,
    iterated_truncated_product,
)
from .relstruct import (
    ColouredStructure,
    Structure,
    as_coloured,
    ball,
    base_of,
    bfs_distances,
    canonical_form,
    disjoint_union_many,
    encode_graph,
    induced,
    is_connected,
    relabel,
    symmetric_closure,
)
from .treedepth import tree_depth

MEMBER_GUARD = 400_000


def x_param(b, m):
    """X = 1 + sum_{j<=m} b(b-1)^j, the label budget for degree b, radius m."""
    if b < 1 or m < 0:
        raise FPDError("x_param needs b >= 1, m >= 0")
    total = 1
    for j in range(m + 1):
        total += b * (b - 1) ** j if j > 0 else b
    return total


@dataclass
class UniversalTemplate:
    kind: str  # "bounded-degree" | "low-td"
    carrier: object  # ColouredStructure, or TruncatedProduct when virtual
    problem: object
    provenance: dict = field(default_factory=dict)
    members: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def carrier_coloured(self):
        if isinstance(self.carrier, TruncatedProduct):
            return self.carrier.coloured
        return self.carrier


def _ball_bytes(member, v, m):
    return induced(member, ball(member.base, v, m)).labelled_key()


def _member_degree_ok(S, b, undirected):
    if undirected:
        return all(graph_degree(S, x) <= b for x in S.domain)
    return all(tuple_degree(S, x) <= b for x in S.domain)


def _bounded_degree_members(problem, b, X, mode, restrict_degree, max_member_size):
    sig = problem.signature
    limit = min(X, max_member_size) if max_member_size else X
    members = []
    if mode == "labelled":
        cands = labelled_structures(sig, range(1, X + 1), undirected=problem.undirected)
        for S in cands:
            if S.size > limit or not is_connected(S):
                continue
            if restrict_degree and not _member_degree_ok(S, b, problem.undirected):
                continue
            for CS in colourings_of(S, problem.vpalette, problem.epalette, problem.undirected):
                if is_valid(CS, problem):
                    members.append(CS)
    elif mode == "reduced":
        shapes = enumerate_connected_structures(
            sig,
            limit,
            tuple_degree_cap=b if restrict_degree and not problem.undirected else None,
            graph_degree_cap=b if restrict_degree and problem.undirected else None,
            undirected=problem.undirected,
        )
        seen = set()
        for S in shapes:
            for CS in colourings_of(S, problem.vpalette, problem.epalette, problem.undirected):
                if not is_valid(CS, problem):
                    continue
                key = canonical_form(CS, cap=max(limit, 10))
                if key not in seen:
                    seen.add(key)
                    members.append(CS)
        members.sort(key=lambda CS: CS.labelled_key())
        # pairwise-disjoint label pools: agreement never glues two distinct
        # representatives, so the carrier is the union of member self-copies
        offset = 0
        relabelled = []
        for CS in members:
            relabelled.append(relabel(CS, {x: offset + i for i, x in enumerate(CS.domain)}))
            offset += CS.size
        return relabelled
    else:
        raise FPDError(f"unknown member mode {mode!r}")
    members.sort(key=lambda CS: CS.labelled_key())
    return members


def bounded_degree_universal(
    problem,
    b,
    mode="labelled",
    restrict_degree=True,
    max_member_size=None,
    member_guard=MEMBER_GUARD,
    check_validity=True,
):
    """The universal template for inputs of degree <= b.

    Carrier vertices are (v, member) pairs with universal colours; tuples are
    grouped by (labelled tuple, colour, labelled radius-m balls around each
    endpoint), so adjacency is exactly the agreement condition.
    """
    m, _ = params(problem)
    X = x_param(b, m)
    members = _bounded_degree_members(
        problem, b, X, mode, restrict_degree, max_member_size
    )
    n_elements = sum(M.size for M in members)
    if n_elements > member_guard:
        raise CapExceeded(
            f"template would have {n_elements} vertices", forecast=n_elements
        )

    elements = []
    index = {}
    for mi, M in enumerate(members):
        for v in M.domain:
            index[(mi, v)] = len(elements)
            elements.append((mi, v))

    groups = {}
    for mi, M in enumerate(members):
        for name, t in M.occurrences():
            key = (
                name,
                t,
                repr(M.ecol[(name, t)]),
                tuple(_ball_bytes(M, v, m) for v in t),
            )
            groups.setdefault(key, []).append(mi)

    rels = {name: set() for name in problem.signature.names}
    ecol = {}
    for (name, t, _, _), bucket in sorted(groups.items()):
        colour = members[bucket[0]].ecol[(name, t)]
        for combo in itertools.product(bucket, repeat=len(t)):
            ut = tuple(index[(combo[k], t[k])] for k in range(len(t)))
            rels[name].add(ut)
            ecol[(name, ut)] = colour
    carrier_base = Structure(problem.signature, range(len(elements)), rels)
    vcol = {i: members[mi].vcol[v] for i, (mi, v) in enumerate(elements)}
    carrier = ColouredStructure(carrier_base, vcol, ecol)
    if check_validity and not is_valid(carrier, problem):
        raise FPDError("constructed carrier is not valid; construction bug")
    return UniversalTemplate(
        kind="bounded-degree",
        carrier=carrier,
        problem=problem,
        provenance={i: elements[i] for i in range(len(elements))},
        members=members,
        params={
            "b": b,
            "m": m,
            "X": X,
            "mode": mode,
            "restrict_degree": restrict_degree,
        },
    )


def greedy_ball_labelling(S, radius, n_labels):
    """chi: labels 1..n_labels, injective on every ball of given radius.

    Greedy over BFS order; two elements within distance 2*radius share some
    ball, so they must differ.  Raises LabellingError when labels run out.
    """
    S = base_of(S)
    chi = {}
    for start in S.domain:
        if start in chi:
            continue
        dist = bfs_distances(S, start)
        order = sorted(dist, key=lambda x: (dist[x], x))
        for x in order:
            if x in chi:
                continue
            banned = {
                chi[y]
                for y, d in bfs_distances(S, x, limit=2 * radius).items()
                if y in chi
            }
            free = [l for l in range(1, n_labels + 1) if l not in banned]
            if not free:
                raise LabellingError(
                    f"no label left for element {x} within {n_labels} labels"
                )
            chi[x] = free[0]
    return chi


def embed_into_universal(G, vcol, ecol, template):
    """The constructive yes-instance embedding a(x) = (chi(x), ball of x).

    Needs a labelled-mode template; the coloured radius-(m+1) ball around x,
    relabelled through chi, must literally be a member.
    """
    if template.params.get("mode") != "labelled":
        raise FPDError("the ball embedding needs a labelled-mode template")
    m = template.params["m"]
    X = template.params["X"]
    GC = ColouredStructure(base_of(G), vcol, ecol)
    chi = greedy_ball_labelling(GC.base, m + 1, X)
    member_index = {M.labelled_key(): mi for mi, M in enumerate(template.members)}
    slot = {pair: idx for idx, pair in template.provenance.items()}
    mapping = {}
    for x in GC.base.domain:
        ball_x = ball(GC.base, x, m + 1)
        S_x = relabel(induced(GC, ball_x), {y: chi[y] for y in ball_x})
        key = S_x.labelled_key()
        if key not in member_index:
            raise FPDError(
                "ball around element is not a member; is the input degree-bounded and the colouring valid?"
            )
        mapping[x] = slot[(member_index[key], chi[x])]
    if not check_hom(GC, template.carrier_coloured, mapping):
        raise FPDError("embedding failed check_hom; construction bug")
    return mapping


def lemma_ball_map(template, element, m=None):
    """(ball, h): the radius-m carrier ball around an element and the map
    (v', S') -> v' into the element's member."""
    carrier = template.carrier_coloured
    m = template.params["m"] if m is None else m
    mi, _v = template.provenance[element]
    B = ball(carrier.base, element, m)
    sub = induced(carrier, B)
    mapping = {i: template.provenance[i][1] for i in B}
    return sub, mapping, template.members[mi]


def check_lemma_ball_maps(template, elements=None):
    """Verify h(v',.) = v' is a colour-preserving hom on every element's ball."""
    carrier = template.carrier_coloured
    todo = elements if elements is not None else carrier.domain
    failures = []
    for u in todo:
        sub, mapping, member = lemma_ball_map(template, u)
        if not set(mapping.values()) <= set(member.domain) or not check_hom(
            sub, member, mapping
        ):
            failures.append(u)
    return failures


def enumerate_valid_cores(problem, td_bound, size_cap, canon_cap=10):
    """All cores (up to isomorphism) of connected coloured structures with
    <= size_cap elements, tree-depth <= td_bound, valid for the problem."""
    shapes = enumerate_connected_structures(
        problem.signature, size_cap, undirected=problem.undirected
    )
    out = []
    seen = set()
    for S in shapes:
        if tree_depth(S)[0] > td_bound:
            continue
        for CS in colourings_of(S, problem.vpalette, problem.epalette, problem.undirected):
            if not is_valid(CS, problem):
                continue
            if not is_core(CS):
                continue
            key = canonical_form(CS, cap=max(size_cap, canon_cap))
            if key not in seen:
                seen.add(key)
                out.append(CS)
    out.sort(key=lambda CS: canonical_form(CS, cap=max(size_cap, canon_cap)))
    return out


MATERIALIZE_LIMIT = 20_000


def low_td_universal(problem, p, q, size_cap, product_cap=200_000, materialize=None):
    """Cores union, then iterated truncated products ^(p+1)..^q.

    p must exceed both the largest pattern size and the largest symbol arity;
    with q = p the carrier is the cores union itself.  Intermediate products
    are materialized (the next stage needs their tuples); the final stage
    stays a virtual membership oracle when its element forecast is large.
    """
    from .products import forecast_size

    _, max_pattern = params(problem)
    if p <= problem.signature.max_arity:
        raise FPDError("p must exceed the arity of every symbol")
    if problem.patterns and p <= max_pattern:
        raise FPDError("p must exceed the size of every forbidden pattern")
    if q < p:
        raise FPDError("need q >= p")
    cores = enumerate_valid_cores(problem, p, size_cap)
    chain = {}
    if not cores:
        carrier = None
        base_union = None
    else:
        base_union, _prov = disjoint_union_many(cores)
        carrier = base_union
        current = base_union
        for idx in range(p + 1, q + 1):
            last = idx == q
            mat = materialize if (last and materialize is not None) else (
                not last or forecast_size(current, idx) <= MATERIALIZE_LIMIT
            )
            prod = TruncatedProduct(current, idx, cap=product_cap, materialize=mat)
            chain[idx] = prod
            carrier = prod
            current = prod.coloured if mat else None
    return UniversalTemplate(
        kind="low-td",
        carrier=carrier,
        problem=problem,
        members=cores,
        params={"p": p, "q": q, "size_cap": size_cap, "base": base_union, "chain": chain},
    )


# ---------------------------------------------------------------------------
# Deciding hom(G -> iterated truncated product) without materializing it
# ---------------------------------------------------------------------------


def _set_partitions_exact(items, k):
    """Set partitions of `items` into exactly k nonempty blocks."""
    items = list(items)
    if k == 0:
        if not items:
            yield []
        return
    if len(items) < k:
        return

    def rec(i, blocks):
        remaining = len(items) - i
        if i == len(items):
            if len(blocks) == k:
                yield [list(b) for b in blocks]
            return
        if len(blocks) + remaining < k:
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([x])
            yield from rec(i + 1, blocks)
            blocks.pop()

    yield from rec(0, [])


def _hom_into_chain(GC, base_union, p, level, memo, chain):
    """A hom from coloured GC into base^(p+1)..^(level), or None.

    Implements the exact decomposition: a hom into T^(k) exists iff one into
    T exists (composed with the diagonal x -> (x,..,x,*)) or some partition
    into k nonempty blocks admits colour-homs of all leave-one-block-out
    pieces into the previous level, assembled by the s-tilde formula.
    """
    key = (frozenset(GC.domain), level)
    if key in memo:
        return memo[key]
    if level == p:
        result = find_hom(GC, base_union)
        memo[key] = result
        return result

    prod = chain[level]
    below = _hom_into_chain(GC, base_union, p, level - 1, memo, chain)
    if below is not None:
        diag = {}
        for x in GC.domain:
            vec = tuple([below[x]] * (level - 1)) + (STAR,)
            diag[x] = prod.code[vec]
        memo[key] = diag
        return diag

    elems = sorted(GC.domain)
    for blocks in _set_partitions_exact(elems, level):
        piece_homs = []
        ok = True
        for block in blocks:
            piece = induced(GC, set(elems) - set(block))
            h = _hom_into_chain(piece, base_union, p, level - 1, memo, chain)
            if h is None:
                ok = False
                break
            piece_homs.append(h)
        if ok:
            mapping = assemble_partial_homs(GC, blocks, piece_homs, prod)
            memo[key] = mapping
            return mapping
    memo[key] = None
    return None


def _virtual_check_hom(GC, prod, mapping):
    """check_hom against a virtual truncated product via its oracle."""
    for x in GC.domain:
        if prod.vertex_colour(mapping[x]) != GC.vcol[x]:
            return False
    for (name, t), colour in GC.ecol.items():
        holds, c = prod.holds_tuple(name, [mapping[e] for e in t])
        if not holds or c != colour:
            return False
    return True


def hom_to_low_td_template(G, template):
    """A hom from (uncoloured) G into the low-td carrier, or None.

    Searches over valid colourings of G (the carrier's universal colours pull
    back to one) and applies the exact product decomposition; a found witness
    is re-checked against the carrier (materialized or via the membership
    oracle).
    """
    problem = template.problem
    p, q = template.params["p"], template.params["q"]
    base_union = template.params["base"]
    chain = template.params["chain"]
    if base_union is None:
        return None
    S = base_of(G)
    if problem.undirected:
        S = symmetric_closure(S)
    for CS in colourings_of(S, problem.vpalette, problem.epalette, problem.undirected):
        if not is_valid(CS, problem):
            continue
        memo = {}
        mapping = _hom_into_chain(CS, base_union, p, q, memo, chain)
        if mapping is None:
            continue
        if q == p:
            if not check_hom(CS, base_union, mapping):
                raise FPDError("low-td witness failed check_hom; bug")
        else:
            if not _virtual_check_hom(CS, chain[q], mapping):
                raise FPDError("low-td witness failed the product oracle; bug")
        return mapping
    return None


# ---------------------------------------------------------------------------
# Duality verification harness
# ---------------------------------------------------------------------------


@dataclass
class DualityReport:
    cases: int = 0
    agreements: int = 0
    disagreements: list = field(default_factory=list)

    def to_json(self):
        return {
            "cases": self.cases,
            "agreements": self.agreements,
            "disagreements": self.disagreements,
        }


def template_hom(G, template):
    """The CSP side: a homomorphism of the uncoloured input into the carrier."""
    if template.kind == "bounded-degree":
        carrier = template.carrier_coloured
        return find_hom(base_of(G), carrier.base)
    if template.kind == "low-td":
        return hom_to_low_td_template(G, template)
    raise FPDError(f"unknown template kind {template.kind}")


def verify_duality(template, problem, generator, budget=None, describe=None):
    """Agreement report between decide_fpp and hom-to-carrier over a class."""
    from .patterns import decide_fpp

    report = DualityReport()
    for G in generator:
        fpp = decide_fpp(G, problem, budget=budget) is not None
        hom = template_hom(G, template) is not None
        report.cases += 1
        if fpp == hom:
            report.agreements += 1
        else:
            report.disagreements.append(
                {
                    "input": describe(G) if describe else repr(G),
                    "fpp": fpp,
                    "hom": hom,
                }
            )
    return report


# ---------------------------------------------------------------------------
# The uniformly 2-sparse witness family G_n
# ---------------------------------------------------------------------------


def witness_gn(n):
    """G_n: n special vertices, each pair joined by a fresh length-3 path.

    Returns (structure, specials, orientation): the symmetric-closure graph,
    the special vertices, and the orientation from the sparsity proof (arcs
    leave special vertices; every special vertex has in-degree zero).
    """
    if n < 2:
        raise FPDError("witness_gn needs n >= 2")
    specials = list(range(n))
    nxt = n
    edges = []
    orientation = {}
    for i, j in itertools.combinations(specials, 2):
        a, b = nxt, nxt + 1
        nxt += 2
        edges += [(i, a), (a, b), (b, j)]
        orientation[frozenset((i, a))] = a      # leaves special i
        orientation[frozenset((a, b))] = b      # middle edge, arbitrary fixed
        orientation[frozenset((b, j))] = b      # leaves special j
    G = encode_graph(range(nxt), edges)
    return G, specials, orientation
