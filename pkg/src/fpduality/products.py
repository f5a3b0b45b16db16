"""Classical and truncated products of (coloured) structures.

A truncated-product element is a length-p coordinate vector with exactly one
"don't care" star; all other coordinates share one vertex colour, which the
element inherits.  A tuple holds iff, at every position not hit by a star,
the coordinatewise projected tuple holds in the base with one common edge
colour, which the product tuple inherits.

Products can be huge by design, so tuples are enumerated constructively
(never by filtering all element combinations), the element count is guarded
by a cap with an exact forecast, and a product may stay *virtual*: element
list plus a tuple-membership oracle, without materializing the tuple set.
"""

from __future__ import annotations

import itertools

from .errors import CapExceeded, FPDError
from .hom import check_hom
from .relstruct import ColouredStructure, Structure, as_coloured, base_of, induced

STAR = "*"
PRODUCT_CAP = 200_000


def product(A, B):
    """Categorical product: tuples hold iff they hold coordinatewise."""
    A, B = base_of(A), base_of(B)
    if A.signature != B.signature:
        raise FPDError("product: signature mismatch")
    pairs = sorted(itertools.product(A.domain, B.domain))
    code = {p: i for i, p in enumerate(pairs)}
    rels = {}
    for name in A.signature.names:
        out = []
        for ta in A.relations[name]:
            for tb in B.relations[name]:
                out.append(tuple(code[(x, y)] for x, y in zip(ta, tb)))
        rels[name] = out
    S = Structure(A.signature, range(len(pairs)), rels)
    return S, {i: p for p, i in code.items()}


def forecast_size(CS, p):
    """Exact element count of the p-th truncated product."""
    CS = as_coloured(CS)
    by_colour = {}
    for x in CS.domain:
        by_colour[CS.vcol[x]] = by_colour.get(CS.vcol[x], 0) + 1
    return p * sum(n ** (p - 1) for n in by_colour.values())


class TruncatedProduct:
    """The p-th truncated product of a coloured structure.

    `coords[i]` is the coordinate vector (with STAR) of element i.  The tuple
    set is available either materialized (`coloured`) or through the
    membership oracle `holds_tuple` when the product is kept virtual.
    """

    def __init__(self, base_cs, p, cap=PRODUCT_CAP, materialize=True):
        base_cs = as_coloured(base_cs)
        if p < 2:
            raise FPDError("truncated product needs p >= 2")
        size = forecast_size(base_cs, p)
        if size > cap:
            raise CapExceeded(
                f"truncated product would have {size} elements (cap {cap})",
                forecast=size,
            )
        self.base = base_cs
        self.p = p
        by_colour = {}
        for x in base_cs.domain:
            by_colour.setdefault(base_cs.vcol[x], []).append(x)
        self.class_of = {repr(c): sorted(v) for c, v in by_colour.items()}

        coords = []
        vcol = {}
        for i in range(1, p + 1):
            for colour, elems in sorted(by_colour.items(), key=lambda kv: repr(kv[0])):
                for rest in itertools.product(elems, repeat=p - 1):
                    vec = rest[: i - 1] + (STAR,) + rest[i - 1 :]
                    vcol[len(coords)] = colour
                    coords.append(vec)
        self.coords = coords
        self.code = {vec: i for i, vec in enumerate(coords)}
        self._vcol = vcol
        self._materialized = None
        if materialize:
            self.materialize()

    # -- virtual interface ---------------------------------------------------

    def star_index(self, i):
        return self.coords[i].index(STAR)

    def vertex_colour(self, i):
        return self._vcol[i]

    def holds_tuple(self, name, elems):
        """Membership + colour oracle: (holds, common edge colour)."""
        vecs = [self.coords[i] for i in elems]
        stars = {v.index(STAR) for v in vecs}
        free = [i for i in range(self.p) if i not in stars]
        if not free:
            return False, None
        colour = None
        for i in free:
            proj = tuple(v[i] for v in vecs)
            if proj not in self.base.base.relations[name]:
                return False, None
            c = self.base.ecol[(name, proj)]
            if colour is None:
                colour = c
            elif colour != c:
                return False, None
        return True, colour

    # -- materialization -----------------------------------------------------

    def _tuples_with_colours(self, name, arity):
        """Constructive tuple enumeration: cost linear in the output size."""
        base = self.base
        groups = {}
        for t in base.base.relations[name]:
            key = (repr(base.ecol[(name, t)]), tuple(repr(base.vcol[x]) for x in t))
            groups.setdefault(key, []).append((t, base.ecol[(name, t)], [base.vcol[x] for x in t]))
        out = []
        for stars in itertools.product(range(self.p), repeat=arity):
            star_set = sorted(set(stars))
            free = [i for i in range(self.p) if i not in set(stars)]
            if not free:
                continue
            for key, tuples in sorted(groups.items()):
                _, _, vcolours = tuples[0]
                ecolour = tuples[0][1]
                plain = [t for t, _, _ in tuples]
                # coordinates at free positions: one base tuple per position
                for choice in itertools.product(plain, repeat=len(free)):
                    # each element also has free coordinates at star positions
                    # held by *other* elements; they range over its colour class
                    slot_domains = []
                    for k in range(arity):
                        cls = self.class_of[repr(vcolours[k])]
                        open_positions = [j for j in star_set if j != stars[k]]
                        slot_domains.append(
                            itertools.product(cls, repeat=len(open_positions))
                        )
                    for fills in itertools.product(*slot_domains):
                        elems = []
                        for k in range(arity):
                            vec = [None] * self.p
                            vec[stars[k]] = STAR
                            for pos, t in zip(free, choice):
                                vec[pos] = t[k]
                            open_positions = [j for j in star_set if j != stars[k]]
                            for pos, val in zip(open_positions, fills[k]):
                                vec[pos] = val
                            elems.append(self.code[tuple(vec)])
                        out.append((tuple(elems), ecolour))
        return out

    def materialize(self):
        if self._materialized is None:
            rels = {}
            ecol = {}
            for name, arity in self.base.signature.symbols:
                rows = self._tuples_with_colours(name, arity)
                rels[name] = [t for t, _ in rows]
                for t, c in rows:
                    ecol[(name, t)] = c
            S = Structure(self.base.signature, range(len(self.coords)), rels)
            self._materialized = ColouredStructure(S, dict(self._vcol), ecol)
        return self._materialized

    @property
    def coloured(self):
        return self.materialize()

    @property
    def size(self):
        return len(self.coords)

    @property
    def signature(self):
        return self.base.signature


def truncated_product(CS, p, cap=PRODUCT_CAP, materialize=True):
    return TruncatedProduct(CS, p, cap=cap, materialize=materialize)


def iterated_truncated_product(CS, start, stop, cap=PRODUCT_CAP, materialize=True):
    """Left-to-right fold CS^{^start ^start+1 ... ^stop}; empty range = CS.

    Returns the final TruncatedProduct, or the input coloured structure
    unchanged when start > stop.
    """
    CS = as_coloured(CS)
    if start > stop:
        return CS
    current = CS
    prod = None
    for idx in range(start, stop + 1):
        last = idx == stop
        prod = TruncatedProduct(current, idx, cap=cap, materialize=materialize or not last)
        current = prod.coloured if (materialize or not last) else None
        if not last and current is None:  # pragma: no cover - defensive
            raise FPDError("intermediate products must materialize")
    return prod


def coordinate_projection(prod, i0):
    """The map reading coordinate i0, defined off W̃^{i0}.

    Returns (domain_subset, mapping); the mapping is a colour-preserving
    homomorphism from the induced substructure onto the base.
    """
    if not 0 <= i0 < prod.p:
        raise FPDError("projection index out of range")
    keep = [i for i in range(prod.size) if prod.star_index(i) != i0]
    return frozenset(keep), {i: prod.coords[i][i0] for i in keep}


def projection_checked(prod, i0):
    """coordinate_projection, re-checked by check_hom on the materialized part."""
    keep, mapping = coordinate_projection(prod, i0)
    sub = induced(prod.coloured, keep)
    if not check_hom(sub, prod.base, mapping):
        raise FPDError("projection failed check_hom; construction bug")
    return sub, mapping


def assemble_partial_homs(CS, parts, piece_homs, prod):
    """Lemma-style assembly: x in part i maps to (s1(x),..,* at i,..,sp(x)).

    `parts` lists the p blocks (some may be empty); `piece_homs[i]` is a
    colour-preserving hom defined on the substructure induced by the
    complement of block i.  The assembled map targets `prod` (the p-th
    truncated product of the piece-hom target).
    """
    CS = as_coloured(CS)
    p = prod.p
    if len(parts) != p or len(piece_homs) != p:
        raise FPDError("need exactly p blocks and p piece homs")
    part_of = {}
    for i, block in enumerate(parts):
        for x in block:
            part_of[x] = i
    if set(part_of) != set(CS.domain):
        raise FPDError("blocks must partition the domain")
    mapping = {}
    for x in CS.domain:
        i = part_of[x]
        vec = []
        for k in range(p):
            if k == i:
                vec.append(STAR)
            else:
                if x not in piece_homs[k]:
                    raise FPDError(f"piece hom {k} undefined on {x}")
                vec.append(piece_homs[k][x])
        vec = tuple(vec)
        if vec not in prod.code:
            raise FPDError(f"assembled vector {vec} is not a product element")
        mapping[x] = prod.code[vec]
    return mapping
