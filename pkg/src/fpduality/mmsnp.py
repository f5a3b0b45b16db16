"""Primitive MMSNP sentences and their translation to/from problems.

Concrete grammar (fixed here; whitespace free):

    sentence := "exists" predlist "." "forall" varlist "." [conjunct ("&" conjunct)*]
    conjunct := "!(" item ("&" item)* ")"
    item     := Rel(vars) | M(x) | !M(x) | M(Rel(vars)) | !M(Rel(vars))

Monadic predicates range over elements and, in the MMSNP2 dialect, over the
tuple occurrences named by alpha-atoms.  The equality symbol and negated
signature atoms are rejected outright (monotone, equality-free fragment).

Colour <-> predicate translation packs colours into ceil(log2 k) predicate
bits; surplus bit patterns alias to the first colour, so sentence/problem
round trips preserve semantics rather than syntax.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

from .errors import FPDError, FormatError
from .patterns import Pattern, Problem
from .relstruct import ColouredStructure, Signature, Structure, base_of


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple

    def render(self):
        return f"{self.rel}({','.join(self.args)})"


@dataclass(frozen=True)
class VertexLiteral:
    pred: str
    var: str
    positive: bool

    def render(self):
        return f"{'' if self.positive else '!'}{self.pred}({self.var})"


@dataclass(frozen=True)
class EdgeLiteral:
    pred: str
    atom: Atom
    positive: bool

    def render(self):
        return f"{'' if self.positive else '!'}{self.pred}({self.atom.render()})"


@dataclass(frozen=True)
class NegatedConjunct:
    alpha: tuple
    beta: tuple

    def render(self):
        inner = [a.render() for a in self.alpha] + [b.render() for b in self.beta]
        return "!(" + "&".join(inner) + ")"

    def variables(self):
        out = []
        for a in self.alpha:
            out += [v for v in a.args if v not in out]
        for b in self.beta:
            if isinstance(b, VertexLiteral) and b.var not in out:
                out.append(b.var)
            if isinstance(b, EdgeLiteral):
                out += [v for v in b.atom.args if v not in out]
        return out


@dataclass(frozen=True)
class Sentence:
    monadic: tuple
    variables: tuple
    conjuncts: tuple

    @property
    def dialect(self):
        for c in self.conjuncts:
            if any(isinstance(b, EdgeLiteral) for b in c.beta):
                return "MMSNP2"
        return "MMSNP1"

    def render(self):
        head = f"exists {','.join(self.monadic)}. forall {','.join(self.variables)}."
        if not self.conjuncts:
            return head
        return head + " " + " & ".join(c.render() for c in self.conjuncts)

    def signature(self):
        arities = {}
        for c in self.conjuncts:
            for a in c.alpha:
                arities.setdefault(a.rel, len(a.args))
                if arities[a.rel] != len(a.args):
                    raise FPDError(f"inconsistent arity for {a.rel}")
        return Signature(sorted(arities.items()))


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|[().,&!=])")


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise FormatError(f"unexpected character {text[pos]!r}", path=f"offset {pos}")
            break
        tok = m.group(1)
        if tok == "=":
            raise FormatError(
                "the equality symbol does not occur in this fragment", path=f"offset {m.start(1)}"
            )
        out.append((tok, m.start(1)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def next(self, expect=None):
        if self.i >= len(self.tokens):
            raise FormatError(f"unexpected end of input (wanted {expect or 'more'})")
        tok, pos = self.tokens[self.i]
        if expect is not None and tok != expect:
            raise FormatError(f"expected {expect!r}, found {tok!r}", path=f"offset {pos}")
        self.i += 1
        return tok, pos

    def identlist(self):
        out = []
        while self.peek() not in (".", None):
            tok, pos = self.next()
            if not tok[0].isalpha() and tok[0] != "_":
                raise FormatError(f"expected identifier, found {tok!r}", path=f"offset {pos}")
            out.append(tok)
            if self.peek() == ",":
                self.next(",")
        return out

    def sentence(self):
        self.next("exists")
        monadic = self.identlist()
        self.next(".")
        self.next("forall")
        variables = self.identlist()
        self.next(".")
        conjuncts = []
        while self.peek() is not None:
            conjuncts.append(self.conjunct(monadic, variables))
            if self.peek() == "&":
                self.next("&")
            elif self.peek() is not None:
                tok, pos = self.tokens[self.i]
                raise FormatError(f"expected '&' or end, found {tok!r}", path=f"offset {pos}")
        return Sentence(tuple(monadic), tuple(variables), tuple(conjuncts))

    def conjunct(self, monadic, variables):
        self.next("!")
        self.next("(")
        alpha, beta = [], []
        while True:
            self.item(monadic, variables, alpha, beta)
            if self.peek() == "&":
                self.next("&")
                continue
            self.next(")")
            break
        conjunct = NegatedConjunct(tuple(alpha), tuple(beta))
        for b in beta:
            if isinstance(b, EdgeLiteral) and b.atom not in alpha:
                raise FormatError(
                    f"edge literal {b.render()} names an atom missing from the conjunct"
                )
        return conjunct

    def item(self, monadic, variables, alpha, beta):
        negated = False
        if self.peek() == "!":
            self.next("!")
            negated = True
        name, pos = self.next()
        self.next("(")
        if name in monadic:
            inner, ipos = self.next()
            if self.peek() == "(":  # M(Rel(args))
                self.next("(")
                args = self._args(variables)
                self.next(")")
                self.next(")")
                beta.append(EdgeLiteral(name, Atom(inner, tuple(args)), not negated))
            else:
                if inner not in variables:
                    raise FormatError(f"unknown variable {inner!r}", path=f"offset {ipos}")
                self.next(")")
                beta.append(VertexLiteral(name, inner, not negated))
        else:
            if negated:
                raise FormatError(
                    f"negated signature atom !{name}(...) breaks monotonicity",
                    path=f"offset {pos}",
                )
            args = self._args(variables)
            self.next(")")
            alpha.append(Atom(name, tuple(args)))

    def _args(self, variables):
        args = []
        while True:
            tok, pos = self.next()
            if tok not in variables:
                raise FormatError(f"unknown variable {tok!r}", path=f"offset {pos}")
            args.append(tok)
            if self.peek() == ",":
                self.next(",")
            else:
                return args


def parse(text):
    """Parse the fixed concrete syntax into a Sentence."""
    return _Parser(text).sentence()


def render(sentence):
    return sentence.render()


def is_primitive(sentence):
    """(flag, diagnostics): the primitivity conditions, each failure named."""
    diags = []
    for ci, c in enumerate(sentence.conjuncts):
        variables = c.variables()
        for x in variables:
            for M in sentence.monadic:
                signs = [b.positive for b in c.beta if isinstance(b, VertexLiteral) and b.pred == M and b.var == x]
                if len(signs) != 1:
                    diags.append(
                        f"conjunct {ci}: exactly one of {M}({x}) and !{M}({x}) required, found {len(signs)}"
                    )
        if len(variables) > 1:
            for x in variables:
                if not any(x in a.args for a in c.alpha):
                    diags.append(f"conjunct {ci}: variable {x} occurs in no signature atom")
        # connectivity of the structure induced by alpha
        if variables:
            adj = {x: set() for x in variables}
            for a in c.alpha:
                for u, v in itertools.combinations(set(a.args), 2):
                    adj[u].add(v)
                    adj[v].add(u)
            seen, stack = {variables[0]}, [variables[0]]
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            if len(seen) != len(variables):
                diags.append(f"conjunct {ci}: structure induced by alpha is disconnected")
        if sentence.dialect == "MMSNP2":
            for a in set(c.alpha):
                for M in sentence.monadic:
                    signs = [
                        b.positive
                        for b in c.beta
                        if isinstance(b, EdgeLiteral) and b.pred == M and b.atom == a
                    ]
                    if len(signs) != 1:
                        diags.append(
                            f"conjunct {ci}: exactly one of {M}({a.render()}) and its negation required, found {len(signs)}"
                        )
    return (not diags), diags


def _bits_token(bits):
    return "".join("1" if b else "0" for b in bits) or "-"


def _assignment_tokens(m):
    return [_bits_token(bits) for bits in itertools.product((False, True), repeat=m)]


def sentence_to_problem(sentence, signature=None, undirected=False):
    """Primitive sentence -> problem: colours are complete +/- assignments.

    `undirected` marks the resulting problem as a graph problem (inputs and
    patterns normalized to symmetric closures); a sentence itself is always a
    structure-level object, so the flag is the caller's interpretation.
    """
    ok, diags = is_primitive(sentence)
    if not ok:
        raise FPDError("sentence is not primitive: " + "; ".join(diags))
    sig = signature or sentence.signature()
    m = len(sentence.monadic)
    vpalette = _assignment_tokens(m)
    epalette = _assignment_tokens(m) if sentence.dialect == "MMSNP2" else ["-"]
    patterns = []
    for c in sentence.conjuncts:
        variables = c.variables()
        index = {x: i for i, x in enumerate(variables)}
        rels = {}
        for a in c.alpha:
            rels.setdefault(a.rel, set()).add(tuple(index[v] for v in a.args))
        body = Structure(sig, range(len(variables)), rels)
        vcol = {}
        for x in variables:
            bits = []
            for M in sentence.monadic:
                lit = next(
                    b for b in c.beta if isinstance(b, VertexLiteral) and b.pred == M and b.var == x
                )
                bits.append(lit.positive)
            vcol[index[x]] = _bits_token(bits)
        ecol = {}
        for name, t in body.occurrences():
            if sentence.dialect == "MMSNP2":
                rev = {i: x for x, i in index.items()}
                atom = Atom(name, tuple(rev[e] for e in t))
                bits = []
                for M in sentence.monadic:
                    lit = next(
                        b
                        for b in c.beta
                        if isinstance(b, EdgeLiteral) and b.pred == M and b.atom == atom
                    )
                    bits.append(lit.positive)
                ecol[(name, t)] = _bits_token(bits)
            else:
                ecol[(name, t)] = "-"
        patterns.append(Pattern(ColouredStructure(body, vcol, ecol)))
    return Problem(sig, vpalette, epalette, patterns, undirected=undirected)


def _preimages(palette, m):
    """assignment token -> colour, aliasing surplus assignments to colour 1."""
    tokens = _assignment_tokens(m)
    alias = {}
    for i, tok in enumerate(tokens):
        alias[tok] = palette[i] if i < len(palette) else palette[0]
    out = {colour: [tok for tok, c in alias.items() if c == colour] for colour in palette}
    return out


def problem_to_sentence(problem):
    """Problem -> primitive sentence; MMSNP2 iff several edge colours."""
    mv = math.ceil(math.log2(len(problem.vpalette))) if len(problem.vpalette) > 1 else 0
    me = math.ceil(math.log2(len(problem.epalette))) if len(problem.epalette) > 1 else 0
    dialect2 = me > 0
    m = max(mv, me)
    monadic = tuple(f"M{i+1}" for i in range(m))
    vpre = _preimages(problem.vpalette, m)
    epre = _preimages(problem.epalette, m) if dialect2 else None
    conjuncts = []
    max_vars = 1
    for pattern in problem.patterns:
        body = pattern.body
        elems = sorted(body.domain)
        max_vars = max(max_vars, len(elems))
        var_of = {x: f"x{ei+1}" for ei, x in enumerate(elems)}
        occs = body.occurrences()
        # in an undirected problem the two arcs of an edge are one colour
        # unit, so they pick one assignment token together
        units, unit_of = [], {}
        for occ in occs:
            name, t = occ
            mate = (name, (t[1], t[0])) if len(t) == 2 else None
            if problem.undirected and mate in unit_of:
                unit_of[occ] = unit_of[mate]
            else:
                unit_of[occ] = len(units)
                units.append(occ)
        vertex_choices = [vpre[body.vcol[x]] for x in elems]
        unit_choices = [epre[body.ecol[occ]] for occ in units] if dialect2 else []
        for vcombo in itertools.product(*vertex_choices):
            for ucombo in itertools.product(*unit_choices) if dialect2 else [()]:
                alpha = tuple(
                    Atom(name, tuple(var_of[e] for e in t)) for name, t in occs
                )
                beta = []
                for x, token in zip(elems, vcombo):
                    for Mi, M in enumerate(monadic):
                        beta.append(VertexLiteral(M, var_of[x], token[Mi] == "1"))
                if dialect2:
                    for name, t in occs:
                        token = ucombo[unit_of[(name, t)]]
                        atom = Atom(name, tuple(var_of[e] for e in t))
                        for Mi, M in enumerate(monadic):
                            beta.append(EdgeLiteral(M, atom, token[Mi] == "1"))
                conjuncts.append(NegatedConjunct(alpha, tuple(beta)))
    variables = tuple(f"x{i+1}" for i in range(max_vars))
    sentence = Sentence(monadic, variables, tuple(conjuncts))
    ok, diags = is_primitive(sentence)
    if not ok:
        raise FPDError("internal: emitted a non-primitive sentence: " + "; ".join(diags))
    return sentence


# ---------------------------------------------------------------------------
# Edge colours as vertex colours over <T, R> (the syntactic reduction)
# ---------------------------------------------------------------------------

TR_SIG = Signature([("R", 3), ("T", 1)])


def encode_fpp2(problem):
    """Arc-coloured digraph problem -> vertex-coloured problem over <T,R>.

    Each arc E(x,y) of colour a becomes R(x,e,y) with T(e) and the colour
    bits of a on e.  Returns (encoded problem, interpretation) where the
    interpretation maps a <T,R>-structure to the digraph with an arc (x,y)
    whenever some e satisfies T(e) and R(x,e,y).
    """
    if problem.signature.symbols != (("E", 2),):
        raise FPDError("encode_fpp2 expects a problem over the single symbol E/2")
    if len(problem.vpalette) != 1:
        raise FPDError("encode_fpp2 expects a singleton vertex palette")
    c = len(problem.epalette)
    m = max(1, math.ceil(math.log2(c)) if c > 1 else 1)
    tokens = _assignment_tokens(m)
    colour_token = {colour: tokens[i] for i, colour in enumerate(problem.epalette)}
    surplus = tokens[c:]

    patterns = []
    for pattern in problem.patterns:
        body = pattern.body
        elems = sorted(body.domain)
        occs = body.occurrences()
        base = len(elems)
        index = {x: i for i, x in enumerate(elems)}
        rels = {"R": set(), "T": set()}
        ecolour_of = []
        for k, (name, t) in enumerate(occs):
            e = base + k
            rels["R"].add((index[t[0]], e, index[t[1]]))
            rels["T"].add((e,))
            ecolour_of.append(colour_token[body.ecol[(name, t)]])
        new_body = Structure(TR_SIG, range(base + len(occs)), rels)
        for vcombo in itertools.product(tokens, repeat=base):
            vcol = {i: vcombo[i] for i in range(base)}
            for k in range(len(occs)):
                vcol[base + k] = ecolour_of[k]
            ecol = {occ: "-" for occ in new_body.occurrences()}
            patterns.append(Pattern(ColouredStructure(new_body, vcol, ecol)))
    for token in surplus:
        # forbid surplus colour bits on T-elements
        guard = Structure(TR_SIG, [0], {"T": [(0,)]})
        patterns.append(
            Pattern(
                ColouredStructure(
                    guard, {0: token}, {occ: "-" for occ in guard.occurrences()}
                )
            )
        )
    encoded = Problem(TR_SIG, tokens, ("-",), patterns, undirected=False)
    return encoded, interpret_tr


def interpret_tr(A):
    """psi_E: the digraph with an arc (x,y) iff some e has T(e) and R(x,e,y)."""
    A = base_of(A)
    if A.signature != TR_SIG:
        raise FPDError("interpret_tr expects a <T,R> structure")
    tset = {t[0] for t in A.relations["T"]}
    arcs = {(x, y) for (x, e, y) in A.relations["R"] if e in tset}
    return Structure(Signature([("E", 2)]), A.domain, {"E": arcs})
