"""Canonical JSON serialization for every file kind the CLI exchanges.

Element names are external: files carry name strings, structures carry dense
integer ids plus an optional name table.  Emission is canonical (sorted keys,
sorted tuples, trailing newline), so save . load . save is byte-stable.
"""

from __future__ import annotations

import json

from .errors import FormatError
from .patterns import Pattern, Problem
from .relstruct import ColouredStructure, Signature, Structure, base_of
from .treedepth import Partition, RootedForest


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _names_of(S):
    B = base_of(S)
    if B.names is not None:
        return {x: B.names[i] for i, x in enumerate(B.domain)}
    return {x: str(x) for x in B.domain}


def structure_to_json(S):
    B = base_of(S)
    name = _names_of(S)
    obj = {
        "signature": {n: a for n, a in B.signature.symbols},
        "elements": [name[x] for x in B.domain],
        "relations": {
            n: sorted([name[x] for x in t] for t in B.relations[n])
            for n in B.signature.names
        },
    }
    if isinstance(S, ColouredStructure):
        obj["vertex_colours"] = {name[x]: str(c) for x, c in S.vcol.items()}
        obj["tuple_colours"] = sorted(
            (
                {"rel": rel, "tuple": [name[x] for x in t], "colour": str(c)}
                for (rel, t), c in S.ecol.items()
            ),
            key=lambda row: (row["rel"], row["tuple"]),
        )
    return obj


def json_to_structure(obj, path="$"):
    if not isinstance(obj, dict):
        raise FormatError("expected an object", path)
    for field in ("signature", "elements", "relations"):
        if field not in obj:
            raise FormatError(f"missing field {field!r}", path)
    sig = Signature(sorted(obj["signature"].items()))
    names = list(obj["elements"])
    if len(set(names)) != len(names):
        raise FormatError("duplicate element names", f"{path}.elements")
    code = {nm: i for i, nm in enumerate(names)}
    rels = {}
    for rel, rows in obj["relations"].items():
        if rel not in sig._arity:
            raise FormatError(f"unknown relation {rel!r}", f"{path}.relations")
        out = []
        for i, row in enumerate(rows):
            if len(row) != sig.arity(rel):
                raise FormatError(
                    f"tuple of arity {len(row)}, expected {sig.arity(rel)}",
                    f"{path}.relations.{rel}[{i}]",
                )
            for nm in row:
                if nm not in code:
                    raise FormatError(
                        f"unknown element {nm!r}", f"{path}.relations.{rel}[{i}]"
                    )
            out.append(tuple(code[nm] for nm in row))
        rels[rel] = out
    S = Structure(sig, range(len(names)), rels, names=names)
    if "vertex_colours" not in obj and "tuple_colours" not in obj:
        return S
    vcol_in = obj.get("vertex_colours", {})
    missing = [nm for nm in names if nm not in vcol_in]
    if missing:
        raise FormatError(f"missing vertex colours for {missing}", f"{path}.vertex_colours")
    vcol = {code[nm]: c for nm, c in vcol_in.items() if nm in code}
    if len(vcol) != len(vcol_in):
        raise FormatError("vertex colour for unknown element", f"{path}.vertex_colours")
    ecol = {}
    for i, row in enumerate(obj.get("tuple_colours", [])):
        p = f"{path}.tuple_colours[{i}]"
        for field in ("rel", "tuple", "colour"):
            if field not in row:
                raise FormatError(f"missing field {field!r}", p)
        if row["rel"] not in rels:
            raise FormatError(f"unknown relation {row['rel']!r}", p)
        try:
            t = tuple(code[nm] for nm in row["tuple"])
        except KeyError as e:
            raise FormatError(f"unknown element {e.args[0]!r}", p)
        if t not in set(rels[row["rel"]]):
            raise FormatError("colour for a tuple the structure does not hold", p)
        ecol[(row["rel"], t)] = row["colour"]
    uncoloured = [occ for occ in S.occurrences() if occ not in ecol]
    if uncoloured:
        raise FormatError(f"missing tuple colours for {uncoloured}", f"{path}.tuple_colours")
    return ColouredStructure(S, vcol, ecol)


def problem_to_json(P):
    return {
        "signature": {n: a for n, a in P.signature.symbols},
        "vertex_palette": [str(c) for c in P.vpalette],
        "edge_palette": [str(c) for c in P.epalette],
        "undirected": P.undirected,
        "patterns": [structure_to_json(p.body) for p in P.patterns],
    }


def json_to_problem(obj, path="$"):
    for field in ("signature", "vertex_palette", "edge_palette", "patterns"):
        if field not in obj:
            raise FormatError(f"missing field {field!r}", path)
    sig = Signature(sorted(obj["signature"].items()))
    patterns = []
    for i, pat in enumerate(obj["patterns"]):
        body = json_to_structure(pat, path=f"{path}.patterns[{i}]")
        if not isinstance(body, ColouredStructure):
            raise FormatError("patterns must be fully coloured", f"{path}.patterns[{i}]")
        if body.signature != sig:
            raise FormatError("pattern signature mismatch", f"{path}.patterns[{i}]")
        patterns.append(body)
    try:
        return Problem(
            sig,
            obj["vertex_palette"],
            obj["edge_palette"],
            patterns,
            undirected=obj.get("undirected", False),
        )
    except Exception as e:
        raise FormatError(str(e), path)


def hom_to_json(mapping, source, target):
    sn, tn = _names_of(source), _names_of(target)
    return {sn[x]: tn[v] for x, v in mapping.items()}


def forest_to_json(forest, S=None):
    name = _names_of(S) if S is not None else {x: str(x) for x in forest.nodes}
    return {
        "roots": sorted(name[r] for r in forest.roots),
        "parent": {name[c]: name[p] for c, p in forest.parent.items()},
        "height": forest.height,
    }


def json_to_forest(obj, S, path="$"):
    name = _names_of(S)
    code = {nm: x for x, nm in name.items()}
    try:
        parent = {code[c]: code[p] for c, p in obj["parent"].items()}
    except KeyError as e:
        raise FormatError(f"unknown element {e.args[0]!r}", f"{path}.parent")
    return RootedForest(base_of(S).domain, parent)


def partition_to_json(partition, S=None):
    name = _names_of(S) if S is not None else {x: str(x) for x in partition.part_of}
    return {name[x]: i for x, i in partition.part_of.items()}


def json_to_partition(obj, S, path="$"):
    name = _names_of(S)
    code = {nm: x for x, nm in name.items()}
    part_of = {}
    for nm, i in obj.items():
        if nm not in code:
            raise FormatError(f"unknown element {nm!r}", path)
        part_of[code[nm]] = i
    return Partition(part_of)


def orientation_to_json(orientation, S=None):
    name = _names_of(S) if S is not None else None

    def nm(x):
        return name[x] if name else str(x)

    return sorted(
        ({"edge": sorted(nm(x) for x in e), "head": nm(h)} for e, h in orientation.items()),
        key=lambda row: row["edge"],
    )


def template_to_json(template):
    obj = {
        "kind": template.kind,
        "params": {
            k: v
            for k, v in template.params.items()
            if isinstance(v, (int, str, bool))
        },
        "carrier": structure_to_json(template.carrier_coloured),
    }
    return obj


def template_provenance_json(template):
    return {
        "members": [structure_to_json(M) for M in template.members],
        "elements": {
            str(i): list(pair) for i, pair in sorted(template.provenance.items())
        },
    }
