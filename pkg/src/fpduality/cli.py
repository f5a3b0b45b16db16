"""Command-line surface: every verb maps to one library operation.

Exit codes: 0 = YES/success, 1 = NO (decision verbs), 2 = usage or format
error, 3 = budget/cap exceeded.  All randomized behaviour is seeded; every
witness written to disk is re-checked by an independent checker first.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import files, generators, mmsnp
from .errors import BudgetExceeded, CapExceeded, FormatError, FPDError
from .hom import check_hom, core, find_hom
from .patterns import BUILTIN_NAMES, builtin, decide_fpp, is_valid
from .products import TruncatedProduct, product
from .relstruct import ColouredStructure, as_coloured, base_of, symmetric_closure
from .treedepth import closure, is_uniformly_k_sparse, tree_depth
from .universal import (
    bounded_degree_universal,
    low_td_universal,
    verify_duality,
)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise FormatError(f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}", path=str(path))


def _load_structure(path):
    return files.json_to_structure(_load_json(path), path=str(path))


def _load_problem(spec):
    if spec in BUILTIN_NAMES:
        return builtin(spec)
    return files.json_to_problem(_load_json(spec), path=str(spec))


def _write(path, obj):
    Path(path).write_text(files.dumps(obj))


def cmd_hom(args):
    A = _load_structure(args.source)
    B = _load_structure(args.target)
    h = find_hom(A, B)
    if h is None:
        print("NO")
        return 1
    assert check_hom(as_coloured(A), as_coloured(B), h)
    if args.out:
        _write(args.out, files.hom_to_json(h, A, B))
    print("YES")
    return 0


def cmd_valid(args):
    CS = _load_structure(args.input)
    if not isinstance(CS, ColouredStructure):
        raise FormatError("valid expects a coloured structure file", path=args.input)
    P = _load_problem(args.problem)
    ok = is_valid(CS, P)
    print("VALID" if ok else "INVALID")
    return 0 if ok else 1


def cmd_decide(args):
    S = _load_structure(args.input)
    P = _load_problem(args.problem)
    result = decide_fpp(S, P, budget=args.budget)
    if result is None:
        print("NO")
        return 1
    vcol, ecol = result
    base = symmetric_closure(base_of(S)) if P.undirected else base_of(S)
    witness = ColouredStructure(base, vcol, ecol)
    assert is_valid(witness, P)
    if args.witness:
        _write(args.witness, files.structure_to_json(witness))
    print("YES")
    return 0


def cmd_core(args):
    CS = as_coloured(_load_structure(args.input))
    C = core(CS, cap=args.cap)
    assert find_hom(CS, C) is not None and find_hom(C, CS) is not None
    _write(args.out, files.structure_to_json(C))
    print(f"core: {C.size} elements")
    return 0


def cmd_treedepth(args):
    S = _load_structure(args.input)
    value, witness = tree_depth(base_of(S), cap=args.cap)
    clos = closure(witness, base_of(S).signature)
    for name in base_of(S).signature.names:
        assert base_of(S).relations[name] <= clos.relations[name]
    assert witness.height == value
    if args.out:
        _write(args.out, files.forest_to_json(witness, S))
    print(value)
    return 0


def cmd_product(args):
    A = _load_structure(args.a)
    B = _load_structure(args.b)
    S, _ = product(base_of(A), base_of(B))
    _write(args.out, files.structure_to_json(S))
    print(f"product: {S.size} elements")
    return 0


def cmd_tproduct(args):
    CS = as_coloured(_load_structure(args.input))
    prod = TruncatedProduct(CS, args.p, cap=args.cap)
    out = files.structure_to_json(prod.coloured)
    out["coordinates"] = {
        str(i): ["*" if c == "*" else str(c) for c in vec]
        for i, vec in enumerate(prod.coords)
    }
    _write(args.out, out)
    print(f"truncated product: {prod.size} elements")
    return 0


def cmd_universal_bd(args):
    P = _load_problem(args.problem)
    T = bounded_degree_universal(
        P,
        args.degree,
        mode=args.mode,
        restrict_degree=not args.no_restrict_degree,
    )
    _write(args.out, files.template_to_json(T))
    _write(str(args.out) + ".provenance.json", files.template_provenance_json(T))
    print(f"template: {T.carrier_coloured.size} vertices, {len(T.members)} members")
    return 0


def cmd_universal_ltd(args):
    P = _load_problem(args.problem)
    T = low_td_universal(P, args.p, args.q, args.n_max, materialize=True)
    if T.params["base"] is None:
        print("empty template (no valid cores)")
        _write(args.out, {"kind": "low-td", "empty": True})
        return 0
    _write(args.out, files.template_to_json(T))
    _write(str(args.out) + ".provenance.json", files.template_provenance_json(T))
    print(f"template: {T.carrier_coloured.size} vertices, {len(T.members)} cores")
    return 0


def cmd_verify(args):
    P = _load_problem(args.problem)
    obj = _load_json(args.template)
    carrier = files.json_to_structure(obj.get("carrier", obj), path=str(args.template))
    from .universal import UniversalTemplate

    T = UniversalTemplate(kind="bounded-degree", carrier=as_coloured(carrier), problem=P)
    gen = (S for S, _stamp in generators.generator_for(
        args.cls, seed=args.seed, max_n=args.max_n, count=args.count
    ))
    report = verify_duality(
        T, P, gen, budget=args.budget,
        describe=lambda S: files.structure_to_json(base_of(S)),
    )
    if args.out:
        _write(args.out, report.to_json())
    print(f"cases={report.cases} agreements={report.agreements} "
          f"disagreements={len(report.disagreements)}")
    return 0 if not report.disagreements else 1


def cmd_mmsnp_compile(args):
    text = Path(args.input).read_text()
    sentence = mmsnp.parse(text)
    ok, diags = mmsnp.is_primitive(sentence)
    if not ok:
        raise FormatError("sentence is not primitive: " + "; ".join(diags), path=args.input)
    P = mmsnp.sentence_to_problem(sentence)
    _write(args.out, files.problem_to_json(P))
    print(f"compiled: {len(P.patterns)} patterns, "
          f"|V|={len(P.vpalette)}, |E|={len(P.epalette)}")
    return 0


def cmd_mmsnp_decompile(args):
    P = _load_problem(args.input)
    sentence = mmsnp.problem_to_sentence(P)
    Path(args.out).write_text(mmsnp.render(sentence) + "\n")
    print(f"decompiled: {len(sentence.conjuncts)} conjuncts, "
          f"{len(sentence.monadic)} predicates ({sentence.dialect})")
    return 0


def cmd_encode_fpp2(args):
    P = _load_problem(args.input)
    encoded, _interp = mmsnp.encode_fpp2(P)
    obj = files.problem_to_json(encoded)
    obj["interpretation"] = "psi_E(x,y) = exists e. T(e) & R(x,e,y)"
    _write(args.out, obj)
    print(f"encoded: {len(encoded.patterns)} patterns over <T,R>")
    return 0


def cmd_gen(args):
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    n = 0
    for i, (S, stamp) in enumerate(
        generators.generator_for(args.cls, seed=args.seed, max_n=args.max_n, count=args.count)
    ):
        obj = files.structure_to_json(S)
        obj["stamp"] = stamp
        _write(outdir / f"{args.cls}-{i:04d}.json", obj)
        n += 1
    print(f"wrote {n} structures to {outdir}")
    return 0


def cmd_sparse(args):
    S = _load_structure(args.input)
    ok, orientation = is_uniformly_k_sparse(base_of(S), args.k)
    if not ok:
        print("NO")
        return 1
    indeg = {}
    for e, h in orientation.items():
        indeg[h] = indeg.get(h, 0) + 1
    assert all(v <= args.k for v in indeg.values())
    if args.out:
        _write(args.out, files.orientation_to_json(orientation, S))
    print("YES")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fpd",
        description="Forbidden-patterns problems, universal templates, and MMSNP tooling",
    )
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized verbs")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("hom", help="find a homomorphism between two structure files")
    p.add_argument("source"); p.add_argument("target"); p.add_argument("--out")
    p.set_defaults(func=cmd_hom)

    p = sub.add_parser("valid", help="is a coloured structure valid for a problem")
    p.add_argument("--input", required=True); p.add_argument("--problem", required=True)
    p.set_defaults(func=cmd_valid)

    p = sub.add_parser("decide", help="decide a forbidden-patterns problem")
    p.add_argument("--input", required=True); p.add_argument("--problem", required=True)
    p.add_argument("--witness"); p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("core", help="compute the core of a coloured structure")
    p.add_argument("--input", required=True); p.add_argument("--out", required=True)
    p.add_argument("--cap", type=int, default=10)
    p.set_defaults(func=cmd_core)

    p = sub.add_parser("treedepth", help="exact tree-depth with forest witness")
    p.add_argument("--input", required=True); p.add_argument("--out")
    p.add_argument("--cap", type=int, default=12)
    p.set_defaults(func=cmd_treedepth)

    p = sub.add_parser("product", help="categorical product of two structures")
    p.add_argument("a"); p.add_argument("b"); p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("tproduct", help="truncated product of a coloured structure")
    p.add_argument("--input", required=True); p.add_argument("--p", type=int, required=True)
    p.add_argument("--out", required=True); p.add_argument("--cap", type=int, default=200_000)
    p.set_defaults(func=cmd_tproduct)

    p = sub.add_parser("universal-bd", help="bounded-degree universal template")
    p.add_argument("--problem", required=True); p.add_argument("--degree", type=int, required=True)
    p.add_argument("--mode", choices=["labelled", "reduced"], default="labelled")
    p.add_argument("--no-restrict-degree", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_universal_bd)

    p = sub.add_parser("universal-ltd", help="low tree-depth universal template")
    p.add_argument("--problem", required=True)
    p.add_argument("--p", type=int, required=True); p.add_argument("--q", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True); p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_universal_ltd)

    p = sub.add_parser("verify", help="duality agreement report over a generated class")
    p.add_argument("--template", required=True); p.add_argument("--problem", required=True)
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--max-n", type=int, default=6); p.add_argument("--count", type=int, default=50)
    p.add_argument("--budget", type=int, default=None); p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mmsnp-compile", help="compile a .mmsnp sentence to a problem")
    p.add_argument("input"); p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mmsnp_compile)

    p = sub.add_parser("mmsnp-decompile", help="emit a primitive sentence for a problem")
    p.add_argument("input"); p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mmsnp_decompile)

    p = sub.add_parser("encode-fpp2", help="arc colours to vertex colours over <T,R>")
    p.add_argument("input"); p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode_fpp2)

    p = sub.add_parser("gen", help="emit structures of a declared class")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--max-n", type=int, default=6); p.add_argument("--count", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sparse", help="uniformly k-sparse test with orientation witness")
    p.add_argument("--input", required=True); p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sparse)

    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except FormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return 2
    except (CapExceeded, BudgetExceeded) as e:
        print(f"budget/cap: {e}", file=sys.stderr)
        return 3
    except FPDError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
