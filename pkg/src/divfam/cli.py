"""Command-line interface: ``divfam analyze|construct|verify|search``.

Exit codes: 0 holds/success, 1 violated, 2 bad input, 3 internal invariant
failure, 4 premise not met, 5 search budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import (
    MODES,
    cross_product_bound_check,
    exhaustive_max_family,
    greedy_removal_to_closed,
    oddtown_pairs_check,
)
from .constructions import (
    AtomSpec,
    atomic_family,
    blocks_from_sizes,
    cross_extremal_families,
    s_family,
    subspace_stability_family,
)
from .errors import BudgetError, DivfamError, ParseError
from .families import (
    SetFamily,
    dim_masks,
    is_k_closed,
    is_weakly_k_closed,
    string_to_mask,
    twin_decomposition,
)
from .fileformat import format_family, parse_vectors, write_family
from .linalg import count_01_in_span, factorize, is_prime, span_basis
from .structure import (
    Status,
    Verdict,
    check_bilinear_bound,
    check_lemma_prime,
    check_lemma_primepower,
    check_lemma_smalldim,
    stability_projection,
    structure_decompose,
)

log = logging.getLogger("divfam")

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_INVARIANT, EXIT_NA, EXIT_BUDGET = 0, 1, 2, 3, 4, 5
VERDICT_EXIT = {Status.HOLDS: EXIT_OK, Status.VIOLATED: EXIT_VIOLATED, Status.NOT_APPLICABLE: EXIT_NA}
LEMMAS = ("bilinear", "prime", "primepower", "smalldim", "odim", "oddtown", "removal", "cross", "structure", "stability")


class UsageError(DivfamError):
    pass


# ------------------------------------------------------------------ helpers


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _groups(text: str) -> list[list[int]]:
    """'0,1;2,3' -> [[0, 1], [2, 3]]."""
    return [_int_list(g) for g in text.split(";") if g.strip()]


def _load(path: str):
    """Read a family/vector file; returns (n, mod, vectors, family-or-None)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    n, mod, vecs = parse_vectors(text)
    family = None
    if all(v.is_01() for v in vecs):
        family = SetFamily(n, tuple(string_to_mask("".join(map(str, v.entries))) for v in vecs))
    return n, mod, vecs, family


def _load_family(path: str) -> tuple[SetFamily, int]:
    n, mod, _vecs, family = _load(path)
    if family is None:
        raise UsageError(f"{path}: expected a 0/1 family, found residues other than 0 and 1")
    return family, mod


def _prime_from(args_p, mod: int) -> int:
    p = args_p if args_p is not None else mod
    if not is_prime(p):
        raise UsageError(f"{p} is not prime; pass --p")
    return p


def _emit(payload: dict, args, out: str | None = None) -> None:
    payload = {"schema": 1, **payload}
    if not args.no_meta:
        payload["meta"] = {
            "tool": "divfam",
            "version": __version__,
            "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_verdict(v: Verdict, args, extra: dict | None = None) -> int:
    _emit({"lemma": args.lemma, **v.to_json(), **(extra or {})}, args)
    return VERDICT_EXIT[v.status]


# ------------------------------------------------------------------ analyze


def _closure_spec(text: str) -> tuple[int, int]:
    try:
        k, ell = text.split(":")
        return int(k), int(ell)
    except ValueError:
        raise argparse.ArgumentTypeError(f"closure spec must be K:MOD, got {text!r}") from None


def cmd_analyze(args) -> int:
    n, mod, vecs, family = _load(args.file)
    primes = _int_list(args.primes) if args.primes else ([mod] if is_prime(mod) else sorted(factorize(mod)))
    for p in primes:
        if not is_prime(p):
            raise UsageError(f"{p} is not prime")
    report: dict = {"n": n, "mod": mod, "kind": "family" if family is not None else "vectors"}
    if family is not None:
        tw = twin_decomposition(family)
        report["family_size"] = len(family)
        report["twin_classes"] = [list(c) for c in tw.classes]
        report["twin_sizes"] = list(tw.sizes)
        report["uncovered"] = list(tw.uncovered)
    else:
        report["generator_count"] = len(vecs)
    per_prime = {}
    ok = True
    for p in primes:
        if family is None and mod != p:
            raise UsageError(f"vector file over Z_{mod} can only be analyzed at prime {mod}")
        src = family if family is not None else vecs
        res = structure_decompose(src, p)
        ok &= res.ok
        entry = {
            "dim": res.d,
            "dim_doubling": res.d + res.h,
            "h": res.h,
            "structure": res.summary(),
        }
        if args.certificate and res.certificate is not None:
            entry["certificate"] = res.certificate.to_json()
        if family is not None:
            entry["dim_product"] = dim_masks({a & b for a in family for b in family}, n, p)
        per_prime[str(p)] = entry
    report["primes"] = per_prime
    if args.closure:
        if family is None:
            raise UsageError("closure checks need a 0/1 family")
        report["closure"] = [
            {
                "k_closed": is_k_closed(family, k, ell).to_json(family),
                "weakly_k_closed": is_weakly_k_closed(family, k, ell).to_json(family),
            }
            for k, ell in args.closure
        ]
    report["invariants_ok"] = ok
    _emit(report, args, args.out)
    return EXIT_OK if ok else EXIT_INVARIANT


# ---------------------------------------------------------------- construct


def cmd_construct(args) -> int:
    kind = args.kind
    if kind == "cross":
        if not args.parts:
            raise UsageError("cross needs --parts")
        sizes = _int_list(args.parts)
        fams = cross_extremal_families(blocks_from_sizes(sizes), args.n)
        prefix = args.out or "cross"
        for i, F in enumerate(fams, start=1):
            write_family(f"{prefix}_{i}.fam", F, args.mod, [f"cross family {i} of {len(fams)}"])
        return EXIT_OK
    if kind == "s":
        F = s_family(args.n, args.mod)
        mod = args.mod
    elif kind == "atomic":
        if args.atoms is None:
            raise UsageError("atomic needs --atoms")
        F = atomic_family(AtomSpec(args.n, tuple(tuple(a) for a in _groups(args.atoms))))
        mod = args.mod
    else:
        F = subspace_stability_family(args.p, args.k, args.q, args.r)
        mod = args.p
    text = format_family(F, mod)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    lemma = args.lemma
    if lemma not in LEMMAS:
        sys.stderr.write(f"unknown lemma {lemma!r}; choose from {', '.join(LEMMAS)}\n")
        return EXIT_INPUT
    inputs = args.inputs
    if not inputs:
        raise UsageError("--in is required")

    if lemma == "cross":
        loaded = [_load_family(p) for p in inputs]
        ell = args.mod or loaded[0][1]
        return _emit_verdict(cross_product_bound_check([F for F, _ in loaded], ell), args)

    if lemma in ("bilinear", "prime", "odim"):
        n, mod, vecs, _ = _load(inputs[0])
        p = _prime_from(args.p, mod)
        basis = span_basis([v if v.modulus == p else type(v)(p, tuple(e % p for e in v.entries)) for v in vecs], p, n)
        if lemma == "bilinear":
            if args.b is None:
                raise UsageError("bilinear needs --b")
            return _emit_verdict(check_bilinear_bound(_int_list(args.b), basis), args)
        if lemma == "prime":
            if args.classes is None:
                raise UsageError("prime needs --classes")
            return _emit_verdict(check_lemma_prime(basis, _groups(args.classes)), args)
        count = count_01_in_span(basis, args.budget_span) if args.budget_span else count_01_in_span(basis)
        bound = 2**basis.dimension
        v = Verdict("odim", Status.HOLDS if count <= bound else Status.VIOLATED,
                    {"count_01": count, "dim": basis.dimension, "bound": bound})
        return _emit_verdict(v, args)

    if lemma == "oddtown":
        F_rows = _load(inputs[0])
        n, mod, vecs, _ = F_rows
        if len(vecs) % 2:
            raise UsageError("oddtown input needs an even number of rows (A_1, B_1, A_2, B_2, ...)")
        masks = [string_to_mask("".join(map(str, v.entries))) for v in vecs]
        pairs = list(zip(masks[0::2], masks[1::2]))
        return _emit_verdict(oddtown_pairs_check(pairs, n, args.mod or mod), args)

    F, mod = _load_family(inputs[0])
    if lemma == "structure":
        p = _prime_from(args.p, mod)
        res = structure_decompose(F, p)
        status = Status.HOLDS if res.ok else Status.VIOLATED
        details = res.summary()
        payload = {"lemma": lemma, "check": "structure", "status": status.value, "details": details}
        if res.certificate is not None:
            payload["certificate"] = res.certificate.to_json()
        _emit(payload, args)
        return VERDICT_EXIT[status]
    if lemma == "removal":
        if args.k is None:
            raise UsageError("removal needs --k")
        trace = greedy_removal_to_closed(F, args.k, args.mod or mod)
        extra = {}
        if trace.final_family is not None:
            extra["final_family"] = trace.final_family.strings()
        return _emit_verdict(trace.verdict(), args, extra)
    if lemma == "stability":
        X, v = stability_projection(F, args.mod or mod)
        return _emit_verdict(v, args, {"X": list(X)})
    p = _prime_from(args.p, mod)
    if args.alpha is None:
        raise UsageError(f"{lemma} needs --alpha")
    if lemma == "primepower":
        return _emit_verdict(check_lemma_primepower(F, p, args.alpha), args)
    if args.t is None:
        raise UsageError("smalldim needs --t")
    B, v = check_lemma_smalldim(F, p, args.alpha, args.t)
    return _emit_verdict(v, args, {"B": list(B)})


# ------------------------------------------------------------------- search


def _search_payload(res) -> dict:
    return res.to_json()


def cmd_search(args) -> int:
    try:
        res = exhaustive_max_family(args.n, args.mod, args.k, args.mode, args.budget_nodes, args.threads)
    except BudgetError as exc:
        payload = _search_payload(exc.partial) if exc.partial is not None else {}
        payload["error"] = str(exc)
        _emit(payload, args)
        return EXIT_BUDGET
    k = res.k
    for F in res.extremal_families:
        check = is_weakly_k_closed(F, k, args.mod) if args.mode == "distinct" else is_k_closed(F, k, args.mod)
        if len(F) and not check.holds:
            sys.stderr.write(f"extremal family {F.strings()} fails the {args.mode} predicate\n")
            return EXIT_INVARIANT
    if args.emit_extremal:
        for i, F in enumerate(res.extremal_families, start=1):
            write_family(f"{args.emit_extremal}_{i}.fam", F, args.mod,
                         [f"extremal family {i} of {len(res.extremal_families)}, mode {args.mode}, k={k}"])
    _emit(_search_payload(res), args)
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-meta", action="store_true", help="omit version/timestamp from JSON output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="divfam", description="Divisible set family toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="report dims, twins and structure of a family file")
    a.add_argument("file")
    a.add_argument("--primes", help="comma-separated primes (default: prime factors of the file's mod)")
    a.add_argument("--closure", type=_closure_spec, action="append", metavar="K:MOD",
                   help="closure test to include; repeatable")
    a.add_argument("--certificate", action="store_true", help="include the full structure certificate")
    a.add_argument("--out", help="write the JSON report here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("construct", parents=[common], help="generate an explicit family")
    c.add_argument("kind", choices=("s", "atomic", "subspace", "cross"))
    c.add_argument("--n", type=int)
    c.add_argument("--mod", type=int, default=2)
    c.add_argument("--atoms", help="atoms as '0,1;2,3' (atomic)")
    c.add_argument("--p", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--q", type=int)
    c.add_argument("--r", type=int)
    c.add_argument("--parts", help="part sizes as '1,1' (cross)")
    c.add_argument("--out", help="output file (prefix for cross)")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="run a lemma verifier")
    v.add_argument("lemma", help=", ".join(LEMMAS))
    v.add_argument("--in", dest="inputs", action="append", help="input file; repeat for cross")
    v.add_argument("--p", type=int)
    v.add_argument("--mod", type=int, help="override the file's modulus")
    v.add_argument("--alpha", type=int)
    v.add_argument("--t", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--b", help="bilinear form coefficients, comma-separated")
    v.add_argument("--classes", help="twin partition as '0,1;2,3'")
    v.add_argument("--budget-span", type=int, help="span enumeration budget (odim)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", parents=[common], help="exhaustive extremal search")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mod", type=int, default=2)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--mode", choices=MODES, default="pairwise")
    s.add_argument("--budget-nodes", type=int, default=None,
                   help="node budget (default from DIVFAM_BUDGET_NODES or 2000000)")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--emit-extremal", metavar="PREFIX", help="write extremal families to PREFIX_i.fam")
    s.set_defaults(func=cmd_search)
    return parser


def _check_construct_args(args) -> None:
    need = {"s": ("n",), "atomic": ("n",), "subspace": ("p", "k", "q", "r"), "cross": ("n",)}
    missing = [f"--{a}" for a in need[args.kind] if getattr(args, a) is None]
    if args.kind == "cross" and args.n is None and args.parts:
        missing = []
    if missing:
        raise UsageError(f"construct {args.kind} needs {' '.join(missing)}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "construct":
            _check_construct_args(args)
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_INPUT
    except BudgetError as exc:
        sys.stderr.write(f"budget exhausted: {exc}\n")
        return EXIT_BUDGET
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except DivfamError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
