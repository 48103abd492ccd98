"""Command-line interface: ``matgrow <verb> ...``.

Exit status is 0 on success, 1 on domain or input errors and 2 when a
search runs out of budget.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import io
from .classes import has_minor, find_representation, is_representable
from .errors import BudgetExceeded, CertificateError, RegimeError
from .geometry import ag, pg, random_certificate
from .gf import FieldError, FormatError, format_matrix
from .growth import growth_table, h_exhaustive, kd_search, profile_line
from .matroid import MatroidError, uniform
from .modsum import modular_sum
from .projection import density_params, find_stack
from .suites import SUITES, run_suite, suite_key

log = logging.getLogger("matgrow")


def _budget(text: str | None) -> int | None:
    if text is None:
        text = os.environ.get("MATGROW_BUDGET")
    if text is None or text == "":
        return None
    try:
        return int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad budget {text!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Verbs


def cmd_construct(a) -> int:
    if a.kind in ("pg", "ag", "uniform") and a.n is None:
        raise MatroidError(f"{a.kind} needs -n")
    if a.kind == "pg":
        M = pg(a.n, a.q)
        text = io.format_matroid(M, f"PG({a.n - 1},{a.q})")
    elif a.kind == "ag":
        M = ag(a.n, a.q)
        text = io.format_matroid(M, f"AG({a.n - 1},{a.q})")
    elif a.kind == "uniform":
        if a.r is None:
            raise MatroidError("uniform needs -r")
        M = uniform(a.r, a.n)
        text = io.format_matroid(M, f"U({a.r},{a.n})")
    else:
        if a.seed is None:
            raise MatroidError("random-cert needs --seed")
        r = a.r if a.r is not None else a.n
        if r is None:
            raise MatroidError("random-cert needs -r")
        cert = random_certificate(a.q, a.k, r, seed=a.seed)
        text = io.format_certificate(cert)
    _emit(text, a.output)
    return 0


def cmd_density(a) -> int:
    cert = io.read_certificate(a.cert)
    _emit(io.format_density(density_params(cert)), a.output)
    return 0


def cmd_stack(a) -> int:
    M = io.read_matroid(a.matroid)
    w = find_stack(M, a.q, a.t, a.k, budget=a.budget)
    _emit(io.format_stack(M, w), a.output)
    return 0


def cmd_minor(a) -> int:
    M = io.read_matroid(a.host)
    N = io.read_matroid(a.pattern)
    w = has_minor(M, N, a.budget)
    if w is None:
        print("none")
        return 0
    print("contract " + " ".join(str(x) for x in sorted(w.contract)))
    print("delete " + " ".join(str(x) for x in sorted(w.delete)))
    print("map " + " ".join(f"{x}:{w.mapping[x]}" for x in sorted(w.mapping)))
    return 0


def cmd_represent(a) -> int:
    M = io.read_matroid(a.matroid)
    if a.matrix:
        A = find_representation(M, a.q, a.limit)
        if A is None:
            print("not representable")
        else:
            print("representable")
            sys.stdout.write(format_matrix(a.q, A))
        return 0
    print("representable" if is_representable(M, a.q, a.limit) else "not representable")
    return 0


def cmd_sum(a) -> int:
    spec = io.parse_sum(Path(a.spec).read_text())
    S = modular_sum(spec)
    print(f"elements {S.n} rank {S.rank}")
    if a.output:
        io.write_matroid(a.output, io.indexed(S), "sum")
    return 0


def _class(a):
    spec = io.read_class(a.cls)
    if a.budget is not None:
        spec.budget = a.budget
    return spec


def cmd_growth(a) -> int:
    spec = _class(a)
    rep = kd_search(spec, max(2, a.rank), k_max=a.k_max, budget=a.budget)
    if rep.profile is None:
        raise MatroidError("no projection profile found for this class")
    h = h_exhaustive(spec, a.rank, a.max_nodes)
    f = rep.profile.h(a.rank)
    verdict = "match" if h.value == f else "differ"
    print(f"h({a.rank})={h.value} formula={f} {verdict}")
    if a.table:
        table, exact = growth_table(spec, range(1, a.rank + 1), rep.profile, a.max_nodes)
        print(table)
    print(profile_line(rep.profile, h.exact and not rep.truncated))
    return 0


def cmd_kdsearch(a) -> int:
    spec = _class(a)
    rep = kd_search(spec, a.rank, k_max=a.k_max, cap=a.cap, budget=a.budget)
    print(profile_line(rep.profile, not rep.truncated))
    print(f"qd {rep.qd if rep.qd is not None else 'none'}")
    print(f"queries {rep.queries}")
    print(f"witnesses {len(rep.witnesses)}")
    print(f"truncated {str(rep.truncated).lower()}")
    return 0


def cmd_verify(a) -> int:
    key = suite_key(a.suite)
    if key is None:
        print(f"unknown suite {a.suite!r}; known: {', '.join(SUITES)}", file=sys.stderr)
        return 1
    kw = {}
    if a.input:
        if key != "kernel-axioms":
            raise MatroidError("--input is only used by kernel-axioms")
        kw["inputs"] = [io.read_matroid(p, validate=False) for p in a.input]
    res = run_suite(key, a.seeds, a.budget, **kw)
    print(res.line())
    for note in res.notes:
        print(f"  {note}")
    if not res.ok:
        if res.dump is not None:
            path = Path(a.dump_dir) / f"matgrow-{key}-failure.txt"
            path.write_text(res.dump)
            print(f"reproducer written to {path}")
        return 1
    return 0


# ---------------------------------------------------------------------------
# Parser


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--threads", type=int, default=1 if default is None else default,
                   help="parallelism cap (work runs sequentially)")
    p.add_argument("--budget", type=str, default=default, help="search node budget (default: $MATGROW_BUDGET)")
    p.add_argument("-v", "--verbose", action="store_true", default=False if default is None else default)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matgrow", description="Growth rates of minor-closed classes of matroids.")
    _global_flags(p, None)
    # the same flags are accepted after the verb; SUPPRESS keeps the earlier value
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="verb", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    c = add("construct", help="write a standard matroid or a seeded certificate")
    c.add_argument("kind", choices=["pg", "ag", "uniform", "random-cert"])
    c.add_argument("-n", type=int, default=None, help="rank (pg, ag) or size (uniform)")
    c.add_argument("-q", type=int, default=2)
    c.add_argument("-r", type=int, default=None, help="rank of a uniform matroid or of a projection")
    c.add_argument("-k", type=int, default=1, help="number of projected elements")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_construct)

    c = add("density", help="density parameters of a certificate")
    c.add_argument("--cert", required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_density)

    c = add("stack", help="search for a (q, k, t)-stack")
    c.add_argument("--matroid", required=True)
    c.add_argument("-q", type=int, required=True)
    c.add_argument("-k", type=int, required=True)
    c.add_argument("-t", type=int, required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_stack)

    c = add("minor", help="test for a minor")
    c.add_argument("--host", required=True)
    c.add_argument("--pattern", required=True)
    c.set_defaults(func=cmd_minor)

    c = add("represent", help="GF(q)-representability")
    c.add_argument("--matroid", required=True)
    c.add_argument("-q", type=int, required=True)
    c.add_argument("--limit", type=int, default=12)
    c.add_argument("--matrix", action="store_true", help="print a representing matrix")
    c.set_defaults(func=cmd_represent)

    c = add("sum", help="modular sum of two matroids")
    c.add_argument("--spec", required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_sum)

    for verb, fn in (("growth", cmd_growth), ("kdsearch", cmd_kdsearch)):
        c = add(verb)
        c.add_argument("--class", dest="cls", required=True)
        c.add_argument("--rank", type=int, required=True)
        c.add_argument("--k-max", type=int, default=1)
        if verb == "growth":
            c.add_argument("--max-nodes", type=int, default=5000)
            c.add_argument("--table", action="store_true", help="print h(n) against the formula for n <= rank")
        else:
            c.add_argument("--cap", type=int, default=None)
        c.set_defaults(func=fn)

    c = add("verify", help="run a verification suite")
    c.add_argument("suite")
    c.add_argument("--seeds", type=int, default=None)
    c.add_argument("--input", nargs="*", default=[])
    c.add_argument("--dump-dir", default=".")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(message)s")
    try:
        a.budget = _budget(a.budget)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    if a.threads != 1:
        log.info("--threads=%d: running sequentially", a.threads)
    try:
        return a.func(a)
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except (MatroidError, CertificateError, FieldError, RegimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
