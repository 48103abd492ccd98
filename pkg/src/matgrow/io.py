"""Line-based text formats for matroids, certificates, classes and reports.

Elements are written as indices ``0..n-1`` in the order of ``M.labels``;
reading a file gives matroids labelled by those indices.  Blank lines and
lines starting with ``#`` are ignored everywhere.

Besides ``linear`` and ``explicit`` blocks there are two compact block
types, needed when a lifted geometry is too large to list bases for::

    type extension          type minor
    extensions <m>          parent <name of an earlier block>
    <linear block>          keep <indices>
    cut <c>                 contract <indices>
    <c lines: minimal flats, as indices>
    ... (m cut sections)

The i-th cut adds element ``base.n + i``.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

from .classes import ClassSpec
from .errors import CertificateError
from .geometry import Extension, ModularCut, ProjectionCertificate, ag, pg
from .gf import FormatError, format_matrix, parse_matrix
from .matroid import (
    ExplicitMatroid,
    LinearMatroid,
    Matroid,
    MatroidError,
    Minor,
    bases_masks,
    bits,
    linear_root,
    relabel,
    uniform,
)
from .modsum import SumSpec
from .projection import DensityReport, StackWitness

EXPLICIT_WRITE_CAP = 16


def _clean(text: str) -> list[str]:
    out = []
    for ln in text.splitlines():
        s = ln.split("#", 1)[0].rstrip()
        out.append(s)
    return out


class _Lines:
    """Cursor over the lines of a file, skipping blanks, keeping line numbers."""

    def __init__(self, text: str):
        self.lines = _clean(text)
        self.pos = 0

    def skip(self):
        while self.pos < len(self.lines) and not self.lines[self.pos].strip():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.lines)

    def peek(self) -> list[str]:
        self.skip()
        if self.pos >= len(self.lines):
            return []
        return self.lines[self.pos].split()

    def take(self, keyword: str | None = None) -> list[str]:
        self.skip()
        if self.pos >= len(self.lines):
            raise FormatError(f"unexpected end of input, expected {keyword or 'more lines'!r}", self.pos + 1)
        toks = self.lines[self.pos].split()
        if keyword is not None and toks[0] != keyword:
            raise FormatError(f"expected {keyword!r}, found {toks[0]!r}", self.pos + 1, 1)
        self.pos += 1
        return toks

    def ints(self, toks: list[str], first: int = 1) -> list[int]:
        out = []
        for j, t in enumerate(toks[first:], first + 1):
            try:
                out.append(int(t))
            except ValueError:
                raise FormatError(f"expected an integer, found {t!r}", self.pos, j) from None
        return out

    def matrix(self):
        self.skip()
        try:
            q, A, nxt = parse_matrix(self.lines, self.pos)
        except IndexError:
            raise FormatError("matrix ended early", len(self.lines)) from None
        self.pos = nxt
        return q, A

    @property
    def line_no(self) -> int:
        return self.pos


# ---------------------------------------------------------------------------
# Matroid blocks


def _ints_line(key: str, xs) -> str:
    return " ".join([key, *map(str, xs)])


def _mask_indices(mask: int) -> list[int]:
    return list(bits(mask))


def _extension_chain(M: Matroid):
    cuts = []
    while isinstance(M, Extension):
        cuts.append(M.cut)
        M = M.base
    return M, cuts[::-1]


def format_matroid(M: Matroid, name: str | None = None, parents: dict | None = None) -> str:
    """One matroid block.  ``parents`` maps already-written matroids to block names."""
    name = name or M.name or "M"
    head = [f"matroid {name}"]
    if isinstance(M, LinearMatroid):
        return "\n".join(head + ["type linear", format_matrix(M.field.q, M.matrix).rstrip()]) + "\n"
    root = linear_root(M)
    if root is not None:
        L, idx = root
        return "\n".join(head + ["type linear", format_matrix(L.field.q, L.matrix[:, idx]).rstrip()]) + "\n"
    base, cuts = _extension_chain(M)
    if cuts and linear_root(base) is not None:
        lines = head + ["type extension", f"extensions {len(cuts)}"]
        lines.append(format_matroid(base, f"{name}-base").split("\n", 2)[2].rstrip())
        for cut in cuts:
            lines.append(f"cut {len(cut.minimal)}")
            lines += [" ".join(map(str, _mask_indices(F))) for F in cut.minimal]
        return "\n".join(lines) + "\n"
    if isinstance(M, Minor) and parents and id(M.parent) in parents:
        lines = head + [
            "type minor",
            f"parent {parents[id(M.parent)]}",
            _ints_line("keep", M.keep),
            _ints_line("contract", _mask_indices(M.contract)),
        ]
        return "\n".join(lines) + "\n"
    if M.n > EXPLICIT_WRITE_CAP:
        raise MatroidError(f"no compact text form for {M!r}; explicit blocks stop at {EXPLICIT_WRITE_CAP} elements")
    bases = sorted(bases_masks(M))
    lines = head + ["type explicit", f"rank {M.rank}", f"elements {M.n}", "bases"]
    lines += [" ".join(map(str, _mask_indices(B))) for B in bases]
    return "\n".join(lines) + "\n"


def _read_block(cur: _Lines, named: dict, validate: bool = True) -> tuple[str, Matroid]:
    toks = cur.take("matroid")
    name = " ".join(toks[1:]) or "M"
    kind = cur.take("type")
    if len(kind) != 2:
        raise FormatError("expected 'type <kind>'", cur.line_no, 1)
    kind = kind[1]
    if kind == "linear":
        q, A = cur.matrix()
        M: Matroid = LinearMatroid(q, A, name=name)
    elif kind == "explicit":
        r = cur.ints(cur.take("rank"))
        n = cur.ints(cur.take("elements"))
        if len(r) != 1 or len(n) != 1:
            raise FormatError("expected one integer", cur.line_no)
        r, n = r[0], n[0]
        cur.take("bases")
        bases = []
        while True:
            nxt = cur.peek()
            if not nxt or not nxt[0].isdigit():
                break
            B = cur.ints(cur.take(), first=0)
            if len(B) != r:
                raise FormatError(f"basis has {len(B)} elements, rank is {r}", cur.line_no)
            for j, x in enumerate(B):
                if not 0 <= x < n:
                    raise FormatError(f"element {x} out of range", cur.line_no, j + 1)
            bases.append(sum(1 << x for x in B))
        try:
            M = ExplicitMatroid(n, bases=bases, name=name, validate=validate)
        except MatroidError as exc:
            raise FormatError(str(exc), cur.line_no) from None
    elif kind == "extension":
        m = cur.ints(cur.take("extensions"))[0]
        q, A = cur.matrix()
        M = LinearMatroid(q, A, name=f"{name}-base")
        for _ in range(m):
            c = cur.ints(cur.take("cut"))[0]
            flats = []
            for _ in range(c):
                xs = cur.ints(cur.take(), first=0)
                for j, x in enumerate(xs):
                    if not 0 <= x < M.n:
                        raise FormatError(f"element {x} out of range", cur.line_no, j + 1)
                flats.append(sum(1 << x for x in xs))
            cut = ModularCut(M, [M.cl(F) for F in flats])
            if M.n <= 12 and ModularCut.generated(M, flats).minimal != cut.minimal:
                raise FormatError("cut flats do not form a modular cut", cur.line_no)
            M = Extension(M, cut)
        M.name = name
    elif kind == "minor":
        parent = " ".join(cur.take("parent")[1:])
        if parent not in named:
            raise FormatError(f"unknown parent block {parent!r}", cur.line_no, 2)
        P = named[parent]
        keep = cur.ints(cur.take("keep"))
        contract = cur.ints(cur.take("contract"))
        for x in keep + contract:
            if not 0 <= x < P.n:
                raise FormatError(f"element {x} out of range", cur.line_no)
        M = Minor(P, keep, sum(1 << x for x in contract), labels=range(len(keep)), name=name)
    else:
        raise FormatError(f"unknown matroid type {kind!r}", cur.line_no, 2)
    named[name] = M
    return name, M


def parse_matroid(text: str, validate: bool = True) -> Matroid:
    """One matroid block; ``validate=False`` skips the basis exchange check."""
    cur = _Lines(text)
    _, M = _read_block(cur, {}, validate)
    if not cur.at_end():
        raise FormatError("trailing content after matroid block", cur.pos + 1)
    return M


def parse_matroids(text: str) -> dict[str, Matroid]:
    cur = _Lines(text)
    named: dict = {}
    while not cur.at_end():
        _read_block(cur, named)
    return named


def read_matroid(path, validate: bool = True) -> Matroid:
    return parse_matroid(Path(path).read_text(), validate)


def write_matroid(path, M: Matroid, name: str | None = None) -> None:
    Path(path).write_text(format_matroid(M, name))


def indexed(M: Matroid) -> Matroid:
    """``M`` relabelled by positions, as it would come back from a file."""
    if M.labels == tuple(range(M.n)):
        return M
    return relabel(M, {x: i for i, x in enumerate(M.labels)})


# ---------------------------------------------------------------------------
# Certificates


def format_certificate(cert: ProjectionCertificate) -> str:
    L = cert.lifted
    pos = {x: i for i, x in enumerate(L.labels)}
    seed = "none" if cert.seed is None else str(cert.seed)
    out = [
        "certificate",
        f"q {cert.q}",
        _ints_line("K", sorted(pos[x] for x in cert.K)),
        f"seed {seed}",
        format_matroid(L, "lifted").rstrip(),
    ]
    P = cert.projected
    if P.n <= 12:
        out.append(format_matroid(P, "projected").rstrip())
    else:
        keep = [pos[x] for x in P.labels]
        out += [
            "matroid projected",
            "type minor",
            "parent lifted",
            _ints_line("keep", keep),
            _ints_line("contract", sorted(pos[x] for x in cert.K)),
        ]
    return "\n".join(out) + "\n"


def parse_certificate(text: str) -> ProjectionCertificate:
    cur = _Lines(text)
    cur.take("certificate")
    q = cur.ints(cur.take("q"))[0]
    K = cur.ints(cur.take("K"))
    st = cur.take("seed")
    seed = None if st[1:] == ["none"] else cur.ints(st)[0]
    named: dict = {}
    _, L = _read_block(cur, named)
    _, P = _read_block(cur, named)
    for x in K:
        if not 0 <= x < L.n:
            raise FormatError(f"K element {x} out of range", 3)
    km = sum(1 << x for x in K)
    G = [i for i in range(L.n) if not km >> i & 1]
    quot = Minor(L, G, km)
    if P.n != quot.n or P.rank != quot.rank:
        raise CertificateError("projection", "projected block is not lifted / K")
    if P.n <= 12 and any(P.r(X) != quot.r(X) for X in range(1 << P.n)):
        raise CertificateError("projection", "projected block is not lifted / K")
    return ProjectionCertificate(L, frozenset(K), q, quot, seed=seed).validate()


def read_certificate(path) -> ProjectionCertificate:
    return parse_certificate(Path(path).read_text())


def write_certificate(path, cert: ProjectionCertificate) -> None:
    Path(path).write_text(format_certificate(cert))


# ---------------------------------------------------------------------------
# Class specifications

_BUILTIN = re.compile(r"^(U|PG|AG)\((\d+),(\d+)\)$")


def builtin_matroid(token: str) -> Matroid | None:
    """``U(r,n)``, ``PG(n,q)`` or ``AG(n,q)`` by name, or None."""
    m = _BUILTIN.match(token)
    if m is None:
        return None
    kind, a, b = m.group(1), int(m.group(2)), int(m.group(3))
    if kind == "U":
        return uniform(a, b)
    # PG(n, q) / AG(n, q) are named by projective dimension
    return (pg if kind == "PG" else ag)(a + 1, b)


def parse_class(text: str, base_dir=".") -> ClassSpec:
    fields: list[int] = []
    excluded: list[Matroid] = []
    names: list[str] = []
    budget = None
    for ln, line in enumerate(_clean(text), 1):
        toks = line.split()
        if not toks:
            continue
        if toks[0] == "fields":
            for j, t in enumerate(toks[1:], 2):
                if not t.isdigit():
                    raise FormatError(f"bad field order {t!r}", ln, j)
                fields.append(int(t))
        elif toks[0] == "excluded":
            for j, t in enumerate(toks[1:], 2):
                N = builtin_matroid(t)
                if N is None:
                    p = Path(base_dir) / t
                    if not p.exists():
                        raise FormatError(f"no such excluded matroid {t!r}", ln, j)
                    N = read_matroid(p)
                excluded.append(N)
                names.append(t)
        elif toks[0] == "budget":
            for j, t in enumerate(toks[1:], 2):
                if not t.startswith("nodes="):
                    raise FormatError(f"expected nodes=<n>, found {t!r}", ln, j)
                try:
                    budget = int(float(t[6:]))
                except ValueError:
                    raise FormatError(f"bad budget {t!r}", ln, j) from None
        else:
            raise FormatError(f"unknown keyword {toks[0]!r}", ln, 1)
    kw = {} if budget is None else {"budget": budget}
    return ClassSpec(fields=fields, excluded=excluded, names=tuple(names), **kw)


def read_class(path) -> ClassSpec:
    return parse_class(Path(path).read_text(), os.path.dirname(os.fspath(path)))


def format_class(spec: ClassSpec) -> str:
    out = []
    if spec.fields:
        out.append(_ints_line("fields", spec.fields))
    if spec.excluded:
        if len(spec.names) != len(spec.excluded):
            raise MatroidError("excluded matroids need names to be written")
        out.append(" ".join(["excluded", *spec.names]))
    out.append(f"budget nodes={spec.budget}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Modular sum specifications


def parse_sum(text: str) -> SumSpec:
    """Two matroid blocks then ``shared i:j ...`` pairing left with right indices."""
    cur = _Lines(text)
    named: dict = {}
    _, left = _read_block(cur, named)
    _, right = _read_block(cur, named)
    toks = cur.take("shared")
    pairs = {}
    for j, t in enumerate(toks[1:], 2):
        a, _, b = t.partition(":")
        if not (a.isdigit() and b.isdigit()):
            raise FormatError(f"expected i:j, found {t!r}", cur.line_no, j)
        a, b = int(a), int(b)
        if not (0 <= a < left.n and 0 <= b < right.n):
            raise FormatError(f"shared pair {t} out of range", cur.line_no, j)
        pairs[b] = a
    fresh = iter(range(left.n, left.n + right.n))
    names = {y: pairs[y] if y in pairs else next(fresh) for y in range(right.n)}
    return SumSpec(left, relabel(right, names, name=right.name))


def format_sum(spec: SumSpec) -> str:
    left, right = spec.left, spec.right
    lpos = {x: i for i, x in enumerate(left.labels)}
    shared = [f"{lpos[x]}:{j}" for j, x in enumerate(right.labels) if x in lpos]
    return format_matroid(left, "left") + format_matroid(right, "right") + " ".join(["shared", *shared]) + "\n"


# ---------------------------------------------------------------------------
# Reports


def _flag(b: bool) -> str:
    return "true" if b else "false"


def format_density(rep: DensityReport) -> str:
    return (
        f"density\nq {rep.q}\nk {rep.k}\nrank {rep.rank}\neps {rep.eps}\n"
        f"d {rep.d}\nqd {rep.d_raw}\nbound {rep.bound}\n"
        f"in_bound {_flag(rep.in_bound)}\nfloor_ok {_flag(rep.floor_ok)}\n"
    )


def parse_density(text: str) -> DensityReport:
    vals = {}
    for ln, line in enumerate(_clean(text), 1):
        toks = line.split()
        if not toks or toks == ["density"]:
            continue
        if len(toks) != 2:
            raise FormatError("expected '<key> <value>'", ln)
        vals[toks[0]] = toks[1]
    try:
        return DensityReport(
            k=int(vals["k"]),
            d=int(vals["d"]),
            d_raw=int(vals["qd"]),
            in_bound=vals["in_bound"] == "true",
            floor_ok=vals["floor_ok"] == "true",
            eps=int(vals["eps"]),
            rank=int(vals["rank"]),
            q=int(vals["q"]),
        )
    except KeyError as exc:
        raise FormatError(f"missing key {exc.args[0]!r}") from None


def format_stack(M: Matroid, w: StackWitness | None) -> str:
    if w is None:
        return "stack none\n"
    pos = {x: i for i, x in enumerate(M.labels)}
    out = [f"stack q {w.q} k {w.k} t {w.t}"]
    out += [_ints_line("layer", sorted(pos[x] for x in layer)) for layer in w.layers]
    return "\n".join(out) + "\n"


def parse_stack(text: str, M: Matroid) -> StackWitness | None:
    cur = _Lines(text)
    head = cur.take("stack")
    if head[1:] == ["none"]:
        return None
    if len(head) != 7 or head[1::2] != ["q", "k", "t"]:
        raise FormatError("expected 'stack q <q> k <k> t <t>'", cur.line_no, 1)
    q, k, t = (int(x) for x in head[2::2])
    layers = []
    for _ in range(k):
        xs = cur.ints(cur.take("layer"))
        layers.append(frozenset(M.labels[x] for x in xs))
    return StackWitness(tuple(layers), q, t)
