"""Arithmetic in small finite fields GF(q) and rank computations over them.

Elements of GF(p^e) are encoded as integers ``0 <= a < q`` whose base-p
digits are the polynomial coefficients (least significant digit is the
constant term).  Multiplication is reduced modulo a fixed irreducible
polynomial so that tables, and hence every representation built on top of
them, are reproducible.
"""

from __future__ import annotations

import itertools
from array import array
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

SUPPORTED_ORDERS = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)

# Coefficients of the monic irreducible polynomial, constant term first,
# leading coefficient omitted.  x^2+x+1, x^3+x+1, x^2+1, x^4+x+1.
_MODULI = {
    4: (1, 1),
    8: (1, 1, 0),
    9: (1, 0),
    16: (1, 1, 0, 0),
}


class FieldError(ValueError):
    pass


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    e, rest = 0, q
    while rest % p == 0:
        rest //= p
        e += 1
    if rest != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, e


@dataclass(frozen=True)
class FieldSpec:
    q: int
    p: int
    e: int
    add: tuple[tuple[int, ...], ...] = field(repr=False)
    mul: tuple[tuple[int, ...], ...] = field(repr=False)
    neg: tuple[int, ...] = field(repr=False)
    inv: tuple[int, ...] = field(repr=False)  # inv[0] is unused (0)

    def sub(self, a: int, b: int) -> int:
        return self.add[a][self.neg[b]]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.q)
        return self.mul[a][self.inv[b]]

    @property
    def elements(self) -> range:
        return range(self.q)

    def subfield_elements(self, order: int) -> frozenset[int]:
        """Elements of the unique subfield of the given order."""
        p, f = _factor_prime_power(order)
        if p != self.p or self.e % f:
            raise FieldError(f"GF({order}) is not a subfield of GF({self.q})")
        # fixed points of the Frobenius power x -> x^order
        out = set()
        for a in range(self.q):
            b = 1
            for _ in range(order):
                b = self.mul[b][a]
            if b == a:
                out.add(a)
        return frozenset(out)


def _poly_tables(p: int, e: int, modulus: Sequence[int]):
    q = p**e

    def digits(a):
        return [(a // p**i) % p for i in range(e)]

    def undigits(ds):
        return sum(d * p**i for i, d in enumerate(ds))

    add = [[undigits([(x + y) % p for x, y in zip(digits(a), digits(b))]) for b in range(q)] for a in range(q)]
    mul = [[0] * q for _ in range(q)]
    for a in range(q):
        da = digits(a)
        for b in range(q):
            db = digits(b)
            prod = [0] * (2 * e - 1)
            for i, x in enumerate(da):
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
            # reduce: x^e = -(modulus)
            for deg in range(2 * e - 2, e - 1, -1):
                c = prod[deg]
                if c:
                    prod[deg] = 0
                    for i, m in enumerate(modulus):
                        prod[deg - e + i] = (prod[deg - e + i] - c * m) % p
            mul[a][b] = undigits(prod[:e])
    return add, mul


@lru_cache(maxsize=None)
def field_make(q: int) -> FieldSpec:
    """Build GF(q) for a supported order ``q``."""
    p, e = _factor_prime_power(q)
    if q not in SUPPORTED_ORDERS:
        raise FieldError(f"unsupported field order {q}; supported: {SUPPORTED_ORDERS}")
    if e == 1:
        add = [[(a + b) % p for b in range(q)] for a in range(q)]
        mul = [[(a * b) % p for b in range(q)] for a in range(q)]
    else:
        add, mul = _poly_tables(p, e, _MODULI[q])
    neg = [next(b for b in range(q) if add[a][b] == 0) for a in range(q)]
    inv = [0] + [next(b for b in range(1, q) if mul[a][b] == 1) for a in range(1, q)]
    return FieldSpec(
        q=q, p=p, e=e,
        add=tuple(map(tuple, add)),
        mul=tuple(map(tuple, mul)),
        neg=tuple(neg),
        inv=tuple(inv),
    )


def check_field_axioms(F: FieldSpec) -> None:
    """Exhaustively verify the field axioms; raises AssertionError on failure."""
    q, add, mul = F.q, F.add, F.mul
    for a in range(q):
        assert add[a][0] == a and mul[a][1] == a and mul[a][0] == 0
        assert add[a][F.neg[a]] == 0
        if a:
            assert mul[a][F.inv[a]] == 1
        for b in range(q):
            assert add[a][b] == add[b][a] and mul[a][b] == mul[b][a]
            for c in range(q):
                assert add[add[a][b]][c] == add[a][add[b][c]]
                assert mul[mul[a][b]][c] == mul[a][mul[b][c]]
                assert mul[a][add[b][c]] == add[mul[a][b]][mul[a][c]]


# ---------------------------------------------------------------------------
# Row reduction


def rref(F: FieldSpec, A) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form of ``A`` over ``F``; returns (rows, pivot columns)."""
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return [], []
    rows = [list(map(int, r)) for r in A]
    add, mul, neg, inv = F.add, F.mul, F.neg, F.inv
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        piv = next((i for i in range(top, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[top], rows[piv] = rows[piv], rows[top]
        s = inv[rows[top][col]]
        rows[top] = [mul[s][x] for x in rows[top]]
        for i in range(len(rows)):
            c = rows[i][col]
            if i != top and c:
                nc = neg[c]
                rows[i] = [add[x][mul[nc][y]] for x, y in zip(rows[i], rows[top])]
        pivots.append(col)
        top += 1
        if top == len(rows):
            break
    return rows[:top], pivots


def mat_rank(F: FieldSpec, A) -> int:
    """Rank of the matrix ``A`` (rows x cols, entries are element indices)."""
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return 0
    if A.min() < 0 or A.max() >= F.q:
        raise FieldError(f"matrix entry out of range for GF({F.q})")
    return len(rref(F, A)[1])


@lru_cache(maxsize=None)
def _axpy(q: int) -> tuple:
    """Table t[c][x][y] = x - c*y, the row operation of elimination."""
    F = field_make(q)
    return tuple(
        tuple(tuple(F.add[x][F.mul[F.neg[c]][y]] for y in range(q)) for x in range(q)) for c in range(q)
    )


def vectors_rank(F: FieldSpec, vecs: Iterable[Sequence[int]], dim: int | None = None) -> int:
    """Rank of a collection of vectors; stops early once ``dim`` is reached."""
    axpy, mul, inv = _axpy(F.q), F.mul, F.inv
    basis: list[tuple[int, list[int]]] = []
    for v in vecs:
        for piv, row in basis:
            c = v[piv]
            if c:
                t = axpy[c]
                v = [t[x][y] for x, y in zip(v, row)]
        for lead, x in enumerate(v):
            if x:
                break
        else:
            continue
        s = mul[inv[x]]
        basis.append((lead, [s[y] for y in v]))
        if dim is not None and len(basis) == dim:
            break
    return len(basis)


PACKED_LIMIT = 1 << 21


class PackedElimination:
    """Row reduction on GF(q)^dim vectors encoded as base-q integers.

    Whole-vector tables replace the coordinate loops: ``sub[v * size + w]`` is
    v - w, ``scale[c * size + w]`` is c*w, ``lead[v]`` the lowest nonzero
    coordinate and ``unit[v]`` the multiple of v whose lead coordinate is 1.
    """

    def __init__(self, F: FieldSpec, dim: int):
        q = F.q
        self.q, self.dim = q, dim
        self.size = size = q**dim
        powers = q ** np.arange(dim, dtype=np.int64)
        digits = (np.arange(size, dtype=np.int64)[:, None] // powers) % q
        add, mul = np.array(F.add), np.array(F.mul)
        neg, inv = np.array(F.neg), np.array(F.inv)
        diff = add[digits[:, None, :], neg[digits[None, :, :]]]
        self.sub = array("H", (diff @ powers).ravel().tolist())
        scaled = mul[np.arange(q)[:, None, None], digits[None, :, :]]
        self.scale = array("H", (scaled @ powers).ravel().tolist())
        nonzero = digits != 0
        lead = np.where(nonzero.any(axis=1), nonzero.argmax(axis=1), -1)
        self.lead = array("b", lead.tolist())
        lead_digit = digits[np.arange(size), np.maximum(lead, 0)]
        unit = mul[inv[lead_digit][:, None], digits] @ powers
        self.unit = array("H", np.where(lead >= 0, unit, 0).tolist())
        self.powers = powers.tolist()

    def encode(self, v: Sequence[int]) -> int:
        code = 0
        for x in reversed(v):
            code = code * self.q + int(x)
        return code

    def rank(self, codes: Sequence[int], mask: int, dim: int | None = None) -> int:
        """Rank of the vectors ``codes[i]`` for the set bits i of ``mask``."""
        q, size, sub, scale, lead, unit, powers = self.q, self.size, self.sub, self.scale, self.lead, self.unit, self.powers
        basis: list[tuple[int, int]] = []
        while mask:
            low = mask & -mask
            mask ^= low
            v = codes[low.bit_length() - 1]
            for piv, row in basis:
                c = v // powers[piv] % q
                if c:
                    v = sub[v * size + scale[c * size + row]]
            if v:
                basis.append((lead[v], unit[v]))
                if len(basis) == dim:
                    break
        return len(basis)


@lru_cache(maxsize=None)
def packed_elimination(q: int, dim: int) -> PackedElimination | None:
    """Shared tables for (q, dim), or None when they would be too large."""
    if q == 2 or dim == 0 or q ** (2 * dim) > PACKED_LIMIT:
        return None
    return PackedElimination(field_make(q), dim)


def xor_rank(vecs: Iterable[int], dim: int | None = None) -> int:
    """Rank over GF(2) of vectors encoded as integer bit patterns."""
    basis: list[int] = []
    for v in vecs:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
            if dim is not None and len(basis) == dim:
                break
    return len(basis)


# ---------------------------------------------------------------------------
# Projective points and subspaces


def normalize(F: FieldSpec, v: Sequence[int]) -> tuple[int, ...]:
    """Scale ``v`` so its first nonzero coordinate is 1."""
    lead = next((x for x in v if x), 0)
    if lead == 0:
        raise FieldError("cannot normalize the zero vector")
    s = F.mul[F.inv[lead]]
    return tuple(s[x] for x in v)


@lru_cache(maxsize=None)
def _projective_points(q: int, n: int) -> tuple[tuple[int, ...], ...]:
    pts = []
    for v in itertools.product(range(q), repeat=n):
        lead = next((x for x in v if x), 0)
        if lead == 1:
            pts.append(v)
    return tuple(pts)


def projective_points(F: FieldSpec, n: int) -> list[tuple[int, ...]]:
    """One normalized representative per 1-dimensional subspace of GF(q)^n.

    Lexicographic order, so the points of the subspace with the first ``j``
    coordinates zero form an initial segment.
    """
    if n < 1:
        raise FieldError("dimension must be at least 1")
    return list(_projective_points(F.q, n))


def span_points(F: FieldSpec, basis: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """All normalized nonzero vectors in the span of ``basis``."""
    rows, _ = rref(F, basis) if len(basis) else ([], [])
    out = set()
    dim = len(rows[0]) if rows else 0
    for coeffs in itertools.product(range(F.q), repeat=len(rows)):
        v = [0] * dim
        for c, row in zip(coeffs, rows):
            if c:
                v = [F.add[x][F.mul[c][y]] for x, y in zip(v, row)]
        if any(v):
            out.add(normalize(F, v))
    return sorted(out)


def subspaces(F: FieldSpec, n: int, dim: int):
    """Yield a basis (RREF rows) of every ``dim``-dimensional subspace of GF(q)^n."""
    if dim == 0:
        yield []
        return
    for pivots in itertools.combinations(range(n), dim):
        free = [(i, j) for i, pc in enumerate(pivots) for j in range(pc + 1, n) if j not in pivots]
        for vals in itertools.product(range(F.q), repeat=len(free)):
            rows = [[0] * n for _ in range(dim)]
            for i, pc in enumerate(pivots):
                rows[i][pc] = 1
            for (i, j), x in zip(free, vals):
                rows[i][j] = x
            yield [tuple(r) for r in rows]


# ---------------------------------------------------------------------------
# Matrix text format


def format_matrix(q: int, A) -> str:
    A = np.asarray(A, dtype=np.int64)
    r, c = A.shape
    lines = [f"q {q} rows {r} cols {c}"]
    lines += [" ".join(str(int(x)) for x in row) for row in A]
    return "\n".join(lines) + "\n"


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        where = f" (line {line}" + (f", column {col}" if col is not None else "") + ")" if line is not None else ""
        super().__init__(msg + where)
        self.line, self.col = line, col


def parse_matrix(lines: Sequence[str], start: int = 0) -> tuple[int, np.ndarray, int]:
    """Parse a matrix block beginning at ``lines[start]``.

    Returns ``(q, matrix, next_line_index)``.
    """
    header = lines[start].split()
    if len(header) != 6 or header[0] != "q" or header[2] != "rows" or header[4] != "cols":
        raise FormatError("expected 'q <order> rows <r> cols <c>'", start + 1, 1)
    try:
        q, r, c = int(header[1]), int(header[3]), int(header[5])
    except ValueError:
        raise FormatError("non-integer in matrix header", start + 1) from None
    A = np.zeros((r, c), dtype=np.int64)
    for i in range(r):
        ln = start + 1 + i
        if ln >= len(lines):
            raise FormatError("matrix ended early", ln + 1)
        toks = lines[ln].split()
        if len(toks) != c:
            raise FormatError(f"expected {c} entries, found {len(toks)}", ln + 1)
        for j, t in enumerate(toks):
            try:
                x = int(t)
            except ValueError:
                raise FormatError(f"bad entry {t!r}", ln + 1, j + 1) from None
            if not 0 <= x < q:
                raise FormatError(f"entry {x} out of range for GF({q})", ln + 1, j + 1)
            A[i, j] = x
    return q, A, start + 1 + r
