"""Minor tests, GF(q)-representability and membership in minor-closed classes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, RegimeError
from .gf import field_make, vectors_rank, FieldError
from .matroid import (
    EXPLICIT_CAP,
    Matroid,
    MatroidError,
    Minor,
    _parallel_classes,
    bits,
    flats_masks,
    find_embedding,
    invariants,
    isomorphism_masks,
    is_simple,
    linear_root,
    simplify,
    uniform,
)

SUPPORTED_ORDERS = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)
DEFAULT_BUDGET = 10**6


# ---------------------------------------------------------------------------
# Minors


@dataclass(frozen=True)
class MinorWitness:
    contract: frozenset
    delete: frozenset
    mapping: dict  # element of the pattern -> element of the host


def _greedy_basis(M: Matroid, mask: int) -> int:
    B, rb = 0, 0
    for e in bits(mask):
        if M.r(B | (1 << e)) > rb:
            B |= 1 << e
            rb += 1
    return B


def _embedding_order(N: Matroid) -> list[int]:
    B = _greedy_basis(N, N.full)
    return list(bits(B)) + [x for x in range(N.n) if not B >> x & 1]


def _candidates(N: Matroid, T: Matroid) -> list[list[int]] | None:
    def sizes(M):
        loops, classes = _parallel_classes(M)
        out = {e: 0 for e in loops}
        for c in classes:
            for e in c:
                out[e] = len(c)
        return out, len(classes), len(loops)

    sn, en, ln = sizes(N)
    st, et, lt = sizes(T)
    if et < en or lt < ln:
        return None
    cands = []
    for x in range(N.n):
        if sn[x] == 0:
            cands.append([y for y in range(T.n) if st[y] == 0])
        else:
            cands.append([y for y in range(T.n) if st[y] >= sn[x]])
    return cands


def has_minor(M: Matroid, N: Matroid, budget: int | None = None) -> MinorWitness | None:
    """Find C, D with M / C \\ D isomorphic to N, or return None.

    Only independent C need to be tried, and contracting C depends on its
    closure alone, so the search runs over flats of rank r(M) - r(N) and then
    embeds N as a restriction of the contraction.  Contractions isomorphic to
    one that already failed are skipped.
    """
    if N.n > M.n or N.rank > M.rank:
        return None
    counter = None if budget is None else [budget]
    failed: dict[tuple, list[Matroid]] = {}
    order = _embedding_order(N)
    for F in flats_masks(M, M.rank - N.rank):
        C = _greedy_basis(M, F)
        T = Minor(M, [i for i in range(M.n) if not C >> i & 1], C)
        cands = _candidates(N, T)
        if cands is None:
            continue
        key = invariants(T) if T.n <= EXPLICIT_CAP else None
        if key is not None and any(
            isomorphism_masks(T, S, check_invariants=False) is not None for S in failed.get(key, ())
        ):
            continue
        phi = find_embedding(N, T, cands, order, counter)
        if phi is not None:
            image = {T.keep[y] for y in phi.values()}
            return MinorWitness(
                contract=M.elems(C),
                delete=frozenset(M.labels[i] for i in T.keep if i not in image),
                mapping={N.labels[x]: M.labels[T.keep[y]] for x, y in phi.items()},
            )
        if key is not None:
            failed.setdefault(key, []).append(T)
    return None


# ---------------------------------------------------------------------------
# Representability


def _is_subfield(small: int, big: int) -> bool:
    a, b = field_make(small), field_make(big)
    return a.p == b.p and b.e % a.e == 0


def _fundamental_support(M: Matroid, B: list[int], e: int) -> list[int]:
    Bm = sum(1 << b for b in B)
    r = M.r(Bm)
    return [i for i, b in enumerate(B) if M.r((Bm & ~(1 << b)) | (1 << e)) == r]


def find_representation(M: Matroid, q: int, limit: int = 12) -> np.ndarray | None:
    """A GF(q) matrix whose column matroid is ``si(M)``, or None.

    Columns follow the order of ``simplify(M)``'s representatives.  A basis
    is fixed to the identity and every other column is normalized, so each
    candidate column has exactly the support of its fundamental circuit.
    """
    F = field_make(q)
    S, _ = simplify(M)
    r = S.rank
    if r == 0:
        return np.zeros((0, S.n), dtype=np.int64)
    if S.n > (q**r - 1) // (q - 1):
        return None
    if S.n > limit:
        raise RegimeError(f"representability search is limited to {limit} points, got {S.n}")
    B = list(bits(_greedy_basis(S, S.full)))
    rest = [e for e in range(S.n) if e not in B]
    supports = {e: _fundamental_support(S, B, e) for e in rest}
    rest.sort(key=lambda e: (len(supports[e]), e))
    vec = {b: tuple(1 if j == i else 0 for j in range(r)) for i, b in enumerate(B)}
    # independent sets among placed elements of size <= r-1, grown as we go
    indep: list[int] = [0]
    for size in range(1, r):
        for combo in itertools.combinations(B, size):
            indep.append(sum(1 << b for b in combo))
    nonzero = list(range(1, q))

    def options(e):
        sup = supports[e]
        for vals in itertools.product(nonzero, repeat=len(sup) - 1):
            v = [0] * r
            v[sup[0]] = 1
            for i, x in zip(sup[1:], vals):
                v[i] = x
            yield tuple(v)

    def consistent(e, v, sets):
        be = 1 << e
        for X in sets:
            want = S.r(X | be) - S.r(X)
            got = vectors_rank(F, [vec[x] for x in bits(X)] + [v]) - bin(X).count("1")
            if want != got:
                return False
        return True

    def place(pos) -> bool:
        if pos == len(rest):
            return True
        e = rest[pos]
        for v in options(e):
            if not consistent(e, v, indep):
                continue
            vec[e] = v
            be = 1 << e
            added = [X | be for X in indep if bin(X).count("1") < r - 1 and S.r(X | be) == S.r(X) + 1]
            indep.extend(added)
            if place(pos + 1):
                return True
            del indep[len(indep) - len(added):]
            del vec[e]
        return False

    if not place(0):
        return None
    return np.array([vec[e] for e in range(S.n)], dtype=np.int64).T


def is_representable(M: Matroid, q: int, limit: int = 12) -> bool:
    """Whether ``M`` has a representation over GF(q)."""
    if q not in SUPPORTED_ORDERS:
        raise FieldError(f"unsupported field order {q}")
    root = linear_root(M)
    if root is not None and _is_subfield(root[0].field.q, q):
        return True
    return find_representation(M, q, limit) is not None


# ---------------------------------------------------------------------------
# Classes


@dataclass
class ClassSpec:
    """Matroids representable over every field in ``fields`` with no minor in ``excluded``."""

    fields: tuple = ()
    excluded: tuple = ()
    budget: int = DEFAULT_BUDGET
    names: tuple = ()
    rep_limit: int = 12

    def __post_init__(self):
        self.fields = tuple(self.fields)
        self.excluded = tuple(self.excluded)
        if not self.fields and not self.excluded:
            raise MatroidError("a class needs at least one field or excluded minor")
        for q in self.fields:
            if q not in SUPPORTED_ORDERS:
                raise FieldError(f"unsupported field order {q}")
        for N in self.excluded:
            if not is_simple(N):
                raise MatroidError(f"excluded matroid {N.name or N!r} is not simple")

    def __contains__(self, M: Matroid) -> bool:
        return class_membership(self, M)


@dataclass(frozen=True)
class ClassParams:
    ell: int
    s: int
    q: int
    trunc_excluded: int


def class_membership(spec: ClassSpec, M: Matroid) -> bool:
    for q in spec.fields:
        if not is_representable(M, q, spec.rep_limit):
            return False
    for N in spec.excluded:
        if has_minor(M, N, spec.budget) is not None:
            return False
    return True


def class_params(spec: ClassSpec, max_line: int = 40) -> ClassParams:
    """The line length, excluded rank, base field and excluded truncation of a class."""
    ell = None
    for j in range(3, max_line + 1):
        if not class_membership(spec, uniform(2, j)):
            ell = j - 2
            break
    if ell is None:
        raise BudgetExceeded(f"class contains every line up to U(2,{max_line})")
    s = max((N.rank for N in spec.excluded), default=0)
    chars = {field_make(q).p for q in spec.fields}
    if len(chars) > 1:
        raise MatroidError(f"fields {list(spec.fields)} share no common subfield")
    base = None
    for q in sorted(SUPPORTED_ORDERS, reverse=True):
        if q > ell:
            continue
        if not all(_is_subfield(q, Q) for Q in spec.fields):
            continue
        if any(is_representable(N, q, spec.rep_limit) for N in spec.excluded):
            continue
        base = q
        break
    if base is None:
        raise MatroidError("no base field: every candidate GF(q) represents an excluded matroid")
    t = min(spec.fields) if spec.fields else s
    return ClassParams(ell=ell, s=s, q=base, trunc_excluded=t)
