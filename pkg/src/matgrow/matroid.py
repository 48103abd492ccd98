"""Matroids as memoized rank oracles over bitmask subsets.

Elements are addressed by *labels* in the public functions (any hashable;
``0..n-1`` by default) and by bit positions internally.  Minors, restrictions
and relabelings keep the labels of surviving elements, which is what makes
gluing along shared elements (modular sums) and comparing restrictions
straightforward.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np

from .gf import FieldSpec, field_make, normalize, packed_elimination, vectors_rank, xor_rank

Label = Hashable

EXPLICIT_CAP = 24
_EXCHANGE_CHECK_CAP = 12


class MatroidError(ValueError):
    pass


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class Matroid:
    """Base class: a ground set of ``n`` labelled elements and a rank oracle."""

    kind = "oracle"

    def __init__(self, n: int, labels: Sequence[Label] | None = None, name: str | None = None):
        self.n = n
        self.labels = tuple(range(n)) if labels is None else tuple(labels)
        if len(self.labels) != n:
            raise MatroidError("label count does not match ground set size")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != n:
            raise MatroidError("duplicate element labels")
        self.full = (1 << n) - 1
        self.name = name
        self._rcache: dict[int, int] = {}
        self._lattice: list[list[int]] | None = None

    # -- oracle -------------------------------------------------------------

    def _rank(self, mask: int) -> int:
        raise NotImplementedError

    def r(self, mask: int) -> int:
        try:
            return self._rcache[mask]
        except KeyError:
            v = self._rcache[mask] = self._rank(mask)
            return v

    @property
    def rank(self) -> int:
        return self.r(self.full)

    def cl(self, mask: int) -> int:
        rx = self.r(mask)
        out = mask
        for e in range(self.n):
            b = 1 << e
            if not mask & b and self.r(mask | b) == rx:
                out |= b
        return out

    # -- labels -------------------------------------------------------------

    def mask(self, X: Iterable[Label]) -> int:
        m = 0
        for x in X:
            try:
                m |= 1 << self._index[x]
            except KeyError:
                raise MatroidError(f"element {x!r} is not in the ground set") from None
        return m

    def elems(self, mask: int) -> frozenset:
        return frozenset(self.labels[i] for i in bits(mask))

    @property
    def ground(self) -> frozenset:
        return frozenset(self.labels)

    def index(self, label: Label) -> int:
        return self._index[label]

    def __repr__(self) -> str:
        nm = f" {self.name!r}" if self.name else ""
        return f"<{type(self).__name__}{nm} n={self.n} rank={self.rank}>"


class OracleMatroid(Matroid):
    def __init__(self, n, rank_fn: Callable[[int], int], labels=None, name=None):
        super().__init__(n, labels, name)
        self._fn = rank_fn

    def _rank(self, mask):
        return self._fn(mask)


class LinearMatroid(Matroid):
    """Column matroid of a matrix over GF(q)."""

    kind = "linear"

    def __init__(self, field: FieldSpec | int, matrix, labels=None, name=None):
        F = field_make(field) if isinstance(field, int) else field
        A = np.asarray(matrix, dtype=np.int64)
        if A.ndim != 2:
            raise MatroidError("matrix must be two-dimensional")
        if A.size and (A.min() < 0 or A.max() >= F.q):
            raise MatroidError(f"matrix entry out of range for GF({F.q})")
        super().__init__(A.shape[1], labels, name)
        self.field = F
        self.matrix = A
        self.dim = A.shape[0]
        self.columns = [tuple(int(x) for x in A[:, j]) for j in range(A.shape[1])]
        if F.q == 2:
            self._bitcols = [sum(1 << i for i, x in enumerate(c) if x) for c in self.columns]
        self._packed = packed_elimination(F.q, self.dim)
        if self._packed is not None:
            self._codes = [self._packed.encode(c) for c in self.columns]

    def _rank(self, mask):
        if self.field.q == 2:
            bc = self._bitcols
            return xor_rank((bc[i] for i in bits(mask)), self.dim)
        if self._packed is not None:
            return self._packed.rank(self._codes, mask, self.dim)
        cols = self.columns
        return vectors_rank(self.field, (cols[i] for i in bits(mask)), self.dim)


class ExplicitMatroid(Matroid):
    """Matroid given by a full rank table or by its family of bases."""

    kind = "explicit"

    def __init__(self, n, table=None, bases=None, labels=None, name=None, validate=True):
        if n > EXPLICIT_CAP:
            raise MatroidError(f"explicit matroids are capped at {EXPLICIT_CAP} elements")
        super().__init__(n, labels, name)
        if (table is None) == (bases is None):
            raise MatroidError("give exactly one of table or bases")
        self._table = None
        self._bases = None
        if table is not None:
            t = np.asarray(table, dtype=np.int8)
            if t.shape != (1 << n,):
                raise MatroidError("rank table must have 2^n entries")
            self._table = t
        else:
            bl = sorted({b if isinstance(b, int) else self.mask(b) for b in bases})
            if not bl:
                raise MatroidError("a matroid has at least one basis")
            sizes = {popcount(b) for b in bl}
            if len(sizes) != 1:
                raise MatroidError("bases have different sizes")
            self._bases = bl
            if validate and n <= _EXCHANGE_CHECK_CAP:
                bad = basis_exchange_violation(bl)
                if bad is not None:
                    B1, B2, x = bad
                    raise MatroidError(
                        "basis exchange fails: "
                        f"{sorted(self.elems(B1))} - {self.labels[x]!r} has no replacement from {sorted(self.elems(B2))}"
                    )

    def _rank(self, mask):
        if self._table is not None:
            return int(self._table[mask])
        return max(popcount(mask & b) for b in self._bases)

    @property
    def bases_masks(self) -> list[int]:
        if self._bases is not None:
            return list(self._bases)
        return list(bases_masks(self))


def basis_exchange_violation(bases: Sequence[int]):
    bset = set(bases)
    for B1 in bases:
        for B2 in bases:
            for x in bits(B1 & ~B2):
                if not any((B1 & ~(1 << x)) | (1 << y) in bset for y in bits(B2 & ~B1)):
                    return B1, B2, x
    return None


class Minor(Matroid):
    """``parent / C`` restricted to the elements listed in ``keep``."""

    def __init__(self, parent: Matroid, keep: Sequence[int], contract: int = 0, labels=None, name=None):
        keep = list(keep)
        if labels is None:
            labels = [parent.labels[i] for i in keep]
        super().__init__(len(keep), labels, name)
        self.parent = parent
        self.keep = keep
        self.contract = contract
        self._pbit = [1 << i for i in keep]
        self._rc = parent.r(contract)

    def to_parent(self, mask: int) -> int:
        pb = self._pbit
        out = 0
        for i in bits(mask):
            out |= pb[i]
        return out

    def _rank(self, mask):
        return self.parent.r(self.to_parent(mask) | self.contract) - self._rc


def linear_root(M: Matroid) -> tuple[LinearMatroid, list[int]] | None:
    """The linear matroid ``M`` is a deletion of, with the index of each element in it."""
    idx = list(range(M.n))
    while isinstance(M, Minor) and M.contract == 0:
        idx = [M.keep[i] for i in idx]
        M = M.parent
    if isinstance(M, LinearMatroid):
        return M, idx
    return None


def materialize(M: Matroid, name: str | None = None) -> ExplicitMatroid:
    """Copy ``M`` into a full rank table (cuts oracle chains short)."""
    if M.n > 20:
        raise MatroidError("materialize is limited to 20 elements")
    table = np.zeros(1 << M.n, dtype=np.int8)
    for X in range(1, 1 << M.n):
        table[X] = M.r(X)
    return ExplicitMatroid(M.n, table=table, labels=M.labels, name=name or M.name)


def relabel(M: Matroid, mapping: dict | Callable[[Label], Label], name=None) -> Matroid:
    f = mapping.get if isinstance(mapping, dict) else mapping
    labels = [f(x) if f(x) is not None else x for x in M.labels]
    return Minor(M, range(M.n), 0, labels=labels, name=name or M.name)


# ---------------------------------------------------------------------------
# Standard constructors


def uniform(r: int, n: int, labels=None) -> Matroid:
    if not 0 <= r <= n:
        raise MatroidError("need 0 <= r <= n")
    return OracleMatroid(n, lambda m: min(popcount(m), r), labels, name=f"U{r},{n}")


def direct_sum(*ms: Matroid) -> Matroid:
    offs = list(itertools.accumulate([0] + [m.n for m in ms]))
    n = offs[-1]
    labels = [(j, lab) for j, m in enumerate(ms) for lab in m.labels]

    def rk(mask):
        return sum(m.r((mask >> offs[j]) & m.full) for j, m in enumerate(ms))

    return OracleMatroid(n, rk, labels, name="(+)".join(m.name or "?" for m in ms))


# ---------------------------------------------------------------------------
# Core predicates (label-level API)


def rank(M: Matroid, X: Iterable[Label]) -> int:
    return M.r(M.mask(X))


def closure(M: Matroid, X: Iterable[Label]) -> frozenset:
    return M.elems(M.cl(M.mask(X)))


def minorize(M: Matroid, C: Iterable[Label] = (), D: Iterable[Label] = ()) -> Matroid:
    """``M / C \\ D`` on ``E(M) - C - D``."""
    cm, dm = M.mask(C), M.mask(D)
    if cm & dm:
        raise MatroidError(f"contract and delete sets overlap: {sorted(M.elems(cm & dm), key=repr)}")
    keep = [i for i in range(M.n) if not (cm | dm) >> i & 1]
    if not cm and not dm:
        return M
    return Minor(M, keep, cm)


def restrict(M: Matroid, X: Iterable[Label]) -> Matroid:
    xm = M.mask(X)
    return Minor(M, list(bits(xm)), 0)


def restrict_mask(M: Matroid, mask: int, contract: int = 0) -> Minor:
    return Minor(M, list(bits(mask & ~contract)), contract)


@dataclass(frozen=True)
class SimplificationMap:
    kept: tuple  # representative labels, one per parallel class
    loops: frozenset
    classes: tuple  # tuple of frozensets of labels, aligned with ``kept``

    def rep_of(self) -> dict:
        return {x: rep for rep, cls in zip(self.kept, self.classes) for x in cls}


def _parallel_classes(M: Matroid) -> tuple[list[int], list[list[int]]]:
    if isinstance(M, LinearMatroid):
        return _linear_parallel_classes(M)
    loops, reps, classes = [], [], []
    r = M.r
    for e in range(M.n):
        b = 1 << e
        if r(b) == 0:
            loops.append(e)
            continue
        for j, rep in enumerate(reps):
            if r(b | (1 << rep)) == 1:
                classes[j].append(e)
                break
        else:
            reps.append(e)
            classes.append([e])
    return loops, classes


def _linear_parallel_classes(M: LinearMatroid) -> tuple[list[int], list[list[int]]]:
    # parallel columns are nonzero scalar multiples of each other
    loops, groups = [], {}
    for e, col in enumerate(M.columns):
        if any(col):
            groups.setdefault(normalize(M.field, col), []).append(e)
        else:
            loops.append(e)
    return loops, sorted(groups.values())


def simplify(M: Matroid) -> tuple[Matroid, SimplificationMap]:
    loops, classes = _parallel_classes(M)
    reps = [c[0] for c in classes]
    smap = SimplificationMap(
        kept=tuple(M.labels[i] for i in reps),
        loops=frozenset(M.labels[i] for i in loops),
        classes=tuple(frozenset(M.labels[i] for i in c) for c in classes),
    )
    if not loops and len(reps) == M.n:
        return M, smap
    return Minor(M, reps, 0), smap


def is_simple(M: Matroid) -> bool:
    loops, classes = _parallel_classes(M)
    return not loops and len(classes) == M.n


def epsilon(M: Matroid) -> int:
    return len(_parallel_classes(M)[1])


def flat_levels(M: Matroid, upto: int) -> list[list[int]]:
    """Flats of rank 0..upto, grouped by rank (the partial lattice is cached)."""
    if M._lattice is not None:
        return M._lattice[: upto + 1]
    levels = M.__dict__.setdefault("_levels", [[M.cl(0)]])
    while len(levels) <= min(upto, M.rank):
        seen, nxt = set(), []
        for F in levels[-1]:
            covered = F
            for e in range(M.n):
                b = 1 << e
                if covered & b:
                    continue
                G = M.cl(F | b)
                covered |= G
                if G not in seen:
                    seen.add(G)
                    nxt.append(G)
        nxt.sort()
        levels.append(nxt)
    return levels[: upto + 1]


def flat_lattice(M: Matroid) -> list[list[int]]:
    """All flats, grouped by rank, as sorted bitmasks (cached on ``M``)."""
    if M._lattice is None:
        M._lattice = flat_levels(M, M.rank)
    return M._lattice


def flats_masks(M: Matroid, r: int) -> list[int]:
    if not 0 <= r <= M.rank:
        raise MatroidError(f"rank {r} outside 0..{M.rank}")
    return flat_lattice(M)[r]


def flats(M: Matroid, r: int) -> list[frozenset]:
    return [M.elems(F) for F in flats_masks(M, r)]


def is_flat(M: Matroid, mask: int) -> bool:
    return M.cl(mask) == mask


def hyperplanes_masks(M: Matroid) -> list[int]:
    return flats_masks(M, M.rank - 1) if M.rank else []


def local_conn(M: Matroid, X: Iterable[Label], Y: Iterable[Label]) -> int:
    xm, ym = M.mask(X), M.mask(Y)
    return M.r(xm) + M.r(ym) - M.r(xm | ym)


def is_skew(M: Matroid, parts: Sequence[Iterable[Label]]) -> bool:
    masks = [M.mask(p) for p in parts]
    union = 0
    for m in masks:
        union |= m
    return M.r(union) == sum(M.r(m) for m in masks)


def is_modular_pair(M: Matroid, X: Iterable[Label], Y: Iterable[Label]) -> bool:
    return _modular_pair(M, M.mask(X), M.mask(Y))


def _modular_pair(M: Matroid, xm: int, ym: int) -> bool:
    return M.r(xm & ym) == M.r(xm) + M.r(ym) - M.r(xm | ym)


def is_weakly_round(M: Matroid) -> bool:
    """Every cocircuit has rank at least ``r(M) - 1`` (vacuous in rank 0)."""
    r = M.rank
    if r == 0:
        return True
    return all(M.r(M.full & ~H) >= r - 1 for H in hyperplanes_masks(M))


def independent_masks(M: Matroid, max_size: int | None = None) -> list[int]:
    """All independent sets (as masks), grown in canonical increasing order."""
    top = M.rank if max_size is None else min(max_size, M.rank)
    out = [0]
    frontier = [0]
    for size in range(1, top + 1):
        nxt = []
        for I in frontier:
            start = I.bit_length()
            for e in range(start, M.n):
                J = I | (1 << e)
                if M.r(J) == size:
                    nxt.append(J)
        out += nxt
        frontier = nxt
    return out


def bases_masks(M: Matroid) -> Iterator[int]:
    r = M.rank
    return (I for I in independent_masks(M) if popcount(I) == r)


def circuits_masks(M: Matroid) -> list[int]:
    out = []
    for I in independent_masks(M):
        s = popcount(I)
        for e in range(I.bit_length(), M.n):
            C = I | (1 << e)
            if M.r(C) == s and all(M.r(C & ~(1 << x)) == s for x in bits(I)):
                out.append(C)
    # circuits whose largest element is not last in canonical order are
    # found from their own (independent) prefix, so the list is complete.
    return sorted(set(out))


# ---------------------------------------------------------------------------
# Rank axioms


def check_rank_axioms(M: Matroid, limit: int = 12) -> str | None:
    """Exhaustive local axiom check; returns a description of a violation or None."""
    if M.n > limit:
        raise MatroidError(f"axiom check limited to {limit} elements")
    r = M.r
    if r(0) != 0:
        return "r(empty) != 0"
    for X in range(1 << M.n):
        rx = r(X)
        for e in range(M.n):
            be = 1 << e
            if X & be:
                continue
            d = r(X | be) - rx
            if d not in (0, 1):
                return f"unit increase fails at X={sorted(M.elems(X), key=repr)}, e={M.labels[e]!r}"
            for f in range(e + 1, M.n):
                bf = 1 << f
                if X & bf:
                    continue
                if r(X | be) + r(X | bf) < r(X | be | bf) + rx:
                    return (
                        f"submodularity fails at X={sorted(M.elems(X), key=repr)}, "
                        f"e={M.labels[e]!r}, f={M.labels[f]!r}"
                    )
    return None


# ---------------------------------------------------------------------------
# Isomorphism and embeddings


def invariants(M: Matroid) -> tuple:
    """(rank, |E|, eps, loops, flat counts per rank, line-size multiset)."""
    loops, classes = _parallel_classes(M)
    base = (M.rank, M.n, len(classes), len(loops), tuple(sorted(len(c) for c in classes)))
    if M.n > EXPLICIT_CAP:
        return base
    lat = flat_lattice(M)
    counts = tuple(len(level) for level in lat)
    if M.rank >= 2:
        lines = tuple(sorted(Counter(len(_nonloop_classes_in(M, L, classes)) for L in lat[2]).items()))
    else:
        lines = ()
    return base + (counts, lines)


def _nonloop_classes_in(M, F, classes):
    return [c for c in classes if F >> c[0] & 1]


def _element_signature(M: Matroid) -> list[tuple]:
    """Per element: rank, parallel class size, and the sizes of the flats through it, by rank."""
    loops, classes = _parallel_classes(M)
    cls_of = {}
    for c in classes:
        for e in c:
            cls_of[e] = len(c)
    levels = flat_lattice(M)[2:-1] if M.rank >= 3 and M.n <= EXPLICIT_CAP else []
    sig = []
    for e in range(M.n):
        through = tuple(tuple(sorted(popcount(F) for F in level if F >> e & 1)) for level in levels)
        sig.append((M.r(1 << e), cls_of.get(e, 0), through))
    return sig


def find_embedding(
    N: Matroid,
    M: Matroid,
    candidates: Sequence[Sequence[int]] | None = None,
    order: Sequence[int] | None = None,
    budget: list[int] | None = None,
) -> dict[int, int] | None:
    """Injective map from E(N) into E(M) under which M restricted to the image equals N.

    Works on bit positions.  ``candidates[x]`` restricts the images of ``x``;
    ``budget`` is a one-element list decremented per search node (raises
    ``BudgetExceeded`` when it runs out).
    """
    from .errors import BudgetExceeded

    if order is None:
        order = list(range(N.n))
    if candidates is None:
        candidates = [range(M.n)] * N.n
    phi: dict[int, int] = {}
    used = 0
    # Flats of N restricted to the mapped elements, with their images and
    # ranks.  x -> y is consistent iff x and y lie in the closures of exactly
    # the same such flats.
    flats: list[tuple[int, int, int]] = [(0, 0, 0)]

    def grow(bx: int, by: int) -> list[tuple[int, int, int]] | None:
        absorbed, stay = [], []
        for Fn, Fm, s in flats:
            a = N.r(Fn | bx) == s
            if a != (M.r(Fm | by) == s):
                return None
            (absorbed if a else stay).append((Fn, Fm, s))
        out = [(Fn | bx, Fm | by, s) for Fn, Fm, s in absorbed]
        for Fn, Fm, s in stay:
            out.append((Fn, Fm, s))
            if not any(t == s + 1 and Gn & Fn == Fn for Gn, _, t in absorbed):
                out.append((Fn | bx, Fm | by, s + 1))
        return out

    def extend(pos: int) -> bool:
        nonlocal used, flats
        if pos == len(order):
            return True
        x = order[pos]
        bx = 1 << x
        for y in candidates[x]:
            by = 1 << y
            if used & by:
                continue
            if budget is not None:
                budget[0] -= 1
                if budget[0] < 0:
                    raise BudgetExceeded("embedding search budget exhausted")
            nxt = grow(bx, by)
            if nxt is None:
                continue
            saved = flats
            phi[x] = y
            used |= by
            flats = nxt
            if extend(pos + 1):
                return True
            flats = saved
            used &= ~by
            del phi[x]
        return False

    return dict(phi) if extend(0) else None


def closure_order(M: Matroid, cands: Sequence[Sequence[int]]) -> list[int]:
    """Most constrained elements first, each followed by what it closes off.

    Elements in the closure of those already placed have few consistent
    images, so listing them early keeps the backtracking shallow.
    """
    seeds = sorted(range(M.n), key=lambda x: (len(cands[x]), x))
    order, placed = [], 0
    for x in seeds:
        if placed >> x & 1:
            continue
        order.append(x)
        placed |= 1 << x
        c = M.cl(placed)
        for z in seeds:
            if c >> z & 1 and not placed >> z & 1:
                order.append(z)
                placed |= 1 << z
    return order


def isomorphism_masks(M: Matroid, N: Matroid, check_invariants: bool = True) -> dict[int, int] | None:
    if M.n != N.n or M.rank != N.rank:
        return None
    if check_invariants and invariants(M) != invariants(N):
        return None
    sm, sn = _element_signature(M), _element_signature(N)
    if Counter(sm) != Counter(sn):
        return None
    by_sig: dict[tuple, list[int]] = {}
    for y, s in enumerate(sn):
        by_sig.setdefault(s, []).append(y)
    cands = [by_sig[s] for s in sm]
    return find_embedding(M, N, cands, closure_order(M, cands))


def is_isomorphic(M: Matroid, N: Matroid) -> dict | None:
    """A rank-preserving bijection E(M) -> E(N) (by labels), or None."""
    phi = isomorphism_masks(M, N)
    if phi is None:
        return None
    return {M.labels[x]: N.labels[y] for x, y in phi.items()}


def same_rank_function(M: Matroid, N: Matroid, max_check: int = 20) -> bool:
    """Equal as labelled matroids (rank functions agree on every subset)."""
    if M.ground != N.ground:
        return False
    perm = [N.index(lab) for lab in M.labels]
    if M.n > max_check:
        raise MatroidError("rank function comparison limited to %d elements" % max_check)
    for X in range(1 << M.n):
        Y = 0
        for i in bits(X):
            Y |= 1 << perm[i]
        if M.r(X) != N.r(Y):
            return False
    return True


def same_independent_sets(M: Matroid, N: Matroid) -> bool:
    """Labelled equality via independent sets (cheaper than all subsets)."""
    if M.ground != N.ground or M.rank != N.rank:
        return False
    perm = [N.index(lab) for lab in M.labels]

    def img(X):
        Y = 0
        for i in bits(X):
            Y |= 1 << perm[i]
        return Y

    IM = independent_masks(M)
    if any(N.r(img(I)) != popcount(I) for I in IM):
        return False
    return len(IM) == len(independent_masks(N))
