"""Projective and affine geometries, single-element extensions and projections."""

from __future__ import annotations

import random
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import BudgetExceeded, CertificateError
from .gf import field_make, normalize, projective_points
from .matroid import (
    EXPLICIT_CAP,
    LinearMatroid,
    Matroid,
    MatroidError,
    Minor,
    OracleMatroid,
    _element_signature,
    _modular_pair,
    find_embedding,
    _parallel_classes,
    bits,
    check_rank_axioms,
    closure_order,
    flat_lattice,
    invariants,
    isomorphism_masks,
    popcount,
    restrict_mask,
)


def pg(n: int, q: int) -> LinearMatroid:
    """PG(n-1, q): the rank-n projective geometry over GF(q)."""
    F = field_make(q)
    pts = projective_points(F, n)
    A = np.array(pts, dtype=np.int64).T.reshape(n, len(pts))
    return LinearMatroid(F, A, name=f"PG({n - 1},{q})")


def ag(n: int, q: int) -> LinearMatroid:
    """AG(n-1, q): PG(n-1, q) with the hyperplane x_0 = 0 removed."""
    if n < 2:
        raise MatroidError("affine geometry needs n >= 2")
    F = field_make(q)
    pts = [p for p in projective_points(F, n) if p[0] == 1]
    A = np.array(pts, dtype=np.int64).T
    return LinearMatroid(F, A, name=f"AG({n - 1},{q})")


def geometry_size(n: int, q: int) -> int:
    return (q**n - 1) // (q - 1)


def truncate(M: Matroid) -> Matroid:
    top = M.rank
    if top == 0:
        raise MatroidError("cannot truncate a rank-0 matroid")
    return OracleMatroid(M.n, lambda m: min(M.r(m), top - 1), M.labels, name=f"T({M.name or '?'})")


def linear_lines(G: LinearMatroid) -> list[list[int]]:
    """Lines (rank-2 flats) of a simple linear matroid, as index lists (cached)."""
    cached = getattr(G, "_lines_cache", None)
    if cached is None:
        cached = G._lines_cache = _lines_of_columns(G.field.q, tuple(G.columns))
    return cached


@lru_cache(maxsize=64)
def _lines_of_columns(q: int, columns: tuple) -> list[list[int]]:
    # keyed by the matrix so that equal geometries built separately share the work
    F = field_make(q)
    n = len(columns)
    where = {}
    for i, c in enumerate(columns):
        where[normalize(F, c)] = i
    if len(where) != n:
        raise MatroidError("linear_lines needs a simple matroid")
    cols = [normalize(F, c) for c in columns]
    covered = [0] * n
    lines = []
    add, mul = F.add, F.mul
    for a in range(n):
        va = cols[a]
        for b in range(a + 1, n):
            if covered[a] >> b & 1:
                continue
            vb = cols[b]
            pts = [a, b]
            for lam in range(1, F.q):
                v = tuple(add[x][mul[lam][y]] for x, y in zip(va, vb))
                j = where.get(normalize(F, v)) if any(v) else None
                if j is not None and j != b and j != a:
                    pts.append(j)
            pts = sorted(set(pts))
            m = 0
            for j in pts:
                m |= 1 << j
            for j in pts:
                covered[j] |= m
            lines.append(pts)
    return lines


# ---------------------------------------------------------------------------
# Modular cuts and extensions


def _basis_of(M: Matroid, F: int) -> int:
    B, rb = 0, 0
    for e in bits(F):
        if M.r(B | (1 << e)) > rb:
            B |= 1 << e
            rb += 1
    return B


class ModularCut:
    """A modular cut of ``matroid``, stored by its minimal flats."""

    def __init__(self, matroid: Matroid, minimal: Iterable[int], _checked: bool = False):
        self.matroid = matroid
        self.minimal = tuple(sorted(set(minimal)))
        self._gens = tuple(_basis_of(matroid, F) for F in self.minimal)

    def contains(self, X: int, rx: int | None = None) -> bool:
        """Whether cl(X) belongs to the cut."""
        r = self.matroid.r
        if rx is None:
            rx = r(X)
        for g in self._gens:
            if r(X | g) == rx:
                return True
        return False

    @property
    def is_empty(self) -> bool:
        return not self.minimal

    def flats(self) -> list[int]:
        M = self.matroid
        return [F for level in flat_lattice(M) for F in level if any(F & m == m for m in self.minimal)]

    def key(self) -> tuple:
        return self.minimal

    def __repr__(self):
        return f"ModularCut({[sorted(self.matroid.elems(F), key=repr) for F in self.minimal]})"

    # -- constructors -----------------------------------------------------

    @classmethod
    def empty(cls, M: Matroid) -> "ModularCut":
        return cls(M, ())

    @classmethod
    def free(cls, M: Matroid) -> "ModularCut":
        return cls(M, (M.full,))

    @classmethod
    def principal(cls, M: Matroid, F: int | Iterable) -> "ModularCut":
        fm = F if isinstance(F, int) else M.mask(F)
        return cls(M, (M.cl(fm),))

    @classmethod
    def generated(cls, M: Matroid, flats: Iterable[int | Iterable]) -> "ModularCut":
        """Smallest modular cut containing the given flats."""
        gens = {M.cl(F if isinstance(F, int) else M.mask(F)) for F in flats}
        lattice = [F for level in flat_lattice(M) for F in level]
        cut = {F for F in lattice if any(F & g == g for g in gens)}
        changed = True
        while changed:
            changed = False
            cl = sorted(cut)
            for i, A in enumerate(cl):
                for B in cl[i + 1:]:
                    C = A & B
                    if C not in cut and _modular_pair(M, A, B):
                        cut |= {F for F in lattice if F & C == C}
                        changed = True
        return cls(M, _minimal_members(cut))

    @classmethod
    def from_flats(cls, M: Matroid, flats: Iterable[int | Iterable]) -> "ModularCut":
        """Validate an explicit list of flats as a modular cut."""
        cut = set()
        for F in flats:
            fm = F if isinstance(F, int) else M.mask(F)
            if M.cl(fm) != fm:
                raise MatroidError(f"{sorted(M.elems(fm), key=repr)} is not a flat")
            cut.add(fm)
        lattice = [F for level in flat_lattice(M) for F in level]
        for F in cut:
            for H in lattice:
                if H & F == F and H not in cut:
                    raise MatroidError(
                        f"not upward closed: {sorted(M.elems(H), key=repr)} contains a member but is missing"
                    )
        for A in cut:
            for B in cut:
                if A & B not in cut and _modular_pair(M, A, B):
                    raise MatroidError("not closed under intersection of modular pairs")
        return cls(M, _minimal_members(cut))


def _minimal_members(cut: Iterable[int]) -> list[int]:
    cut = sorted(cut, key=popcount)
    out = []
    for F in cut:
        if not any(F & m == m for m in out):
            out.append(F)
    return out


class Extension(Matroid):
    """Single-element extension of ``base`` by the cut ``cut``; new element is last."""

    def __init__(self, base: Matroid, cut: ModularCut, label=None, name=None):
        if cut.matroid is not base:
            raise MatroidError("modular cut belongs to a different matroid")
        if label is None:
            label = base.n if base.n not in base._index else ("x", base.n)
        super().__init__(base.n + 1, base.labels + (label,), name)
        self.base = base
        self.cut = cut
        self._top = 1 << base.n

    def _rank(self, mask):
        if not mask & self._top:
            return self.base.r(mask)
        Y = mask & ~self._top
        ry = self.base.r(Y)
        return ry if self.cut.contains(Y, ry) else ry + 1


def extend(M: Matroid, cut: ModularCut, label=None) -> Extension:
    return Extension(M, cut, label)


# ---------------------------------------------------------------------------
# Enumeration of modular cuts / extensions


def modular_cuts(M: Matroid, min_rank: int = 0):
    """Yield every modular cut of ``M`` (as ModularCut), deterministic order.

    Flats are decided from the top of the lattice down.  A flat may join the
    cut only once all its covers have; including a flat immediately records
    the intersections it forms with modular partners, so a conflict with an
    already excluded flat is seen at once.  ``min_rank`` excludes cuts
    containing a flat of smaller rank (2 keeps simple extensions only).
    """
    lat = flat_lattice(M)
    order = [F for level in reversed(lat) for F in level]
    rank_of = {F: i for i, level in enumerate(lat) for F in level}
    covers = {F: [] for F in order}
    for i in range(len(lat) - 1):
        for F in lat[i]:
            covers[F] = [H for H in lat[i + 1] if H & F == F]
    inc: list[int] = []
    inc_set: set[int] = set()
    exc: list[int] = []
    req: list[int] = []

    def rec(pos):
        if pos == len(order):
            yield ModularCut(M, _minimal_members(inc))
            return
        F = order[pos]
        can = rank_of[F] >= min_rank and all(H in inc_set for H in covers[F])
        must = any(C & F == C for C in req)
        if must and not can:
            return
        if can:
            new = []
            ok = True
            for A in inc:
                C = A & F
                if C == A or C == F or any(R & C == R for R in req) or any(R & C == R for R in new):
                    continue
                if _modular_pair(M, A, F):
                    if rank_of[C] < min_rank or any(H & C == C for H in exc):
                        ok = False
                        break
                    new.append(C)
            if ok:
                inc.append(F)
                inc_set.add(F)
                req.extend(new)
                yield from rec(pos + 1)
                del req[len(req) - len(new):]
                inc_set.discard(F)
                inc.pop()
        if not must:
            exc.append(F)
            yield from rec(pos + 1)
            exc.pop()

    yield from rec(0)


class Extensions(list):
    """List of extensions carrying a ``truncated`` flag."""

    truncated: bool = False


def iso_class_key(M: Matroid) -> tuple:
    return invariants(M)


def add_if_new(pool: dict, M: Matroid) -> bool:
    """Insert ``M`` into an invariant-bucketed pool unless an isomorphic copy exists."""
    key = iso_class_key(M)
    bucket = pool.setdefault(key, [])
    for N in bucket:
        if isomorphism_masks(M, N, check_invariants=False) is not None:
            return False
    bucket.append(M)
    return True


def enumerate_extensions(
    M: Matroid,
    iso_reduce: bool = True,
    cap: int | None = None,
    simple_only: bool = False,
    keep_rank: bool = False,
    label=None,
) -> Extensions:
    """All single-element extensions of ``M`` (up to isomorphism if ``iso_reduce``)."""
    if M.n + 1 > EXPLICIT_CAP:
        raise MatroidError(f"extension enumeration is capped at {EXPLICIT_CAP} elements")
    out = Extensions()
    pool: dict = {}
    for cut in modular_cuts(M, min_rank=2 if simple_only else 0):
        if keep_rank and cut.is_empty:
            continue
        N = Extension(M, cut, label)
        if iso_reduce and not add_if_new(pool, N):
            continue
        if cap is not None and len(out) >= cap:
            out.truncated = True
            break
        out.append(N)
    return out


# ---------------------------------------------------------------------------
# Projections


@dataclass
class ProjectionCertificate:
    """``lifted`` with independent flat ``K``; ``projected = lifted / K``."""

    lifted: Matroid
    K: frozenset
    q: int
    projected: Matroid
    seed: int | None = None
    cuts: tuple = field(default=(), repr=False)

    @property
    def k(self) -> int:
        return len(self.K)

    @property
    def K_mask(self) -> int:
        return self.lifted.mask(self.K)

    @property
    def G_mask(self) -> int:
        return self.lifted.full & ~self.K_mask

    @property
    def geometry(self) -> Matroid:
        return restrict_mask(self.lifted, self.G_mask)

    @property
    def r(self) -> int:
        return self.projected.rank

    def validate(self) -> "ProjectionCertificate":
        L, km = self.lifted, self.K_mask
        if L.r(km) != self.k:
            raise CertificateError("K independent", f"rank of K is {L.r(km)}, expected {self.k}")
        if L.cl(km) != km:
            extra = L.elems(L.cl(km) & ~km)
            raise CertificateError("K flat", f"K spans {sorted(extra, key=repr)} (loops in the quotient)")
        if self.projected.rank < 2:
            raise CertificateError("rank at least 2", f"projected rank is {self.projected.rank}")
        n = L.rank
        if not _looks_like_pg(self.geometry, n, self.q):
            raise CertificateError("geometry", f"lifted minus K is not PG({n - 1},{self.q})")
        return self


def _looks_like_pg(G: Matroid, n: int, q: int) -> bool:
    if G.n != geometry_size(n, q) or G.rank != n:
        return False
    if isinstance(G, LinearMatroid):
        root, idx = G, list(range(G.n))
    elif isinstance(G, Minor) and G.contract == 0:
        idx = [_root_index(G, i) for i in range(G.n)]
        root = _linear_root(G)
    else:
        root, idx = None, [None]
    if root is not None and root.field.q == q and None not in idx:
        # a simple rank-n GF(q)-represented matroid with this many points is PG
        cols = root.columns
        pts = {normalize(root.field, cols[i]) for i in idx if any(cols[i])}
        return len(pts) == G.n
    if G.n <= 40:
        return isomorphism_masks(G, pg(n, q)) is not None
    raise MatroidError("cannot certify a large non-linear geometry")


def _linear_root(M: Matroid) -> LinearMatroid | None:
    while not isinstance(M, LinearMatroid):
        if isinstance(M, Extension):
            M = M.base
        elif isinstance(M, Minor) and M.contract == 0:
            M = M.parent
        else:
            return None
    return M


def _root_index(G: Minor, i: int) -> int | None:
    """Index of element ``i`` of a deletion-only minor chain in its linear root."""
    j, M = G.keep[i], G.parent
    while True:
        if isinstance(M, LinearMatroid):
            return j
        if isinstance(M, Extension):
            if j >= M.base.n:
                return None
            M = M.base
        elif isinstance(M, Minor) and M.contract == 0:
            j, M = M.keep[j], M.parent
        else:
            return None


def _unwrap_ext(M):
    while isinstance(M, Extension):
        M = M.base
    return M


CutSpec = Union[ModularCut, Callable[[Matroid], ModularCut], str, tuple]


def free_cut() -> Callable[[Matroid], ModularCut]:
    return ModularCut.free


def principal_cut(labels: Iterable) -> Callable[[Matroid], ModularCut]:
    labels = list(labels)
    return lambda M: ModularCut.principal(M, M.mask(labels))


def _resolve_cut(M: Matroid, spec: CutSpec) -> ModularCut:
    if isinstance(spec, ModularCut):
        return spec
    if spec == "free":
        return ModularCut.free(M)
    if isinstance(spec, tuple) and spec and spec[0] == "principal":
        return ModularCut.principal(M, M.mask(spec[1]))
    if callable(spec):
        return spec(M)
    raise MatroidError(f"cannot interpret cut specification {spec!r}")


def project(G: Matroid, cuts: Sequence[CutSpec], q: int | None = None, seed: int | None = None) -> ProjectionCertificate:
    """Extend ``G`` once per cut, then contract the new elements."""
    if q is None:
        if not isinstance(G, LinearMatroid):
            raise MatroidError("q must be given for non-linear geometries")
        q = G.field.q
    M = G
    K = []
    used = []
    for spec in cuts:
        cut = _resolve_cut(M, spec)
        label = ("k", len(K))
        M = Extension(M, cut, label)
        K.append(label)
        used.append(cut)
    km = M.mask(K)
    projected = Minor(M, [i for i in range(M.n) if not km >> i & 1], km, name="projection")
    cert = ProjectionCertificate(M, frozenset(K), q, projected, seed, tuple(used))
    return cert.validate()


def zero_certificate(G: Matroid, q: int | None = None) -> ProjectionCertificate:
    return project(G, [], q)


def projection_classes(cert: ProjectionCertificate) -> list[list[int]]:
    """Parallel classes of the projected matroid, as lifted-independent index lists.

    Indices refer to elements of ``cert.projected``.  Uses the line structure
    of the geometry when it is linear (a class is a union of collapsed lines).
    """
    P = cert.projected
    G = _unwrap_ext(cert.lifted)
    if not isinstance(G, LinearMatroid) or G.n != P.n:
        return _parallel_classes(P)[1]
    L = cert.lifted
    km = cert.K_mask
    k = cert.k
    parent = list(range(P.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for line in linear_lines(G):
        a, b = line[0], line[1]
        if L.r(km | (1 << a) | (1 << b)) == k + 1:
            ra = find(a)
            for c in line[1:]:
                rc = find(c)
                if rc != ra:
                    parent[rc] = ra
    groups: dict[int, list[int]] = {}
    for x in range(P.n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values())


def projection_epsilon(cert: ProjectionCertificate) -> int:
    return len(projection_classes(cert))


def simplified_projection(cert: ProjectionCertificate) -> tuple[Matroid, dict[int, int]]:
    """si(projected) and the map geometry index -> representative index in si."""
    classes = projection_classes(cert)
    reps = [c[0] for c in classes]
    S = Minor(cert.projected, reps, 0, name="si(projection)")
    fiber = {}
    for j, c in enumerate(classes):
        for x in c:
            fiber[x] = j
    return S, fiber


def random_certificate(q: int, k: int, r: int, seed: int, max_tries: int = 200) -> ProjectionCertificate:
    """Seeded random k-element projection of PG(r+k-1, q) built from principal cuts."""
    rng = random.Random(seed)
    G = pg(r + k, q)
    for _ in range(max_tries):
        M = G
        specs = []
        for i in range(k):
            j = rng.randint(2, M.rank)
            picks = rng.sample(range(M.n), min(M.n, j + rng.randint(0, 1)))
            F = 0
            for e in picks:
                if M.r(F | (1 << e)) > M.r(F):
                    F |= 1 << e
                if M.r(F) == j:
                    break
            cut = ModularCut.principal(M, F)
            specs.append(cut)
            M = Extension(M, cut, ("k", i))
        try:
            return project(G, _replay(specs), q, seed=seed)
        except CertificateError:
            continue
    raise CertificateError("generation", f"no valid certificate after {max_tries} tries (q={q}, k={k}, r={r})")


def _replay(cuts: Sequence[ModularCut]):
    """Re-create cuts on freshly built intermediate extensions by mask."""
    out = []
    for c in cuts:
        masks = c.minimal
        out.append(lambda M, masks=masks: ModularCut(M, [M.cl(m) for m in masks]))
    return out


def _colored_iso(A: Matroid, B: Matroid, split: int) -> bool:
    """Isomorphism A -> B mapping elements below ``split`` to elements below ``split``."""
    if A.n != B.n or A.rank != B.rank:
        return False
    sa, sb = _element_signature(A), _element_signature(B)
    sa = [s + (i < split,) for i, s in enumerate(sa)]
    sb = [s + (i < split,) for i, s in enumerate(sb)]
    if sorted(sa) != sorted(sb):
        return False
    by_sig: dict[tuple, list[int]] = {}
    for y, s in enumerate(sb):
        by_sig.setdefault(s, []).append(y)
    cands = [by_sig[s] for s in sa]
    return find_embedding(A, B, cands, closure_order(A, cands)) is not None


def projection_family(
    q: int,
    r: int,
    k: int,
    cap: int | None = None,
    counter: list | None = None,
) -> Extensions:
    """Every rank-r k-element projection of PG(r+k-1, q), one certificate per lifted class.

    Lifted matroids are grown one element at a time over all modular cuts,
    keeping only those where the new elements stay an independent set whose
    closure avoids the geometry, and rejecting copies isomorphic by a map
    that fixes the geometry/new-element split.
    """
    G = pg(r + k, q)
    if G.n + k > EXPLICIT_CAP:
        raise MatroidError(f"lifted matroids would exceed {EXPLICIT_CAP} elements")
    gm = G.full
    level = [G]
    out = Extensions()
    for i in range(k):
        pool: dict = {}
        nxt = []
        for M in level:
            for cut in modular_cuts(M):
                if counter is not None and counter[0] is not None:
                    counter[0] -= 1
                    if counter[0] < 0:
                        raise BudgetExceeded("projection enumeration budget exhausted")
                if cut.is_empty:
                    continue
                N = Extension(M, cut, ("k", i))
                km = N.full & ~gm
                if N.r(km) != i + 1 or N.cl(km) & gm:
                    continue
                key = iso_class_key(N)
                if any(_colored_iso(N, P, G.n) for P in pool.get(key, ())):
                    continue
                pool.setdefault(key, []).append(N)
                nxt.append(N)
                if cap is not None and len(nxt) >= cap:
                    out.truncated = True
                    break
            if out.truncated:
                break
        level = nxt
    for L in level:
        K = [("k", i) for i in range(k)]
        km = L.mask(K)
        P = Minor(L, list(bits(gm)), km, name="projection")
        out.append(ProjectionCertificate(L, frozenset(K), q, P).validate())
    return out


# ---------------------------------------------------------------------------
# The two-element extension family


def paired_extension(G: Matroid, Fprime: Iterable[Iterable], validate_limit: int = 12) -> Matroid:
    """Extension of ``G`` (rank n+2) by x1, x2 with the prescribed skewness pattern.

    Each ``x_i`` alone is free; the pair is skew to flats of rank < n, lies in
    no hyperplane, and is skew to exactly the rank-n flats listed in
    ``Fprime``.  These requirements fix the rank function; it is then checked
    against the matroid axioms and each requirement is re-verified.
    """
    top = G.rank
    n = top - 2
    if n < 1:
        raise MatroidError("paired_extension needs rank at least 3")
    fset = set()
    for F in Fprime:
        fm = G.mask(F)
        if G.cl(fm) != fm or G.r(fm) != n:
            raise MatroidError(f"{sorted(F, key=repr)} is not a rank-{n} flat")
        fset.add(fm)
    x1, x2 = 1 << G.n, 1 << (G.n + 1)

    def rk(mask):
        X = mask & G.full
        rx = G.r(X)
        h1, h2 = bool(mask & x1), bool(mask & x2)
        if not (h1 or h2):
            return rx
        if h1 != h2:
            return min(rx + 1, top)
        if rx >= n + 1:
            return top
        if rx == n:
            return top if G.cl(X) in fset else n + 1
        return rx + 2

    M = OracleMatroid(G.n + 2, rk, G.labels + (("x", 1), ("x", 2)), name="paired extension")
    if M.n <= validate_limit:
        bad = check_rank_axioms(M, limit=validate_limit)
        if bad is not None:
            raise MatroidError(f"no matroid has the required skewness pattern: {bad}")
    _check_paired_bullets(G, M, fset, n)
    return M


def _check_paired_bullets(G, M, fset, n):
    top = G.rank
    x1, x2 = 1 << G.n, 1 << (G.n + 1)
    lat = flat_lattice(G) if G.n <= EXPLICIT_CAP else None
    if lat is None:
        return
    for level in lat:
        for F in level:
            for x in (x1, x2):
                if M.r(F | x) != min(G.r(F) + 1, top):
                    raise MatroidError("deleting one new element does not give a free extension")
            rf = G.r(F)
            skew = M.r(F | x1 | x2) == rf + 2
            if rf < n and not skew:
                raise MatroidError("pair not skew to a flat of rank below n")
            if rf == n and skew != (F in fset):
                raise MatroidError("skew rank-n flats differ from the prescribed family")
            if rf == top - 1 and M.r(F | x1 | x2) == rf:
                raise MatroidError("a hyperplane spans the pair")
