"""Density, local representability, stacks, roundness and recognition of projections."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .classes import is_representable
from .errors import BudgetExceeded, CertificateError, RegimeError
from .geometry import (
    Extension,
    ProjectionCertificate,
    _basis_of,
    _linear_root,
    _unwrap_ext,
    geometry_size,
    linear_lines,
    projection_classes,
    projection_family,
    simplified_projection,
)
from .gf import normalize, span_points, subspaces
from .matroid import (
    LinearMatroid,
    Matroid,
    MatroidError,
    Minor,
    OracleMatroid,
    _parallel_classes,
    bits,
    flat_lattice,
    flat_levels,
    hyperplanes_masks,
    invariants,
    isomorphism_masks,
    is_simple,
    is_weakly_round,
    linear_root,
    popcount,
    restrict_mask,
    same_independent_sets,
)


def _geometry_total(q: int, n: int) -> int:
    return (q**n - 1) // (q - 1)


# ---------------------------------------------------------------------------
# Density


@dataclass(frozen=True)
class DensityReport:
    k: int
    d: int
    d_raw: int
    in_bound: bool
    floor_ok: bool
    eps: int
    rank: int
    q: int

    @property
    def bound(self) -> int:
        return (self.q ** (2 * self.k) - 1) // (self.q**2 - 1)


def density_from_eps(q: int, k: int, rank: int, eps: int) -> DensityReport:
    total = _geometry_total(q, rank + k)
    gap = total - eps
    if gap < 0 or gap % q:
        raise CertificateError(
            "density", f"{total} - {eps} = {gap} is not a nonnegative multiple of q={q}"
        )
    d = gap // q
    return DensityReport(
        k=k,
        d=d,
        d_raw=gap,
        in_bound=d <= (q ** (2 * k) - 1) // (q**2 - 1),
        floor_ok=eps * eps >= q**k,
        eps=eps,
        rank=rank,
        q=q,
    )


def density_params(cert: ProjectionCertificate) -> DensityReport:
    """Write eps of the projection as a full geometry count minus q*d."""
    return density_from_eps(cert.q, cert.k, cert.r, len(projection_classes(cert)))


# ---------------------------------------------------------------------------
# Spanning subprojections


def spanning_subprojection(cert: ProjectionCertificate, kprime: int) -> ProjectionCertificate:
    """A certificate with ``kprime`` contracted elements for a spanning restriction.

    Picks a rank-(r + kprime) flat F of the geometry meeting K in a
    kprime-dimensional way, contracts a part C of K skew to F and keeps the
    rest of K.  The restriction of the projection to F is spanning.
    """
    k = cert.k
    if not 0 <= kprime <= k:
        raise MatroidError(f"kprime must lie in 0..{k}")
    L = cert.lifted
    km, gm = cert.K_mask, cert.G_mask
    r = cert.r
    # rank-r set skew to K, then kprime more independent geometry elements
    S, rs = 0, 0
    for e in bits(gm):
        b = 1 << e
        if L.r(S | b) == rs + 1 and L.r(S | b | km) == rs + 1 + k:
            S |= b
            rs += 1
            if rs == r:
                break
    if rs != r:
        raise CertificateError("spanning subprojection", "no rank-r set of the geometry is skew to K")
    for e in bits(gm):
        if rs == r + kprime:
            break
        b = 1 << e
        if L.r(S | b) == rs + 1:
            S |= b
            rs += 1
    Fm = L.cl(S) & gm
    if L.r(Fm) != r + kprime or L.r(Fm) + k - L.r(Fm | km) != kprime:
        raise CertificateError("spanning subprojection", "flat has the wrong connectivity to K")
    C, rc = 0, L.r(Fm)
    for e in bits(km):
        b = 1 << e
        if L.r(Fm | C | b) == rc + 1:
            C |= b
            rc += 1
    if popcount(C) != k - kprime:
        raise CertificateError("spanning subprojection", "K does not split as expected")
    keep_K = km & ~C
    lifted = Minor(L, list(bits(Fm | keep_K)), C, name="lifted subprojection")
    Kp = frozenset(L.elems(keep_K))
    kp_mask = lifted.mask(Kp)
    projected = Minor(lifted, [i for i in range(lifted.n) if not kp_mask >> i & 1], kp_mask, name="subprojection")
    sub = ProjectionCertificate(lifted, Kp, cert.q, projected, cert.seed)
    # C skew to F makes the geometry of ``sub`` equal to the flat F itself
    if lifted.r(lifted.full & ~kp_mask) != r + kprime or popcount(Fm) != geometry_size(r + kprime, cert.q):
        raise CertificateError("spanning subprojection", "C is not skew to F")
    _validate_sub(sub)
    return sub


def _validate_sub(cert: ProjectionCertificate) -> None:
    L, km = cert.lifted, cert.K_mask
    if L.r(km) != cert.k:
        raise CertificateError("K independent", "in the subprojection")
    if L.cl(km) != km:
        raise CertificateError("K flat", "in the subprojection")
    if cert.projected.rank < 2:
        raise CertificateError("rank at least 2", f"subprojection has rank {cert.projected.rank}")


# ---------------------------------------------------------------------------
# Elements whose contraction changes d


@dataclass(frozen=True)
class SensitiveReport:
    elements: frozenset
    d: int
    d_after: dict  # element label -> d of the contraction (None if undefined)
    eps_sensitive: int
    below_bound: bool


def _lines_through_counts(M: Matroid, reps: list[int]) -> dict[int, int]:
    """For each representative point p, the number of lines of M through p.

    Every line is found once, from its first two points, and credited to
    each point on it.
    """
    out = dict.fromkeys(reps, 0)
    covered = dict.fromkeys(reps, 0)
    r = M.r
    for i, x in enumerate(reps):
        bx = 1 << x
        for y in reps[i + 1:]:
            if covered[x] >> y & 1:
                continue
            pair = bx | (1 << y)
            line = pair
            for z in reps:
                if not pair >> z & 1 and r(pair | (1 << z)) == 2:
                    line |= 1 << z
            for z in bits(line):
                covered[z] |= line
                out[z] += 1
    return out


def _line_index(G: LinearMatroid) -> tuple[list[list[int]], dict[int, int]]:
    """Lines through each point, and the line through each pair (keyed by pair mask)."""
    cached = getattr(G, "_line_index", None)
    if cached is None:
        lines = linear_lines(G)
        through = [[] for _ in range(G.n)]
        pair = {}
        for li, ln in enumerate(lines):
            for a in ln:
                through[a].append(li)
            for a, b in itertools.combinations(ln, 2):
                pair[(1 << a) | (1 << b)] = li
        cached = G._line_index = (through, pair)
    return cached


def _contracted_eps_linear(cert: ProjectionCertificate, G: LinearMatroid, p: int) -> int:
    """eps(P / p) from the lines and planes of the geometry through p.

    Points of P/p come from lines of G through p; such a line is a loop when
    it collapses onto p in P, and two lines merge when their plane does.
    """
    L, km, k = cert.lifted, cert.K_mask, cert.k
    lines = linear_lines(G)
    through, pair = _line_index(G)
    bp = 1 << p
    mine = through[p]
    other = [next(x for x in lines[li] if x != p) for li in mine]
    lid = {}
    for j, li in enumerate(mine):
        for x in lines[li]:
            if x != p:
                lid[x] = j
    live = [L.r(km | bp | (1 << a)) == k + 2 for a in other]
    parent = list(range(len(mine)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    covered = [0] * len(mine)
    for i in range(len(mine)):
        if not live[i]:
            continue
        for j in range(i + 1, len(mine)):
            if not live[j] or covered[i] >> j & 1:
                continue
            a, b = other[i], other[j]
            in_plane = {lid[c] for c in lines[pair[(1 << a) | (1 << b)]]}
            m = sum(1 << t for t in in_plane)
            for t in in_plane:
                covered[t] |= m
            if L.r(km | bp | (1 << a) | (1 << b)) == k + 2:
                roots = [find(t) for t in in_plane if live[t]]
                for t in roots[1:]:
                    parent[find(t)] = find(roots[0])
    return len({find(t) for t in range(len(mine)) if live[t]})


def sensitive_elements(cert: ProjectionCertificate) -> SensitiveReport:
    """Elements e of the projection for which d of M/e differs from d of M."""
    M = cert.projected
    q, k = cert.q, cert.k
    base = density_params(cert)
    classes = projection_classes(cert)
    reps = [c[0] for c in classes]
    G = _unwrap_ext(cert.lifted)
    if isinstance(G, LinearMatroid) and G.n == M.n:
        counts = {p: _contracted_eps_linear(cert, G, p) for p in reps}
    else:
        counts = _lines_through_counts(M, reps)
    sens = set()
    d_after = {}
    for c in classes:
        eps_c = counts[c[0]]
        total = _geometry_total(q, cert.r - 1 + k)
        gap = total - eps_c
        dd = gap // q if gap >= 0 and gap % q == 0 else None
        for e in c:
            d_after[M.labels[e]] = dd
            if dd != base.d:
                sens.add(e)
    X = 0
    for e in sens:
        X |= 1 << e
    eps_X = len([c for c in classes if X >> c[0] & 1])
    return SensitiveReport(
        elements=frozenset(M.labels[e] for e in sens),
        d=base.d,
        d_after=d_after,
        eps_sensitive=eps_X,
        below_bound=eps_X < q ** (58 * k**4),
    )


# ---------------------------------------------------------------------------
# Local representability


def _definitional_level_ok(S: Matroid, q: int, h: int, limit: int) -> bool:
    """Every rank-h flat of the simple matroid S restricts to a GF(q)-representable matroid."""
    for F in flat_levels(S, h)[h]:
        if not is_representable(restrict_mask(S, F), q, limit):
            return False
    return True


def _geometry_flat_bases(cert: ProjectionCertificate, rank: int) -> Iterable[int]:
    """Bases (as lifted masks) of every rank-``rank`` flat of the geometry."""
    L = cert.lifted
    root = _linear_root(L)
    gm = cert.G_mask
    if isinstance(root, LinearMatroid) and isinstance(L, Extension):
        F = root.field
        where = {normalize(F, c): i for i, c in enumerate(root.columns)}
        for basis in subspaces(F, root.dim, rank):
            m = 0
            for v in basis:
                m |= 1 << where[normalize(F, v)]
            yield m
        return
    G = restrict_mask(L, gm)
    for Fm in flat_lattice(G)[rank]:
        yield G.to_parent(_basis_of(G, Fm))


def _skew_level_ok(cert: ProjectionCertificate, h: int) -> bool:
    """Every flat of the geometry of rank h+1 is skew to K."""
    L, km, k = cert.lifted, cert.K_mask, cert.k
    for B in _geometry_flat_bases(cert, h + 1):
        if L.r(B | km) != h + 1 + k:
            return False
    return True


def local_rep_level(cert: ProjectionCertificate, limit: int = 16) -> int:
    """Largest h for which every rank-<=h restriction is GF(q)-representable.

    Capped at ``max(1, r - 1)``.  Each level from 2 up is decided both from
    the definition (representability of flats of the projection) and from
    skewness of K to the rank-(h+1) flats of the geometry; disagreement raises.
    """
    q = cert.q
    cap = max(1, cert.r - 1)
    S, _ = simplified_projection(cert)
    level = 1
    for h in range(2, cap + 1):
        by_def = _definitional_level_ok(S, q, h, limit)
        by_skew = _skew_level_ok(cert, h)
        if by_def != by_skew:
            raise CertificateError(
                "local representability",
                f"level {h}: definitional test says {by_def}, skewness test says {by_skew}",
            )
        if not by_def:
            break
        level = h
    return level


# ---------------------------------------------------------------------------
# Flat partitions


def flat_partition_min(G: Matroid, max_rank: int = 4) -> int:
    """Fewest parts in a partition of the points of G into at least two flats."""
    if G.rank > max_rank:
        raise RegimeError(f"exhaustive regime exceeded: rank {G.rank} > {max_rank}")
    if not is_simple(G):
        raise MatroidError("flat partitions are computed for simple matroids")
    if G.rank < 1:
        raise MatroidError("need at least rank 1")
    lat = flat_lattice(G)
    proper = [F for level in lat[1:-1] for F in level]
    if not proper:
        raise MatroidError("rank-1 matroids have no partition into two or more flats")
    containing = {e: sorted((F for F in proper if F >> e & 1), key=popcount, reverse=True) for e in range(G.n)}
    biggest = max(popcount(F) for F in proper)
    best = [G.n]

    def rec(covered: int, used: int):
        left = G.n - popcount(covered)
        if left == 0:
            best[0] = min(best[0], used)
            return
        if used + -(-left // biggest) >= best[0]:
            return
        e = (~covered & G.full & -(~covered & G.full)).bit_length() - 1
        for F in containing[e]:
            if F & covered:
                continue
            rec(covered | F, used + 1)

    rec(0, 0)
    return best[0]


# ---------------------------------------------------------------------------
# Skew sunflowers


def skew_sunflower(G: Matroid, flats: Sequence[Iterable], t: int):
    """t flats whose common part F0 leaves pairwise-skew remainders in G / F0.

    Returns ``(F0, chosen)`` as label sets, or None.
    """
    masks = [G.mask(F) for F in flats]
    for m in masks:
        if G.cl(m) != m:
            raise MatroidError(f"{sorted(G.elems(m), key=repr)} is not a flat")
    if len({G.r(m) for m in masks}) > 1:
        raise MatroidError("flats must have equal rank")
    if t < 1 or t > len(masks):
        return None
    for combo in itertools.combinations(masks, t):
        F0 = combo[0]
        for m in combo[1:]:
            F0 &= m
        r0 = G.r(F0)
        union = 0
        for m in combo:
            union |= m
        if G.r(union) - r0 == sum(G.r(m) - r0 for m in combo):
            return G.elems(F0), [G.elems(m) for m in combo]
    return None


# ---------------------------------------------------------------------------
# Stacks


@dataclass(frozen=True)
class StackWitness:
    layers: tuple  # tuple of frozensets of labels
    q: int
    t: int

    @property
    def k(self) -> int:
        return len(self.layers)


def check_stack(M: Matroid, w: StackWitness) -> str | None:
    """Describe the first way ``w`` fails to be a stack in ``M``, or None."""
    prev = 0
    for i, layer in enumerate(w.layers, 1):
        Fm = M.mask(layer)
        if Fm & prev:
            return f"layer {i} overlaps an earlier layer"
        R = Minor(M, list(bits(Fm)), prev)
        if R.rank > w.t:
            return f"layer {i} has rank {R.rank} > {w.t}"
        if is_representable(R, w.q):
            return f"layer {i} is GF({w.q})-representable"
        prev |= Fm
    if M.r(prev) != M.rank:
        return "layers do not span"
    return None


def find_stack(M: Matroid, q: int, t: int, k: int, budget: int | None = 10**6) -> StackWitness | None:
    """Search for disjoint layers making ``M`` a (q, k, t)-stack.

    Layers are taken to be flats of the current contraction (enlarging a
    layer to its closure keeps every condition), tried in rank order.
    """
    if 2 * k > M.rank:
        return None
    counter = [budget]

    def tick():
        if counter[0] is not None:
            counter[0] -= 1
            if counter[0] < 0:
                raise BudgetExceeded("stack search budget exhausted")

    layers: list[int] = []

    def rec(prev: int) -> bool:
        if len(layers) == k:
            return M.r(prev) == M.rank
        remaining = M.full & ~prev
        N = Minor(M, list(bits(remaining)), prev)
        # the last layer must finish spanning
        need = M.rank - M.r(prev)
        slots = k - len(layers)
        if need > slots * t or need < 2 * slots:
            return False
        lat = flat_lattice(N)
        for h in range(2, min(t, N.rank) + 1):
            for Fn in lat[h]:
                tick()
                Fm = N.to_parent(Fn)
                if is_representable(Minor(N, list(bits(Fn)), 0), q):
                    continue
                layers.append(Fm)
                if rec(prev | Fm):
                    return True
                layers.pop()
        return False

    if not rec(0):
        return None
    return StackWitness(tuple(M.elems(F) for F in layers), q, t)


# ---------------------------------------------------------------------------
# Weak roundness


def _fib(j: int) -> tuple[int, int]:
    """(F_j, F_{j-1}) with F_0 = 0, F_1 = 1."""
    a, b = 0, 1  # F_0, F_{-1}
    for _ in range(j):
        a, b = a + b, a
    return a, b


def phi_dense(eps_flat: int, eps_total: int, j: int) -> bool:
    """Exact test of eps_flat * phi**j >= eps_total (phi the golden ratio)."""
    fj, fj1 = _fib(j)
    # phi**j = fj * phi + fj1 and phi = (1 + sqrt5) / 2
    a = eps_flat * fj
    b = 2 * eps_total - eps_flat * (fj + 2 * fj1)
    return b <= 0 or 5 * a * a >= b * b


def weakly_round_dense_restriction(M: Matroid) -> Matroid:
    """A weakly round restriction to a flat F with eps(F) * phi**(r(M)-r(F)) >= eps(M)."""
    if is_weakly_round(M):
        return M
    eps_M = len(_parallel_classes(M)[1])
    lat = flat_lattice(M)
    for h in range(1, M.rank + 1):
        for F in lat[h]:
            R = restrict_mask(M, F)
            if phi_dense(len(_parallel_classes(R)[1]), eps_M, M.rank - h):
                if not is_weakly_round(R):
                    raise MatroidError("minimal dense flat is not weakly round")
                return R
    return M


def cospan_minor(M: Matroid, X: Iterable, Y: Iterable) -> Matroid:
    """A minor keeping M|X and M|Y in which Y is spanning; M must be weakly round."""
    xm, ym = M.mask(X), M.mask(Y)
    if M.r(xm) >= M.r(ym):
        raise MatroidError("need r(X) < r(Y)")
    if not is_weakly_round(M):
        raise MatroidError("M is not weakly round")
    C = 0
    while True:
        N = Minor(M, [i for i in range(M.n) if not C >> i & 1], C)
        nx, ny = N.mask(M.elems(xm)), N.mask(M.elems(ym))
        if N.r(ny) == N.rank:
            break
        blocked = N.cl(nx) | N.cl(ny)
        free = N.full & ~blocked
        if not free:
            raise MatroidError("no element outside cl(X) and cl(Y); M was not weakly round")
        e = (free & -free).bit_length() - 1
        C |= N.to_parent(1 << e)
    for part in (xm, ym):
        if not same_independent_sets(restrict_mask(M, part), restrict_mask(N, N.mask(M.elems(part)))):
            raise MatroidError("a restriction changed under contraction")
    return N


# ---------------------------------------------------------------------------
# Maps between matroids


def _check_map(phi: dict, M: Matroid, N: Matroid) -> dict[int, int]:
    out = {}
    for x in M.labels:
        if x not in phi:
            raise MatroidError(f"map is undefined on {x!r}")
        out[M.index(x)] = N.index(phi[x])
    return out


def is_projective_map(phi: dict, M: Matroid, N: Matroid, max_size: int = 16, max_rank: int = 4) -> bool:
    """Whether phi(cl_M(X)) is inside cl_N(phi(X)) for every X.

    Equivalent to the preimage of every flat of N being a flat of M, which
    is what gets checked.
    """
    if M.n > max_size and M.rank > max_rank:
        raise RegimeError("projective map check is limited to 16 elements or rank 4")
    f = _check_map(phi, M, N)
    for level in flat_lattice(N):
        for Fn in level:
            pre = _preimage(f, Fn)
            if M.cl(pre) != pre:
                return False
    return True


def _points_union_of_two_flats(root: LinearMatroid, idx: list[int]) -> bool:
    F = root.field
    pts = {normalize(F, root.columns[i]) for i in idx}
    if len(pts) != len(idx):
        return False
    for a in pts:
        A = [b for b in pts if b == a or set(span_points(F, [a, b])) <= pts]
        if set(span_points(F, A)) != set(A):
            continue
        rest = [b for b in pts if b not in set(A)]
        if not rest or set(span_points(F, rest)) <= pts:
            return True
    return False


def triangle_compatible(phi: dict, G: Matroid, M: Matroid) -> bool:
    """Every triangle of G maps to one point or to a triangle of M."""
    found = linear_root(G)
    if found is None:
        raise MatroidError("precondition: G must be a restriction of a projective geometry (no linear form)")
    if not _points_union_of_two_flats(*found):
        raise MatroidError("precondition: E(G) must be a union of at most two flats of the geometry")
    if not is_simple(M):
        raise MatroidError("precondition: M must be simple")
    f = _check_map(phi, G, M)
    if set(f.values()) != set(range(M.n)):
        raise MatroidError("precondition: map must be onto E(M)")
    for line in _lines(G):
        for a, b, c in itertools.combinations(line, 3):
            img = {f[a], f[b], f[c]}
            if len(img) == 1:
                continue
            if len(img) == 2:
                return False
            m = 0
            for y in img:
                m |= 1 << y
            if M.r(m) != 2:
                return False
    return True


def _lines(G: Matroid) -> list[list[int]]:
    if isinstance(G, LinearMatroid) and is_simple(G):
        return linear_lines(G)
    return [list(bits(L)) for L in flat_lattice(G)[2]] if G.rank >= 2 else []


def fiber_map(cert: ProjectionCertificate) -> tuple[dict, Matroid]:
    """Map from geometry labels to the simplified projection, and that simplification."""
    S, fiber = simplified_projection(cert)
    P = cert.projected
    return {P.labels[x]: S.labels[j] for x, j in fiber.items()}, S


def pullback(phi: dict, G: Matroid, M: Matroid) -> Matroid:
    """The matroid on E(G) with rank r_M(phi(X))."""
    f = _check_map(phi, G, M)

    def rk(mask):
        m = 0
        for x in bits(mask):
            m |= 1 << f[x]
        return M.r(m)

    N = OracleMatroid(G.n, rk, G.labels, name="pullback")
    if len(set(f.values())) == M.n:
        # flats of a pullback along a surjection are preimages of flats
        N._lattice = [sorted(_preimage(f, F) for F in level) for level in flat_lattice(M)]
    return N


def _preimage(f: dict[int, int], mask: int) -> int:
    out = 0
    for x, y in f.items():
        if mask >> y & 1:
            out |= 1 << x
    return out


def is_quotient(N: Matroid, M: Matroid) -> bool:
    """Whether N is a quotient of M: every flat of N is a flat of M."""
    if N.ground != M.ground:
        raise MatroidError("quotient test needs a common ground set")
    perm = [M.index(lab) for lab in N.labels]

    def to_m(mask):
        out = 0
        for i in bits(mask):
            out |= 1 << perm[i]
        return out

    tests = list(hyperplanes_masks(N)) + [N.cl(0)]
    if N.rank == 0:
        tests = [N.full]
    for H in tests:
        h = to_m(H)
        if M.cl(h) != h:
            return False
    return True


# ---------------------------------------------------------------------------
# Recognition by deleting part of cl(K)


def strip_to_projection(
    M: Matroid,
    K: Iterable,
    q: int,
    k_max: int = 2,
    budget: int | None = 10**6,
):
    """Smallest D inside cl_M(K) with M \\ D a projection of a GF(q) geometry.

    Returns ``(D, k)`` with D a label set, or None.  Membership is decided
    by generating every k-element projection of PG(r + k - 1, q) (up to
    isomorphism) and comparing simplifications.
    """
    if not is_simple(M):
        raise MatroidError("strip_to_projection needs a simple matroid")
    km = M.mask(K)
    pool = M.cl(km)
    counter = [budget]
    families: dict[tuple[int, int], list] = {}
    for size in range(popcount(pool) + 1):
        for D in itertools.combinations(list(bits(pool)), size):
            Dm = sum(1 << d for d in D)
            R = Minor(M, [i for i in range(M.n) if not Dm >> i & 1], 0)
            r = R.rank
            if r < 2:
                continue
            for k in range(k_max + 1):
                try:
                    density_from_eps(q, k, r, R.n)
                except CertificateError:
                    continue
                key = (r, k)
                if key not in families:
                    families[key] = projection_family(q, r, k, counter=counter)
                inv = invariants(R)
                for cert in families[key]:
                    S, _ = simplified_projection(cert)
                    if S.n != R.n or invariants(S) != inv:
                        continue
                    if isomorphism_masks(R, S, check_invariants=False) is not None:
                        return M.elems(Dm), k
    return None
