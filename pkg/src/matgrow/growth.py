"""Growth-rate profiles, exhaustive h(n) at small rank and the (k, d) search."""

from __future__ import annotations

from dataclasses import dataclass, field

from .classes import ClassSpec, class_membership, class_params
from .errors import BudgetExceeded
from .geometry import (
    add_if_new,
    enumerate_extensions,
    geometry_size,
    pg,
    projection_family,
    simplified_projection,
)
from .matroid import MatroidError, Minor, uniform
from .projection import density_params


def dq_bound(q: int, k: int) -> int:
    """Largest admissible d for k contracted elements."""
    return (q ** (2 * k) - 1) // (q * q - 1)


def in_dq(q: int, k: int, d: int) -> bool:
    return k >= 0 and 0 <= d <= dq_bound(q, k)


@dataclass(frozen=True)
class GrowthProfile:
    q: int
    k: int
    d: int
    n0: int | None = None

    def __post_init__(self):
        if not in_dq(self.q, self.k, self.d):
            raise MatroidError(f"(k, qd) = ({self.k}, {self.q * self.d}) is outside D_{self.q}")

    @property
    def qd(self) -> int:
        return self.q * self.d

    def h(self, n: int) -> int:
        return grf_formula(self.q, self.k, self.d, n)


def grf_formula(q: int, k: int, d: int, n: int) -> int:
    if not in_dq(q, k, d):
        raise MatroidError(f"(k, qd) = ({k}, {q * d}) is outside D_{q}")
    return geometry_size(n + k, q) - q * d


def dq_compare(a: tuple[int, int], b: tuple[int, int]) -> int:
    """-1, 0 or 1 as ``a`` is below, equal to or above ``b`` (k first, then smaller d)."""
    ka, kb = (a[0], -a[1]), (b[0], -b[1])
    return (ka > kb) - (ka < kb)


# ---------------------------------------------------------------------------
# Exhaustive h(n)


@dataclass
class Exhaustive:
    value: int
    witnesses: list
    exact: bool
    queries: int = 0


def _member(spec, M, counter) -> bool:
    counter[0] += 1
    return class_membership(spec, M)


def _h_fields(spec: ClassSpec, n: int, max_nodes: int) -> Exhaustive:
    # every simple member of rank <= n sits inside PG(n-1, q) for the smallest field
    G = pg(n, min(spec.fields))
    counter = [0]
    level = [G]
    while level:
        hits = [M for M in level if _member(spec, M, counter)]
        if hits:
            return Exhaustive(level[0].n, hits, True, counter[0])
        pool: dict = {}
        nxt = []
        for M in level:
            for i in range(M.n):
                N = Minor(M, [j for j in range(M.n) if j != i], 0)
                if add_if_new(pool, N):
                    nxt.append(N)
                    if len(nxt) > max_nodes:
                        return Exhaustive(0, [], False, counter[0])
        level = nxt
    return Exhaustive(0, [], True, counter[0])


def _h_excluded(spec: ClassSpec, n: int, max_nodes: int) -> Exhaustive:
    counter = [0]
    best = Exhaustive(0, [], True)
    for r in range(1, n + 1):
        B = uniform(r, r)
        if not _member(spec, B, counter):
            continue
        level, size = [B], r
        while True:
            pool: dict = {}
            nxt = []
            for M in level:
                ext = enumerate_extensions(M, simple_only=True, keep_rank=True, label=("x", size))
                for N in ext:
                    if _member(spec, N, counter) and add_if_new(pool, N):
                        nxt.append(N)
                if len(nxt) > max_nodes:
                    best.exact = False
                    break
            if not nxt or not best.exact:
                break
            level, size = nxt, size + 1
        if size > best.value:
            best.value, best.witnesses = size, level
        elif size == best.value:
            best.witnesses = best.witnesses + level
        if not best.exact:
            break
    best.queries = counter[0]
    return best


def h_exhaustive(spec: ClassSpec, n: int, max_nodes: int = 5000) -> Exhaustive:
    """Most points of a rank-at-most-n member, by complete search.

    With fields, the search deletes points from the geometry over the
    smallest field until a member appears. Without fields, simple matroids
    are grown from a basis by rank-preserving extensions, keeping members
    only (the class is closed under restriction).
    """
    if n < 1:
        raise MatroidError("rank must be positive")
    if spec.fields:
        return _h_fields(spec, n, max_nodes)
    return _h_excluded(spec, n, max_nodes)


# ---------------------------------------------------------------------------
# (k, d) search


@dataclass
class SearchReport:
    profile: GrowthProfile | None
    witnesses: list = field(default_factory=list)
    queries: int = 0
    truncated: bool = False

    @property
    def qd(self) -> int | None:
        return None if self.profile is None else self.profile.qd


def kd_search(
    spec: ClassSpec,
    m: int,
    k_max: int = 1,
    cap: int | None = None,
    budget: int | None = None,
    q: int | None = None,
) -> SearchReport:
    """The largest (k, d) such that the class has a simple rank-m projection with those parameters."""
    if m < 2:
        raise MatroidError("rank must be at least 2")
    if q is None:
        q = class_params(spec).q
    counter = [budget]
    queries = 0
    truncated = False
    best: tuple[int, int] | None = None
    witnesses: list = []
    for k in range(k_max, -1, -1):
        try:
            family = projection_family(q, m, k, cap=cap, counter=counter)
        except (BudgetExceeded, MatroidError):
            truncated = True
            continue
        truncated |= family.truncated
        for cert in family:
            rep = density_params(cert)
            if not rep.in_bound:
                continue
            queries += 1
            S, _ = simplified_projection(cert)
            if not class_membership(spec, S):
                continue
            key = (k, rep.d)
            if best is None or dq_compare(key, best) > 0:
                best, witnesses = key, [cert]
            elif key == best:
                witnesses.append(cert)
        if best is not None:
            break
    profile = None if best is None else GrowthProfile(q, best[0], best[1])
    return SearchReport(profile, witnesses, queries, truncated)


# ---------------------------------------------------------------------------
# Reports


def growth_table(spec: ClassSpec, ranks, profile: GrowthProfile, max_nodes: int = 5000) -> tuple[str, bool]:
    """Text table comparing h(n) with the formula; returns (text, all rows exact)."""
    rows = ["n  h(n)  formula(n)  match"]
    exact = True
    for n in ranks:
        res = h_exhaustive(spec, n, max_nodes)
        f = profile.h(n)
        exact &= res.exact
        tag = "match" if res.value == f else "differ"
        if not res.exact:
            tag += " (incomplete)"
        rows.append(f"{n}  {res.value}  {f}  {tag}")
    return "\n".join(rows), exact


def profile_line(profile: GrowthProfile | None, exact: bool) -> str:
    if profile is None:
        return f"profile q=none k=none d=none exact={str(exact).lower()}"
    return f"profile q={profile.q} k={profile.k} d={profile.d} exact={str(exact).lower()}"
