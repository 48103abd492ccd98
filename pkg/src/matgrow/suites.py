"""Named verification suites driven by ``matgrow verify``.

Each suite returns a :class:`SuiteResult`; on failure it carries the text of
a file that reproduces the first failing input.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classes import ClassSpec, has_minor, is_representable
from .errors import CertificateError
from .geometry import (
    ProjectionCertificate,
    _linear_root,
    pg,
    principal_cut,
    project,
    random_certificate,
    zero_certificate,
)
from .growth import dq_compare, grf_formula, h_exhaustive, kd_search
from .io import format_certificate, format_matroid, format_sum
from .matroid import (
    LinearMatroid,
    Matroid,
    Minor,
    _parallel_classes,
    check_rank_axioms,
    is_isomorphic,
    relabel,
    restrict_mask,
    same_independent_sets,
    uniform,
)
from .modsum import SumSpec, geometry_extend, modular_sum
from .projection import (
    density_from_eps,
    density_params,
    fiber_map,
    flat_partition_min,
    is_quotient,
    local_rep_level,
    pullback,
    sensitive_elements,
    spanning_subprojection,
    triangle_compatible,
)


@dataclass
class SuiteResult:
    name: str
    ok: bool
    checked: int = 0
    detail: str = ""
    dump: str | None = None
    notes: list = field(default_factory=list)

    def line(self) -> str:
        status = "pass" if self.ok else "FAIL"
        extra = f": {self.detail}" if self.detail else ""
        return f"{self.name}: {status} ({self.checked} checks){extra}"


class _Fail(Exception):
    def __init__(self, detail: str, dump: str | None = None):
        super().__init__(detail)
        self.detail, self.dump = detail, dump


def certificate_corpus(cells, per_cell: int, ranks, base_seed: int = 0):
    """Seeded certificates: for each (q, k) cell, ``per_cell`` draws cycling through ``ranks``."""
    for q, k in cells:
        rs = ranks(q, k) if callable(ranks) else ranks
        for i in range(per_cell):
            yield random_certificate(q, k, rs[i % len(rs)], seed=base_seed + i)


# ---------------------------------------------------------------------------
# Projection suites


def check_density(cert: ProjectionCertificate) -> None:
    rep = density_params(cert)
    total = (cert.q ** (cert.r + cert.k) - 1) // (cert.q - 1)
    if rep.eps + cert.q * rep.d != total:
        raise _Fail(f"eps + qd = {rep.eps + cert.q * rep.d}, expected {total}", format_certificate(cert))
    if not rep.in_bound:
        raise _Fail(f"d = {rep.d} exceeds {rep.bound}", format_certificate(cert))
    if not rep.floor_ok:
        raise _Fail(f"eps = {rep.eps} is below q^(k/2)", format_certificate(cert))
    for kp in range(cert.k + 1):
        try:
            spanning_subprojection(cert, kp)
        except CertificateError as exc:
            raise _Fail(f"spanning subprojection k'={kp}: {exc}", format_certificate(cert)) from None


def suite_density(seeds: int = 200, budget=None) -> SuiteResult:
    res = SuiteResult("density", True)
    cells = [(q, k) for q in (2, 3) for k in (1, 2)]
    for cert in certificate_corpus(cells, seeds, (2, 3, 4)):
        check_density(cert)
        res.checked += 1
    return res


def contraction_d(cert: ProjectionCertificate, e: int) -> int | None:
    """d of P/e from a direct count of its points (None when not of projection shape)."""
    P = cert.projected
    C = Minor(P, [i for i in range(P.n) if i != e], 1 << e)
    eps = len(_parallel_classes(C)[1])
    try:
        return density_from_eps(cert.q, cert.k, cert.r - 1, eps).d
    except CertificateError:
        return None


def check_generic(cert: ProjectionCertificate) -> int:
    rep = sensitive_elements(cert)
    P = cert.projected
    count = 0
    for cls in _parallel_classes(P)[1]:
        e = cls[0]
        if P.labels[e] in rep.elements:
            continue
        got = contraction_d(cert, e)
        if got != rep.d:
            raise _Fail(f"contracting {P.labels[e]!r} gives d = {got}, expected {rep.d}", format_certificate(cert))
        count += 1
    return count


def _small_ranks(q, k):
    return (3, 4) if q == 2 else (3,)


def suite_generic(seeds: int = 3, budget=None) -> SuiteResult:
    res = SuiteResult("generic", True)
    cells = [(q, k) for q in (2, 3) for k in (1, 2)]
    for cert in certificate_corpus(cells, seeds, _small_ranks):
        res.checked += check_generic(cert)
    return res


def check_localrep(cert: ProjectionCertificate) -> int:
    try:
        level = local_rep_level(cert)
    except CertificateError as exc:
        raise _Fail(str(exc), format_certificate(cert)) from None
    if level >= 2 and density_params(cert).d != 0:
        raise _Fail(f"level {level} but d = {density_params(cert).d}", format_certificate(cert))
    return level


def localrep_corpus(seeds: int):
    cells = [(2, 1), (2, 2), (3, 1), (3, 2)]
    ranks = lambda q, k: (3, 4) if q == 2 else (3,)  # noqa: E731
    yield from certificate_corpus(cells, seeds, ranks)
    for q, r in ((2, 3), (2, 4), (3, 3)):
        yield zero_certificate(pg(r, q), q)
    # a free point keeps every line of the projection binary; a point on a plane does not
    G = pg(4, 2)
    yield project(G, ["free"], 2)
    yield project(G, [principal_cut([0, 1, 3])], 2)


def suite_localrep(seeds: int = 6, budget=None) -> SuiteResult:
    res = SuiteResult("localrep", True)
    for cert in localrep_corpus(seeds):
        check_localrep(cert)
        res.checked += 1
    return res


def suite_flatpartition(seeds: int = 0, budget=None) -> SuiteResult:
    res = SuiteResult("flatpartition", True)
    for n in (2, 3, 4):
        m = flat_partition_min(pg(n, 2))
        # compare m^2 with 2^(n-2) to keep the bound 2^(n/2 - 1) exact
        if not m * m * 4 > 2**n:
            raise _Fail(f"PG({n - 1},2): minimum {m} does not exceed 2^({n}/2-1)", format_matroid(pg(n, 2), "geometry"))
        res.notes.append(f"PG({n - 1},2) minimum flat partition {m}")
        res.checked += 1
    return res


def recognition_maps(cert: ProjectionCertificate):
    """(phi, G, S): fiber map from the geometry onto the simplified projection."""
    phi, S = fiber_map(cert)
    G = _linear_root(cert.lifted)
    return phi, G, S


def check_recognise(cert: ProjectionCertificate) -> None:
    phi, G, S = recognition_maps(cert)
    if not triangle_compatible(phi, G, S):
        raise _Fail("fiber map is not triangle compatible", format_certificate(cert))
    if not is_quotient(pullback(phi, G, S), G):
        raise _Fail("pulled back projection is not a quotient of the geometry", format_certificate(cert))


def perturbation_rate(cert: ProjectionCertificate, trials: int, seed: int) -> tuple[int, int, int]:
    """(rejected, tried, unsound) over maps with two distinct images swapped.

    A swap that passes the triangle test is counted as unsound when its
    pullback is not a quotient of the geometry.
    """
    phi, G, S = recognition_maps(cert)
    rng = random.Random(seed)
    keys = sorted(phi)
    rejected = tried = unsound = 0
    while tried < trials:
        a, b = rng.sample(keys, 2)
        if phi[a] == phi[b]:
            continue
        psi = dict(phi)
        psi[a], psi[b] = phi[b], phi[a]
        tried += 1
        if not triangle_compatible(psi, G, S):
            rejected += 1
        elif not is_quotient(pullback(psi, G, S), G):
            unsound += 1
    return rejected, tried, unsound


def recognise_corpus(seeds: int):
    cells = [(2, 1), (2, 2), (3, 1), (3, 2)]
    # rank 3 with q = 3, k = 2 costs about a minute per certificate
    ranks = {(2, 1): (2, 3, 4), (2, 2): (2, 3), (3, 1): (2, 3), (3, 2): (2,)}
    return list(certificate_corpus(cells, seeds, lambda q, k: ranks[q, k]))


def suite_recognise(seeds: int = 10, budget=None) -> SuiteResult:
    res = SuiteResult("recognise", True)
    certs = recognise_corpus(seeds)
    for cert in certs:
        check_recognise(cert)
        res.checked += 1
    # on a line every three distinct points form a triangle, so swaps in a
    # rank-2 projection are usually still projections; they are tallied apart
    counts = {"line": [0, 0], "higher": [0, 0]}
    unsound = 0
    per_cert = -(-100 // max(1, sum(c.r > 2 for c in certs)))
    for i, cert in enumerate(certs):
        if len(set(fiber_map(cert)[0].values())) < 2:
            continue
        tally = counts["line" if cert.r == 2 else "higher"]
        a, b, u = perturbation_rate(cert, per_cert, seed=i)
        tally[0] += a
        tally[1] += b
        unsound += u
    for key, (a, b) in counts.items():
        res.notes.append(f"perturbed maps rejected ({key}): {a}/{b}")
    if unsound:
        raise _Fail(f"{unsound} perturbed maps passed the triangle test without being projections")
    a, b = counts["higher"]
    if b < 100 or a < 0.95 * b:
        raise _Fail(f"only {a}/{b} perturbed maps of rank at least 3 rejected")
    return res


# ---------------------------------------------------------------------------
# Modular sums


def _tagged(M: Matroid, tag: str, shared: dict | None = None) -> Matroid:
    shared = shared or {}
    return relabel(M, {x: shared.get(x, (tag, x)) for x in M.labels})


def fano_sums() -> list[tuple[str, SumSpec]]:
    F = pg(3, 2)
    A = _tagged(F, "a")
    # 0 is a point; 0, 1, 2 is a line of PG(2,2) in lexicographic order
    out = [
        ("point", SumSpec(A, _tagged(F, "b", {0: ("a", 0)}))),
        ("line", SumSpec(A, _tagged(F, "b", {i: ("a", i) for i in (0, 1, 2)}))),
        ("whole", SumSpec(A, A)),
    ]
    return out


def check_sum(spec: SumSpec) -> Matroid:
    S = modular_sum(spec)
    shared = spec.left.mask(spec.shared)
    expect = spec.left.rank + spec.right.rank - spec.left.r(shared)
    if S.rank != expect:
        raise _Fail(f"rank {S.rank} != {expect}", format_sum(spec))
    for side in (spec.left, spec.right):
        if not same_independent_sets(side, restrict_mask(S, S.mask(side.labels))):
            raise _Fail("a summand is not a restriction of the sum", format_sum(spec))
    return S


def suite_modsum(seeds: int = 0, budget=None) -> SuiteResult:
    res = SuiteResult("modsum", True)
    for name, spec in fano_sums():
        S = check_sum(spec)
        res.notes.append(f"{name}: {S.n} elements, rank {S.rank}")
        res.checked += 1
    for cert in localrep_corpus(1):
        if cert.lifted.rank > 4 or cert.q != 2:
            continue
        M = cert.lifted
        G = _linear_root(M)
        S = geometry_extend(M, G.labels, M.rank + 1, cert.q)
        if S.rank != M.rank + 1 or S.n != M.n + 2 ** M.rank:
            raise _Fail(f"geometry extension has {S.n} elements, rank {S.rank}", format_certificate(cert))
        res.checked += 1
    return res


# patterns that are not binary, so PG(r-1,2) avoids them
SUMEXCLUDE_PATTERNS = {"U(2,4)": uniform(2, 4), "U(2,5)": uniform(2, 5), "U(3,5)": uniform(3, 5), "U(3,6)": uniform(3, 6)}


def sumexclude_instances(max_n: int = 4):
    """(N name, N, M, n) with M in P_2(0), r(M) >= r(N), n >= r(M).

    At q = 2 with T(PG(2,2)) = U(2,7) excluded, a projection with k >= 1
    always has a U(2,7)-restriction, so only k = 0 qualifies.
    """
    for name, N in SUMEXCLUDE_PATTERNS.items():
        for r in range(N.rank, max_n + 1):
            M = zero_certificate(pg(r, 2), 2).projected
            for n in range(r, max_n + 1):
                yield name, N, M, n


def suite_sumexclude(seeds: int = 0, budget=None) -> SuiteResult:
    res = SuiteResult("sumexclude", True)
    U27 = uniform(2, 7)
    for name, N, M, n in sumexclude_instances():
        if has_minor(M, U27, budget) is not None or has_minor(M, N, budget) is not None:
            continue
        S = geometry_extend(M, M.labels, n, 2)
        if has_minor(S, N, budget) is not None:
            raise _Fail(f"sum with PG({n - 1},2) has a {name}-minor", format_matroid(M, "M"))
        res.checked += 1
    if res.checked < 10:
        raise _Fail(f"only {res.checked} instances met the hypotheses")
    return res


def gf4_instances():
    """GF(4) matroids containing a spanning PG(r-1,2), with a target dimension n."""
    fano = pg(3, 2).matrix
    # GF(4) elements 2, 3 are the roots of x^2 + x + 1
    line_extra = [[1], [2]]
    plane_extra = [[1, 0, 1], [2, 1, 1], [0, 2, 2]]
    cols2 = np.array([[0, 1, 1], [1, 0, 1]])
    out = [
        (LinearMatroid(4, np.hstack([cols2, np.array(line_extra)]), name="U24"), 2),
        (LinearMatroid(4, np.hstack([cols2, np.array(line_extra)]), name="U24"), 3),
        (LinearMatroid(4, np.hstack([cols2, np.array([[1, 1], [2, 3]])]), name="U25"), 3),
    ]
    for j in (1, 2, 3):
        A = np.hstack([fano, np.array(plane_extra)[:, :j]])
        out.append((LinearMatroid(4, A, name=f"Fano+{j}"), 3))
    return out


def suite_subfield(seeds: int = 0, budget=None) -> SuiteResult:
    res = SuiteResult("subfield", True)
    for M, n in gf4_instances():
        r = M.rank
        F = list(range((2**r) - 1))
        S = geometry_extend(M, F, n, 2)
        if S.n > 10:
            continue
        if not is_representable(S, 4):
            raise _Fail(f"{M.name} glued to PG({n - 1},2) is not GF(4)-representable", format_matroid(M, "M"))
        res.checked += 1
    if res.checked < 5:
        raise _Fail(f"only {res.checked} instances within 10 elements")
    return res


# ---------------------------------------------------------------------------
# Growth and kernel


def suite_growth(seeds: int = 0, budget=None) -> SuiteResult:
    res = SuiteResult("growth", True)
    kw = {} if budget is None else {"budget": budget}
    binary = ClassSpec(fields=[2], **kw)
    for n in range(1, 5):
        h = h_exhaustive(binary, n)
        if not h.exact or h.value != 2**n - 1 or is_isomorphic(h.witnesses[0], pg(n, 2)) is None:
            raise _Fail(f"binary h({n}) = {h.value} (exact={h.exact})")
        res.checked += 1
    nou24 = ClassSpec(excluded=[uniform(2, 4)], names=("U(2,4)",), **kw)
    for n in range(1, 4):
        h = h_exhaustive(nou24, n)
        if not h.exact or h.value != 2**n - 1:
            raise _Fail(f"U(2,4)-free h({n}) = {h.value} (exact={h.exact})")
        res.checked += 1
    rep = kd_search(binary, 3, k_max=1, budget=budget)
    if rep.truncated or rep.profile is None or (rep.profile.k, rep.profile.d) != (0, 0):
        raise _Fail(f"kd_search gave {rep.profile} (truncated={rep.truncated})")
    h3 = h_exhaustive(binary, 3)
    if h3.value < grf_formula(2, rep.profile.k, rep.profile.d, 3):
        raise _Fail("h(3) is below the formula")
    for a in ((0, 0), (1, 0), (1, 1), (2, 0), (2, 3)):
        for b in ((0, 0), (1, 0), (1, 1), (2, 0), (2, 3)):
            if dq_compare(a, b) != -dq_compare(b, a):
                raise _Fail(f"order not antisymmetric on {a}, {b}")
    res.checked += 2
    return res


def kernel_corpus():
    yield pg(3, 2)
    yield pg(2, 3)
    yield uniform(2, 4)
    yield uniform(3, 6)
    yield Minor(pg(4, 2), list(range(12)), 0)
    yield pg(3, 2)
    for cert in localrep_corpus(1):
        if cert.lifted.n <= 12:
            yield cert.lifted
        if cert.projected.n <= 12:
            yield cert.projected
    for _, spec in fano_sums()[:2]:
        yield modular_sum(spec)


def suite_kernel(seeds: int = 0, budget=None, inputs=()) -> SuiteResult:
    res = SuiteResult("kernel-axioms", True)
    for M in list(inputs) or kernel_corpus():
        if M.n > 12:
            continue
        bad = check_rank_axioms(M)
        if bad is not None:
            raise _Fail(bad, format_matroid(M, M.name or "M") if M.n <= 16 else None)
        res.checked += 1
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "density": suite_density,
    "generic": suite_generic,
    "localrep": suite_localrep,
    "flatpartition": suite_flatpartition,
    "recognise": suite_recognise,
    "modsum": suite_modsum,
    "sumexclude": suite_sumexclude,
    "subfield": suite_subfield,
    "growth": suite_growth,
    "kernel-axioms": suite_kernel,
}

_SUFFIX = re.compile(r"-\d+\.(\d+|x)$")


def suite_key(name: str) -> str | None:
    """Canonical suite name; a trailing numeric tag such as ``-3.2`` is ignored."""
    key = _SUFFIX.sub("", name)
    return key if key in SUITES else None


def run_suite(name: str, seeds: int | None = None, budget=None, **kw) -> SuiteResult:
    key = suite_key(name)
    if key is None:
        raise KeyError(name)
    fn = SUITES[key]
    args = {} if seeds is None else {"seeds": seeds}
    try:
        return fn(budget=budget, **args, **kw)
    except _Fail as f:
        return SuiteResult(key, False, detail=f.detail, dump=f.dump)
