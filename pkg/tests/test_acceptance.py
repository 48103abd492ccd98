"""Acceptance criteria 1-10, each checked at its stated tolerance and time limit.

Run with ``pytest tests/test_acceptance.py`` (the summary lists one line per
criterion) or directly with ``python tests/test_acceptance.py``.
"""

import itertools
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import (  # noqa: E402
    brute_epsilon,
    brute_flat_partition_min,
    brute_parallel_connection_rank,
    naive_has_minor,
)

from matgrow import io  # noqa: E402
from matgrow.classes import ClassSpec, has_minor  # noqa: E402
from matgrow.geometry import ag, pg, random_certificate  # noqa: E402
from matgrow.growth import grf_formula, h_exhaustive, kd_search  # noqa: E402
from matgrow.matroid import Minor, check_rank_axioms, epsilon, is_isomorphic, uniform  # noqa: E402
from matgrow.modsum import modular_sum  # noqa: E402
from matgrow.projection import density_params, sensitive_elements  # noqa: E402
from matgrow.suites import fano_sums, run_suite  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"

RESULTS: dict[int, str] = {}


def _suite(name, **kw):
    res = run_suite(name, **kw)
    assert res.ok, res.line()
    return res


def criterion_1():
    # only construction and counting are timed; the pairwise oracle is not
    start = time.perf_counter()
    counted = []
    for q in (2, 3, 4):
        for n in range(1, 6):
            P = pg(n, q)
            counted.append((P, epsilon(P), (q**n - 1) // (q - 1)))
            # affine geometries start at rank 2
            if n >= 2:
                A = ag(n, q)
                counted.append((A, epsilon(A), q ** (n - 1)))
    elapsed = time.perf_counter() - start
    for M, got, expect in counted:
        assert got == expect, (M.name, got, expect)
        assert brute_epsilon(M) == expect, M.name
    return f"{len(counted)} geometries", 1, elapsed


def criterion_2():
    res = _suite("density", seeds=200)
    # independent point count on a slice of the same corpus
    for q, k, r, seed in itertools.product((2, 3), (1, 2), (2, 3), range(2)):
        cert = random_certificate(q, k, r, seed=seed)
        rep = density_params(cert)
        assert brute_epsilon(cert.projected) == rep.eps
        assert rep.eps + q * rep.d == (q ** (r + k) - 1) // (q - 1)
    return f"{res.checked} certificates", 60


def criterion_3():
    res = _suite("localrep")
    return f"{res.checked} certificates", 120


def criterion_4():
    res = _suite("generic")
    # recount d on M/e with the pairwise point oracle
    for q, k in ((2, 1), (2, 2), (3, 1)):
        cert = random_certificate(q, k, 3, seed=0)
        rep = sensitive_elements(cert)
        P = cert.projected
        for e in range(P.n):
            if P.labels[e] in rep.elements or P.r(1 << e) == 0:
                continue
            C = Minor(P, [i for i in range(P.n) if i != e], 1 << e)
            total = (q ** (cert.r - 1 + k) - 1) // (q - 1)
            assert (total - brute_epsilon(C)) % q == 0
            assert (total - brute_epsilon(C)) // q == rep.d
    return f"{res.checked} contractions", 120


def criterion_5():
    res = _suite("flatpartition")
    for n in (2, 3):
        assert brute_flat_partition_min(pg(n, 2)) ** 2 * 4 > 2**n
    return "; ".join(res.notes), 300


def criterion_6():
    res = _suite("recognise")
    return f"{res.checked} certificates; " + "; ".join(res.notes), 120


def criterion_7():
    counts = [_suite(name).checked for name in ("modsum", "sumexclude", "subfield")]
    assert counts[1] >= 10 and counts[2] >= 5
    for name, spec in fano_sums()[:2]:
        S = modular_sum(spec)
        assert (S.n, S.rank) == {"point": (13, 5), "line": (11, 4)}[name]
        table = brute_parallel_connection_rank(spec.left, spec.right, list(S.labels))
        assert all(S.r(X) == table[X] for X in range(1 << S.n))
    return f"sums {counts[0]}, exclusion {counts[1]}, GF(4) {counts[2]}", 600


def criterion_8():
    binary = ClassSpec(fields=[2])
    for n in range(1, 5):
        h = h_exhaustive(binary, n)
        assert h.exact and h.value == 2**n - 1
        assert is_isomorphic(h.witnesses[0], pg(n, 2)) is not None
    nou24 = ClassSpec(excluded=[uniform(2, 4)], names=("U(2,4)",))
    for n in range(1, 4):
        h = h_exhaustive(nou24, n)
        assert h.exact and h.value == 2**n - 1
    return "binary n<=4, U(2,4)-free n<=3", 1800


def criterion_9():
    binary = ClassSpec(fields=[2])
    rep = kd_search(binary, 3, k_max=1)
    assert not rep.truncated and (rep.profile.k, rep.profile.d) == (0, 0)
    for n in (1, 2, 3):
        assert h_exhaustive(binary, n).value >= grf_formula(2, 0, 0, n)
    return "(k, d) = (0, 0)", 1800


def fixture_corpus():
    return {p.stem: io.read_matroid(p) for p in sorted(FIXTURES.glob("*.mtd"))}


def criterion_10():
    corpus = {k: M for k, M in fixture_corpus().items() if M.n <= 7}
    disagreements = []
    for (a, M), (b, N) in itertools.product(corpus.items(), repeat=2):
        if N.n > M.n:
            continue
        if (has_minor(M, N) is not None) != naive_has_minor(M, N):
            disagreements.append((a, b))
    assert not disagreements, disagreements
    for M in corpus.values():
        assert check_rank_axioms(M) is None
    res = _suite("kernel-axioms")
    return f"{len(corpus) ** 2} pairs, {res.checked} constructed matroids", 600


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_criterion(i: int) -> str:
    start = time.perf_counter()
    try:
        detail, limit, *timed = CRITERIA[i - 1]()
    except AssertionError as exc:
        line = f"criterion {i}: FAIL {exc}"
        RESULTS[i] = line
        raise
    elapsed = timed[0] if timed else time.perf_counter() - start
    ok = elapsed < limit
    line = f"criterion {i}: {'pass' if ok else 'FAIL'} ({detail}; {elapsed:.1f}s, limit {limit}s)"
    RESULTS[i] = line
    assert ok, line
    return line


@pytest.mark.parametrize("i", range(1, 11))
def test_criterion(i):
    print(run_criterion(i))


if __name__ == "__main__":
    failed = 0
    for i in range(1, 11):
        try:
            run_criterion(i)
        except AssertionError:
            failed += 1
        print(RESULTS[i], flush=True)
    sys.exit(1 if failed else 0)
