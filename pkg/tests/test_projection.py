import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matgrow.errors import BudgetExceeded, CertificateError, RegimeError
from matgrow.geometry import pg, principal_cut, project, random_certificate, truncate, zero_certificate
from matgrow.matroid import (
    LinearMatroid,
    MatroidError,
    Minor,
    direct_sum,
    flats,
    is_isomorphic,
    is_weakly_round,
    minorize,
    same_independent_sets,
    uniform,
)
from matgrow.projection import (
    StackWitness,
    check_stack,
    cospan_minor,
    density_params,
    fiber_map,
    find_stack,
    flat_partition_min,
    is_projective_map,
    is_quotient,
    local_rep_level,
    phi_dense,
    pullback,
    sensitive_elements,
    skew_sunflower,
    spanning_subprojection,
    strip_to_projection,
    triangle_compatible,
    weakly_round_dense_restriction,
)
from oracles import brute_epsilon, brute_flat_partition_min

FANO = pg(3, 2)
PG32 = pg(4, 2)


def line_cert():
    return project(FANO, [principal_cut(sorted(flats(FANO, 2)[0]))])


def trunc_cert():
    return project(PG32, ["free"])


# -- density -------------------------------------------------------------------


def test_density_examples():
    rep = density_params(trunc_cert())
    assert (rep.k, rep.d, rep.eps) == (1, 0, 15)
    rep = density_params(line_cert())
    assert (rep.k, rep.d, rep.eps) == (1, 1, 5) and rep.in_bound and rep.bound == 1
    rep = density_params(zero_certificate(FANO))
    assert (rep.k, rep.d) == (0, 0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 1), (2, 2), (3, 1)]), st.sampled_from([2, 3]), st.integers(0, 10**5))
def test_density_identity(cell, r, seed):
    q, k = cell
    cert = random_certificate(q, k, r, seed=seed)
    rep = density_params(cert)
    assert rep.eps == brute_epsilon(cert.projected)
    assert rep.eps + q * rep.d == (q ** (r + k) - 1) // (q - 1)
    assert 0 <= rep.d <= (q ** (2 * k) - 1) // (q * q - 1)
    assert rep.eps**2 >= q**k


# -- spanning subprojections -----------------------------------------------------


def test_spanning_subprojection_examples():
    cert = trunc_cert()
    same = spanning_subprojection(cert, 1)
    assert same.k == 1 and same.projected.n == 15
    sub = spanning_subprojection(cert, 0)
    assert sub.k == 0 and sub.projected.rank == 3
    assert is_isomorphic(sub.projected, FANO) is not None
    sub = spanning_subprojection(line_cert(), 0)
    assert sub.projected.n == 3 and sub.projected.rank == 2


def test_spanning_subprojection_range():
    with pytest.raises(MatroidError):
        spanning_subprojection(trunc_cert(), 2)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(2, 2), (3, 1)]), st.integers(0, 10**5))
def test_spanning_subprojection_is_spanning_restriction(cell, seed):
    q, k = cell
    cert = random_certificate(q, k, 3, seed=seed)
    for kp in range(k + 1):
        sub = spanning_subprojection(cert, kp)
        assert sub.k == kp and sub.projected.rank == cert.r
        P = cert.projected
        keep = sub.projected.labels
        R = Minor(P, [P.index(x) for x in keep], 0)
        assert same_independent_sets(R, sub.projected)


# -- sensitive elements ------------------------------------------------------------


def brute_sensitive(cert):
    P, q, k = cert.projected, cert.q, cert.k
    base = density_params(cert).d
    total = (q ** (cert.r - 1 + k) - 1) // (q - 1)
    out = set()
    for x in P.labels:
        C = minorize(P, [x])
        gap = total - brute_epsilon(C)
        d = gap // q if gap >= 0 and gap % q == 0 else None
        if d != base:
            out.add(x)
    return out


def test_sensitive_examples():
    assert sensitive_elements(zero_certificate(FANO)).elements == frozenset()
    assert sensitive_elements(trunc_cert()).elements == frozenset()
    cert = line_cert()
    assert sensitive_elements(cert).elements == brute_sensitive(cert)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([(2, 1), (2, 2), (3, 1)]), st.integers(0, 10**5))
def test_sensitive_matches_brute_force(cell, seed):
    q, k = cell
    cert = random_certificate(q, k, 3, seed=seed)
    assert sensitive_elements(cert).elements == brute_sensitive(cert)


# -- local representability ------------------------------------------------------


def test_local_rep_examples():
    assert local_rep_level(trunc_cert()) == 2
    assert local_rep_level(line_cert()) == 1
    assert local_rep_level(zero_certificate(PG32)) == 3


# -- flat partitions ---------------------------------------------------------------


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)])
def test_flat_partition_matches_brute_force(n, q):
    G = pg(n, q)
    assert flat_partition_min(G) == brute_flat_partition_min(G)


def test_flat_partition_values():
    # a line plus the four points off it; two lines always meet
    assert flat_partition_min(FANO) == 5
    assert flat_partition_min(pg(2, 3)) == 4
    m = flat_partition_min(PG32)
    assert m * m > 2 ** (4 - 2)


def test_flat_partition_regime():
    with pytest.raises(RegimeError):
        flat_partition_min(pg(5, 2))


# -- sunflowers and stacks ------------------------------------------------------------


def test_skew_sunflower_points():
    pts = [[x] for x in FANO.labels[:4]]
    F0, chosen = skew_sunflower(FANO, pts, 2)
    assert F0 == frozenset() and len(chosen) == 2


def test_skew_sunflower_lines():
    lines = [sorted(L) for L in flats(FANO, 2)]
    F0, chosen = skew_sunflower(FANO, lines, 2)
    assert len(F0) == 1 and all(F0 <= L for L in chosen)


def test_skew_sunflower_single():
    lines = [sorted(L) for L in flats(FANO, 2)]
    F0, chosen = skew_sunflower(FANO, lines, 1)
    assert chosen == [F0]


def test_stack_examples():
    U24 = uniform(2, 4)
    w = find_stack(U24, 2, 2, 1)
    assert w is not None and w.layers == (U24.ground,) and check_stack(U24, w) is None
    assert find_stack(FANO, 2, 2, 1) is None
    D = direct_sum(U24, U24)
    w = find_stack(D, 2, 2, 2)
    assert w is not None and w.k == 2 and check_stack(D, w) is None


def test_stack_budget():
    with pytest.raises(BudgetExceeded):
        find_stack(direct_sum(uniform(2, 4), FANO), 2, 3, 2, budget=1)


def test_check_stack_reports_binary_layer():
    w = StackWitness((FANO.ground,), 2, 3)
    assert "representable" in check_stack(FANO, w)


# -- roundness ------------------------------------------------------------------------


def test_phi_dense_exact():
    # phi^2 = 2.618...
    assert phi_dense(3, 7, 2) and not phi_dense(2, 6, 2)
    assert phi_dense(5, 5, 0) and not phi_dense(4, 5, 0)


def test_weakly_round_dense_restriction():
    assert weakly_round_dense_restriction(FANO) is FANO
    D = direct_sum(uniform(2, 3), uniform(2, 3))
    R = weakly_round_dense_restriction(D)
    assert is_weakly_round(R) and R.n == 3 and R.rank == 2
    U = uniform(1, 1)
    assert weakly_round_dense_restriction(U) is U


def test_cospan_minor():
    lines = [sorted(L) for L in flats(FANO, 2)]
    Y = lines[0]
    x = next(e for e in FANO.labels if e not in Y)
    N = cospan_minor(FANO, [x], Y)
    assert N.rank == 2 and N.r(N.mask(Y)) == 2
    assert cospan_minor(FANO, [x], FANO.labels).rank == 3
    with pytest.raises(MatroidError):
        cospan_minor(FANO, Y, [x])


# -- maps and recognition ---------------------------------------------------------------


def test_projective_maps():
    ident = {x: x for x in FANO.labels}
    assert is_projective_map(ident, FANO, FANO)
    cert = trunc_cert()
    phi, S = fiber_map(cert)
    assert is_projective_map(phi, PG32, S)
    # a triangle sent to three independent points of U(3,3)
    tri = sorted(flats(FANO, 2)[0])
    R = Minor(FANO, [FANO.index(x) for x in tri], 0)
    U = uniform(3, 3)
    assert not is_projective_map({x: i for i, x in enumerate(tri)}, R, U)


def test_triangle_compatibility():
    cert = trunc_cert()
    phi, S = fiber_map(cert)
    assert triangle_compatible(phi, PG32, S)
    ident = {x: x for x in FANO.labels}
    assert triangle_compatible(ident, FANO, FANO)
    # collapse two points of a line only
    a, b, c = sorted(flats(FANO, 2)[0])
    images = [x for x in FANO.labels if x != b]
    S = Minor(FANO, [FANO.index(x) for x in images], 0)
    psi = dict(ident)
    psi[b] = a
    assert not triangle_compatible(psi, FANO, S)


def test_quotients():
    assert is_quotient(FANO, FANO)
    assert is_quotient(truncate(FANO), FANO)
    assert not is_quotient(uniform(3, 4), uniform(2, 4))
    cert = line_cert()
    phi, S = fiber_map(cert)
    assert is_quotient(pullback(phi, FANO, S), FANO)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.randoms())
def test_truncation_is_quotient(r, extra, rnd):
    n = r + extra + 1
    A = np.array([[rnd.randrange(3) for _ in range(n)] for _ in range(r + 1)])
    M = LinearMatroid(3, A)
    if M.rank == 0:
        return
    assert is_quotient(truncate(M), M)


def test_strip_to_projection():
    T = truncate(PG32)
    assert strip_to_projection(T, [], 2, k_max=1) == (frozenset(), 1)
    assert strip_to_projection(FANO, [], 2, k_max=1) == (frozenset(), 0)
    assert strip_to_projection(uniform(2, 4), [], 2, k_max=1) is None


def test_certificate_validation_names_invariant():
    with pytest.raises(CertificateError, match="rank at least 2"):
        project(FANO, ["free", "free"])
