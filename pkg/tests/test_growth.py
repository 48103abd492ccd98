import pytest
from hypothesis import given, strategies as st

from matgrow.classes import ClassSpec
from matgrow.geometry import pg
from matgrow.growth import (
    GrowthProfile,
    dq_bound,
    dq_compare,
    grf_formula,
    growth_table,
    h_exhaustive,
    in_dq,
    kd_search,
    profile_line,
)
from matgrow.matroid import MatroidError, is_isomorphic, uniform

BINARY = ClassSpec(fields=[2])
NO_U24 = ClassSpec(excluded=[uniform(2, 4)], names=("U(2,4)",))


@pytest.mark.parametrize("q,k,d,n,value", [(2, 0, 0, 3, 7), (2, 1, 1, 3, 13), (3, 0, 0, 2, 4)])
def test_formula_examples(q, k, d, n, value):
    assert grf_formula(q, k, d, n) == value


def test_formula_outside_dq():
    with pytest.raises(MatroidError):
        grf_formula(2, 1, 2, 3)
    with pytest.raises(MatroidError):
        GrowthProfile(2, 0, 1)


def test_dq_bound_values():
    assert [dq_bound(2, k) for k in range(4)] == [0, 1, 5, 21]
    assert dq_bound(3, 1) == 1 and dq_bound(3, 2) == 10


def test_order_examples():
    assert dq_compare((0, 0), (1, 5)) == -1
    assert dq_compare((1, 2), (1, 0)) == -1
    assert dq_compare((1, 1), (1, 1)) == 0


pairs = st.tuples(st.integers(0, 3), st.integers(0, 20))


@given(pairs, pairs, pairs)
def test_order_is_total(a, b, c):
    assert dq_compare(a, b) == -dq_compare(b, a)
    assert (dq_compare(a, b) == 0) == (a == b)
    if dq_compare(a, b) <= 0 and dq_compare(b, c) <= 0:
        assert dq_compare(a, c) <= 0


@given(st.sampled_from([2, 3, 4]), st.integers(0, 3), st.integers(1, 6))
def test_formula_monotone_in_order(q, k, n):
    # a larger (k, -d) never gives a smaller count once n is large enough
    for d in range(dq_bound(q, k)):
        assert in_dq(q, k, d + 1)
        assert grf_formula(q, k, d, n) - grf_formula(q, k, d + 1, n) == q


def test_binary_h_values():
    for n in (1, 2, 3):
        h = h_exhaustive(BINARY, n)
        assert h.exact and h.value == 2**n - 1
        assert is_isomorphic(h.witnesses[0], pg(n, 2)) is not None


def test_no_u24_small_ranks():
    assert h_exhaustive(NO_U24, 2).value == 3
    h = h_exhaustive(NO_U24, 3)
    assert h.exact and h.value == 7
    assert any(is_isomorphic(W, pg(3, 2)) is not None for W in h.witnesses)


def test_truncated_search_is_flagged():
    h = h_exhaustive(NO_U24, 3, max_nodes=1)
    assert not h.exact


def test_kd_search_binary():
    rep = kd_search(BINARY, 3, k_max=1)
    assert (rep.profile.k, rep.profile.d) == (0, 0) and not rep.truncated
    assert h_exhaustive(BINARY, 3).value >= rep.profile.h(3)


def test_kd_search_ternary_line():
    rep = kd_search(ClassSpec(fields=[3]), 2, k_max=0)
    assert (rep.profile.k, rep.profile.d) == (0, 0)
    assert is_isomorphic(rep.witnesses[0].projected, pg(2, 3)) is not None


def test_kd_search_k0_without_geometry():
    # PG(2,2) is excluded, so no k = 0 witness exists in rank 3
    spec = ClassSpec(fields=[2], excluded=[pg(3, 2)], names=("PG(2,2)",))
    with pytest.raises(MatroidError, match="no base field"):
        kd_search(spec, 3, k_max=0)
    rep = kd_search(spec, 3, k_max=0, q=2)
    assert rep.profile is None


def test_reports():
    table, exact = growth_table(BINARY, [1, 2, 3], GrowthProfile(2, 0, 0))
    assert exact
    lines = table.splitlines()
    assert lines[0] == "n  h(n)  formula(n)  match"
    assert lines[3] == "3  7  7  match"
    assert profile_line(GrowthProfile(2, 0, 0), True) == "profile q=2 k=0 d=0 exact=true"
    assert profile_line(None, False).startswith("profile q=none")
