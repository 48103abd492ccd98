import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matgrow.geometry import ag, pg
from matgrow.gf import field_make
from matgrow.matroid import (
    ExplicitMatroid,
    LinearMatroid,
    MatroidError,
    basis_exchange_violation,
    bits,
    check_rank_axioms,
    circuits_masks,
    closure,
    direct_sum,
    epsilon,
    flats,
    is_isomorphic,
    is_modular_pair,
    is_simple,
    is_skew,
    is_weakly_round,
    local_conn,
    materialize,
    minorize,
    rank,
    relabel,
    simplify,
    uniform,
)
from oracles import brute_epsilon, brute_isomorphic, span_rank

FANO = pg(3, 2)
PG32 = pg(4, 2)


def _lines(M):
    return [sorted(F, key=repr) for F in flats(M, 2)]


@st.composite
def linear_matroids(draw, max_cols=7):
    q = draw(st.sampled_from([2, 3, 4]))
    rows = draw(st.integers(1, 3))
    cols = draw(st.integers(1, max_cols))
    A = draw(st.lists(st.lists(st.integers(0, q - 1), min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    return LinearMatroid(q, np.array(A))


# -- rank, closure and minors ---------------------------------------------------


def test_rank_examples():
    line = _lines(FANO)[0]
    assert len(line) == 3 and rank(FANO, line) == 2
    assert rank(FANO, []) == 0
    assert rank(PG32, PG32.labels) == 4


def test_closure_examples():
    line = _lines(FANO)[0]
    assert closure(FANO, line[:2]) == frozenset(line)
    U34 = uniform(3, 4)
    assert closure(U34, [0, 1]) == frozenset({0, 1})


def test_minorize_overlap_is_error():
    with pytest.raises(MatroidError):
        minorize(FANO, [0], [0])


def test_unknown_label():
    with pytest.raises(MatroidError):
        rank(FANO, ["nope"])


@settings(max_examples=80, deadline=None)
@given(linear_matroids())
def test_linear_rank_matches_span(M):
    F = field_make(M.field.q)
    for X in range(1 << M.n):
        cols = [M.matrix[:, i] for i in bits(X)]
        assert M.r(X) == span_rank(F, cols)


@settings(max_examples=60, deadline=None)
@given(linear_matroids(), st.data())
def test_minor_rank_formula(M, data):
    C = data.draw(st.sets(st.sampled_from(M.labels)))
    rest = [x for x in M.labels if x not in C]
    D = data.draw(st.sets(st.sampled_from(rest))) if rest else set()
    N = minorize(M, C, D)
    cm = M.mask(C)
    assert set(N.labels) == set(M.labels) - set(C) - set(D)
    for X in range(1 << N.n):
        Y = M.mask(N.elems(X))
        assert N.r(X) == M.r(Y | cm) - M.r(cm)


@settings(max_examples=60, deadline=None)
@given(linear_matroids())
def test_rank_axioms_and_closure(M):
    assert check_rank_axioms(M) is None
    for X in range(1 << M.n):
        c = M.cl(X)
        assert c & X == X and M.cl(c) == c and M.r(c) == M.r(X)


@settings(max_examples=50, deadline=None)
@given(linear_matroids())
def test_simplify_and_epsilon(M):
    S, smap = simplify(M)
    assert is_simple(S)
    assert S.n == epsilon(M) == brute_epsilon(M)
    assert S.rank == M.rank
    assert sum(len(c) for c in smap.classes) + len(smap.loops) == M.n


def test_simplify_examples():
    assert simplify(FANO)[0] is FANO
    M = LinearMatroid(2, np.array([[1, 0, 0], [0, 1, 0]]))
    S, smap = simplify(M)
    assert S.n == 2 and smap.loops == {2}
    C = minorize(FANO, [0])
    S, smap = simplify(C)
    assert S.n == 3 and all(len(c) == 2 for c in smap.classes)


def test_epsilon_examples():
    assert epsilon(FANO) == 7
    assert epsilon(ag(3, 2)) == 4
    assert epsilon(LinearMatroid(2, np.zeros((2, 3), dtype=int))) == 0


def test_flats_examples():
    lines = flats(FANO, 2)
    assert len(lines) == 7 and all(len(L) == 3 for L in lines)
    assert flats(FANO, 3) == [FANO.ground]
    assert len(flats(PG32, 1)) == 15


def _skew_lines_pg32():
    lines = flats(PG32, 2)
    a = lines[0]
    b = next(L for L in lines if rank(PG32, a | L) == 4)
    return a, b


def test_local_conn_and_skew():
    la, lb = _lines(FANO)[:2]
    assert local_conn(FANO, la, lb) == 1
    assert local_conn(FANO, la, la) == 2
    a, b = _skew_lines_pg32()
    assert local_conn(PG32, a, b) == 0
    assert is_skew(PG32, [a, b])
    assert not is_skew(FANO, [la, lb])
    assert is_skew(FANO, [la])


def test_modular_pairs():
    la, lb = _lines(FANO)[:2]
    assert is_modular_pair(FANO, la, lb)
    assert not is_modular_pair(uniform(3, 4), [0, 1], [2, 3])
    assert is_modular_pair(uniform(3, 4), [0], [0, 1])


def test_weak_roundness():
    assert is_weakly_round(FANO)
    assert not is_weakly_round(direct_sum(uniform(2, 3), uniform(2, 3)))
    assert is_weakly_round(uniform(1, 1))


# -- isomorphism ---------------------------------------------------------------


def non_fano():
    return LinearMatroid(3, FANO.matrix)


def test_isomorphism_examples():
    perm = [3, 6, 0, 2, 5, 1, 4]
    P = LinearMatroid(2, FANO.matrix[:, perm])
    phi = is_isomorphic(FANO, P)
    assert phi is not None
    for X in range(1 << 7):
        Y = P.mask(phi[x] for x in FANO.elems(X))
        assert FANO.r(X) == P.r(Y)
    assert is_isomorphic(uniform(2, 4), uniform(3, 4)) is None
    assert is_isomorphic(FANO, non_fano()) is None
    assert not brute_isomorphic(FANO, non_fano())


@settings(max_examples=40, deadline=None)
@given(linear_matroids(max_cols=5), linear_matroids(max_cols=5))
def test_isomorphism_matches_brute_force(M, N):
    assert (is_isomorphic(M, N) is not None) == brute_isomorphic(M, N)


@settings(max_examples=30, deadline=None)
@given(linear_matroids(max_cols=6), st.randoms())
def test_isomorphic_to_relabelled_copy(M, rnd):
    perm = list(range(M.n))
    rnd.shuffle(perm)
    P = LinearMatroid(M.field, M.matrix[:, perm])
    assert is_isomorphic(M, P) is not None


# -- explicit matroids -----------------------------------------------------------


def test_explicit_from_bases_and_table():
    U = uniform(2, 4)
    E = materialize(U)
    assert check_rank_axioms(E) is None
    B = ExplicitMatroid(4, bases=E.bases_masks)
    assert all(B.r(X) == U.r(X) for X in range(16))


def test_bad_basis_family_rejected():
    bases = [0b0011, 0b1100]
    assert basis_exchange_violation(bases) is not None
    with pytest.raises(MatroidError):
        ExplicitMatroid(4, bases=bases)
    M = ExplicitMatroid(4, bases=bases, validate=False)
    assert check_rank_axioms(M) is not None


def test_circuits_of_fano():
    circ = circuits_masks(FANO)
    sizes = sorted(bin(c).count("1") for c in circ)
    # 7 lines and 7 four-point circuits (complements of lines)
    assert sizes == [3] * 7 + [4] * 7


def test_relabel_keeps_rank():
    R = relabel(FANO, {x: ("p", x) for x in FANO.labels})
    assert R.labels[0] == ("p", 0)
    assert all(R.r(X) == FANO.r(X) for X in range(128))


def test_uniform_bounds():
    with pytest.raises(MatroidError):
        uniform(3, 2)
