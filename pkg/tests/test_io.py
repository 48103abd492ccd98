import pytest

from matgrow import io
from matgrow.errors import CertificateError
from matgrow.geometry import pg, principal_cut, project, random_certificate
from matgrow.gf import FormatError
from matgrow.matroid import direct_sum, flats, relabel, same_independent_sets, uniform
from matgrow.modsum import SumSpec
from matgrow.projection import density_params, find_stack

FANO = pg(3, 2)


def same(M, N):
    return M.n == N.n and all(M.r(X) == N.r(X) for X in range(1 << M.n))


@pytest.mark.parametrize("M", [FANO, uniform(2, 4), uniform(3, 6)], ids=repr)
def test_matroid_round_trip(M):
    text = io.format_matroid(M, "m")
    assert same(io.parse_matroid(text), M)


def test_linear_block_layout():
    text = io.format_matroid(FANO, "fano")
    assert text.splitlines()[:3] == ["matroid fano", "type linear", "q 2 rows 3 cols 7"]


@pytest.mark.parametrize(
    "cert",
    [
        random_certificate(2, 1, 3, seed=1),
        random_certificate(3, 2, 3, seed=4),
        project(FANO, [principal_cut(sorted(flats(FANO, 2)[0]))]),
    ],
    ids=["q2k1", "q3k2", "line"],
)
def test_certificate_round_trip(cert):
    back = io.parse_certificate(io.format_certificate(cert))
    assert back.k == cert.k and back.q == cert.q and back.seed == cert.seed
    assert density_params(back) == density_params(cert)


def test_certificate_with_wrong_projection_rejected():
    cert = project(FANO, [principal_cut(sorted(flats(FANO, 2)[0]))])
    head = io.format_certificate(cert).split("matroid projected")[0]
    bad = head + io.format_matroid(uniform(2, cert.projected.n), "projected")
    with pytest.raises(CertificateError):
        io.parse_certificate(bad)


def test_explicit_block_errors_have_positions():
    text = "matroid bad\ntype explicit\nrank 2\nelements 3\nbases\n0 7\n"
    with pytest.raises(FormatError) as err:
        io.parse_matroid(text)
    assert err.value.line == 6 and err.value.col == 2


def test_basis_exchange_failure_is_format_error():
    text = "matroid bad\ntype explicit\nrank 2\nelements 4\nbases\n0 1\n2 3\n"
    with pytest.raises(FormatError, match="basis exchange"):
        io.parse_matroid(text)
    M = io.parse_matroid(text, validate=False)
    assert M.n == 4


def test_unknown_type():
    with pytest.raises(FormatError, match="unknown matroid type"):
        io.parse_matroid("matroid x\ntype weird\n")


def test_class_files(tmp_path):
    (tmp_path / "f.mtd").write_text(io.format_matroid(FANO, "fano"))
    spec = io.parse_class("fields 2\nexcluded U(2,4) f.mtd\nbudget nodes=1e4\n", tmp_path)
    assert spec.fields == (2,) and len(spec.excluded) == 2 and spec.budget == 10000
    assert same(spec.excluded[1], FANO)
    assert io.parse_class(io.format_class(spec), tmp_path).names == spec.names
    with pytest.raises(FormatError) as err:
        io.parse_class("fields two\n")
    assert (err.value.line, err.value.col) == (1, 2)


def test_builtin_names():
    assert io.builtin_matroid("PG(2,2)").n == 7
    assert io.builtin_matroid("AG(2,3)").n == 9
    assert io.builtin_matroid("U(2,5)").n == 5
    assert io.builtin_matroid("fano.mtd") is None


def test_sum_round_trip():
    A = relabel(FANO, {x: ("a", x) for x in FANO.labels})
    B = relabel(FANO, {x: ("a", x) if x == 0 else ("b", x) for x in FANO.labels})
    spec = io.parse_sum(io.format_sum(SumSpec(A, B)))
    assert len(spec.shared) == 1
    assert same_independent_sets(spec.left, io.indexed(A))


def test_density_round_trip():
    rep = density_params(random_certificate(3, 1, 3, seed=2))
    assert io.parse_density(io.format_density(rep)) == rep


def test_stack_round_trip():
    D = direct_sum(uniform(2, 4), uniform(2, 4))
    w = find_stack(D, 2, 2, 2)
    back = io.parse_stack(io.format_stack(D, w), D)
    assert back == w
    assert io.parse_stack(io.format_stack(D, None), D) is None
