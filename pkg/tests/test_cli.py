import pytest

from matgrow import io
from matgrow.cli import main
from matgrow.matroid import LinearMatroid


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MATGROW_BUDGET", raising=False)
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_pg(workdir, capsys):
    code, _, _ = run(capsys, "construct", "pg", "-n", "3", "-q", "2", "-o", "fano.mtd")
    assert code == 0
    M = io.read_matroid(workdir / "fano.mtd")
    assert M.n == 7 and M.rank == 3
    assert "cols 7" in (workdir / "fano.mtd").read_text()


def test_minor_none(workdir, capsys):
    run(capsys, "construct", "pg", "-n", "3", "-q", "2", "-o", "fano.mtd")
    run(capsys, "construct", "uniform", "-r", "2", "-n", "4", "-o", "u24.mtd")
    code, out, _ = run(capsys, "minor", "--host", "fano.mtd", "--pattern", "u24.mtd")
    assert code == 0 and out.strip() == "none"
    code, out, _ = run(capsys, "minor", "--host", "u24.mtd", "--pattern", "u24.mtd")
    assert code == 0 and out.startswith("contract")


def test_growth_binary(workdir, capsys):
    (workdir / "binary.cls").write_text("fields 2\n")
    code, out, _ = run(capsys, "growth", "--class", "binary.cls", "--rank", "3")
    assert code == 0
    assert out.splitlines()[0] == "h(3)=7 formula=7 match"
    assert out.splitlines()[-1] == "profile q=2 k=0 d=0 exact=true"


def test_kdsearch(workdir, capsys):
    (workdir / "binary.cls").write_text("fields 2\n")
    code, out, _ = run(capsys, "kdsearch", "--class", "binary.cls", "--rank", "3", "--k-max", "1")
    assert code == 0 and "truncated false" in out


def test_density_and_cert(workdir, capsys):
    code, _, _ = run(capsys, "construct", "random-cert", "-q", "2", "-k", "1", "-r", "3", "--seed", "5", "-o", "c.cert")
    assert code == 0
    code, out, _ = run(capsys, "density", "--cert", "c.cert")
    rep = io.parse_density(out)
    assert rep.eps + 2 * rep.d == 15


def test_random_cert_needs_seed(workdir, capsys):
    code, _, err = run(capsys, "construct", "random-cert", "-q", "2", "-k", "1", "-r", "3")
    assert code == 1 and "seed" in err


def test_represent(workdir, capsys):
    run(capsys, "construct", "uniform", "-r", "2", "-n", "4", "-o", "u24.mtd")
    assert run(capsys, "represent", "--matroid", "u24.mtd", "-q", "2")[1].strip() == "not representable"
    code, out, _ = run(capsys, "represent", "--matroid", "u24.mtd", "-q", "3", "--matrix")
    assert code == 0 and out.startswith("representable\nq 3 rows 2 cols 4")


def test_stack(workdir, capsys):
    run(capsys, "construct", "uniform", "-r", "2", "-n", "4", "-o", "u24.mtd")
    code, out, _ = run(capsys, "stack", "--matroid", "u24.mtd", "-q", "2", "-t", "2", "-k", "1")
    assert code == 0 and out.splitlines() == ["stack q 2 k 1 t 2", "layer 0 1 2 3"]


def test_sum(workdir, capsys):
    fano = io.format_matroid(io.builtin_matroid("PG(2,2)"), "left")
    right = fano.replace("matroid left", "matroid right")
    (workdir / "s.sum").write_text(fano + right + "shared 0:0\n")
    code, out, _ = run(capsys, "sum", "--spec", "s.sum", "-o", "out.mtd")
    assert code == 0 and out.strip() == "elements 13 rank 5"
    assert (workdir / "out.mtd").exists()


def test_parse_error_exit_code(workdir, capsys):
    (workdir / "bad.mtd").write_text("matroid x\ntype linear\nq 2 rows 1 cols 2\n0 9\n")
    code, _, err = run(capsys, "represent", "--matroid", "bad.mtd", "-q", "2")
    assert code == 1 and "line 4, column 2" in err


def test_verify_unknown_suite(workdir, capsys):
    code, _, err = run(capsys, "verify", "nosuch")
    assert code == 1 and "unknown suite" in err


def test_verify_corrupted_kernel_input(workdir, capsys):
    (workdir / "bad.mtd").write_text("matroid bad\ntype explicit\nrank 2\nelements 4\nbases\n0 1\n2 3\n")
    code, out, _ = run(capsys, "verify", "kernel-axioms", "--input", "bad.mtd", "--dump-dir", str(workdir))
    assert code == 1
    assert "FAIL" in out and "X=" in out
    assert (workdir / "matgrow-kernel-axioms-failure.txt").exists()


def test_verify_tagged_suite_name(workdir, capsys):
    code, out, _ = run(capsys, "verify", "density-3.2", "--seeds", "3")
    assert code == 0 and out.startswith("density: pass")


def test_budget_exhaustion_exit_code(workdir, capsys, monkeypatch):
    fano = io.builtin_matroid("PG(2,2)")
    (workdir / "nf.mtd").write_text(io.format_matroid(LinearMatroid(3, fano.matrix), "nonfano"))
    run(capsys, "construct", "pg", "-n", "4", "-q", "2", "-o", "pg.mtd")
    code, _, err = run(capsys, "--budget", "3", "minor", "--host", "pg.mtd", "--pattern", "nf.mtd")
    assert code == 2 and "budget" in err
    monkeypatch.setenv("MATGROW_BUDGET", "3")
    assert run(capsys, "minor", "--host", "pg.mtd", "--pattern", "nf.mtd")[0] == 2


def test_verify_growth_with_budget(workdir, capsys):
    code, out, _ = run(capsys, "verify", "growth-7.1", "--budget", "1e6")
    assert code in (0, 2)
    if code == 0:
        assert out.startswith("growth: pass")
