import pytest

from satohurwitz.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_build_then_verify(tmp_path, capsys):
    path = tmp_path / "p.txt"
    assert run(capsys, "point", "build", "--catalog", "laurent-n2", "-S", "12", "-o", str(path))[0] == 0
    assert path.read_text().startswith("# point")
    code, out, _ = run(capsys, "point", "verify", "--point", str(path))
    assert code == 0 and "point_verify: PASS" in out


@pytest.mark.parametrize("catalog", ["perturbed-laurent", "vacuum"])
def test_fail_exit_code(capsys, catalog):
    code, out, _ = run(capsys, "point", "verify", "--catalog", catalog, "-S", "12")
    assert code == 1 and "FAIL" in out


def test_inconclusive_exit_code(capsys):
    code, out, _ = run(capsys, "pic", "stabilizer", "--catalog", "laurent-n2", "-S", "4")
    assert code == 2 and "INCONCLUSIVE" in out
    code, _, err = run(capsys, "tangent", "transitivity", "--catalog", "laurent-n2", "-S", "4")
    assert code == 2 and "inconclusive at depth" in err


@pytest.mark.parametrize("argv", [
    ["point", "verify", "--depth", "2", "--catalog", "vacuum"],
    ["nosuchcommand"],
    ["tau", "--catalog", "laurent-n2", "-S", "12", "-D", "2", "--window", "1"],
    ["point", "verify", "--point", "/nonexistent/p.txt"],
    ["selftest", "--only", "no-such-check"],
])
def test_usage_exit_code(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 3


def test_parse_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("garbage\n")
    code, _, err = run(capsys, "point", "verify", "--point", str(bad))
    assert code == 4 and "parse error" in err


def test_tau_is_deterministic(capsys):
    argv = ("tau", "--catalog", "laurent-n2", "-S", "12", "-D", "2")
    first = run(capsys, *argv)
    assert first[0] == 0
    assert "1 + -1 * t[1,1,1] * t[2,1,1]" in first[1]
    assert run(capsys, *argv) == first


def test_ekp_table(capsys):
    code, out, _ = run(capsys, "ekp", "--catalog", "laurent-n2", "-S", "12", "-D", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[2] == "a,b,c,d\tverdict\twitness\tcoefficient\tD\tS"
    assert all(ln.split("\t")[1] == "zero" for ln in lines[3:] if ln)


def test_ekp_merge_branches_fails_on_elliptic(capsys):
    code, out, _ = run(capsys, "ekp", "--catalog", "hyperelliptic", "-S", "16", "-D", "2", "--merge-branches")
    assert code == 1 and "nonzero" in out


def test_perp_and_pic_files(tmp_path, capsys):
    perp = tmp_path / "perp.txt"
    assert run(capsys, "perp", "--catalog", "laurent-n2", "-S", "12", "-o", str(perp))[0] == 0
    assert "E = [[2],[2]]" in perp.read_text()
    pic = tmp_path / "pic.txt"
    code, out, _ = run(capsys, "pic", "build", "--catalog", "laurent-n2", "--divisor", "1:1", "-S", "12", "-o", str(pic))
    assert code == 0 and "chi = 2" in out
    assert run(capsys, "pic", "stabilizer", "--pic", str(pic))[0] == 0


def test_tangent_commands(capsys):
    code, out, _ = run(capsys, "tangent", "transitivity", "--catalog", "laurent-n2", "-S", "20")
    assert code == 0 and "rank = 13" in out and "dimension = 13" in out
    code, _, _ = run(capsys, "tangent", "transitivity", "--catalog", "laurent-n2", "-S", "20", "--no-trace")
    assert code == 1


def test_selftest_subset(capsys):
    code, out, _ = run(capsys, "selftest", "--only", "trace-law,lie-trace")
    assert code == 0
    rows = [ln.split() for ln in out.splitlines()[1:]]
    assert [(r[0], r[1]) for r in rows] == [("PASS", "trace-law"), ("PASS", "lie-trace")]


def test_selftest_at_depth_20(capsys):
    # the whole suite with the depth and time degree overridden
    code, out, _ = run(capsys, "selftest", "--depth", "20", "--time-degree", "3")
    rows = [ln.split() for ln in out.splitlines()[1:] if ln and not ln.startswith(" ")]
    assert len(rows) == 12 and all(r[0] == "PASS" for r in rows), out
    assert code == 0
