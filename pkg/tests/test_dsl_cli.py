import json
from pathlib import Path

import pytest

from subtess import logic as lg
from subtess import presburger as pb
from subtess.automata import Alphabet, is_subword
from subtess.cli import check_job, cross_validate, main, oracle, run
from subtess.dsl import ParseError, parse_formula, parse_job
from subtess.regex import regex_dfa

AB = Alphabet(("a", "b"))
ANTICHAIN = 'theory sigma1; alphabet ab; language re"(ab|ba)*"; sentence E x. E y. (!(x << y) & !(y << x));'


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# --- parsing ------------------------------------------------------------------

def test_parse_antichain_job():
    job = parse_job(ANTICHAIN)
    assert job.theory == "sigma1"
    assert job.alphabet == AB
    assert job.language == regex_dfa("(ab|ba)*", AB)
    assert lg.prenex_existential(job.sentence)[0] == ["x", "y"]


def test_fragment_errors():
    with pytest.raises(ParseError, match="third variable"):
        parse_job("theory cmod2; alphabet ab; sentence E x. E y. E z. x << z & y << z;")
    with pytest.raises(ParseError, match="counting quantifier not in Σ₁"):
        parse_job("theory sigma1; alphabet ab; sentence E[0 mod 2] x. x << x;")
    with pytest.raises(ParseError, match="universal quantifier"):
        parse_job("theory sigma1; alphabet ab; sentence A x. x << x;")
    with pytest.raises(ParseError, match="sigma1c"):
        parse_job('theory sigma1; alphabet ab; sentence E x. w"a" << x;')
    with pytest.raises(ParseError, match="not in the domain"):
        parse_job('theory sigma1c; alphabet ab; language re"(ab)*"; sentence E x. w"a" << x;')


def test_positioned_errors():
    with pytest.raises(ParseError) as e:
        parse_job("theory cmod2; alphabet ab;\nsentence E x. x <<< x;")
    assert (e.value.line, e.value.column) == (2, 19)
    with pytest.raises(ParseError) as e:
        parse_job("theory nope; alphabet ab; sentence E x. x << x;")
    assert e.value.column == 8
    with pytest.raises(ParseError, match="missing 'sentence'"):
        parse_job("theory cmod2; alphabet ab;")
    with pytest.raises(ParseError, match="bad regex"):
        parse_job('theory cmod2; alphabet ab; language re"(a"; sentence E x. x << x;')
    with pytest.raises(ParseError, match="unexpected character"):
        parse_job("theory cmod2; alphabet ab; sentence E x. x ~ x;")


def test_formula_syntax():
    phi = parse_formula('E>=2 y. (y <. x | y = w"ab") & !(y in re"a*")', AB, "cmod2")
    assert isinstance(phi, lg.AtLeast) and phi.k == 2
    assert lg.free_vars(phi) == {"x"}
    f = parse_formula("E x <= 9. 2x + y <= 7 & x = 3 (mod 5)", AB, "presburger")
    assert pb.free_vars(f) == {"y"}
    g = parse_formula("E x <= 9. 2*x + y <= 7 & x = 3 mod 5", AB, "presburger")
    for y in range(8):
        assert pb.evaluate(f, {"y": y}, 20) == pb.evaluate(g, {"y": y}, 20) == (y <= 1)


# --- running ------------------------------------------------------------------

def test_run_antichain_ships_incomparable_witnesses():
    v = run(parse_job(ANTICHAIN))
    assert v.result == "true"
    x, y = v.witnesses["x"], v.witnesses["y"]
    L = regex_dfa("(ab|ba)*", AB)
    assert L.accepts(x) and L.accepts(y)
    assert not is_subword(x, y) and not is_subword(y, x)


def test_run_bounded_count():
    job = parse_job('theory bounded; alphabet a; language re"a*"; sentence E[0 mod 2] x. (x << w"aaa");')
    assert run(job).result == "true"
    assert oracle(job, 4) == "true"


def test_run_sigma1c_over_all_words_is_unsupported():
    job = parse_job('theory sigma1c; alphabet ab; sentence E x. w"ab" << x;')
    v = run(job)
    assert v.result == "unsupported-theory" and v.witnesses is None


def test_run_other_routes():
    cm = parse_job('theory cmod2; alphabet ab; sentence E[0 mod 3] y. y << w"ab" & !(y = w"ab");')
    assert run(cm).result == "true"
    pr = parse_job("theory presburger; alphabet a; sentence E x. E y. 2x + y <= 7 & x = 3 (mod 5);")
    assert run(pr).result == "true"
    sc = parse_job('theory sigma1c; alphabet ab; language re"(ab|ba)*"; sentence E x. w"ab" << x & !(w"ba" << x);')
    v = run(sc)
    assert v.result == "true"
    w = v.witnesses["x"]
    assert is_subword("ab", w) and not is_subword("ba", w)


def test_run_is_deterministic():
    texts = [
        ANTICHAIN,
        'theory bounded; alphabet ab; language re"a*b*"; sentence E x. E y. !(x << y) & !(y << x);',
        'theory cmod2; alphabet ab; language re"(ab|ba)*"; sentence A x. E>=2 y. x <. y;',
    ]
    for t in texts:
        assert run(parse_job(t)).to_json() == run(parse_job(t)).to_json()


# --- oracle -------------------------------------------------------------------

def test_oracle_examples():
    assert oracle(parse_job(ANTICHAIN), 8) == "true"
    job = parse_job('theory cmod2; alphabet ab; sentence E[0 mod 3] y. y << w"ab" & !(y = w"ab");')
    assert oracle(job, 2) == "true"
    unbounded = parse_job("theory cmod2; alphabet ab; sentence E x. E[0 mod 2] y. x << y;")
    assert oracle(unbounded, 4) == "unknown"


# --- command line -------------------------------------------------------------

def test_main_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "good.sub", ANTICHAIN)
    assert main(["run", good]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"] == "true"
    bad = write(tmp_path, "bad.sub", "theory sigma1; alphabet ab; sentence E x. x <<")
    assert main(["run", bad]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.sub")]) == 2
    names = " ".join(f"E x{i}." for i in range(6))
    big = write(tmp_path, "big.sub", f"theory sigma1; alphabet ab; language re\"(ab|ba)*\"; sentence {names} x0 << x5;")
    assert main(["run", big]) == 3
    capsys.readouterr()
    assert main(["oracle", good, "--max-len", "8"]) == 0
    assert json.loads(capsys.readouterr().out) == {"result": "true"}


def test_main_basis_option(tmp_path, capsys):
    job = write(tmp_path, "b.sub", 'theory bounded; alphabet ab; language re"(ab)*"; sentence E x. w"abab" << x;')
    assert main(["run", job, "--basis", "ab"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"] == "true" and out["trace"]["basis"] == ["ab"]
    assert main(["run", job, "--basis", "ac"]) == 2


def test_check_job_statuses(tmp_path):
    wrong = write(tmp_path, "wrong.sub", ANTICHAIN + " expect false;")
    entry = check_job(wrong, 8)
    assert entry["status"] == "disagree" and entry["problems"] == ["expectation not met"]
    broken = write(tmp_path, "broken.sub", "theory")
    assert check_job(broken)["status"] == "parse-error"
    names = " ".join(f"E x{i}." for i in range(6))
    big = write(tmp_path, "big.sub", f"theory sigma1; alphabet ab; language re\"(ab|ba)*\"; sentence {names} x0 << x5;")
    assert check_job(big)["status"] == "resource-limit"


def test_cross_validate_empty_and_flagged(tmp_path, capsys):
    assert cross_validate([]) == {"jobs": [], "total": 0, "failures": 0}
    ok = write(tmp_path, "ok.sub", ANTICHAIN + " expect true;")
    wrong = write(tmp_path, "wrong.sub", ANTICHAIN + " expect false;")
    report = cross_validate([ok, wrong], 8)
    assert report["total"] == 2 and report["failures"] == 1
    assert [e["status"] for e in report["jobs"]] == ["ok", "disagree"]
    out = tmp_path / "report.json"
    assert main(["corpus", ok, wrong, "--json", str(out), "--max-len", "8"]) == 1
    assert json.loads(out.read_text())["failures"] == 1
    assert main(["corpus"]) == 0


CORPUS = sorted(str(p) for p in (Path(__file__).parent / "corpus").glob("*.sub"))


def test_shipped_corpus_has_no_failures():
    assert len(CORPUS) >= 60
    theories = {parse_job(Path(p).read_text()).theory for p in CORPUS}
    assert theories == {"cmod2", "sigma1", "sigma1c", "bounded", "presburger"}
    report = cross_validate(CORPUS, workers=4)
    bad = [e for e in report["jobs"] if e["status"] != "ok"]
    assert report["failures"] == 0, bad
    assert all(e["expect"] is not None for e in report["jobs"])
    definite = sum(1 for e in report["jobs"] if e["oracle"] != "unknown")
    assert definite >= 55


def test_large_threshold_hits_the_table_limit(tmp_path):
    job = write(tmp_path, "t.sub", 'theory bounded; alphabet ab; language re"a*b*"; sentence E>=9 x. x << w"aabb";')
    assert main(["run", job]) == 3
