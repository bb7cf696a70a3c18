import itertools
import random
import time

import pytest

from subtess import automata as fa
from subtess import logic as lg
from subtess import presburger as pb
from subtess.automata import Alphabet, is_cover, is_incomparable, is_subword
from subtess.bounded import BoundedBasis, canonical_formula, decide_bounded, g_preimage_formula, subword_formula
from subtess.cmod2 import decide_cmod2
from subtess.dsl import parse_formula
from subtess.oracle import brute_force_eval
from subtess.regex import regex_dfa
from subtess.relations import ambiguous_example, check_unambiguous_upto, incomparability, subword_relations
from subtess.sigma1 import (
    Preorder, check_bounded, check_nonnegligible, decide_sigma1_constants, is_prefix_maximal,
    is_primitive, minimal_elements, primitive_pair, witness_words,
)
from subtess.weighted import INF, NAT, Modular, Saturating, count_at_least, count_mod, counting_function

AB = Alphabet(("a", "b"))
ALT = regex_dfa("(ab|ba)*", AB)


def criterion(number, seconds):
    """Time the check, print one PASS/FAIL line and fail on error or overrun."""
    def wrap(fn):
        def run(capsys):
            t0 = time.perf_counter()
            error = None
            try:
                fn()
            except AssertionError as e:
                error = e
            elapsed = time.perf_counter() - t0
            ok = error is None and elapsed < seconds
            reason = "" if ok else (f" ({error})" if error else f" (limit {seconds}s)")
            with capsys.disabled():
                print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {elapsed:.2f}s{reason}")
            if error is not None:
                raise error
            assert elapsed < seconds, f"criterion {number} took {elapsed:.1f}s, limit {seconds}s"
        run.__name__ = fn.__name__
        return run
    return wrap


@criterion(1, 1)
def test_criterion_01_worked_examples():
    assert is_subword("aa", "babbba")
    assert is_cover("aa", "aba")
    assert is_incomparable("aba", "aabb")


@criterion(2, 30)
def test_criterion_02_unambiguous_presentations():
    rel = subword_relations(AB)
    for R in (rel["cover"], rel["proper_minus_cover"], incomparability(AB)):
        assert check_unambiguous_upto(R, 4).ok
    report = check_unambiguous_upto(ambiguous_example(), 4)
    assert not report.ok
    assert ("aba", "a", 2) in report.counterexamples


@criterion(3, 120)
def test_criterion_03_counting_engine():
    cover = subword_relations(AB)["cover"]
    sigma_star = fa.universal(AB)
    count = counting_function(cover, sigma_star)
    at_least = count_at_least(cover, sigma_star, 3)
    even = count_mod(cover, sigma_star, 0, 2)
    mismatches = 0
    for u in fa.all_words(AB, 5):
        brute = sum(1 for v in fa.all_words(AB, len(u) + 1) if is_cover(u, v))
        mismatches += count.eval(u) != brute
        mismatches += at_least.accepts(u) != (brute >= 3)
        mismatches += even.accepts(u) != (brute % 2 == 0)
    assert mismatches == 0


def _law_violations(sr, elems):
    bad = 0
    for x in elems:
        bad += sr.add(x, sr.zero) != x or sr.mul(x, sr.one) != x or sr.mul(x, sr.zero) != sr.zero
    for x, y in itertools.product(elems, repeat=2):
        bad += sr.add(x, y) != sr.add(y, x) or sr.mul(x, y) != sr.mul(y, x)
    for x, y, z in itertools.product(elems, repeat=3):
        bad += sr.add(sr.add(x, y), z) != sr.add(x, sr.add(y, z))
        bad += sr.mul(sr.mul(x, y), z) != sr.mul(x, sr.mul(y, z))
        bad += sr.mul(x, sr.add(y, z)) != sr.add(sr.mul(x, y), sr.mul(x, z))
    return bad


@criterion(4, 10)
def test_criterion_04_semiring_laws():
    assert _law_violations(NAT, [0, 1, 2, 3, 7, INF]) == 0
    for k in range(5):
        assert _law_violations(Saturating(k), Saturating(k).elements()) == 0
    for q in range(1, 5):
        assert _law_violations(Modular(q), Modular(q).elements()) == 0
    z6 = Modular(6)
    assert z6.add(4, 2) == 6 and z6.mul(3, 2) == 6


# --- criterion 5: two-variable counting logic against brute force -------------

def _cmod2_atom(rng, vars_, consts):
    kind = rng.choice(["sub", "cover", "eq", "in"])
    if kind == "in":
        return lg.In(lg.Var(rng.choice(vars_)), regex_dfa(rng.choice(["a*", "(ab)*", "(a|b)*b", "b*a"]), AB), "K")
    terms = [lg.Var(v) for v in vars_] + [lg.Word(rng.choice(consts))]
    return {"sub": lg.Sub, "cover": lg.Cover, "eq": lg.Eq}[kind](rng.choice(terms), rng.choice(terms))


def _cmod2_body(rng, vars_, consts, depth=2):
    if depth == 0 or rng.random() < 0.4:
        return _cmod2_atom(rng, vars_, consts)
    a, b = _cmod2_body(rng, vars_, consts, depth - 1), _cmod2_body(rng, vars_, consts, depth - 1)
    return rng.choice([lg.conj(a, b), lg.disj(a, b), lg.conj(lg.neg(a), b)])


def _cmod2_quantify(rng, var, guard, body):
    kind = rng.choice(["E", "A", "atleast", "mod"])
    if kind == "E":
        return lg.Exists(var, lg.conj(guard, body))
    if kind == "A":
        return lg.Forall(var, lg.disj(lg.neg(guard), body))
    if kind == "atleast":
        return lg.AtLeast(var, rng.randint(0, 4), lg.conj(guard, body))
    q = rng.randint(2, 3)
    return lg.CountMod(var, rng.randint(0, q - 1), q, lg.conj(guard, body))


def _cmod2_sentence(rng, consts):
    # every quantifier is guarded by a constant or by the outer variable
    X, Y = lg.Var("x"), lg.Var("y")
    guard_y = rng.choice([lg.Sub(Y, lg.Word(rng.choice(consts))), lg.Sub(Y, X), lg.Cover(Y, X)])
    inner = _cmod2_quantify(rng, "y", guard_y, _cmod2_body(rng, ["x", "y"], consts))
    body = rng.choice([inner, lg.conj(_cmod2_body(rng, ["x"], consts, 1), inner)])
    return _cmod2_quantify(rng, "x", lg.Sub(X, lg.Word(rng.choice(consts))), body)


def _cmod2_corpus(L, n, seed):
    consts = [w for w in fa.enumerate_upto(L, 4)] if L is not None else ["", "a", "ab", "ba", "aab", "bab"]
    rng = random.Random(seed)
    out = []
    while len(out) < 40:
        phi = _cmod2_sentence(rng, consts)
        want = brute_force_eval(phi, L, n, AB)
        if want is not None:
            out.append((phi, want))
    return out


@criterion(5, 300)
def test_criterion_05_cmod2_against_brute_force():
    text = 'E[0 mod 3] y. y << w"ab" & !(y = w"ab")'
    phi = parse_formula(text, AB, "cmod2")
    assert brute_force_eval(phi, None, 2, AB) is True
    assert decide_cmod2(phi, sigma=AB) is True
    disagreements = 0
    for L, n, seed in ((None, 3, 51), (ALT, 6, 52)):
        corpus = _cmod2_corpus(L, n, seed)
        assert len(corpus) == 40
        assert {want for _, want in corpus} == {True, False}
        for phi, want in corpus:
            disagreements += decide_cmod2(phi, L, AB) != want
    assert disagreements == 0


# --- criterion 6: unbounded languages realise every finite poset --------------

def _posets(n):
    for bits in itertools.product((False, True), repeat=n * n - n):
        it = iter(bits)
        leq = [[True if i == j else next(it) for j in range(n)] for i in range(n)]
        transitive = all(not (leq[i][j] and leq[j][k]) or leq[i][k] for i, j, k in itertools.product(range(n), repeat=3))
        antisymmetric = all(not (leq[i][j] and leq[j][i]) for i in range(n) for j in range(n) if i != j)
        if transitive and antisymmetric:
            yield leq


@criterion(6, 300)
def test_criterion_06_posets_in_an_unbounded_language():
    shape = check_bounded(ALT)
    assert not shape.is_bounded
    x, u, v, y = primitive_pair(shape)
    assert is_primitive(u + v)
    counts = []
    for n in range(1, 5):
        count = 0
        for leq in _posets(n):
            words = witness_words(Preorder(n, tuple(map(tuple, leq))), x, u, v, y, ALT)
            assert all(ALT.accepts(w) for w in words)
            for i, j in itertools.product(range(n), repeat=2):
                assert is_subword(words[i], words[j]) == leq[i][j]
            count += 1
        counts.append(count)
    # labelled posets on 1..4 elements
    assert counts == [1, 3, 19, 219]


@criterion(7, 60)
def test_criterion_07_right_embeddings():
    u, v = "a", "b"
    uv = u + v
    for ell in (0, 1):
        n = len(uv) + ell + 3
        assert is_prefix_maximal(uv * n, v + uv * n, AB)
        assert is_prefix_maximal(uv * ell + v + uv * (n - ell - 1), uv * n, AB)
        assert is_prefix_maximal(uv * (1 + ell) + v + uv * (n - ell - 2), v + uv * n, AB)
    rng = random.Random(70)
    pairs = [(s, t) for s in fa.all_words(AB, 3) for t in fa.all_words(AB, 5) if is_prefix_maximal(s, t, AB)]
    for _ in range(200):
        (s, t), (s2, t2) = rng.choice(pairs), rng.choice(pairs)
        assert is_prefix_maximal(s + s2, t + t2, AB)


# --- criterion 8: existential theory with constants ---------------------------

def _sigma1c_matrix(rng, names, consts, depth=2):
    if depth == 0 or rng.random() < 0.4:
        terms = [lg.Var(v) for v in names] + [lg.Word(rng.choice(consts))]
        atom = rng.choice([lg.Sub, lg.Eq])(rng.choice(terms), rng.choice(terms))
        return atom if rng.random() < 0.5 else lg.neg(atom)
    parts = [_sigma1c_matrix(rng, names, consts, depth - 1) for _ in range(rng.randint(2, 3))]
    return rng.choice([lg.conj, lg.disj])(*parts)


@criterion(8, 120)
def test_criterion_08_constants_over_a_nonnegligible_language():
    assert check_nonnegligible(ALT)
    assert not check_nonnegligible(regex_dfa("a*b", AB))
    for w in ("ab", "abba"):
        rest = fa.difference(ALT, fa.upward_closure_word(w, AB))
        assert fa.classify(rest)[0] in ("finite", "empty")
    not_below_ab = fa.complement(fa.downward_closure_word("ab", AB))
    assert sorted(minimal_elements(not_below_ab, fa.universal(AB))) == ["aa", "ba", "bb"]
    rng = random.Random(80)
    consts = ["", "ab", "ba", "abba", "baab", "abab"]
    corpus = []
    while len(corpus) < 20:
        names = ["x", "y"][:rng.randint(1, 2)]
        m = _sigma1c_matrix(rng, names, consts)
        m = lg.conj(m, *(lg.Sub(lg.Var(v), lg.Word(rng.choice(consts))) for v in names if rng.random() < 0.6))
        phi = m
        for v in reversed(names):
            phi = lg.Exists(v, phi)
        want = brute_force_eval(phi, ALT, 8)
        if want is not None:
            corpus.append((phi, want))
    assert {want for _, want in corpus} == {True, False}
    for phi, want in corpus:
        assert decide_sigma1_constants(phi, ALT) == want, str(phi)


# --- criterion 9: bounded languages --------------------------------------------

def _tuples(n, total):
    return [m for m in itertools.product(range(total + 1), repeat=n) if sum(m) <= total]


@criterion(9, 300)
def test_criterion_09_bounded_translation():
    for words, rx in ((("a", "b"), "a*b*"), (("ab", "ba"), "(ab)*(ba)*")):
        B = BoundedBasis(words, AB)
        L = regex_dfa(rx, AB)
        xs, ys = ["m0", "m1"], ["n0", "n1"]
        # membership formula against direct membership of g(m)
        for krx in ("(ab)*", "a*", "(ab|ba)*", "b*a", "∅"):
            K = regex_dfa(krx, AB)
            lam = g_preimage_formula(K, B, xs)
            for m in _tuples(2, 6):
                assert pb.evaluate(lam, dict(zip(xs, m)), 0) == K.accepts(B.g(m))
        # subword formula against the subword order on images
        sig = subword_formula(B, xs, ys)
        for m in _tuples(2, 5):
            for k in _tuples(2, 5):
                assert pb.evaluate(sig, {**dict(zip(xs, m)), **dict(zip(ys, k))}, 0) == is_subword(B.g(m), B.g(k))
        # canonical tuples are in bijection with the language
        U = pb.compile_formula(canonical_formula(B, L, xs))
        images = [B.g(m) for m in U.solutions_upto(8) if len(B.g(m)) <= 8]
        assert len(set(images)) == len(images)
        assert sorted(images) == sorted(fa.enumerate_upto(L, 8))
    # decisions against brute force on a small corpus over a*b*
    L = regex_dfa("a*b*", AB)
    sentences = [
        'E[0 mod 2] x. x << w"aabb"',
        'E[1 mod 2] x. x << w"aabb"',
        'E>=3 x. x << w"ab"',
        'A x. !(x << w"aab") | E y. y << w"aabb" & x << y & !(y = x)',
        'E x. x << w"abb" & E[0 mod 3] y. y << x',
        "E x. E y. E z. !(x << y) & !(y << x) & !(x << z) & !(z << x) & !(y << z) & !(z << y)",
    ]
    for text in sentences:
        phi = parse_formula(text, AB, "bounded")
        want = brute_force_eval(phi, L, 4)
        assert want is not None
        assert decide_bounded(phi, L) == want, text
    assert decide_bounded(parse_formula(sentences[0], AB, "bounded"), L) is False


# --- criterion 10: Presburger backend ------------------------------------------

def _pb_body(rng, names, depth=2):
    if depth == 0 or rng.random() < 0.35:
        coeffs = {v: rng.randint(-2, 2) for v in rng.sample(names, rng.randint(1, len(names)))}
        if rng.random() < 0.3:
            return pb.congruence(coeffs, rng.randint(0, 2), rng.randint(2, 3))
        return pb.linear(coeffs, rng.choice(["=", "<="]), rng.randint(-3, 12))
    op = rng.choice([pb.conj, pb.disj, lambda a, b: pb.conj(pb.neg(a), b)])
    return op(_pb_body(rng, names, depth - 1), _pb_body(rng, names, depth - 1))


def _pb_sentence(rng):
    names = ["x", "y", "z"][:rng.randint(1, 3)]
    f = _pb_body(rng, names)
    top = 0
    for v in reversed(names):
        b = rng.randint(0, 12)
        top = max(top, b)
        guard = pb.var_le(v, b)
        kind = rng.choice(["E", "A", "atleast", "mod"])
        if kind == "E":
            f = pb.Exists(v, pb.conj(guard, f))
        elif kind == "A":
            f = pb.Forall(v, pb.implies(guard, f))
        elif kind == "atleast":
            f = pb.AtLeast(v, rng.randint(0, 4), pb.conj(guard, f))
        else:
            q = rng.randint(2, 3)
            f = pb.CountMod(v, rng.randint(0, q - 1), q, pb.conj(guard, f))
    return f, top


@criterion(10, 300)
def test_criterion_10_presburger_backend():
    rng = random.Random(100)
    compiler = pb.Compiler()
    outcomes = set()
    for _ in range(100):
        f, top = _pb_sentence(rng)
        want = pb.evaluate(f, {}, top)
        assert pb.decide_sentence(f, compiler) == want, f
        assert pb.decide_sentence(pb.expand_thresholds(f), compiler) == want, f
        outcomes.add(want)
    assert outcomes == {True, False}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
