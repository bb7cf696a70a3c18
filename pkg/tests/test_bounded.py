import itertools
import random

import pytest

from subtess import automata as fa
from subtess import logic as lg
from subtess import presburger as pb
from subtess.automata import Alphabet, is_subword
from subtess.bounded import (
    BoundedBasis, BoundedError, Translator, bounded_witness, canonical_formula, decide_bounded,
    g_preimage_formula, linear_sets, parikh_formula, semilinear_formula, subword_formula, translate,
)
from subtess.dsl import parse_formula
from subtess.oracle import brute_force_eval
from subtess.regex import regex_dfa

AB = Alphabet(("a", "b"))


def parse(text):
    return parse_formula(text, AB, "bounded")


def tuples(n, total):
    return [m for m in itertools.product(range(total + 1), repeat=n) if sum(m) <= total]


def test_lower_threshold():
    body = lg.Sub(lg.Var("x"), lg.Word("ab"))
    assert lg.lower_threshold(lg.AtLeast("x", 1, body)) == lg.Exists("x1", lg.Sub(lg.Var("x1"), lg.Word("ab")))
    two = lg.lower_threshold(lg.AtLeast("x", 2, body))
    assert two == lg.Exists("x1", lg.Exists("x2", lg.conj(
        lg.neg(lg.Eq(lg.Var("x1"), lg.Var("x2"))),
        lg.Sub(lg.Var("x1"), lg.Word("ab")), lg.Sub(lg.Var("x2"), lg.Word("ab")))))
    assert lg.lower_threshold(lg.AtLeast("x", 0, body)) == lg.TRUE


def parikh_solutions(A, bound):
    names = {g: f"#{g}" for g in A.alphabet}
    S = pb.compile_formula(parikh_formula(A, names))
    assert set(S.vars) <= set(names.values())
    S = pb.cylindrify(S, tuple(names.values()))
    order = [S.vars.index(names[g]) for g in A.alphabet]
    return {tuple(t[i] for i in order) for t in S.solutions_upto(bound)}


def parikh_vectors(A, bound):
    out = set()
    for w in fa.enumerate_upto(A, bound * len(A.alphabet)):
        v = tuple(w.count(g) for g in A.alphabet)
        if max(v, default=0) <= bound:
            out.add(v)
    return out


def test_parikh_formula_examples():
    assert parikh_solutions(regex_dfa("(ab)*", AB), 4) == {(m, m) for m in range(5)}
    assert parikh_solutions(fa.empty(AB), 3) == set()
    assert parikh_solutions(regex_dfa("a|b", AB), 3) == {(1, 0), (0, 1)}


@pytest.mark.parametrize("rx", ["(ab|ba)*", "a*b(aa)*", "(aab|b)*a", "ε|ab", "(a|b)(a|b)(a|b)", "b*(ab)*a*"])
def test_parikh_formula_matches_enumeration(rx):
    A = regex_dfa(rx, AB)
    assert parikh_solutions(A, 4) == parikh_vectors(A, 4)


@pytest.mark.parametrize("rx", ["a*b*", "(ab)*(ba)*", "b(ab)*a", "a*ba*", "(aa)*|b"])
def test_linear_sets_match_parikh_image(rx):
    A = regex_dfa(rx, AB)
    S = semilinear_formula(linear_sets(A), ["#a", "#b"])
    got = {m for m in itertools.product(range(7), repeat=2) if pb.evaluate(S, dict(zip(["#a", "#b"], m)), 0)}
    assert got == parikh_vectors(A, 6)


CORPUS = [
    (("a", "b"), "a*b*"),
    (("ab", "ba"), "(ab)*(ba)*"),
    (("a", "a"), "a*"),
    (("b", "ab"), "b*(ab)*"),
    (("a", "ba", "b"), "a*(ba)*b*"),
]
LANGS = ["(ab)*", "a*", "(a|b)*", "b*a", "(ab|ba)*", "∅", "a*bb"]


@pytest.mark.parametrize("words,_", CORPUS)
def test_membership_formula(words, _):
    B = BoundedBasis(words, AB)
    xs = [f"m{i}" for i in range(len(B))]
    for rx in LANGS:
        K = regex_dfa(rx, AB)
        lam = g_preimage_formula(K, B, xs)
        for m in tuples(len(B), 6):
            assert pb.evaluate(lam, dict(zip(xs, m)), 0) == K.accepts(B.g(m)), (rx, m)


def test_membership_formula_examples():
    B = BoundedBasis(("a", "b"), AB)
    lam = g_preimage_formula(regex_dfa("(ab)*", AB), B, ["m0", "m1"])
    sols = {m for m in itertools.product(range(6), repeat=2) if pb.evaluate(lam, dict(zip(["m0", "m1"], m)), 0)}
    assert sols == {(0, 0), (1, 1)}
    full = g_preimage_formula(fa.universal(AB), B, ["m0", "m1"])
    assert all(pb.evaluate(full, {"m0": i, "m1": j}, 0) for i in range(5) for j in range(5))


@pytest.mark.parametrize("words,_", CORPUS)
def test_subword_formula(words, _):
    B = BoundedBasis(words, AB)
    n = len(B)
    xs, ys = [f"m{i}" for i in range(n)], [f"n{i}" for i in range(n)]
    sig = subword_formula(B, xs, ys)
    total = 6 if n <= 2 else 4
    for m in tuples(n, total):
        for k in tuples(n, total):
            env = {**dict(zip(xs, m)), **dict(zip(ys, k))}
            assert pb.evaluate(sig, env, 0) == is_subword(B.g(m), B.g(k)), (m, k)


def test_subword_formula_examples():
    B = BoundedBasis(("ab", "ba"), AB)
    sig = subword_formula(B, ["m0", "m1"], ["n0", "n1"])
    assert pb.evaluate(sig, {"m0": 1, "m1": 0, "n0": 0, "n1": 2}, 0)
    assert all(pb.evaluate(sig, {"m0": i, "m1": j, "n0": i, "n1": j}, 0) for i in range(4) for j in range(4))


@pytest.mark.parametrize("words,rx", CORPUS[:4])
def test_canonical_tuples_biject_with_the_language(words, rx):
    B = BoundedBasis(words, AB)
    L = regex_dfa(rx, AB)
    names = [f"m{i}" for i in range(len(B))]
    U = pb.compile_formula(canonical_formula(B, L, names))
    short = [m for m in U.solutions_upto(8) if len(B.g(m)) <= 8]
    images = [B.g(m) for m in short]
    assert len(set(images)) == len(images)
    assert sorted(images) == sorted(fa.enumerate_upto(L, 8))
    assert U.accepts(dict.fromkeys(names, 0))


def test_canonical_tuple_is_lex_least():
    B = BoundedBasis(("a", "a"), AB)
    U = pb.compile_formula(canonical_formula(B, regex_dfa("a*", AB), ["m0", "m1"]))
    assert U.solutions_upto(5) == [(0, k) for k in range(6)]
    U = pb.compile_formula(canonical_formula(BoundedBasis(("a", "b"), AB), regex_dfa("a*b*", AB), ["m0", "m1"]))
    assert U.solutions_upto(4) == list(itertools.product(range(5), repeat=2))


def test_decide_examples():
    ab = regex_dfa("a*b*", AB)
    assert not decide_bounded(parse('E[0 mod 2] x. x << w"aabb"'), ab)
    assert decide_bounded(parse('E[0 mod 2] x. x << w"aaa"'), regex_dfa("a*", AB))
    assert decide_bounded(parse("E x. E y. x << y & !(y << x)"), regex_dfa("a*", AB))
    for s in ("E x. x = x", "E x. E y. x << y", 'E x. x in re"a*"'):
        assert not decide_bounded(parse(s), fa.empty(AB))
    t = translate(parse('E x. x in re"a*"'), BoundedBasis(("a", "b"), AB), ab)
    assert isinstance(t, pb.Exists)


def test_three_antichain_over_a_star_b_star():
    phi = parse("E x. E y. E z. !(x << y) & !(y << x) & !(x << z) & !(z << x) & !(y << z) & !(z << y)")
    L = regex_dfa("a*b*", AB)
    want = brute_force_eval(phi, L, 4)
    assert want is True
    assert decide_bounded(phi, L) == want
    w = bounded_witness(phi, L)
    words = [w["x"], w["y"], w["z"]]
    assert all(L.accepts(u) for u in words)
    for u, v in itertools.permutations(words, 2):
        assert not is_subword(u, v)


def test_no_cover_in_mixed_language():
    L = regex_dfa("(ab)*(ba)*", AB)
    phi = parse("E x. E y. x <. y")
    # every word has even length, so no word covers another one
    assert fa.is_subset(L, regex_dfa("((a|b)(a|b))*", AB))
    assert not decide_bounded(phi, L)
    assert bounded_witness(phi, L) is None


def test_errors():
    with pytest.raises(BoundedError):
        decide_bounded(parse("E x. x = x"), regex_dfa("(ab|ba)*", AB))
    with pytest.raises(BoundedError):
        decide_bounded(parse("E x. x = x"), regex_dfa("a*b*", AB), ("b", "a"))
    with pytest.raises(BoundedError):
        translate(parse("E>=2 x. x = x"), BoundedBasis(("a",), AB), regex_dfa("a*", AB))
    with pytest.raises(BoundedError):
        decide_bounded(parse('E x. x = w"b"'), regex_dfa("a*", AB))
    with pytest.raises(BoundedError):
        BoundedBasis(("a", ""), AB)


@pytest.mark.parametrize("w", ["", "ab", "aabb", "abbb", "aaab"])
def test_mod_expansion_matches_direct_count(w):
    L = regex_dfa("a*b*", AB)
    T = Translator(BoundedBasis(("a", "b"), AB), L)
    xs = T.components("x")
    # count the canonical pairs below w straight from the solution automaton
    cs = ("c0", "c1")
    below = pb.exists_all(cs, pb.conj(
        pb.var_eq("c0", w.count("a")), pb.var_eq("c1", w.count("b")),
        pb.Apply(T.canon, xs), pb.Apply(T.sub, xs + cs)))
    direct = len(pb.compile_formula(below, T.compiler).solutions_upto(len(w)))
    assert direct == len({u for u in fa.enumerate_upto(L, len(w)) if is_subword(u, w)})
    body = lg.Sub(lg.Var("x"), lg.Word(w))
    for q in (2, 3):
        for p in range(q):
            assert decide_bounded(lg.CountMod("x", p, q, body), L) == (direct % q == p)


def random_sentence(rng, consts):
    X, Y = lg.Var("x"), lg.Var("y")
    atoms = [lg.Sub(X, Y), lg.Sub(Y, X), lg.Eq(X, Y), lg.Cover(X, Y),
             lg.In(Y, regex_dfa(rng.choice(["a*", "(ab)*", "b*"]), AB))]
    body = rng.choice(atoms)
    for _ in range(rng.randint(0, 2)):
        other = rng.choice(atoms)
        body = rng.choice([lg.conj(body, other), lg.disj(body, lg.neg(other))])
    guard_y = lg.Sub(Y, lg.Word(rng.choice(consts)))
    kind = rng.choice(["E", "A", "mod", "atleast"])
    if kind == "E":
        inner = lg.Exists("y", lg.conj(guard_y, body))
    elif kind == "A":
        inner = lg.Forall("y", lg.disj(lg.neg(guard_y), body))
    elif kind == "mod":
        inner = lg.CountMod("y", rng.randint(0, 1), 2, lg.conj(guard_y, body))
    else:
        inner = lg.AtLeast("y", rng.randint(1, 2), lg.conj(guard_y, body))
    guard_x = lg.Sub(X, lg.Word(rng.choice(consts)))
    if rng.random() < 0.5:
        return lg.Exists("x", lg.conj(guard_x, inner))
    return lg.Forall("x", lg.disj(lg.neg(guard_x), inner))


@pytest.mark.parametrize("rx", ["a*b*", "(ab)*(ba)*"])
def test_agrees_with_brute_force(rx):
    L = regex_dfa(rx, AB)
    consts = [w for w in fa.enumerate_upto(L, 4) if len(w) >= 2]
    rng = random.Random(len(rx))
    seen = set()
    for _ in range(12):
        phi = random_sentence(rng, consts)
        want = brute_force_eval(phi, L, 4)
        assert want is not None
        assert decide_bounded(phi, L) == want, str(phi)
        seen.add(want)
    assert seen == {True, False}
