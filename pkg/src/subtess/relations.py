"""Rational relations given by Nivat presentations.

A presentation is a regular witness language ``S`` over an alphabet
``gamma`` together with two letter-to-word maps ``h1``, ``h2``; it denotes
the pairs ``(h1(w), h2(w))`` for ``w`` in ``S``.  No letter may be erased by
both maps, so the witnesses of a pair ``(u, v)`` have length at most
``|u| + |v|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from . import automata as fa
from .automata import Alphabet, Dfa
from .regex import Star, alt, anyof, cat, plus, regex_dfa, sym


@dataclass(frozen=True)
class NivatPresentation:
    gamma: Alphabet
    S: Dfa
    h1: Mapping
    h2: Mapping
    sigma: Alphabet

    def __post_init__(self):
        if self.S.alphabet != self.gamma:
            raise fa.AlphabetError("witness automaton is not over gamma")
        h1 = {g: self.sigma.word(self.h1[g]) for g in self.gamma}
        h2 = {g: self.sigma.word(self.h2[g]) for g in self.gamma}
        for g in self.gamma:
            if not h1[g] and not h2[g]:
                raise ValueError(f"letter {g!r} is erased by both maps")
            for s in (*h1[g], *h2[g]):
                self.sigma.index(s)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)

    def __hash__(self):
        return hash((self.gamma, self.S))

    def image(self, w):
        return (
            self.sigma.word([s for g in w for s in self.h1[g]]),
            self.sigma.word([s for g in w for s in self.h2[g]]),
        )


def tagged(sigma: Alphabet, tag) -> list:
    return [f"{a}#{tag}" for a in sigma]


def _proj_maps(sigma: Alphabet):
    one = {f"{a}#1": a for a in sigma}
    two = {f"{a}#2": a for a in sigma}
    gamma = Alphabet(tuple(one) + tuple(two))
    h1 = {g: one.get(g, "") for g in gamma}
    h2 = {g: two.get(g, "") for g in gamma}
    return gamma, h1, h2


def _sub_language(sigma: Alphabet, gamma: Alphabet) -> Dfa:
    s2 = tagged(sigma, 2)
    block = alt(*(cat(Star(anyof(set(s2) - {f"{a}#2"})), sym(f"{a}#2"), sym(f"{a}#1")) for a in sigma))
    return regex_dfa(cat(Star(block), Star(anyof(s2))), gamma)


def subword_relations(sigma: Alphabet) -> dict:
    """Presentations of the subword order, the cover relation, and proper-non-cover pairs."""
    gamma, h1, h2 = _proj_maps(sigma)
    sub = _sub_language(sigma, gamma)
    s1, s2 = anyof(tagged(sigma, 1)), anyof(tagged(sigma, 2))
    pair = cat(s2, s1)
    one_extra = regex_dfa(cat(Star(pair), s2, Star(pair)), gamma)
    token = alt(pair, s2)
    two_extra = regex_dfa(cat(Star(token), s2, Star(token), s2, Star(token)), gamma)
    return {
        "subword": NivatPresentation(gamma, sub, h1, h2, sigma),
        "cover": NivatPresentation(gamma, fa.intersection(sub, one_extra), h1, h2, sigma),
        "proper_minus_cover": NivatPresentation(gamma, fa.intersection(sub, two_extra), h1, h2, sigma),
    }


def incomparability_parts(sigma: Alphabet) -> dict:
    """The three disjoint pieces of incomparability, keyed by length comparison.

    "shorter": |u| < |v|, "equal": |u| = |v|, "longer": |u| > |v|.
    The witness languages put the letters of the longer-or-equal side on
    tag 1; the maps read the tag-2 letters as the first component.
    """
    gamma, p1, p2 = _proj_maps(sigma)
    s1 = tagged(sigma, 1)
    pair = cat(anyof(s1), anyof(tagged(sigma, 2)))
    mismatch = alt(*(cat(sym(f"{a}#1"), sym(f"{b}#2")) for a in sigma for b in sigma if a != b))
    inc2 = regex_dfa(cat(Star(pair), mismatch, Star(pair)), gamma)
    skip = lambda a: anyof(set(s1) - {f"{a}#1"})  # noqa: E731
    head = Star(alt(*(cat(Star(skip(a)), sym(f"{a}#1"), sym(f"{a}#2")) for a in sigma)))
    fail = alt(*(cat(plus(skip(a)), sym(f"{a}#2")) for a in sigma))
    inc12 = regex_dfa(cat(head, fail, Star(pair)), gamma)
    inc1 = fa.difference(inc12, inc2)
    shorter = NivatPresentation(gamma, inc1, p2, p1, sigma)
    return {
        "shorter": shorter,
        "equal": NivatPresentation(gamma, inc2, p2, p1, sigma),
        "longer": inverse(shorter),
    }


def incomparability(sigma: Alphabet) -> NivatPresentation:
    parts = incomparability_parts(sigma)
    return disjoint_union(disjoint_union(parts["shorter"], parts["equal"]), parts["longer"])


def inverse(R: NivatPresentation) -> NivatPresentation:
    return NivatPresentation(R.gamma, R.S, R.h2, R.h1, R.sigma)


def disjoint_union(R1: NivatPresentation, R2: NivatPresentation) -> NivatPresentation:
    if R1.sigma != R2.sigma:
        raise fa.AlphabetError("relations over different alphabets")
    left = {g: f"{g}#L" for g in R1.gamma}
    right = {g: f"{g}#R" for g in R2.gamma}
    gamma = Alphabet(tuple(left.values()) + tuple(right.values()))
    S1 = _rename(R1.S, left, gamma)
    S2 = _rename(R2.S, right, gamma)
    h1 = {left[g]: R1.h1[g] for g in R1.gamma} | {right[g]: R2.h1[g] for g in R2.gamma}
    h2 = {left[g]: R1.h2[g] for g in R1.gamma} | {right[g]: R2.h2[g] for g in R2.gamma}
    return NivatPresentation(gamma, fa.union(S1, S2), h1, h2, R1.sigma)


def _rename(A: Dfa, names: dict, gamma: Alphabet) -> Dfa:
    inner = Alphabet(tuple(names[g] for g in A.alphabet))
    return fa.extend_alphabet(Dfa(inner, A.delta, A.initial, A.accepting), gamma)


def restrict_range(R: NivatPresentation, L: Dfa) -> NivatPresentation:
    """Keep only the pairs whose second component lies in L."""
    if L.alphabet != R.sigma:
        raise fa.AlphabetError("language alphabet differs from the relation's")
    pulled = fa.inverse_homomorphism(L, R.h2, R.gamma)
    return NivatPresentation(R.gamma, fa.intersection(R.S, pulled), R.h1, R.h2, R.sigma)


def empty_relation(sigma: Alphabet) -> NivatPresentation:
    gamma = Alphabet(("nil",))
    return NivatPresentation(gamma, fa.empty(gamma), {"nil": sigma.symbols[0]}, {"nil": ""}, sigma)


def contains(R: NivatPresentation, u, v) -> int:
    """Number of witnesses w in S with (h1(w), h2(w)) = (u, v)."""
    u, v = tuple(u), tuple(v)
    letters = [(i, tuple(R.h1[g]), tuple(R.h2[g])) for i, g in enumerate(R.gamma)]
    delta, acc = R.S.delta, R.S.accepting
    lu, lv = len(u), len(v)

    @lru_cache(maxsize=None)
    def count(q, i, j):
        total = 1 if (i == lu and j == lv and q in acc) else 0
        for s, a, b in letters:
            if u[i:i + len(a)] == a and v[j:j + len(b)] == b:
                total += count(delta[q][s], i + len(a), j + len(b))
        return total

    return count(R.S.initial, 0, 0)


def pairs_upto(R: NivatPresentation, n: int) -> set:
    words = fa.all_words(R.sigma, n)
    return {(u, v) for u in words for v in words if contains(R, u, v)}


@dataclass(frozen=True)
class UnambiguityReport:
    ok: bool
    counterexamples: tuple = ()

    @property
    def counterexample(self):
        return self.counterexamples[0] if self.counterexamples else None


def check_unambiguous_upto(R: NivatPresentation, n: int) -> UnambiguityReport:
    """Check that no pair with both sides in Sigma^{<=n} has two witnesses.

    All offending pairs are reported as (u, v, parses), length-then-lex.
    """
    words = fa.all_words(R.sigma, n)
    bad = []
    for u in words:
        for v in words:
            c = contains(R, u, v)
            if c > 1:
                bad.append((u, v, c))
    return UnambiguityReport(not bad, tuple(bad))


def nivat_to_json(R: NivatPresentation) -> dict:
    return {
        "sigma": list(R.sigma.symbols),
        "alphabet": list(R.gamma.symbols),
        "S": fa.to_json(R.S),
        "h1": {g: "".join(R.h1[g]) if R.sigma.chars else list(R.h1[g]) for g in R.gamma},
        "h2": {g: "".join(R.h2[g]) if R.sigma.chars else list(R.h2[g]) for g in R.gamma},
    }


def ambiguous_example() -> NivatPresentation:
    """Union of (a^m b a^n, a^m) and (a^m b a^n, a^n); ambiguous exactly when m = n."""
    sigma = Alphabet(("a", "b"))
    gamma = Alphabet(("x", "y", "z"))
    S = regex_dfa("x*yz*", gamma)
    first = NivatPresentation(gamma, S, {"x": "a", "y": "b", "z": "a"}, {"x": "a", "y": "", "z": ""}, sigma)
    second = NivatPresentation(gamma, S, {"x": "a", "y": "b", "z": "a"}, {"x": "", "y": "", "z": "a"}, sigma)
    return disjoint_union(first, second)
