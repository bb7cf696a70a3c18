"""Decision procedure for the two-variable logic with counting quantifiers.

Structures are (Sigma*, subword, cover, regular predicates, constants),
optionally relativized to a regular language.  Every formula with one free
variable defines a regular language; quantifiers are eliminated one at a
time by splitting on how the two variables compare and counting witnesses
with weighted automata.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from . import automata as fa
from .automata import Alphabet, Dfa
from .logic import (
    ATOMS, QUANTIFIERS, And, AtLeast, Const, CountMod, Cover, Eq, Exists, Forall,
    In, Not, Or, Sub, Var, Word, all_vars, conj, constants, disj, free_vars,
    map_atoms, neg, relativize,
)
from .relations import incomparability, inverse, subword_relations
from .weighted import INF, Modular, Saturating, counting_function, map_semiring, value_automaton


class FragmentError(ValueError):
    pass


# --- atoms -----------------------------------------------------------------

def _covered_by(w, sigma):
    if not w:
        return fa.empty(sigma)
    return fa.intersection(fa.downward_closure_word(w, sigma), fa.length_exactly(len(w) - 1, sigma))


def _covers_of(w, sigma):
    return fa.intersection(fa.upward_closure_word(w, sigma), fa.length_exactly(len(w) + 1, sigma))


def _fold_constants(atom, sigma: Alphabet):
    if not isinstance(atom, (Sub, Cover, Eq)):
        if isinstance(atom, In) and isinstance(atom.term, Word):
            return Const(atom.lang.accepts(atom.term.text))
        return atom
    l, r = atom.left, atom.right
    if isinstance(l, Word) and isinstance(r, Word):
        from .logic import eval_atom
        return Const(eval_atom(atom, {}))
    if isinstance(l, Var) and isinstance(r, Var):
        return atom
    if isinstance(atom, Eq):
        var, w = (l, r.text) if isinstance(r, Word) else (r, l.text)
        return In(var, fa.from_words([w], sigma), f'{{"{w}"}}')
    if isinstance(r, Word):  # var below a constant
        w = r.text
        if isinstance(atom, Sub):
            return In(l, fa.downward_closure_word(w, sigma), f'down("{w}")')
        return In(l, _covered_by(w, sigma), f'covered_by("{w}")')
    w = l.text
    if isinstance(atom, Sub):
        return In(r, fa.upward_closure_word(w, sigma), f'up("{w}")')
    return In(r, _covers_of(w, sigma), f'covers("{w}")')


def normalize_atoms(phi, sigma: Alphabet):
    """Rewrite atoms into x in K, x << y and x <. y with x, y distinct variables."""

    def fix(atom):
        atom = _fold_constants(atom, sigma)
        if isinstance(atom, (Sub, Cover, Eq)) and atom.left == atom.right:
            if isinstance(atom, Cover):
                return In(atom.left, fa.empty(sigma), "{}")
            return In(atom.left, fa.universal(sigma), "Sigma*")
        if isinstance(atom, Eq):
            return conj(Sub(atom.left, atom.right), Sub(atom.right, atom.left))
        return atom

    return map_atoms(phi, fix)


# --- quantifier elimination --------------------------------------------------

# truth of (x<<y, y<<x, x<.y, y<.x) under each of the six exclusive relations:
# equal, x covered by y, x proper non-cover subword of y, and the two inverses,
# and incomparable.
_THETA = (
    (True, True, False, False),
    (True, False, True, False),
    (True, False, False, False),
    (False, True, False, True),
    (False, True, False, False),
    (False, False, False, False),
)


@lru_cache(maxsize=None)
def _relations(sigma: Alphabet):
    rel = subword_relations(sigma)
    cover, pmc = rel["cover"], rel["proper_minus_cover"]
    return (None, cover, pmc, inverse(cover), inverse(pmc), incomparability(sigma))


@lru_cache(maxsize=4096)
def _value_classes(sigma: Alphabet, i: int, L: Dfa, sr) -> tuple:
    """(value, preimage DFA) pairs for u -> #{v in L : (u, v) in relation i}."""
    va = value_automaton(map_semiring(counting_function(_relations(sigma)[i], L), sr))
    return tuple((v, va.preimage({v})) for v in sorted(set(va.values), key=_value_order))


def _value_order(v):
    return (1, 0) if v is INF else (0, v)


def _qf_language(f, var, truth, sigma):
    """Language of `var` values satisfying a quantifier-free formula.

    Atoms on `var` alone contribute their language; `truth` fixes the rest.
    """
    if isinstance(f, Const):
        return fa.universal(sigma) if f.value else fa.empty(sigma)
    if isinstance(f, In) and f.term == Var(var):
        return f.lang
    if isinstance(f, ATOMS):
        return fa.universal(sigma) if truth(f) else fa.empty(sigma)
    if isinstance(f, Not):
        return fa.complement(_qf_language(f.body, var, truth, sigma))
    parts = [_qf_language(a, var, truth, sigma) for a in f.args]
    if isinstance(f, And):
        return fa.intersect_all(parts, sigma)
    return fa.union_all(parts, sigma)


def _quantifier_semiring(q):
    """Semiring and accepted values of the aggregated witness count."""
    if isinstance(q, Exists):
        return Saturating(1), {1, INF}
    if isinstance(q, AtLeast):
        return Saturating(q.k), {q.k, INF}
    if isinstance(q, CountMod):
        return Modular(q.q), ({q.p} if q.p else {0, q.q})
    raise FragmentError(f"cannot eliminate {type(q).__name__}")


def qe_counting(q, sigma: Alphabet, free: str | None = None) -> Dfa:
    """DFA for the values of `free` satisfying the quantified formula q.

    q is an Exists, AtLeast or CountMod node whose body is quantifier-free
    and normalized, with variables among {free, q.var}.
    """
    if isinstance(q, AtLeast) and q.k == 0:
        return fa.universal(sigma)
    y = q.var
    x = free if free is not None else next(iter(free_vars(q) or {"_"}))
    body = q.body
    if not free_vars(body) <= {x, y}:
        raise FragmentError("more than two variables in a quantifier body")
    sr, target = _quantifier_semiring(q)

    x_atoms = []
    for g in _atoms(body):
        if isinstance(g, In) and g.term == Var(x) and g.lang not in x_atoms:
            x_atoms.append(g.lang)

    def comparison(theta, atom):
        if isinstance(atom, In):
            raise AssertionError("membership atoms are resolved separately")
        left_is_x = atom.left == Var(x)
        if isinstance(atom, Sub):
            return theta[0] if left_is_x else theta[1]
        return theta[2] if left_is_x else theta[3]

    # exclusive decomposition over truth assignments of the x-atoms
    pieces = []
    for alpha in product((True, False), repeat=len(x_atoms)):
        K = fa.universal(sigma)
        for lang, bit in zip(x_atoms, alpha):
            K = fa.intersection(K, lang if bit else fa.complement(lang))
        if K.is_empty():
            continue
        pieces.append((K, dict(zip(x_atoms, alpha))))

    one = sr.embed(1)
    classes = []
    for i, theta in enumerate(_THETA):
        by_value = {}
        for K, alpha in pieces:
            def truth(atom, theta=theta, alpha=alpha):
                if isinstance(atom, In):
                    return alpha[atom.lang]
                return comparison(theta, atom)

            L = _qf_language(body, y, truth, sigma)
            if L.is_empty():
                found = ((0, K),)
            elif i == 0:
                found = ((one, fa.intersection(K, L)), (0, fa.difference(K, L)))
            else:
                found = tuple((v, fa.intersection(K, P)) for v, P in _value_classes(sigma, i, L, sr))
            for v, D in found:
                if not D.is_empty():
                    by_value[v] = fa.union(by_value[v], D) if v in by_value else D
        classes.append(by_value)

    # sum the six per-relation counts in the semiring, class by class
    totals = {0: fa.universal(sigma)}
    for by_value in classes:
        nxt = {}
        for a, A in totals.items():
            for v, D in by_value.items():
                both = fa.intersection(A, D)
                if both.is_empty():
                    continue
                s = sr.add(a, v)
                nxt[s] = fa.union(nxt[s], both) if s in nxt else both
        totals = nxt
    return fa.union_all([D for v, D in totals.items() if v in target], sigma)


def _atoms(f):
    if isinstance(f, ATOMS):
        yield f
    elif isinstance(f, Not):
        yield from _atoms(f.body)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from _atoms(a)
    else:
        yield from _atoms(f.body)


# --- languages and sentences -------------------------------------------------

def check_two_variable(phi):
    names = all_vars(phi)
    if len(names) > 2:
        extra = sorted(names)[2]
        raise FragmentError(f"third variable {extra!r}: at most two variables are allowed")


def _collapse(f, sigma):
    """Replace each quantified subformula by a membership atom (bottom up)."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return neg(_collapse(f.body, sigma))
    if isinstance(f, And):
        return conj(*(_collapse(a, sigma) for a in f.args))
    if isinstance(f, Or):
        return disj(*(_collapse(a, sigma) for a in f.args))
    if isinstance(f, Forall):
        return _collapse(neg(Exists(f.var, neg(f.body))), sigma)
    body = _collapse(f.body, sigma)
    fv = free_vars(f)
    if len(fv) > 1:
        raise FragmentError("quantified subformula with two free variables")
    q = type(f)(**{**f.__dict__, "body": body})
    if not fv:
        lang = qe_counting(q, sigma, None)
        return Const(not lang.is_empty())
    (x,) = fv
    return In(Var(x), qe_counting(q, sigma, x), "")


def define_language(phi, sigma: Alphabet, var: str = "x") -> Dfa:
    """DFA of the words u such that phi holds with `var` set to u."""
    fv = free_vars(phi)
    if not fv <= {var}:
        raise FragmentError(f"free variables {sorted(fv)} beyond {var!r}")
    check_two_variable(phi)
    flat = _collapse(normalize_atoms(phi, sigma), sigma)
    return _qf_language(flat, var, lambda atom: _bad_atom(atom), sigma)


def _bad_atom(atom):
    raise FragmentError(f"unexpected atom {atom}")


def decide_cmod2(phi, L: Dfa | None = None, sigma: Alphabet | None = None) -> bool:
    """Truth of a sentence over the subword structure of L (default Sigma*)."""
    if sigma is None:
        if L is None:
            raise ValueError("need an alphabet or a domain language")
        sigma = L.alphabet
    if free_vars(phi):
        raise FragmentError(f"not a sentence: free {sorted(free_vars(phi))}")
    check_two_variable(phi)
    if L is not None:
        for w in constants(phi):
            if not L.accepts(w):
                raise ValueError(f'constant "{w}" is not in the domain')
        phi = relativize(phi, L, "L")
    lang = define_language(phi, sigma, "x")
    return not lang.is_empty()
