"""Brute-force evaluation over a finite slice of the domain.

Answers are True, False or None (unknown).  A definite answer is given only
when it cannot change by enlarging the slice: an existential witness found
in the slice stays a witness, and a quantifier whose witnesses are all
provably short (by a subword bound on a known word) is evaluated exactly.
"""

from __future__ import annotations

from . import automata as fa
from . import presburger as pb
from .automata import Alphabet, Dfa
from .logic import (
    And, AtLeast, Const, CountMod, Cover, Eq, Exists, Forall, In, Not, Or, Sub,
    Var, Word, eval_atom,
)


def _and3(values):
    out = True
    for v in values:
        if v is False:
            return False
        if v is None:
            out = None
    return out


def _or3(values):
    out = False
    for v in values:
        if v is True:
            return True
        if v is None:
            out = None
    return out


def _max_length(K: Dfa):
    kind, words = fa.classify(K)
    if kind == "infinite":
        return None
    return max((len(w) for w in words), default=-1)


class _Evaluator:
    def __init__(self, domain, n: int, complete_domain: bool):
        self.domain = domain
        self.n = n
        self.complete_domain = complete_domain
        self._finite = {}

    def finite_bound(self, K):
        key = id(K)
        if key not in self._finite:
            self._finite[key] = (K, _max_length(K))
        return self._finite[key][1]

    def bound(self, f, x, env, positive=True):
        """Upper bound on |x| for values making f true (positive) or false."""
        if isinstance(f, Not):
            return self.bound(f.body, x, env, not positive)
        if isinstance(f, (And, Or)):
            parts = [self.bound(a, x, env, positive) for a in f.args]
            if isinstance(f, And) == positive:  # conjunction of requirements
                known = [p for p in parts if p is not None]
                return min(known) if known else None
            return None if any(p is None for p in parts) else max(parts)
        if isinstance(f, Const):
            return -1 if f.value != positive else None
        if not positive:
            return None
        if isinstance(f, In):
            if f.term == Var(x):
                return self.finite_bound(f.lang)
            return None
        if isinstance(f, (Sub, Cover, Eq)):
            other = None
            if f.left == Var(x):
                other = f.right
            elif isinstance(f, Eq) and f.right == Var(x):
                other = f.left
            if other is None or other == Var(x):
                return None
            if isinstance(other, Word):
                size = len(other.text)
            elif other.name in env:
                size = len(env[other.name])
            else:
                return None
            return size - 1 if isinstance(f, Cover) else size
        return None

    def complete(self, f, env, positive=True):
        if self.complete_domain:
            return True
        b = self.bound(f.body, f.var, env, positive)
        return b is not None and b <= self.n

    def eval(self, f, env):
        if isinstance(f, (Const, Sub, Cover, Eq, In)):
            return eval_atom(f, env)
        if isinstance(f, Not):
            v = self.eval(f.body, env)
            return None if v is None else not v
        if isinstance(f, And):
            return _and3(self.eval(a, env) for a in f.args)
        if isinstance(f, Or):
            return _or3(self.eval(a, env) for a in f.args)
        x = f.var
        if isinstance(f, Exists):
            v = _or3(self.eval(f.body, {**env, x: w}) for w in self.domain)
            if v is False and not self.complete(f, env):
                return None
            return v
        if isinstance(f, Forall):
            v = _and3(self.eval(f.body, {**env, x: w}) for w in self.domain)
            if v is True and not self.complete(f, env, positive=False):
                return None
            return v
        hits = unknown = 0
        for w in self.domain:
            v = self.eval(f.body, {**env, x: w})
            if v is None:
                unknown += 1
            elif v:
                hits += 1
        exact = unknown == 0 and self.complete(f, env)
        if isinstance(f, AtLeast):
            if hits >= f.k:
                return True
            if exact:
                return False
            if self.complete(f, env) and hits + unknown < f.k:
                return False
            return None
        if isinstance(f, CountMod):
            return hits % f.q == f.p if exact else None
        raise TypeError(f"not a formula: {f!r}")


def domain_words(L: Dfa | None, sigma: Alphabet, n: int):
    if L is None:
        return fa.all_words(sigma, n)
    return fa.enumerate_upto(L, n)


def brute_force_eval(sentence, L: Dfa | None, n: int, sigma: Alphabet | None = None):
    """True, False, or None when the slice L ∩ Σ^{<=n} cannot decide."""
    if sigma is None:
        if L is None:
            raise ValueError("need an alphabet or a domain language")
        sigma = L.alphabet
    longest = None if L is None else _max_length(L)
    complete = longest is not None and longest <= n
    ev = _Evaluator(domain_words(L, sigma, n), n, complete)
    return ev.eval(sentence, {})


# --- Presburger sentences ---------------------------------------------------

def _guard_bound(f, var, positive):
    """b when f (or its negation) forces var <= b through a conjunct x <= b."""
    if isinstance(f, pb.Not):
        return _guard_bound(f.body, var, not positive)
    if isinstance(f, (pb.And, pb.Or)):
        if isinstance(f, pb.And) != positive:
            return None
        known = [b for b in (_guard_bound(a, var, positive) for a in f.args) if b is not None]
        return min(known) if known else None
    if positive and isinstance(f, pb.Linear) and f.coeffs == ((var, 1),) and f.op == "<=":
        return f.bound
    return None


def presburger_quantifier_bound(f):
    """Largest quantifier bound if every quantifier is bounded, else None."""
    if isinstance(f, (pb.Const, pb.Linear, pb.Congruence)):
        return -1
    if isinstance(f, pb.Not):
        return presburger_quantifier_bound(f.body)
    if isinstance(f, (pb.And, pb.Or)):
        parts = [presburger_quantifier_bound(a) for a in f.args]
        return None if any(p is None for p in parts) else max(parts, default=-1)
    if isinstance(f, (pb.Exists, pb.Forall, pb.AtLeast, pb.CountMod)):
        b = _guard_bound(f.body, f.var, not isinstance(f, pb.Forall))
        inner = presburger_quantifier_bound(f.body)
        if b is None or inner is None:
            return None
        return max(b, inner)
    return None


def presburger_eval(sentence):
    """Exact value for sentences whose quantifiers are all bounded, else None."""
    b = presburger_quantifier_bound(sentence)
    if b is None:
        return None
    return pb.evaluate(sentence, {}, max(b, 0))

