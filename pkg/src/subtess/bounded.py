"""Bounded regular languages interpreted in Presburger arithmetic.

If L is contained in w1* ... wn*, a word of L is named by an exponent
tuple m with g(m) = w1^m1 ... wn^mn.  Membership in a regular K, the
subword order, and a canonical choice of one tuple per word are all
semilinear, so a sentence about (L, subword, regular predicates) becomes a
sentence of (N, +) with modulo counting, decided by :mod:`subtess.presburger`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import automata as fa
from . import presburger as pb
from .automata import Alphabet, Dfa
from .logic import (
    And, AtLeast, Const, CountMod, Cover, Eq, Exists, Forall, In, Not, Or, Sub,
    Var, Word, constants, free_vars, lower_threshold, substitute,
)
from .regex import Star, cat, regex_dfa, sym


class BoundedError(ValueError):
    pass


@dataclass(frozen=True)
class BoundedBasis:
    words: tuple
    sigma: Alphabet

    def __post_init__(self):
        words = tuple(self.sigma.word(w) for w in self.words)
        if any(len(w) == 0 for w in words):
            raise BoundedError("basis words must be nonempty")
        object.__setattr__(self, "words", words)

    def __len__(self):
        return len(self.words)

    def g(self, m):
        out = self.sigma.word(())
        for w, k in zip(self.words, m):
            out = out + w * k
        return out

    def block_language(self) -> Dfa:
        if not self.words:
            return fa.from_words([()], self.sigma)
        from .regex import word as word_node
        return regex_dfa(cat(*(Star(word_node(w)) for w in self.words)), self.sigma)

    def covers(self, L: Dfa) -> bool:
        return fa.is_subset(L, self.block_language())


# --- Parikh images -----------------------------------------------------------

def parikh_formula(A, names: dict | None = None, prefix: str = "e") -> pb.Formula:
    """Existential formula for the Parikh image of an automaton.

    One variable per edge counts its uses.  Flow conservation fixes the
    start and end states, and depth variables force every visited state
    to hang off the start state through used edges, so the edge counts
    come from a single path.
    """
    if isinstance(A, Dfa):
        A = A.to_nfa()
    gamma = A.alphabet
    names = names or {g: f"#{g}" for g in gamma}
    fwd = set(A.initial)
    stack = list(fwd)
    while stack:
        q = stack.pop()
        for targets in A.succ[q]:
            for t in targets:
                if t not in fwd:
                    fwd.add(t)
                    stack.append(t)
    edges = [(p, s, t) for p in sorted(fwd) for s in range(len(gamma)) for t in sorted(A.succ[p][s])]
    back = set(q for q in A.accepting if q in fwd)
    changed = True
    while changed:
        changed = False
        for p, s, t in edges:
            if t in back and p not in back:
                back.add(p)
                changed = True
    live = fwd & back
    edges = [(p, s, t) for p, s, t in edges if p in live and t in live]
    starts = sorted(q for q in A.initial if q in live)
    finals = sorted(q for q in A.accepting if q in live)
    counts = [names[g] for g in gamma]
    if not starts:
        return pb.conj(pb.FALSE, *(pb.var_eq(c, 0) for c in counts))
    evar = {e: f"{prefix}{i}" for i, e in enumerate(edges)}
    dvar = {q: f"d{prefix}{q}" for q in sorted(live)}
    letter = [pb.linear({names[gamma.symbols[s]]: 1, **{evar[e]: -1 for e in edges if e[1] == s}}, "=", 0)
              for s in range(len(gamma))]
    cases = []
    for i0 in starts:
        for f in finals:
            parts = []
            for v in sorted(live):
                bal = {evar[e]: 1 for e in edges if e[0] == v}
                for e in edges:
                    if e[2] == v:
                        bal[evar[e]] = bal.get(evar[e], 0) - 1
                parts.append(pb.linear(bal, "=", (v == i0) - (v == f)))
                if v == i0:
                    parts.append(pb.var_eq(dvar[v], 0))
                    continue
                into = [e for e in edges if e[2] == v]
                unused = pb.conj(*(pb.var_eq(evar[e], 0) for e in into))
                tree = [pb.conj(pb.linear({evar[e]: -1}, "<=", -1),
                                pb.linear({dvar[v]: 1, dvar[e[0]]: -1}, "=", 1))
                        for e in into if e[0] != v]
                parts.append(pb.disj(unused, *tree))
            cases.append(pb.conj(*parts))
    body = pb.conj(pb.disj(*cases), *letter)
    return pb.exists_all(list(evar.values()) + list(dvar.values()), body)


def linear_sets(A: Dfa) -> list:
    """Parikh image of a bounded DFA as linear sets (base, periods).

    In a bounded language every strongly connected component of the trim
    automaton is a single cycle, so each route through the component DAG
    contributes its fixed letters plus any multiple of each cycle it meets.
    """
    A = fa.canonical(A)
    k = len(A.alphabet)
    live = fa.trim_states(A)
    if A.initial not in live:
        return []
    comp = {}
    for c in fa.components(A, live):
        for q in c:
            comp[q] = c
    for q in live:
        if sum(1 for t in A.delta[q] if t in comp[q]) > 1:
            raise BoundedError("language is not bounded")
    found = set()

    def cycle_at(q):
        out, t = [], q
        while True:
            s, t = next((s, t2) for s, t2 in enumerate(A.delta[t]) if t2 in comp[q])
            out.append((s, t))
            if t == q:
                return out

    def visit(q, base, periods):
        c = comp[q]
        if len(c) > 1 or q in A.delta[q]:
            loop = cycle_at(q)
            vec = [0] * k
            for s, _ in loop:
                vec[s] += 1
            periods = periods | {tuple(vec)}
            walk = [(None, q)] + loop[:-1]
        else:
            walk = [(None, q)]
        here = list(base)
        for s, t in walk:
            if s is not None:
                here[s] += 1
            if t in A.accepting:
                found.add((tuple(here), frozenset(periods)))
            for s2, t2 in enumerate(A.delta[t]):
                if t2 in live and t2 not in c:
                    nxt = list(here)
                    nxt[s2] += 1
                    visit(t2, nxt, periods)

    visit(A.initial, [0] * k, frozenset())
    return sorted((b, tuple(sorted(p))) for b, p in found)


def semilinear_formula(sets, names) -> pb.Formula:
    """names = b + sum k_j p_j for one of the linear sets."""
    if not sets:
        return pb.FALSE
    return pb.Semilinear(tuple(names), tuple((tuple(b), tuple(p)) for b, p in sets))


def _letters(n, tag):
    return [f"{tag}{i + 1}" for i in range(n)]


def ordered_language(gamma: Alphabet) -> Dfa:
    return regex_dfa(cat(*(Star(sym(g)) for g in gamma)), gamma)


def g_preimage_formula(K: Dfa, B: BoundedBasis, names) -> pb.Formula:
    """lambda_K(names): g(names) lies in K."""
    if not B.words:
        return pb.Const(K.accepts(B.sigma.word(())))
    gamma = Alphabet(tuple(_letters(len(B), "a")))
    f = {g: w for g, w in zip(gamma, B.words)}
    pulled = fa.inverse_homomorphism(K, f, gamma)
    ordered = fa.intersection(pulled, ordered_language(gamma))
    return semilinear_formula(linear_sets(ordered), list(names))


def subword_witnesses(B: BoundedBasis) -> Dfa:
    """Witness language for g(m) <= g(n) over letters u_i (one more copy of
    w_i on the left) and v_j (one more copy of w_j on the right).

    The automaton follows the greedy leftmost embedding of the left word,
    loading right-hand copies only when the next letter needs them.  Every
    strongly connected component is a single cycle, so the language is
    bounded and its Parikh image is a finite union of linear sets.
    """
    n = len(B)
    ws = [tuple(B.sigma.encode(w)) for w in B.words]
    U = _letters(n, "u")
    V = _letters(n, "v")
    gamma = Alphabet(tuple(U + V))

    def wl(j):
        return len(ws[j]) if j >= 0 else 0

    start = ("m", 0, None, -1, 0)
    ids = {start: 0}
    order = [start]
    moves, eps = [], []

    def node(st):
        if st not in ids:
            ids[st] = len(order)
            order.append(st)
        return ids[st]

    i = 0
    while i < len(order):
        st = order[i]
        me = i
        i += 1
        if st[0] == "m":
            _, b, p, j, o = st
            if p is None:
                moves.append((me, U[b], node(("m", b, 0, j, o))))
                for b2 in range(b + 1, n):
                    eps.append((me, node(("m", b2, None, j, o))))
                eps.append((me, node(("d", j))))
            elif p == len(ws[b]):
                eps.append((me, node(("m", b, None, j, o))))
            else:
                c = ws[b][p]
                rest = ws[j][o:] if j >= 0 else ()
                if c in rest:
                    eps.append((me, node(("m", b, p + 1, j, o + rest.index(c) + 1))))
                else:
                    if j >= 0 and c in ws[j]:
                        moves.append((me, V[j], node(("m", b, p, j, 0))))
                    eps.append((me, node(("s", b, p, j))))
        elif st[0] == "s":
            _, b, p, j = st
            if j >= 0:
                moves.append((me, V[j], me))
            for j2 in range(j + 1, n):
                moves.append((me, V[j2], node(("m", b, p, j2, 0))))
        else:
            _, j = st
            if j >= 0:
                moves.append((me, V[j], me))
            for j2 in range(j + 1, n):
                moves.append((me, V[j2], node(("d", j2))))
    accepting = {ids[s] for s in order if s[0] == "d"}
    nfa = fa.eliminate_epsilon(gamma, len(order), moves, eps, {0}, accepting)
    return fa.determinize_minimize(nfa)


def subword_formula(B: BoundedBasis, xs, ys) -> pb.Formula:
    """sigma(xs, ys): g(xs) is a subword of g(ys)."""
    if not B.words:
        return pb.TRUE
    return semilinear_formula(linear_sets(subword_witnesses(B)), list(xs) + list(ys))


def lex_leq(xs, ys) -> pb.Formula:
    cases = [pb.conj(*(pb.eq(a, b) for a, b in zip(xs, ys)))]
    for i in range(len(xs)):
        cases.append(pb.conj(*(pb.eq(xs[t], ys[t]) for t in range(i)), pb.lt(xs[i], ys[i])))
    return pb.disj(*cases)


class Translator:
    """Builds the Presburger side for a fixed basis and domain language."""

    def __init__(self, B: BoundedBasis, L: Dfa):
        self.B = B
        self.L = L
        n = len(B)
        self.n = n
        xs = [f"m{i}" for i in range(n)]
        ys = [f"n{i}" for i in range(n)]
        self.sub = pb.Macro("sub", tuple(xs + ys), subword_formula(B, xs, ys))
        self.langs = {}
        lam = self.membership(L)
        same = pb.conj(pb.Apply(self.sub, tuple(xs + ys)), pb.Apply(self.sub, tuple(ys + xs)))
        body = pb.conj(
            pb.Apply(lam, tuple(xs)),
            pb.forall_all(ys, pb.implies(pb.conj(pb.Apply(lam, tuple(ys)), same), lex_leq(xs, ys))),
        )
        self.canon = pb.Macro("canon", tuple(xs), body)
        self._alpha = {}
        self.compiler = pb.Compiler()

    def membership(self, K: Dfa) -> pb.Macro:
        K = fa.canonical(K)
        m = self.langs.get(K)
        if m is None:
            xs = [f"m{i}" for i in range(self.n)]
            m = self.langs[K] = pb.Macro(f"in{len(self.langs)}", tuple(xs), g_preimage_formula(K, self.B, xs))
        return m

    def components(self, name):
        return tuple(f"{name}.{i}" for i in range(self.n))

    def term(self, t, consts):
        if isinstance(t, Var):
            return self.components(t.name)
        return consts[t.text]

    def atom(self, f, consts):
        if isinstance(f, Const):
            return pb.Const(f.value)
        if isinstance(f, In):
            return pb.Apply(self.membership(f.lang), self.term(f.term, consts))
        a, b = self.term(f.left, consts), self.term(f.right, consts)
        if isinstance(f, Eq):
            return pb.conj(*(pb.eq(x, y) for x, y in zip(a, b)))
        sub = pb.Apply(self.sub, a + b)
        if isinstance(f, Sub):
            return sub
        # cover: subword and one letter longer
        lens = [len(w) for w in self.B.words]
        coeffs = {}
        for x, c in zip(b, lens):
            coeffs[x] = coeffs.get(x, 0) + c
        for x, c in zip(a, lens):
            coeffs[x] = coeffs.get(x, 0) - c
        return pb.conj(sub, pb.linear(coeffs, "=", 1))

    def formula(self, f, consts):
        if isinstance(f, (Const, Sub, Eq, In, Cover)):
            return self.atom(f, consts)
        if isinstance(f, Not):
            return pb.neg(self.formula(f.body, consts))
        if isinstance(f, And):
            return pb.conj(*(self.formula(a, consts) for a in f.args))
        if isinstance(f, Or):
            return pb.disj(*(self.formula(a, consts) for a in f.args))
        xs = self.components(f.var)
        guard = pb.Apply(self.canon, xs)
        body = self.formula(f.body, consts)
        if isinstance(f, Exists):
            return pb.exists_all(xs, pb.conj(guard, body))
        if isinstance(f, Forall):
            return pb.forall_all(xs, pb.implies(guard, body))
        if isinstance(f, CountMod):
            return self.count_mod(xs, f.p, f.q, pb.conj(guard, body))
        raise BoundedError("threshold quantifiers must be lowered before translation")

    def count_mod(self, xs, p, q, body):
        """Count the tuples xs satisfying body modulo q, one component at a time.

        A prefix of components is summarised by the residue of its number
        of completions.  Completions with residue 0 are skipped in the sum
        (there are infinitely many empty ones); instead the prefix values
        with any completion must be finitely many and each must have a
        finite count.
        """
        n = len(xs)
        if n == 0:
            return pb.Const(p == 0)
        outer = sorted(pb.free_vars(body) - set(xs))
        memo = {}

        def alpha(k, r):
            key = (k, r)
            if key in memo:
                return memo[key]
            params = tuple(outer) + tuple(xs[:k])
            if k == n - 1:
                inner = pb.CountMod(xs[k], r, q, body)
            else:
                nxt = xs[k]
                has = pb.Macro(f"has{k + 1}", params + (nxt,), pb.exists_all(xs[k + 1:], body))
                some = pb.Apply(has, params + (nxt,))
                finite = pb.disj(pb.CountMod(nxt, 0, 2, some), pb.CountMod(nxt, 1, 2, some))
                every = pb.Forall(nxt, pb.implies(some, pb.disj(*(alpha(k + 1, i) for i in range(q)))))
                sums = []
                for f in product(range(q), repeat=q - 1):
                    if sum((i + 1) * c for i, c in enumerate(f)) % q == r:
                        sums.append(pb.conj(*(pb.CountMod(nxt, c, q, alpha(k + 1, i + 1)) for i, c in enumerate(f))))
                inner = pb.conj(finite, every, pb.disj(*sums))
            macro = pb.Macro(f"alpha{k}_{r}", params, inner)
            memo[key] = pb.Apply(macro, params)
            return memo[key]

        return alpha(0, p)

    def sentence(self, phi) -> pb.Formula:
        consts = {}
        pins = []
        for idx, w in enumerate(sorted(constants(phi))):
            if not self.L.accepts(w):
                raise BoundedError(f'constant "{w}" is not in the domain')
            cs = tuple(f"#c{idx}.{i}" for i in range(self.n))
            consts[w] = cs
            single = fa.from_words([w], self.B.sigma)
            pins.append((cs, pb.conj(pb.Apply(self.canon, cs), pb.Apply(self.membership(single), cs))))
        out = self.formula(phi, consts)
        for cs, pin in reversed(pins):
            out = pb.exists_all(cs, pb.conj(pin, out))
        return out


def canonical_formula(B: BoundedBasis, L: Dfa, names=None) -> pb.Formula:
    """U(names): g(names) is in L and names is the lex-least tuple for that word."""
    T = Translator(B, L)
    names = tuple(names or (f"m{i}" for i in range(len(B))))
    return pb.Apply(T.canon, names)


def translate(phi, B: BoundedBasis, L: Dfa) -> pb.Formula:
    if any(isinstance(g, AtLeast) for g in _walk(phi)):
        raise BoundedError("threshold quantifier present; apply lower_threshold first")
    if free_vars(phi):
        raise BoundedError(f"not a sentence: free {sorted(free_vars(phi))}")
    return Translator(B, L).sentence(phi)


def _walk(f):
    yield f
    if isinstance(f, Not):
        yield from _walk(f.body)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from _walk(a)
    elif isinstance(f, (Exists, Forall, AtLeast, CountMod)):
        yield from _walk(f.body)


def _resolve_basis(L: Dfa, basis) -> BoundedBasis:
    if basis is None:
        from .sigma1 import check_bounded
        shape = check_bounded(L)
        if not shape.is_bounded:
            raise BoundedError("language is not bounded")
        basis = shape.words
    B = basis if isinstance(basis, BoundedBasis) else BoundedBasis(tuple(basis), L.alphabet)
    if not B.covers(L):
        raise BoundedError("language is not contained in the block language of the basis")
    return B


def decide_bounded(phi, L: Dfa, basis=None) -> bool:
    """Truth of a sentence over (L, subword, regular predicates) for bounded L."""
    B = _resolve_basis(L, basis)
    return pb.decide_sentence(translate(lower_threshold(phi), B, L), pb.Compiler())


def bounded_witness(phi, L: Dfa, basis=None):
    """Words for the leading existential variables of phi, or None if false."""
    B = _resolve_basis(L, basis)
    names = []
    body = lower_threshold(phi)
    while isinstance(body, Exists):
        names.append(body.var)
        body = body.body
    if not names:
        raise BoundedError("sentence does not start with an existential quantifier")
    T = Translator(B, L)
    out = {}
    # fix one variable at a time; later ones see earlier choices as constants
    for i, x in enumerate(names):
        rest = body
        for y in reversed(names[i + 1:]):
            rest = Exists(y, rest)
        for y, w in out.items():
            rest = substitute(rest, y, w)
        xs = T.components(x)
        A = pb.compile_formula(pb.conj(pb.Apply(T.canon, xs), T.sentence(rest)), T.compiler)
        sol = A.witness()
        if sol is None:
            return None
        out[x] = B.g([sol.get(c, 0) for c in xs])
    return out
