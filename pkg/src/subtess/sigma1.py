"""Existential theories of subword orders on regular languages.

For an unbounded regular language L (not contained in any w1*...wn*),
every finite partial order embeds into (L, subword), so an existential
sentence without constants holds iff its matrix is satisfiable by some
preorder.  With constants the same holds for languages in which every
letter keeps a positive share of long words; bounded languages go to the
arithmetic translation in :mod:`subtess.bounded`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from math import gcd

from . import automata as fa
from .automata import Alphabet, Dfa, is_subword
from .logic import (
    And, AtLeast, Const, CountMod, Cover, Eq, Exists, Forall, In, Not, Or, Sub,
    Var, Word, constants, eval_qf, prenex_existential,
)
from .regex import Star, cat, regex_dfa, word as word_node


class FragmentError(ValueError):
    pass


class UnsupportedTheory(ValueError):
    pass


@dataclass(frozen=True)
class Bounded:
    words: tuple

    @property
    def is_bounded(self):
        return True


@dataclass(frozen=True)
class Unbounded:
    x: object
    p: object
    q: object
    y: object

    @property
    def is_bounded(self):
        return False


@dataclass(frozen=True)
class Preorder:
    n: int
    leq: tuple

    def classes(self):
        """Equivalence classes (mutual leq) as tuples, ordered by first element."""
        seen, out = set(), []
        for i in range(self.n):
            if i in seen:
                continue
            cls = tuple(j for j in range(self.n) if self.leq[i][j] and self.leq[j][i])
            seen.update(cls)
            out.append(cls)
        return out


# --- boundedness -------------------------------------------------------------

def _bfs_path(A: Dfa, src, targets, allowed):
    """Shortest symbol-index path from src to a state in targets inside allowed."""
    prev = {src: None}
    queue = deque([src])
    while queue:
        q = queue.popleft()
        if q in targets:
            path = []
            while prev[q] is not None:
                q, s = prev[q]
                path.append(s)
            return path[::-1]
        for s, t in enumerate(A.delta[q]):
            if t in allowed and t not in prev:
                prev[t] = (q, s)
                queue.append(t)
    return None


def _scc_map(A: Dfa, live):
    comp = {}
    for c in fa.components(A, live):
        for q in c:
            comp[q] = c
    return comp


def _nontrivial(A, comp, q):
    c = comp[q]
    return len(c) > 1 or q in A.delta[q]


def _block_dfa(blocks, sigma: Alphabet) -> Dfa:
    return regex_dfa(cat(*(Star(word_node(b)) for b in blocks)), sigma)


def check_bounded(L: Dfa):
    """Bounded(w1..wn) with L inside w1*...wn*, or Unbounded(x, p, q, y).

    L is unbounded iff some state of its trim automaton has two out-edges
    that stay inside its strongly connected component; the two loops
    through them start with different letters and so do not commute.
    Otherwise every component is a single cycle and the accepted words
    follow finitely many routes through the component DAG.
    """
    A = fa.canonical(L)
    sigma = A.alphabet
    live = fa.trim_states(A)
    if A.initial not in live:
        return Bounded(())
    comp = _scc_map(A, live)
    for q in sorted(live):
        inner = [(s, t) for s, t in enumerate(A.delta[q]) if t in comp[q]]
        if len(inner) >= 2:
            (a, ta), (b, tb) = inner[:2]
            u = [a] + _bfs_path(A, ta, {q}, comp[q])
            v = [b] + _bfs_path(A, tb, {q}, comp[q])
            g = gcd(len(u), len(v))
            p = u * (len(v) // g)
            pq = v * (len(u) // g)
            x = _bfs_path(A, A.initial, {q}, live)
            y = _bfs_path(A, q, A.accepting, live)
            w = sigma.word_from_indices
            return Unbounded(w(x), w(p), w(pq), w(y))
    return Bounded(tuple(_bounded_basis(A, live, comp)))


def _cycle_from(A, comp, q):
    word, t = [], q
    while True:
        s, t = next((s, t2) for s, t2 in enumerate(A.delta[t]) if t2 in comp[q])
        word.append(s)
        if t == q:
            return word


def _bounded_basis(A: Dfa, live, comp) -> list:
    sigma = A.alphabet
    routes = []

    def visit(q, blocks):
        c = comp[q]
        cyclic = _nontrivial(A, comp, q)
        if cyclic:
            loop = _cycle_from(A, comp, q)
            blocks = blocks + [tuple(loop)]
            walk = [q]
            for s in loop[:-1]:
                walk.append(A.delta[walk[-1]][s])
        else:
            loop, walk = [], [q]
        for pos, t in enumerate(walk):
            fixed = [(s,) for s in loop[:pos]]
            if t in A.accepting:
                routes.append(blocks + fixed)
            for s, t2 in enumerate(A.delta[t]):
                if t2 in live and t2 not in c:
                    visit(t2, blocks + fixed + [(s,)])

    visit(A.initial, [])
    blocks = []
    for r in routes:
        for b in r:
            if not blocks or blocks[-1] != b:
                blocks.append(b)
    words = [sigma.word_from_indices(b) for b in blocks]
    # c (w'c)* = (cw')* c: rotate loops so fixed letters can be dropped below
    changed = True
    while changed:
        changed = False
        for i in range(len(words) - 1):
            c, w = words[i], words[i + 1]
            if len(c) == 1 and len(w) > 1 and w[-1] == c:
                trial = words[:i] + [c + w[:-1], c] + words[i + 2:]
                if fa.is_subset(A, _block_dfa(trial, sigma)):
                    words = trial
                    changed = True
                    break
    # drop blocks that are not needed for the inclusion, scanning both ways
    best = None
    for order in (range(len(words)), range(len(words) - 1, -1, -1)):
        kept = list(words)
        for i in order:
            trial = kept[:i] + kept[i + 1:]
            if fa.is_subset(A, _block_dfa(trial, sigma)):
                kept = trial
        if best is None or len(kept) < len(best):
            best = kept
    return best


def in_bounded_form(L: Dfa, words) -> bool:
    return fa.is_subset(L, _block_dfa(list(words), L.alphabet))


# --- primitive words and embeddings -----------------------------------------

def is_primitive(w) -> bool:
    if not w:
        raise ValueError("the empty word is not primitive or imprimitive")
    w = tuple(w)
    n = len(w)
    ww = w + w
    return all(ww[i:i + n] != w for i in range(1, n))


def primitive_pair(witness: Unbounded):
    """(x, u, v, y) with |u| = |v|, uv primitive and x{u,v}*y inside L."""
    p, q = witness.p, witness.q
    r = p + q
    s = p + p
    n = len(r)
    u = r + s * (n - 1)
    v = s * n
    return witness.x, u, v, witness.y


def is_prefix_maximal(x, y, sigma: Alphabet) -> bool:
    """x embeds in y but no one-letter extension xa does."""
    if not is_subword(x, y):
        return False
    return not any(is_subword(sigma.word(tuple(x) + (a,)), y) for a in sigma)


def poset_sat(matrix, names):
    """First preorder on the variables satisfying a constant-free matrix, or None."""
    names = list(names)
    n = len(names)
    pos = {v: i for i, v in enumerate(names)}
    _check_poset_matrix(matrix, pos)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    leq = [[i == j for j in range(n)] for i in range(n)]
    known = [[i == j for j in range(n)] for i in range(n)]

    def consistent(i, j, val):
        for k in range(n):
            if val:
                if known[j][k] and leq[j][k] and known[i][k] and not leq[i][k]:
                    return False
                if known[k][i] and leq[k][i] and known[k][j] and not leq[k][j]:
                    return False
            elif known[i][k] and leq[i][k] and known[k][j] and leq[k][j]:
                return False
        return True

    def holds():
        return _eval_preorder(matrix, pos, leq)

    def search(idx):
        if idx == len(pairs):
            return holds()
        i, j = pairs[idx]
        for val in (False, True):
            if consistent(i, j, val):
                leq[i][j], known[i][j] = val, True
                if search(idx + 1):
                    return True
                known[i][j] = False
                leq[i][j] = False
        return False

    if search(0):
        return Preorder(n, tuple(tuple(r) for r in leq))
    return None


def _check_poset_matrix(f, pos):
    if isinstance(f, (Sub, Eq)):
        for t in (f.left, f.right):
            if not isinstance(t, Var):
                raise FragmentError("constants are not allowed here")
            if t.name not in pos:
                raise FragmentError(f"unbound variable {t.name!r}")
    elif isinstance(f, Const):
        pass
    elif isinstance(f, Not):
        _check_poset_matrix(f.body, pos)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            _check_poset_matrix(a, pos)
    else:
        raise FragmentError(f"literal not supported in existential formulas: {f}")


def _eval_preorder(f, pos, leq) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Sub):
        return leq[pos[f.left.name]][pos[f.right.name]]
    if isinstance(f, Eq):
        i, j = pos[f.left.name], pos[f.right.name]
        return leq[i][j] and leq[j][i]
    if isinstance(f, Not):
        return not _eval_preorder(f.body, pos, leq)
    if isinstance(f, And):
        return all(_eval_preorder(a, pos, leq) for a in f.args)
    return any(_eval_preorder(a, pos, leq) for a in f.args)


def witness_words(P: Preorder, x, u, v, y, L: Dfa | None = None) -> list:
    """Words in x{u,v}*y whose subword order is exactly P.

    Each class e gets the vector t with t_i = 1 iff class i <= e, written
    as v^{t_1}(uv)^n ... v^{t_m}(uv)^n with n = |uv| + m + 3.
    """
    classes = P.classes()
    m = len(classes)
    n = len(u) + len(v) + m + 3
    block = (u + v) * n
    out = [None] * P.n
    for cls in classes:
        e = cls[0]
        t = [P.leq[other[0]][e] for other in classes]
        w = x
        for bit in t:
            w = w + v * bit + block
        w = w + y
        for i in cls:
            out[i] = w
    if L is not None:
        for w in out:
            if not L.accepts(w):
                raise AssertionError("witness word left the language")
    return out


# --- non-negligible languages ------------------------------------------------

def check_nonnegligible(L: Dfa) -> bool:
    """Every letter keeps a positive share of all long words of L.

    Equivalent to: every cycle of the trim automaton reads every letter.
    A cycle avoiding a pumps |w|_a/|w| towards 0; conversely any factor of
    length |Q| contains a full cycle, so |w|_a >= floor(|w|/|Q|).
    """
    A = fa.canonical(L)
    live = fa.trim_states(A)
    k = len(A.alphabet)
    return not any(fa.has_cycle(A, live, set(range(k)) - {a}) for a in range(k))


def minimal_elements(X: Dfa, L: Dfa | None = None) -> list:
    """Subword-minimal words of X (finite by Higman's lemma)."""
    sigma = X.alphabet
    kept = []
    above = fa.empty(sigma)
    while True:
        rest = fa.difference(X, above)
        w = fa.shortest_word(rest)
        if w is None:
            return kept
        layer = fa.finite_words(fa.intersection(rest, fa.length_exactly(len(w), sigma)))
        kept.extend(layer)
        above = fa.union_all([above] + [fa.upward_closure_word(u, sigma) for u in layer], sigma)


# --- deciders ----------------------------------------------------------------

def _split(phi):
    if any(isinstance(g, (AtLeast, CountMod)) for g in _walk(phi)):
        raise FragmentError("counting quantifier not in Σ₁")
    pre = prenex_existential(phi)
    if pre is None:
        raise FragmentError("formula is not existential (Σ₁)")
    names, matrix = pre
    if len(set(names)) != len(names):
        raise FragmentError("variable quantified twice")
    return names, matrix


def _walk(f):
    yield f
    if isinstance(f, Not):
        yield from _walk(f.body)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from _walk(a)
    elif isinstance(f, (Exists, Forall, AtLeast, CountMod)):
        yield from _walk(f.body)


def _check_literals(matrix):
    for g in _walk(matrix):
        if isinstance(g, (Cover, In)):
            raise FragmentError(f"literal not supported in existential formulas: {g}")


def decide_sigma1(phi, L: Dfa) -> bool:
    """Constant-free existential sentence over (L, subword)."""
    names, matrix = _split(phi)
    _check_literals(matrix)
    if constants(matrix):
        raise FragmentError("constants present; use decide_sigma1_constants")
    shape = check_bounded(L)
    if shape.is_bounded:
        from .bounded import decide_bounded
        return decide_bounded(phi, L)
    return poset_sat(matrix, names) is not None


def sigma1_witness(phi, L: Dfa):
    """Assignment of words in L satisfying the matrix (unbounded L), or None."""
    names, matrix = _split(phi)
    shape = check_bounded(L)
    if shape.is_bounded:
        raise UnsupportedTheory("witness construction needs an unbounded language")
    P = poset_sat(matrix, names)
    if P is None:
        return None
    x, u, v, y = primitive_pair(shape)
    return dict(zip(names, witness_words(P, x, u, v, y, L)))


def _nnf(f, positive=True):
    if isinstance(f, Not):
        return _nnf(f.body, not positive)
    if isinstance(f, And):
        parts = tuple(_nnf(a, positive) for a in f.args)
        return ("and", parts) if positive else ("or", parts)
    if isinstance(f, Or):
        parts = tuple(_nnf(a, positive) for a in f.args)
        return ("or", parts) if positive else ("and", parts)
    return ("lit", (f, positive))


def _dnf(node):
    kind, body = node
    if kind == "lit":
        return [[body]]
    if kind == "or":
        return [c for part in body for c in _dnf(part)]
    out = [[]]
    for part in body:
        out = [a + b for a in out for b in _dnf(part)]
    return out


def _is_word(t):
    return isinstance(t, Word)


def _lit_value(atom, positive):
    from .logic import eval_atom
    return eval_atom(atom, {}) == positive


def _substitute_lit(lit, var, value):
    atom, positive = lit

    def st(t):
        return Word(value) if isinstance(t, Var) and t.name == var else t

    if isinstance(atom, (Sub, Eq)):
        atom = type(atom)(st(atom.left), st(atom.right))
    return atom, positive


def _finite_domain(lit, L: Dfa, sigma):
    """(variable, finite set of values) forced by a literal, or None."""
    atom, positive = lit
    if not isinstance(atom, (Sub, Eq)):
        return None
    l, r = atom.left, atom.right
    if isinstance(atom, Eq) and positive:
        if isinstance(l, Var) and _is_word(r):
            return l.name, [r.text] if L.accepts(r.text) else []
        if isinstance(r, Var) and _is_word(l):
            return r.name, [l.text] if L.accepts(l.text) else []
        return None
    if isinstance(atom, Sub):
        if positive and isinstance(l, Var) and _is_word(r):
            return l.name, fa.finite_words(fa.intersection(L, fa.downward_closure_word(r.text, sigma)))
        if not positive and _is_word(l) and isinstance(r, Var):
            rest = fa.difference(L, fa.upward_closure_word(l.text, sigma))
            kind, words = fa.classify(rest)
            if kind == "infinite":
                raise UnsupportedTheory(f'L minus the words above "{l.text}" is infinite')
            return r.name, words
    return None


def _solve_conjunct(lits, names, L, sigma, shape, assignment):
    live = []
    for atom, positive in lits:
        if isinstance(atom, Const) or not any(isinstance(t, Var) for t in (atom.left, atom.right)):
            if not _lit_value(atom, positive):
                return None
            continue
        live.append((atom, positive))
    # step 1: literals that pin a variable to a finite set
    for lit in live:
        found = _finite_domain(lit, L, sigma)
        if found is None:
            continue
        var, values = found
        for value in values:
            sub = [_substitute_lit(other, var, value) for other in live]
            got = _solve_conjunct(sub, names, L, sigma, shape, {**assignment, var: value})
            if got is not None:
                return got
        return None
    # step 2: x not below w becomes "some minimal word of L minus down(w) is below x"
    choices = []
    for atom, positive in live:
        if isinstance(atom, Sub) and not positive and _is_word(atom.right):
            X = fa.difference(L, fa.downward_closure_word(atom.right.text, sigma))
            choices.append([(Sub(Word(m), atom.left), True) for m in minimal_elements(X, L)])
    rest = [lit for lit in live if not (isinstance(lit[0], Sub) and not lit[1] and _is_word(lit[0].right))]
    free = [v for v in names if v not in assignment]
    for picked in product(*choices):
        lits2 = rest + list(picked)
        # step 3: literals with a constant hold once every variable sits above a long word
        between = [(a, p) for a, p in lits2 if isinstance(a.left, Var) and isinstance(a.right, Var)]
        matrix = And(tuple(a if p else Not(a) for a, p in between)) if between else Const(True)
        P = poset_sat(matrix, free)
        if P is None:
            continue
        consts = {t.text for a, _ in lits2 for t in (a.left, a.right) if _is_word(t)}
        # u reads every letter, so u^N lies above any word of length N
        x, u, v, y = primitive_pair(shape)
        x = x + u * (sum(len(c) for c in consts) + 1)
        words = witness_words(P, x, u, v, y, L) if free else []
        return {**assignment, **dict(zip(free, words))}
    return None


def decide_sigma1_constants(phi, L: Dfa, certificate: bool = False):
    """Existential sentence with constants over (L, subword) for unbounded,
    non-negligible L.  With ``certificate`` also returns a satisfying
    assignment (or None)."""
    names, matrix = _split(phi)
    _check_literals(matrix)
    sigma = L.alphabet
    for w in constants(matrix):
        if not L.accepts(w):
            raise ValueError(f'constant "{w}" is not in the domain')
    shape = check_bounded(L)
    if shape.is_bounded:
        raise UnsupportedTheory("bounded language: use the bounded (Presburger) procedure")
    if not check_nonnegligible(L):
        raise UnsupportedTheory("unsupported theory: language is unbounded but some letter is negligible")
    result = None
    for conjunct in _dnf(_nnf(matrix)):
        result = _solve_conjunct(conjunct, names, L, sigma, shape, {})
        if result is not None:
            if not eval_qf(matrix, result):
                raise AssertionError("constructed witness does not satisfy the matrix")
            break
    ok = result is not None
    return (ok, result) if certificate else ok


def decide_existential(phi, L: Dfa) -> bool:
    """Route an existential sentence to the matching procedure."""
    _split(phi)
    if check_bounded(L).is_bounded:
        from .bounded import decide_bounded
        return decide_bounded(phi, L)
    if constants(phi):
        return decide_sigma1_constants(phi, L)
    return decide_sigma1(phi, L)
