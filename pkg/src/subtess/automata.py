"""Finite automata over explicit finite alphabets.

Every DFA returned by a public operation here is in canonical form:
minimal, total, and with states numbered in breadth-first order from the
initial state (symbols visited in alphabet order).  Two canonical DFAs
accept the same language iff they compare equal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class AlphabetError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise AlphabetError("alphabet must be nonempty")
        index = {s: i for i, s in enumerate(syms)}
        if len(index) != len(syms):
            raise AlphabetError("duplicate symbols in alphabet")
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, letters: Iterable[str]) -> "Alphabet":
        return cls(tuple(letters))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, sym):
        return sym in self._index

    def index(self, sym: str) -> int:
        try:
            return self._index[sym]
        except KeyError:
            raise AlphabetError(f"symbol {sym!r} not in alphabet") from None

    @property
    def chars(self) -> bool:
        """True when every symbol is a single character (words are strings)."""
        return all(len(s) == 1 for s in self.symbols)

    def word(self, syms: Sequence[str]):
        return "".join(syms) if self.chars else tuple(syms)

    def word_from_indices(self, idx: Sequence[int]):
        return self.word([self.symbols[i] for i in idx])

    def encode(self, word) -> tuple[int, ...]:
        return tuple(self.index(s) for s in word)


# --------------------------------------------------------------------------
# words

def is_subword(u, v) -> bool:
    it = iter(v)
    return all(c in it for c in u)


def is_cover(u, v) -> bool:
    return len(u) + 1 == len(v) and is_subword(u, v)


def is_incomparable(u, v) -> bool:
    return not is_subword(u, v) and not is_subword(v, u)


def all_words(sigma: Alphabet, n: int):
    """Every word of length <= n, length-then-lex ordered."""
    out = [()]
    layer = [()]
    for _ in range(n):
        layer = [w + (s,) for w in layer for s in sigma.symbols]
        out.extend(layer)
    return [sigma.word(w) for w in out]


def sort_key(sigma: Alphabet):
    return lambda w: (len(w), sigma.encode(w))


# --------------------------------------------------------------------------
# automata

@dataclass(frozen=True)
class Dfa:
    alphabet: Alphabet
    delta: tuple[tuple[int, ...], ...]
    initial: int
    accepting: frozenset

    @property
    def state_count(self) -> int:
        return len(self.delta)

    def step(self, q: int, sym: str) -> int:
        return self.delta[q][self.alphabet.index(sym)]

    def run(self, q: int, word) -> int:
        d, idx = self.delta, self.alphabet.index
        for s in word:
            q = d[q][idx(s)]
        return q

    def accepts(self, word) -> bool:
        return self.run(self.initial, word) in self.accepting

    def __contains__(self, word):
        return self.accepts(word)

    @property
    def transitions(self):
        syms = self.alphabet.symbols
        return [(p, syms[i], q) for p, row in enumerate(self.delta) for i, q in enumerate(row)]

    def to_nfa(self) -> "Nfa":
        succ = tuple(tuple(frozenset((q,)) for q in row) for row in self.delta)
        return Nfa(self.alphabet, succ, frozenset((self.initial,)), self.accepting)

    def is_empty(self) -> bool:
        return not (reachable(self) & self.accepting)


@dataclass(frozen=True)
class Nfa:
    alphabet: Alphabet
    succ: tuple  # succ[state][symbol index] -> frozenset of states
    initial: frozenset
    accepting: frozenset

    @property
    def state_count(self) -> int:
        return len(self.succ)

    @property
    def transitions(self):
        syms = self.alphabet.symbols
        return sorted(
            (p, syms[i], q) for p, row in enumerate(self.succ) for i, qs in enumerate(row) for q in qs
        )

    @classmethod
    def build(cls, alphabet: Alphabet, n: int, transitions, initial, accepting) -> "Nfa":
        rows = [[set() for _ in alphabet.symbols] for _ in range(n)]
        for p, s, q in transitions:
            if not (0 <= p < n and 0 <= q < n):
                raise ValueError(f"transition ({p}, {s!r}, {q}) out of range")
            rows[p][alphabet.index(s)].add(q)
        return cls(
            alphabet,
            tuple(tuple(frozenset(c) for c in row) for row in rows),
            frozenset(initial),
            frozenset(accepting),
        )

    def accepts(self, word) -> bool:
        cur = set(self.initial)
        for s in word:
            i = self.alphabet.index(s)
            cur = {q for p in cur for q in self.succ[p][i]}
            if not cur:
                return False
        return bool(cur & self.accepting)

    def __contains__(self, word):
        return self.accepts(word)


def eliminate_epsilon(alphabet: Alphabet, n: int, transitions, epsilon, initial, accepting) -> Nfa:
    """Build an epsilon-free NFA from one with epsilon moves ``epsilon`` (pairs)."""
    eps = [[] for _ in range(n)]
    for p, q in epsilon:
        eps[p].append(q)

    def closure(p):
        seen = {p}
        stack = [p]
        while stack:
            for q in eps[stack.pop()]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen

    clos = [closure(p) for p in range(n)]
    direct = [[set() for _ in alphabet.symbols] for _ in range(n)]
    for p, s, q in transitions:
        direct[p][alphabet.index(s)].add(q)
    rows = []
    for p in range(n):
        row = []
        for i in range(len(alphabet)):
            tgt = set()
            for r in clos[p]:
                for q in direct[r][i]:
                    tgt |= clos[q]
            row.append(frozenset(tgt))
        rows.append(tuple(row))
    acc = frozenset(p for p in range(n) if clos[p] & set(accepting))
    init = set()
    for p in initial:
        init |= clos[p]
    return Nfa(alphabet, tuple(rows), frozenset(init), acc)


def reachable(A: Dfa) -> set:
    seen = {A.initial}
    stack = [A.initial]
    while stack:
        for q in A.delta[stack.pop()]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def coreachable(A: Dfa) -> set:
    back = [set() for _ in range(A.state_count)]
    for p, row in enumerate(A.delta):
        for q in row:
            back[q].add(p)
    seen = set(A.accepting)
    stack = list(seen)
    while stack:
        for p in back[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def _reachable_mask(delta: np.ndarray, initial: int) -> np.ndarray:
    seen = np.zeros(len(delta), dtype=bool)
    seen[initial] = True
    frontier = np.array([initial])
    while frontier.size:
        nxt = np.unique(delta[frontier].ravel())
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    return seen


def _refine(d: np.ndarray, block: np.ndarray) -> np.ndarray:
    """Coarsest partition refining ``block`` that is stable under ``d``."""
    count = int(block.max()) + 1
    while True:
        key = block
        for c in range(d.shape[1]):
            _, key = np.unique(key * count + block[d[:, c]], return_inverse=True)
            key = key.ravel()
        new_count = int(key.max()) + 1
        if new_count == count:
            return key
        block, count = key, new_count


def _canonical_arrays(alphabet: Alphabet, delta: np.ndarray, initial: int, acc: np.ndarray) -> Dfa:
    live = np.flatnonzero(_reachable_mask(delta, initial))
    pos = np.full(len(delta), -1, dtype=np.int64)
    pos[live] = np.arange(len(live))
    d = pos[delta[live]]
    _, block = np.unique(acc[live].astype(np.int64), return_inverse=True)
    block = _refine(d, block.ravel())
    _, rep = np.unique(block, return_index=True)
    qdelta = block[d[rep]].tolist()
    qacc = acc[live[rep]].tolist()
    start = int(block[pos[initial]])
    order = {start: 0}
    queue = deque([start])
    rows = []
    while queue:
        b = queue.popleft()
        row = []
        for tb in qdelta[b]:
            j = order.get(tb)
            if j is None:
                j = order[tb] = len(order)
                queue.append(tb)
            row.append(j)
        rows.append(tuple(row))
    accepting = frozenset(order[b] for b in order if qacc[b])
    return Dfa(alphabet, tuple(rows), 0, accepting)


def canonical(A: Dfa) -> Dfa:
    """Minimize a total DFA and renumber states breadth-first."""
    delta = np.array(A.delta, dtype=np.int64).reshape(len(A.delta), len(A.alphabet))
    acc = np.zeros(len(A.delta), dtype=bool)
    if A.accepting:
        acc[list(A.accepting)] = True
    return _canonical_arrays(A.alphabet, delta, A.initial, acc)


def _members(mask: int):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def determinize_minimize(A: Nfa) -> Dfa:
    if isinstance(A, Dfa):
        return canonical(A)
    n, k = A.state_count, len(A.alphabet)
    wide = n > 63
    succ = np.zeros((n, k), dtype=object if wide else np.uint64)
    for p, row in enumerate(A.succ):
        for i, qs in enumerate(row):
            m = 0
            for q in qs:
                m |= 1 << q
            succ[p, i] = m
    acc_mask = 0
    for q in A.accepting:
        acc_mask |= 1 << q
    start = 0
    for q in A.initial:
        start |= 1 << q
    ids = {start: 0}
    order = [start]
    rows = []
    empty_row = [0] * k
    i = 0
    while i < len(order):
        members = _members(order[i])
        i += 1
        nxt = np.bitwise_or.reduce(succ[members], axis=0).tolist() if members else empty_row
        row = []
        for m in nxt:
            m = int(m)
            j = ids.get(m)
            if j is None:
                j = ids[m] = len(order)
                order.append(m)
            row.append(j)
        rows.append(row)
    acc = np.array([bool(m & acc_mask) for m in order])
    return _canonical_arrays(A.alphabet, np.array(rows, dtype=np.int64), 0, acc)


def dfa_from_function(alphabet: Alphabet, start, step, accept) -> Dfa:
    """Explore a DFA from ``start`` using ``step(state, symbol_index)``."""
    ids = {start: 0}
    order = [start]
    rows = []
    k = range(len(alphabet))
    i = 0
    while i < len(order):
        cur = order[i]
        i += 1
        row = []
        for s in k:
            nxt = step(cur, s)
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(order)
                order.append(nxt)
            row.append(j)
        rows.append(tuple(row))
    acc = frozenset(j for j, st in enumerate(order) if accept(st))
    return canonical(Dfa(alphabet, tuple(rows), 0, acc))


def universal(sigma: Alphabet) -> Dfa:
    return Dfa(sigma, ((0,) * len(sigma),), 0, frozenset((0,)))


def empty(sigma: Alphabet) -> Dfa:
    return Dfa(sigma, ((0,) * len(sigma),), 0, frozenset())


def from_words(words, sigma: Alphabet) -> Dfa:
    """DFA for a finite set of words (a trie, then minimized)."""
    trie = [{}]
    acc = set()
    for w in words:
        node = 0
        for s in sigma.encode(w):
            nxt = trie[node].get(s)
            if nxt is None:
                nxt = trie[node][s] = len(trie)
                trie.append({})
            node = nxt
        acc.add(node)
    sink = len(trie)
    rows = [tuple(t.get(s, sink) for s in range(len(sigma))) for t in trie]
    rows.append((sink,) * len(sigma))
    return canonical(Dfa(sigma, tuple(rows), 0, frozenset(acc)))


# --------------------------------------------------------------------------
# boolean algebra

_OPS = {
    "union": lambda a, b: a or b,
    "intersection": lambda a, b: a and b,
    "difference": lambda a, b: a and not b,
    "xor": lambda a, b: a != b,
}


def complement(A: Dfa) -> Dfa:
    return canonical(Dfa(A.alphabet, A.delta, A.initial, frozenset(range(A.state_count)) - A.accepting))


# full product tables up to this many entries; larger products are explored
# from the initial pair only
_DENSE_PRODUCT = 1 << 22


def product(A: Dfa, B: Dfa, accept) -> Dfa:
    if A.alphabet != B.alphabet:
        raise AlphabetError("alphabet mismatch")
    na, nb, k = A.state_count, B.state_count, len(A.alphabet)
    if na * nb * k <= _DENSE_PRODUCT:
        da = np.array(A.delta, dtype=np.int64).reshape(na, k)
        db = np.array(B.delta, dtype=np.int64).reshape(nb, k)
        delta = (da[:, None, :] * nb + db[None, :, :]).reshape(na * nb, k)
        fa_ = np.zeros(na, dtype=bool)
        fa_[list(A.accepting)] = True
        fb_ = np.zeros(nb, dtype=bool)
        fb_[list(B.accepting)] = True
        table = np.array([[accept(x, y) for y in (False, True)] for x in (False, True)])
        acc = table[fa_[:, None].astype(int), fb_[None, :].astype(int)].reshape(na * nb)
        return _canonical_arrays(A.alphabet, delta, A.initial * nb + B.initial, acc)
    da, db = A.delta, B.delta
    fa, fb = A.accepting, B.accepting
    return dfa_from_function(
        A.alphabet,
        (A.initial, B.initial),
        lambda st, s: (da[st[0]][s], db[st[1]][s]),
        lambda st: accept(st[0] in fa, st[1] in fb),
    )


def boolean(op: str, A: Dfa, B: Dfa | None = None) -> Dfa:
    if op == "complement":
        if B is not None:
            raise ValueError("complement takes a single automaton")
        return complement(A)
    if op not in _OPS:
        raise ValueError(f"unknown boolean operation {op!r}")
    if B is None:
        raise ValueError(f"{op} needs two automata")
    return product(A, B, _OPS[op])


def union(A, B):
    return boolean("union", A, B)


def intersection(A, B):
    return boolean("intersection", A, B)


def difference(A, B):
    return boolean("difference", A, B)


def union_all(automata, sigma: Alphabet) -> Dfa:
    out = empty(sigma)
    for A in automata:
        out = union(out, A)
    return out


def intersect_all(automata, sigma: Alphabet) -> Dfa:
    out = universal(sigma)
    for A in automata:
        out = intersection(out, A)
    return out


def is_subset(A: Dfa, B: Dfa) -> bool:
    return difference(A, B).is_empty()


# --------------------------------------------------------------------------
# inspection

def _trim_states(A: Dfa) -> set:
    return reachable(A) & coreachable(A)


def classify(A: Dfa):
    """Return ("empty", []), ("finite", words) or ("infinite", None)."""
    live = _trim_states(A)
    if A.initial not in live:
        return ("empty", [])
    colour = {}

    def cyclic(q):
        colour[q] = 1
        for t in A.delta[q]:
            if t not in live:
                continue
            c = colour.get(t)
            if c == 1 or (c is None and cyclic(t)):
                return True
        colour[q] = 2
        return False

    if cyclic(A.initial):
        return ("infinite", None)
    words = []

    def walk(q, prefix):
        if q in A.accepting:
            words.append(tuple(prefix))
        for s, t in enumerate(A.delta[q]):
            if t in live:
                prefix.append(s)
                walk(t, prefix)
                prefix.pop()

    walk(A.initial, [])
    words.sort(key=lambda w: (len(w), w))
    return ("finite", [A.alphabet.word_from_indices(w) for w in words])


def finite_words(A: Dfa):
    kind, words = classify(A)
    if kind == "infinite":
        raise ValueError("language is infinite")
    return words


def enumerate_upto(A: Dfa, n: int):
    """Accepted words of length <= n in length-then-lex order."""
    dist = _distance_to_accept(A)
    out = []
    layer = [((), A.initial)]
    for length in range(n + 1):
        out.extend(w for w, q in layer if q in A.accepting)
        if length == n:
            break
        left = n - length - 1
        layer = [
            (w + (s,), t)
            for w, q in layer
            for s, t in enumerate(A.delta[q])
            if dist.get(t, n + 1) <= left
        ]
    return [A.alphabet.word_from_indices(w) for w in out]


def _distance_to_accept(A: Dfa) -> dict:
    back = [[] for _ in range(A.state_count)]
    for p, row in enumerate(A.delta):
        for q in row:
            back[q].append(p)
    dist = {q: 0 for q in A.accepting}
    queue = deque(A.accepting)
    while queue:
        q = queue.popleft()
        for p in back[q]:
            if p not in dist:
                dist[p] = dist[q] + 1
                queue.append(p)
    return dist


def shortest_word(A: Dfa):
    """A shortest accepted word (lex-least among those), or None."""
    prev = {A.initial: None}
    queue = deque([A.initial])
    while queue:
        q = queue.popleft()
        if q in A.accepting:
            path = []
            while prev[q] is not None:
                q, s = prev[q]
                path.append(s)
            return A.alphabet.word_from_indices(path[::-1])
        for s, t in enumerate(A.delta[q]):
            if t not in prev:
                prev[t] = (q, s)
                queue.append(t)
    return None


def has_cycle(A: Dfa, states: set, allowed=None) -> bool:
    """Does the subgraph on ``states`` (edges filtered by symbol index) contain a cycle?"""
    colour = {}
    for root in states:
        if root in colour:
            continue
        stack = [(root, iter(enumerate(A.delta[root])))]
        colour[root] = 1
        while stack:
            q, it = stack[-1]
            for s, t in it:
                if t not in states or (allowed is not None and s not in allowed):
                    continue
                c = colour.get(t)
                if c == 1:
                    return True
                if c is None:
                    colour[t] = 1
                    stack.append((t, iter(enumerate(A.delta[t]))))
                    break
            else:
                colour[q] = 2
                stack.pop()
    return False


def trim_states(A: Dfa) -> set:
    return _trim_states(A)


def components(A: Dfa, states: set) -> list:
    """Strongly connected components of the subgraph on ``states``.

    Returned in reverse topological order (sinks first), each as a frozenset.
    """
    index, low, on_stack, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in sorted(states):
        if root in index:
            continue
        work = [(root, iter(A.delta[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            q, it = work[-1]
            advanced = False
            for t in it:
                if t not in states:
                    continue
                if t not in index:
                    index[t] = low[t] = counter
                    counter += 1
                    stack.append(t)
                    on_stack.add(t)
                    work.append((t, iter(A.delta[t])))
                    advanced = True
                    break
                if t in on_stack:
                    low[q] = min(low[q], index[t])
            if advanced:
                continue
            work.pop()
            if work:
                p = work[-1][0]
                low[p] = min(low[p], low[q])
            if low[q] == index[q]:
                comp = set()
                while True:
                    t = stack.pop()
                    on_stack.discard(t)
                    comp.add(t)
                    if t == q:
                        break
                out.append(frozenset(comp))
    return out


# --------------------------------------------------------------------------
# homomorphisms and special languages

def inverse_homomorphism(A, h: Mapping, gamma: Alphabet | None = None):
    """Automaton over gamma accepting {u : h(u) in L(A)}."""
    if gamma is None:
        gamma = Alphabet(tuple(h))
    missing = [g for g in gamma if g not in h]
    if missing:
        raise ValueError(f"homomorphism undefined on {missing}")
    images = [A.alphabet.encode(h[g]) for g in gamma]
    if isinstance(A, Dfa):
        rows = []
        for q in range(A.state_count):
            row = []
            for img in images:
                p = q
                for s in img:
                    p = A.delta[p][s]
                row.append(p)
            rows.append(tuple(row))
        return canonical(Dfa(gamma, tuple(rows), A.initial, A.accepting))
    rows = []
    for q in range(A.state_count):
        row = []
        for img in images:
            cur = {q}
            for s in img:
                cur = {t for p in cur for t in A.succ[p][s]}
            row.append(frozenset(cur))
        rows.append(tuple(row))
    return Nfa(gamma, tuple(rows), A.initial, A.accepting)


def upward_closure_word(w, sigma: Alphabet) -> Dfa:
    """DFA for the words having w as a subword."""
    w = sigma.encode(w)
    m = len(w)
    rows = []
    for i in range(m + 1):
        rows.append(tuple(i + 1 if i < m and s == w[i] else i for s in range(len(sigma))))
    return canonical(Dfa(sigma, tuple(rows), 0, frozenset((m,))))


def downward_closure_word(w, sigma: Alphabet) -> Dfa:
    """DFA for the (finite) set of subwords of w; greedy leftmost embedding."""
    enc = sigma.encode(w)
    n = len(enc)
    dead = n + 1
    rows = []
    for i in range(n + 1):
        row = []
        for s in range(len(sigma)):
            j = next((j for j in range(i, n) if enc[j] == s), None)
            row.append(dead if j is None else j + 1)
        rows.append(tuple(row))
    rows.append(tuple([dead] * len(sigma)))
    return canonical(Dfa(sigma, tuple(rows), 0, frozenset(range(n + 1))))


def length_exactly(n: int, sigma: Alphabet) -> Dfa:
    k = len(sigma)
    rows = [tuple([min(i + 1, n + 1)] * k) for i in range(n + 2)]
    return canonical(Dfa(sigma, tuple(rows), 0, frozenset((n,))))


def relabel(A: Dfa, mapping: Sequence[int], target: Alphabet) -> Nfa:
    """Letter-to-letter image: source symbol i becomes target symbol mapping[i]."""
    rows = [[set() for _ in target.symbols] for _ in range(A.state_count)]
    for p, row in enumerate(A.delta):
        for i, q in enumerate(row):
            rows[p][mapping[i]].add(q)
    return Nfa(
        target,
        tuple(tuple(frozenset(c) for c in row) for row in rows),
        frozenset((A.initial,)),
        A.accepting,
    )


def extend_alphabet(A: Dfa, sigma: Alphabet) -> Dfa:
    """Same language over a larger alphabet (new symbols lead to a sink)."""
    if A.alphabet == sigma:
        return A
    sink = A.state_count
    rows = []
    for row in A.delta + ((sink,) * len(A.alphabet),):
        rows.append(tuple(row[A.alphabet.index(s)] if s in A.alphabet else sink for s in sigma))
    return canonical(Dfa(sigma, tuple(rows), A.initial, A.accepting))


# --------------------------------------------------------------------------
# JSON exchange

def to_json(A) -> dict:
    if isinstance(A, Dfa):
        initial = [A.initial]
        states = A.state_count
    else:
        initial = sorted(A.initial)
        states = A.state_count
    return {
        "alphabet": list(A.alphabet.symbols),
        "states": states,
        "initial": initial,
        "accepting": sorted(A.accepting),
        "transitions": [list(t) for t in sorted(A.transitions)],
    }


def from_json(data: dict):
    """Nfa from the exchange format; a Dfa when the data is deterministic and total."""
    sigma = Alphabet(tuple(data["alphabet"]))
    nfa = Nfa.build(sigma, data["states"], data["transitions"], data["initial"], data["accepting"])
    det = len(nfa.initial) == 1 and all(len(c) == 1 for row in nfa.succ for c in row)
    if det:
        rows = tuple(tuple(next(iter(c)) for c in row) for row in nfa.succ)
        return Dfa(sigma, rows, next(iter(nfa.initial)), nfa.accepting)
    return nfa
