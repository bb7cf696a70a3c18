"""Weighted automata over the naturals with infinity and two finite quotients.

Values are Python ints plus the sentinel ``INF``.  Matrices are sparse: a
list of rows, each row a dict ``{column: nonzero value}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import automata as fa
from .automata import Alphabet, Dfa


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class Semiring:
    name = "?"
    zero = 0
    one = 1
    finite = False

    def add(self, x, y):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def embed(self, n):
        """Image of a natural-or-INF under the quotient map."""
        raise NotImplementedError

    def elements(self):
        raise TypeError(f"{self.name} is infinite")

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.__dict__.items()))))


def _nadd(x, y):
    if x is INF or y is INF:
        return INF
    return x + y


def _nmul(x, y):
    if x == 0 or y == 0:
        return 0
    if x is INF or y is INF:
        return INF
    return x * y


class NatInf(Semiring):
    name = "N∞"

    def add(self, x, y):
        return _nadd(x, y)

    def mul(self, x, y):
        return _nmul(x, y)

    def embed(self, n):
        return n


class Saturating(Semiring):
    """{0..k, INF}: finite results above k collapse to k."""

    finite = True

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("threshold must be >= 0")
        self.k = k
        self.name = f"S{k}∞"

    def embed(self, n):
        return INF if n is INF else min(n, self.k)

    def add(self, x, y):
        return self.embed(_nadd(x, y))

    def mul(self, x, y):
        return self.embed(_nmul(x, y))

    def elements(self):
        return list(range(self.k + 1)) + [INF]


class Modular(Semiring):
    """{0..q, INF}: 0 and q are different; positive values are kept modulo q in 1..q."""

    finite = True

    def __init__(self, q: int):
        if q < 1:
            raise ValueError("modulus must be >= 1")
        self.q = q
        self.name = f"Z{q}∞"

    def embed(self, n):
        if n is INF or n == 0:
            return n
        r = n % self.q
        return self.q if r == 0 else r

    def add(self, x, y):
        return self.embed(_nadd(x, y))

    def mul(self, x, y):
        return self.embed(_nmul(x, y))

    def elements(self):
        return list(range(self.q + 1)) + [INF]


NAT = NatInf()


# --------------------------------------------------------------------------
# sparse linear algebra

def vec_mat(v: Mapping, A, sr: Semiring) -> dict:
    out = {}
    add, mul = sr.add, sr.mul
    for i, x in v.items():
        for j, y in A[i].items():
            z = mul(x, y)
            if z != 0:
                out[j] = add(out[j], z) if j in out else z
    return {j: z for j, z in out.items() if z != 0}


def mat_mul(A, B, sr: Semiring):
    return [vec_mat(row, B, sr) for row in A]


def mat_add(A, B, sr: Semiring):
    out = []
    for ra, rb in zip(A, B):
        row = dict(ra)
        for j, y in rb.items():
            row[j] = sr.add(row[j], y) if j in row else y
        out.append({j: z for j, z in row.items() if z != 0})
    return out


def dot(v: Mapping, w: Mapping, sr: Semiring):
    total = sr.zero
    for i, x in v.items():
        if i in w:
            total = sr.add(total, sr.mul(x, w[i]))
    return total


def zero_matrix(n):
    return [{} for _ in range(n)]


def identity(n):
    return [{i: 1} for i in range(n)]


def dense(A, n):
    return [[A[i].get(j, 0) for j in range(n)] for i in range(n)]


def _bool_mul(X, Y):
    out = []
    for row in X:
        acc = 0
        i = 0
        while row:
            if row & 1:
                acc |= Y[i]
            row >>= 1
            i += 1
        out.append(acc)
    return out


def _bool_power(X, e, n):
    result = [1 << i for i in range(n)]
    base = X
    while e:
        if e & 1:
            result = _bool_mul(result, base)
        e >>= 1
        if e:
            base = _bool_mul(base, base)
    return result


def window_support(A, n):
    """Bitset rows of the support of sum_{t=n+1}^{2n} A^t."""
    B = [sum(1 << j for j in row) for row in A]
    reflexive = [b | (1 << i) for i, b in enumerate(B)]
    return _bool_mul(_bool_power(B, n + 1, n), _bool_power(reflexive, max(n - 1, 0), n))


def star_matrix(A, n: int | None = None):
    """sum_{t>=0} A^t over N∞.

    An entry is INF exactly when sum_{t=n+1}^{2n} A^t is positive there (a
    walk long enough to contain a cycle).  Otherwise every walk has length at
    most n and the entry is the exact weighted walk count, summed here over
    the acyclic part of the support graph.
    """
    if n is None:
        n = len(A)
    if n == 0:
        return []
    W = window_support(A, n)
    acyclic = [not (W[i] >> i & 1) for i in range(n)]
    memo = {}
    M = []
    for i in range(n):
        r = {}
        if acyclic[i]:
            r.update(_iter_row(i, A, acyclic, memo))
        w = W[i]
        j = 0
        while w:
            if w & 1:
                r[j] = INF
            w >>= 1
            j += 1
        M.append(r)
    return M


def _iter_row(i, A, acyclic, memo):
    # iterative post-order to avoid deep recursion on long chains
    stack = [i]
    while stack:
        v = stack[-1]
        if v in memo:
            stack.pop()
            continue
        pending = [k for k in A[v] if acyclic[k] and k not in memo and k != v]
        if pending:
            stack.extend(pending)
            continue
        out = {v: 1}
        for k, x in A[v].items():
            if not acyclic[k]:
                continue
            for j, y in memo[k].items():
                z = _nmul(x, y)
                if z != 0:
                    out[j] = _nadd(out[j], z) if j in out else z
        memo[v] = out
        stack.pop()
    return memo[i]


# --------------------------------------------------------------------------
# weighted automata

@dataclass(frozen=True)
class WeightedAutomaton:
    semiring: Semiring
    alphabet: Alphabet
    dim: int
    lam: dict
    mu: dict  # symbol -> sparse matrix
    nu: dict

    def __hash__(self):
        return id(self)

    def eval(self, word):
        sr = self.semiring
        v = dict(self.lam)
        for s in word:
            if s not in self.mu:
                raise fa.AlphabetError(f"unknown symbol {s!r}")
            v = vec_mat(v, self.mu[s], sr)
            if not v:
                return sr.zero
        return dot(v, self.nu, sr)

    def __call__(self, word):
        return self.eval(word)


def char_function(A: Dfa) -> WeightedAutomaton:
    n = A.state_count
    mu = {}
    for i, s in enumerate(A.alphabet):
        mu[s] = [{A.delta[p][i]: 1} for p in range(n)]
    return WeightedAutomaton(NAT, A.alphabet, n, {A.initial: 1}, mu, {f: 1 for f in A.accepting})


def trim(W: WeightedAutomaton) -> WeightedAutomaton:
    fwd = [set() for _ in range(W.dim)]
    bwd = [set() for _ in range(W.dim)]
    for M in W.mu.values():
        for i, row in enumerate(M):
            for j in row:
                fwd[i].add(j)
                bwd[j].add(i)

    def closure(start, edges):
        seen = set(start)
        stack = list(seen)
        while stack:
            for j in edges[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    keep = sorted(closure(W.lam, fwd) & closure(W.nu, bwd))
    if len(keep) == W.dim:
        return W
    pos = {q: i for i, q in enumerate(keep)}

    def sub(v):
        return {pos[i]: x for i, x in v.items() if i in pos}

    mu = {s: [sub(M[q]) for q in keep] for s, M in W.mu.items()}
    return WeightedAutomaton(W.semiring, W.alphabet, len(keep), sub(W.lam), mu, sub(W.nu))


def _check_map(f: Mapping, W: WeightedAutomaton):
    for s in W.alphabet:
        if s not in f:
            raise ValueError(f"homomorphism undefined on {s!r}")


def push_non_expanding(W: WeightedAutomaton, f: Mapping, target: Alphabet) -> WeightedAutomaton:
    """Sum W over all preimages under a letter-to-letter-or-erasing map."""
    _check_map(f, W)
    if W.semiring != NAT:
        raise ValueError("pushforwards are computed over N∞")
    n = W.dim
    erased = zero_matrix(n)
    for b in W.alphabet:
        img = f[b]
        if len(img) > 1:
            raise ValueError(f"letter {b!r} is expanded to {img!r}")
        if len(img) == 0:
            erased = mat_add(erased, W.mu[b], NAT)
    M = star_matrix(erased, n)
    mu = {a: zero_matrix(n) for a in target}
    for b in W.alphabet:
        img = f[b]
        if len(img) == 1:
            a = img[0]
            target.index(a)
            mu[a] = mat_add(mu[a], mat_mul(W.mu[b], M, NAT), NAT)
    lam = vec_mat(W.lam, M, NAT)
    return WeightedAutomaton(NAT, target, n, lam, mu, dict(W.nu))


def push_non_erasing(W: WeightedAutomaton, f: Mapping, target: Alphabet) -> WeightedAutomaton:
    """Sum W over all preimages under a non-erasing homomorphism (chain expansion)."""
    _check_map(f, W)
    n = W.dim
    rows = {a: [dict() for _ in range(n)] for a in target}
    extra = 0
    chains = []
    for b in W.alphabet:
        img = tuple(f[b])
        if not img:
            raise ValueError(f"letter {b!r} is erased")
        for s in img:
            target.index(s)
        M = W.mu[b]
        for i in range(n):
            if not M[i]:
                continue
            if len(img) == 1:
                r = rows[img[0]][i]
                for j, x in M[i].items():
                    r[j] = _nadd(r[j], x) if j in r else x
                continue
            first = n + extra
            extra += len(img) - 1
            chains.append((i, img, first, M[i]))
    dim = n + extra
    for a in target:
        rows[a].extend(dict() for _ in range(extra))
    for i, img, first, final in chains:
        states = [i] + list(range(first, first + len(img) - 1))
        for k, s in enumerate(img[:-1]):
            rows[s][states[k]][states[k + 1]] = 1
        r = rows[img[-1]][states[-1]]
        for j, x in final.items():
            r[j] = _nadd(r[j], x) if j in r else x
    return WeightedAutomaton(W.semiring, target, dim, dict(W.lam), rows, dict(W.nu))


def push_homomorphism(W: WeightedAutomaton, f: Mapping, target: Alphabet) -> WeightedAutomaton:
    """Sum W over all preimages under an arbitrary homomorphism.

    Split as erase-then-expand: first push along the map that erases the
    letters f sends to the empty word and fixes the rest, then along the
    non-erasing map sending each kept letter b to f(b).  After the first step
    the erased letters carry zero matrices, so their image in the second step
    is an arbitrary placeholder letter.
    """
    _check_map(f, W)
    f1 = {b: ((b,) if len(f[b]) else ()) for b in W.alphabet}
    W1 = trim(push_non_expanding(W, f1, W.alphabet))
    placeholder = (target.symbols[0],)
    f2 = {b: (tuple(f[b]) if len(f[b]) else placeholder) for b in W.alphabet}
    return trim(push_non_erasing(W1, f2, target))


def counting_function(R, L: Dfa) -> WeightedAutomaton:
    """u -> number of v in L with (u, v) in R."""
    from .relations import restrict_range

    S = restrict_range(R, L).S
    return push_homomorphism(trim(char_function(S)), R.h1, R.sigma)


def map_semiring(W: WeightedAutomaton, target: Semiring) -> WeightedAutomaton:
    e = target.embed

    def vec(v):
        out = {i: e(x) for i, x in v.items()}
        return {i: x for i, x in out.items() if x != 0}

    mu = {s: [vec(r) for r in M] for s, M in W.mu.items()}
    return WeightedAutomaton(target, W.alphabet, W.dim, vec(W.lam), mu, vec(W.nu))


@dataclass(frozen=True)
class ValueAutomaton:
    """Deterministic automaton whose states carry the value eval(u)."""

    alphabet: Alphabet
    delta: tuple
    values: tuple

    def preimage(self, target) -> Dfa:
        target = set(target)
        acc = frozenset(i for i, v in enumerate(self.values) if v in target)
        return fa.canonical(Dfa(self.alphabet, self.delta, 0, acc))


def value_automaton(W: WeightedAutomaton) -> ValueAutomaton:
    sr = W.semiring
    if not sr.finite:
        raise ValueError("preimages need a finite semiring")
    mats = [W.mu[s] for s in W.alphabet]
    start = tuple(sorted(W.lam.items()))
    ids = {start: 0}
    order = [start]
    rows = []
    i = 0
    while i < len(order):
        v = dict(order[i])
        i += 1
        row = []
        for M in mats:
            nxt = tuple(sorted(vec_mat(v, M, sr).items()))
            j = ids.get(nxt)
            if j is None:
                j = ids[nxt] = len(order)
                order.append(nxt)
            row.append(j)
        rows.append(tuple(row))
    values = tuple(dot(dict(v), W.nu, sr) for v in order)
    return ValueAutomaton(W.alphabet, tuple(rows), values)


def preimage_regular(W: WeightedAutomaton, target) -> Dfa:
    return value_automaton(W).preimage(target)


def count_at_least(R, L: Dfa, k: int) -> Dfa:
    if k < 0:
        raise ValueError("threshold must be >= 0")
    if k == 0:
        return fa.universal(R.sigma)
    W = map_semiring(counting_function(R, L), Saturating(k))
    return preimage_regular(W, {k, INF})


def count_mod(R, L: Dfa, p: int, q: int) -> Dfa:
    if not 0 <= p < q:
        raise ValueError("need 0 <= p < q")
    W = map_semiring(counting_function(R, L), Modular(q))
    return preimage_regular(W, {p} if p else {0, q})


def to_json(W: WeightedAutomaton) -> dict:
    enc = lambda x: "inf" if x is INF else x  # noqa: E731
    return {
        "semiring": W.semiring.name,
        "dim": W.dim,
        "lambda": {str(i): enc(x) for i, x in sorted(W.lam.items())},
        "mu": {s: [{str(j): enc(x) for j, x in sorted(r.items())} for r in M] for s, M in W.mu.items()},
        "nu": {str(i): enc(x) for i, x in sorted(W.nu.items())},
    }
