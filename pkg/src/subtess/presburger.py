"""Presburger arithmetic with counting quantifiers, decided with bit automata.

Tuples of naturals are read least-significant bit first, one track per
variable (variables sorted by name).  Solution automata are kept in the
padded form: appending all-zero columns never changes acceptance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from . import automata as fa
from .automata import Alphabet, Dfa
from .weighted import (
    INF,
    NAT,
    Modular,
    Saturating,
    WeightedAutomaton,
    map_semiring,
    star_matrix,
    value_automaton,
)

# largest semilinear union compiled directly; beyond this the automaton
# construction is too slow for interactive use
MAX_LINEAR_SETS = 1000
MAX_TABLE_CELLS = 8_000_000  # states x columns of any intermediate automaton


class ResourceLimit(RuntimeError):
    pass


# --------------------------------------------------------------------------
# formulas

class Formula:
    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Linear(Formula):
    """sum(c * v) op bound, with op '=' or '<='."""

    coeffs: tuple  # ((var, coefficient), ...) sorted, nonzero
    op: str
    bound: int


@dataclass(frozen=True)
class Congruence(Formula):
    """sum(c * v) = residue (mod modulus)."""

    coeffs: tuple
    residue: int
    modulus: int


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class AtLeast(Formula):
    var: str
    k: int
    body: Formula


@dataclass(frozen=True)
class CountMod(Formula):
    var: str
    p: int
    q: int
    body: Formula

    def __post_init__(self):
        if not 0 <= self.p < self.q:
            raise ValueError("counting quantifier needs 0 <= p < q")


@dataclass(frozen=True)
class Semilinear(Formula):
    """vars lies in one of the linear sets base + N*periods[0] + N*periods[1] + ..."""

    vars: tuple
    sets: tuple  # ((base, periods), ...)

    def contains(self, point) -> bool:
        return any(_in_semilinear(point, b, p) for b, p in self.sets)


def _in_semilinear(point, base, periods) -> bool:
    rest = [x - b for x, b in zip(point, base)]
    if any(r < 0 for r in rest):
        return False

    def search(j, rest):
        if not any(rest):
            return True
        if j == len(periods):
            return False
        while True:
            if search(j + 1, rest):
                return True
            rest = [r - c for r, c in zip(rest, periods[j])]
            if any(r < 0 for r in rest):
                return False

    return search(0, rest)


@dataclass(frozen=True, eq=False)
class Macro:
    """A named formula with formal parameters, compiled once and reused."""

    name: str
    params: tuple
    body: Formula

    def __post_init__(self):
        extra = free_vars(self.body) - set(self.params)
        if extra:
            raise ValueError(f"macro {self.name} has unbound variables {sorted(extra)}")


@dataclass(frozen=True)
class Apply(Formula):
    macro: Macro
    args: tuple


def _norm(coeffs):
    acc = {}
    for v, c in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
        acc[v] = acc.get(v, 0) + c
    return tuple(sorted((v, c) for v, c in acc.items() if c))


def linear(coeffs, op, bound) -> Formula:
    if op not in ("=", "<="):
        raise ValueError(f"bad comparison {op!r}")
    coeffs = _norm(coeffs)
    if not coeffs:
        return Const(0 == bound if op == "=" else 0 <= bound)
    return Linear(coeffs, op, bound)


def congruence(coeffs, residue, modulus) -> Formula:
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    coeffs = tuple((v, c % modulus) for v, c in _norm(coeffs) if c % modulus)
    residue %= modulus
    if not coeffs:
        return Const(residue == 0)
    return Congruence(coeffs, residue, modulus)


def eq(x, y) -> Formula:
    return linear({x: 1, y: -1} if x != y else {}, "=", 0)


def le(x, y) -> Formula:
    return linear({x: 1, y: -1} if x != y else {}, "<=", 0)


def lt(x, y) -> Formula:
    return linear({x: 1, y: -1} if x != y else {}, "<=", -1)


def var_le(x, b) -> Formula:
    return linear({x: 1}, "<=", b)


def var_eq(x, b) -> Formula:
    return linear({x: 1}, "=", b)


def conj(*args) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif a == TRUE:
            continue
        elif a == FALSE:
            return FALSE
        else:
            flat.append(a)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif a == FALSE:
            continue
        elif a == TRUE:
            return TRUE
        else:
            flat.append(a)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def neg(f) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.body
    return Not(f)


def implies(a, b) -> Formula:
    return disj(neg(a), b)


def exists_all(vars_, body) -> Formula:
    for v in reversed(tuple(vars_)):
        body = Exists(v, body)
    return body


def forall_all(vars_, body) -> Formula:
    for v in reversed(tuple(vars_)):
        body = Forall(v, body)
    return body


def free_vars(f) -> set:
    if isinstance(f, Const):
        return set()
    if isinstance(f, (Linear, Congruence)):
        return {v for v, _ in f.coeffs}
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, (Exists, Forall, AtLeast, CountMod)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, Apply):
        return set(f.args)
    if isinstance(f, Semilinear):
        return set(f.vars)
    raise TypeError(f"not a formula: {f!r}")


def rename(f, mapping: dict) -> Formula:
    """Rename free variables (capture-avoiding for the names in use)."""
    if not mapping:
        return f
    if isinstance(f, Const):
        return f
    if isinstance(f, Linear):
        return linear([(mapping.get(v, v), c) for v, c in f.coeffs], f.op, f.bound)
    if isinstance(f, Congruence):
        return congruence([(mapping.get(v, v), c) for v, c in f.coeffs], f.residue, f.modulus)
    if isinstance(f, Not):
        return Not(rename(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(rename(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(rename(a, mapping) for a in f.args))
    if isinstance(f, Apply):
        return Apply(f.macro, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, Semilinear):
        return Semilinear(tuple(mapping.get(v, v) for v in f.vars), f.sets)
    if isinstance(f, (Exists, Forall, AtLeast, CountMod)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        var = f.var
        if var in inner.values():
            used = free_vars(f.body) | set(inner.values()) | set(inner)
            var = fresh(var, used)
            inner[f.var] = var
        body = rename(f.body, inner)
        if isinstance(f, Exists):
            return Exists(var, body)
        if isinstance(f, Forall):
            return Forall(var, body)
        if isinstance(f, AtLeast):
            return AtLeast(var, f.k, body)
        return CountMod(var, f.p, f.q, body)
    raise TypeError(f"not a formula: {f!r}")


def fresh(base, used) -> str:
    i = 1
    while f"{base}_{i}" in used:
        i += 1
    return f"{base}_{i}"


def expand_thresholds(f) -> Formula:
    """Replace every E>=k by k plain existentials over pairwise distinct witnesses."""
    if isinstance(f, (Const, Linear, Congruence, Apply, Semilinear)):
        return f
    if isinstance(f, Not):
        return Not(expand_thresholds(f.body))
    if isinstance(f, And):
        return And(tuple(expand_thresholds(a) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(expand_thresholds(a) for a in f.args))
    if isinstance(f, Exists):
        return Exists(f.var, expand_thresholds(f.body))
    if isinstance(f, Forall):
        return Forall(f.var, expand_thresholds(f.body))
    if isinstance(f, CountMod):
        return CountMod(f.var, f.p, f.q, expand_thresholds(f.body))
    if isinstance(f, AtLeast):
        body = expand_thresholds(f.body)
        if f.k == 0:
            return TRUE
        used = free_vars(body) | {f.var}
        names = []
        for _ in range(f.k):
            names.append(fresh(f.var, used))
            used.add(names[-1])
        parts = [neg(eq(a, b)) for a, b in itertools.combinations(names, 2)]
        parts += [rename(body, {f.var: n}) for n in names]
        return exists_all(names, conj(*parts))
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# evaluation over a finite domain (test oracle)

def evaluate(f, env: dict, domain: int):
    """Truth value with every quantifier ranging over 0..domain."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Linear):
        s = sum(c * env[v] for v, c in f.coeffs)
        return s == f.bound if f.op == "=" else s <= f.bound
    if isinstance(f, Congruence):
        return sum(c * env[v] for v, c in f.coeffs) % f.modulus == f.residue
    if isinstance(f, Not):
        return not evaluate(f.body, env, domain)
    if isinstance(f, And):
        return all(evaluate(a, env, domain) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env, domain) for a in f.args)
    if isinstance(f, Apply):
        inner = dict(zip(f.macro.params, (env[a] for a in f.args)))
        return evaluate(f.macro.body, inner, domain)
    if isinstance(f, Semilinear):
        return f.contains([env[v] for v in f.vars])
    hits = (evaluate(f.body, {**env, f.var: n}, domain) for n in range(domain + 1))
    if isinstance(f, Exists):
        return any(hits)
    if isinstance(f, Forall):
        return all(hits)
    count = sum(1 for h in hits if h)
    if isinstance(f, AtLeast):
        return count >= f.k
    return count % f.q == f.p


# --------------------------------------------------------------------------
# solution automata

@lru_cache(maxsize=None)
def columns(k: int) -> Alphabet:
    if k == 0:
        return Alphabet(("-",))
    return Alphabet(tuple("".join(str(c >> i & 1) for i in range(k)) for c in range(1 << k)))


@dataclass(frozen=True)
class SolutionAutomaton:
    vars: tuple
    dfa: Dfa
    form: str = "PAD"

    def accepts(self, values: dict) -> bool:
        return self.dfa.accepts(encode(self.vars, values, self.form == "PAD"))

    def solutions_upto(self, bound: int):
        out = []
        for tup in itertools.product(range(bound + 1), repeat=len(self.vars)):
            if self.accepts(dict(zip(self.vars, tup))):
                out.append(tup)
        return out

    def witness(self):
        """Some solution (smallest encoding) or None."""
        w = fa.shortest_word(self.dfa)
        if w is None:
            return None
        vals = {v: 0 for v in self.vars}
        for pos, col in enumerate(w):
            c = self.dfa.alphabet.index(col)
            for i, v in enumerate(self.vars):
                if c >> i & 1:
                    vals[v] += 1 << pos
        return vals


def encode(vars_, values: dict, padded=True, extra=0):
    """Canonical column word for a tuple (plus ``extra`` zero columns)."""
    nums = [values[v] for v in vars_]
    length = max((n.bit_length() for n in nums), default=0) + extra
    alpha = columns(len(vars_))
    word = []
    for pos in range(length):
        c = 0
        for i, n in enumerate(nums):
            c |= (n >> pos & 1) << i
        word.append(alpha.symbols[c])
    return tuple(word)


def _column_sums(coeffs: dict, vars_):
    k = len(vars_)
    a = [coeffs.get(v, 0) for v in vars_]
    return [sum(a[i] for i in range(k) if c >> i & 1) for c in range(1 << k)]


def atom_automaton(atom, vars_) -> SolutionAutomaton:
    vars_ = tuple(sorted(vars_))
    alpha = columns(len(vars_))
    if isinstance(atom, Const):
        return SolutionAutomaton(vars_, fa.universal(alpha) if atom.value else fa.empty(alpha))
    coeffs = dict(atom.coeffs)
    if not set(coeffs) <= set(vars_):
        raise ValueError("atom variables not among the tracks")
    sums = _column_sums(coeffs, vars_) if vars_ else [0]
    if isinstance(atom, Linear):
        if atom.op == "=":
            def step(r, c):
                if r is None:
                    return None
                t = r - sums[c]
                return None if t % 2 else t // 2

            accept = lambda r: r == 0  # noqa: E731
        else:
            def step(r, c):
                return (r - sums[c]) // 2

            accept = lambda r: r >= 0  # noqa: E731
        dfa = fa.dfa_from_function(alpha, atom.bound, step, accept)
        return SolutionAutomaton(vars_, dfa)
    m = atom.modulus
    # state: (accumulated value mod m, 2^position mod m)
    dfa = fa.dfa_from_function(
        alpha,
        (0, 1 % m),
        lambda st, c: ((st[0] + st[1] * sums[c]) % m, (st[1] * 2) % m),
        lambda st: st[0] == atom.residue,
    )
    return SolutionAutomaton(vars_, dfa)


def _linear_nfa(sets, alpha, width):
    """Carry automaton guessing multiplier bits for a family of linear sets."""
    ids = {}
    states = []
    trans = []
    starts = set()
    for base, periods in sets:
        adds = sorted({
            tuple(sum(p[i] for j, p in enumerate(periods) if kappa >> j & 1) for i in range(width))
            for kappa in range(1 << len(periods))
        })
        # carry states are shared between sets with the same period sums
        tag = tuple(adds)
        first = len(states)
        key = (tag, base)
        if key not in ids:
            ids[key] = len(states)
            states.append(key)
        starts.add(ids[key])
        i = first
        while i < len(states):
            tg, carry = states[i]
            if tg == tag:
                for add in adds:
                    total = [c + a for c, a in zip(carry, add)]
                    col = sum((t & 1) << b for b, t in enumerate(total))
                    nxt = (tag, tuple(t >> 1 for t in total))
                    if nxt not in ids:
                        ids[nxt] = len(states)
                        states.append(nxt)
                    trans.append((i, alpha.symbols[col], ids[nxt]))
            i += 1
    zero = (0,) * width
    acc = {i for i, (_, c) in enumerate(states) if c == zero}
    return fa.determinize_minimize(fa.Nfa.build(alpha, len(states), trans, starts, acc))


def semilinear_automaton(f: Semilinear) -> SolutionAutomaton:
    """Direct construction: guess the bits of the multipliers, carry the sums.

    Sets with the same periods share one automaton; the groups are
    determinized separately and then united pairwise.
    """
    names = sorted(set(f.vars))
    if len(names) != len(f.vars):
        raise ValueError("semilinear tracks must be distinct")
    if len(f.sets) > MAX_LINEAR_SETS:
        raise ResourceLimit(f"{len(f.sets)} linear sets exceed the limit of {MAX_LINEAR_SETS}")
    order = [f.vars.index(v) for v in names]
    alpha = columns(len(names))
    groups = {}
    for base, periods in f.sets:
        base = tuple(base[i] for i in order)
        periods = tuple(sorted(tuple(p[i] for i in order) for p in periods))
        groups.setdefault(periods, []).append((base, periods))
    parts = [_linear_nfa(g, alpha, len(names)) for _, g in sorted(groups.items())]
    if not parts:
        parts = [fa.empty(alpha)]
    while len(parts) > 1:
        parts = [fa.union(*parts[i:i + 2]) if i + 1 < len(parts) else parts[i] for i in range(0, len(parts), 2)]
    return SolutionAutomaton(tuple(names), parts[0])


def cylindrify(A: SolutionAutomaton, vars_) -> SolutionAutomaton:
    vars_ = tuple(sorted(vars_))
    if vars_ == A.vars:
        return A
    if not set(A.vars) <= set(vars_):
        raise ValueError("can only add tracks")
    pos = [vars_.index(v) for v in A.vars]
    n = len(vars_)
    _check_size(A.dfa.state_count, n)
    proj = []
    for c in range(1 << n):
        proj.append(sum((c >> p & 1) << i for i, p in enumerate(pos)))
    rows = tuple(tuple(row[proj[c]] for c in range(1 << n)) for row in A.dfa.delta)
    dfa = fa.canonical(Dfa(columns(n), rows, A.dfa.initial, A.dfa.accepting))
    return SolutionAutomaton(vars_, dfa, A.form)


def _check_size(states: int, tracks: int):
    if states << tracks > MAX_TABLE_CELLS:
        raise ResourceLimit(f"automaton with {states} states over {tracks} tracks exceeds {MAX_TABLE_CELLS} table cells")


def align(A: SolutionAutomaton, B: SolutionAutomaton):
    vars_ = tuple(sorted(set(A.vars) | set(B.vars)))
    return cylindrify(A, vars_), cylindrify(B, vars_)


def boolean(op, A: SolutionAutomaton, B: SolutionAutomaton | None = None) -> SolutionAutomaton:
    if op == "complement":
        return SolutionAutomaton(A.vars, fa.complement(A.dfa))
    A, B = align(A, B)
    dfa = fa.boolean(op, A.dfa, B.dfa)
    _check_size(dfa.state_count, len(A.vars))
    return SolutionAutomaton(A.vars, dfa)


def _zero_saturate(dfa: Dfa) -> Dfa:
    """Accept every state from which zero columns alone reach acceptance."""
    acc = set(dfa.accepting)
    for q in range(dfa.state_count):
        seen = set()
        p = q
        while p not in seen:
            if p in dfa.accepting:
                acc.add(q)
                break
            seen.add(p)
            p = dfa.delta[p][0]
    return fa.canonical(Dfa(dfa.alphabet, dfa.delta, dfa.initial, frozenset(acc)))


def exists(A: SolutionAutomaton, y) -> SolutionAutomaton:
    if y not in A.vars:
        return A
    rest = tuple(v for v in A.vars if v != y)
    p = A.vars.index(y)
    mapping = []
    for c in range(1 << len(A.vars)):
        low = c & ((1 << p) - 1)
        high = c >> (p + 1)
        mapping.append(low | (high << p))
    nfa = fa.relabel(A.dfa, mapping, columns(len(rest)))
    return SolutionAutomaton(rest, _zero_saturate(fa.determinize_minimize(nfa)))


@lru_cache(maxsize=None)
def _nonzero_end_dfa(k):
    alpha = columns(k)
    if k == 0:
        return Dfa(alpha, ((1,), (1,)), 0, frozenset((0,)))
    n = len(alpha)
    rows = ((1,) + (2,) * (n - 1), (1,) + (2,) * (n - 1), (1,) + (2,) * (n - 1))
    return fa.canonical(Dfa(alpha, rows, 0, frozenset((0, 2))))


def to_canonical(A: SolutionAutomaton) -> SolutionAutomaton:
    if A.form == "CAN":
        return A
    dfa = fa.intersection(A.dfa, _nonzero_end_dfa(len(A.vars)))
    return SolutionAutomaton(A.vars, dfa, "CAN")


def to_padded(A: SolutionAutomaton) -> SolutionAutomaton:
    if A.form == "PAD":
        return A
    d = A.dfa
    n = d.state_count
    trans = [(p, s, q) for p, s, q in d.transitions]
    zero = d.alphabet.symbols[0]
    trans += [(f, zero, n) for f in d.accepting] + [(n, zero, n)]
    nfa = fa.Nfa.build(d.alphabet, n + 1, trans, {d.initial}, set(d.accepting) | {n})
    return SolutionAutomaton(A.vars, fa.determinize_minimize(nfa), "PAD")


def counting_automaton(A: SolutionAutomaton, y) -> WeightedAutomaton:
    """Weighted automaton over the other tracks: x -> number of y with (x, y) a solution.

    Evaluate it on canonical words only.
    """
    if y not in A.vars:
        raise ValueError(f"{y} is not a track")
    can = to_canonical(A).dfa
    rest = tuple(v for v in A.vars if v != y)
    p = A.vars.index(y)
    k = len(rest)
    alpha = columns(k)
    n = can.state_count

    def full(c, bit):
        low = c & ((1 << p) - 1)
        high = c >> p
        return low | (bit << p) | (high << (p + 1))

    mu = {}
    for c, sym in enumerate(alpha.symbols):
        rows = []
        for q in range(n):
            row = {}
            for bit in (0, 1):
                t = can.delta[q][full(c, bit)]
                row[t] = row.get(t, 0) + 1
            rows.append(row)
        mu[sym] = rows
    # nu[q]: stop now, or read more all-zero x-columns and stop right after a y-bit 1
    zero_star = star_matrix(mu[alpha.symbols[0]], n)
    ends = {q: 1 for q in range(n) if can.delta[q][full(0, 1)] in can.accepting}
    nu = {}
    for q in range(n):
        total = 1 if q in can.accepting else 0
        for r, x in zero_star[q].items():
            if r in ends:
                total = NAT.add(total, x)
        if total != 0:
            nu[q] = total
    return WeightedAutomaton(NAT, alpha, n, {can.initial: 1}, mu, nu)


def count_exists(A: SolutionAutomaton, y, mode) -> SolutionAutomaton:
    """mode is ("at_least", k) or ("mod", p, q)."""
    if y not in A.vars:
        A = cylindrify(A, A.vars + (y,))
    W = counting_automaton(A, y)
    if mode[0] == "at_least":
        k = mode[1]
        rest = tuple(v for v in A.vars if v != y)
        if k == 0:
            return SolutionAutomaton(rest, fa.universal(columns(len(rest))))
        target_sr, target = Saturating(k), {k, INF}
    elif mode[0] == "mod":
        _, p, q = mode
        if not 0 <= p < q:
            raise ValueError("need 0 <= p < q")
        target_sr, target = Modular(q), ({p} if p else {0, q})
    else:
        raise ValueError(f"unknown counting mode {mode!r}")
    dfa = value_automaton(map_semiring(W, target_sr)).preimage(target)
    rest = tuple(v for v in A.vars if v != y)
    dfa = fa.intersection(dfa, _nonzero_end_dfa(len(rest)))
    return to_padded(SolutionAutomaton(rest, dfa, "CAN"))


# --------------------------------------------------------------------------
# compilation of formulas

class Compiler:
    """Bottom-up translation of formulas to solution automata, with memoisation."""

    def __init__(self):
        self.cache = {}
        self.macros = {}

    def macro(self, m: Macro) -> SolutionAutomaton:
        got = self.macros.get(id(m))
        if got is None:
            got = self.macros[id(m)] = (m, self.compile(m.body))
        return got[1]

    def compile(self, f) -> SolutionAutomaton:
        got = self.cache.get(f)
        if got is None:
            got = self.cache[f] = self._compile(f)
        return got

    def _compile(self, f) -> SolutionAutomaton:
        if isinstance(f, (Const, Linear, Congruence)):
            return atom_automaton(f, free_vars(f))
        if isinstance(f, Semilinear):
            return self._semilinear(f)
        if isinstance(f, Not):
            return boolean("complement", self.compile(f.body))
        if isinstance(f, (And, Or)):
            parts = sorted((self.compile(a) for a in f.args), key=lambda A: len(A.vars))
            op = "intersection" if isinstance(f, And) else "union"
            out = parts[0]
            for B in parts[1:]:
                out = boolean(op, out, B)
                if op == "intersection" and out.dfa.is_empty():
                    return SolutionAutomaton(tuple(sorted(free_vars(f))), fa.empty(columns(len(free_vars(f)))))
            return cylindrify(out, free_vars(f))
        if isinstance(f, Exists):
            return exists(self.compile(f.body), f.var)
        if isinstance(f, Forall):
            inner = boolean("complement", self.compile(f.body))
            return boolean("complement", exists(inner, f.var))
        if isinstance(f, AtLeast):
            if f.k == 0:
                return atom_automaton(TRUE, free_vars(f))
            return count_exists(self.compile(f.body), f.var, ("at_least", f.k))
        if isinstance(f, CountMod):
            return count_exists(self.compile(f.body), f.var, ("mod", f.p, f.q))
        if isinstance(f, Apply):
            return self._apply(f)
        raise TypeError(f"not a formula: {f!r}")

    def _semilinear(self, f: Semilinear) -> SolutionAutomaton:
        if len(set(f.vars)) == len(f.vars):
            return semilinear_automaton(f)
        temps = tuple(f"\x00{i}" for i in range(len(f.vars)))
        A = semilinear_automaton(Semilinear(temps, f.sets))
        first = {}
        for t, v in zip(temps, f.vars):
            if v in first:
                A = exists(boolean("intersection", A, atom_automaton(eq(t, first[v]), (t, first[v]))), t)
            else:
                first[v] = t
        return _rename_tracks(A, {t: v for v, t in first.items()})

    def _apply(self, f: Apply) -> SolutionAutomaton:
        m = f.macro
        if len(m.params) != len(f.args):
            raise ValueError(f"macro {m.name} expects {len(m.params)} arguments")
        A = self.macro(m)
        # rename parameters to temporaries, then to the actual arguments
        temps = {p: f"\x00{i}" for i, p in enumerate(m.params)}
        A = _rename_tracks(A, temps)
        seen = {}
        extra = []
        for p, a in zip(m.params, f.args):
            t = temps[p]
            if a in seen:
                extra.append((t, seen[a]))
            else:
                seen[a] = t
        # parameters bound to the same argument: force equal tracks, then drop
        for t, other in extra:
            A = boolean("intersection", A, atom_automaton(eq(t, other), (t, other)))
            A = exists(A, t)
        back = {t: a for a, t in seen.items()}
        return _rename_tracks(A, back)


def _rename_tracks(A: SolutionAutomaton, mapping: dict) -> SolutionAutomaton:
    new = [mapping.get(v, v) for v in A.vars]
    if len(set(new)) != len(new):
        raise ValueError("track renaming must be injective")
    order = sorted(range(len(new)), key=lambda i: new[i])
    if order == list(range(len(new))):
        return SolutionAutomaton(tuple(new), fa.Dfa(A.dfa.alphabet, A.dfa.delta, A.dfa.initial, A.dfa.accepting), A.form)
    # old track order[i] becomes new position i
    k = len(new)
    perm = []
    for c in range(1 << k):
        old = 0
        for i, src in enumerate(order):
            old |= (c >> i & 1) << src
        perm.append(old)
    rows = tuple(tuple(row[perm[c]] for c in range(1 << k)) for row in A.dfa.delta)
    dfa = fa.canonical(Dfa(columns(k), rows, A.dfa.initial, A.dfa.accepting))
    return SolutionAutomaton(tuple(new[i] for i in order), dfa, A.form)


_default = Compiler()


def compile_formula(f, compiler: Compiler | None = None) -> SolutionAutomaton:
    return (compiler or _default).compile(f)


def decide_sentence(f, compiler: Compiler | None = None) -> bool:
    if free_vars(f):
        raise ValueError(f"free variables {sorted(free_vars(f))}")
    A = compile_formula(f, compiler)
    return A.dfa.accepts(())
