"""Formulas over words ordered by the subword relation.

Shared by all word theories.  Terms are variables or constant words;
atoms compare two terms (subword, cover, equality) or test membership in
a regular language.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .automata import Dfa, is_cover, is_subword


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Word:
    text: str

    def __str__(self):
        return f'w"{self.text}"'


class Formula:
    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Sub(Formula):
    left: object
    right: object

    def __str__(self):
        return f"{self.left} << {self.right}"


@dataclass(frozen=True)
class Cover(Formula):
    left: object
    right: object

    def __str__(self):
        return f"{self.left} <. {self.right}"


@dataclass(frozen=True)
class Eq(Formula):
    left: object
    right: object

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class In(Formula):
    term: object
    lang: Dfa
    label: str = field(default="", compare=False)

    def __str__(self):
        return f"{self.term} in {self.label or 'K'}"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def __str__(self):
        return f"!({self.body})"


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __str__(self):
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __str__(self):
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def __str__(self):
        return f"E {self.var}. {self.body}"


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def __str__(self):
        return f"A {self.var}. {self.body}"


@dataclass(frozen=True)
class AtLeast(Formula):
    var: str
    k: int
    body: Formula

    def __str__(self):
        return f"E>={self.k} {self.var}. {self.body}"


@dataclass(frozen=True)
class CountMod(Formula):
    var: str
    p: int
    q: int
    body: Formula

    def __post_init__(self):
        if not 0 <= self.p < self.q:
            raise ValueError("counting quantifier needs 0 <= p < q")

    def __str__(self):
        return f"E[{self.p} mod {self.q}] {self.var}. {self.body}"


QUANTIFIERS = (Exists, Forall, AtLeast, CountMod)
ATOMS = (Const, Sub, Cover, Eq, In)


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


def requantify(f, body):
    """Same quantifier as f around a new body."""
    if isinstance(f, Exists):
        return Exists(f.var, body)
    if isinstance(f, Forall):
        return Forall(f.var, body)
    if isinstance(f, AtLeast):
        return AtLeast(f.var, f.k, body)
    return CountMod(f.var, f.p, f.q, body)


def terms(f):
    if isinstance(f, (Sub, Cover, Eq)):
        return (f.left, f.right)
    if isinstance(f, In):
        return (f.term,)
    return ()


def free_vars(f) -> set:
    if isinstance(f, ATOMS):
        return {t.name for t in terms(f) if isinstance(t, Var)}
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, QUANTIFIERS):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def all_vars(f) -> set:
    if isinstance(f, ATOMS):
        return free_vars(f)
    if isinstance(f, Not):
        return all_vars(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= all_vars(a)
        return out
    return all_vars(f.body) | {f.var}


def constants(f) -> set:
    if isinstance(f, ATOMS):
        return {t.text for t in terms(f) if isinstance(t, Word)}
    if isinstance(f, Not):
        return constants(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= constants(a)
        return out
    return constants(f.body)


def subformulas(f):
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from subformulas(a)
    elif isinstance(f, QUANTIFIERS):
        yield from subformulas(f.body)


def map_atoms(f, fn):
    if isinstance(f, ATOMS):
        return fn(f)
    if isinstance(f, Not):
        return neg(map_atoms(f.body, fn))
    if isinstance(f, And):
        return conj(*(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return disj(*(map_atoms(a, fn) for a in f.args))
    return requantify(f, map_atoms(f.body, fn))


def substitute(f, var: str, value: str):
    """Replace free occurrences of a variable by a constant word."""
    if isinstance(f, QUANTIFIERS):
        if f.var == var:
            return f
        return requantify(f, substitute(f.body, var, value))

    def sub_term(t):
        return Word(value) if isinstance(t, Var) and t.name == var else t

    if isinstance(f, (Sub, Cover, Eq)):
        return type(f)(sub_term(f.left), sub_term(f.right))
    if isinstance(f, In):
        return In(sub_term(f.term), f.lang, f.label)
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return neg(substitute(f.body, var, value))
    if isinstance(f, And):
        return conj(*(substitute(a, var, value) for a in f.args))
    return disj(*(substitute(a, var, value) for a in f.args))


def eliminate_forall(f):
    """Rewrite A x. φ as !E x. !φ everywhere."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return neg(eliminate_forall(f.body))
    if isinstance(f, And):
        return conj(*(eliminate_forall(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(eliminate_forall(a) for a in f.args))
    if isinstance(f, Forall):
        return neg(Exists(f.var, neg(eliminate_forall(f.body))))
    return requantify(f, eliminate_forall(f.body))


def relativize(f, L: Dfa, label="L"):
    """Restrict every quantifier to words of L."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return neg(relativize(f.body, L, label))
    if isinstance(f, And):
        return conj(*(relativize(a, L, label) for a in f.args))
    if isinstance(f, Or):
        return disj(*(relativize(a, L, label) for a in f.args))
    body = relativize(f.body, L, label)
    guard = In(Var(f.var), L, label)
    if isinstance(f, Forall):
        return Forall(f.var, disj(neg(guard), body))
    return requantify(f, conj(guard, body))


def lower_threshold(f):
    """Replace E>=k x. φ by k distinct existential witnesses (fresh names)."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return neg(lower_threshold(f.body))
    if isinstance(f, And):
        return conj(*(lower_threshold(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(lower_threshold(a) for a in f.args))
    body = lower_threshold(f.body)
    if not isinstance(f, AtLeast):
        return requantify(f, body)
    if f.k == 0:
        return TRUE
    used = all_vars(body) | {f.var}
    names = []
    for i in range(f.k):
        n = f"{f.var}{i + 1}"
        while n in used:
            n += "'"
        used.add(n)
        names.append(n)
    parts = [neg(Eq(Var(a), Var(b))) for i, a in enumerate(names) for b in names[i + 1:]]
    parts += [rename(body, f.var, n) for n in names]
    out = conj(*parts)
    for n in reversed(names):
        out = Exists(n, out)
    return out


def rename(f, old: str, new: str):
    """Rename the free variable ``old`` to ``new`` (``new`` must not be captured)."""
    if isinstance(f, QUANTIFIERS):
        if f.var == old:
            return f
        if f.var == new:
            raise ValueError(f"renaming {old} to {new} would be captured")
        return requantify(f, rename(f.body, old, new))

    def rt(t):
        return Var(new) if isinstance(t, Var) and t.name == old else t

    if isinstance(f, (Sub, Cover, Eq)):
        return type(f)(rt(f.left), rt(f.right))
    if isinstance(f, In):
        return In(rt(f.term), f.lang, f.label)
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return neg(rename(f.body, old, new))
    if isinstance(f, And):
        return conj(*(rename(a, old, new) for a in f.args))
    return disj(*(rename(a, old, new) for a in f.args))


def value_of(t, env):
    return t.text if isinstance(t, Word) else env[t.name]


def eval_atom(f, env) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, In):
        return f.lang.accepts(value_of(f.term, env))
    u, v = value_of(f.left, env), value_of(f.right, env)
    if isinstance(f, Sub):
        return is_subword(u, v)
    if isinstance(f, Cover):
        return is_cover(u, v)
    return u == v


def eval_qf(f, env) -> bool:
    """Truth of a quantifier-free formula under a full assignment."""
    if isinstance(f, ATOMS):
        return eval_atom(f, env)
    if isinstance(f, Not):
        return not eval_qf(f.body, env)
    if isinstance(f, And):
        return all(eval_qf(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(eval_qf(a, env) for a in f.args)
    raise ValueError("formula is not quantifier-free")


def is_quantifier_free(f) -> bool:
    return not any(isinstance(g, QUANTIFIERS) for g in subformulas(f))


def prenex_existential(f):
    """Split E x1 ... E xn. matrix into (names, matrix) or return None."""
    names = []
    while isinstance(f, Exists):
        names.append(f.var)
        f = f.body
    if not is_quantifier_free(f):
        return None
    return names, f
