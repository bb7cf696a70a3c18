"""Regular expressions compiled to epsilon-free automata (position automaton).

Expressions can be written as text (single-character literals, ``ε``, ``∅``,
``.``, ``|``, ``*``, ``+``, ``?``, parentheses) or built directly from the
node classes, which is how derived alphabets with tagged labels are handled.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import Alphabet, Nfa, determinize_minimize


class RegexError(ValueError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} at position {position}")
        self.position = position


class Node:
    def __add__(self, other):
        return Cat(self, other)

    def __or__(self, other):
        return Alt(self, other)


@dataclass(frozen=True)
class Eps(Node):
    pass


@dataclass(frozen=True)
class Empty(Node):
    pass


@dataclass(frozen=True)
class Sym(Node):
    """Any one of the given symbols (a character class)."""

    symbols: frozenset


def sym(*labels) -> Sym:
    return Sym(frozenset(labels))


def anyof(labels) -> Node:
    labels = frozenset(labels)
    return Sym(labels) if labels else Empty()


@dataclass(frozen=True)
class Cat(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Alt(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Star(Node):
    body: Node


def plus(e: Node) -> Node:
    return Cat(e, Star(e))


def word(labels) -> Node:
    out = Eps()
    for s in labels:
        out = Cat(out, sym(s))
    return out


def cat(*parts) -> Node:
    out = Eps()
    for p in parts:
        out = Cat(out, p)
    return out


def alt(*parts) -> Node:
    out = Empty()
    for p in parts:
        out = Alt(out, p)
    return out


# --------------------------------------------------------------------------
# text syntax

_SPECIAL = set("()|*+?")
_EPS = {"ε"}
_EMPTY = {"∅"}


class _Parser:
    def __init__(self, text, alphabet):
        self.toks = [(i, c) for i, c in enumerate(text) if not c.isspace()]
        self.pos = 0
        self.alphabet = alphabet
        self.end = len(text)

    def peek(self):
        return self.toks[self.pos][1] if self.pos < len(self.toks) else None

    def where(self):
        return self.toks[self.pos][0] if self.pos < len(self.toks) else self.end

    def parse(self):
        e = self.alternation()
        if self.peek() is not None:
            raise RegexError(f"unexpected {self.peek()!r}", self.where())
        return e

    def alternation(self):
        e = self.concatenation()
        while self.peek() == "|":
            self.pos += 1
            e = Alt(e, self.concatenation())
        return e

    def concatenation(self):
        e = None
        while self.peek() is not None and self.peek() not in "|)":
            f = self.postfix()
            e = f if e is None else Cat(e, f)
        return Eps() if e is None else e

    def postfix(self):
        e = self.atom()
        while self.peek() in ("*", "+", "?"):
            op = self.peek()
            self.pos += 1
            e = Star(e) if op == "*" else plus(e) if op == "+" else Alt(Eps(), e)
        return e

    def atom(self):
        c = self.peek()
        at = self.where()
        if c is None:
            raise RegexError("unexpected end of pattern", at)
        self.pos += 1
        if c == "(":
            e = self.alternation()
            if self.peek() != ")":
                raise RegexError("missing ')'", self.where())
            self.pos += 1
            return e
        if c in _SPECIAL:
            raise RegexError(f"unexpected {c!r}", at)
        if c in _EPS:
            return Eps()
        if c in _EMPTY:
            return Empty()
        if c == ".":
            return Sym(frozenset(self.alphabet.symbols))
        if c not in self.alphabet:
            raise RegexError(f"symbol {c!r} not in alphabet", at)
        return sym(c)


def parse_regex(text: str, alphabet: Alphabet) -> Node:
    return _Parser(text, alphabet).parse()


# --------------------------------------------------------------------------
# position automaton

def to_nfa(expr: Node, alphabet: Alphabet) -> Nfa:
    labels = []  # position -> symbol set
    follow = []

    def walk(e):
        # returns (nullable, first, last)
        if isinstance(e, Eps):
            return True, set(), set()
        if isinstance(e, Empty):
            return False, set(), set()
        if isinstance(e, Sym):
            for s in e.symbols:
                if s not in alphabet:
                    raise RegexError(f"symbol {s!r} not in alphabet")
            p = len(labels)
            labels.append(e.symbols)
            follow.append(set())
            return False, {p}, {p}
        if isinstance(e, Alt):
            n1, f1, l1 = walk(e.left)
            n2, f2, l2 = walk(e.right)
            return n1 or n2, f1 | f2, l1 | l2
        if isinstance(e, Cat):
            n1, f1, l1 = walk(e.left)
            n2, f2, l2 = walk(e.right)
            for p in l1:
                follow[p] |= f2
            return n1 and n2, f1 | f2 if n1 else f1, l1 | l2 if n2 else l2
        if isinstance(e, Star):
            _, f, l = walk(e.body)
            for p in l:
                follow[p] |= f
            return True, f, l
        raise TypeError(f"not a regex node: {e!r}")

    nullable, first, last = walk(expr)
    n = len(labels) + 1
    trans = []
    for p in first:
        trans.extend((0, s, p + 1) for s in labels[p])
    for p, fs in enumerate(follow):
        for q in fs:
            trans.extend((p + 1, s, q + 1) for s in labels[q])
    acc = {p + 1 for p in last} | ({0} if nullable else set())
    return Nfa.build(alphabet, n, trans, {0}, acc)


def compile_regex(pattern, alphabet: Alphabet) -> Nfa:
    expr = parse_regex(pattern, alphabet) if isinstance(pattern, str) else pattern
    return to_nfa(expr, alphabet)


def regex_dfa(pattern, alphabet: Alphabet):
    return determinize_minimize(compile_regex(pattern, alphabet))
