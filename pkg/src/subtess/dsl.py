"""Job files: a theory, an alphabet, a domain language and one sentence.

    theory bounded;
    alphabet ab;
    language re"a*b*";
    sentence E[0 mod 2] x. (x << w"aabb");

Optional statements: ``oracle <n>;`` (default slice length for the
oracle), ``expect true|false|unsupported-theory;`` and
``basis "w1,w2,...";`` (block words for the bounded theory).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import automata as fa
from . import presburger as pb
from .automata import Alphabet, Dfa
from .logic import (
    FALSE, TRUE, AtLeast, CountMod, Cover, Eq, Exists, Forall, In, Sub, Var,
    Word, all_vars, conj, constants, disj, free_vars, neg, subformulas,
)
from .regex import RegexError, regex_dfa

THEORIES = ("cmod2", "sigma1", "sigma1c", "bounded", "presburger")


class ParseError(ValueError):
    def __init__(self, message, text="", pos=0):
        self.message = message
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {self.line}, column {self.column}: {message}")


@dataclass
class Job:
    theory: str
    alphabet: Alphabet
    language: Dfa | None
    sentence: object
    language_text: str | None = None
    sentence_text: str = ""
    oracle_bound: int | None = None
    expect: str | None = None
    basis: tuple | None = None
    options: dict = field(default_factory=dict)

    def domain(self) -> Dfa:
        return self.language if self.language is not None else fa.universal(self.alphabet)


# --- tokens -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<space>\s+|\#[^\n]*)
  | (?P<string>(?:re|w|file)?"[^"\n]*")
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><<|<\.|<=|>=|!=|[<>=!&|().;+\-*\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "space":
            out.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


def _string_body(tok: Token) -> str:
    return tok.text[tok.text.index('"') + 1:-1]


class _Parser:
    def __init__(self, text, tokens, alphabet=None, theory=None):
        self.text = text
        self.toks = tokens
        self.i = 0
        self.alphabet = alphabet
        self.theory = theory

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message, tok=None):
        raise ParseError(message, self.text, (tok or self.tok).pos)

    def take(self, text=None, kind=None) -> Token:
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            self.error(f"expected {want}, found {t.text!r}" if t.kind != "end" else f"expected {want}, found end of input")
        self.i += 1
        return t

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            self.i += 1
            return True
        return False

    # word formulas

    def formula(self):
        if self.tok.text in ("E", "A") and self.tok.kind == "name":
            return self.quantified()
        left = self.conjunction()
        parts = [left]
        while self.accept("|"):
            parts.append(self.operand_or_quantified(self.conjunction))
        return disj(*parts) if len(parts) > 1 else left

    def operand_or_quantified(self, rule):
        if self.tok.text in ("E", "A") and self.tok.kind == "name":
            return self.quantified()
        return rule()

    def conjunction(self):
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.operand_or_quantified(self.unary))
        return conj(*parts) if len(parts) > 1 else parts[0]

    def unary(self):
        if self.accept("!"):
            return neg(self.operand_or_quantified(self.unary))
        return self.primary()

    def primary(self):
        t = self.tok
        if self.accept("("):
            f = self.formula()
            self.take(")")
            return f
        if t.kind == "name" and t.text in ("true", "false"):
            self.i += 1
            return TRUE if t.text == "true" else FALSE
        return self.atom()

    def quantified(self):
        q = self.take(kind="name")
        if q.text == "A":
            var = self.variable()
            self.take(".")
            return Forall(var, self.formula())
        kind = "exists"
        k = p = m = None
        if self.accept(">="):
            k = int(self.take(kind="int").text)
            kind = "atleast"
        elif self.accept("["):
            p = int(self.take(kind="int").text)
            self.take("mod")
            m = int(self.take(kind="int").text)
            self.take("]")
            if m < 1 or not 0 <= p < m:
                self.error("counting quantifier needs 0 <= p < q", q)
            kind = "mod"
        var = self.variable()
        self.take(".")
        body = self.formula()
        if kind == "exists":
            return Exists(var, body)
        if kind == "atleast":
            return AtLeast(var, k, body)
        return CountMod(var, p, m, body)

    def variable(self) -> str:
        t = self.take(kind="name")
        if t.text in _KEYWORDS:
            self.error(f"{t.text!r} cannot be a variable", t)
        return t.text

    def term(self):
        t = self.tok
        if t.kind == "string" and t.text.startswith('w"'):
            self.i += 1
            text = _string_body(t)
            for c in text:
                if c not in self.alphabet:
                    self.error(f"constant letter {c!r} not in alphabet", t)
            return Word(self.alphabet.word(list(text)))
        if t.kind == "name" and t.text not in _KEYWORDS:
            self.i += 1
            return Var(t.text)
        self.error(f"expected a variable or w\"...\" constant, found {t.text!r}" if t.kind != "end"
                   else "expected a term, found end of input")

    def atom(self):
        left = self.term()
        t = self.tok
        if self.accept("in"):
            s = self.take(kind="string")
            if not s.text.startswith('re"'):
                self.error('expected re"..." after in', s)
            pattern = _string_body(s)
            try:
                lang = regex_dfa(pattern, self.alphabet)
            except RegexError as e:
                raise ParseError(f"bad regex: {e}", self.text, s.pos) from None
            return In(left, lang, f're"{pattern}"')
        op = t.text
        if op not in ("<<", "<.", "=", "!="):
            self.error(f"expected <<, <., =, != or in, found {op!r}" if t.kind != "end"
                       else "expected a comparison, found end of input")
        self.i += 1
        right = self.term()
        if op == "<<":
            return Sub(left, right)
        if op == "<.":
            return Cover(left, right)
        if op == "=":
            return Eq(left, right)
        return neg(Eq(left, right))

    # Presburger formulas

    def pformula(self):
        if self.tok.text in ("E", "A") and self.tok.kind == "name":
            return self.pquantified()
        parts = [self.pconjunction()]
        while self.accept("|"):
            parts.append(self.pquantified() if self.tok.text in ("E", "A") else self.pconjunction())
        return pb.disj(*parts) if len(parts) > 1 else parts[0]

    def pconjunction(self):
        parts = [self.punary()]
        while self.accept("&"):
            parts.append(self.pquantified() if self.tok.text in ("E", "A") else self.punary())
        return pb.conj(*parts) if len(parts) > 1 else parts[0]

    def punary(self):
        if self.accept("!"):
            return pb.neg(self.pquantified() if self.tok.text in ("E", "A") else self.punary())
        if self.tok.kind == "name" and self.tok.text in ("true", "false"):
            return pb.Const(self.take().text == "true")
        if self.tok.text == "(":
            # parenthesised formula or a parenthesised term on the left of a comparison
            save = self.i
            self.i += 1
            try:
                f = self.pformula()
                self.take(")")
                if self.tok.text not in ("<=", ">=", "<", ">", "=", "!=", "+", "-", "*"):
                    return f
            except ParseError:
                pass
            self.i = save
        return self.patom()

    def pquantified(self):
        q = self.take(kind="name")
        kind = "all" if q.text == "A" else "exists"
        k = p = m = None
        if kind == "exists" and self.accept(">="):
            k = int(self.take(kind="int").text)
            kind = "atleast"
        elif kind == "exists" and self.accept("["):
            p = int(self.take(kind="int").text)
            self.take("mod")
            m = int(self.take(kind="int").text)
            self.take("]")
            if m < 1 or not 0 <= p < m:
                self.error("counting quantifier needs 0 <= p < q", q)
            kind = "mod"
        var = self.variable()
        bound = None
        if self.accept("<="):
            bound = int(self.take(kind="int").text)
        self.take(".")
        body = self.pformula()
        if bound is not None:
            guard = pb.var_le(var, bound)
            body = pb.disj(pb.neg(guard), body) if kind == "all" else pb.conj(guard, body)
        if kind == "all":
            return pb.Forall(var, body)
        if kind == "exists":
            return pb.Exists(var, body)
        if kind == "atleast":
            return pb.AtLeast(var, k, body)
        return pb.CountMod(var, p, m, body)

    def linear_term(self):
        """Returns (coeffs dict, constant)."""
        coeffs, const = {}, 0
        sign = -1 if self.accept("-") else 1
        while True:
            c, v = self.monomial()
            if v is None:
                const += sign * c
            else:
                coeffs[v] = coeffs.get(v, 0) + sign * c
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return coeffs, const

    def monomial(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            c = int(t.text)
            if self.accept("*"):
                return c, self.variable()
            if self.tok.kind == "name" and self.tok.text not in _KEYWORDS:
                return c, self.variable()  # juxtaposed coefficient: 2x
            return c, None
        if t.kind == "name":
            return 1, self.variable()
        if self.accept("("):
            self.error("parenthesised terms are not supported", t)
        self.error(f"expected a number or variable, found {t.text!r}" if t.kind != "end"
                   else "expected a term, found end of input")

    def patom(self):
        lc, lk = self.linear_term()
        t = self.tok
        op = t.text
        if op not in ("<=", ">=", "<", ">", "=", "!="):
            self.error(f"expected a comparison, found {op!r}" if t.kind != "end"
                       else "expected a comparison, found end of input")
        self.i += 1
        rc, rk = self.linear_term()
        diff = dict(lc)
        for v, c in rc.items():
            diff[v] = diff.get(v, 0) - c
        const = rk - lk  # diff . vars  op  const
        paren = op == "=" and self.tok.text == "(" and self.toks[self.i + 1].text == "mod"
        if paren:
            self.i += 1
        if op == "=" and self.accept("mod"):
            m = int(self.take(kind="int").text)
            if paren:
                self.take(")")
            if m < 1:
                self.error("modulus must be positive", t)
            return pb.congruence(diff, const, m)
        if op == "=":
            return pb.linear(diff, "=", const)
        if op == "!=":
            return pb.neg(pb.linear(diff, "=", const))
        if op == "<=":
            return pb.linear(diff, "<=", const)
        if op == "<":
            return pb.linear(diff, "<=", const - 1)
        neg_diff = {v: -c for v, c in diff.items()}
        if op == ">=":
            return pb.linear(neg_diff, "<=", -const)
        return pb.linear(neg_diff, "<=", -const - 1)


_KEYWORDS = {"E", "A", "in", "mod", "true", "false"}


# --- fragments ------------------------------------------------------------------

def check_fragment(theory: str, phi, text: str = "", pos: int = 0):
    """Reject sentences outside the fragment decided for ``theory``."""
    if theory == "cmod2":
        names = sorted(all_vars(phi))
        if len(names) > 2:
            raise ParseError(f"third variable {names[2]!r}: cmod2 allows two variables", text, pos)
        return
    if theory in ("sigma1", "sigma1c"):
        for g in subformulas(phi):
            if isinstance(g, (AtLeast, CountMod)):
                raise ParseError("counting quantifier not in Σ₁", text, pos)
            if isinstance(g, Forall):
                raise ParseError("universal quantifier not in Σ₁", text, pos)
        body = phi
        while isinstance(body, Exists):
            body = body.body
        if any(isinstance(g, (Exists, Forall)) for g in subformulas(body)):
            raise ParseError("quantifier under a connective: formula is not existential (Σ₁)", text, pos)
        for g in subformulas(body):
            if isinstance(g, (Cover, In)):
                raise ParseError("Σ₁ sentences may use only << and =", text, pos)
        if theory == "sigma1" and constants(phi):
            raise ParseError("constants need theory sigma1c", text, pos)


# --- jobs -------------------------------------------------------------------------

def parse_formula(text: str, alphabet: Alphabet, theory: str = "cmod2"):
    tokens = tokenize(text)
    p = _Parser(text, tokens, alphabet, theory)
    f = p.pformula() if theory == "presburger" else p.formula()
    if p.tok.kind != "end":
        p.error(f"unexpected {p.tok.text!r} after the formula")
    return f


def parse_job(text: str) -> Job:
    tokens = tokenize(text)
    p = _Parser(text, tokens)
    seen = {}
    theory = alphabet = language = lang_text = None
    sentence = None
    sentence_text = ""
    sentence_pos = 0
    oracle = expect = basis = None
    while p.tok.kind != "end":
        key = p.take(kind="name")
        if key.text in seen:
            p.error(f"duplicate {key.text!r} statement", key)
        seen[key.text] = key
        if key.text == "theory":
            t = p.take(kind="name")
            if t.text not in THEORIES:
                p.error(f"unknown theory {t.text!r} (expected one of {', '.join(THEORIES)})", t)
            theory = t.text
            p.take(";")
        elif key.text == "alphabet":
            letters = []
            while p.tok.text != ";":
                t = p.tok
                if t.kind == "end":
                    p.error("expected ';' after the alphabet")
                if t.kind == "string":
                    letters.extend(_string_body(t))
                elif t.kind in ("name", "int"):
                    letters.extend(t.text)
                else:
                    p.error(f"unexpected {t.text!r} in alphabet")
                p.i += 1
            p.take(";")
            if not letters or len(set(letters)) != len(letters):
                p.error("alphabet needs distinct letters", key)
            alphabet = Alphabet(tuple(letters))
        elif key.text == "language":
            lang_tok = p.take(kind="string")
            lang_text = lang_tok.text
            p.take(";")
        elif key.text == "sentence":
            if theory is None or alphabet is None:
                p.error("theory and alphabet must come before the sentence", key)
            start = p.tok.pos
            sentence_pos = start
            p.alphabet = alphabet
            p.theory = theory
            sentence = p.pformula() if theory == "presburger" else p.formula()
            sentence_text = text[start:p.tok.pos].strip()
            p.take(";")
        elif key.text == "oracle":
            oracle = int(p.take(kind="int").text)
            p.take(";")
        elif key.text == "expect":
            t = p.take(kind="name")
            val = t.text
            if val == "unsupported" and p.accept("-"):
                val += "-" + p.take(kind="name").text
            if val not in ("true", "false", "unsupported-theory"):
                p.error(f"bad expectation {val!r}", t)
            expect = val
            p.take(";")
        elif key.text == "basis":
            s = p.take(kind="string")
            basis = tuple(w.strip() for w in _string_body(s).split(",") if w.strip())
            p.take(";")
        else:
            p.error(f"unknown statement {key.text!r}", key)
    for need in ("theory", "alphabet", "sentence"):
        if need not in seen:
            raise ParseError(f"missing '{need}' statement", text, len(text))
    if lang_text is not None and language is None:
        language = _load_language(lang_text, alphabet, text, seen["language"].pos)
    if basis is not None:
        for w in basis:
            if any(c not in alphabet for c in w):
                raise ParseError(f"basis word {w!r} uses letters outside the alphabet", text, seen["basis"].pos)
    if theory != "presburger":
        check_fragment(theory, sentence, text, sentence_pos)
        fv = free_vars(sentence)
        if fv:
            raise ParseError(f"free variables {sorted(fv)} in the sentence", text, sentence_pos)
        if language is not None:
            for w in sorted(constants(sentence)):
                if not language.accepts(w):
                    raise ParseError(f'constant "{w}" is not in the domain language', text, sentence_pos)
    elif pb.free_vars(sentence):
        raise ParseError(f"free variables {sorted(pb.free_vars(sentence))} in the sentence", text, sentence_pos)
    return Job(theory, alphabet, language, sentence, lang_text, sentence_text, oracle, expect, basis)


def _load_language(tok_text: str, alphabet: Alphabet, text: str, pos: int) -> Dfa:
    body = tok_text[tok_text.index('"') + 1:-1]
    if tok_text.startswith('re"') or tok_text.startswith('"'):
        try:
            return regex_dfa(body, alphabet)
        except RegexError as e:
            raise ParseError(f"bad regex: {e}", text, pos) from None
    if tok_text.startswith('file"'):
        import json

        try:
            with open(body) as fh:
                A = fa.from_json(json.load(fh))
        except (OSError, ValueError, KeyError) as e:
            raise ParseError(f"cannot load automaton {body!r}: {e}", text, pos) from None
        if A.alphabet != alphabet:
            A = fa.extend_alphabet(A, alphabet)
        return fa.determinize_minimize(A)
    raise ParseError('language must be re"..." or file"..."', text, pos)
