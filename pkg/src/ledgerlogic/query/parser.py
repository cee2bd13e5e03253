"""Recursive-descent parser for the formula and query surface syntax.

Grammar (loosest binding first)::

    query    := "state-of" "(" INT "," INT ["," ident] ")"
              | "hypothetical" "(" formula ")"
              | "pattern" "(" transfer "," transfer ")"
              | formula
    formula  := disj ["=>" formula]
    disj     := conj {"or" conj}
    conj     := unary {"and" unary}
    unary    := "not" unary | MODAL unary | ALONG map unary | atom | "(" formula ")"
    map      := ident [":" ident]
    atom     := "true" | "false" | "chi(" INT ")" | "phi(" INT ")" | "bc(" ident ")"
              | "app(" transfer ["," INT] ")" | "applast(" transfer "," INT ")"
              | "hol(" ident "," ident "," (INT | "all[" INT ".." INT "]") ")"
              | "zeta[" [label {"," label}] "]"
    label    := transfer | "{" transfer {"," transfer} "}"
    transfer := "(" ident "," ident "," ident ")"

``ident`` is a bare word or a JSON string literal.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable

from ..core import Bundle, ModelError, Transfer
from ..logic.formula import (
    ALONG_KEYWORDS, BC, FALSE, MODAL_KEYWORDS, TRUE, And, App, AppAt, AppLast, Chi,
    Formula, Hol, Implies, Not, Or, PhiT, Zeta, conj, ident_text, map_text, transfer_text,
)

_MODAL = {kw: cls for cls, kw in MODAL_KEYWORDS.items()}
_ALONG = {kw: cls for cls, kw in ALONG_KEYWORDS.items()}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>=>)
  | (?P<range>\.\.)
  | (?P<int>\d+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.\-]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<punct>[(),{}\[\]:])
    """,
    re.VERBOSE,
)


class QuerySyntaxError(ValueError):
    def __init__(self, position: int, expected: str, found: str = ""):
        got = f", found {found!r}" if found else ""
        super().__init__(f"at position {position}: expected {expected}{got}")
        self.position = position
        self.expected = expected
        self.found = found


class UnknownIdentifier(ValueError):
    def __init__(self, name: str, kind: str):
        super().__init__(f"unknown {kind} {name!r}")
        self.name = name
        self.kind = kind


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int
    value: object = None


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(pos, "a token", text[pos])
        kind = m.lastgroup
        s = m.group()
        if kind == "string":
            try:
                out.append(Token("ident", s, pos, json.loads(s)))
            except json.JSONDecodeError:
                raise QuerySyntaxError(pos, "a valid string literal", s) from None
        elif kind == "int":
            out.append(Token("int", s, pos, int(s)))
        elif kind == "ident":
            out.append(Token("ident", s, pos, s))
        elif kind != "ws":
            out.append(Token("punct", s, pos, s))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


@dataclass(frozen=True)
class Declared:
    """Optional identifier sets; ``None`` means anything goes."""
    resources: frozenset[str] | None = None
    actors: frozenset[str] | None = None
    contracts: frozenset[str] | None = None


@dataclass(frozen=True)
class StateOf:
    n: int
    k: int
    contract: str | None = None


@dataclass(frozen=True)
class Hypothetical:
    formula: Formula


@dataclass(frozen=True)
class Pattern:
    first: Transfer
    second: Transfer


@dataclass(frozen=True)
class QueryAst:
    kind: str  # "formula" | "state-of" | "hypothetical" | "pattern"
    body: Formula | StateOf | Hypothetical | Pattern

    @property
    def formula(self) -> Formula | None:
        if isinstance(self.body, Formula):
            return self.body
        if isinstance(self.body, Hypothetical):
            return self.body.formula
        return None


class _Parser:
    def __init__(self, text: str, declared: Declared):
        self.toks = tokenize(text)
        self.i = 0
        self.declared = declared

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _fail(self, expected: str):
        raise QuerySyntaxError(self.tok.pos, expected, self.tok.text)

    def at_word(self, *words: str) -> bool:
        t = self.tok
        return t.kind == "ident" and t.text in words and t.value == t.text

    def at_punct(self, p: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == p

    def take_punct(self, p: str) -> None:
        if not self.at_punct(p):
            self._fail(repr(p))
        self.i += 1

    def take_int(self) -> int:
        if self.tok.kind != "int":
            self._fail("an integer")
        v = self.tok.value
        self.i += 1
        return v  # type: ignore[return-value]

    def take_ident(self) -> str:
        if self.tok.kind != "ident":
            self._fail("an identifier")
        v = self.tok.value
        self.i += 1
        return v  # type: ignore[return-value]

    def check(self, name: str, kind: str) -> str:
        allowed = getattr(self.declared, kind + "s")
        if allowed is not None and name not in allowed:
            raise UnknownIdentifier(name, kind)
        return name

    def actor(self) -> str:
        name = self.take_ident()
        if name in ("TOP", "BOT"):
            return name
        return self.check(name, "actor")

    # grammar
    def query(self) -> QueryAst:
        if self.at_word("state-of"):
            return self._state_of()
        if self.at_word("hypothetical") and self._next_is("("):
            self.i += 1
            self.take_punct("(")
            f = self.formula()
            self.take_punct(")")
            return self._done(QueryAst("hypothetical", Hypothetical(f)))
        if self.at_word("pattern") and self._next_is("("):
            self.i += 1
            self.take_punct("(")
            a = self.transfer()
            self.take_punct(",")
            b = self.transfer()
            self.take_punct(")")
            return self._done(QueryAst("pattern", Pattern(a, b)))
        return self._done(QueryAst("formula", self.formula()))

    def _next_is(self, p: str) -> bool:
        t = self.toks[self.i + 1]
        return t.kind == "punct" and t.text == p

    def _state_of(self) -> QueryAst:
        self.i += 1
        self.take_punct("(")
        n = self.take_int()
        self.take_punct(",")
        k = self.take_int()
        cid = None
        if self.at_punct(","):
            self.i += 1
            cid = self.check(self.take_ident(), "contract")
        self.take_punct(")")
        return self._done(QueryAst("state-of", StateOf(n, k, cid)))

    def _done(self, q: QueryAst) -> QueryAst:
        if self.tok.kind != "eof":
            self._fail("end of input")
        return q

    def formula(self) -> Formula:
        left = self.disj()
        if self.at_punct("=>"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.at_word("or"):
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.at_word("and"):
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if self.at_word("not"):
            self.i += 1
            return Not(self.unary())
        if t.kind == "ident" and t.value == t.text and t.text in _MODAL:
            self.i += 1
            return _MODAL[t.text](self.unary())
        if t.kind == "ident" and t.value == t.text and t.text in _ALONG:
            self.i += 1
            name = self.map_name()
            return _ALONG[t.text](name, self.unary())
        if self.at_punct("("):
            self.i += 1
            f = self.formula()
            self.take_punct(")")
            return f
        return self.atom()

    def map_name(self) -> str:
        kind = self.take_ident()
        if self.at_punct(":"):
            self.i += 1
            cid = self.take_ident()
            if kind in ("nu_l", "nu_e", "nu_le"):
                self.check(cid, "contract")
            return f"{kind}:{cid}"
        return kind

    def transfer(self) -> Transfer:
        self.take_punct("(")
        r = self.check(self.take_ident(), "resource")
        self.take_punct(",")
        a = self.actor()
        self.take_punct(",")
        b = self.actor()
        self.take_punct(")")
        return Transfer(r, a, b)

    def label(self):
        if self.at_punct("{"):
            self.i += 1
            ts = [self.transfer()]
            while self.at_punct(","):
                self.i += 1
                ts.append(self.transfer())
            self.take_punct("}")
            try:
                return Bundle(frozenset(ts))
            except ModelError as exc:  # repeated resource
                raise QuerySyntaxError(self.toks[self.i - 1].pos, f"a valid bundle ({exc})") from None
        return self.transfer()

    def atom(self) -> Formula:
        t = self.tok
        if t.kind != "ident" or t.value != t.text:
            self._fail("a formula")
        word = t.text
        self.i += 1
        if word == "true":
            return TRUE
        if word == "false":
            return FALSE
        if word in ("chi", "phi"):
            self.take_punct("(")
            n = self.take_int()
            self.take_punct(")")
            return Chi(n) if word == "chi" else PhiT(n)
        if word == "bc":
            self.take_punct("(")
            cid = self.check(self.take_ident(), "contract")
            self.take_punct(")")
            return BC(cid)
        if word == "app":
            self.take_punct("(")
            theta = self.transfer()
            if self.at_punct(","):
                self.i += 1
                n = self.take_int()
                self.take_punct(")")
                return AppAt(theta, n)
            self.take_punct(")")
            return App(theta)
        if word == "applast":
            self.take_punct("(")
            theta = self.transfer()
            self.take_punct(",")
            n = self.take_int()
            self.take_punct(")")
            return AppLast(theta, n)
        if word == "hol":
            self.take_punct("(")
            r = self.check(self.take_ident(), "resource")
            self.take_punct(",")
            k = self.actor()
            self.take_punct(",")
            if self.at_word("all"):
                self.i += 1
                self.take_punct("[")
                lo = self.take_int()
                if self.tok.text != "..":
                    self._fail("'..'")
                self.i += 1
                hi = self.take_int()
                self.take_punct("]")
                self.take_punct(")")
                if hi < lo:
                    raise QuerySyntaxError(t.pos, "an interval with lower bound <= upper bound")
                return conj(Hol(r, k, n) for n in range(lo, hi + 1))
            n = self.take_int()
            self.take_punct(")")
            return Hol(r, k, n)
        if word == "zeta":
            self.take_punct("[")
            labels = []
            if not self.at_punct("]"):
                labels.append(self.label())
                while self.at_punct(","):
                    self.i += 1
                    labels.append(self.label())
            self.take_punct("]")
            return Zeta(tuple(labels))
        self.i -= 1
        self._fail("a formula")
        raise AssertionError("unreachable")


def _declared(resources=None, actors=None, contracts=None) -> Declared:
    fz = lambda xs: None if xs is None else frozenset(xs)  # noqa: E731
    return Declared(fz(resources), fz(actors), fz(contracts))


def parse_formula(
    text: str,
    resources: Iterable[str] | None = None,
    actors: Iterable[str] | None = None,
    contracts: Iterable[str] | None = None,
) -> Formula:
    p = _Parser(text, _declared(resources, actors, contracts))
    f = p.formula()
    p._done(QueryAst("formula", f))
    return f


def parse_query(
    text: str,
    resources: Iterable[str] | None = None,
    actors: Iterable[str] | None = None,
    contracts: Iterable[str] | None = None,
) -> QueryAst:
    return _Parser(text, _declared(resources, actors, contracts)).query()


def query_text(q: QueryAst) -> str:
    from ..logic.formula import to_text

    b = q.body
    if isinstance(b, StateOf):
        tail = f",{ident_text(b.contract)}" if b.contract is not None else ""
        return f"state-of({b.n},{b.k}{tail})"
    if isinstance(b, Hypothetical):
        return f"hypothetical({to_text(b.formula)})"
    if isinstance(b, Pattern):
        return f"pattern({transfer_text(b.first)},{transfer_text(b.second)})"
    return to_text(b)


__all__ = [
    "Declared", "Hypothetical", "Pattern", "QueryAst", "QuerySyntaxError", "StateOf",
    "UnknownIdentifier", "map_text", "parse_formula", "parse_query", "query_text", "tokenize",
]
