"""Formula AST for the ledger temporal logic, plus a canonical printer.

Times in ``Chi``, ``AppAt``, ``AppLast``, ``Hol`` and ``PhiT`` are step
counts: ``AppAt(theta, n)`` says the n-th transfer (1-based) is ``theta``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Union

from ..core import Bundle, Transfer


class Formula:
    """Base class; every node is a frozen dataclass and thus hashable."""

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


# -- atoms -----------------------------------------------------------------


@dataclass(frozen=True)
class Chi(Formula):
    """Path length is at most ``t``."""
    t: int


@dataclass(frozen=True)
class App(Formula):
    """``theta`` occurs somewhere on the path."""
    transfer: Transfer


@dataclass(frozen=True)
class AppAt(Formula):
    transfer: Transfer
    n: int


@dataclass(frozen=True)
class AppLast(Formula):
    """``theta`` is the last transfer and the path has length between 1 and ``t``."""
    transfer: Transfer
    t: int


@dataclass(frozen=True)
class Hol(Formula):
    """Actor ``actor`` holds ``resource`` after ``t`` steps (path has length at least ``t``)."""
    resource: str
    actor: str
    t: int


@dataclass(frozen=True)
class PhiT(Formula):
    """Membership in the evolution after ``t`` recorded steps."""
    t: int


Label = Union[Transfer, Bundle]


@dataclass(frozen=True)
class Zeta(Formula):
    """Singleton subtree of a labeling tree: holds only at ``labeling`` itself."""
    labeling: tuple[Label, ...]


@dataclass(frozen=True)
class BC(Formula):
    """Bundle-complete for contract ``contract``."""
    contract: str


# -- connectives -------------------------------------------------------------


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Modal(Formula):
    operand: Formula


class DiamondUp(Modal):
    """Some prolongation satisfies the operand."""


class BoxDown(Modal):
    """Every prolongation satisfies the operand."""


class DiamondDown(Modal):
    """Some prefix satisfies the operand."""


class BoxUp(Modal):
    """Every prefix satisfies the operand."""


class NextDia(Modal):
    pass


class NextBox(Modal):
    pass


class PrevDia(Modal):
    pass


class PrevBox(Modal):
    pass


for _cls in (DiamondUp, BoxDown, DiamondDown, BoxUp, NextDia, NextBox, PrevDia, PrevBox):
    dataclass(frozen=True)(_cls)


@dataclass(frozen=True)
class Along(Formula):
    map: str
    operand: Formula


class Pullback(Along):
    """Holds at p iff the operand holds at map(p) in the codomain."""


class ExistsAlong(Along):
    """Holds at q iff some p with map(p) = q satisfies the operand."""


class ForallAlong(Along):
    """Holds at q iff every p with map(p) = q satisfies the operand."""


for _cls in (Pullback, ExistsAlong, ForallAlong):
    dataclass(frozen=True)(_cls)


TRUE = TrueF()
FALSE = FalseF()


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    return reduce(And, fs) if fs else TRUE


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    return reduce(Or, fs) if fs else FALSE


# -- printing ----------------------------------------------------------------

MODAL_KEYWORDS = {
    DiamondUp: "EXF", BoxDown: "ALF", DiamondDown: "PAST", BoxUp: "ALLP",
    NextDia: "NXE", NextBox: "NXA", PrevDia: "PVE", PrevBox: "PVA",
}
ALONG_KEYWORDS = {Pullback: "pullback", ExistsAlong: "exists", ForallAlong: "forall"}
BINARY_KEYWORDS = {And: "and", Or: "or", Implies: "=>"}


BARE_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")


def ident_text(name: str) -> str:
    """Identifiers print bare when they lex as one token, else as a JSON string."""
    return name if BARE_IDENT.match(name) else json.dumps(name, ensure_ascii=False)


def map_text(name: str) -> str:
    kind, sep, cid = name.partition(":")
    return ident_text(kind) + (":" + ident_text(cid) if sep else "")


def transfer_text(t: Transfer) -> str:
    return f"({ident_text(t.resource)},{ident_text(t.source)},{ident_text(t.target)})"


def label_text(x: Label) -> str:
    if isinstance(x, Bundle):
        return "{" + ",".join(transfer_text(t) for t in sorted(x.transfers)) + "}"
    return transfer_text(x)


def to_text(f: Formula) -> str:
    """Canonical surface syntax; binary nodes are always parenthesized so parsing is unambiguous."""
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Chi):
        return f"chi({f.t})"
    if isinstance(f, App):
        return f"app({transfer_text(f.transfer)})"
    if isinstance(f, AppAt):
        return f"app({transfer_text(f.transfer)},{f.n})"
    if isinstance(f, AppLast):
        return f"applast({transfer_text(f.transfer)},{f.t})"
    if isinstance(f, Hol):
        return f"hol({ident_text(f.resource)},{ident_text(f.actor)},{f.t})"
    if isinstance(f, PhiT):
        return f"phi({f.t})"
    if isinstance(f, BC):
        return f"bc({ident_text(f.contract)})"
    if isinstance(f, Zeta):
        return "zeta[" + ",".join(label_text(x) for x in f.labeling) + "]"
    if isinstance(f, Not):
        return "not " + to_text(f.operand)
    if type(f) in MODAL_KEYWORDS:
        return f"{MODAL_KEYWORDS[type(f)]} {to_text(f.operand)}"
    if type(f) in ALONG_KEYWORDS:
        return f"{ALONG_KEYWORDS[type(f)]} {map_text(f.map)} {to_text(f.operand)}"
    if type(f) in BINARY_KEYWORDS:
        return f"({to_text(f.left)} {BINARY_KEYWORDS[type(f)]} {to_text(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


# -- definitional expansions (used to cross-check the primitive atoms) -------


def applast_expansion(theta: Transfer, t: int) -> Formula:
    """``appLast`` as a finite disjunction of positional occurrences and length bounds."""
    return disj(And(AppAt(theta, n), Chi(n)) for n in range(1, t + 1))


def hol_expansion(
    resource: str,
    actor: str,
    t: int,
    alphabet: Iterable[Transfer],
    initial_holder: str,
) -> Formula:
    """``hol`` through occurrences only: the last move of ``resource`` up to ``t`` went to ``actor``.

    Either some transfer into ``actor`` arrived at step ``n <= t`` with no move
    of the resource away from ``actor`` at steps ``n+1..t``, or ``actor`` held it
    initially and it never left.  The path must be at least ``t`` long.
    """
    moves = [x for x in alphabet if x.resource == resource]
    into = [x for x in moves if x.target == actor]
    away = [x for x in moves if x.source == actor]
    long_enough = Not(Chi(t - 1)) if t > 0 else TRUE

    def stays(lo: int) -> Formula:
        return conj(Not(AppAt(x, m)) for m in range(lo, t + 1) for x in away)

    arrivals = [
        And(AppAt(x, n), stays(n + 1)) for n in range(1, t + 1) for x in into
    ]
    if initial_holder == actor:
        arrivals.append(stays(1))
    return And(disj(arrivals), long_enough)
