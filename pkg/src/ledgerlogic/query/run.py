"""Evaluate parsed queries against a ledger and its registered contracts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..automata import Contract
from ..core import Transfer
from ..ledger import LedgerState, UnknownContract
from ..logic.formula import (
    And, AppAt, BoxDown, Chi, DiamondDown, DiamondUp, ExistsAlong, Formula,
    NextBox, NextDia, Not, PhiT,
)
from ..logic.semantics import IndexOutOfRange, eval_formula, evolution_at, interpret_formula
from ..logic.universe import ExplicitTree, LedgerUniverse, Tree
from .parser import Hypothetical, Pattern, QueryAst, StateOf, parse_query

FORWARD = (DiamondUp, BoxDown, NextDia, NextBox)


def looks_forward(f: Formula) -> bool:
    """Whether ``f`` quantifies over prolongations anywhere inside."""
    if isinstance(f, FORWARD):
        return True
    return any(
        looks_forward(v) for v in vars(f).values() if isinstance(v, Formula)
    )


@dataclass(frozen=True)
class QueryResult:
    kind: str
    verdict: bool
    value: object = None
    witnesses: tuple = ()
    truncated: bool = False
    summary: str = ""

    def to_json(self, command: str = "query eval") -> dict:
        return {
            "command": command,
            "verdict": self.verdict,
            "witnesses": list(self.witnesses),
            "truncated_at_horizon": self.truncated,
        }


def _contracts(ledger: LedgerState, contracts: Iterable[Contract] | None) -> list[Contract]:
    return list(contracts) if contracts is not None else list(ledger.contracts.values())


def _step(ledger: LedgerState, at: int | None) -> int:
    t = len(ledger) if at is None else at
    if not 0 <= t <= len(ledger):
        raise IndexOutOfRange(f"step {t} outside 0..{len(ledger)}")
    return t


def _pick(cs: list[Contract], cid: str | None) -> Contract:
    if cid is not None:
        for c in cs:
            if c.id == cid:
                return c
        raise UnknownContract(cid)
    if len(cs) != 1:
        raise ValueError("several contracts are registered; name one")
    return cs[0]


def state_of(
    ledger: LedgerState,
    n: int,
    k: int,
    contract: Contract,
    universe: LedgerUniverse | None = None,
) -> QueryResult:
    """Contract states of the length-``k`` ledger states in the evolution after ``n`` steps.

    The length is pinned exactly (``chi(k) and not chi(k-1)``) so that a single
    recorded prefix maps to a single labeling.
    """
    u = universe if universe is not None else LedgerUniverse(ledger, [contract], None, "contract")
    if not 0 <= n <= len(u.trace):
        raise IndexOutOfRange(f"step {n} outside 0..{len(u.trace)}")
    exact = And(PhiT(n), And(Chi(k), Not(Chi(k - 1))))
    btree, ltree = u.label_trees[contract.id]
    legal = interpret_formula(ExistsAlong(f"nu_l:{contract.id}", exact), btree, btree.max_depth)
    execs = interpret_formula(ExistsAlong(f"nu_e:{contract.id}", exact), ltree, ltree.max_depth)
    legal_states = sorted({contract.legal_state_of(bl) for bl in legal.paths})
    exec_states = sorted({_exec_state(contract, tl) for tl in execs.paths})
    witnesses = [
        {"legal": v, "outcome": contract.outcome(v)} for v in legal_states
    ] + [{"exec": s} for s in exec_states]
    parts = [f"{v} ({contract.outcome(v)})" if contract.outcome(v) else v for v in legal_states]
    summary = f"legal: {', '.join(parts) or '-'}; exec: {', '.join(exec_states) or '-'}"
    return QueryResult(
        "state-of", bool(legal_states), {"legal": legal_states, "exec": exec_states},
        tuple(witnesses), u.truncated and k > n, summary,
    )


def _exec_state(c: Contract, tl: Sequence[Transfer]) -> str:
    s = c.exec.initial
    for t in tl:
        s = c.exec.step(s, c.action_of[t]).target
    return s.name


def hypothetical(f: Formula, t: int, universe: Tree) -> QueryResult:
    """Is the step-``t`` state in ``not f and PAST EXF f and phi(t)``? Witnesses: the reviving prefixes."""
    sigma = tuple(universe.trace[:t])
    verdict = eval_formula(And(Not(f), And(DiamondDown(DiamondUp(f)), PhiT(t))), sigma, universe)
    revive = [k for k in range(t + 1) if eval_formula(DiamondUp(f), sigma[:k], universe)]
    return QueryResult(
        "hypothetical", verdict, revive, tuple({"prefix": k} for k in revive), universe.truncated,
        f"{'yes' if verdict else 'no'}; prefixes with a future satisfying the formula: {revive}",
    )


def pair_formula(first: Transfer, second: Transfer, n_first: int, n_second: int) -> Formula:
    return DiamondDown(And(AppAt(second, n_second), DiamondDown(AppAt(first, n_first))))


def repetition_formula(first: Transfer, second: Transfer, a: tuple[int, int], b: tuple[int, int]) -> Formula:
    return And(
        pair_formula(first, second, *a),
        DiamondUp(And(DiamondDown(AppAt(second, b[1])), DiamondDown(AppAt(first, b[0])))),
    )


def pattern_audit(trace: Sequence[Transfer], first: Transfer, second: Transfer, t: int | None = None) -> QueryResult:
    """Occurrences of ``first`` followed later by ``second`` in the first ``t`` records.

    Each occurrence of ``second`` is paired with the latest ``first`` after the
    previous pair; indices are 0-based record positions.
    """
    t = len(trace) if t is None else t
    sigma = tuple(trace[:t])
    past = ExplicitTree([sigma[:k] for k in range(t + 1)], trace=sigma)
    pairs: list[tuple[int, int]] = []
    floor = 0
    for n in range(1, t + 1):
        if not eval_formula(DiamondDown(AppAt(second, n)), sigma, past):
            continue
        for n1 in range(n - 1, floor, -1):
            if eval_formula(pair_formula(first, second, n1, n), sigma, past):
                pairs.append((n1, n))
                floor = n
                break
    repeated = len(pairs) >= 2 and eval_formula(
        repetition_formula(first, second, pairs[0], pairs[1]), sigma[: pairs[0][1]], past
    )
    witnesses = tuple({"first": a - 1, "second": b - 1} for a, b in pairs)
    shown = ", ".join(f"({a - 1},{b - 1})" for a, b in pairs) or "none"
    return QueryResult(
        "pattern", bool(pairs), {"pairs": [(a - 1, b - 1) for a, b in pairs], "repeated": repeated},
        witnesses, False, f"occurrences at record indices {shown}; repeated: {repeated}",
    )


def run_query(
    ledger: LedgerState,
    contracts: Iterable[Contract] | None,
    ast: QueryAst | str,
    at: int | None = None,
    horizon: int | None = None,
    gate: str = "contract",
) -> QueryResult:
    if isinstance(ast, str):
        ast = parse_query(ast)
    cs = _contracts(ledger, contracts)
    body = ast.body
    if isinstance(body, Pattern):
        return pattern_audit(ledger.transfers, body.first, body.second, _step(ledger, at))
    u = LedgerUniverse(ledger, cs, horizon, gate)
    if isinstance(body, StateOf):
        return state_of(ledger, body.n, body.k, _pick(cs, body.contract), u)
    t = _step(ledger, at)
    if isinstance(body, Hypothetical):
        r = hypothetical(body.formula, t, u)
        return QueryResult(r.kind, r.verdict, r.value, r.witnesses,
                           u.truncated and looks_forward(DiamondUp(body.formula)), r.summary)
    ev = evolution_at(ledger, t, universe=u)
    verdict = ev.satisfies(body, ev.established)
    return QueryResult(
        "formula", verdict, verdict, (), u.truncated and looks_forward(body),
        f"{'true' if verdict else 'false'} at step {t}",
    )


__all__ = [
    "QueryResult", "hypothetical", "looks_forward", "pattern_audit", "run_query", "state_of",
]
