"""Occurring maps: from a recorded trace to the initial labeling it realises.

The legal view scans the contract projection once, tracking which actions of
the transitions leaving the current legal state have been seen. When a label
set becomes complete its bundle is emitted and the scan moves on; transfers
that cannot contribute from the current state are *useless* and never become
useful later. The exec view runs the execution automaton the same way and
keeps partial progress in its labeling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .automata import Contract, ExecState, Trajectory, labeling, legal_projection
from .core import Bundle, ModelError, Transfer
from .ledger import LedgerState, project


class NotAnInitialLabeling(ModelError):
    pass


@dataclass(frozen=True)
class OccurrenceResult:
    view: str
    labeling: tuple
    reached_state: str | ExecState
    useful: tuple[int, ...]
    useless: tuple[int, ...]
    in_progress: dict[str, frozenset[str]] = field(default_factory=dict)
    pending: tuple[int, ...] = ()

    @property
    def state_name(self) -> str:
        s = self.reached_state
        return s.name if isinstance(s, ExecState) else s


def contract_positions(path: Sequence[Transfer], c: Contract) -> list[int]:
    """Positions of ``path`` whose transfer moves one of the contract's resources."""
    return [i for i, t in enumerate(path) if getattr(t, "resource", None) in c.resources]


def _legal_scan(trace: Sequence[Transfer], c: Contract) -> OccurrenceResult:
    a = c.legal
    v = a.initial
    done: set[str] = set()
    pending: list[tuple[int, str]] = []
    bundles: list[Bundle] = []
    useful: list[int] = []
    useless: list[int] = []
    for i, t in enumerate(trace):
        act = c.action_of.get(t)
        if act is None or act not in a.action_union(v) or act in done:
            useless.append(i)
            continue
        done.add(act)
        pending.append((i, act))
        completed = a.completed(v, frozenset(done))
        if completed:
            eta = completed[0]
            bundles.append(a.beta(eta))
            for j, act_j in pending:
                (useful if act_j in eta.actions else useless).append(j)
            v, done, pending = eta.target, set(), []
    in_progress = {
        eta.id: frozenset(done & eta.actions)
        for eta in a.outgoing(v) if done & eta.actions
    }
    return OccurrenceResult(
        "legal", tuple(bundles), v, tuple(sorted(useful)), tuple(sorted(useless)),
        in_progress, tuple(j for j, _ in pending),
    )


def _exec_scan(trace: Sequence[Transfer], c: Contract) -> OccurrenceResult:
    ex = c.exec
    s = ex.initial
    consumed: list[int] = []
    skipped: list[int] = []
    for i, t in enumerate(trace):
        act = c.action_of.get(t)
        step = ex.step(s, act) if act is not None else None
        if step is None:
            skipped.append(i)
            continue
        consumed.append(i)
        s = step.target
    in_progress = {
        eta.id: frozenset(s.done & eta.actions)
        for eta in c.legal.outgoing(s.base) if s.done & eta.actions
    }
    pending = tuple(i for i in consumed if not s.is_legal and c.action_of[trace[i]] in s.done)
    return OccurrenceResult(
        "exec", tuple(trace[i] for i in consumed), s, tuple(consumed), tuple(skipped),
        in_progress, pending,
    )


def occurring_map_trace(trace: Sequence[Transfer], c: Contract, view: str = "legal") -> OccurrenceResult:
    """Occurring map on an already contract-projected transfer sequence."""
    if view == "legal":
        return _legal_scan(trace, c)
    if view == "exec":
        return _exec_scan(trace, c)
    raise ValueError(f"view must be 'legal' or 'exec', not {view!r}")


def occurring_map(ledger: LedgerState, c: Contract | str, view: str = "legal") -> OccurrenceResult:
    """Occurring map of the contract projection of ``ledger``; indices are positions in that projection."""
    contract = ledger.contract(c) if isinstance(c, str) else c
    trace = [r.transfer for r in project(ledger, contract=contract.id)]
    return occurring_map_trace(trace, contract, view)


def nu(path: Sequence[Transfer], c: Contract, view: str = "legal") -> tuple:
    """Labeling part of the occurring map for an arbitrary (unprojected) path."""
    positions = contract_positions(path, c)
    return occurring_map_trace([path[i] for i in positions], c, view).labeling


def factorise(tl: Sequence[Transfer], c: Contract) -> tuple[Bundle, ...]:
    """Bundle labeling underlying an initial transfer labeling."""
    ex = c.exec
    s = ex.initial
    edges = []
    for k, t in enumerate(tl):
        act = c.action_of.get(t)
        step = ex.step(s, act) if act is not None else None
        if step is None:
            raise NotAnInitialLabeling(f"{t} at position {k} is not enabled in {s.name}")
        edges.append(step)
        s = step.target
    legal = legal_projection(ex, Trajectory(ex.initial, tuple(edges), "exec"))
    return labeling(c.legal, legal)


def is_bundle_complete_trace(trace: Sequence[Transfer], c: Contract) -> bool:
    """bc: no proper prefix has the same bundle occurring image (vacuously true on the empty trace)."""
    if not trace:
        return True
    return nu(trace[:-1], c) != nu(trace, c)


def is_bundle_complete(ledger: LedgerState, c: Contract | str) -> bool:
    contract = ledger.contract(c) if isinstance(c, str) else c
    return is_bundle_complete_trace(ledger.transfers, contract)
