"""Finite prefix-closed trees of paths over which formulas are interpreted.

Nodes are kept in breadth-first order with a parent index array, which is all
the closure kernels need. A :class:`LedgerUniverse` enumerates the recorded
trace, its prefixes and the admissible alternatives branching off any of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from ..automata import Contract
from ..core import BOT, TOP, InvalidTransfer, ModelError, Transfer, validate_transfer
from ..ledger import LedgerState
from ..occurrence import factorise, nu

Path = tuple


class PathOutsideUniverse(ModelError):
    pass


class NotPrefixClosed(ModelError):
    pass


class UniverseTooLarge(ModelError):
    pass


class UnregisteredMap(ModelError):
    pass


class Tree:
    """A finite prefix-closed set of paths (tuples of hashable labels)."""

    def __init__(
        self,
        paths: Iterable[Sequence[Hashable]],
        trace: Sequence[Hashable] | None = None,
        initial: Mapping[str, str] | None = None,
        contracts: Mapping[str, Contract] | None = None,
        maps: dict | None = None,
        truncated: bool = False,
    ):
        seen: dict[Path, None] = {}
        for p in paths:
            seen.setdefault(tuple(p), None)
        if not seen:
            raise NotPrefixClosed("a tree needs at least the empty path")
        for p in seen:
            if p and p[:-1] not in seen:
                raise NotPrefixClosed(f"prefix {p[:-1]!r} of {p!r} is missing")
        order = sorted(seen, key=len)  # stable: keeps insertion order within a level
        self.paths: tuple[Path, ...] = tuple(order)
        self.index: dict[Path, int] = {p: i for i, p in enumerate(order)}
        self.parent = np.array(
            [self.index[p[:-1]] if p else -1 for p in order], dtype=np.int64
        )
        self.depth = np.array([len(p) for p in order], dtype=np.int64)
        self.trace = tuple(trace) if trace is not None else None
        self.initial = dict(initial or {})
        self.contracts = dict(contracts or {})
        self.maps: dict[str, MonotoneMap] = maps if maps is not None else {}
        self.truncated = truncated
        self.cache: dict = {}

    def __len__(self) -> int:
        return len(self.paths)

    def __contains__(self, p: object) -> bool:
        return tuple(p) in self.index  # type: ignore[arg-type]

    def __iter__(self):
        return iter(self.paths)

    def index_of(self, p: Sequence[Hashable]) -> int:
        try:
            return self.index[tuple(p)]
        except KeyError:
            raise PathOutsideUniverse(f"{tuple(p)!r} is not in this universe") from None

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    @property
    def alphabet(self) -> frozenset:
        return frozenset(p[-1] for p in self.paths if p)

    def children(self, p: Sequence[Hashable]) -> list[Path]:
        i = self.index_of(p)
        return [self.paths[j] for j in np.flatnonzero(self.parent == i)]

    def prolongations(self, p: Sequence[Hashable]) -> list[Path]:
        p = tuple(p)
        return [q for q in self.paths if q[: len(p)] == p]

    def register(self, m: "MonotoneMap") -> None:
        """Make ``m`` visible (by name) to formulas evaluated on either end of it."""
        for t in (m.domain, m.codomain):
            t.maps[m.name] = m

    def lookup(self, name: str) -> "MonotoneMap":
        try:
            return self.maps[name]
        except KeyError:
            raise UnregisteredMap(name) from None


class ExplicitTree(Tree):
    """A tree given by listing its paths; prefix closure is checked, not repaired."""


@dataclass(eq=False)
class MonotoneMap:
    name: str
    domain: Tree
    codomain: Tree
    fn: Callable[[Path], Path]

    def __call__(self, p: Sequence[Hashable]) -> Path:
        return tuple(self.fn(tuple(p)))

    @property
    def image_index(self) -> np.ndarray:
        """Codomain node index of the image of each domain node."""
        cached = self.__dict__.get("_image")
        if cached is None:
            out = np.empty(len(self.domain), dtype=np.int64)
            for i, p in enumerate(self.domain.paths):
                out[i] = self.codomain.index_of(self(p))
            self.__dict__["_image"] = cached = out
        return cached


def label_tree(labelings: Iterable[Sequence[Hashable]]) -> ExplicitTree:
    return ExplicitTree(labelings)


def register_contract_maps(u: Tree, c: Contract) -> tuple[ExplicitTree, ExplicitTree]:
    """Register ``nu_l:<id>``, ``nu_e:<id>`` and ``nu_le:<id>`` for ``c`` on ``u``.

    Returns the bundle-labeling tree and the transfer-labeling tree.
    """
    btree = ExplicitTree(sorted(c.bundle_labelings, key=len), maps=u.maps)
    ltree = ExplicitTree(sorted(c.transfer_labelings, key=len), maps=u.maps)
    u.register(MonotoneMap(f"nu_l:{c.id}", u, btree, lambda p: nu(p, c, "legal")))
    u.register(MonotoneMap(f"nu_e:{c.id}", u, ltree, lambda p: nu(p, c, "exec")))
    u.register(MonotoneMap(f"nu_le:{c.id}", ltree, btree, lambda p: factorise(p, c)))
    return btree, ltree


GATES = ("contract", "resource")


class LedgerUniverse(Tree):
    """Recorded trace plus gated prolongations from every node, up to a length bound.

    ``gate="contract"`` admits a transfer when it advances some contract's
    execution automaton (from the state its greedy run has reached) and is
    handed over by the current holder. ``gate="resource"`` admits every
    admissible hand-over by the current holder of any known resource and needs
    a ``horizon``. Paths are capped at ``len(trace) + horizon`` when a horizon
    is set; ``truncated`` records whether the cap cut off any extension.
    """

    def __init__(
        self,
        ledger: LedgerState | Sequence[Transfer],
        contracts: Iterable[Contract] | None = None,
        horizon: int | None = None,
        gate: str = "contract",
        max_nodes: int = 200_000,
    ):
        if gate not in GATES:
            raise ValueError(f"gate must be one of {GATES}, not {gate!r}")
        if gate == "resource" and horizon is None:
            raise ValueError("the resource gate needs a horizon")
        if horizon is not None and horizon < 0:
            raise ValueError("horizon must be non-negative")
        if isinstance(ledger, LedgerState):
            trace = ledger.transfers
            if contracts is None:
                contracts = ledger.contracts.values()
        else:
            trace = tuple(ledger)
        cs = list(contracts or ())
        initial: dict[str, str] = {}
        events: set[str] = set()
        actors: set[str] = {TOP, BOT}
        for c in cs:
            initial.update(c.legal.initial_soa)
            events |= c.events
            actors |= c.actors
        for t in trace:
            initial.setdefault(t.resource, t.source)
            actors |= {t.source, t.target}
        limit = None if horizon is None else len(trace) + horizon

        paths: list[Path] = []
        truncated = False
        frontier = [((), dict(initial), tuple(c.exec.initial for c in cs))]
        while frontier:
            nxt = []
            for p, holders, states in frontier:
                paths.append(p)
                if len(paths) > max_nodes:
                    raise UniverseTooLarge(f"more than {max_nodes} paths; lower the horizon")
                if gate == "contract":
                    moves = self._contract_moves(cs, holders, states)
                else:
                    moves = self._resource_moves(holders, actors, events)
                if limit is not None and len(p) >= limit:
                    truncated = truncated or bool(moves)
                    moves = []
                k = len(p)
                if k < len(trace) and p == trace[:k] and trace[k] not in moves:
                    moves = [trace[k]] + moves
                for t in moves:
                    h = dict(holders)
                    h[t.resource] = t.target
                    nxt.append((p + (t,), h, self._advance(cs, states, t)))
            frontier = nxt

        super().__init__(
            paths, trace=trace, initial=initial,
            contracts={c.id: c for c in cs}, truncated=truncated,
        )
        self.horizon = horizon
        self.gate = gate
        self.label_trees: dict[str, tuple[ExplicitTree, ExplicitTree]] = {}
        for c in cs:
            self.label_trees[c.id] = register_contract_maps(self, c)

    @staticmethod
    def _advance(cs: list[Contract], states: tuple, t: Transfer) -> tuple:
        out = []
        for c, s in zip(cs, states):
            act = c.action_of.get(t)
            step = c.exec.step(s, act) if act is not None else None
            out.append(step.target if step is not None else s)
        return tuple(out)

    @staticmethod
    def _contract_moves(cs: list[Contract], holders: dict, states: tuple) -> list[Transfer]:
        moves = set()
        for c, s in zip(cs, states):
            for e in c.exec.outgoing(s):
                t = c.legal.rho[e.action]
                if holders.get(t.resource) == t.source:
                    moves.add(t)
        return sorted(moves)

    @staticmethod
    def _resource_moves(holders: dict, actors: set, events: set) -> list[Transfer]:
        moves = []
        for r in sorted(holders):
            for k in sorted(actors):
                t = Transfer(r, holders[r], k)
                try:
                    validate_transfer(t, events)
                except InvalidTransfer:
                    continue
                moves.append(t)
        return moves
