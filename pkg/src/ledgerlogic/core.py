"""Resources, actors, states of affairs, transfers and bundles.

Actors are plain strings. ``TOP`` and ``BOT`` are the two environment
actors: ``TOP`` is where not-yet-produced resources live and ``BOT`` is where
consumed resources (and occurred events) end up. Every other actor name is a
proper actor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

TOP = "TOP"
BOT = "BOT"
ENVIRONMENT = frozenset({TOP, BOT})


class ModelError(Exception):
    """Base class for violations of the resource/actor model."""


class DuplicateAllocation(ModelError):
    pass


class UnknownResource(ModelError):
    pass


class EventHeldByProper(ModelError):
    pass


class InvalidTransfer(ModelError):
    pass


class SelfTransfer(InvalidTransfer):
    pass


class FromBottom(InvalidTransfer):
    pass


class MalformedEventTransfer(InvalidTransfer):
    pass


class NotApplicable(ModelError):
    def __init__(self, transfer: "Transfer", holder: str):
        super().__init__(f"{transfer.name} not applicable: {transfer.resource} is held by {holder}")
        self.transfer = transfer
        self.holder = holder


class NotJointlyApplicable(ModelError):
    def __init__(self, failing: list["Transfer"]):
        names = ", ".join(t.name for t in failing)
        super().__init__(f"bundle not jointly applicable; failing transfers: {names}")
        self.failing = failing


def is_proper(actor: str) -> bool:
    return actor not in ENVIRONMENT


@dataclass(frozen=True, order=True)
class Allocation:
    resource: str
    holder: str


_TRANSFER_NAME = re.compile(r"^\(([^,()]+),([^,()]+),([^,()]+)\)$")


@dataclass(frozen=True, order=True)
class Transfer:
    """A hand-over ``(resource, from, to)``.

    Construction does not enforce the transfer invariants so that invalid
    transfers can still be represented (e.g. in audit fixtures); use
    :func:`validate_transfer` to check them.
    """

    resource: str
    source: str
    target: str

    @property
    def name(self) -> str:
        return f"({self.resource},{self.source},{self.target})"

    @classmethod
    def parse(cls, name: str) -> "Transfer":
        m = _TRANSFER_NAME.match(name.replace(" ", ""))
        if not m:
            raise ValueError(f"not a transfer name: {name!r}")
        return cls(*m.groups())

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Bundle:
    transfers: frozenset[Transfer]

    def __post_init__(self):
        if not self.transfers:
            raise ModelError("a bundle must contain at least one transfer")
        seen: set[str] = set()
        for t in self.transfers:
            if t.resource in seen:
                raise ModelError(f"bundle has two transfers of {t.resource}")
            seen.add(t.resource)

    @classmethod
    def of(cls, *transfers: Transfer) -> "Bundle":
        return cls(frozenset(transfers))

    @property
    def name(self) -> str:
        return "{" + ",".join(sorted(t.name for t in self.transfers)) + "}"

    def __iter__(self) -> Iterator[Transfer]:
        return iter(sorted(self.transfers))

    def __len__(self) -> int:
        return len(self.transfers)

    def __contains__(self, t: object) -> bool:
        return t in self.transfers

    def __str__(self) -> str:
        return self.name


class StateOfAffairs(Mapping[str, str]):
    """Total allocation of a fixed resource set to actors (immutable)."""

    __slots__ = ("_alloc", "_hash")

    def __init__(self, alloc: Mapping[str, str]):
        self._alloc = dict(alloc)
        self._hash = None

    def __getitem__(self, resource: str) -> str:
        return self._alloc[resource]

    def __iter__(self) -> Iterator[str]:
        return iter(self._alloc)

    def __len__(self) -> int:
        return len(self._alloc)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._alloc.items()))
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, StateOfAffairs):
            return self._alloc == other._alloc
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"[{r},{k}]" for r, k in sorted(self._alloc.items()))
        return f"StateOfAffairs({inner})"

    @property
    def allocations(self) -> frozenset[Allocation]:
        return frozenset(Allocation(r, k) for r, k in self._alloc.items())

    def proper_allocations(self) -> frozenset[Allocation]:
        return frozenset(a for a in self.allocations if is_proper(a.holder))

    def holder(self, resource: str) -> str:
        try:
            return self._alloc[resource]
        except KeyError:
            raise UnknownResource(resource) from None

    def replace(self, updates: Mapping[str, str]) -> "StateOfAffairs":
        alloc = dict(self._alloc)
        alloc.update(updates)
        return StateOfAffairs(alloc)


def new_state_of_affairs(
    resources: Iterable[str],
    events: Iterable[str] = (),
    allocations: Iterable[Allocation] = (),
) -> StateOfAffairs:
    """Build a state of affairs; resources not mentioned are held by ``TOP``."""
    resources = set(resources)
    events = set(events)
    alloc = {r: TOP for r in resources}
    seen: set[str] = set()
    for a in allocations:
        if a.resource not in resources:
            raise UnknownResource(a.resource)
        if a.resource in seen:
            raise DuplicateAllocation(a.resource)
        if a.resource in events and is_proper(a.holder):
            raise EventHeldByProper(f"event {a.resource} allocated to {a.holder}")
        seen.add(a.resource)
        alloc[a.resource] = a.holder
    return StateOfAffairs(alloc)


def validate_transfer(t: Transfer, events: Iterable[str] = ()) -> None:
    """Raise an :class:`InvalidTransfer` subclass if ``t`` is not admissible."""
    if t.source == t.target:
        raise SelfTransfer(t.name)
    if t.source == BOT:
        raise FromBottom(t.name)
    if t.resource in set(events) and (t.source, t.target) != (TOP, BOT):
        raise MalformedEventTransfer(t.name)


def is_applicable(t: Transfer, s: StateOfAffairs) -> bool:
    return s.get(t.resource) == t.source


def apply_transfer(t: Transfer, s: StateOfAffairs) -> StateOfAffairs:
    holder = s.holder(t.resource)
    if holder != t.source:
        raise NotApplicable(t, holder)
    return s.replace({t.resource: t.target})


def apply_bundle(b: Bundle, s: StateOfAffairs) -> StateOfAffairs:
    failing = [t for t in b if not is_applicable(t, s)]
    if failing:
        raise NotJointlyApplicable(failing)
    return s.replace({t.resource: t.target for t in b})
