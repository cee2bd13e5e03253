"""Loading contract spec documents (JSON) into :class:`~ledgerlogic.automata.Contract`."""

from __future__ import annotations

import json
from importlib import resources as _resources
from pathlib import Path
from typing import Any, Mapping

from ..automata import Contract, LegalTransition, LegalAutomaton
from ..core import BOT, TOP, Allocation, ModelError, Transfer, new_state_of_affairs

REQUIRED_KEYS = (
    "id", "resources", "events", "actors", "actions", "states",
    "initial", "finals", "transitions", "timeouts", "initial_allocations",
)


class SpecError(ModelError):
    pass


def contract_from_dict(doc: Mapping[str, Any]) -> Contract:
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise SpecError(f"contract spec is missing keys: {', '.join(missing)}")
    actors = set(doc["actors"])
    if actors & {TOP, BOT}:
        raise SpecError("TOP and BOT are reserved and must not be declared as actors")
    resources = set(doc["resources"])
    events = set(doc["events"])
    if not events <= resources:
        raise SpecError(f"events not declared as resources: {sorted(events - resources)}")
    known_actors = actors | {TOP, BOT}

    rho = {}
    for name, spec in doc["actions"].items():
        try:
            t = Transfer(spec["resource"], spec["from"], spec["to"])
        except (KeyError, TypeError):
            raise SpecError(f"action {name} must map to {{resource, from, to}}") from None
        if t.resource not in resources:
            raise SpecError(f"action {name} moves undeclared resource {t.resource}")
        for k in (t.source, t.target):
            if k not in known_actors:
                raise SpecError(f"action {name} names undeclared actor {k}")
        rho[name] = t

    transitions = []
    for i, tr in enumerate(doc["transitions"]):
        try:
            src, dst, acts = tr["from"], tr["to"], tr["actions"]
        except (KeyError, TypeError):
            raise SpecError(f"transition #{i} must have from, to and actions") from None
        tid = tr.get("id", f"({src},{dst})")
        transitions.append(LegalTransition(tid, src, dst, frozenset(acts)))

    allocations = []
    for r, k in doc["initial_allocations"].items():
        if k not in known_actors:
            raise SpecError(f"initial allocation of {r} to undeclared actor {k}")
        allocations.append(Allocation(r, k))
    soa = new_state_of_affairs(resources, events, allocations)

    legal = LegalAutomaton(
        states=frozenset(doc["states"]),
        initial=doc["initial"],
        transitions=tuple(transitions),
        finals=dict(doc["finals"]),
        actions=frozenset(rho),
        timeouts=frozenset(doc["timeouts"]),
        rho=rho,
        initial_soa=soa,
        events=frozenset(events),
    )
    return Contract(
        id=doc["id"],
        legal=legal,
        resources=frozenset(resources),
        actors=frozenset(known_actors),
        events=frozenset(events),
        source=dict(doc),
    )


def load_contract(path: str | Path) -> Contract:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from None
    return contract_from_dict(doc)


def bundled_contract(name: str = "insurance") -> Contract:
    """Load one of the contract specs shipped in ``ledgerlogic/data``."""
    text = _resources.files("ledgerlogic.data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return contract_from_dict(json.loads(text))
