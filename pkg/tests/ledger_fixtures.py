"""Shared fixtures: the insurance contract, worked runs and a small payment contract."""

from __future__ import annotations

import json
import random
from pathlib import Path

from ledgerlogic.core import BOT, TOP, Transfer
from ledgerlogic.ledger import LedgerState, append_record
from ledgerlogic.query.spec import bundled_contract, contract_from_dict

GOLDEN = Path(__file__).parent / "golden"
STAMP = "2024-05-01T12:00:00Z"

T = Transfer
INSURANCE = bundled_contract("insurance")

DAMAGE_EV = T("damageEv", TOP, BOT)
DOC_TO_CUSTOMER = T("damageDoc", TOP, "customer")
CLAIM = T("claim", TOP, "insurer")
DOC_TO_INSURER = T("damageDoc", "customer", "insurer")
OFFER = T("offer", TOP, "customer")
ACCEPT = T("accept", TOP, "insurer")
REJECT = T("reject", TOP, "insurer")
REFUND = T("refund", TOP, "customer")
CLOSE_PREM = T("oldPrem", "customer", BOT)
RAISE = T("raise", TOP, "customer")
OUT = [T(f"out{i}", TOP, BOT) for i in range(4)]

HONOURED = [
    DAMAGE_EV, DOC_TO_CUSTOMER, CLAIM, DOC_TO_INSURER, OFFER, ACCEPT, REFUND, CLOSE_PREM, RAISE,
]
OUT0_RUN = [DAMAGE_EV, DOC_TO_CUSTOMER, OUT[0]]

# the action -> transfer table, read straight from the spec document
RHO = {
    name: T(a["resource"], a["from"], a["to"])
    for name, a in json.loads(
        (Path(__file__).parents[1] / "src/ledgerlogic/data/insurance.json").read_text()
    )["actions"].items()
}
ALPHABET = sorted(RHO.values())
FOREIGN = [
    T("damageDoc", TOP, "insurer"), T("offer", TOP, "insurer"),
    T("claim", "customer", "insurer"), T("refund", "insurer", "customer"),
]

PAY_SPEC = {
    "id": "Pay",
    "resources": ["m"],
    "events": [],
    "actors": ["bob", "alice", "george"],
    "actions": {
        "pay": {"resource": "m", "from": "bob", "to": "alice"},
        "forward": {"resource": "m", "from": "alice", "to": "george"},
    },
    "states": ["S0", "S1", "S2"],
    "initial": "S0",
    "finals": {"S2": "HON"},
    "transitions": [
        {"from": "S0", "to": "S1", "actions": ["pay"]},
        {"from": "S1", "to": "S2", "actions": ["forward"]},
    ],
    "timeouts": [],
    "initial_allocations": {"m": "bob"},
}
PAY = contract_from_dict(PAY_SPEC)

BOB_ALICE = T("m", "bob", "alice")
ALICE_GEORGE = T("m", "alice", "george")
GEORGE_BOB = T("m", "george", "bob")

# (contract, transfer) records; the planted pairs are (0,2) and (5,6)
LAUNDERING = [
    ("Pay", BOB_ALICE),
    ("Cd", DAMAGE_EV),
    ("Pay", ALICE_GEORGE),
    ("Pay", GEORGE_BOB),
    ("Cd", DOC_TO_CUSTOMER),
    ("Pay", BOB_ALICE),
    ("Pay", ALICE_GEORGE),
]


def build_ledger(transfers, contract_id="Cd", contracts=(INSURANCE,), strict=True) -> LedgerState:
    ledger = LedgerState()
    for c in contracts:
        ledger = ledger.register(c)
    for item in transfers:
        cid, t = item if isinstance(item, tuple) and len(item) == 2 and isinstance(item[1], Transfer) else (contract_id, item)
        ledger = append_record(ledger, cid, t, timestamp=STAMP, strict=strict)
    return ledger


def honoured_ledger() -> LedgerState:
    return build_ledger(HONOURED)


def laundering_ledger() -> LedgerState:
    return build_ledger(LAUNDERING, contracts=(INSURANCE, PAY))


# -- independent view of the execution automaton, from the golden description ---


def golden_exec() -> dict:
    return json.loads((GOLDEN / "insurance_exec.json").read_text())


def golden_transfer_labelings() -> set[tuple[Transfer, ...]]:
    """All initial transfer labelings, by DFS over the golden exec description."""
    g = golden_exec()
    out_edges: dict[str, list[tuple[str, str]]] = {}
    for src, act, dst in g["transitions"]:
        out_edges.setdefault(src, []).append((act, dst))
    found = set()

    def walk(state, word):
        found.add(word)
        for act, dst in out_edges.get(state, []):
            walk(dst, word + (RHO[act],))

    walk("IN", ())
    return found


def random_linearisation(rng: random.Random, labelings=None) -> list[Transfer]:
    """A random prefix of a random complete transfer labeling."""
    pool = sorted(labelings or golden_transfer_labelings(), key=lambda w: (len(w), [t.name for t in w]))
    word = list(rng.choice(pool))
    return word[: rng.randint(0, len(word))]


def random_walk(rng: random.Random, length: int, noise: float = 0.2) -> list[Transfer]:
    """Mostly-enabled random walk of the exec automaton with random alphabet noise."""
    g = golden_exec()
    out_edges: dict[str, list[tuple[str, str]]] = {}
    for src, act, dst in g["transitions"]:
        out_edges.setdefault(src, []).append((act, dst))
    state, trace = "IN", []
    for _ in range(length):
        options = out_edges.get(state, [])
        if options and rng.random() > noise:
            act, state = rng.choice(options)
            trace.append(RHO[act])
        else:
            trace.append(rng.choice(ALPHABET + FOREIGN))
    return trace
