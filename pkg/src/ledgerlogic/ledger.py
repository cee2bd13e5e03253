"""Append-only, hash-chained ledger of transfer records and its safety checks.

Each record is serialized as one line of JSON with a fixed key order; the
``prev_hash`` of record ``i`` is the SHA-256 of the exact line of record
``i - 1`` (64 zeros for the first record). Logical time is the record index.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .automata import Contract, ExecState
from .core import InvalidTransfer, ModelError, Transfer, validate_transfer

GENESIS_HASH = "0" * 64
KEYS = ("index", "contract", "resource", "from", "to", "timestamp", "validator", "prev_hash")
LEVELS = ("resource", "wallet", "bundle", "contract")


class LedgerError(ModelError):
    pass


class UnknownContract(LedgerError):
    pass


class LedgerFormatError(LedgerError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"record {index}: {reason}")
        self.index = index


class ResourceSafetyViolation(LedgerError):
    def __init__(self, resource: str, last_holder: str, transfer: Transfer, last_index: int | None):
        where = f"record {last_index}" if last_index is not None else "the initial state of affairs"
        super().__init__(
            f"{transfer.name} rejected: {resource} is held by {last_holder} (per {where})"
        )
        self.resource = resource
        self.last_holder = last_holder
        self.transfer = transfer
        self.last_index = last_index


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def digest(line: str | bytes) -> str:
    if isinstance(line, str):
        line = line.encode("utf-8")
    return hashlib.sha256(line).hexdigest()


@dataclass(frozen=True)
class TransferRecord:
    index: int
    contract: str
    transfer: Transfer
    timestamp: str
    validator: str
    prev_hash: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "contract": self.contract,
            "resource": self.transfer.resource,
            "from": self.transfer.source,
            "to": self.transfer.target,
            "timestamp": self.timestamp,
            "validator": self.validator,
            "prev_hash": self.prev_hash,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_line(cls, line: str, expected_index: int | None = None) -> "TransferRecord":
        idx = expected_index if expected_index is not None else -1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LedgerFormatError(idx, f"not JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or tuple(obj) != KEYS:
            raise LedgerFormatError(idx, "keys missing or out of order")
        rec = cls(
            index=obj["index"],
            contract=obj["contract"],
            transfer=Transfer(obj["resource"], obj["from"], obj["to"]),
            timestamp=obj["timestamp"],
            validator=obj["validator"],
            prev_hash=obj["prev_hash"],
        )
        if rec.to_line() != line:
            raise LedgerFormatError(idx, "line is not in canonical form")
        return rec


@dataclass(frozen=True)
class LedgerState:
    records: tuple[TransferRecord, ...] = ()
    contracts: Mapping[str, Contract] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def register(self, contract: Contract) -> "LedgerState":
        contracts = dict(self.contracts)
        contracts[contract.id] = contract
        return replace(self, contracts=contracts)

    def contract(self, cid: str) -> Contract:
        try:
            return self.contracts[cid]
        except KeyError:
            raise UnknownContract(cid) from None

    @property
    def transfers(self) -> tuple[Transfer, ...]:
        return tuple(r.transfer for r in self.records)

    def prefix(self, n: int) -> "LedgerState":
        return replace(self, records=self.records[:n])

    @property
    def head_hash(self) -> str:
        return digest(self.records[-1].to_line()) if self.records else GENESIS_HASH


def append_record(
    ledger: LedgerState,
    contract_id: str,
    transfer: Transfer,
    timestamp: str | None = None,
    validator: str = "local",
    strict: bool = True,
) -> LedgerState:
    """Return a new ledger state with one more record.

    In strict mode the transfer must be admissible and keep the contract
    projection resource-safe for its resource; permissive mode records anything
    and leaves detection to :func:`check_safety`.
    """
    contract = ledger.contract(contract_id)
    if strict:
        validate_transfer(transfer, contract.events)
        holder, last = last_holder(ledger, contract, transfer.resource)
        if holder is not None and holder != transfer.source:
            raise ResourceSafetyViolation(transfer.resource, holder, transfer, last)
    rec = TransferRecord(
        index=len(ledger.records),
        contract=contract_id,
        transfer=transfer,
        timestamp=timestamp or utc_now(),
        validator=validator,
        prev_hash=ledger.head_hash,
    )
    return replace(ledger, records=ledger.records + (rec,))


def last_holder(ledger: LedgerState, contract: Contract, resource: str) -> tuple[str | None, int | None]:
    """Current holder of ``resource`` in the contract projection, and the record that put it there."""
    for rec in reversed(ledger.records):
        if rec.contract == contract.id and rec.transfer.resource == resource:
            return rec.transfer.target, rec.index
    if resource in contract.resources:
        return contract.legal.initial_soa[resource], None
    return None, None


def verify_chain(ledger: LedgerState) -> int | None:
    """Index of the first record whose chain pointer is wrong, or ``None``."""
    prev = GENESIS_HASH
    for i, rec in enumerate(ledger.records):
        if rec.index != i or rec.prev_hash != prev:
            return i
        prev = digest(rec.to_line())
    return None


def verify_lines(lines: Sequence[bytes]) -> int | None:
    """Check raw ledger lines (no trailing newlines); first bad index or ``None``."""
    prev = GENESIS_HASH
    for i, raw in enumerate(lines):
        try:
            rec = TransferRecord.from_line(raw.decode("utf-8"), i)
        except (UnicodeDecodeError, LedgerFormatError):
            return i
        if rec.index != i or rec.prev_hash != prev:
            return i
        prev = digest(raw)
    return None


def _split_lines(data: bytes) -> list[bytes]:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def verify_file(path: str | Path) -> int | None:
    return verify_lines(_split_lines(Path(path).read_bytes()))


def write_ledger(path: str | Path, ledger: LedgerState) -> None:
    text = "".join(rec.to_line() + "\n" for rec in ledger.records)
    Path(path).write_text(text, encoding="utf-8")


def read_ledger(path: str | Path, contracts: Iterable[Contract] = ()) -> LedgerState:
    records = []
    for i, raw in enumerate(_split_lines(Path(path).read_bytes())):
        try:
            line = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise LedgerFormatError(i, "not UTF-8") from None
        records.append(TransferRecord.from_line(line, i))
    return LedgerState(tuple(records), {c.id: c for c in contracts})


def project(
    ledger: LedgerState,
    contract: str | None = None,
    resource: str | None = None,
) -> tuple[TransferRecord, ...]:
    return tuple(
        r for r in ledger.records
        if (contract is None or r.contract == contract)
        and (resource is None or r.transfer.resource == resource)
    )


# -- safety -------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    indices: tuple[int, ...]
    resource: str | None = None
    expected: str | None = None
    actual: str | None = None
    note: str = ""


@dataclass(frozen=True)
class SafetyReport:
    level: str
    safe: bool
    witness: Witness | None = None
    resource: str | None = None

    @property
    def verdict(self) -> str:
        return "safe" if self.safe else "violation"

    def describe(self) -> str:
        label = {
            "resource": f"{self.resource}-safe",
            "wallet": "wallet-safe",
            "bundle": "bundle-safe",
            "contract": "contract-safe",
        }[self.level]
        if self.safe:
            return label
        w = self.witness
        return f"not {label}: {w.note} at index {w.indices[-1]}"


def _resource_violation(trace: Sequence[Transfer], r: str, initial: str | None) -> Witness | None:
    holder, last = initial, None
    for i, t in enumerate(trace):
        if t.resource != r:
            continue
        if holder is not None and t.source != holder:
            idx = (last, i) if last is not None else (i,)
            return Witness(idx, r, holder, t.source, f"{t.name} breaks the hand-over chain of {r}")
        holder, last = t.target, i
    return None


def _wallet_violation(trace: Sequence[Transfer], c: Contract) -> Witness | None:
    found = [
        w for r in sorted(c.resources)
        if (w := _resource_violation(trace, r, c.legal.initial_soa[r])) is not None
    ]
    return min(found, key=lambda w: w.indices[-1]) if found else None


def _bundle_violation(trace: Sequence[Transfer], c: Contract) -> Witness | None:
    bundles = [c.legal.beta(eta) for eta in c.legal.transitions]
    for j, tj in enumerate(trace):
        seen = set(trace[:j])
        for i in range(j):
            ti = trace[i]
            if ti.resource != tj.resource:
                continue
            containing = [b for b in bundles if ti in b]
            if containing and not any(b.transfers <= seen for b in containing):
                return Witness(
                    (i, j), ti.resource, None, None,
                    f"{tj.name} moves {ti.resource} before the bundle started by {ti.name} completed",
                )
    return None


def exec_run(trace: Sequence[Transfer], c: Contract) -> tuple[ExecState, int | None]:
    """Run the execution automaton strictly; returns (state, index of first rejected transfer)."""
    s = c.exec.initial
    for i, t in enumerate(trace):
        act = c.action_of.get(t)
        step = c.exec.step(s, act) if act is not None else None
        if step is None:
            return s, i
        s = step.target
    return s, None


def trace_safety(trace: Sequence[Transfer], c: Contract, level: str, resource: str | None = None) -> SafetyReport:
    """Safety verdict for a contract-projected sequence of transfers."""
    if level not in LEVELS:
        raise ValueError(f"unknown safety level {level!r}")
    if level == "resource":
        if resource is None:
            raise ValueError("resource level needs a resource")
        initial = c.legal.initial_soa.get(resource)
        w = _resource_violation(trace, resource, initial)
        return SafetyReport(level, w is None, w, resource)
    w = _wallet_violation(trace, c)
    if w is None and level in ("bundle", "contract"):
        w = _bundle_violation(trace, c)
    if w is None and level == "contract":
        state, bad = exec_run(trace, c)
        if bad is not None:
            w = Witness((bad,), trace[bad].resource, None, trace[bad].name,
                        f"{trace[bad].name} is not enabled in execution state {state.name}")
    return SafetyReport(level, w is None, w, resource)


def check_safety(ledger: LedgerState, contract: Contract | str, level: str, resource: str | None = None) -> SafetyReport:
    """Check the contract projection of ``ledger``; witness indices are ledger record indices."""
    c = ledger.contract(contract) if isinstance(contract, str) else contract
    recs = project(ledger, contract=c.id)
    report = trace_safety([r.transfer for r in recs], c, level, resource)
    if report.witness is None:
        return report
    w = report.witness
    return replace(report, witness=replace(w, indices=tuple(recs[i].index for i in w.indices)))
