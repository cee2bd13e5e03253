"""Command-line interface.

Contracts registered with a ledger live next to it in ``<ledger>.contracts.json``.
Exit status: 0 when the answer is positive, 1 for a violation or a false
verdict, 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .automata import ContractValidationError
from .core import InvalidTransfer, ModelError, Transfer
from .ledger import (
    LEVELS, LedgerFormatError, ResourceSafetyViolation, append_record, check_safety,
    read_ledger, verify_file, write_ledger,
)
from .logic.universe import UniverseTooLarge
from .occurrence import occurring_map
from .query.parser import QuerySyntaxError, UnknownIdentifier, parse_query
from .query.run import pattern_audit, run_query
from .query.spec import SpecError, bundled_contract, contract_from_dict, load_contract

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def sidecar(path: str | Path) -> Path:
    return Path(str(path) + ".contracts.json")


def load_docs(path: str | Path) -> list[dict]:
    p = sidecar(path)
    if not p.exists():
        return []
    return json.loads(p.read_text(encoding="utf-8"))


def open_ledger(path: str | Path):
    if not Path(path).exists():
        raise UsageError(f"no ledger at {path}")
    contracts = [contract_from_dict(d) for d in load_docs(path)]
    return read_ledger(path, contracts)


def emit(args, command: str, verdict, text: str, witnesses=(), truncated: bool = False) -> None:
    if args.json:
        print(json.dumps({
            "command": command,
            "verdict": verdict,
            "witnesses": list(witnesses),
            "truncated_at_horizon": truncated,
        }, sort_keys=False))
    else:
        print(text)


def parse_transfer(text: str) -> Transfer:
    try:
        return Transfer.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- handlers ------------------------------------------------------------------


def cmd_ledger_init(args) -> int:
    path = Path(args.ledger)
    if path.exists() and not args.force:
        raise UsageError(f"{path} already exists (use --force to overwrite)")
    path.write_text("", encoding="utf-8")
    sidecar(path).write_text("[]\n", encoding="utf-8")
    emit(args, "ledger init", "ok", f"initialised empty ledger {path}")
    return OK


def cmd_ledger_append(args) -> int:
    ledger = open_ledger(args.ledger)
    if args.transfer:
        t = parse_transfer(args.transfer)
    elif args.resource and args.source and args.target:
        t = Transfer(args.resource, args.source, args.target)
    else:
        raise UsageError("give --transfer or all of --resource/--from/--to")
    try:
        new = append_record(
            ledger, args.contract, t, timestamp=args.timestamp,
            validator=args.validator, strict=not args.permissive,
        )
    except ResourceSafetyViolation as exc:
        w = {"resource": exc.resource, "expected": exc.last_holder, "actual": t.source,
             "index": exc.last_index}
        emit(args, "ledger append", "rejected", f"rejected: {exc}", [w])
        return FAIL
    except InvalidTransfer as exc:
        emit(args, "ledger append", "rejected", f"rejected: {exc}", [{"transfer": t.name}])
        return FAIL
    write_ledger(args.ledger, new)
    idx = len(new) - 1
    emit(args, "ledger append", "ok", f"appended record {idx}: {t.name}", [{"index": idx}])
    return OK


def cmd_ledger_verify(args) -> int:
    if not Path(args.ledger).exists():
        raise UsageError(f"no ledger at {args.ledger}")
    bad = verify_file(args.ledger)
    if bad is None:
        emit(args, "ledger verify", "ok", "chain ok")
        return OK
    emit(args, "ledger verify", "broken", f"chain broken at index {bad}", [{"index": bad}])
    return FAIL


def cmd_ledger_check(args) -> int:
    ledger = open_ledger(args.ledger)
    if args.property == "resource" and not args.resource:
        raise UsageError("--property resource needs --resource")
    report = check_safety(ledger, args.contract, args.property, args.resource)
    witnesses = []
    if report.witness is not None:
        w = report.witness
        witnesses.append({"indices": list(w.indices), "resource": w.resource,
                          "expected": w.expected, "actual": w.actual, "note": w.note})
    emit(args, "ledger check", report.verdict, report.describe(), witnesses)
    return OK if report.safe else FAIL


def cmd_contract_add(args) -> int:
    if args.bundled:
        doc = bundled_contract(args.bundled).source
    elif args.spec:
        doc = load_contract(args.spec).source
    else:
        raise UsageError("give a spec file or --bundled NAME")
    if not Path(args.ledger).exists():
        raise UsageError(f"no ledger at {args.ledger}")
    docs = [d for d in load_docs(args.ledger) if d["id"] != doc["id"]]
    docs.append(dict(doc))
    sidecar(args.ledger).write_text(json.dumps(docs, indent=2) + "\n", encoding="utf-8")
    emit(args, "contract add", "ok", f"registered contract {doc['id']}")
    return OK


def cmd_contract_state(args) -> int:
    ledger = open_ledger(args.ledger)
    if args.at is not None:
        if not 0 <= args.at <= len(ledger):
            raise UsageError(f"--at must lie in 0..{len(ledger)}")
        ledger = ledger.prefix(args.at)
    c = ledger.contract(args.contract)
    r = occurring_map(ledger, c, args.view)
    state = r.state_name
    outcome = c.outcome(state) if isinstance(r.reached_state, str) else None
    lines = [
        f"{args.view} state: {state}" + (f" ({outcome})" if outcome else ""),
        f"useful: {list(r.useful)}",
        f"useless: {list(r.useless)}",
    ]
    if r.in_progress:
        lines.append("in progress: " + ", ".join(
            f"{k} {{{','.join(sorted(v))}}}" for k, v in sorted(r.in_progress.items())))
    w = {"state": state, "outcome": outcome, "useful": list(r.useful), "useless": list(r.useless)}
    emit(args, "contract state", state, "\n".join(lines), [w])
    return OK


def cmd_query_eval(args) -> int:
    ledger = open_ledger(args.ledger)
    cs = list(ledger.contracts.values())
    actors = set().union(*(c.actors for c in cs)) if cs else None
    resources = set().union(*(c.resources for c in cs)) if cs else None
    if resources is not None:
        resources |= {t.resource for t in ledger.transfers}
        actors |= {k for t in ledger.transfers for k in (t.source, t.target)}
    ast = parse_query(
        args.query,
        resources=resources if args.check_names else None,
        actors=actors if args.check_names else None,
        contracts=[c.id for c in cs] if args.check_names else None,
    )
    r = run_query(ledger, cs, ast, at=args.at, horizon=args.horizon, gate=args.gate)
    text = r.summary + (" (answer relative to the horizon)" if r.truncated else "")
    emit(args, "query eval", r.verdict, text, r.witnesses, r.truncated)
    return OK if r.verdict else FAIL


def cmd_audit_pattern(args) -> int:
    ledger = open_ledger(args.ledger)
    a, b = parse_transfer(args.first), parse_transfer(args.second)
    if args.at is not None and not 0 <= args.at <= len(ledger):
        raise UsageError(f"--at must lie in 0..{len(ledger)}")
    r = pattern_audit(ledger.transfers, a, b, args.at)
    emit(args, "audit pattern", r.verdict, r.summary, r.witnesses)
    return OK if r.verdict else FAIL


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")

    p = argparse.ArgumentParser(prog="ledgerlogic", description=__doc__.splitlines()[0])
    groups = p.add_subparsers(dest="group", required=True)

    ledger = groups.add_parser("ledger", help="create, extend, verify and check ledgers")
    lsub = ledger.add_subparsers(dest="action", required=True)

    s = lsub.add_parser("init", parents=[common], help="create an empty ledger")
    s.add_argument("ledger")
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_ledger_init)

    s = lsub.add_parser("append", parents=[common], help="append one transfer record")
    s.add_argument("ledger")
    s.add_argument("--contract", required=True)
    s.add_argument("--transfer", help='transfer as "(resource,from,to)"')
    s.add_argument("--resource")
    s.add_argument("--from", dest="source")
    s.add_argument("--to", dest="target")
    s.add_argument("--timestamp", help="RFC 3339 UTC; defaults to now")
    s.add_argument("--validator", default="local")
    s.add_argument("--permissive", action="store_true", help="record resource-unsafe transfers too")
    s.set_defaults(func=cmd_ledger_append)

    s = lsub.add_parser("verify", parents=[common], help="check the hash chain")
    s.add_argument("ledger")
    s.set_defaults(func=cmd_ledger_verify)

    s = lsub.add_parser("check", parents=[common], help="check a safety property")
    s.add_argument("ledger")
    s.add_argument("--contract", required=True)
    s.add_argument("--property", choices=LEVELS, required=True)
    s.add_argument("--resource")
    s.set_defaults(func=cmd_ledger_check)

    contract = groups.add_parser("contract", help="register contracts and inspect their state")
    csub = contract.add_subparsers(dest="action", required=True)

    s = csub.add_parser("add", parents=[common], help="register a contract spec with a ledger")
    s.add_argument("ledger")
    s.add_argument("spec", nargs="?")
    s.add_argument("--bundled", metavar="NAME", help="use a spec shipped with the package")
    s.set_defaults(func=cmd_contract_add)

    s = csub.add_parser("state", parents=[common], help="contract state reached by the ledger")
    s.add_argument("ledger")
    s.add_argument("--contract", required=True)
    s.add_argument("--at", type=int)
    s.add_argument("--view", choices=("legal", "exec"), default="legal")
    s.set_defaults(func=cmd_contract_state)

    query = groups.add_parser("query", help="evaluate temporal queries")
    qsub = query.add_subparsers(dest="action", required=True)
    s = qsub.add_parser("eval", parents=[common], help="evaluate a query at a ledger step")
    s.add_argument("ledger")
    s.add_argument("query")
    s.add_argument("--at", type=int, help="evaluation step (default: ledger length)")
    s.add_argument("--horizon", type=int, help="extra steps of future to enumerate")
    s.add_argument("--gate", choices=("contract", "resource"), default="contract")
    s.add_argument("--check-names", action="store_true",
                   help="reject identifiers not declared by the registered contracts")
    s.set_defaults(func=cmd_query_eval)

    audit = groups.add_parser("audit", help="audit recorded transfer patterns")
    asub = audit.add_subparsers(dest="action", required=True)
    s = asub.add_parser("pattern", parents=[common], help="find a transfer followed by another")
    s.add_argument("ledger")
    s.add_argument("--first", required=True)
    s.add_argument("--second", required=True)
    s.add_argument("--at", type=int)
    s.set_defaults(func=cmd_audit_pattern)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, QuerySyntaxError, UnknownIdentifier, SpecError,
            ContractValidationError, LedgerFormatError, UniverseTooLarge, ModelError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
