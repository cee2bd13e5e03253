"""Legal contract automata, execution automata and trajectory labelings.

A legal automaton fires a transition once *every* action in its label set has
been performed; each action is discharged by one transfer (``rho``), so a
transition corresponds to a bundle. The execution automaton refines it with
one edge per single action, tracking partial progress at each legal state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .core import (
    Bundle,
    InvalidTransfer,
    ModelError,
    NotJointlyApplicable,
    StateOfAffairs,
    Transfer,
    apply_bundle,
    is_proper,
    validate_transfer,
)

HON = "HON"
BRC = "BRC"


@dataclass(frozen=True)
class Issue:
    kind: str
    message: str
    detail: tuple = ()


class ContractValidationError(ModelError):
    def __init__(self, issues: Sequence[Issue]):
        super().__init__("; ".join(f"{i.kind}: {i.message}" for i in issues))
        self.issues = list(issues)


class UnknownState(ModelError):
    pass


class FlavorMismatch(ModelError):
    pass


class BundleNotApplicable(ModelError):
    def __init__(self, step: int, cause: NotJointlyApplicable):
        super().__init__(f"bundle at step {step} is not applicable: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class LegalTransition:
    id: str
    source: str
    target: str
    actions: frozenset[str]


@dataclass(frozen=True, eq=False)
class LegalAutomaton:
    states: frozenset[str]
    initial: str
    transitions: tuple[LegalTransition, ...]
    finals: Mapping[str, str]
    actions: frozenset[str]
    timeouts: frozenset[str]
    rho: Mapping[str, Transfer]
    initial_soa: StateOfAffairs
    events: frozenset[str] = frozenset()

    @cached_property
    def _outgoing(self) -> dict[str, tuple[LegalTransition, ...]]:
        out: dict[str, list[LegalTransition]] = {v: [] for v in self.states}
        for eta in self.transitions:
            out.setdefault(eta.source, []).append(eta)
        return {v: tuple(sorted(ts, key=lambda e: e.id)) for v, ts in out.items()}

    def outgoing(self, v: str) -> tuple[LegalTransition, ...]:
        return self._outgoing.get(v, ())

    def transition(self, tid: str) -> LegalTransition:
        for eta in self.transitions:
            if eta.id == tid:
                return eta
        raise KeyError(tid)

    def action_union(self, v: str) -> frozenset[str]:
        """All actions labelling some transition leaving ``v``."""
        acts: set[str] = set()
        for eta in self.outgoing(v):
            acts |= eta.actions
        return frozenset(acts)

    def beta(self, eta: LegalTransition) -> Bundle:
        return Bundle(frozenset(self.rho[a] for a in eta.actions))

    def completed(self, v: str, done: frozenset[str]) -> list[LegalTransition]:
        return [eta for eta in self.outgoing(v) if eta.actions <= done]


@dataclass(frozen=True, order=True)
class ExecState:
    """A legal state (``done`` empty) or partial progress ``base/{done}``."""

    base: str
    done: frozenset[str] = frozenset()

    @property
    def is_legal(self) -> bool:
        return not self.done

    @property
    def name(self) -> str:
        if not self.done:
            return self.base
        return f"{self.base}/{{{','.join(sorted(self.done))}}}"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ExecTransition:
    source: ExecState
    target: ExecState
    action: str

    @property
    def id(self) -> str:
        return f"{self.source.name}-{self.action}->{self.target.name}"


@dataclass(frozen=True, eq=False)
class ExecAutomaton:
    legal: LegalAutomaton
    states: frozenset[ExecState]
    transitions: tuple[ExecTransition, ...]

    @property
    def initial(self) -> ExecState:
        return ExecState(self.legal.initial)

    @cached_property
    def _index(self) -> dict[tuple[ExecState, str], ExecTransition]:
        return {(e.source, e.action): e for e in self.transitions}

    @cached_property
    def _outgoing(self) -> dict[ExecState, tuple[ExecTransition, ...]]:
        out: dict[ExecState, list[ExecTransition]] = {s: [] for s in self.states}
        for e in self.transitions:
            out[e.source].append(e)
        return {s: tuple(sorted(es, key=lambda e: e.action)) for s, es in out.items()}

    def outgoing(self, s: ExecState) -> tuple[ExecTransition, ...]:
        return self._outgoing.get(s, ())

    def step(self, s: ExecState, action: str) -> ExecTransition | None:
        return self._index.get((s, action))

    def state(self, name: str) -> ExecState:
        for s in self.states:
            if s.name == name:
                return s
        raise UnknownState(name)


@dataclass(frozen=True)
class Trajectory:
    start: str | ExecState
    edges: tuple = ()
    flavor: str = "legal"

    @property
    def end(self):
        return self.edges[-1].target if self.edges else self.start

    @property
    def visited(self) -> list:
        return [self.start] + [e.target for e in self.edges]

    def __len__(self) -> int:
        return len(self.edges)

    def is_prefix_of(self, other: "Trajectory") -> bool:
        return self.start == other.start and other.edges[: len(self.edges)] == self.edges


# -- validation ---------------------------------------------------------------


def _find_cycle(a: LegalAutomaton) -> list[str] | None:
    colour = {v: 0 for v in a.states}
    stack: list[str] = []

    def visit(v: str) -> list[str] | None:
        colour[v] = 1
        stack.append(v)
        for eta in a.outgoing(v):
            w = eta.target
            if colour.get(w) == 1:
                return stack[stack.index(w):] + [w]
            if colour.get(w) == 0:
                found = visit(w)
                if found:
                    return found
        stack.pop()
        colour[v] = 2
        return None

    for v in sorted(a.states):
        if colour[v] == 0:
            found = visit(v)
            if found:
                return found
    return None


def _progress_sets(a: LegalAutomaton, v: str) -> list[frozenset[str]]:
    """All action subsets at ``v`` that contain no complete outgoing label."""
    union = sorted(a.action_union(v))
    result = []
    for n in range(len(union) + 1):
        for combo in combinations(union, n):
            x = frozenset(combo)
            if not a.completed(v, x):
                result.append(x)
    return result


def validate_legal_automaton(a: LegalAutomaton) -> list[Issue]:
    """Return every violated invariant; an empty list means the automaton is valid."""
    issues: list[Issue] = []
    if a.initial not in a.states:
        issues.append(Issue("UnknownState", f"initial state {a.initial} undeclared", (a.initial,)))
    for v in a.finals:
        if v not in a.states:
            issues.append(Issue("UnknownState", f"final state {v} undeclared", (v,)))
        if a.finals[v] not in (HON, BRC):
            issues.append(Issue("BadOutcome", f"final {v} has outcome {a.finals[v]!r}", (v,)))
    ids = [eta.id for eta in a.transitions]
    if len(set(ids)) != len(ids):
        issues.append(Issue("DuplicateTransition", "transition ids are not unique"))
    incoming = {eta.target for eta in a.transitions}
    for eta in a.transitions:
        for end in (eta.source, eta.target):
            if end not in a.states:
                issues.append(Issue("UnknownState", f"{eta.id} references {end}", (eta.id, end)))
        if not eta.actions:
            issues.append(Issue("EmptyLabel", f"{eta.id} has no actions", (eta.id,)))
        unknown = eta.actions - a.actions
        if unknown:
            issues.append(Issue("UnknownAction", f"{eta.id} uses {sorted(unknown)}", (eta.id,)))
        if eta.actions & a.timeouts and len(eta.actions) != 1:
            issues.append(Issue("TimeoutNotSingleton", f"{eta.id} mixes a timeout with other actions", (eta.id,)))
        if eta.source in a.finals:
            issues.append(Issue("FinalHasOutgoing", f"final state {eta.source} has outgoing {eta.id}", (eta.id,)))
    for v in sorted(a.states):
        if v != a.initial and v not in a.finals and v not in incoming:
            issues.append(Issue("Unreachable", f"non-final state {v} has no incoming transitions", (v,)))
        out = a.outgoing(v)
        for e1, e2 in combinations(out, 2):
            if e1.actions <= e2.actions or e2.actions <= e1.actions:
                issues.append(Issue("NonDeterministic", f"{e1.id} and {e2.id} have nested labels", (e1.id, e2.id)))

    used = {act for eta in a.transitions for act in eta.actions}
    images: dict[Transfer, str] = {}
    for act in sorted(used):
        t = a.rho.get(act)
        if t is None:
            issues.append(Issue("InconsistentRho", f"action {act} has no transfer", (act,)))
            continue
        try:
            validate_transfer(t, a.events)
        except InvalidTransfer as exc:
            issues.append(Issue("InconsistentRho", f"action {act}: {type(exc).__name__} {t.name}", (act,)))
        if t in images:
            issues.append(Issue("InconsistentRho", f"actions {images[t]} and {act} share {t.name}", (act,)))
        images[t] = act
    for eta in a.transitions:
        resources = [a.rho[act].resource for act in eta.actions if act in a.rho]
        if len(set(resources)) != len(resources):
            issues.append(Issue("InconsistentRho", f"bundle of {eta.id} moves a resource twice", (eta.id,)))

    cycle = _find_cycle(a)
    if cycle:
        issues.append(Issue("Cyclic", " -> ".join(cycle), tuple(cycle)))

    if not any(i.kind == "NonDeterministic" for i in issues):
        for v in sorted(a.states):
            union = a.action_union(v)
            for x in _progress_sets(a, v):
                for act in sorted(union - x):
                    done = a.completed(v, x | {act})
                    if len(done) > 1:
                        issues.append(Issue(
                            "AmbiguousCompletion",
                            f"at {v} with progress {sorted(x)}, {act} completes {[e.id for e in done]}",
                            (v, x, act),
                        ))
    return issues


def ensure_valid(a: LegalAutomaton) -> LegalAutomaton:
    issues = validate_legal_automaton(a)
    if issues:
        raise ContractValidationError(issues)
    return a


# -- execution automaton --------------------------------------------------------


def derive_execution_automaton(a: LegalAutomaton) -> ExecAutomaton:
    ensure_valid(a)
    states: set[ExecState] = {ExecState(v) for v in a.states}
    transitions: list[ExecTransition] = []
    for v in sorted(a.states):
        union = a.action_union(v)
        for x in _progress_sets(a, v):
            src = ExecState(v, x)
            states.add(src)
            for act in sorted(union - x):
                done = a.completed(v, x | {act})
                target = ExecState(done[0].target) if done else ExecState(v, x | {act})
                transitions.append(ExecTransition(src, target, act))
    return ExecAutomaton(a, frozenset(states), tuple(transitions))


# -- trajectories ---------------------------------------------------------------


def enumerate_trajectories(
    a: LegalAutomaton | ExecAutomaton,
    start: str | ExecState | None = None,
    initial_only: bool = True,
) -> list[Trajectory]:
    """All trajectories from ``start`` (or the initial state), empty one included.

    With ``initial_only=False`` and no ``start``, trajectories from every state
    are returned.
    """
    exec_flavor = isinstance(a, ExecAutomaton)
    flavor = "exec" if exec_flavor else "legal"
    if exec_flavor and isinstance(start, str):
        start = a.state(start)
    if start is None:
        starts = [a.initial] if initial_only else sorted(a.states)
    else:
        if start not in a.states:
            raise UnknownState(str(start))
        starts = [start]

    result: list[Trajectory] = []
    for s in starts:
        stack = [(s, ())]
        while stack:
            node, edges = stack.pop()
            result.append(Trajectory(s, edges, flavor))
            for e in reversed(a.outgoing(node)):
                stack.append((e.target, edges + (e,)))
    return result


def labeling(a: LegalAutomaton | ExecAutomaton, t: Trajectory) -> tuple:
    """Bundle labeling of a legal trajectory, transfer labeling of an exec one."""
    if t.flavor == "legal":
        if not isinstance(a, LegalAutomaton):
            raise FlavorMismatch("legal trajectory given with an execution automaton")
        return tuple(a.beta(e) for e in t.edges)
    if not isinstance(a, ExecAutomaton):
        raise FlavorMismatch("exec trajectory given with a legal automaton")
    return tuple(a.legal.rho[e.action] for e in t.edges)


def is_linearisation(tl: Sequence[Transfer], bl: Sequence[Bundle], a: LegalAutomaton | None = None) -> bool:
    """True iff ``tl`` is the concatenation of a permutation of each bundle of ``bl``."""
    pos = 0
    for b in bl:
        chunk = tl[pos: pos + len(b)]
        if len(chunk) != len(b) or set(chunk) != set(b.transfers):
            return False
        pos += len(b)
    return pos == len(tl)


def legal_projection(ex: ExecAutomaton, t: Trajectory) -> Trajectory:
    """The legal trajectory unfolded by an exec trajectory (intermediates erased)."""
    if t.flavor != "exec":
        raise FlavorMismatch("expected an exec trajectory")
    a = ex.legal
    start = t.start.base if isinstance(t.start, ExecState) else t.start
    edges = []
    for e in t.edges:
        if e.target.is_legal:
            done = e.source.done | {e.action}
            (eta,) = [x for x in a.completed(e.source.base, done) if x.target == e.target.base]
            edges.append(eta)
    return Trajectory(start, tuple(edges), "legal")


def derive_gamma(a: LegalAutomaton, t: Trajectory) -> frozenset[StateOfAffairs]:
    if t.flavor != "legal":
        raise FlavorMismatch("gamma is defined on legal trajectories")
    s = a.initial_soa
    for step, eta in enumerate(t.edges):
        try:
            s = apply_bundle(a.beta(eta), s)
        except NotJointlyApplicable as exc:
            raise BundleNotApplicable(step, exc) from None
    return frozenset({s})


# -- contracts ------------------------------------------------------------------


@dataclass(eq=False)
class Contract:
    """A registered contract: its legal automaton plus derived structure."""

    id: str
    legal: LegalAutomaton
    resources: frozenset[str]
    actors: frozenset[str]
    events: frozenset[str] = frozenset()
    source: Mapping | None = field(default=None, repr=False)

    def __post_init__(self):
        ensure_valid(self.legal)
        unknown = {t.resource for t in self.legal.rho.values()} - self.resources
        if unknown:
            raise ContractValidationError([Issue("UnknownResource", f"rho moves undeclared {sorted(unknown)}")])
        clash = {a for a in self.actors if a in self.resources}
        if clash:
            raise ContractValidationError([Issue("ActorResourceClash", f"{sorted(clash)} are both actor and resource")])

    @cached_property
    def exec(self) -> ExecAutomaton:
        return derive_execution_automaton(self.legal)

    @cached_property
    def action_of(self) -> dict[Transfer, str]:
        used = {act for eta in self.legal.transitions for act in eta.actions}
        return {self.legal.rho[act]: act for act in used}

    @cached_property
    def transfers(self) -> frozenset[Transfer]:
        return frozenset(self.action_of)

    @cached_property
    def bundle_labelings(self) -> list[tuple[Bundle, ...]]:
        return [labeling(self.legal, t) for t in enumerate_trajectories(self.legal)]

    @cached_property
    def transfer_labelings(self) -> list[tuple[Transfer, ...]]:
        return [labeling(self.exec, t) for t in enumerate_trajectories(self.exec)]

    @cached_property
    def _legal_by_labeling(self) -> dict[tuple[Bundle, ...], Trajectory]:
        return {labeling(self.legal, t): t for t in enumerate_trajectories(self.legal)}

    def legal_state_of(self, bl: Sequence[Bundle]) -> str:
        return self._legal_by_labeling[tuple(bl)].end

    def outcome(self, v: str) -> str | None:
        return self.legal.finals.get(v)

    def proper_actors(self) -> frozenset[str]:
        return frozenset(a for a in self.actors if is_proper(a))


def make_legal_automaton(
    states: Iterable[str],
    initial: str,
    transitions: Iterable[tuple[str, str, Iterable[str]]] | Iterable[LegalTransition],
    finals: Mapping[str, str],
    rho: Mapping[str, Transfer],
    initial_soa: StateOfAffairs,
    timeouts: Iterable[str] = (),
    events: Iterable[str] = (),
    actions: Iterable[str] | None = None,
) -> LegalAutomaton:
    """Convenience constructor; plain ``(source, target, actions)`` triples get id ``(source,target)``."""
    ts = []
    for tr in transitions:
        if isinstance(tr, LegalTransition):
            ts.append(tr)
        else:
            src, dst, acts = tr
            ts.append(LegalTransition(f"({src},{dst})", src, dst, frozenset(acts)))
    return LegalAutomaton(
        states=frozenset(states),
        initial=initial,
        transitions=tuple(ts),
        finals=dict(finals),
        actions=frozenset(actions if actions is not None else rho),
        timeouts=frozenset(timeouts),
        rho=dict(rho),
        initial_soa=initial_soa,
        events=frozenset(events),
    )
