"""Evaluation of formulas as node masks over a finite tree.

Each formula denotes a 0/1 mask over the nodes of a :class:`Tree`; masks are
memoized per tree. Future operators only see the paths the tree enumerates, so
on a bounded universe their answers are relative to that bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from ..core import BOT, ModelError, Transfer
from ..ledger import LedgerState
from ..occurrence import nu
from . import kernels
from .formula import (
    BC, FALSE, TRUE, And, App, AppAt, AppLast, BoxDown, BoxUp, Chi, DiamondDown,
    DiamondUp, ExistsAlong, FalseF, ForallAlong, Formula, Hol, Implies, NextBox,
    NextDia, Not, Or, PhiT, PrevBox, PrevDia, Pullback, TrueF, Zeta, conj, disj,
)
from .universe import LedgerUniverse, MonotoneMap, PathOutsideUniverse, Tree, UnregisteredMap

__all__ = [
    "AxiomReport", "AxiomResult", "Evolution", "IndexOutOfRange", "Interpretation",
    "PathOutsideUniverse", "UnregisteredMap", "check_axioms", "eval_formula",
    "evolution_at", "interpret_formula", "mask", "pullback", "pushforward_exists",
    "pushforward_forall",
]


class IndexOutOfRange(ModelError):
    pass


_KERNELS = {
    DiamondUp: kernels.diamond_up,
    BoxDown: kernels.box_down,
    DiamondDown: kernels.diamond_down,
    BoxUp: kernels.box_up,
    NextDia: kernels.next_exists,
    NextBox: kernels.next_all,
    PrevDia: kernels.prev_exists,
    PrevBox: kernels.prev_all,
}


def _last_labels(u: Tree) -> list:
    key = ("last",)
    if key not in u.cache:
        u.cache[key] = [p[-1] if p else None for p in u.paths]
    return u.cache[key]


def _ancestor_at(u: Tree, n: int) -> np.ndarray:
    """Index of the depth-``n`` prefix of each node, or -1 when the node is shorter."""
    key = ("anc", n)
    if key not in u.cache:
        anc = np.full(len(u), -1, dtype=np.int64)
        par = u.parent
        for i in range(len(u)):
            d = u.depth[i]
            if d == n:
                anc[i] = i
            elif d > n:
                anc[i] = anc[par[i]]
        u.cache[key] = anc
    return u.cache[key]


def _holders(u: Tree, resource: str) -> list:
    key = ("hold", resource)
    if key not in u.cache:
        last = _last_labels(u)
        out = [u.initial.get(resource, "TOP")] * len(u)
        for i in range(1, len(u)):
            t = last[i]
            out[i] = t.target if getattr(t, "resource", None) == resource else out[u.parent[i]]
        u.cache[key] = out
    return u.cache[key]


def _atom(f: Formula, u: Tree) -> np.ndarray:
    n = len(u)
    if isinstance(f, Chi):
        return (u.depth <= f.t).astype(np.uint8)
    if isinstance(f, App):
        last = _last_labels(u)
        out = np.zeros(n, dtype=np.uint8)
        for i in range(1, n):
            out[i] = 1 if last[i] == f.transfer else out[u.parent[i]]
        return out
    if isinstance(f, AppAt):
        if f.n < 1:
            return np.zeros(n, dtype=np.uint8)
        last = _last_labels(u)
        anc = _ancestor_at(u, f.n)
        return np.array([a >= 0 and last[a] == f.transfer for a in anc], dtype=np.uint8)
    if isinstance(f, AppLast):
        last = _last_labels(u)
        return np.array(
            [1 <= d <= f.t and x == f.transfer for d, x in zip(u.depth, last)], dtype=np.uint8
        )
    if isinstance(f, Hol):
        held = _holders(u, f.resource)
        anc = _ancestor_at(u, f.t)
        return np.array([a >= 0 and held[a] == f.actor for a in anc], dtype=np.uint8)
    if isinstance(f, PhiT):
        if u.trace is None:
            raise IndexOutOfRange("this universe has no recorded trace")
        if not 0 <= f.t <= len(u.trace):
            raise IndexOutOfRange(f"step {f.t} outside 0..{len(u.trace)}")
        sigma = u.trace[: f.t]
        anc = _ancestor_at(u, f.t)
        out = np.zeros(n, dtype=np.uint8)
        s_idx = u.index.get(sigma, -1)
        for i in range(n):
            if u.depth[i] >= f.t:
                out[i] = anc[i] == s_idx
            else:
                out[i] = sigma[: u.depth[i]] == u.paths[i]
        return out
    if isinstance(f, Zeta):
        out = np.zeros(n, dtype=np.uint8)
        i = u.index.get(tuple(f.labeling))
        if i is not None:
            out[i] = 1
        return out
    if isinstance(f, BC):
        c = u.contracts.get(f.contract)
        m = u.maps.get(f"nu_l:{f.contract}")
        if m is not None and m.domain is u:
            img = m.image_index
            out = np.ones(n, dtype=np.uint8)
            out[1:] = img[1:] != img[u.parent[1:]]
            return out
        if c is None:
            raise UnregisteredMap(f"contract {f.contract!r} is not known to this universe")
        images = [nu(p, c) for p in u.paths]
        out = np.ones(n, dtype=np.uint8)
        for i in range(1, n):
            out[i] = images[i] != images[u.parent[i]]
        return out
    raise TypeError(f"not a formula: {f!r}")


def _map_for(f, u: Tree, maps) -> MonotoneMap:
    registry = maps if maps is not None else u.maps
    try:
        return registry[f.map]
    except KeyError:
        raise UnregisteredMap(f.map) from None


def mask(f: Formula, u: Tree, maps: dict | None = None) -> np.ndarray:
    """0/1 mask of the nodes of ``u`` satisfying ``f``."""
    key = ("mask", f) if maps is None else ("mask", f, id(maps))
    hit = u.cache.get(key)
    if hit is not None:
        return hit
    n = len(u)
    if isinstance(f, TrueF):
        out = np.ones(n, dtype=np.uint8)
    elif isinstance(f, FalseF):
        out = np.zeros(n, dtype=np.uint8)
    elif isinstance(f, Not):
        out = 1 - mask(f.operand, u, maps)
    elif isinstance(f, And):
        out = mask(f.left, u, maps) & mask(f.right, u, maps)
    elif isinstance(f, Or):
        out = mask(f.left, u, maps) | mask(f.right, u, maps)
    elif isinstance(f, Implies):
        out = (1 - mask(f.left, u, maps)) | mask(f.right, u, maps)
    elif type(f) in _KERNELS:
        out = _KERNELS[type(f)](u.parent, np.ascontiguousarray(mask(f.operand, u, maps)))
    elif isinstance(f, Pullback):
        m = _map_for(f, u, maps)
        if m.domain is not u:
            raise UnregisteredMap(f"{f.map} does not start at this tree")
        out = mask(f.operand, m.codomain, maps)[m.image_index]
    elif isinstance(f, ExistsAlong):
        m = _map_for(f, u, maps)
        if m.codomain is not u:
            raise UnregisteredMap(f"{f.map} does not land in this tree")
        inner = mask(f.operand, m.domain, maps).astype(bool)
        out = np.zeros(n, dtype=np.uint8)
        out[m.image_index[inner]] = 1
    elif isinstance(f, ForallAlong):
        m = _map_for(f, u, maps)
        if m.codomain is not u:
            raise UnregisteredMap(f"{f.map} does not land in this tree")
        inner = mask(f.operand, m.domain, maps).astype(bool)
        out = np.ones(n, dtype=np.uint8)
        out[m.image_index[~inner]] = 0
    else:
        out = _atom(f, u)
    out = np.ascontiguousarray(out, dtype=np.uint8)
    u.cache[key] = out
    return out


def eval_formula(f: Formula, p: Sequence[Hashable], u: Tree, maps: dict | None = None) -> bool:
    return bool(mask(f, u, maps)[u.index_of(p)])


@dataclass(frozen=True)
class Interpretation:
    paths: frozenset
    depth_bound: int

    def __contains__(self, p: object) -> bool:
        return tuple(p) in self.paths  # type: ignore[arg-type]

    def __len__(self) -> int:
        return len(self.paths)


def interpret_formula(f: Formula, u: Tree, depth: int, maps: dict | None = None) -> Interpretation:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    m = mask(f, u, maps)
    return Interpretation(
        frozenset(u.paths[i] for i in np.flatnonzero(m) if u.depth[i] <= depth), depth
    )


def _resolve(m: MonotoneMap | str, registry: dict | None) -> MonotoneMap:
    if isinstance(m, MonotoneMap):
        return m
    if registry is None or m not in registry:
        raise UnregisteredMap(m)
    return registry[m]


def pushforward_exists(m: MonotoneMap | str, x: Interpretation, registry: dict | None = None) -> Interpretation:
    """Image of ``x`` under ``m`` (left adjoint of the preimage)."""
    m = _resolve(m, registry)
    d = x.depth_bound
    return Interpretation(
        frozenset(m(p) for p in x.paths if p in m.domain and len(p) <= d and len(m(p)) <= d), d
    )


def pushforward_forall(m: MonotoneMap | str, x: Interpretation, registry: dict | None = None) -> Interpretation:
    """Codomain paths all of whose preimages lie in ``x`` (right adjoint of the preimage)."""
    m = _resolve(m, registry)
    d = x.depth_bound
    bad = {m(p) for p in m.domain.paths if len(p) <= d and p not in x.paths}
    return Interpretation(
        frozenset(q for q in m.codomain.paths if len(q) <= d and q not in bad), d
    )


def pullback(m: MonotoneMap | str, y: Interpretation, registry: dict | None = None) -> Interpretation:
    m = _resolve(m, registry)
    d = y.depth_bound
    return Interpretation(
        frozenset(p for p in m.domain.paths if len(p) <= d and m(p) in y.paths), d
    )


# -- evolutions ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Evolution:
    t: int
    established: tuple[Transfer, ...]
    universe: Tree

    def satisfies(self, f: Formula, p: Sequence[Hashable]) -> bool:
        return eval_formula(And(f, PhiT(self.t)), p, self.universe)

    def interpret(self, f: Formula, depth: int | None = None) -> Interpretation:
        d = self.universe.max_depth if depth is None else depth
        return interpret_formula(And(f, PhiT(self.t)), self.universe, d)

    @property
    def paths(self) -> frozenset:
        return self.interpret(TRUE).paths


def evolution_at(
    ledger: LedgerState | Sequence[Transfer],
    t: int,
    contracts=None,
    horizon: int | None = None,
    gate: str = "contract",
    universe: Tree | None = None,
) -> Evolution:
    u = universe if universe is not None else LedgerUniverse(ledger, contracts, horizon, gate)
    if not 0 <= t <= len(u.trace):
        raise IndexOutOfRange(f"step {t} outside 0..{len(u.trace)}")
    return Evolution(t, tuple(u.trace[:t]), u)


# -- axioms -------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomResult:
    name: str
    holds: bool
    witness: tuple | None = None


@dataclass(frozen=True)
class AxiomReport:
    results: tuple[AxiomResult, ...]

    @property
    def ok(self) -> bool:
        return all(r.holds for r in self.results)

    def failed(self) -> list[AxiomResult]:
        return [r for r in self.results if not r.holds]


def axiom_formulas(u: Tree, depth: int, extra: Iterable[Transfer] = ()) -> list[tuple[str, Formula]]:
    transfers = sorted({x for x in u.alphabet if isinstance(x, Transfer)} | set(extra))
    axioms = [
        ("no-self-transfer", conj(Not(App(x)) for x in transfers if x.source == x.target)),
        ("no-transfer-from-bottom", conj(Not(App(x)) for x in transfers if x.source == BOT)),
    ]
    frozen_after = []
    for x in transfers:
        if x.target != BOT:
            continue
        later = [y for y in transfers if y.resource == x.resource]
        for n in range(1, depth + 1):
            never_again = conj(Not(AppAt(y, m)) for m in range(n + 1, depth + 1) for y in later)
            frozen_after.append(Implies(AppAt(x, n), BoxDown(never_again)))
    axioms.append(("nothing-moves-after-bottom", conj(frozen_after)))
    if u.trace is not None:
        steps = min(depth, len(u.trace))
        axioms.append((
            "evolutions-shrink",
            conj(Implies(PhiT(t + 1), PhiT(t)) for t in range(steps)),
        ))
    return axioms


def check_axioms(u: Tree, contract=None, depth: int | None = None) -> AxiomReport:
    """Evaluate the ledger axioms on every path of ``u`` up to ``depth``.

    With a contract, its action transfers join the alphabet the axioms range
    over, so the report also covers moves the universe happens not to contain.
    """
    d = u.max_depth if depth is None else depth
    extra = contract.transfers if contract is not None else ()
    results = []
    for name, f in axiom_formulas(u, d, extra):
        m = mask(f, u)
        bad = [i for i in np.flatnonzero(m == 0) if u.depth[i] <= d]
        results.append(AxiomResult(name, not bad, u.paths[bad[0]] if bad else None))
    return AxiomReport(tuple(results))
