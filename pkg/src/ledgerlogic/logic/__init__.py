"""Temporal logic over trees of ledger states."""

from .formula import *  # noqa: F401,F403
from .semantics import (  # noqa: F401
    AxiomReport, Evolution, IndexOutOfRange, Interpretation, check_axioms, eval_formula,
    evolution_at, interpret_formula, mask, pullback, pushforward_exists, pushforward_forall,
)
from .universe import (  # noqa: F401
    ExplicitTree, LedgerUniverse, MonotoneMap, NotPrefixClosed, PathOutsideUniverse, Tree,
    UniverseTooLarge, UnregisteredMap, register_contract_maps,
)
