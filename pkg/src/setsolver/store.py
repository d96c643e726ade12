"""Constraint store, solver configuration and answers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .terms import Constraint, Term


@dataclass
class SolveConfig:
    """Search knobs.

    rewrite_budget caps rewrite steps per branch; rel_share is the portion
    available to relational rewrites (composition chains and friends),
    whose divergent patterns are the ones worth catching early.
    unfold_depth caps user-clause unfoldings per branch.
    """

    max_solutions: Optional[int] = None
    rewrite_budget: int = 100000
    unfold_depth: int = 64
    minimal_mode: bool = False
    trace: bool = False
    timeout_ms: Optional[int] = None
    rel_share: int = 2000
    expand_limit: int = 512
    venn_limit: int = 12

    def __post_init__(self):
        if self.rewrite_budget <= 0 or self.unfold_depth <= 0 or self.rel_share <= 0:
            raise ValueError("budgets must be strictly positive")


class Store:
    """Substitution plus agenda of not-yet-irreducible constraints."""

    __slots__ = ("subst", "agenda", "steps", "rel_steps", "outbox", "witnessed")

    def __init__(self, subst=None, agenda=(), steps=0, rel_steps=0, outbox=(),
                 witnessed=False):
        self.subst: Dict[str, Term] = subst if subst is not None else {}
        self.agenda: Tuple[Constraint, ...] = tuple(agenda)
        self.steps = steps
        self.rel_steps = rel_steps
        self.outbox: Tuple[str, ...] = tuple(outbox)
        self.witnessed = witnessed

    def copy(self) -> "Store":
        return Store(
            dict(self.subst),
            self.agenda,
            self.steps,
            self.rel_steps,
            self.outbox,
            self.witnessed,
        )

    def __repr__(self):
        return "Store(%d bindings, %d constraints)" % (len(self.subst), len(self.agenda))


@dataclass
class Answer:
    """Bindings for input-formula variables plus residual constraints."""

    bindings: Tuple[Tuple[str, Term], ...]
    residual: Tuple[Constraint, ...]
    lia_model: Optional[Dict[str, int]] = None
    output: Tuple[str, ...] = ()
