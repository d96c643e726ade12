"""Shared plumbing for constraint rewrite rules.

A rule inspects one (substitution-applied) constraint and either declares it
irreducible (None) or returns the list of alternative branches that replace
it.  A branch is a pair (bindings, constraints): variable bindings to apply
plus constraints to append to the agenda.  Branch order is the search
order.  An empty branch list means the constraint is unsatisfiable on this
path.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from .errors import NotNegatable
from .terms import (
    And,
    Atom,
    Constraint,
    Formula,
    Or,
    Pair,
    Ris,
    Term,
    TrueF,
    FalseF,
    Var,
    negate_atom,
)

Branch = Tuple[list, list]  # (bindings: [(name, Term)], constraints: [Constraint])


def branch(*cons, bind=()) -> Branch:
    return (list(bind), [c for c in cons if c is not None])


def con(name: str, *args: Term) -> Constraint:
    return Constraint(name, tuple(args))


class RuleCtx:
    """What rules may use: a fresh-variable supply and solver knobs."""

    def __init__(self, supply, input_vars=frozenset(), expand_limit=512):
        self.supply = supply
        self.input_vars = input_vars
        self.expand_limit = expand_limit

    def fresh(self) -> Var:
        return self.supply.fresh()


def conjuncts_of(f: Formula) -> List[Formula]:
    if isinstance(f, TrueF):
        return []
    if isinstance(f, And):
        return conjuncts_of(f.left) + conjuncts_of(f.right)
    return [f]


def formula_constraints(f: Formula) -> Optional[List[Constraint]]:
    """Flatten a pure conjunction of atoms into constraints; None if it
    contains disjunctions or calls (those need goal-level treatment)."""
    out = []
    for part in conjuncts_of(f):
        if isinstance(part, Atom):
            out.append(part.con)
        elif isinstance(part, FalseF):
            return None
        else:
            return None
    return out


def dnf(f: Formula) -> List[List[Constraint]]:
    """Disjunctive normal form of a small formula of atoms.

    Raises NotNegatable when the formula contains calls (no clausal
    semantics at rule level).
    """
    if isinstance(f, TrueF):
        return [[]]
    if isinstance(f, FalseF):
        return []
    if isinstance(f, Atom):
        return [[f.con]]
    if isinstance(f, And):
        out = []
        for l in dnf(f.left):
            for r in dnf(f.right):
                out.append(l + r)
        return out
    if isinstance(f, Or):
        return dnf(f.left) + dnf(f.right)
    raise NotNegatable("formula part outside the atomic fragment: %r" % (f,))


def negated_branches(f: Formula) -> List[List[Constraint]]:
    """Branches covering the negation of a conjunction/disjunction of
    negatable atoms."""
    from .terms import negate_formula

    return dnf(negate_formula(f))
