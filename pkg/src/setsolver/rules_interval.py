"""Rewrite support for integer intervals and the min/max/nint expansions.

The key identity: a set equals int(M,N) exactly when it is a subset of the
interval with cardinality N-M+1 (nonempty case; the empty case N < M is a
separate branch).  The equality decomposition below also conjoins min/max
and the reverse subset so that answers ground out to concrete integers the
way interval reconstruction demands.
"""

from __future__ import annotations

from typing import List, Optional

from .rulesbase import Branch, RuleCtx, branch, con
from .terms import (
    ArithOp,
    Atom,
    Constraint,
    EMPTY,
    EmptySet,
    IntConst,
    Interval,
    Ris,
    SetCons,
    Term,
    Var,
    mk_set,
)


def interval_values(iv: Interval, limit: int) -> Optional[List[IntConst]]:
    """Concrete elements of a ground interval, or None if unbounded/too big."""
    if isinstance(iv.lo, IntConst) and isinstance(iv.hi, IntConst):
        lo, hi = iv.lo.value, iv.hi.value
        if hi < lo:
            return []
        if hi - lo + 1 > limit:
            return None
        return [IntConst(v) for v in range(lo, hi + 1)]
    return None


def expand_interval(iv: Interval, limit: int) -> Optional[Term]:
    vals = interval_values(iv, limit)
    if vals is None:
        return None
    return mk_set(vals, EMPTY)


def width_expr(iv: Interval) -> Term:
    # N - M + 1
    return ArithOp("+", (ArithOp("-", (iv.hi, iv.lo)), IntConst(1)))


def interval_eq_constraints(s: Term, iv: Interval, ctx: RuleCtx) -> list:
    """Constraints stating s = iv for a NONEMPTY interval.

    The subset+size identity carries satisfiability; min/max and the
    reverse subset drive answers to concrete bounds and elements.
    """
    k = ctx.fresh()
    return [
        con("le", iv.lo, iv.hi),
        con("subset", s, iv),
        con("size", s, k),
        con("aeq", k, width_expr(iv)),
        con("min", s, iv.lo),
        con("max", s, iv.hi),
        con("subset", iv, s),
    ]


def eq_with_interval(s: Term, iv: Interval, ctx: RuleCtx) -> List[Branch]:
    """Branches for s = iv where s is not a variable."""
    if isinstance(s, EmptySet):
        return [branch(con("lt", iv.hi, iv.lo))]
    if isinstance(s, Interval):
        both_empty = branch(con("lt", s.hi, s.lo), con("lt", iv.hi, iv.lo))
        same = branch(
            con("le", s.lo, s.hi),
            con("aeq", s.lo, iv.lo),
            con("aeq", s.hi, iv.hi),
        )
        return [same, both_empty]
    if isinstance(s, SetCons):
        return [branch(*interval_eq_constraints(s, iv, ctx))]
    if isinstance(s, Ris):
        # Evaluate the interval side when it is ground and small; otherwise
        # leave the equation to the RIS rules / residue.
        ext = expand_interval(iv, ctx.expand_limit)
        if ext is not None:
            return [branch(con("eq", s, ext))]
        return [branch(*interval_eq_constraints_var_side(s, iv, ctx))]
    # Cartesian products: equal to an interval only when both are empty.
    from .terms import CP

    if isinstance(s, CP):
        return [
            branch(con("eq", s.left, EMPTY), con("lt", iv.hi, iv.lo)),
            branch(con("eq", s.right, EMPTY), con("lt", iv.hi, iv.lo)),
        ]
    return []


def interval_eq_constraints_var_side(s: Term, iv: Interval, ctx: RuleCtx) -> list:
    k = ctx.fresh()
    return [
        con("subset", s, iv),
        con("size", s, k),
        con("aeq", k, width_expr(iv)),
    ]


def member_of_interval(x: Term, iv: Interval) -> list:
    return [con("integer", x), con("le", iv.lo, x), con("le", x, iv.hi)]


def not_member_of_interval(x: Term, iv: Interval) -> List[Branch]:
    return [
        branch(con("lt", x, iv.lo), con("integer", x)),
        branch(con("lt", iv.hi, x), con("integer", x)),
        branch(con("ninteger", x)),
    ]


def size_of_interval(iv: Interval, n: Term) -> List[Branch]:
    return [
        branch(con("le", iv.lo, iv.hi), con("aeq", n, width_expr(iv))),
        branch(con("lt", iv.hi, iv.lo), con("aeq", n, IntConst(0))),
    ]


def disj_intervals(a: Interval, b: Interval) -> List[Branch]:
    return [
        branch(con("lt", a.hi, a.lo)),
        branch(con("lt", b.hi, b.lo)),
        branch(con("lt", a.hi, b.lo)),
        branch(con("lt", b.hi, a.lo)),
    ]


# -- min / max / nint expansions -------------------------------------------


def expand_min(a: Term, m: Term, ctx: RuleCtx) -> List[Branch]:
    x = ctx.fresh()
    body = con("le", m, x)
    r = Ris(x, a, (), Atom(body), x, None)
    return [branch(con("in", m, a), Constraint("foreach", (r,)))]


def expand_max(a: Term, m: Term, ctx: RuleCtx) -> List[Branch]:
    x = ctx.fresh()
    body = con("le", x, m)
    r = Ris(x, a, (), Atom(body), x, None)
    return [branch(con("in", m, a), Constraint("foreach", (r,)))]


def expand_nint(a: Term, ctx: RuleCtx) -> List[Branch]:
    """a is not an integer interval: a non-integer member, or a gap between
    min and max."""
    z = ctx.fresh()
    m0 = ctx.fresh()
    n0 = ctx.fresh()
    gap = branch(
        con("min", a, m0),
        con("max", a, n0),
        con("integer", z),
        con("le", m0, z),
        con("le", z, n0),
        con("nin", z, a),
    )
    alien = branch(con("in", z, a), con("ninteger", z))
    return [alien, gap]
