"""Rewrite rules for the relational fragment: identity, converse,
composition, partial functions, and the derived relational catalogue
(dom, ran, restrictions, overriding, application).

Composition decomposes by the structure of its operands; with the result
known, chains are materialised one pair at a time.  dom and ran reduce
elementwise (ran through converse+dom), which keeps the terminating cases
terminating; genuinely self-referential compositions still diverge and are
caught by the relational budget share.
"""

from __future__ import annotations

from typing import List, Optional

from .rulesbase import Branch, RuleCtx, branch, con
from .rules_set import _evaluable_operand
from .terms import (
    Constraint,
    EMPTY,
    EmptySet,
    Interval,
    Pair,
    Ris,
    SetCons,
    Term,
    UrAtom,
    IntConst,
    Var,
    set_parts,
)


def _pairify(p: Term, ctx) -> Optional[Pair]:
    """Return p as a Pair when it already is one, else None (caller emits an
    eq to force it)."""
    return p if isinstance(p, Pair) else None


def _force_pair(atom_name, args, idx, ctx) -> List[Branch]:
    """Re-emit the constraint after forcing args[idx] to be a pair."""
    p = args[idx]
    x, y = ctx.fresh(), ctx.fresh()
    new = list(args)
    new[idx] = Pair(x, y)
    return [branch(con("eq", p, Pair(x, y)), Constraint(atom_name, tuple(new)))]


def _nonrel_rigid(t: Term) -> bool:
    return isinstance(t, (UrAtom, IntConst))


# ---------------------------------------------------------------------------
# id / inv


def rule_id(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, r = args
    if isinstance(a, EmptySet):
        return [branch(con("eq", r, EMPTY))]
    if isinstance(r, EmptySet):
        return [branch(con("eq", a, EMPTY))]
    for t in (a, r):
        ext = _evaluable_operand(t, ctx)
        if ext is not None:
            new = [x if x is not t else ext for x in (a, r)]
            return [branch(con("id", *new))]
    if isinstance(a, SetCons):
        r1 = ctx.fresh()
        t = a.element
        return [branch(con("eq", r, SetCons(Pair(t, t), r1)), con("id", a.rest, r1))]
    if isinstance(r, SetCons):
        p = r.element
        n, a1, r2 = ctx.fresh(), ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", p, Pair(n, n)),
                con("eq", a, SetCons(n, a1)),
                con("id", a1, r2),
                con("eq", SetCons(p, r.rest), SetCons(p, r2)),
            )
        ]
    return None


def rule_inv(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    r, s = args
    if isinstance(r, EmptySet):
        return [branch(con("eq", s, EMPTY))]
    if isinstance(s, EmptySet):
        return [branch(con("eq", r, EMPTY))]
    if isinstance(r, SetCons):
        p = r.element
        if not isinstance(p, Pair):
            return _force_pair("inv", args, 0, ctx) if isinstance(p, Var) else []
        s1 = ctx.fresh()
        return [
            branch(
                con("eq", s, SetCons(Pair(p.second, p.first), s1)),
                con("inv", r.rest, s1),
            )
        ]
    if isinstance(s, SetCons):
        q = s.element
        if not isinstance(q, Pair):
            return _force_pair("inv", args, 1, ctx) if isinstance(q, Var) else []
        r1, s2 = ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", r, SetCons(Pair(q.second, q.first), r1)),
                con("inv", r1, s2),
                con("eq", s, SetCons(q, s2)),
            )
        ]
    return None


def rule_ninv(args, ctx: RuleCtx) -> List[Branch]:
    r, s = args
    n, z = ctx.fresh(), ctx.fresh()
    return [
        branch(con("inv", r, n), con("in", z, n), con("nin", z, s)),
        branch(con("inv", r, n), con("in", z, s), con("nin", z, n)),
    ]


# ---------------------------------------------------------------------------
# comp


def _is_singleton(t: Term):
    if isinstance(t, SetCons) and isinstance(t.rest, EmptySet):
        return t.element
    return None


def rule_comp(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    r, s, t = args
    if isinstance(r, EmptySet) or isinstance(s, EmptySet):
        return [branch(con("eq", t, EMPTY))]
    for x in (r, s, t):
        ext = _evaluable_operand(x, ctx)
        if ext is not None:
            new = [y if y is not x else ext for y in (r, s, t)]
            return [branch(con("comp", *new))]
    single = _is_singleton(r)
    if single is not None:
        return _comp_single(single, s, t, args, ctx)
    if isinstance(r, SetCons):
        # Split the left operand: {p/R'} ; S = ({p} ; S) U (R' ; S)
        t1, t2 = ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("comp", SetCons(r.element, EMPTY), s, t1),
                con("comp", r.rest, s, t2),
                con("un", t1, t2, t),
            )
        ]
    if isinstance(t, EmptySet):
        if isinstance(s, SetCons):
            q = s.element
            if not isinstance(q, Pair):
                return _force_pair("comp", args, 1, ctx) if isinstance(q, Var) else []
            return [
                branch(
                    con("comp", r, SetCons(Pair(q.first, q.first), EMPTY), EMPTY),
                    con("comp", r, s.rest, EMPTY),
                )
            ]
        return None  # comp(R,S,{}) over variables: residual
    if isinstance(t, SetCons):
        # Materialise one chain for the known result pair, then re-examine.
        q = t.element
        if not isinstance(q, Pair):
            return _force_pair("comp", args, 2, ctx) if isinstance(q, Var) else []
        y = ctx.fresh()
        r1 = ctx.fresh()
        return [
            branch(
                con("eq", r, SetCons(Pair(q.first, y), r1)),
                con("in", Pair(y, q.second), s),
                con("comp", r, s, t),
            )
        ]
    return None


def _comp_single(p: Term, s: Term, t: Term, args, ctx) -> Optional[List[Branch]]:
    if not isinstance(p, Pair):
        if isinstance(p, Var):
            x, y = ctx.fresh(), ctx.fresh()
            return [
                branch(
                    con("eq", p, Pair(x, y)),
                    con("comp", SetCons(Pair(x, y), EMPTY), s, t),
                )
            ]
        return []  # a non-pair member makes the relation ill-formed: no chain
    x, y = p.first, p.second
    if isinstance(s, SetCons):
        q = s.element
        if not isinstance(q, Pair):
            if isinstance(q, Var):
                u, v = ctx.fresh(), ctx.fresh()
                return [
                    branch(
                        con("eq", q, Pair(u, v)),
                        con("comp", SetCons(p, EMPTY), s, t),
                    )
                ]
            return []
        u, v = q.first, q.second
        t2 = ctx.fresh()
        return [
            branch(
                con("eq", y, u),
                con("eq", t, SetCons(Pair(x, v), t2)),
                con("comp", SetCons(p, EMPTY), s.rest, t2),
            ),
            branch(con("neq", y, u), con("comp", SetCons(p, EMPTY), s.rest, t)),
        ]
    if isinstance(t, EmptySet):
        return None  # {(x,y)} ; S = {} with S open: residual (y not in dom S)
    if isinstance(t, SetCons):
        w = t.element
        if not isinstance(w, Pair):
            return _force_pair("comp", args, 2, ctx) if isinstance(w, Var) else []
        z, s1, t2 = ctx.fresh(), ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", w, Pair(x, z)),
                con("eq", s, SetCons(Pair(y, z), s1)),
                con("comp", SetCons(p, EMPTY), s1, t2),
                con("eq", t, SetCons(w, t2)),
            )
        ]
    return None


def rule_ncomp(args, ctx: RuleCtx) -> List[Branch]:
    r, s, t = args
    n, z = ctx.fresh(), ctx.fresh()
    return [
        branch(con("comp", r, s, n), con("in", z, n), con("nin", z, t)),
        branch(con("comp", r, s, n), con("in", z, t), con("nin", z, n)),
    ]


# ---------------------------------------------------------------------------
# pfun


def rule_pfun(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    (f,) = args
    if isinstance(f, EmptySet):
        return [branch()]
    if isinstance(f, Var):
        return None
    if isinstance(f, Interval):
        return [branch(con("lt", f.hi, f.lo))]  # only the empty interval
    if isinstance(f, SetCons):
        p = f.element
        if not isinstance(p, Pair):
            return _force_pair("pfun", args, 0, ctx) if isinstance(p, Var) else []
        u, v = ctx.fresh(), ctx.fresh()
        from .terms import Atom, Or, Ris

        compat = Ris(
            Pair(u, v),
            f.rest,
            (),
            Or(
                Atom(con("neq", u, p.first)),
                Atom(con("eq", v, p.second)),
            ),
            Pair(u, v),
            None,
        )
        return [
            branch(con("pfun", f.rest), Constraint("foreach", (compat,)))
        ]
    return None


def rule_npfun(args, ctx: RuleCtx) -> List[Branch]:
    (f,) = args
    x, y1, y2, g = ctx.fresh(), ctx.fresh(), ctx.fresh(), ctx.fresh()
    return [
        branch(
            con("eq", f, SetCons(Pair(x, y1), SetCons(Pair(x, y2), g))),
            con("neq", y1, y2),
        )
    ]


# ---------------------------------------------------------------------------
# dom / ran


def rule_dom(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    f, d = args
    if isinstance(f, EmptySet):
        return [branch(con("eq", d, EMPTY))]
    if isinstance(d, EmptySet):
        return [branch(con("eq", f, EMPTY))]
    if isinstance(f, SetCons):
        p = f.element
        if not isinstance(p, Pair):
            return _force_pair("dom", args, 0, ctx) if isinstance(p, Var) else []
        d1 = ctx.fresh()
        return [branch(con("eq", d, SetCons(p.first, d1)), con("dom", f.rest, d1))]
    if isinstance(d, SetCons):
        x = d.element
        y, f1, d2 = ctx.fresh(), ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", f, SetCons(Pair(x, y), f1)),
                con("dom", f1, d2),
                con("eq", d, SetCons(x, d2)),
            )
        ]
    return None


def rule_ndom(args, ctx: RuleCtx) -> List[Branch]:
    f, d = args
    n, z = ctx.fresh(), ctx.fresh()
    return [
        branch(con("dom", f, n), con("in", z, n), con("nin", z, d)),
        branch(con("dom", f, n), con("in", z, d), con("nin", z, n)),
    ]


def rule_ran(args, ctx: RuleCtx) -> List[Branch]:
    r, a = args
    ri = ctx.fresh()
    return [branch(con("inv", r, ri), con("dom", ri, a))]


def rule_nran(args, ctx: RuleCtx) -> List[Branch]:
    r, a = args
    n, z = ctx.fresh(), ctx.fresh()
    return [
        branch(con("ran", r, n), con("in", z, n), con("nin", z, a)),
        branch(con("ran", r, n), con("in", z, a), con("nin", z, n)),
    ]


# ---------------------------------------------------------------------------
# Restrictions and overriding


def _restriction(d, r, s, ctx, name, rebuild, by_second) -> Optional[List[Branch]]:
    """Shared elementwise scheme for dres/rres/adres.

    ``rebuild(d, r, s)`` reconstructs the constraint in the tag's surface
    argument order; ``by_second`` selects which pair component is tested
    against d; dres/rres keep matching pairs, adres drops them.
    """
    keep_in = name in ("dres", "rres")
    if isinstance(r, EmptySet):
        return [branch(con("eq", s, EMPTY))]
    if isinstance(d, EmptySet):
        if keep_in:
            return [branch(con("eq", s, EMPTY))]
        return [branch(con("eq", s, r))]
    if isinstance(r, SetCons):
        p = r.element
        if not isinstance(p, Pair):
            if isinstance(p, Var):
                x, y = ctx.fresh(), ctx.fresh()
                return [branch(con("eq", p, Pair(x, y)), rebuild(d, r, s))]
            return []
        key = p.second if by_second else p.first
        s1 = ctx.fresh()
        inside = branch(
            con("in", key, d),
            *(
                [con("eq", s, SetCons(p, s1)), rebuild(d, r.rest, s1)]
                if keep_in
                else [rebuild(d, r.rest, s)]
            ),
        )
        outside = branch(
            con("nin", key, d),
            *(
                [rebuild(d, r.rest, s)]
                if keep_in
                else [con("eq", s, SetCons(p, s1)), rebuild(d, r.rest, s1)]
            ),
        )
        return [inside, outside]
    if isinstance(s, SetCons):
        q = s.element
        if not isinstance(q, Pair):
            if isinstance(q, Var):
                x, y = ctx.fresh(), ctx.fresh()
                return [branch(con("eq", q, Pair(x, y)), rebuild(d, r, s))]
            return []
        key = q.second if by_second else q.first
        r1, s2 = ctx.fresh(), ctx.fresh()
        member = con("in", key, d) if keep_in else con("nin", key, d)
        return [
            branch(
                member,
                con("eq", r, SetCons(q, r1)),
                rebuild(d, r1, s2),
                con("eq", s, SetCons(q, s2)),
            )
        ]
    return None


def rule_dres(args, ctx):
    d, r, s = args
    return _restriction(
        d, r, s, ctx, "dres",
        lambda d_, r_, s_: Constraint("dres", (d_, r_, s_)), False)


def rule_rres(args, ctx):
    r, d, s = args
    return _restriction(
        d, r, s, ctx, "rres",
        lambda d_, r_, s_: Constraint("rres", (r_, d_, s_)), True)


def rule_adres(args, ctx):
    d, r, s = args
    return _restriction(
        d, r, s, ctx, "adres",
        lambda d_, r_, s_: Constraint("adres", (d_, r_, s_)), False)


def rule_oplus(args, ctx: RuleCtx) -> List[Branch]:
    r, s, t = args
    d, r1 = ctx.fresh(), ctx.fresh()
    return [
        branch(
            con("dom", s, d),
            Constraint("adres", (d, r, r1)),
            con("un", r1, s, t),
        )
    ]


# ---------------------------------------------------------------------------
# Application


def rule_apply(args, ctx: RuleCtx) -> List[Branch]:
    f, x, y = args
    return [branch(con("in", Pair(x, y), f), con("pfun", f))]


def rule_napply(args, ctx: RuleCtx) -> List[Branch]:
    f, x, y = args
    return [
        branch(con("nin", Pair(x, y), f)),
        branch(con("npfun", f)),
    ]


def rule_applyTo(args, ctx: RuleCtx) -> List[Branch]:
    f, x, y = args
    g = ctx.fresh()
    return [
        branch(
            con("eq", f, SetCons(Pair(x, y), g)),
            con("nin", Pair(x, y), g),
            con("comp", SetCons(Pair(x, x), EMPTY), g, EMPTY),
        )
    ]
