"""Rewrite rules for restricted intensional sets and the foreach
(restricted universal quantification) constraint.

A RIS denotes the pattern instances of the filter-passing elements of its
domain.  Extensional domains are iterated element by element, splitting on
the filter and its negation; variable domains stay residual except where a
known member or a nonempty extensional right-hand side forces elements into
them.  Filters must sit inside the negatable fragment so the rule-level
negation is mechanical.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from .errors import NotNegatable
from .rulesbase import Branch, RuleCtx, branch, con, dnf, negated_branches
from .rules_interval import expand_interval
from .terms import (
    Atom,
    And,
    Call,
    Constraint,
    EMPTY,
    EmptySet,
    Formula,
    Interval,
    Or,
    Pair,
    Ris,
    SetCons,
    Term,
    TrueF,
    Var,
    apply_subst,
    control_vars,
    free_vars,
)

FUNCTIONAL_WHITELIST = {"apply", "applyTo", "aeq", "eq", "comp", "dom", "ran", "inv", "size", "min", "max"}


def ris_domain_kind(r: Ris) -> str:
    d = r.domain
    if isinstance(d, EmptySet):
        return "empty"
    if isinstance(d, SetCons):
        return "ext"
    if isinstance(d, Var):
        return "var"
    if isinstance(d, Interval):
        return "interval"
    if isinstance(d, Ris):
        return "ris"
    return "other"


def _normalize_domain(r: Ris, ctx) -> Optional[Ris]:
    """Expand ground interval domains; None when nothing applies."""
    if isinstance(r.domain, Interval):
        ext = expand_interval(r.domain, ctx.expand_limit)
        if ext is not None:
            return Ris(r.control, ext, r.existentials, r.filter, r.pattern, r.funpred)
    return None


def _with_domain(r: Ris, d: Term) -> Ris:
    return Ris(r.control, d, r.existentials, r.filter, r.pattern, r.funpred)


def ris_instance(r: Ris, ctx) -> Tuple[Term, Formula, Term, Optional[Formula]]:
    """Fresh copy of (control, filter, pattern, funpred) with bound names
    renamed apart."""
    ren = {}
    for name in control_vars(r.control):
        ren[name] = ctx.fresh()
    for v in r.existentials:
        ren.setdefault(v.name, ctx.fresh())
    ctrl = apply_subst(ren, r.control)
    flt = apply_subst(ren, r.filter)
    pat = apply_subst(ren, r.pattern)
    fp = None if r.funpred is None else apply_subst(ren, r.funpred)
    return ctrl, flt, pat, fp


def _pos_branches(flt: Formula, fp: Optional[Formula]) -> List[list]:
    """Constraint lists covering filter AND funpred."""
    f = flt if fp is None else And(flt, fp)
    return dnf(f)


def _neg_branches(flt: Formula, fp: Optional[Formula]) -> List[list]:
    """Constraint lists covering the element NOT contributing.

    With a functional predicate part the existentials are pinned by the
    funpred and the filter is negated under it (functional predicates are
    assumed defined on the iterated elements).
    """
    neg = negated_branches(flt)
    if fp is None:
        return neg
    base = dnf(fp)
    out = []
    for b in base:
        for n in neg:
            out.append(b + n)
    return out


# ---------------------------------------------------------------------------
# Equality with a RIS operand


def ris_eq(r: Ris, t: Term, ctx: RuleCtx) -> Optional[List[Branch]]:
    norm = _normalize_domain(r, ctx)
    if norm is not None:
        return [branch(con("eq", norm, t))]
    kind = ris_domain_kind(r)
    if kind == "empty":
        return [branch(con("eq", t, EMPTY))]
    if kind == "ext":
        d = r.domain.element
        rest = _with_domain(r, r.domain.rest)
        ctrl, flt, pat, fp = ris_instance(r, ctx)
        t2 = ctx.fresh()
        out = []
        for conj in _pos_branches(flt, fp):
            out.append(
                branch(
                    con("eq", ctrl, d),
                    *conj,
                    con("eq", t, SetCons(pat, t2)),
                    con("eq", rest, t2),
                )
            )
        for conj in _neg_branches(flt, fp):
            out.append(branch(con("eq", ctrl, d), *conj, con("eq", rest, t)))
        return out
    if kind == "var":
        if isinstance(t, SetCons):
            n1, d2 = ctx.fresh(), ctx.fresh()
            ctrl, flt, pat, fp = ris_instance(r, ctx)
            rest = _with_domain(r, d2)
            out = []
            for conj in _pos_branches(flt, fp):
                out.append(
                    branch(
                        con("eq", r.domain, SetCons(n1, d2)),
                        con("eq", ctrl, n1),
                        *conj,
                        con("eq", pat, t.element),
                        con("eq", rest, t.rest),
                    )
                )
            return out
        if isinstance(t, Interval):
            ext = expand_interval(t, ctx.expand_limit)
            if ext is not None:
                return [branch(con("eq", r, ext))]
        return None  # residual, e.g. ris(X in N, phi) = {}
    if kind == "ris":
        inner = r.domain
        if ris_domain_kind(inner) != "var":
            f = ctx.fresh()
            return [branch(con("eq", f, inner), con("eq", _with_domain(r, f), t))]
    return None


# ---------------------------------------------------------------------------
# Membership


def ris_in(y: Term, r: Ris, ctx: RuleCtx) -> Optional[List[Branch]]:
    norm = _normalize_domain(r, ctx)
    if norm is not None:
        return [branch(con("in", y, norm))]
    kind = ris_domain_kind(r)
    if kind == "empty":
        return []
    if kind == "ext":
        d = r.domain.element
        rest = _with_domain(r, r.domain.rest)
        ctrl, flt, pat, fp = ris_instance(r, ctx)
        out = []
        for conj in _pos_branches(flt, fp):
            out.append(branch(con("eq", ctrl, d), *conj, con("eq", y, pat)))
        out.append(branch(con("in", y, rest)))
        return out
    if kind == "var":
        n1, d2 = ctx.fresh(), ctx.fresh()
        ctrl, flt, pat, fp = ris_instance(r, ctx)
        out = []
        for conj in _pos_branches(flt, fp):
            out.append(
                branch(
                    con("eq", r.domain, SetCons(n1, d2)),
                    con("eq", ctrl, n1),
                    *conj,
                    con("eq", y, pat),
                )
            )
        return out
    return None


def ris_nin(y: Term, r: Ris, ctx: RuleCtx) -> Optional[List[Branch]]:
    norm = _normalize_domain(r, ctx)
    if norm is not None:
        return [branch(con("nin", y, norm))]
    kind = ris_domain_kind(r)
    if kind == "empty":
        return [branch()]
    if kind == "ext":
        d = r.domain.element
        rest = _with_domain(r, r.domain.rest)
        ctrl, flt, pat, fp = ris_instance(r, ctx)
        out = []
        for conj in _neg_branches(flt, fp):
            out.append(
                branch(con("eq", ctrl, d), *conj, con("nin", y, rest))
            )
        # Filter may hold while the pattern instance differs from y.
        for conj in _pos_branches(flt, fp):
            out.append(
                branch(
                    con("eq", ctrl, d),
                    *conj,
                    con("neq", y, pat),
                    con("nin", y, rest),
                )
            )
        return out
    return None  # variable domain: residual


# ---------------------------------------------------------------------------
# foreach (restricted universal quantification)


def rule_foreach(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    (r,) = args
    if not isinstance(r, Ris):
        return []
    norm = _normalize_domain(r, ctx)
    if norm is not None:
        return [branch(Constraint("foreach", (norm,)))]
    kind = ris_domain_kind(r)
    if kind == "empty":
        return [branch()]
    if kind == "ext":
        d = r.domain.element
        rest = _with_domain(r, r.domain.rest)
        ctrl, flt, pat, fp = ris_instance(r, ctx)
        out = []
        for conj in _pos_branches(flt, fp):
            out.append(
                branch(
                    con("eq", ctrl, d),
                    *conj,
                    Constraint("foreach", (rest,)),
                )
            )
        return out
    if kind == "ris":
        inner = r.domain
        if ris_domain_kind(inner) != "var":
            f = ctx.fresh()
            return [
                branch(
                    con("eq", f, inner),
                    Constraint("foreach", (_with_domain(r, f),)),
                )
            ]
    return None  # variable domain: residual


def expand_foreach_subset(r: Ris) -> Constraint:
    """The defining form: foreach(X in A, phi) == subset(A, ris(X in A, phi))."""
    return con("subset", r.domain, r)


# ---------------------------------------------------------------------------
# Well-formedness


def funpred_whitelisted(f: Optional[Formula]) -> bool:
    if f is None or isinstance(f, TrueF):
        return True
    if isinstance(f, Atom):
        return f.con.name in FUNCTIONAL_WHITELIST
    if isinstance(f, And):
        return funpred_whitelisted(f.left) and funpred_whitelisted(f.right)
    return False


def check_ris_wellformed(r: Ris):
    """Returns a list of (level, message); empty means ok.

    level is 'violation' or 'warning'.
    """
    report = []
    cvars = set(control_vars(r.control))
    if not cvars:
        report.append(("violation", "control pattern binds no variables"))
    pat_vars = free_vars(r.pattern)
    if cvars and not (cvars & pat_vars) and r.pattern != r.control:
        report.append(("warning", "pattern ignores the control variable"))
    exis = {v.name for v in r.existentials}
    if exis & cvars:
        report.append(("violation", "existentials shadow the control variable"))
    outer = (free_vars(r.filter) | pat_vars) - cvars - exis
    if outer:
        report.append(
            ("warning", "free parameters in filter/pattern: %s" % ", ".join(sorted(outer)))
        )
    try:
        negated_branches(r.filter)
    except NotNegatable:
        report.append(
            ("violation", "filter outside the negatable fragment")
        )
    if r.funpred is not None and not funpred_whitelisted(r.funpred):
        report.append(
            ("warning", "functional part not in the whitelist; treated as functional")
        )
    return report
