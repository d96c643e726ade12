"""Core rewrite rules: equality (set unification), membership, union,
disjointness, subset/intersection/difference, cardinality and arithmetic
relations.

Set unification follows the four-alternative scheme for {s/A} = {t/B} plus
the tail-variable trick replacing X = {t1..tn/X} by X = {t1..tn/N}.  The
rules never bind variables directly; they emit eq constraints and let the
equality rule perform bindings, keeping occur checks in one place.
"""

from __future__ import annotations

from typing import List, Optional

from .errors import UnsupportedConstraint, UnsupportedNonlinear
from .lia import eval_arith, ground_arith, linearize
from .rulesbase import Branch, RuleCtx, branch, con
from .rules_interval import (
    disj_intervals,
    eq_with_interval,
    expand_interval,
    member_of_interval,
    not_member_of_interval,
    size_of_interval,
)
from .terms import (
    ArithOp,
    CP,
    Constraint,
    EMPTY,
    EmptySet,
    IntConst,
    Interval,
    Pair,
    Ris,
    SetCons,
    Term,
    UrAtom,
    Var,
    free_vars,
    mk_set,
    set_parts,
)

SET_CLASSES = (EmptySet, SetCons, Interval, Ris, CP)
RIGID_NONSET = (UrAtom, IntConst, Pair)


def is_set_class(t: Term) -> bool:
    return isinstance(t, SET_CLASSES)


def structurally_contains(name: str, t: Term) -> bool:
    """True when Var(name) occurs under set/pair constructors of t, i.e. a
    membership t in Var(name) is impossible by rank."""
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, SetCons):
        return structurally_contains(name, t.element) or structurally_contains(
            name, t.rest
        )
    if isinstance(t, Pair):
        return structurally_contains(name, t.first) or structurally_contains(
            name, t.second
        )
    if isinstance(t, CP):
        return structurally_contains(name, t.left) or structurally_contains(
            name, t.right
        )
    return False


def _tail_var_elems(x: Var, t: Term):
    """For X = {t1..tn/X} return the element list, else None."""
    if not isinstance(t, SetCons):
        return None
    elems, tail = set_parts(t)
    if isinstance(tail, Var) and tail.name == x.name:
        if any(x.name in free_vars(e) for e in elems):
            return None
        return elems
    return None


# ---------------------------------------------------------------------------
# Equality


def rule_eq(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b = args
    if a == b:
        return [branch()]
    if isinstance(a, Var) or isinstance(b, Var):
        return _eq_var(a, b, ctx)
    if isinstance(a, UrAtom) or isinstance(b, UrAtom):
        return []  # distinct atoms or atom vs non-atom
    if isinstance(a, IntConst) or isinstance(b, IntConst):
        return []  # distinct integers or sort clash
    if isinstance(a, Pair) and isinstance(b, Pair):
        return [branch(con("eq", a.first, b.first), con("eq", a.second, b.second))]
    if isinstance(a, Pair) or isinstance(b, Pair):
        return []
    # Both are set-sorted now.
    if isinstance(a, Ris) or isinstance(b, Ris):
        from .rules_ris import ris_eq

        if isinstance(a, Ris) and not isinstance(b, Ris):
            return ris_eq(a, b, ctx)
        if isinstance(b, Ris) and not isinstance(a, Ris):
            return ris_eq(b, a, ctx)
        return _eq_ris_ris(a, b, ctx)
    if isinstance(a, Interval) or isinstance(b, Interval):
        if isinstance(b, Interval):
            a, b = b, a
        # a is the interval
        return eq_with_interval(b, a, ctx)
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        if isinstance(b, EmptySet):
            a, b = b, a
        # a == {}
        if isinstance(b, SetCons):
            return []
        if isinstance(b, CP):
            return [branch(con("eq", b.left, EMPTY)), branch(con("eq", b.right, EMPTY))]
        return []
    if isinstance(a, CP) or isinstance(b, CP):
        if isinstance(b, CP) and not isinstance(a, CP):
            a, b = b, a
        return _eq_cp(a, b, ctx)
    # SetCons vs SetCons: the four-way set unification step.
    s, arest = a.element, a.rest
    t, brest = b.element, b.rest
    n = ctx.fresh()
    return [
        branch(con("eq", s, t), con("eq", arest, brest)),
        branch(con("eq", s, t), con("eq", a, brest)),
        branch(con("eq", s, t), con("eq", arest, b)),
        branch(
            con("eq", arest, SetCons(t, n)),
            con("eq", brest, SetCons(s, n)),
        ),
    ]


def _eq_var(a, b, ctx) -> List[Branch]:
    if isinstance(a, Var) and isinstance(b, Var):
        # Prefer keeping input-formula variables free-standing for display.
        if a.name in ctx.input_vars and b.name not in ctx.input_vars:
            return [branch(bind=[(b.name, a)])]
        return [branch(bind=[(a.name, b)])]
    if isinstance(b, Var):
        a, b = b, a
    # a is the variable
    elems = _tail_var_elems(a, b)
    if elems is not None:
        n = ctx.fresh()
        return [branch(con("eq", a, mk_set(elems, n)))]
    if isinstance(b, Ris):
        from .rules_ris import ris_eq, ris_domain_kind

        if ris_domain_kind(b) != "var":
            return ris_eq(b, a, ctx)
    if a.name in free_vars(b):
        return []  # occurs check: no finite tree/set satisfies it
    return [branch(bind=[(a.name, b)])]


def _eq_cp(a: CP, b: Term, ctx) -> List[Branch]:
    if isinstance(b, CP):
        return [
            branch(con("eq", a.left, b.left), con("eq", a.right, b.right)),
            branch(
                con("eq", a.left, EMPTY),
                con("eq", b.left, EMPTY),
            ),
            branch(
                con("eq", a.left, EMPTY),
                con("eq", b.right, EMPTY),
            ),
            branch(
                con("eq", a.right, EMPTY),
                con("eq", b.left, EMPTY),
            ),
            branch(
                con("eq", a.right, EMPTY),
                con("eq", b.right, EMPTY),
            ),
        ]
    ext = _cp_expand(a, ctx)
    if ext is not None:
        return [branch(con("eq", ext, b))]
    if isinstance(b, SetCons):
        # Match one pair of the product, recurse on the rest.
        x, y = ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", b.element, Pair(x, y)),
                con("in", x, a.left),
                con("in", y, a.right),
                con("subset", b.rest, a),
                con("subset", a, b),
            )
        ]
    return []


def _cp_expand(a: CP, ctx) -> Optional[Term]:
    lelems, ltail = set_parts(a.left)
    relems, rtail = set_parts(a.right)
    if isinstance(ltail, EmptySet) and isinstance(rtail, EmptySet):
        if len(lelems) * len(relems) <= ctx.expand_limit:
            pairs = [Pair(x, y) for x in lelems for y in relems]
            return mk_set(pairs, EMPTY)
    return None


def _eq_ris_ris(a: Ris, b: Ris, ctx) -> Optional[List[Branch]]:
    from .rules_ris import ris_domain_kind, ris_eq

    if ris_domain_kind(a) != "var":
        return ris_eq(a, b, ctx)
    if ris_domain_kind(b) != "var":
        return ris_eq(b, a, ctx)
    return None  # residual: both domains open


# ---------------------------------------------------------------------------
# Disequality


def rule_neq(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b = args
    if a == b:
        return []
    if isinstance(a, Var) or isinstance(b, Var):
        return None  # residual; the decision stage covers set-sorted cases
    if isinstance(a, Pair) and isinstance(b, Pair):
        return [
            branch(con("neq", a.first, b.first)),
            branch(con("neq", a.second, b.second)),
        ]
    if is_set_class(a) and is_set_class(b):
        if isinstance(a, Interval) and isinstance(b, EmptySet):
            return [branch(con("le", a.lo, a.hi))]
        if isinstance(b, Interval) and isinstance(a, EmptySet):
            return [branch(con("le", b.lo, b.hi))]
        if isinstance(a, SetCons) and isinstance(b, EmptySet):
            return [branch()]
        if isinstance(b, SetCons) and isinstance(a, EmptySet):
            return [branch()]
        z = ctx.fresh()
        return [
            branch(con("in", z, a), con("nin", z, b)),
            branch(con("in", z, b), con("nin", z, a)),
        ]
    # Distinct rigid constructors (atom vs int vs pair vs set): true.
    return [branch()]


# ---------------------------------------------------------------------------
# Membership


def rule_in(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    x, s = args
    if isinstance(s, EmptySet):
        return []
    if isinstance(s, SetCons):
        return [branch(con("eq", x, s.element)), branch(con("in", x, s.rest))]
    if isinstance(s, Var):
        if structurally_contains(s.name, x):
            return []  # rank: no set contains a term built from itself
        n = ctx.fresh()
        return [branch(con("eq", s, SetCons(x, n)))]
    if isinstance(s, Interval):
        return [branch(*member_of_interval(x, s))]
    if isinstance(s, Ris):
        from .rules_ris import ris_in

        return ris_in(x, s, ctx)
    if isinstance(s, CP):
        u, v = ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", x, Pair(u, v)),
                con("in", u, s.left),
                con("in", v, s.right),
            )
        ]
    return []  # membership in a non-set is false


def rule_nin(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    x, s = args
    if isinstance(s, EmptySet):
        return [branch()]
    if isinstance(s, SetCons):
        return [branch(con("neq", x, s.element), con("nin", x, s.rest))]
    if isinstance(s, Var):
        if structurally_contains(s.name, x):
            return [branch()]
        return None  # residual
    if isinstance(s, Interval):
        return not_member_of_interval(x, s)
    if isinstance(s, Ris):
        from .rules_ris import ris_nin

        return ris_nin(x, s, ctx)
    if isinstance(s, CP):
        u, v = ctx.fresh(), ctx.fresh()
        branches = [
            branch(con("eq", x, Pair(u, v)), con("nin", u, s.left)),
            branch(con("eq", x, Pair(u, v)), con("nin", v, s.right)),
        ]
        if not isinstance(x, (Pair, Var)):
            return [branch()]  # a non-pair is never in a product
        return branches
    return [branch()]


# ---------------------------------------------------------------------------
# Union


def _evaluable_operand(t: Term, ctx) -> Optional[Term]:
    """Rewrite interval/ris/cp operands into extensional form when ground."""
    if isinstance(t, Interval):
        return expand_interval(t, ctx.expand_limit)
    if isinstance(t, CP):
        return _cp_expand(t, ctx)
    return None


def rule_un(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b, c = args
    if isinstance(a, EmptySet):
        return [branch(con("eq", b, c))]
    if isinstance(b, EmptySet):
        return [branch(con("eq", a, c))]
    if isinstance(c, EmptySet):
        return [branch(con("eq", a, EMPTY), con("eq", b, EMPTY))]
    if a == b:
        return [branch(con("eq", c, a))]
    for t, repl_pos in ((a, 0), (b, 1), (c, 2)):
        ext = _evaluable_operand(t, ctx)
        if ext is not None:
            new = [a, b, c]
            new[repl_pos] = ext
            return [branch(con("un", *new))]
    if c == a:
        return _un_subset_shape(b, a, ctx)  # b subset of a
    if c == b:
        return _un_subset_shape(a, b, ctx)
    if isinstance(c, Var):
        if isinstance(a, SetCons):
            c1 = ctx.fresh()
            return [branch(con("eq", c, SetCons(a.element, c1)), con("un", a.rest, b, c1))]
        if isinstance(b, SetCons):
            c1 = ctx.fresh()
            return [branch(con("eq", c, SetCons(b.element, c1)), con("un", a, b.rest, c1))]
        if isinstance(a, Ris) or isinstance(b, Ris):
            return _un_force_ris(a, b, c, ctx)
        return None  # un over variables: solved form
    if isinstance(c, SetCons):
        t, c1 = c.element, c.rest
        n1, n2 = ctx.fresh(), ctx.fresh()
        return [
            branch(con("eq", a, SetCons(t, n1)), con("un", n1, b, c1)),
            branch(con("eq", b, SetCons(t, n1)), con("un", a, n1, c1)),
            branch(
                con("eq", a, SetCons(t, n1)),
                con("eq", b, SetCons(t, n2)),
                con("un", n1, n2, c1),
            ),
        ]
    if isinstance(c, Interval):
        cf = ctx.fresh()
        from .rules_interval import interval_eq_constraints

        empty = branch(
            con("lt", c.hi, c.lo), con("eq", a, EMPTY), con("eq", b, EMPTY)
        )
        nonempty = branch(con("un", a, b, cf), *interval_eq_constraints(cf, c, ctx))
        return [nonempty, empty]
    if isinstance(c, Ris) or isinstance(c, CP):
        return None
    return None


def _un_subset_shape(sub: Term, sup: Term, ctx) -> Optional[List[Branch]]:
    # un(sub, sup, sup) or un(sup, sub, sup): means sub subset of sup
    if isinstance(sub, EmptySet):
        return [branch()]
    if isinstance(sub, SetCons):
        return [
            branch(con("in", sub.element, sup), con("un", sub.rest, sup, sup))
        ]
    return None


def _un_force_ris(a, b, c, ctx) -> Optional[List[Branch]]:
    from .rules_ris import ris_domain_kind

    for t in (a, b):
        if isinstance(t, Ris) and ris_domain_kind(t) != "var":
            f = ctx.fresh()
            others = b if t is a else a
            new = (f, others, c) if t is a else (a, f, c)
            return [branch(con("eq", f, t), con("un", *new))]
    return None


def rule_nun(args, ctx: RuleCtx) -> List[Branch]:
    a, b, c = args
    z = ctx.fresh()
    return [
        branch(con("in", z, c), con("nin", z, a), con("nin", z, b)),
        branch(con("in", z, a), con("nin", z, c)),
        branch(con("in", z, b), con("nin", z, c)),
    ]


# ---------------------------------------------------------------------------
# Disjointness


def rule_disj(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b = args
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        return [branch()]
    if a == b:
        return [branch(con("eq", a, EMPTY))]
    if isinstance(a, SetCons):
        return [branch(con("nin", a.element, b), con("disj", a.rest, b))]
    if isinstance(b, SetCons):
        return [branch(con("nin", b.element, a), con("disj", a, b.rest))]
    if isinstance(a, Interval) and isinstance(b, Interval):
        return disj_intervals(a, b)
    for t, other, first in ((a, b, True), (b, a, False)):
        ext = _evaluable_operand(t, ctx)
        if ext is not None:
            pair = (ext, other) if first else (other, ext)
            return [branch(con("disj", *pair))]
    return None


def rule_ndisj(args, ctx: RuleCtx) -> List[Branch]:
    a, b = args
    z = ctx.fresh()
    return [branch(con("in", z, a), con("in", z, b))]


# ---------------------------------------------------------------------------
# Subset, intersection, difference


def rule_subset(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b = args
    if isinstance(a, EmptySet) or a == b:
        return [branch()]
    if isinstance(b, EmptySet):
        return [branch(con("eq", a, EMPTY))]
    if isinstance(a, SetCons):
        return [branch(con("in", a.element, b), con("subset", a.rest, b))]
    ext = _evaluable_operand(a, ctx)
    if ext is not None:
        return [branch(con("subset", ext, b))]
    if isinstance(a, Ris):
        from .rules_ris import ris_domain_kind

        if ris_domain_kind(a) != "var":
            f = ctx.fresh()
            return [branch(con("eq", f, a), con("subset", f, b))]
    # subset(Var, int(...)) is the decidable workhorse: residual, decided
    # by the cardinality stage.
    return None


def rule_nsubset(args, ctx: RuleCtx) -> List[Branch]:
    a, b = args
    z = ctx.fresh()
    return [branch(con("in", z, a), con("nin", z, b))]


def rule_inters(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b, c = args
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        return [branch(con("eq", c, EMPTY))]
    if a == b:
        return [branch(con("eq", c, a))]
    if isinstance(c, EmptySet):
        return [branch(con("disj", a, b))]
    for t in (a, b, c):
        ext = _evaluable_operand(t, ctx)
        if ext is not None:
            new = [x if x is not t else ext for x in (a, b, c)]
            return [branch(con("inters", *new))]
    if isinstance(a, SetCons) or isinstance(b, SetCons):
        if not isinstance(a, SetCons):
            a, b = b, a
        t, arest = a.element, a.rest
        c1 = ctx.fresh()
        return [
            branch(
                con("in", t, b),
                con("eq", c, SetCons(t, c1)),
                con("inters", arest, b, c1),
            ),
            branch(con("nin", t, b), con("inters", arest, b, c)),
        ]
    if isinstance(c, SetCons):
        t, crest = c.element, c.rest
        a1, b1, c2 = ctx.fresh(), ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", a, SetCons(t, a1)),
                con("eq", b, SetCons(t, b1)),
                con("inters", a1, b1, c2),
                con("eq", c, SetCons(t, c2)),
            )
        ]
    return None


def rule_diff(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    a, b, c = args
    if isinstance(a, EmptySet):
        return [branch(con("eq", c, EMPTY))]
    if isinstance(b, EmptySet):
        return [branch(con("eq", c, a))]
    if a == b:
        return [branch(con("eq", c, EMPTY))]
    if isinstance(c, EmptySet):
        return [branch(con("subset", a, b))]
    for t in (a, b, c):
        ext = _evaluable_operand(t, ctx)
        if ext is not None:
            new = [x if x is not t else ext for x in (a, b, c)]
            return [branch(con("diff", *new))]
    if isinstance(a, SetCons):
        t, arest = a.element, a.rest
        c1 = ctx.fresh()
        return [
            branch(con("in", t, b), con("diff", arest, b, c)),
            branch(
                con("nin", t, b),
                con("eq", c, SetCons(t, c1)),
                con("diff", arest, b, c1),
            ),
        ]
    if isinstance(c, SetCons):
        t, crest = c.element, c.rest
        a1, c2 = ctx.fresh(), ctx.fresh()
        return [
            branch(
                con("eq", a, SetCons(t, a1)),
                con("nin", t, b),
                con("diff", a1, b, c2),
                con("eq", c, SetCons(t, c2)),
            )
        ]
    return None


# ---------------------------------------------------------------------------
# Cardinality


_SIZE_EXPAND_LIMIT = 64


def rule_size(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    s, n = args
    if isinstance(s, EmptySet):
        return [branch(con("aeq", n, IntConst(0)))]
    if isinstance(s, SetCons):
        m = ctx.fresh()
        return [
            branch(con("in", s.element, s.rest), con("size", s.rest, n)),
            branch(
                con("nin", s.element, s.rest),
                con("size", s.rest, m),
                con("aeq", n, ArithOp("+", (m, IntConst(1)))),
            ),
        ]
    if isinstance(s, Interval):
        return size_of_interval(s, n)
    if isinstance(s, Var):
        if isinstance(n, IntConst):
            k = n.value
            if k < 0:
                return []
            if k == 0:
                return [branch(con("eq", s, EMPTY))]
            if k <= _SIZE_EXPAND_LIMIT:
                xs = [ctx.fresh() for _ in range(k)]
                cons = [con("eq", s, mk_set(xs, EMPTY))]
                for i in range(k):
                    for j in range(i + 1, k):
                        cons.append(con("neq", xs[i], xs[j]))
                return [branch(*cons)]
            raise UnsupportedConstraint(
                "cardinality %d too large to expand" % k
            )
        return [
            branch(
                Constraint("size_r", (s, n)),
                con("le", IntConst(0), n),
            )
        ]
    if isinstance(s, CP):
        ext = _cp_expand(s, ctx)
        if ext is not None:
            return [branch(con("size", ext, n))]
        return None
    raise UnsupportedConstraint("cardinality of intensional sets is out of scope")


def rule_size_r(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    s, n = args
    if not isinstance(s, Var):
        return [branch(con("size", s, n))]
    if isinstance(n, IntConst):
        return [branch(con("size", s, n))]
    return None


def rule_nsize(args, ctx: RuleCtx) -> List[Branch]:
    s, n = args
    m = ctx.fresh()
    return [branch(con("size", s, m), con("aneq", m, n))]


# ---------------------------------------------------------------------------
# Integer sort and arithmetic relations


def rule_integer(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    (x,) = args
    if isinstance(x, IntConst):
        return [branch()]
    if isinstance(x, ArithOp):
        return [branch(*[con("integer", a) for a in x.args])]
    if isinstance(x, Var):
        return None
    return []


def rule_ninteger(args, ctx: RuleCtx) -> Optional[List[Branch]]:
    (x,) = args
    if isinstance(x, (IntConst, ArithOp)):
        return []
    if isinstance(x, Var):
        return None
    return [branch()]


def _has_nonint_rigid(t: Term) -> bool:
    if isinstance(t, (UrAtom, Pair) + SET_CLASSES):
        return True
    if isinstance(t, ArithOp):
        return any(_has_nonint_rigid(a) for a in t.args)
    return False


def _arith_rel(a, b, op, ctx) -> Optional[List[Branch]]:
    if _has_nonint_rigid(a) or _has_nonint_rigid(b):
        # Only integers are ordered / arithmetically comparable.
        return [] if op != "aneq" else [branch()]
    if ground_arith(a) and ground_arith(b):
        va, vb = eval_arith(a), eval_arith(b)
        ok = {
            "le": va <= vb,
            "lt": va < vb,
            "aeq": va == vb,
            "aneq": va != vb,
        }[op]
        return [branch()] if ok else []
    if op == "aeq":
        if isinstance(a, Var) and ground_arith(b):
            return [branch(con("eq", a, IntConst(eval_arith(b))))]
        if isinstance(b, Var) and ground_arith(a):
            return [branch(con("eq", b, IntConst(eval_arith(a))))]
        try:
            expr = linearize(a).sub(linearize(b))
        except UnsupportedNonlinear:
            return None  # delayed (e.g. mod over unbound operands)
        if len(expr.coeffs) == 1:
            (v, k), = expr.coeffs
            if expr.const % k == 0:
                return [branch(con("eq", Var(v), IntConst(-expr.const // k)))]
            return []
        return None  # linear residue for the decision stage
    return None


def rule_le(args, ctx):
    return _arith_rel(args[0], args[1], "le", ctx)


def rule_lt(args, ctx):
    return _arith_rel(args[0], args[1], "lt", ctx)


def rule_aeq(args, ctx):
    return _arith_rel(args[0], args[1], "aeq", ctx)


def rule_aneq(args, ctx):
    return _arith_rel(args[0], args[1], "aneq", ctx)
