"""Printers for terms, constraints, formulas and answers.

The output is canonical concrete syntax: everything printed here reparses
to a structurally equal AST (the round-trip property the test suite
enforces).
"""

from __future__ import annotations

from .terms import (
    And,
    ArithOp,
    Atom,
    CP,
    Call,
    Constraint,
    EmptySet,
    FalseF,
    Formula,
    IntConst,
    Interval,
    Or,
    Pair,
    Ris,
    SetCons,
    Term,
    TrueF,
    UrAtom,
    Var,
    set_parts,
)

_INFIX = {
    "eq": "=",
    "aeq": "is",
    "neq": "neq",
    "aneq": "neq",
    "in": "in",
    "nin": "nin",
    "le": "=<",
    "lt": "<",
}

_ARITH_LEVEL = {"+": 1, "-": 1, "*": 2, "mod": 2, "neg": 3}


def _ident_atom(name: str) -> bool:
    return (
        name != ""
        and (name[0].islower())
        and all(c.isalnum() or c == "_" for c in name)
        and name not in ("or", "in", "nin", "neq", "is", "mod", "true", "false")
    )


def render_term(t: Term) -> str:
    return _term(t, 0)


def _term(t: Term, level: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, UrAtom):
        return t.name if _ident_atom(t.name) else "'%s'" % t.name
    if isinstance(t, IntConst):
        if t.value < 0 and level > 0:
            return "(%d)" % t.value
        return str(t.value)
    if isinstance(t, Pair):
        return "[%s,%s]" % (_term(t.first, 0), _term(t.second, 0))
    if isinstance(t, EmptySet):
        return "{}"
    if isinstance(t, SetCons):
        elems, tail = set_parts(t)
        body = ",".join(_term(e, 0) for e in elems)
        if isinstance(tail, EmptySet):
            return "{%s}" % body
        return "{%s/%s}" % (body, _term(tail, 0))
    if isinstance(t, Interval):
        return "int(%s,%s)" % (_term(t.lo, 0), _term(t.hi, 0))
    if isinstance(t, CP):
        return "cp(%s,%s)" % (_term(t.left, 0), _term(t.right, 0))
    if isinstance(t, Ris):
        return _ris(t)
    if isinstance(t, ArithOp):
        return _arith(t, level)
    raise TypeError("render_term: unexpected %r" % (t,))


def _arith(t: ArithOp, level: int) -> str:
    mylevel = _ARITH_LEVEL[t.op]
    if t.op == "neg":
        inner = _term(t.args[0], 3)
        s = "-%s" % inner
    else:
        a = _term(t.args[0], mylevel)
        b = _term(t.args[1], mylevel + 1)  # left-assoc: parenthesise right ties
        op = t.op if t.op != "mod" else "mod"
        s = "%s %s %s" % (a, op, b)
    if mylevel < level:
        return "(%s)" % s
    return s


def _ris(t: Ris) -> str:
    head = "%s in %s" % (_term(t.control, 0), _term(t.domain, 0))
    flt = render_formula(t.filter)
    if t.existentials or t.funpred is not None:
        exis = "[%s]" % ",".join(v.name for v in t.existentials)
        fp = render_formula(t.funpred) if t.funpred is not None else "true"
        if t.pattern == t.control:
            return "ris(%s,%s,%s,%s)" % (head, exis, flt, fp)
        return "ris(%s,%s,%s,%s,%s)" % (head, exis, flt, _term(t.pattern, 0), fp)
    if t.pattern == t.control:
        if isinstance(t.filter, TrueF):
            return "ris(%s)" % head
        return "ris(%s,%s)" % (head, flt)
    return "ris(%s,%s,%s)" % (head, flt, _term(t.pattern, 0))


def render_constraint(c: Constraint) -> str:
    name = c.name
    if name == "size_r":
        name = "size"
    if name in _INFIX and len(c.args) == 2:
        a, b = c.args
        return "%s %s %s" % (_term(a, 1), _INFIX[name], _term(b, 1))
    if name == "foreach" and len(c.args) == 1 and isinstance(c.args[0], Ris):
        r = c.args[0]
        head = "%s in %s" % (_term(r.control, 0), _term(r.domain, 0))
        if r.existentials or r.funpred is not None:
            fp = render_formula(r.funpred) if r.funpred is not None else "true"
            return "foreach(%s,[%s],%s,%s)" % (
                head,
                ",".join(v.name for v in r.existentials),
                render_formula(r.filter),
                fp,
            )
        if isinstance(r.filter, TrueF):
            return "foreach(%s)" % head
        return "foreach(%s,%s)" % (head, render_formula(r.filter))
    return "%s(%s)" % (name, ",".join(_term(a, 0) for a in c.args))


def render_formula(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return render_constraint(f.con)
    if isinstance(f, Call):
        if not f.args:
            return f.name
        return "%s(%s)" % (f.name, ",".join(_term(a, 0) for a in f.args))
    if isinstance(f, And):
        return "%s & %s" % (_conj_part(f.left), _conj_part(f.right))
    if isinstance(f, Or):
        return "%s or %s" % (render_formula(f.left), render_formula(f.right))
    raise TypeError("render_formula: unexpected %r" % (f,))


def _conj_part(f: Formula) -> str:
    if isinstance(f, Or):
        return "(%s)" % render_formula(f)
    return render_formula(f)


def render_clause(name, params, body) -> str:
    head = name if not params else "%s(%s)" % (name, ",".join(_term(p, 0) for p in params))
    if isinstance(body, TrueF):
        return head + "."
    return "%s :- %s." % (head, render_formula(body))


def render_answer(answer) -> str:
    """Two-part answer text: bindings, then residual constraints."""
    lines = ["%s = %s" % (v, render_term(t)) for v, t in answer.bindings]
    text = ",\n".join(lines) if lines else "true"
    if answer.residual:
        text += "\nConstraint: " + ", ".join(
            render_constraint(c) for c in answer.residual
        )
    return text


def answer_json(answer, status="sat"):
    return {
        "bindings": [
            {"var": v, "term": render_term(t)} for v, t in answer.bindings
        ],
        "constraints": [render_constraint(c) for c in answer.residual],
        "status": status,
    }
