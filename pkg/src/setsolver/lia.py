"""Linear integer arithmetic: expressions, evaluation and a decision procedure.

The decider is a complete QFLIA feasibility/optimisation routine: an exact
rational simplex (Fractions, Bland's rule) wrapped in branch-and-bound.
Disequalities are handled by two-way case splits.  When a branch-and-bound
dive gets suspiciously deep, explicit box bounds derived from the constraint
coefficients are added so the search provably terminates; if a feasible
point exists at all, one exists inside that box.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .errors import UnboundArithmetic, UnsupportedNonlinear, SolverError
from .terms import ArithOp, IntConst, Term, Var

# ---------------------------------------------------------------------------
# Linear expressions


@dataclass(frozen=True)
class LinExpr:
    """const + sum(coeffs[v] * v); zero coefficients are never stored."""

    coeffs: Tuple[Tuple[str, int], ...]
    const: int

    @staticmethod
    def of(const=0, **coeffs) -> "LinExpr":
        return LinExpr.make(coeffs, const)

    @staticmethod
    def make(coeffs: Dict[str, int], const: int) -> "LinExpr":
        items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
        return LinExpr(items, const)

    def as_dict(self) -> Dict[str, int]:
        return dict(self.coeffs)

    def add(self, other: "LinExpr") -> "LinExpr":
        d = self.as_dict()
        for v, c in other.coeffs:
            d[v] = d.get(v, 0) + c
        return LinExpr.make(d, self.const + other.const)

    def scale(self, k: int) -> "LinExpr":
        return LinExpr.make({v: c * k for v, c in self.coeffs}, self.const * k)

    def sub(self, other: "LinExpr") -> "LinExpr":
        return self.add(other.scale(-1))

    def shift(self, k: int) -> "LinExpr":
        return LinExpr(self.coeffs, self.const + k)

    def is_const(self) -> bool:
        return not self.coeffs

    def variables(self):
        return [v for v, _ in self.coeffs]

    def eval(self, model: Dict[str, int]) -> int:
        return self.const + sum(c * model[v] for v, c in self.coeffs)


@dataclass(frozen=True)
class LinConstraint:
    """expr REL 0 with REL one of '<=', '==', '!='."""

    expr: LinExpr
    rel: str


def linearize(t: Term) -> LinExpr:
    """Turn an arithmetic term into a LinExpr; nonlinear parts are rejected."""
    if isinstance(t, IntConst):
        return LinExpr((), t.value)
    if isinstance(t, Var):
        return LinExpr(((t.name, 1),), 0)
    if isinstance(t, ArithOp):
        if t.op == "+":
            return linearize(t.args[0]).add(linearize(t.args[1]))
        if t.op == "-":
            return linearize(t.args[0]).sub(linearize(t.args[1]))
        if t.op == "neg":
            return linearize(t.args[0]).scale(-1)
        if t.op == "*":
            a = linearize(t.args[0])
            b = linearize(t.args[1])
            if a.is_const():
                return b.scale(a.const)
            if b.is_const():
                return a.scale(b.const)
            raise UnsupportedNonlinear("product of non-constant expressions")
        if t.op == "mod":
            raise UnsupportedNonlinear("mod with unbound operands")
    raise UnsupportedNonlinear("not an integer expression: %r" % (t,))


def eval_arith(t: Term) -> int:
    """Evaluate a ground arithmetic term.

    mod follows the nonnegative-remainder convention for positive moduli,
    so (-2) mod 2 = 0.
    """
    if isinstance(t, IntConst):
        return t.value
    if isinstance(t, Var):
        raise UnboundArithmetic("unbound variable %s in arithmetic" % t.name)
    if isinstance(t, ArithOp):
        vals = [eval_arith(a) for a in t.args]
        if t.op == "+":
            return vals[0] + vals[1]
        if t.op == "-":
            return vals[0] - vals[1]
        if t.op == "neg":
            return -vals[0]
        if t.op == "*":
            return vals[0] * vals[1]
        if t.op == "mod":
            if vals[1] == 0:
                raise ZeroDivisionError("modulo by zero")
            return vals[0] % vals[1]
    raise UnboundArithmetic("not an integer expression: %r" % (t,))


def is_arith_term(t: Term) -> bool:
    return isinstance(t, (IntConst, ArithOp)) or isinstance(t, Var)


def ground_arith(t: Term) -> bool:
    if isinstance(t, IntConst):
        return True
    if isinstance(t, ArithOp):
        return all(ground_arith(a) for a in t.args)
    return False


# ---------------------------------------------------------------------------
# Exact simplex (minimise c.x  s.t.  A x <= / == b, x >= 0)

_INFEASIBLE = "infeasible"
_UNBOUNDED = "unbounded"


def _simplex(ncols: int, rows, objective) -> Tuple[str, Optional[List[Fraction]], Optional[Fraction]]:
    """Dense two-phase tableau simplex with Bland's rule.

    rows: list of (coeff list length ncols, rel, rhs) with rel '<=' or '=='.
    Returns (status, values, objective_value).
    """
    # Build slack/artificial augmented tableau.
    m = len(rows)
    slack_cols = []
    art_cols = []
    total = ncols
    body: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for coeffs, rel, b in rows:
        row = [Fraction(c) for c in coeffs]
        b = Fraction(b)
        if rel == "<=":
            slack_cols.append(total)
            total += 1
        elif rel != "==":
            raise ValueError("bad relation %r" % rel)
        body.append(row)
        rhs.append(b)
    # Normalise negative rhs so artificials start feasible.
    tab: List[List[Fraction]] = []
    si = 0
    for i, (coeffs, rel, b) in enumerate(rows):
        row = body[i] + [Fraction(0)] * (total - ncols)
        if rel == "<=":
            row[slack_cols[si]] = Fraction(1)
            si += 1
        if rhs[i] < 0:
            row = [-c for c in row]
            rhs[i] = -rhs[i]
        tab.append(row)
    # Basis: slack where possible (slack coefficient +1 after sign flip),
    # otherwise an artificial variable.
    basis: List[int] = []
    si = 0
    for i, (coeffs, rel, b) in enumerate(rows):
        col = None
        if rel == "<=" and tab[i][slack_cols[si]] == 1:
            col = slack_cols[si]
        if rel == "<=":
            si += 1
        if col is None:
            col = total + len(art_cols)
            art_cols.append(col)
        basis.append(col)
    nart = len(art_cols)
    width = total + nart
    for i in range(m):
        tab[i].extend([Fraction(0)] * nart)
        if basis[i] >= total:
            tab[i][basis[i]] = Fraction(1)

    def pivot(r, c):
        p = tab[r][c]
        tab[r] = [x / p for x in tab[r]]
        rhs[r] /= p
        for i in range(m):
            if i != r and tab[i][c] != 0:
                f = tab[i][c]
                tab[i] = [a - f * b for a, b in zip(tab[i], tab[r])]
                rhs[i] -= f * rhs[r]
        basis[r] = c

    def run(cost: List[Fraction], banned=frozenset()) -> Tuple[str, Fraction]:
        # Reduced-cost simplex loop; Bland's rule guarantees termination.
        z = [Fraction(0)] * width
        zc = Fraction(0)
        for i in range(m):
            b = basis[i]
            if cost[b] != 0:
                f = cost[b]
                for j in range(width):
                    z[j] += f * tab[i][j]
                zc += f * rhs[i]
        red = [cost[j] - z[j] for j in range(width)]
        while True:
            enter = -1
            for j in range(width):
                if j not in banned and red[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal", zc
            leave = -1
            best = None
            for i in range(m):
                if tab[i][enter] > 0:
                    ratio = rhs[i] / tab[i][enter]
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                return "unbounded", zc
            pivot(leave, enter)
            # Update reduced costs from scratch on the pivot column basis
            # change (dense recompute keeps the code simple and exact).
            z = [Fraction(0)] * width
            zc = Fraction(0)
            for i in range(m):
                b = basis[i]
                if cost[b] != 0:
                    f = cost[b]
                    for j in range(width):
                        z[j] += f * tab[i][j]
                    zc += f * rhs[i]
            red = [cost[j] - z[j] for j in range(width)]

    if nart:
        p1 = [Fraction(0)] * width
        for c in art_cols:
            p1[c] = Fraction(1)
        status, val = run(p1)
        if val > 0:
            return _INFEASIBLE, None, None
        # Drive leftover artificials out of the basis when possible.
        for i in range(m):
            if basis[i] >= total:
                for j in range(total):
                    if tab[i][j] != 0:
                        pivot(i, j)
                        break
    cost = [Fraction(0)] * width
    for j, c in enumerate(objective):
        cost[j] = Fraction(c)
    status, val = run(cost, banned=frozenset(art_cols))
    if status == "unbounded":
        return _UNBOUNDED, None, None
    values = [Fraction(0)] * ncols
    for i in range(m):
        if basis[i] < ncols:
            values[basis[i]] = rhs[i]
    return "optimal", values, val


class _LpProblem:
    """Free integer variables mapped onto nonnegative column pairs."""

    def __init__(self, constraints: Iterable[LinConstraint]):
        self.cons = list(constraints)
        names = []
        seen = set()
        for c in self.cons:
            for v in c.expr.variables():
                if v not in seen:
                    seen.add(v)
                    names.append(v)
        self.names = names
        self.col = {v: 2 * i for i, v in enumerate(names)}

    def ncols(self):
        return 2 * len(self.names)

    def row_of(self, expr: LinExpr):
        row = [0] * self.ncols()
        for v, c in expr.coeffs:
            row[self.col[v]] += c
            row[self.col[v] + 1] -= c
        return row

    def rows(self, extra):
        out = []
        for c in self.cons:
            if c.rel == "!=":
                continue
            out.append((self.row_of(c.expr), c.rel, -c.expr.const))
        for expr, rel, rhs in extra:
            out.append((self.row_of(expr), rel, rhs - expr.const))
        return out


_MAX_NODES = 50000
_MAX_DEPTH = 400


def _gcd_list(ns):
    from math import gcd

    g = 0
    for n in ns:
        g = gcd(g, abs(n))
    return g


def _tighten(expr: LinExpr) -> Optional[LinExpr]:
    """Divide an 'expr <= 0' row by the gcd of its coefficients (integer
    rounding cut).  Returns None when the row is trivially true."""
    if not expr.coeffs:
        return None if expr.const <= 0 else expr
    g = _gcd_list([c for _, c in expr.coeffs])
    if g <= 1:
        return expr
    coeffs = {v: c // g for v, c in expr.coeffs}
    const = -(-expr.const // g)  # ceil(const / g)
    return LinExpr.make(coeffs, const)


def _symmod(a: int, m: int) -> int:
    """Symmetric residue in (-m/2, m/2]."""
    r = a % m
    if r > m // 2:
        r -= m
    return r


def _subst_expr(expr: LinExpr, var: str, repl: LinExpr) -> LinExpr:
    d = expr.as_dict()
    c = d.pop(var, 0)
    out = LinExpr.make(d, expr.const)
    if c:
        out = out.add(repl.scale(c))
    return out


class _Unsat(Exception):
    pass


def _eliminate_equalities(eqs: List[LinExpr], ineqs: List[LinExpr], fresh_ctr):
    """Integer-preserving elimination of 'expr == 0' rows.

    Returns (ineqs', chain) where chain is [(var, replacement_expr), ...] in
    elimination order.  Raises _Unsat on a gcd contradiction.
    """
    chain = []
    eqs = list(eqs)
    ineqs = list(ineqs)
    while eqs:
        e = eqs.pop(0)
        if not e.coeffs:
            if e.const != 0:
                raise _Unsat()
            continue
        g = _gcd_list([c for _, c in e.coeffs])
        if e.const % g != 0:
            raise _Unsat()
        if g > 1:
            e = LinExpr.make({v: c // g for v, c in e.coeffs}, e.const // g)
        unit = None
        for v, c in e.coeffs:
            if abs(c) == 1:
                unit = (v, c)
                break
        if unit is not None:
            v, c = unit
            # c*v + rest = 0  =>  v = -(rest)/c
            rest = LinExpr.make({u: k for u, k in e.coeffs if u != v}, e.const)
            repl = rest.scale(-c)  # c in {1,-1} so -rest/c == -c*rest
            eqs = [_subst_expr(x, v, repl) for x in eqs]
            ineqs = [_subst_expr(x, v, repl) for x in ineqs]
            chain.append((v, repl))
            continue
        # No unit coefficient: Omega-test style coefficient shrinking.
        k, ak = min(e.coeffs, key=lambda vc: abs(vc[1]))
        if ak < 0:
            e = e.scale(-1)
            ak = -ak
        m = ak + 1
        sigma = "_lia%d" % next(fresh_ctr)
        repl_coeffs = {sigma: -m}
        for v, c in e.coeffs:
            if v != k:
                repl_coeffs[v] = _symmod(c, m)
        repl = LinExpr.make(repl_coeffs, _symmod(e.const, m))
        eqs = [_subst_expr(x, k, repl) for x in eqs]
        ineqs = [_subst_expr(x, k, repl) for x in ineqs]
        chain.append((k, repl))
        eqs.insert(0, _subst_expr(e, k, repl))
    out = []
    for x in ineqs:
        t = _tighten(x)
        if t is None:
            continue
        if not t.coeffs and t.const > 0:
            raise _Unsat()
        out.append(t)
    return out, chain


def _bb_ineq(ineqs: List[LinExpr], objective: Optional[LinExpr]):
    """Branch and bound over '<= 0' rows only.

    Returns ('unsat', None) | ('optimal', model) | ('unbounded', None).
    """
    cons = [LinConstraint(e, "<=") for e in ineqs]
    prob = _LpProblem(cons)
    names = set(prob.names)
    if objective is not None:
        for v in objective.variables():
            if v not in names:
                # Unconstrained objective variable: unbounded below unless
                # the system is infeasible.
                st, _ = _bb_ineq(ineqs, None)
                return ("unbounded", None) if st == "optimal" else ("unsat", None)
    if not prob.names:
        for e in ineqs:
            if e.const > 0:
                return "unsat", None
        return "optimal", {}
    obj_row = [0] * prob.ncols()
    if objective is not None:
        for v, c in objective.coeffs:
            obj_row[prob.col[v]] += c
            obj_row[prob.col[v] + 1] -= c
    incumbent = None
    incumbent_val = None
    nodes = 0
    stack = [[]]
    while stack:
        extra = stack.pop()
        nodes += 1
        if nodes > _MAX_NODES:
            raise SolverError("integer search exceeded node budget")
        if len(extra) > _MAX_DEPTH:
            raise SolverError("integer search exceeded branching depth")
        status, values, val = _simplex(prob.ncols(), prob.rows(extra), obj_row)
        if status == _INFEASIBLE:
            continue
        if status == _UNBOUNDED:
            # Integer-feasible + rationally unbounded => integer unbounded
            # (a rational recession ray scales to an integral one).
            feas, _ = _bb_ineq(ineqs, None)
            return ("unbounded", None) if feas == "optimal" else ("unsat", None)
        if incumbent_val is not None and val is not None and val >= incumbent_val:
            continue
        model = {}
        frac_var = None
        for v in prob.names:
            x = values[prob.col[v]] - values[prob.col[v] + 1]
            if x.denominator == 1:
                model[v] = int(x)
            else:
                frac_var = (v, x)
                break
        if frac_var is None:
            for e in ineqs:
                pass  # relaxation already enforces the rows
            if objective is None:
                return "optimal", model
            mval = objective.eval(model)
            if incumbent_val is None or mval < incumbent_val:
                incumbent, incumbent_val = model, mval
            continue
        v, x = frac_var
        fl = x.numerator // x.denominator
        down = extra + [(LinExpr(((v, 1),), 0), "<=", fl)]
        up = extra + [(LinExpr(((v, -1),), 0), "<=", -(fl + 1))]
        stack.append(up)
        stack.append(down)
    if incumbent is not None:
        return "optimal", incumbent
    return "unsat", None


def _decide(cons: List[LinConstraint], objective: Optional[LinExpr]):
    """Equality elimination + branch and bound; no '!=' rows allowed."""
    from itertools import count

    eqs = []
    ineqs = []
    allvars = set()
    for c in cons:
        allvars.update(c.expr.variables())
        if c.rel == "==":
            eqs.append(c.expr)
        else:
            t = _tighten(c.expr)
            if t is None:
                continue
            ineqs.append(t)
    if objective is not None:
        allvars.update(objective.variables())
    try:
        reduced, chain = _eliminate_equalities(eqs, ineqs, count(1))
    except _Unsat:
        return "unsat", None
    obj = objective
    if obj is not None:
        for v, repl in chain:
            obj = _subst_expr(obj, v, repl)
    status, model = _bb_ineq(reduced, obj)
    if status != "optimal":
        return status, None
    for v, repl in reversed(chain):
        model[v] = repl.eval({u: model.get(u, 0) for u in repl.variables()})
    full = {v: model.get(v, 0) for v in allvars}
    return "optimal", full


def _split_neqs(cons: List[LinConstraint]):
    neqs = [c for c in cons if c.rel == "!="]
    rest = [c for c in cons if c.rel != "!="]
    if not neqs:
        yield rest
        return
    stack = [(rest, neqs)]
    while stack:
        base, pending = stack.pop()
        if not pending:
            yield base
            continue
        d, *others = pending
        less = LinConstraint(d.expr.shift(1), "<=")
        greater = LinConstraint(d.expr.scale(-1).shift(1), "<=")
        stack.append((base + [greater], list(others)))
        stack.append((base + [less], list(others)))


def lia_sat(constraints: Iterable[LinConstraint]) -> Optional[Dict[str, int]]:
    """Decide a conjunction; returns a model dict or None."""
    cons = list(constraints)
    for case in _split_neqs(cons):
        status, model = _decide(case, None)
        if status == "optimal":
            return model
    return None


def lia_minimize(constraints: Iterable[LinConstraint], objective: LinExpr):
    """Minimise objective subject to a conjunction.

    Returns ('optimal', model) | ('unsat', None) | ('unbounded', None).
    Ties between optimal models are broken by lia_minimize_lex.
    """
    cons = list(constraints)
    best = None
    best_val = None
    for case in _split_neqs(cons):
        status, model = _decide(case, objective)
        if status == "unbounded":
            return "unbounded", None
        if status == "optimal":
            val = objective.eval({v: model.get(v, 0) for v in objective.variables()})
            if best_val is None or val < best_val:
                best, best_val = model, val
    if best is not None:
        return "optimal", best
    return "unsat", None


def lia_minimize_lex(constraints, objectives: List[LinExpr]):
    """Minimise objectives lexicographically; returns model or None.

    Each stage pins the previous optimum with an equality constraint.
    """
    cons = list(constraints)
    model = lia_sat(cons)
    if model is None:
        return None
    for obj in objectives:
        status, m = lia_minimize(cons, obj)
        if status == "unbounded":
            raise SolverError("lexicographic stage unbounded")
        if status != "optimal":
            return None
        val = obj.eval(m)
        cons = cons + [LinConstraint(obj.shift(-val), "==")]
        model = m
    # Final model must satisfy every stage equality; re-solve once for a
    # model of the fully pinned system.
    final = lia_sat(cons)
    return final if final is not None else model
