"""Cardinality decision stage: Venn-region decomposition over the set
variables reachable from size and disequality residues, linear encoding of
the Boolean set atoms over them, and minimal-solution witness construction.

Each nonempty Boolean region over a connected component of set variables
gets a nonnegative integer counting its elements.  Set atoms pin mismatched
regions to zero, size atoms become linear sums, set disequalities demand a
nonempty symmetric difference, and interval subsets add pigeonhole bounds.
The resulting system joins the arithmetic residue and goes to the integer
decider; in minimal mode the total of the size-constrained cardinalities is
minimised first, then regions lexicographically (most-shared first), and the
optimum is realised with fresh pairwise-distinct elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .errors import UnsupportedConstraint, UnsupportedNonlinear
from .lia import LinConstraint, LinExpr, lia_minimize_lex, lia_sat, linearize
from .rulesbase import con
from .terms import (
    Constraint,
    EMPTY,
    EmptySet,
    IntConst,
    Interval,
    Term,
    UrAtom,
    Var,
    mk_set,
)

_VENN_TAGS = {"un", "disj", "subset", "inters", "diff"}

_SET_POSITIONS = {
    "un": (0, 1, 2),
    "nun": (0, 1, 2),
    "disj": (0, 1),
    "ndisj": (0, 1),
    "subset": (0, 1),
    "nsubset": (0, 1),
    "inters": (0, 1, 2),
    "diff": (0, 1, 2),
    "size_r": (0,),
    "size": (0,),
    "dom": (0, 1),
    "ran": (0, 1),
    "comp": (0, 1, 2),
    "id": (0, 1),
    "inv": (0, 1),
    "pfun": (0,),
    "npfun": (0,),
    "dres": (0, 1, 2),
    "rres": (0, 1, 2),
    "adres": (0, 1, 2),
    "in": (1,),
    "nin": (1,),
}


@dataclass
class RegionInfo:
    mask: frozenset
    name: str
    component: int
    order: int  # realisation order


@dataclass
class DecisionResult:
    model: Dict[str, int]
    regions: List[RegionInfo]
    components: List[List[str]]
    size_vars: List[str]
    interval_bounds: Dict[str, List[Tuple[Term, Term]]]

    @property
    def has_regions(self) -> bool:
        return bool(self.regions)


def _linearize_rel(c: Constraint) -> Optional[LinConstraint]:
    try:
        if c.name == "le":
            return LinConstraint(linearize(c.args[0]).sub(linearize(c.args[1])), "<=")
        if c.name == "lt":
            return LinConstraint(
                linearize(c.args[0]).sub(linearize(c.args[1])).shift(1), "<="
            )
        if c.name == "aeq":
            return LinConstraint(linearize(c.args[0]).sub(linearize(c.args[1])), "==")
        if c.name == "aneq":
            return LinConstraint(linearize(c.args[0]).sub(linearize(c.args[1])), "!=")
    except UnsupportedNonlinear:
        return None
    return None


def _collect(atoms: List[Constraint]):
    arith: List[LinConstraint] = []
    venn_atoms = []
    size_atoms = []
    neq_atoms = []
    sub_interval = []  # (set var, iv, reverse?)
    set_sorted = set()
    int_sorted = set()
    for c in atoms:
        for i in _SET_POSITIONS.get(c.name, ()):  # sort inference
            a = c.args[i]
            if isinstance(a, Var):
                set_sorted.add(a.name)
        lin = _linearize_rel(c)
        if lin is not None:
            arith.append(lin)
            int_sorted.update(lin.expr.variables())
            continue
        if c.name == "integer" and isinstance(c.args[0], Var):
            int_sorted.add(c.args[0].name)
    for c in atoms:
        if c.name == "size_r":
            s, n = c.args
            if isinstance(s, Var):
                size_atoms.append((s.name, n))
                try:
                    int_sorted.update(linearize(n).variables())
                except UnsupportedNonlinear:
                    pass
        elif c.name in _VENN_TAGS:
            if all(isinstance(a, Var) for a in c.args):
                venn_atoms.append((c.name, tuple(a.name for a in c.args)))
            elif c.name == "subset":
                a, b = c.args
                if isinstance(a, Var) and isinstance(b, Interval):
                    sub_interval.append((a.name, b, False))
                elif isinstance(a, Interval) and isinstance(b, Var):
                    sub_interval.append((b.name, a, True))
        elif c.name == "neq":
            neq_atoms.append(c.args)
    return arith, venn_atoms, size_atoms, neq_atoms, sub_interval, set_sorted, int_sorted


def card_decide(atoms: List[Constraint], cfg, minimal=False):
    """Decide the arithmetic+cardinality residue; None when unsatisfiable."""
    (arith, venn_atoms, size_atoms, raw_neqs, sub_interval,
     set_sorted, int_sorted) = _collect(atoms)

    set_neqs = []
    for a, b in raw_neqs:
        if isinstance(a, Var) and isinstance(b, Var):
            if a.name in set_sorted or b.name in set_sorted:
                set_neqs.append((a.name, b.name))
            elif a.name in int_sorted or b.name in int_sorted:
                arith.append(
                    LinConstraint(
                        LinExpr.make({a.name: 1, b.name: -1}, 0), "!=")
                )
        elif isinstance(a, Var) and isinstance(b, EmptySet) and a.name in set_sorted:
            set_neqs.append((a.name, None))
        elif isinstance(b, Var) and isinstance(a, EmptySet) and b.name in set_sorted:
            set_neqs.append((b.name, None))
        elif isinstance(a, Var) and isinstance(b, IntConst):
            if a.name in int_sorted:
                arith.append(
                    LinConstraint(LinExpr.make({a.name: 1}, -b.value), "!="))
        elif isinstance(b, Var) and isinstance(a, IntConst):
            if b.name in int_sorted:
                arith.append(
                    LinConstraint(LinExpr.make({b.name: 1}, -a.value), "!="))

    # Cluster: variables reachable from size/disequality seeds.
    cluster = {s for s, _ in size_atoms}
    for a, b in set_neqs:
        cluster.add(a)
        if b is not None:
            cluster.add(b)
    changed = True
    while changed:
        changed = False
        for _, args in venn_atoms:
            if any(v in cluster for v in args) and not all(v in cluster for v in args):
                cluster.update(args)
                changed = True

    # Connected components inside the cluster.
    parent = {v: v for v in cluster}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for _, args in venn_atoms:
        args = [v for v in args if v in cluster]
        for i in range(1, len(args)):
            union(args[0], args[i])
    for a, b in set_neqs:
        if b is not None and a in cluster and b in cluster:
            union(a, b)

    comp_of = {}
    components: List[List[str]] = []
    for v in sorted(cluster):
        r = find(v)
        if r not in comp_of:
            comp_of[r] = len(components)
            components.append([])
        components[comp_of[r]].append(v)

    regions: List[RegionInfo] = []
    region_cons: List[LinConstraint] = []
    var_regions: Dict[str, List[RegionInfo]] = {v: [] for v in cluster}
    ridx = 0
    for ci, comp in enumerate(components):
        if len(comp) > cfg.venn_limit:
            raise UnsupportedConstraint(
                "cardinality stage: %d interrelated set variables exceed the "
                "region limit (%d)" % (len(comp), cfg.venn_limit)
            )
        masks = []
        for k in range(1, len(comp) + 1):
            for sub in combinations(comp, k):
                masks.append(frozenset(sub))
        for mask in masks:
            reg = RegionInfo(mask, "_reg%d" % ridx, ci, ridx)
            ridx += 1
            regions.append(reg)
            region_cons.append(
                LinConstraint(LinExpr.make({reg.name: -1}, 0), "<=")
            )
            for v in mask:
                var_regions[v].append(reg)

    def regions_of(v):
        return var_regions.get(v, [])

    def sum_expr(regs) -> LinExpr:
        return LinExpr.make({r.name: 1 for r in regs}, 0)

    for tag, args in venn_atoms:
        if not all(v in cluster for v in args):
            continue
        comp = comp_of.get(find(args[0]))
        for reg in regions:
            if reg.component != comp:
                continue
            inside = [v in reg.mask for v in args]
            empty = False
            if tag == "un":
                empty = (inside[0] or inside[1]) != inside[2]
            elif tag == "disj":
                empty = inside[0] and inside[1]
            elif tag == "subset":
                empty = inside[0] and not inside[1]
            elif tag == "inters":
                empty = (inside[0] and inside[1]) != inside[2]
            elif tag == "diff":
                empty = (inside[0] and not inside[1]) != inside[2]
            if empty:
                region_cons.append(
                    LinConstraint(LinExpr.make({reg.name: 1}, 0), "==")
                )

    size_var_names = []
    for s, n in size_atoms:
        expr = sum_expr(regions_of(s))
        region_cons.append(LinConstraint(expr.sub(linearize(n)), "=="))
        for v in linearize(n).variables():
            if v not in size_var_names:
                size_var_names.append(v)

    for a, b in set_neqs:
        ra = set(r.name for r in regions_of(a))
        rb = set(r.name for r in regions_of(b)) if b is not None else set()
        sym = ra.symmetric_difference(rb)
        if not sym:
            return None  # forced equal yet required distinct
        region_cons.append(
            LinConstraint(
                LinExpr.make({name: -1 for name in sym}, 1), "<="
            )
        )

    # Interval pigeonholes: case split on interval emptiness.
    cases: List[List[LinConstraint]] = [[]]
    for vname, iv, reverse in sub_interval:
        if vname not in cluster:
            continue
        try:
            lo = linearize(iv.lo)
            hi = linearize(iv.hi)
        except UnsupportedNonlinear:
            continue
        width = hi.sub(lo).shift(1)
        total = sum_expr(regions_of(vname))
        nonempty = [LinConstraint(lo.sub(hi), "<=")]
        if reverse:
            nonempty.append(LinConstraint(width.sub(total), "<="))
            empty = [LinConstraint(hi.sub(lo).shift(1), "<=")]
        else:
            nonempty.append(LinConstraint(total.sub(width), "<="))
            empty = [
                LinConstraint(hi.sub(lo).shift(1), "<="),
                LinConstraint(total, "=="),
            ]
        new_cases = []
        for base in cases:
            new_cases.append(base + nonempty)
            new_cases.append(base + empty)
            if len(new_cases) > 64:
                raise UnsupportedConstraint("too many interval emptiness cases")
        cases = new_cases

    interval_bounds: Dict[str, List[Tuple[Term, Term]]] = {}
    for vname, iv, reverse in sub_interval:
        if not reverse:
            interval_bounds.setdefault(vname, []).append((iv.lo, iv.hi))

    base = arith + region_cons
    for case in cases:
        cons = base + case
        model = lia_sat(cons)
        if model is None:
            continue
        if minimal:
            objectives = []
            if size_var_names:
                objectives.append(LinExpr.make({v: 1 for v in size_var_names}, 0))
            ordered = sorted(regions, key=lambda r: (-len(r.mask), r.order))
            for reg in ordered:
                objectives.append(LinExpr.make({reg.name: 1}, 0))
            lexmodel = lia_minimize_lex(cons, objectives)
            if lexmodel is not None:
                model = lexmodel
        return DecisionResult(
            model=model,
            regions=regions,
            components=components,
            size_vars=size_var_names,
            interval_bounds=interval_bounds,
        )
    return None


def build_witness(result: DecisionResult, ctx) -> List[Constraint]:
    """Constraints realising the minimal model: set bindings with fresh
    pairwise-distinct elements, cardinality bindings, distinctness residues."""
    out: List[Constraint] = []
    elements: Dict[str, List[Term]] = {}
    used_ints: Dict[str, set] = {}
    ordered = sorted(result.regions, key=lambda r: (-len(r.mask), r.order))
    for reg in ordered:
        k = result.model.get(reg.name, 0)
        if k <= 0:
            elements[reg.name] = []
            continue
        bounds = []
        for v in reg.mask:
            for lo, hi in result.interval_bounds.get(v, []):
                bounds.append((lo, hi))
        if bounds:
            elems = _alloc_ints(reg, k, bounds, result, used_ints)
        else:
            elems = [ctx.fresh() for _ in range(k)]
            for i in range(k - 1, 0, -1):
                for j in range(i - 1, -1, -1):
                    out.append(con("neq", elems[i], elems[j]))
        elements[reg.name] = elems
    for comp in result.components:
        for v in comp:
            elems = []
            for reg in ordered:
                if v in reg.mask:
                    elems.extend(elements.get(reg.name, []))
            out.insert(0, con("eq", Var(v), mk_set(list(reversed(elems)), EMPTY)))
    for sv in result.size_vars:
        if sv in result.model:
            out.append(con("eq", Var(sv), IntConst(result.model[sv])))
    return out


def _alloc_ints(reg, k, bounds, result, used_ints):
    # Elements constrained into intervals: concrete integers from the
    # intersection of the model-evaluated bounds, avoiding integers already
    # used by regions sharing a variable.
    los, his = [], []
    for lo, hi in bounds:
        lo_v = _eval_bound(lo, result.model)
        hi_v = _eval_bound(hi, result.model)
        if lo_v is None or hi_v is None:
            return [IntConst(0) for _ in range(k)]  # underdetermined; degrade
        los.append(lo_v)
        his.append(hi_v)
    lo, hi = max(los), min(his)
    taken = set()
    for v in reg.mask:
        taken |= used_ints.get(v, set())
    vals = []
    x = lo
    while len(vals) < k and x <= hi:
        if x not in taken:
            vals.append(x)
        x += 1
    while len(vals) < k:  # capacity imprecision fallback
        vals.append(hi + len(vals) + 1)
    for v in reg.mask:
        used_ints.setdefault(v, set()).update(vals)
    return [IntConst(v) for v in vals]


def _eval_bound(t: Term, model) -> Optional[int]:
    try:
        expr = linearize(t)
    except UnsupportedNonlinear:
        return None
    vals = {v: model.get(v) for v in expr.variables()}
    if any(x is None for x in vals.values()):
        return None
    return expr.eval(vals)
