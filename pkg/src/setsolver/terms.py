"""Term and formula language.

Terms cover hereditarily finite hybrid sets: variables, ur-atoms (lowercase
identifiers), integers, ordered pairs, extensional sets built from ``{}`` by
consing, integer intervals, Cartesian products and restricted intensional
sets.  Arithmetic expressions (``+ - * mod``) are terms too so that they can
travel inside constraints until they are linearised or evaluated.

Everything here is an immutable value; sharing across threads is safe.  The
only mutable object is :class:`VarSupply`, which is confined to a single
solver derivation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Tuple, Union

from .errors import NotNegatable, SortError

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self):
        return "Var(%s)" % self.name


@dataclass(frozen=True, slots=True)
class UrAtom:
    name: str

    def __repr__(self):
        return "UrAtom(%s)" % self.name


@dataclass(frozen=True, slots=True)
class IntConst:
    value: int

    def __repr__(self):
        return "IntConst(%d)" % self.value


@dataclass(frozen=True, slots=True)
class Pair:
    first: "Term"
    second: "Term"


@dataclass(frozen=True, slots=True)
class EmptySet:
    pass


@dataclass(frozen=True, slots=True)
class SetCons:
    element: "Term"
    rest: "Term"


@dataclass(frozen=True, slots=True)
class Interval:
    lo: "Term"
    hi: "Term"


@dataclass(frozen=True, slots=True)
class CP:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Ris:
    """ris(Control in Domain, Existentials, Filter, Pattern[, FunPred]).

    ``control`` is a variable or a (possibly nested) pair pattern of
    variables.  Control and existential variables are bound names local to
    the RIS.  A RIS denotes the set of instances of ``pattern`` for the
    elements of ``domain`` that pass ``filter`` (and, when present, the
    functional predicate part ``funpred``).
    """

    control: "Term"
    domain: "Term"
    existentials: Tuple[Var, ...]
    filter: "Formula"
    pattern: "Term"
    funpred: Optional["Formula"] = None


@dataclass(frozen=True, slots=True)
class ArithOp:
    """Compound integer expression: op in {'+', '-', '*', 'mod', 'neg'}."""

    op: str
    args: Tuple["Term", ...]


Term = Union[
    Var, UrAtom, IntConst, Pair, EmptySet, SetCons, Interval, CP, Ris, ArithOp
]

EMPTY = EmptySet()


# ---------------------------------------------------------------------------
# Constraints and formulas


@dataclass(frozen=True, slots=True)
class Constraint:
    name: str
    args: Tuple[Term, ...]

    def __repr__(self):
        return "Constraint(%s/%d)" % (self.name, len(self.args))


@dataclass(frozen=True, slots=True)
class Atom:
    con: Constraint


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Call:
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True, slots=True)
class TrueF:
    pass


@dataclass(frozen=True, slots=True)
class FalseF:
    pass


Formula = Union[Atom, And, Or, Call, TrueF, FalseF]

TRUE = TrueF()
FALSE = FalseF()


def atom(name: str, *args: Term) -> Formula:
    return Atom(Constraint(name, tuple(args)))


def conj(parts: Iterable[Formula]) -> Formula:
    parts = [p for p in parts if not isinstance(p, TrueF)]
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def iter_conjuncts(f: Formula) -> Iterator[Formula]:
    if isinstance(f, And):
        yield from iter_conjuncts(f.left)
        yield from iter_conjuncts(f.right)
    else:
        yield f


# ---------------------------------------------------------------------------
# Constraint catalogue

# Primitive constraint tags with fixed arities.  Everything else that the
# solver understands is a derived tag expanded (or handled by dedicated
# rewrite rules) before it can reach a solved form.
PRIMITIVE_ARITY = {
    "eq": 2,
    "neq": 2,
    "in": 2,
    "nin": 2,
    "un": 3,
    "nun": 3,
    "disj": 2,
    "ndisj": 2,
    "id": 2,
    "comp": 3,
    "ncomp": 3,
    "inv": 2,
    "ninv": 2,
    "pfun": 1,
    "npfun": 1,
    "size": 2,
    "nsize": 2,
    "le": 2,
    "lt": 2,
    "aeq": 2,
    "aneq": 2,
    "integer": 1,
    "ninteger": 1,
}

DERIVED_ARITY = {
    "subset": 2,
    "nsubset": 2,
    "inters": 3,
    "diff": 3,
    "dom": 2,
    "ndom": 2,
    "ran": 2,
    "nran": 2,
    "dres": 3,
    "rres": 3,
    "oplus": 3,
    "apply": 3,
    "napply": 3,
    "applyTo": 3,
    "min": 2,
    "max": 2,
    "nint": 1,
    "write": 1,
}

# Internal tags never written by users: ``size_r`` is a size atom that has
# been normalised once (its nonnegativity residue emitted), ``adres`` is
# domain anti-restriction used by the oplus expansion, ``foreach`` carries
# 2- or 4-argument restricted universal quantification.
INTERNAL_TAGS = {"size_r", "adres", "foreach"}

KNOWN_TAGS = set(PRIMITIVE_ARITY) | set(DERIVED_ARITY) | INTERNAL_TAGS

# Involution pairs for negation.  le/lt negate by swapping the argument
# order, handled explicitly in negate_atom.
NEGATION_PAIRS = {
    "eq": "neq",
    "in": "nin",
    "un": "nun",
    "disj": "ndisj",
    "comp": "ncomp",
    "inv": "ninv",
    "pfun": "npfun",
    "subset": "nsubset",
    "dom": "ndom",
    "ran": "nran",
    "size": "nsize",
    "integer": "ninteger",
    "aeq": "aneq",
    "apply": "napply",
}
_NEG = dict(NEGATION_PAIRS)
_NEG.update({v: k for k, v in NEGATION_PAIRS.items()})


def negate_atom(c: Constraint) -> Constraint:
    """Built-in negation of a primitive or negatable derived constraint."""
    if c.name in _NEG:
        return Constraint(_NEG[c.name], c.args)
    if c.name == "le":
        a, b = c.args
        return Constraint("lt", (b, a))
    if c.name == "lt":
        a, b = c.args
        return Constraint("le", (b, a))
    raise NotNegatable("constraint %s/%d has no built-in negation" % (c.name, len(c.args)))


def negate_formula(f: Formula) -> Formula:
    """Distribute negation over conjunction/disjunction of negatable atoms."""
    if isinstance(f, Atom):
        return Atom(negate_atom(f.con))
    if isinstance(f, And):
        return Or(negate_formula(f.left), negate_formula(f.right))
    if isinstance(f, Or):
        return And(negate_formula(f.left), negate_formula(f.right))
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    raise NotNegatable("cannot negate %r; distribute the negation by hand" % (f,))


# ---------------------------------------------------------------------------
# Sort helpers


def is_set_term(t: Term) -> bool:
    return isinstance(t, (Var, EmptySet, SetCons, Interval, Ris, CP))


def mk_set(elements, tail: Term = EMPTY) -> Term:
    """Build {e1,...,en / tail} as a right-nested cons chain."""
    if not is_set_term(tail):
        raise SortError("set tail must be set-sorted, got %r" % (tail,))
    out = tail
    for e in reversed(list(elements)):
        out = SetCons(e, out)
    return out


def set_parts(t: Term):
    """Split a cons chain into (elements, tail)."""
    elems = []
    while isinstance(t, SetCons):
        elems.append(t.element)
        t = t.rest
    return elems, t


# ---------------------------------------------------------------------------
# Variables, substitutions

_ANON_PREFIX = "_N"


class VarSupply:
    """Fresh-variable source producing _N1, _N2, ... in order."""

    def __init__(self, used: Iterable[str] = ()):  # noqa: D401
        self._counter = 0
        self._used = set(used)

    def fresh(self, hint: str = "") -> Var:
        while True:
            self._counter += 1
            name = "%s%d" % (_ANON_PREFIX, self._counter)
            if name not in self._used:
                self._used.add(name)
                return Var(name)

    def reserve(self, names: Iterable[str]) -> None:
        self._used.update(names)


def control_vars(control: Term):
    """Variable names bound by a RIS control pattern (Var or pair of Vars)."""
    out = []

    def walk(t):
        if isinstance(t, Var):
            out.append(t.name)
        elif isinstance(t, Pair):
            walk(t.first)
            walk(t.second)

    walk(control)
    return out


def free_vars(x) -> set:
    """Free variable names of a term or formula."""
    out: set = set()
    _free_vars(x, out, frozenset())
    return out


def _free_vars(x, out, bound):
    if isinstance(x, Var):
        if x.name not in bound:
            out.add(x.name)
    elif isinstance(x, (UrAtom, IntConst, EmptySet, TrueF, FalseF)):
        pass
    elif isinstance(x, Pair):
        _free_vars(x.first, out, bound)
        _free_vars(x.second, out, bound)
    elif isinstance(x, SetCons):
        _free_vars(x.element, out, bound)
        _free_vars(x.rest, out, bound)
    elif isinstance(x, Interval):
        _free_vars(x.lo, out, bound)
        _free_vars(x.hi, out, bound)
    elif isinstance(x, CP):
        _free_vars(x.left, out, bound)
        _free_vars(x.right, out, bound)
    elif isinstance(x, Ris):
        _free_vars(x.domain, out, bound)
        inner = bound | set(control_vars(x.control)) | {v.name for v in x.existentials}
        _free_vars(x.filter, out, inner)
        _free_vars(x.pattern, out, inner)
        if x.funpred is not None:
            _free_vars(x.funpred, out, inner)
    elif isinstance(x, ArithOp):
        for a in x.args:
            _free_vars(a, out, bound)
    elif isinstance(x, Constraint):
        for a in x.args:
            _free_vars(a, out, bound)
    elif isinstance(x, Atom):
        _free_vars(x.con, out, bound)
    elif isinstance(x, (And, Or)):
        _free_vars(x.left, out, bound)
        _free_vars(x.right, out, bound)
    elif isinstance(x, Call):
        for a in x.args:
            _free_vars(a, out, bound)
    else:
        raise TypeError("free_vars: unexpected %r" % (x,))


def walk(s: Mapping[str, Term], t: Term) -> Term:
    """Follow variable bindings until a non-bound term is reached."""
    while isinstance(t, Var):
        nxt = s.get(t.name)
        if nxt is None:
            return t
        t = nxt
    return t


def apply_subst(s: Mapping[str, Term], x):
    """Simultaneously replace free variables; RIS-bound names are shielded."""
    if not s:
        return x
    return _apply(s, x)


def _apply(s, x):
    if isinstance(x, Var):
        t = walk(s, x)
        if isinstance(t, Var):
            return t
        return _apply(s, t)
    if isinstance(x, (UrAtom, IntConst, EmptySet, TrueF, FalseF)):
        return x
    if isinstance(x, Pair):
        return Pair(_apply(s, x.first), _apply(s, x.second))
    if isinstance(x, SetCons):
        return SetCons(_apply(s, x.element), _apply(s, x.rest))
    if isinstance(x, Interval):
        return Interval(_apply(s, x.lo), _apply(s, x.hi))
    if isinstance(x, CP):
        return CP(_apply(s, x.left), _apply(s, x.right))
    if isinstance(x, Ris):
        return _apply_ris(s, x)
    if isinstance(x, ArithOp):
        return ArithOp(x.op, tuple(_apply(s, a) for a in x.args))
    if isinstance(x, Constraint):
        return Constraint(x.name, tuple(_apply(s, a) for a in x.args))
    if isinstance(x, Atom):
        return Atom(_apply(s, x.con))
    if isinstance(x, And):
        return And(_apply(s, x.left), _apply(s, x.right))
    if isinstance(x, Or):
        return Or(_apply(s, x.left), _apply(s, x.right))
    if isinstance(x, Call):
        return Call(x.name, tuple(_apply(s, a) for a in x.args))
    raise TypeError("apply_subst: unexpected %r" % (x,))


def _apply_ris(s, r: Ris) -> Ris:
    bound = set(control_vars(r.control)) | {v.name for v in r.existentials}
    inner = {k: v for k, v in s.items() if k not in bound}
    domain = _apply(s, r.domain)
    if not inner:
        return Ris(r.control, domain, r.existentials, r.filter, r.pattern, r.funpred)
    # Capture check: a substituted value must not smuggle a free occurrence
    # of a bound name into the RIS body.
    relevant = free_vars(r.filter) | free_vars(r.pattern)
    if r.funpred is not None:
        relevant |= free_vars(r.funpred)
    incoming: set = set()
    for name in relevant & set(inner):
        incoming |= free_vars(_apply(inner, Var(name)))
    clashes = incoming & bound
    control, exis, flt, pat, fp = r.control, r.existentials, r.filter, r.pattern, r.funpred
    if clashes:
        avoid = incoming | bound | relevant
        ren = {}
        for name in sorted(clashes):
            k = 1
            while "%s%d" % (name, k) in avoid:
                k += 1
            new = "%s%d" % (name, k)
            avoid.add(new)
            ren[name] = Var(new)
        control = _apply(ren, control)
        exis = tuple(_apply(ren, v) for v in exis)
        flt = _apply(ren, flt)
        pat = _apply(ren, pat)
        fp = None if fp is None else _apply(ren, fp)
    return Ris(
        control,
        domain,
        exis,
        _apply(inner, flt),
        _apply(inner, pat),
        None if fp is None else _apply(inner, fp),
    )


def occurs(name: str, t) -> bool:
    return name in free_vars(t)


def term_size(t) -> int:
    """Node count, used for budget heuristics and fuzz shrinking."""
    if isinstance(t, (Var, UrAtom, IntConst, EmptySet, TrueF, FalseF)):
        return 1
    if isinstance(t, Pair):
        return 1 + term_size(t.first) + term_size(t.second)
    if isinstance(t, SetCons):
        return 1 + term_size(t.element) + term_size(t.rest)
    if isinstance(t, Interval):
        return 1 + term_size(t.lo) + term_size(t.hi)
    if isinstance(t, CP):
        return 1 + term_size(t.left) + term_size(t.right)
    if isinstance(t, Ris):
        n = 1 + term_size(t.domain) + term_size(t.pattern) + term_size(t.filter)
        if t.funpred is not None:
            n += term_size(t.funpred)
        return n
    if isinstance(t, ArithOp):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, Constraint):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, Atom):
        return term_size(t.con)
    if isinstance(t, (And, Or)):
        return 1 + term_size(t.left) + term_size(t.right)
    if isinstance(t, Call):
        return 1 + sum(term_size(a) for a in t.args)
    raise TypeError("term_size: unexpected %r" % (t,))
