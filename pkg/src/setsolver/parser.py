"""Parser for the query and clause language.

Surface syntax (ASCII): conjunction ``&`` binds tighter than ``or``;
relational atoms are infix (``=``, ``neq``, ``in``, ``nin``, ``is``, ``=<``,
``>=``, ``<``, ``>``); arithmetic uses ``+ - * mod``; set literals are
``{a,b/Rest}``; ordered pairs are ``[X,Y]`` with ``(X,Y)`` accepted as a
synonym; intervals ``int(M,N)``; Cartesian products ``cp(A,B)``;
restricted intensional sets ``ris(X in D, ...)``.  Comments run from ``%``
to end of line.  Every query or clause ends with a period.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import ParseError
from .terms import (
    And,
    ArithOp,
    Atom,
    CP,
    Call,
    Constraint,
    EMPTY,
    FALSE,
    Formula,
    IntConst,
    Interval,
    Or,
    Pair,
    Ris,
    SetCons,
    TRUE,
    Term,
    UrAtom,
    Var,
    mk_set,
)

# Builtin constraint atoms recognised in prefix form, with arity.
PREFIX_ATOMS = {
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
    "integer": 1,
    "ninteger": 1,
    "write": 1,
}

# Functors that build terms rather than atoms.
TERM_FUNCTORS = {"int", "cp", "ris"}

_SYMBOLS = [":-", "=<", ">=", "=", "<", ">", "&", "{", "}", "[", "]",
            "(", ")", ",", "/", ".", "+", "-", "*"]
_KEYWORD_OPS = {"or", "neq", "in", "nin", "is", "mod"}


@dataclass
class _Tok:
    kind: str  # 'var' | 'name' | 'int' | 'sym' | 'qatom' | 'eof'
    text: str
    line: int
    col: int


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.toks: List[_Tok] = []
        self._scan()

    def _error(self, msg):
        raise ParseError(msg, self.line, self.col)

    def _advance(self, n):
        for ch in self.text[self.pos:self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def _scan(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance(1)
                continue
            if ch == "%":
                nl = text.find("\n", self.pos)
                self._advance((nl - self.pos) if nl >= 0 else len(text) - self.pos)
                continue
            line, col = self.line, self.col
            if ch == "'":
                end = text.find("'", self.pos + 1)
                if end < 0:
                    self._error("unterminated quoted atom")
                val = text[self.pos + 1:end]
                self.toks.append(_Tok("qatom", val, line, col))
                self._advance(end + 1 - self.pos)
                continue
            if ch.isdigit():
                j = self.pos
                while j < len(text) and text[j].isdigit():
                    j += 1
                self.toks.append(_Tok("int", text[self.pos:j], line, col))
                self._advance(j - self.pos)
                continue
            if ch.isalpha() or ch == "_":
                j = self.pos
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                word = text[self.pos:j]
                if word[0].isupper() or word[0] == "_":
                    self.toks.append(_Tok("var", word, line, col))
                else:
                    self.toks.append(_Tok("name", word, line, col))
                self._advance(j - self.pos)
                continue
            for sym in _SYMBOLS:
                if text.startswith(sym, self.pos):
                    self.toks.append(_Tok("sym", sym, line, col))
                    self._advance(len(sym))
                    break
            else:
                self._error("unexpected character %r" % ch)
        self.toks.append(_Tok("eof", "", self.line, self.col))


class Parser:
    def __init__(self, text: str):
        self.toks = _Lexer(text).toks
        self.i = 0
        self._anon = 0

    # -- token helpers ----------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at_sym(self, s) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == s

    def at_name(self, s) -> bool:
        t = self.peek()
        return t.kind == "name" and t.text == s

    def expect_sym(self, s):
        t = self.next()
        if t.kind != "sym" or t.text != s:
            raise ParseError("expected %r, found %r" % (s, t.text or "end of input"),
                             t.line, t.col)

    def error(self, msg):
        t = self.peek()
        raise ParseError(msg + (", found %r" % (t.text or "end of input")), t.line, t.col)

    def _fresh_anon(self) -> Var:
        self._anon += 1
        return Var("_A%d" % self._anon)

    # -- formulas ----------------------------------------------------------

    def parse_formula(self) -> Formula:
        left = self.parse_conj()
        if self.at_name("or"):
            self.next()
            return Or(left, self.parse_formula())
        return left

    def parse_conj(self) -> Formula:
        left = self.parse_unit()
        if self.at_sym("&"):
            self.next()
            return And(left, self.parse_conj())
        return left

    def parse_unit(self) -> Formula:
        t = self.peek()
        if t.kind == "name" and t.text == "true":
            self.next()
            return TRUE
        if t.kind == "name" and t.text == "false":
            self.next()
            return FALSE
        if t.kind == "name" and t.text == "foreach":
            return self._parse_foreach()
        # Try 'term RELOP term' first; fall back on prefix atoms and
        # parenthesised formulas.  The deepest error position wins when
        # every alternative fails.
        save = self.i
        best_err = None
        try:
            lhs = self.parse_term()
            rel = self._try_relop()
            if rel is not None:
                rhs = self.parse_term()
                return Atom(self._relation(rel, lhs, rhs))
            cur = self.peek()
            raise ParseError("expected a relational operator", cur.line, cur.col)
        except ParseError as e:
            if self.i > save:
                best_err = e
            self.i = save
        try:
            if self.at_sym("("):
                self.next()
                f = self.parse_formula()
                self.expect_sym(")")
                return f
            if t.kind == "name":
                return self._parse_prefix_atom()
        except ParseError as e:
            if best_err is None or (e.line, e.column) >= (best_err.line, best_err.column):
                best_err = e
            raise best_err from None
        if best_err is not None:
            raise best_err
        self.error("expected an atom")

    def _try_relop(self) -> Optional[str]:
        t = self.peek()
        if t.kind == "sym" and t.text in ("=", "=<", ">=", "<", ">"):
            self.next()
            return t.text
        if t.kind == "name" and t.text in ("neq", "in", "nin", "is"):
            self.next()
            return t.text
        return None

    def _relation(self, rel: str, lhs: Term, rhs: Term) -> Constraint:
        arith = isinstance(lhs, ArithOp) or isinstance(rhs, ArithOp)
        if rel == "=":
            return Constraint("aeq" if arith else "eq", (lhs, rhs))
        if rel == "neq":
            return Constraint("aneq" if arith else "neq", (lhs, rhs))
        if rel == "is":
            return Constraint("aeq", (lhs, rhs))
        if rel == "in":
            return Constraint("in", (lhs, rhs))
        if rel == "nin":
            return Constraint("nin", (lhs, rhs))
        if rel == "=<":
            return Constraint("le", (lhs, rhs))
        if rel == ">=":
            return Constraint("le", (rhs, lhs))
        if rel == "<":
            return Constraint("lt", (lhs, rhs))
        if rel == ">":
            return Constraint("lt", (rhs, lhs))
        raise AssertionError(rel)

    def _parse_prefix_atom(self) -> Formula:
        t = self.next()
        name = t.text
        if not self.at_sym("("):
            # 0-ary user predicate call
            return Call(name, ())
        args = self._parse_args()
        if name in PREFIX_ATOMS:
            want = PREFIX_ATOMS[name]
            if len(args) != want:
                raise ParseError(
                    "%s expects %d arguments, got %d" % (name, want, len(args)),
                    t.line, t.col)
            return Atom(Constraint(name, tuple(args)))
        if name in TERM_FUNCTORS:
            raise ParseError("%s(...) is a term, not an atom" % name, t.line, t.col)
        return Call(name, tuple(args))

    def _parse_args(self) -> List[Term]:
        self.expect_sym("(")
        if self.at_sym(")"):
            self.next()
            return []
        args = [self.parse_term()]
        while self.at_sym(","):
            self.next()
            args.append(self.parse_term())
        self.expect_sym(")")
        return args

    def _parse_binder(self) -> Tuple[Term, Term]:
        control = self.parse_term()
        if not self.at_name("in"):
            self.error("expected 'in' after binder pattern")
        self.next()
        domain = self.parse_term()
        return control, domain

    def _parse_varlist(self) -> Tuple[Var, ...]:
        self.expect_sym("[")
        out = []
        if not self.at_sym("]"):
            while True:
                t = self.next()
                if t.kind != "var":
                    raise ParseError("expected a variable", t.line, t.col)
                out.append(Var(t.text))
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym("]")
        return tuple(out)

    def _parse_foreach(self) -> Formula:
        t = self.next()  # 'foreach'
        self.expect_sym("(")
        control, domain = self._parse_binder()
        exis: Tuple[Var, ...] = ()
        flt: Formula = TRUE
        funpred: Optional[Formula] = None
        if self.at_sym(","):
            self.next()
            if self.at_sym("["):
                exis = self._parse_varlist()
                self.expect_sym(",")
                flt = self.parse_formula()
                self.expect_sym(",")
                funpred = self.parse_formula()
            else:
                flt = self.parse_formula()
        self.expect_sym(")")
        ris = Ris(control, domain, exis, flt, control, funpred)
        return Atom(Constraint("foreach", (ris,)))

    def _parse_ris(self) -> Term:
        self.expect_sym("(")
        control, domain = self._parse_binder()
        exis: Tuple[Var, ...] = ()
        flt: Formula = TRUE
        pattern: Optional[Term] = None
        funpred: Optional[Formula] = None
        rest: List = []
        while self.at_sym(","):
            self.next()
            if self.at_sym("[") and not rest and self._looks_like_varlist():
                rest.append(("vars", self._parse_varlist()))
            else:
                save = self.i
                try:
                    f = self.parse_formula()
                    if self.at_sym(",") or self.at_sym(")"):
                        rest.append(("formula", f))
                        continue
                    raise ParseError("trailing", 0, 0)
                except ParseError:
                    self.i = save
                    rest.append(("term", self.parse_term()))
        self.expect_sym(")")
        kinds = [k for k, _ in rest]
        if kinds == [] :
            pass
        elif kinds == ["formula"]:
            flt = rest[0][1]
        elif kinds == ["formula", "term"]:
            flt, pattern = rest[0][1], rest[1][1]
        elif kinds == ["vars", "formula", "formula"]:
            exis, flt, funpred = rest[0][1], rest[1][1], rest[2][1]
        elif kinds == ["vars", "formula", "term", "formula"]:
            exis, flt, pattern, funpred = (
                rest[0][1], rest[1][1], rest[2][1], rest[3][1])
        else:
            self.error("malformed ris arguments")
        if pattern is None:
            pattern = control
        return Ris(control, domain, exis, flt, pattern, funpred)

    def _looks_like_varlist(self) -> bool:
        # Distinguish an existential-variable list from a pair pattern; a
        # variable list has only variables and commas up to ']'.
        j = self.i + 1
        depth = 0
        while j < len(self.toks):
            t = self.toks[j]
            if t.kind == "sym" and t.text == "]":
                return True
            if t.kind == "var" or (t.kind == "sym" and t.text == ","):
                j += 1
                continue
            return False
        return False

    # -- terms -------------------------------------------------------------

    def parse_term(self) -> Term:
        return self._additive()

    def _additive(self) -> Term:
        left = self._multiplicative()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.next().text
            right = self._multiplicative()
            left = self._fold(op, left, right)
        return left

    def _multiplicative(self) -> Term:
        left = self._unary()
        while self.at_sym("*") or self.at_name("mod"):
            op = self.next().text
            right = self._unary()
            left = self._fold(op, left, right)
        return left

    def _fold(self, op, a, b) -> Term:
        if isinstance(a, IntConst) and isinstance(b, IntConst):
            if op == "+":
                return IntConst(a.value + b.value)
            if op == "-":
                return IntConst(a.value - b.value)
            if op == "*":
                return IntConst(a.value * b.value)
        return ArithOp(op, (a, b))

    def _unary(self) -> Term:
        if self.at_sym("-"):
            self.next()
            inner = self._unary()
            if isinstance(inner, IntConst):
                return IntConst(-inner.value)
            return ArithOp("neg", (inner,))
        return self._primary()

    def _primary(self) -> Term:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntConst(int(t.text))
        if t.kind == "var":
            self.next()
            if t.text == "_":
                return self._fresh_anon()
            return Var(t.text)
        if t.kind == "qatom":
            self.next()
            return UrAtom(t.text)
        if t.kind == "name":
            if t.text == "ris":
                self.next()
                return self._parse_ris()
            if t.text in ("int", "cp"):
                self.next()
                args = self._parse_args()
                if len(args) != 2:
                    raise ParseError("%s expects 2 arguments" % t.text, t.line, t.col)
                if t.text == "int":
                    return Interval(args[0], args[1])
                return CP(args[0], args[1])
            self.next()
            if self.at_sym("("):
                raise ParseError("unknown term functor %r" % t.text, t.line, t.col)
            return UrAtom(t.text)
        if t.kind == "sym" and t.text == "{":
            return self._parse_set()
        if t.kind == "sym" and t.text == "[":
            self.next()
            first = self.parse_term()
            self.expect_sym(",")
            second = self.parse_term()
            self.expect_sym("]")
            return Pair(first, second)
        if t.kind == "sym" and t.text == "(":
            self.next()
            first = self.parse_term()
            if self.at_sym(","):
                self.next()
                second = self.parse_term()
                self.expect_sym(")")
                return Pair(first, second)
            self.expect_sym(")")
            return first
        raise ParseError("expected a term, found %r" % (t.text or "end of input"),
                         t.line, t.col)

    def _parse_set(self) -> Term:
        self.expect_sym("{")
        if self.at_sym("}"):
            self.next()
            return EMPTY
        elems = [self.parse_term()]
        while self.at_sym(","):
            self.next()
            elems.append(self.parse_term())
        tail: Term = EMPTY
        if self.at_sym("/"):
            self.next()
            tail = self.parse_term()
        self.expect_sym("}")
        return mk_set(elems, tail)

    # -- top level ---------------------------------------------------------

    def parse_query(self) -> Formula:
        f = self.parse_formula()
        self.expect_sym(".")
        t = self.peek()
        if t.kind != "eof":
            raise ParseError("trailing input after query", t.line, t.col)
        return f

    def parse_clause_head(self):
        t = self.next()
        if t.kind != "name":
            raise ParseError("clause head must be a predicate application",
                             t.line, t.col)
        name = t.text
        params: List[Term] = []
        if self.at_sym("("):
            params = self._parse_args()
        if name in PREFIX_ATOMS or name in TERM_FUNCTORS:
            raise ParseError("cannot redefine built-in %r" % name, t.line, t.col)
        return name, tuple(params)

    def parse_program(self):
        clauses = []
        while self.peek().kind != "eof":
            name, params = self.parse_clause_head()
            body: Formula = TRUE
            if self.at_sym(":-"):
                self.next()
                body = self.parse_formula()
            self.expect_sym(".")
            clauses.append((name, params, body))
        return clauses


def parse_query(text: str) -> Formula:
    """Parse a single '.'-terminated query."""
    return Parser(text).parse_query()


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.parse_term()
    if p.peek().kind != "eof":
        p.error("trailing input after term")
    return t


def parse_program_text(text: str):
    """Parse zero or more clauses; returns (name, params, body) triples."""
    return Parser(text).parse_program()
