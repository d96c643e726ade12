"""Clause database: user-defined predicates, consultation, bundled corpus."""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from .errors import ParseError, UnknownPredicate
from .parser import PREFIX_ATOMS, TERM_FUNCTORS, parse_program_text
from .terms import Formula, Term

_BUILTIN_NAMES = set(PREFIX_ATOMS) | set(TERM_FUNCTORS) | {"foreach", "true", "false"}


@dataclass(frozen=True)
class Clause:
    name: str
    params: Tuple[Term, ...]
    body: Formula

    @property
    def arity(self) -> int:
        return len(self.params)


class Program:
    """Immutable map from name/arity to the ordered clause list."""

    def __init__(self, clauses: Optional[Dict[Tuple[str, int], Tuple[Clause, ...]]] = None):
        self._clauses = dict(clauses or {})

    def lookup(self, name: str, arity: int) -> Tuple[Clause, ...]:
        key = (name, arity)
        if key in self._clauses:
            return self._clauses[key]
        other = [a for (n, a) in self._clauses if n == name]
        if other:
            raise UnknownPredicate(name, arity)  # defined at different arity
        raise UnknownPredicate(name, arity)

    def defines(self, name: str, arity: int) -> bool:
        return (name, arity) in self._clauses

    def predicates(self):
        return sorted(self._clauses)

    def extended(self, new_clauses: List[Clause]) -> "Program":
        merged = dict(self._clauses)
        for c in new_clauses:
            if c.name in _BUILTIN_NAMES:
                raise ParseError("cannot redefine built-in %r" % c.name)
            key = (c.name, c.arity)
            merged[key] = merged.get(key, ()) + (c,)
        return Program(merged)


def consult(source: str, program: Optional[Program] = None) -> Program:
    """Add the clauses of a file path or of literal clause text.

    Redefinition appends alternatives, matching file order.
    """
    program = program or Program()
    text = source
    if source.endswith(".slog") and os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    triples = parse_program_text(text)
    return program.extended([Clause(n, p, b) for (n, p, b) in triples])


def corpus_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "corpus")


def corpus_path(stem: str) -> str:
    return os.path.join(corpus_dir(), stem + ".slog")


@lru_cache(maxsize=1)
def examples_corpus() -> Program:
    """The bundled clause corpus, pre-consulted in file order."""
    p = Program()
    d = corpus_dir()
    for fn in sorted(os.listdir(d)):
        if fn.endswith(".slog"):
            p = consult(os.path.join(d, fn), p)
    return p
