"""Parsing and validation of configuration programs (N3 subset).

A program document contains only two statement forms:

* seed request facts, one statement each::

      [] http:mthd httpm:GET ; http:requestURI <http://device/arm/> .

* derivation rules, ``{ body } => { head } .`` where body atoms are triple
  patterns and ``math:`` builtins, and head atoms are triple patterns.

Arithmetic builtins use list-argument syntax ``( ?a ?b ) math:product ?c``;
comparisons are binary, ``?n math:lessThan 10``. Variables are ``?name``.
Blank nodes and nested formulas are not allowed inside rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .bgp import TriplePattern
from .errors import ParseError, SafetyError
from .terms import BlankNode, IRI, Literal, Triple, Variable
from .turtle import TurtleParser
from .vocab import HTTPM_GET, HTTP_MTHD, HTTP_REQUEST_URI, MATH_NS

ARITHMETIC_BUILTINS = ("sum", "difference", "product", "quotient")
COMPARISON_BUILTINS = ("greaterThan", "lessThan", "notGreaterThan", "notLessThan", "equalTo")
BUILTINS = ARITHMETIC_BUILTINS + COMPARISON_BUILTINS


@dataclass(frozen=True)
class RequestDirective:
    method: str
    target: str  # absolute IRI


@dataclass(frozen=True)
class BuiltinAtom:
    builtin: str
    inputs: tuple  # two terms, each Variable or numeric Literal
    output: Optional[object] = None  # arithmetic only: Variable or numeric Literal

    def input_variables(self) -> list[str]:
        return [t.name for t in self.inputs if isinstance(t, Variable)]


BodyAtom = Union[TriplePattern, BuiltinAtom]


@dataclass(frozen=True)
class Rule:
    body: tuple  # BodyAtom, textual order
    head: tuple  # TriplePattern

    def patterns(self) -> list[TriplePattern]:
        return [a for a in self.body if isinstance(a, TriplePattern)]

    def builtins(self) -> list[BuiltinAtom]:
        return [a for a in self.body if isinstance(a, BuiltinAtom)]


@dataclass(frozen=True)
class Program:
    requests: tuple  # RequestDirective
    rules: tuple  # Rule


@dataclass(frozen=True)
class Violation:
    rule_index: int
    kind: str  # UnsafeHeadVariable | UnboundBuiltinInput
    variable: str
    message: str


class _ArgList:
    """Parenthesized builtin argument list; only legal as a builtin subject."""

    __slots__ = ("terms", "line", "col")

    def __init__(self, terms, line, col):
        self.terms = terms
        self.line = line
        self.col = col


class ProgramParser(TurtleParser):
    def __init__(self, text: str, base: Optional[str] = None):
        super().__init__(text, base=base, n3=True)
        self.in_rule = False
        self.in_head = False
        self.requests: list[RequestDirective] = []
        self.rules: list[Rule] = []

    def parse_program(self) -> "Program":
        while self.current.kind != "eof":
            self.statement()
        return Program(tuple(self.requests), tuple(self.rules))

    def statement(self) -> None:
        kind = self.current.kind
        if kind == "prefix_kw":
            self.prefix_directive()
        elif kind == "base_kw":
            self.base_directive()
        elif kind == "lbrace":
            self.rule_statement()
        else:
            line, col = self.current.line, self.current.col
            facts: list[Triple] = []
            self.triples_block(facts)
            self.expect("dot")
            self.requests.append(self._request_fact(facts, line, col))

    # --- request facts ----------------------------------------------------

    def _request_fact(self, facts: list[Triple], line: int, col: int) -> RequestDirective:
        subjects = {t.subject for t in facts}
        if len(subjects) != 1:
            self.tok.error("a request fact describes exactly one request", line, col)
        methods = [t.object for t in facts if t.predicate.value == HTTP_MTHD]
        targets = [t.object for t in facts if t.predicate.value == HTTP_REQUEST_URI]
        extras = [t for t in facts if t.predicate.value not in (HTTP_MTHD, HTTP_REQUEST_URI)]
        if extras or len(methods) != 1 or len(targets) != 1:
            self.tok.error(
                "ground statements must be request facts with exactly one "
                "http:mthd and one http:requestURI",
                line,
                col,
            )
        method = methods[0]
        if not isinstance(method, IRI) or method.value != HTTPM_GET:
            self.tok.error("only httpm:GET request directives are supported", line, col)
        target = targets[0]
        if not isinstance(target, IRI):
            self.tok.error("http:requestURI needs an IRI object", line, col)
        return RequestDirective("GET", target.value)

    # --- rules ------------------------------------------------------------

    def rule_statement(self) -> None:
        body = self.formula(head=False)
        self.expect("implies")
        head = self.formula(head=True)
        self.expect("dot")
        self.rules.append(Rule(tuple(body), tuple(head)))

    def formula(self, head: bool) -> list:
        self.expect("lbrace")
        self.in_rule, self.in_head = True, head
        atoms: list = []
        try:
            while self.current.kind != "rbrace":
                self.triples_block(atoms)
                if self.current.kind == "dot":
                    self.advance()
                elif self.current.kind != "rbrace":
                    self.error_here("expected '.' or '}' in formula")
        finally:
            self.in_rule, self.in_head = False, False
        self.expect("rbrace")
        return atoms

    # --- term/emission overrides -------------------------------------------

    def triples_block(self, sink: list) -> None:
        if self.in_rule and self.current.kind == "lbracket":
            self.error_here("blank nodes are not allowed inside rules")
        super().triples_block(sink)

    def subject(self, sink: list):
        if self.in_rule:
            if self.current.kind == "var":
                return Variable(self.advance().value)
            if self.current.kind == "lparen":
                return self.arg_list()
            if self.current.kind in ("bnode_label", "lbracket"):
                self.error_here("blank nodes are not allowed inside rules")
            if self.current.kind == "lbrace":
                self.error_here("nested formulas are not supported")
        return super().subject(sink)

    def verb(self):
        if self.in_rule and self.current.kind == "var":
            return Variable(self.advance().value)
        return super().verb()

    def object_term(self, sink: list):
        if self.in_rule:
            if self.current.kind == "var":
                return Variable(self.advance().value)
            if self.current.kind in ("bnode_label", "lbracket"):
                self.error_here("blank nodes are not allowed inside rules")
            if self.current.kind == "lparen":
                self.error_here("argument lists are only allowed as builtin subjects")
            if self.current.kind == "lbrace":
                self.error_here("nested formulas are not supported")
        return super().object_term(sink)

    def arg_list(self) -> _ArgList:
        open_tok = self.expect("lparen")
        terms = []
        while self.current.kind != "rparen":
            if self.current.kind == "var":
                terms.append(Variable(self.advance().value))
            elif self.current.kind in ("integer", "decimal", "double"):
                terms.append(self.literal())
            else:
                self.error_here("builtin arguments must be variables or numeric literals")
        self.expect("rparen")
        return _ArgList(terms, open_tok.line, open_tok.col)

    def emit(self, sink: list, subject, predicate, obj) -> None:
        if not self.in_rule:
            if isinstance(subject, _ArgList):
                self.tok.error("argument lists are only allowed inside rules", subject.line, subject.col)
            super().emit(sink, subject, predicate, obj)
            return

        builtin = None
        if isinstance(predicate, IRI) and predicate.value.startswith(MATH_NS):
            builtin = predicate.value[len(MATH_NS):]
            if builtin not in BUILTINS:
                self.error_here(f"unknown builtin math:{builtin}")
            if self.in_head:
                self.error_here("builtins are not allowed in a rule head")

        if isinstance(subject, _ArgList):
            if builtin is None:
                self.tok.error("argument lists are only allowed as builtin subjects", subject.line, subject.col)
            if builtin not in ARITHMETIC_BUILTINS:
                self.error_here(f"math:{builtin} is a binary comparison, not list-valued")
            if len(subject.terms) != 2:
                self.tok.error("arithmetic builtins take exactly two inputs", subject.line, subject.col)
            self._check_numeric_operand(obj, output=True)
            sink.append(BuiltinAtom(builtin, tuple(subject.terms), obj))
            return

        if builtin is not None:
            if builtin in ARITHMETIC_BUILTINS:
                self.error_here(f"math:{builtin} needs a two-element list subject")
            self._check_numeric_operand(subject)
            self._check_numeric_operand(obj)
            sink.append(BuiltinAtom(builtin, (subject, obj), None))
            return

        sink.append(TriplePattern(subject, predicate, obj))

    def _check_numeric_operand(self, term, output: bool = False) -> None:
        if isinstance(term, Variable):
            return
        if isinstance(term, Literal) and term.numeric_value is not None:
            return
        role = "output" if output else "argument"
        self.error_here(f"builtin {role} must be a variable or numeric literal")


def parse_program(text: str, base: Optional[str] = None) -> Program:
    """Parse and validate a program document; raises ParseError on bad
    syntax and SafetyError on the first unsafe rule."""
    program = ProgramParser(text, base=base).parse_program()
    violations = validate_program(program)
    if violations:
        v = violations[0]
        raise SafetyError(v.rule_index, v.variable, v.message)
    return program


def _order_builtins(rule: Rule) -> tuple[list[BuiltinAtom], list[BuiltinAtom], set[str]]:
    """Greedy evaluability ordering: (ordered, stuck, bound variables)."""
    bound = {v for p in rule.patterns() for v in p.variables()}
    remaining = list(rule.builtins())
    ordered: list[BuiltinAtom] = []
    while remaining:
        ready = next(
            (b for b in remaining if all(v in bound for v in b.input_variables())),
            None,
        )
        if ready is None:
            break
        remaining.remove(ready)
        ordered.append(ready)
        if isinstance(ready.output, Variable):
            bound.add(ready.output.name)
    return ordered, remaining, bound


def builtin_order(rule: Rule) -> Optional[list[BuiltinAtom]]:
    """An evaluation order in which every builtin input is bound by a body
    pattern or an earlier builtin output; None when no such order exists."""
    ordered, stuck, _ = _order_builtins(rule)
    return None if stuck else ordered


def validate_program(program: Program) -> list[Violation]:
    """Empty iff every rule is safe and its builtins are orderable."""
    violations = []
    for i, rule in enumerate(program.rules):
        ordered, stuck, bound = _order_builtins(rule)
        for v in sorted({v for b in stuck for v in b.input_variables() if v not in bound}):
            violations.append(
                Violation(i, "UnboundBuiltinInput", v, f"builtin input ?{v} is never bound")
            )
        for v in sorted({v for p in rule.head for v in p.variables()}):
            if v not in bound:
                violations.append(
                    Violation(
                        i,
                        "UnsafeHeadVariable",
                        v,
                        f"head variable ?{v} does not occur in a body pattern or builtin output",
                    )
                )
    return violations
