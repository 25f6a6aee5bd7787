"""SPARQL CONSTRUCT subset: parser and executor.

Supported: ``PREFIX``/``BASE``, a CONSTRUCT template of triple patterns
(blank nodes minted fresh per solution), a WHERE basic graph pattern
(blank nodes act as hidden variables), ``FILTER(expr)`` and
``BIND(expr AS ?v)``. Expressions cover comparisons, ``&&``/``||``/``!``
and arithmetic over variables and constants with SPARQL's three-valued
error semantics: a filter error drops the row, a bind error leaves the
target unbound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional, Union

from .bgp import Binding, TriplePattern, match_bgp
from .errors import ParseError
from .terms import (
    DIVISION_PRECISION,
    BlankNode,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    Variable,
    boolean as boolean_literal,
    decimal as decimal_literal,
    double as double_literal,
    fresh_blank,
    integer as integer_literal,
)
from .turtle import Tokenizer, Token, TurtleParser
from .vocab import RDF_LANGSTRING, XSD_BOOLEAN, XSD_STRING

_KEYWORDS = {"CONSTRUCT", "WHERE", "FILTER", "BIND", "AS"}


class SparqlTokenizer(Tokenizer):
    """Adds keywords and expression operators to the Turtle tokenizer.

    ``<`` is an IRI opener only when a ``>`` follows before any whitespace;
    otherwise it is the less-than operator. Signs are always operators, so
    numeric literals are unsigned here.
    """

    def __init__(self, text: str):
        super().__init__(text, n3=True)

    def next_token(self) -> Token:
        self._skip_ws_and_comments()
        if self.i >= self.n:
            return Token("eof", "", self.line, self.col)
        line, col = self.line, self.col
        c = self._peek()
        two = c + self._peek(1)
        if two in ("<=", ">=", "!=", "&&", "||"):
            self._advance(2)
            return Token({"<=": "op_le", ">=": "op_ge", "!=": "op_ne", "&&": "op_and", "||": "op_or"}[two], two, line, col)
        if c == "<" and not self._looks_like_iriref():
            self._advance()
            return Token("op_lt", c, line, col)
        if c in ">=!+-*/":
            # '/' and '*' only occur as operators in this subset
            kinds = {">": "op_gt", "=": "op_eq", "!": "op_not", "+": "op_plus", "-": "op_minus", "*": "op_mul", "/": "op_div"}
            self._advance()
            return Token(kinds[c], c, line, col)
        return super().next_token()

    def _looks_like_iriref(self) -> bool:
        j = self.i + 1
        while j < self.n:
            ch = self.text[j]
            if ch == ">":
                return True
            if ch.isspace() or ch in "\"'<":
                return False
            j += 1
        return False

    def _word(self, line: int, col: int) -> Token:
        start = self.i
        while self.i < self.n and (self.text[self.i].isalnum() or self.text[self.i] in "_:.%-\\"):
            self._advance()
        word = self.text[start : self.i]
        stripped = word.rstrip(".")
        self._rewind_trailing_dots(start, stripped)
        word = stripped
        if ":" in word:
            return Token("pname", word, line, col)
        upper = word.upper()
        if upper in _KEYWORDS:
            return Token("kw_" + upper.lower(), word, line, col)
        if upper == "PREFIX":
            return Token("prefix_kw", word, line, col)
        if upper == "BASE":
            return Token("base_kw", word, line, col)
        if word == "a":
            return Token("a", word, line, col)
        if word in ("true", "false"):
            return Token(word, word, line, col)
        self.error(f"unexpected token {word!r}", line, col)


# --- expression AST -------------------------------------------------------


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Const:
    term: Literal


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "!" | "-" | "+"
    operand: "FilterExpr"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # comparison, logical or arithmetic symbol
    left: "FilterExpr"
    right: "FilterExpr"


FilterExpr = Union[VarRef, Const, UnaryOp, BinaryOp]


@dataclass
class ConstructQuery:
    prefixes: dict[str, str] = field(default_factory=dict)
    template: tuple = ()
    where: tuple = ()
    filters: tuple = ()
    binds: tuple = ()  # (FilterExpr, str target) in textual order


class ConstructParser(TurtleParser):
    def __init__(self, text: str, base: Optional[str] = None):
        super().__init__(text, base=base, tokenizer=SparqlTokenizer(text))
        self.mode = "template"  # or "where"
        self.where_bnodes: dict[str, Variable] = {}
        self.hidden = 0

    def parse_query(self) -> ConstructQuery:
        while self.current.kind in ("prefix_kw", "base_kw"):
            if self.current.kind == "prefix_kw":
                self.prefix_directive()
            else:
                self.base_directive()
        self.expect("kw_construct")
        self.mode = "template"
        template = self.triple_group(allow_constraints=False)
        self.expect("kw_where")
        self.mode = "where"
        where, filters, binds = self.triple_group(allow_constraints=True)
        if self.current.kind != "eof":
            self.error_here("trailing content after query")
        query = ConstructQuery(dict(self.prefixes), tuple(template), tuple(where), tuple(filters), tuple(binds))
        _check_query(query, self)
        return query

    # directives in SPARQL have no trailing dot; the base parser already
    # treats the dot as optional for the PREFIX/BASE spellings.

    def triple_group(self, allow_constraints: bool):
        self.expect("lbrace")
        patterns: list[TriplePattern] = []
        filters: list[FilterExpr] = []
        binds: list[tuple[FilterExpr, str]] = []
        while self.current.kind != "rbrace":
            if self.current.kind == "kw_filter":
                if not allow_constraints:
                    self.error_here("FILTER is not allowed in the template")
                self.advance()
                self.expect("lparen")
                filters.append(self.expression())
                self.expect("rparen")
            elif self.current.kind == "kw_bind":
                if not allow_constraints:
                    self.error_here("BIND is not allowed in the template")
                self.advance()
                self.expect("lparen")
                expr = self.expression()
                self.expect("kw_as")
                var = self.expect("var")
                self.expect("rparen")
                binds.append((expr, var.value))
            else:
                self.triples_block(patterns)
            if self.current.kind == "dot":
                self.advance()
        self.expect("rbrace")
        if allow_constraints:
            return patterns, filters, binds
        return patterns

    # --- term overrides ---------------------------------------------------

    def emit(self, sink: list, subject, predicate, obj) -> None:
        sink.append(TriplePattern(subject, predicate, obj))

    def subject(self, sink: list):
        if self.current.kind == "var":
            return Variable(self.advance().value)
        if self.current.kind == "bnode_label":
            return self.pattern_bnode()
        return super().subject(sink)

    def verb(self):
        if self.current.kind == "var":
            return Variable(self.advance().value)
        return super().verb()

    def object_term(self, sink: list):
        if self.current.kind == "var":
            return Variable(self.advance().value)
        if self.current.kind == "bnode_label":
            return self.pattern_bnode()
        return super().object_term(sink)

    def bnode_property_list(self, sink: list):
        if self.mode == "where":
            self.expect("lbracket")
            node = self.fresh_hidden()
            if self.current.kind != "rbracket":
                self.predicate_object_list(node, sink)
            self.expect("rbracket")
            return node
        return super().bnode_property_list(sink)

    def pattern_bnode(self):
        tok = self.advance()
        if self.mode == "where":
            var = self.where_bnodes.get(tok.value)
            if var is None:
                var = self.fresh_hidden()
                self.where_bnodes[tok.value] = var
            return var
        return self.labelled_bnode()

    def fresh_hidden(self) -> Variable:
        # leading space keeps hidden names disjoint from ?user variables
        self.hidden += 1
        return Variable(f" b{self.hidden}")

    # --- expressions --------------------------------------------------------

    def expression(self) -> FilterExpr:
        return self.or_expr()

    def or_expr(self) -> FilterExpr:
        left = self.and_expr()
        while self.current.kind == "op_or":
            self.advance()
            left = BinaryOp("||", left, self.and_expr())
        return left

    def and_expr(self) -> FilterExpr:
        left = self.relational_expr()
        while self.current.kind == "op_and":
            self.advance()
            left = BinaryOp("&&", left, self.relational_expr())
        return left

    _REL_OPS = {"op_eq": "=", "op_ne": "!=", "op_lt": "<", "op_le": "<=", "op_gt": ">", "op_ge": ">="}

    def relational_expr(self) -> FilterExpr:
        left = self.additive_expr()
        if self.current.kind in self._REL_OPS:
            op = self._REL_OPS[self.advance().kind]
            return BinaryOp(op, left, self.additive_expr())
        return left

    def additive_expr(self) -> FilterExpr:
        left = self.multiplicative_expr()
        while self.current.kind in ("op_plus", "op_minus"):
            op = "+" if self.advance().kind == "op_plus" else "-"
            left = BinaryOp(op, left, self.multiplicative_expr())
        return left

    def multiplicative_expr(self) -> FilterExpr:
        left = self.unary_expr()
        while self.current.kind in ("op_mul", "op_div"):
            op = "*" if self.advance().kind == "op_mul" else "/"
            left = BinaryOp(op, left, self.unary_expr())
        return left

    def unary_expr(self) -> FilterExpr:
        if self.current.kind == "op_not":
            self.advance()
            return UnaryOp("!", self.unary_expr())
        if self.current.kind == "op_minus":
            self.advance()
            return UnaryOp("-", self.unary_expr())
        if self.current.kind == "op_plus":
            self.advance()
            return UnaryOp("+", self.unary_expr())
        return self.primary_expr()

    def primary_expr(self) -> FilterExpr:
        kind = self.current.kind
        if kind == "lparen":
            self.advance()
            inner = self.expression()
            self.expect("rparen")
            return inner
        if kind == "var":
            return VarRef(self.advance().value)
        if kind in ("integer", "decimal", "double", "true", "false", "string"):
            return Const(self.literal())
        self.error_here(f"expected expression, found {self.current.value!r}")


def _check_query(query: ConstructQuery, parser: ConstructParser) -> None:
    where_vars = {v for p in query.where for v in p.variables()}
    bound = set(where_vars)
    for expr, target in query.binds:
        if target in bound:
            raise ParseError(f"BIND target ?{target} is already bound")
        bound.add(target)
    for pattern in query.template:
        for v in pattern.variables():
            if v not in bound:
                raise ParseError(f"template variable ?{v} occurs neither in WHERE nor as a BIND target")


def parse_construct(text: str, base: Optional[str] = None) -> ConstructQuery:
    return ConstructParser(text, base=base).parse_query()


# --- evaluation -----------------------------------------------------------


class _EvalError(Exception):
    pass


def _arith(op: str, a, b):
    if isinstance(a, float) or isinstance(b, float):
        fa, fb = float(a), float(b)
        if op == "+":
            return fa + fb
        if op == "-":
            return fa - fb
        if op == "*":
            return fa * fb
        if fb == 0.0:
            raise _EvalError("division by zero")
        return fa / fb
    ra, rb = Fraction(a), Fraction(b)
    if op == "+":
        result = ra + rb
    elif op == "-":
        result = ra - rb
    elif op == "*":
        result = ra * rb
    else:
        if rb == 0:
            raise _EvalError("division by zero")
        result = ra / rb
        return _to_decimal(result)
    if isinstance(a, int) and isinstance(b, int):
        return int(result)
    return _to_decimal(result)


def _to_decimal(value: Fraction) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = DIVISION_PRECISION
        return Decimal(value.numerator) / Decimal(value.denominator)


def _wrap_number(value) -> Literal:
    if isinstance(value, bool):
        return boolean_literal(value)
    if isinstance(value, int):
        return integer_literal(value)
    if isinstance(value, Decimal):
        return decimal_literal(value)
    return double_literal(value)


def _numeric(term) -> object:
    if isinstance(term, Literal):
        v = term.numeric_value
        if v is not None:
            return v
    raise _EvalError(f"not a number: {term!r}")


def _ebv(term) -> bool:
    """SPARQL effective boolean value."""
    if isinstance(term, Literal):
        if term.datatype == XSD_BOOLEAN:
            v = term.value
            if v is None:
                raise _EvalError("ill-typed boolean")
            return v
        nv = term.numeric_value
        if nv is not None:
            return nv == nv and nv != 0  # NaN -> false
        if term.datatype in (XSD_STRING, RDF_LANGSTRING):
            return len(term.lexical) > 0
    raise _EvalError(f"no boolean value for {term!r}")


def _compare(op: str, x, y) -> bool:
    if isinstance(x, Literal) and isinstance(y, Literal):
        nx, ny = x.numeric_value, y.numeric_value
        if nx is not None and ny is not None:
            if isinstance(nx, float) or isinstance(ny, float):
                a, b = float(nx), float(ny)
            else:
                a, b = Fraction(nx), Fraction(ny)
        elif x.datatype in (XSD_STRING,) and y.datatype in (XSD_STRING,):
            a, b = x.lexical, y.lexical
        elif x.datatype == XSD_BOOLEAN and y.datatype == XSD_BOOLEAN:
            if x.value is None or y.value is None:
                raise _EvalError("ill-typed boolean")
            a, b = x.value, y.value
        elif x.datatype == RDF_LANGSTRING and y.datatype == RDF_LANGSTRING and x.language == y.language:
            a, b = x.lexical, y.lexical
        else:
            if op == "=":
                if x == y:
                    return True
                raise _EvalError("incomparable literals")
            if op == "!=":
                if x == y:
                    return False
                raise _EvalError("incomparable literals")
            raise _EvalError("no ordering for these literals")
        return {
            "=": a == b,
            "!=": a != b,
            "<": a < b,
            "<=": a <= b,
            ">": a > b,
            ">=": a >= b,
        }[op]
    # at least one non-literal term
    if op == "=":
        return x == y
    if op == "!=":
        return x != y
    raise _EvalError("no ordering for IRIs or blank nodes")


def _value(expr: FilterExpr, binding: Binding):
    if isinstance(expr, Const):
        return expr.term
    if isinstance(expr, VarRef):
        term = binding.get(expr.name)
        if term is None:
            raise _EvalError(f"unbound variable ?{expr.name}")
        return term
    if isinstance(expr, UnaryOp):
        if expr.op == "!":
            return boolean_literal(not _ebv(_value(expr.operand, binding)))
        v = _numeric(_value(expr.operand, binding))
        return _wrap_number(-v if expr.op == "-" else v)
    assert isinstance(expr, BinaryOp)
    op = expr.op
    if op in ("&&", "||"):
        left = right = None
        err = None
        try:
            left = _ebv(_value(expr.left, binding))
        except _EvalError as e:
            err = e
        try:
            right = _ebv(_value(expr.right, binding))
        except _EvalError as e:
            err = e
        if op == "&&":
            if left is False or right is False:
                return boolean_literal(False)
            if err is not None:
                raise err
            return boolean_literal(True)
        if left is True or right is True:
            return boolean_literal(True)
        if err is not None:
            raise err
        return boolean_literal(False)
    if op in ("=", "!=", "<", "<=", ">", ">="):
        return boolean_literal(_compare(op, _value(expr.left, binding), _value(expr.right, binding)))
    a = _numeric(_value(expr.left, binding))
    b = _numeric(_value(expr.right, binding))
    return _wrap_number(_arith(op, a, b))


def eval_expr(expr: FilterExpr, binding: Binding) -> Optional[bool]:
    """Three-valued filter evaluation: True, False, or None for error."""
    try:
        return _ebv(_value(expr, binding))
    except _EvalError:
        return None


def bind_value(expr: FilterExpr, binding: Binding) -> Optional[Term]:
    """BIND semantics: the computed term, or None (target stays unbound)."""
    try:
        return _value(expr, binding)
    except _EvalError:
        return None


def execute_construct(query: ConstructQuery, graph: Graph) -> Graph:
    """Match WHERE, extend with BINDs, drop rows failing FILTERs, then
    instantiate the template per solution (fresh blank nodes each time;
    triples with an unbound variable or an invalid position contribute
    nothing)."""
    out: set[Triple] = set()
    for solution in match_bgp(query.where, graph):
        for expr, target in query.binds:
            value = bind_value(expr, solution)
            if value is not None:
                solution[target] = value
        if any(eval_expr(f, solution) is not True for f in query.filters):
            continue
        minted: dict[BlankNode, BlankNode] = {}
        for pattern in query.template:
            terms = []
            ok = True
            for slot in (pattern.subject, pattern.predicate, pattern.object):
                if isinstance(slot, Variable):
                    term = solution.get(slot.name)
                    if term is None:
                        ok = False
                        break
                elif isinstance(slot, BlankNode):
                    term = minted.get(slot)
                    if term is None:
                        term = fresh_blank()
                        minted[slot] = term
                else:
                    term = slot
                terms.append(term)
            if not ok:
                continue
            s, p, o = terms
            if isinstance(s, Literal) or not isinstance(p, IRI):
                continue
            out.add(Triple(s, p, o))
    return Graph(out)
