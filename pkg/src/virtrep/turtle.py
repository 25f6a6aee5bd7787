"""Turtle parsing and serialization.

The tokenizer doubles as the front end for the N3 program subset (rule
braces, ``=>`` and ``?variables`` appear only when ``n3=True``), so the
program parser in ``n3.py`` reuses it.

Supported Turtle: ``@prefix``/``@base`` (and the SPARQL-style spellings),
prefixed names, IRI references with ``\\u`` escapes, string literals in all
four quote forms, language tags, typed literals, integer/decimal/double
shorthand, booleans, ``a``, predicate lists, object lists, and blank nodes
as ``_:label`` or (nested) ``[ ... ]``. Collections are not part of the
subset. Blank node labels are standardized apart per parse, so merging
parsed graphs is plain set union.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urljoin, urlsplit

from .errors import ParseError
from .terms import (
    BlankNode,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    fresh_blank,
    term_sort_key,
)
from .vocab import RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, XSD_STRING


@dataclass
class Token:
    kind: str
    value: str
    line: int
    col: int


_PUNCT = {
    ".": "dot",
    ";": "semicolon",
    ",": "comma",
    "[": "lbracket",
    "]": "rbracket",
    "(": "lparen",
    ")": "rparen",
}

_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}

_LANGTAG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")


class Tokenizer:
    def __init__(self, text: str, n3: bool = False):
        self.text = text
        self.n = len(text)
        self.i = 0
        self.line = 1
        self.col = 1
        self.n3 = n3

    def error(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        raise ParseError(message, line or self.line, col or self.col)

    def _advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.i < self.n and self.text[self.i] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.i += 1

    def _peek(self, offset: int = 0) -> str:
        j = self.i + offset
        return self.text[j] if j < self.n else ""

    def tokens(self) -> list[Token]:
        out = []
        while True:
            tok = self.next_token()
            out.append(tok)
            if tok.kind == "eof":
                return out

    def next_token(self) -> Token:
        self._skip_ws_and_comments()
        if self.i >= self.n:
            return Token("eof", "", self.line, self.col)
        line, col = self.line, self.col
        c = self._peek()

        if c == "<":
            return self._iriref(line, col)
        if c in "\"'":
            return self._string(line, col)
        if c == "@":
            return self._at_word(line, col)
        if c == "^":
            if self._peek(1) == "^":
                self._advance(2)
                return Token("hathat", "^^", line, col)
            self.error("unexpected '^'")
        if c == "_" and self._peek(1) == ":":
            return self._blank_label(line, col)
        if self.n3 and c == "{":
            self._advance()
            return Token("lbrace", "{", line, col)
        if self.n3 and c == "}":
            self._advance()
            return Token("rbrace", "}", line, col)
        if self.n3 and c == "=" and self._peek(1) == ">":
            self._advance(2)
            return Token("implies", "=>", line, col)
        if self.n3 and c == "?":
            return self._variable(line, col)
        if c in _PUNCT:
            if c == "." and self._peek(1).isdigit():
                return self._number(line, col)
            self._advance()
            return Token(_PUNCT[c], c, line, col)
        if c.isdigit() or (c in "+-" and (self._peek(1).isdigit() or self._peek(1) == ".")):
            return self._number(line, col)
        if _is_pname_start(c):
            return self._word(line, col)
        self.error(f"unexpected character {c!r}")

    def _skip_ws_and_comments(self) -> None:
        while self.i < self.n:
            c = self.text[self.i]
            if c.isspace():
                self._advance()
            elif c == "#":
                while self.i < self.n and self.text[self.i] != "\n":
                    self._advance()
            else:
                return

    def _iriref(self, line: int, col: int) -> Token:
        self._advance()  # <
        chars = []
        while True:
            if self.i >= self.n:
                self.error("unterminated IRI reference", line, col)
            c = self._peek()
            if c == ">":
                self._advance()
                return Token("iriref", "".join(chars), line, col)
            if c == "\\":
                chars.append(self._uchar())
                continue
            if c in ' "{}|^`' or ord(c) <= 0x20:
                self.error(f"character {c!r} not allowed in IRI reference")
            chars.append(c)
            self._advance()

    def _uchar(self) -> str:
        # positioned at backslash
        esc = self._peek(1)
        if esc == "u":
            digits, width = self._peek_slice(2, 4), 4
        elif esc == "U":
            digits, width = self._peek_slice(2, 8), 8
        else:
            self.error(f"invalid escape '\\{esc}' in IRI reference")
        if len(digits) != width or any(d not in "0123456789abcdefABCDEF" for d in digits):
            self.error("malformed \\u escape")
        self._advance(2 + width)
        return chr(int(digits, 16))

    def _peek_slice(self, offset: int, length: int) -> str:
        return self.text[self.i + offset : self.i + offset + length]

    def _string(self, line: int, col: int) -> Token:
        quote = self._peek()
        long = self._peek(1) == quote and self._peek(2) == quote
        self._advance(3 if long else 1)
        closer = quote * 3 if long else quote
        chars = []
        while True:
            if self.i >= self.n:
                self.error("unterminated string literal", line, col)
            c = self._peek()
            if not long and c in "\n\r":
                self.error("newline in short string literal", line, col)
            if self.text.startswith(closer, self.i):
                self._advance(len(closer))
                return Token("string", "".join(chars), line, col)
            if c == "\\":
                esc = self._peek(1)
                if esc in _ESCAPES:
                    chars.append(_ESCAPES[esc])
                    self._advance(2)
                elif esc in "uU":
                    chars.append(self._uchar())
                else:
                    self.error(f"invalid string escape '\\{esc}'")
                continue
            chars.append(c)
            self._advance()

    def _at_word(self, line: int, col: int) -> Token:
        self._advance()  # @
        start = self.i
        while self.i < self.n and (self._peek().isalnum() or self._peek() == "-"):
            self._advance()
        word = self.text[start : self.i]
        if word == "prefix":
            return Token("prefix_kw", word, line, col)
        if word == "base":
            return Token("base_kw", word, line, col)
        if _LANGTAG_RE.match(word):
            return Token("langtag", word, line, col)
        self.error(f"malformed '@{word}'", line, col)

    def _blank_label(self, line: int, col: int) -> Token:
        self._advance(2)  # _:
        start = self.i
        while self.i < self.n and _is_pname_char(self._peek()):
            self._advance()
        label = self.text[start : self.i].rstrip(".")
        if not label:
            self.error("missing blank node label", line, col)
        self._rewind_trailing_dots(start, label)
        return Token("bnode_label", label, line, col)

    def _variable(self, line: int, col: int) -> Token:
        self._advance()  # ?
        start = self.i
        while self.i < self.n and (self._peek().isalnum() or self._peek() == "_"):
            self._advance()
        name = self.text[start : self.i]
        if not name:
            self.error("missing variable name", line, col)
        return Token("var", name, line, col)

    def _number(self, line: int, col: int) -> Token:
        start = self.i
        if self._peek() in "+-":
            self._advance()
        seen_dot = False
        while self.i < self.n:
            c = self._peek()
            if c.isdigit():
                self._advance()
            elif c == "." and not seen_dot and self._peek(1).isdigit():
                seen_dot = True
                self._advance()
            else:
                break
        kind = "decimal" if seen_dot else "integer"
        if self._peek() in ("e", "E") and (
            self._peek(1).isdigit() or (self._peek(1) in "+-" and self._peek(2).isdigit())
        ):
            self._advance()
            if self._peek() in "+-":
                self._advance()
            while self.i < self.n and self._peek().isdigit():
                self._advance()
            kind = "double"
        text = self.text[start : self.i]
        if not any(ch.isdigit() for ch in text):
            self.error("malformed number", line, col)
        return Token(kind, text, line, col)

    def _word(self, line: int, col: int) -> Token:
        start = self.i
        while self.i < self.n:
            c = self._peek()
            if c == "\\" and self.i + 1 < self.n:
                self._advance(2)
            elif _is_pname_char(c) or c == ":":
                self._advance()
            else:
                break
        word = self.text[start : self.i]
        stripped = word.rstrip(".")
        self._rewind_trailing_dots(start, stripped)
        word = stripped
        if ":" in word:
            return Token("pname", word, line, col)
        if word == "a":
            return Token("a", word, line, col)
        if word in ("true", "false"):
            return Token(word, word, line, col)
        if word.upper() == "PREFIX":
            return Token("prefix_kw", word, line, col)
        if word.upper() == "BASE":
            return Token("base_kw", word, line, col)
        self.error(f"unexpected token {word!r} (missing ':'?)", line, col)

    def _rewind_trailing_dots(self, start: int, kept: str) -> None:
        # '.' may appear inside names but a trailing run of dots closes the
        # statement; put those back.
        target = start + len(kept)
        while self.i > target:
            self.i -= 1
            self.col -= 1


def _is_pname_start(c: str) -> bool:
    return c.isalpha() or c == "_" or c == ":" or ord(c) > 0x7F


def _is_pname_char(c: str) -> bool:
    return c.isalnum() or c in "_-.%" or ord(c) > 0x7F


def resolve_iri(ref: str, base: Optional[str], tok: Tokenizer, line: int, col: int) -> str:
    if urlsplit(ref).scheme:
        return ref
    if not base:
        tok.error(f"relative IRI <{ref}> without a base", line, col)
    return urljoin(base, ref)


class TurtleParser:
    """Recursive-descent parser over the token stream.

    Subclassed by the N3 program parser, which overrides statement handling
    but reuses all of the term machinery here.
    """

    def __init__(
        self,
        text: str,
        base: Optional[str] = None,
        n3: bool = False,
        tokenizer: Optional[Tokenizer] = None,
    ):
        self.tok = tokenizer if tokenizer is not None else Tokenizer(text, n3=n3)
        self.base = base
        self.prefixes: dict[str, str] = {}
        self.bnodes: dict[str, BlankNode] = {}
        self.triples: list[Triple] = []
        self.current: Token = self.tok.next_token()

    # --- token plumbing -------------------------------------------------

    def advance(self) -> Token:
        tok = self.current
        self.current = self.tok.next_token()
        return tok

    def expect(self, kind: str) -> Token:
        if self.current.kind != kind:
            self.tok.error(
                f"expected {kind}, found {self.current.kind} {self.current.value!r}",
                self.current.line,
                self.current.col,
            )
        return self.advance()

    def error_here(self, message: str):
        self.tok.error(message, self.current.line, self.current.col)

    # --- document -------------------------------------------------------

    def parse_document(self) -> Graph:
        while self.current.kind != "eof":
            self.statement()
        return Graph(self.triples)

    def statement(self) -> None:
        kind = self.current.kind
        if kind == "prefix_kw":
            self.prefix_directive()
        elif kind == "base_kw":
            self.base_directive()
        else:
            self.triples_block(self.triples)
            self.expect("dot")

    def prefix_directive(self) -> None:
        at_style = self.advance().value == "prefix"
        name_tok = self.expect("pname")
        if not name_tok.value.endswith(":"):
            self.tok.error("prefix declaration needs 'name:'", name_tok.line, name_tok.col)
        prefix = name_tok.value[:-1]
        iri_tok = self.expect("iriref")
        self.prefixes[prefix] = resolve_iri(iri_tok.value, self.base, self.tok, iri_tok.line, iri_tok.col)
        if at_style:
            self.expect("dot")
        elif self.current.kind == "dot":
            self.advance()

    def base_directive(self) -> None:
        at_style = self.advance().value == "base"
        iri_tok = self.expect("iriref")
        self.base = resolve_iri(iri_tok.value, self.base, self.tok, iri_tok.line, iri_tok.col)
        if at_style:
            self.expect("dot")
        elif self.current.kind == "dot":
            self.advance()

    # --- triples --------------------------------------------------------

    def triples_block(self, sink: list[Triple]) -> None:
        if self.current.kind == "lbracket":
            subject = self.bnode_property_list(sink)
            if self.current.kind not in ("dot", "rbrace"):
                self.predicate_object_list(subject, sink)
            return
        subject = self.subject(sink)
        self.predicate_object_list(subject, sink)

    def subject(self, sink: list[Triple]):
        kind = self.current.kind
        if kind == "iriref" or kind == "pname":
            return self.iri_term()
        if kind == "bnode_label":
            return self.labelled_bnode()
        self.error_here(f"expected subject, found {self.current.value!r}")

    def predicate_object_list(self, subject, sink: list[Triple]) -> None:
        while True:
            predicate = self.verb()
            self.object_list(subject, predicate, sink)
            if self.current.kind == "semicolon":
                while self.current.kind == "semicolon":
                    self.advance()
                if self.current.kind in ("dot", "rbracket", "rbrace"):
                    return
                continue
            return

    def verb(self) -> IRI:
        if self.current.kind == "a":
            self.advance()
            return IRI(RDF_TYPE)
        if self.current.kind in ("iriref", "pname"):
            term = self.iri_term()
            return term
        self.error_here(f"expected predicate, found {self.current.value!r}")

    def object_list(self, subject, predicate: IRI, sink: list[Triple]) -> None:
        while True:
            obj = self.object_term(sink)
            self.emit(sink, subject, predicate, obj)
            if self.current.kind == "comma":
                self.advance()
                continue
            return

    def emit(self, sink: list, subject, predicate, obj) -> None:
        sink.append(Triple(subject, predicate, obj))

    def object_term(self, sink: list[Triple]):
        kind = self.current.kind
        if kind in ("iriref", "pname"):
            return self.iri_term()
        if kind == "bnode_label":
            return self.labelled_bnode()
        if kind == "lbracket":
            return self.bnode_property_list(sink)
        if kind in ("string", "integer", "decimal", "double", "true", "false"):
            return self.literal()
        self.error_here(f"expected object, found {self.current.value!r}")

    def bnode_property_list(self, sink: list[Triple]) -> BlankNode:
        self.expect("lbracket")
        node = fresh_blank()
        if self.current.kind != "rbracket":
            self.predicate_object_list(node, sink)
        self.expect("rbracket")
        return node

    def labelled_bnode(self) -> BlankNode:
        tok = self.advance()
        node = self.bnodes.get(tok.value)
        if node is None:
            node = fresh_blank()
            self.bnodes[tok.value] = node
        return node

    def iri_term(self) -> IRI:
        tok = self.advance()
        if tok.kind == "iriref":
            return IRI(resolve_iri(tok.value, self.base, self.tok, tok.line, tok.col))
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.prefixes:
            self.tok.error(f"undefined prefix '{prefix}:'", tok.line, tok.col)
        return IRI(self.prefixes[prefix] + _unescape_local(local))

    def literal(self) -> Literal:
        tok = self.advance()
        if tok.kind == "integer":
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "decimal":
            return Literal(tok.value, XSD_DECIMAL)
        if tok.kind == "double":
            return Literal(tok.value, XSD_DOUBLE)
        if tok.kind in ("true", "false"):
            return Literal(tok.value, XSD_BOOLEAN)
        # string, optionally tagged or typed
        if self.current.kind == "langtag":
            tag = self.advance().value
            return Literal(tok.value, language=tag)
        if self.current.kind == "hathat":
            self.advance()
            dt = self.iri_term()
            if dt.value == RDF_TYPE:
                self.error_here("rdf:type is not a datatype")
            try:
                return Literal(tok.value, dt.value)
            except ValueError as exc:
                self.tok.error(str(exc), tok.line, tok.col)
        return Literal(tok.value, XSD_STRING)


def _unescape_local(local: str) -> str:
    if "\\" not in local:
        return local
    out = []
    i = 0
    while i < len(local):
        if local[i] == "\\" and i + 1 < len(local):
            out.append(local[i + 1])
            i += 2
        else:
            out.append(local[i])
            i += 1
    return "".join(out)


def parse_turtle(text: str, base: Optional[str] = None) -> Graph:
    """Parse a Turtle document. Relative IRIs resolve against ``base``;
    a relative IRI with no base in scope is a syntax error."""
    return TurtleParser(text, base=base).parse_document()


# --- serialization ------------------------------------------------------

_INTEGER_SHORTHAND = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL_SHORTHAND = re.compile(r"^[+-]?[0-9]*\.[0-9]+$")
_DOUBLE_SHORTHAND = re.compile(r"^[+-]?(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)[eE][+-]?[0-9]+$")
_SAFE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$|^$")

_STRING_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def _escape_string(s: str) -> str:
    out = []
    for c in s:
        if c in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[c])
        elif ord(c) < 0x20:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


def _escape_iri(value: str) -> str:
    out = []
    for c in value:
        if c in ' <>"{}|^`\\' or ord(c) <= 0x20:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


class _TermWriter:
    def __init__(self, prefixes: dict[str, str]):
        # longest namespace first so the most specific prefix wins
        self.by_length = sorted(prefixes.items(), key=lambda kv: -len(kv[1]))
        self.bnode_names: dict[BlankNode, str] = {}

    def iri(self, value: str) -> str:
        for prefix, ns in self.by_length:
            if value.startswith(ns):
                local = value[len(ns):]
                if _SAFE_LOCAL.match(local) and not local.endswith("."):
                    return f"{prefix}:{local}"
        return f"<{_escape_iri(value)}>"

    def term(self, t: Term) -> str:
        if isinstance(t, IRI):
            return self.iri(t.value)
        if isinstance(t, BlankNode):
            name = self.bnode_names.get(t)
            if name is None:
                name = f"g{len(self.bnode_names) + 1}"
                self.bnode_names[t] = name
            return f"_:{name}"
        return self.literal(t)

    def literal(self, lit: Literal) -> str:
        if lit.language:
            return f'"{_escape_string(lit.lexical)}"@{lit.language}'
        dt = lit.datatype
        lex = lit.lexical
        if dt == XSD_INTEGER and _INTEGER_SHORTHAND.match(lex):
            return lex
        if dt == XSD_DECIMAL and _DECIMAL_SHORTHAND.match(lex):
            return lex
        if dt == XSD_DOUBLE and _DOUBLE_SHORTHAND.match(lex):
            return lex
        if dt == XSD_BOOLEAN and lex in ("true", "false"):
            return lex
        quoted = f'"{_escape_string(lex)}"'
        if dt == XSD_STRING:
            return quoted
        return f"{quoted}^^{self.iri(dt)}"


def serialize_turtle(graph: Graph, prefixes: Optional[dict[str, str]] = None) -> str:
    """Deterministic Turtle for a graph: sorted subjects, grouped
    predicates and objects, canonical numeric lexicals (guaranteed by
    literal construction). Re-parsing yields an isomorphic graph."""
    prefixes = dict(prefixes or {})
    writer = _TermWriter(prefixes)
    lines = [f"@prefix {p}: <{_escape_iri(ns)}> ." for p, ns in sorted(prefixes.items())]
    if lines:
        lines.append("")

    by_subject: dict[Term, list[Triple]] = {}
    for t in graph.sorted():
        by_subject.setdefault(t.subject, []).append(t)

    for subject in sorted(by_subject, key=term_sort_key):
        rows = by_subject[subject]
        by_pred: dict[Term, list[Term]] = {}
        for t in rows:
            by_pred.setdefault(t.predicate, []).append(t.object)
        pred_parts = []
        for pred in sorted(by_pred, key=term_sort_key):
            objs = ", ".join(writer.term(o) for o in by_pred[pred])
            verb = "a" if pred.value == RDF_TYPE else writer.iri(pred.value)
            pred_parts.append(f"{verb} {objs}")
        subj_text = writer.term(subject)
        joined = " ;\n    ".join(pred_parts)
        lines.append(f"{subj_text} {joined} .")
    return "\n".join(lines) + "\n"
