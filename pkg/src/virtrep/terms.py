"""RDF data model: terms, triples and immutable graphs.

Graphs are the universal currency of the pipeline: upstream state, rule
engine output and constructed virtual-representation bodies are all plain
triple sets. Graph values never mutate after construction, so they can be
shared freely across concurrent request handlers.

Numeric literals are canonicalized at construction time (``0.50`` becomes
``0.5``), which makes serialization canonical and parse/serialize
round-trips exact at the same time.
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, localcontext
from typing import Iterable, Iterator, Optional, Union

from .vocab import (
    RDF_LANGSTRING,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    XSD_STRING,
)


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __repr__(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __repr__(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __repr__(self) -> str:
        return f"?{self.name}"


_INTEGER_RE = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL_RE = re.compile(r"^[+-]?(?:[0-9]+\.[0-9]*|\.?[0-9]+)$")
_DOUBLE_RE = re.compile(
    r"^(?:[+-]?(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)(?:[eE][+-]?[0-9]+)?|[+-]?INF|NaN)$"
)


def canonical_integer(lexical: str) -> Optional[str]:
    if not _INTEGER_RE.match(lexical):
        return None
    return str(int(lexical))


def canonical_decimal(lexical: str) -> Optional[str]:
    """Canonical xsd:decimal: no exponent, no trailing zeros, no point when
    the value is integral, a digit on each side of the point otherwise."""
    if not _DECIMAL_RE.match(lexical):
        return None
    try:
        value = Decimal(lexical)
    except InvalidOperation:
        return None
    return format_decimal(value)


def format_decimal(value: Decimal) -> str:
    if value == 0:
        return "0"
    sign, digits, exponent = value.as_tuple()
    text = "".join(str(d) for d in digits)
    if exponent >= 0:
        whole, frac = text + "0" * exponent, ""
    else:
        point = len(text) + exponent
        if point <= 0:
            whole, frac = "0", "0" * (-point) + text
        else:
            whole, frac = text[:point], text[point:]
    whole = whole.lstrip("0") or "0"
    frac = frac.rstrip("0")
    out = whole if not frac else f"{whole}.{frac}"
    return "-" + out if sign else out


def canonical_double(lexical: str) -> Optional[str]:
    if not _DOUBLE_RE.match(lexical):
        return None
    if lexical == "INF" or lexical == "+INF":
        return "INF"
    if lexical == "-INF":
        return "-INF"
    if lexical == "NaN":
        return "NaN"
    return format_double(float(lexical))


def format_double(value: float) -> str:
    """Canonical xsd:double: single nonzero leading digit mantissa, 'E',
    exponent without leading zeros (``1230.0`` -> ``1.23E3``)."""
    if value != value:
        return "NaN"
    if value == float("inf"):
        return "INF"
    if value == float("-inf"):
        return "-INF"
    # repr() gives the shortest digit string that round-trips.
    d = Decimal(repr(value))
    sign, digits, exponent = d.as_tuple()
    text = "".join(str(x) for x in digits).rstrip("0") or "0"
    # Value is text * 10^(exponent + dropped zeros); normalize to d.ddd form.
    dropped = len("".join(str(x) for x in digits)) - len(text)
    exp10 = exponent + dropped + (len(text) - 1)
    mantissa = text[0] + ("." + text[1:] if len(text) > 1 else ".0")
    if text == "0":
        mantissa, exp10 = "0.0", 0
    return ("-" if sign else "") + f"{mantissa}E{exp10}"


def canonical_boolean(lexical: str) -> Optional[str]:
    if lexical in ("true", "1"):
        return "true"
    if lexical in ("false", "0"):
        return "false"
    return None


_CANONICALIZERS = {
    XSD_INTEGER: canonical_integer,
    XSD_DECIMAL: canonical_decimal,
    XSD_DOUBLE: canonical_double,
    XSD_BOOLEAN: canonical_boolean,
}


class Literal:
    """An RDF literal. Numeric and boolean lexicals are canonicalized on
    construction; ill-typed lexicals (e.g. ``"abc"^^xsd:integer``) are kept
    verbatim and simply expose no value."""

    __slots__ = ("lexical", "datatype", "language", "_hash")

    def __init__(self, lexical: str, datatype: str = XSD_STRING, language: str | None = None):
        if language is not None:
            if datatype not in (XSD_STRING, RDF_LANGSTRING):
                raise ValueError("language tag requires the language-string datatype")
            datatype = RDF_LANGSTRING
        elif datatype == RDF_LANGSTRING:
            raise ValueError("language-string literal requires a language tag")
        canon = _CANONICALIZERS.get(datatype)
        if canon is not None:
            fixed = canon(lexical)
            if fixed is not None:
                lexical = fixed
        self.lexical = lexical
        self.datatype = datatype
        self.language = language.lower() if language else None
        self._hash = hash((lexical, self.datatype, self.language))

    @property
    def value(self):
        """Parsed value: int, Decimal, float, bool or str; None if ill-typed."""
        dt = self.datatype
        try:
            if dt == XSD_INTEGER:
                return int(self.lexical) if _INTEGER_RE.match(self.lexical) else None
            if dt == XSD_DECIMAL:
                return Decimal(self.lexical) if _DECIMAL_RE.match(self.lexical) else None
            if dt == XSD_DOUBLE:
                if not _DOUBLE_RE.match(self.lexical):
                    return None
                if self.lexical in ("INF", "+INF"):
                    return float("inf")
                if self.lexical == "-INF":
                    return float("-inf")
                return float(self.lexical)
            if dt == XSD_BOOLEAN:
                return {"true": True, "false": False}.get(self.lexical)
        except (ValueError, InvalidOperation):
            return None
        return self.lexical if dt in (XSD_STRING, RDF_LANGSTRING) else None

    @property
    def numeric_value(self):
        """Like ``value`` but only for the three numeric datatypes."""
        if self.datatype in (XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE):
            return self.value
        return None

    def __eq__(self, other):
        return (
            isinstance(other, Literal)
            and self.lexical == other.lexical
            and self.datatype == other.datatype
            and self.language == other.language
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.language:
            return f'"{self.lexical}"@{self.language}'
        if self.datatype == XSD_STRING:
            return f'"{self.lexical}"'
        return f'"{self.lexical}"^^<{self.datatype}>'


Term = Union[IRI, BlankNode, Literal]
PatternTerm = Union[IRI, BlankNode, Literal, Variable]


def integer(value: int) -> Literal:
    return Literal(str(value), XSD_INTEGER)


def decimal(value: Decimal | str) -> Literal:
    return Literal(format_decimal(Decimal(value)), XSD_DECIMAL)


def double(value: float) -> Literal:
    return Literal(format_double(value), XSD_DOUBLE)


def boolean(value: bool) -> Literal:
    return Literal("true" if value else "false", XSD_BOOLEAN)


def numeric_literal(value) -> Literal:
    """Wrap a Python number in the matching numeric literal."""
    if isinstance(value, bool):
        raise TypeError("boolean is not numeric")
    if isinstance(value, int):
        return integer(value)
    if isinstance(value, Decimal):
        return decimal(value)
    if isinstance(value, float):
        return double(value)
    raise TypeError(f"not a numeric value: {value!r}")


# Quotients of exact operands stay exact whenever the result has a finite
# decimal expansion; otherwise they round at this many significant digits.
DIVISION_PRECISION = 34


def exact_divide(a: Decimal, b: Decimal) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = DIVISION_PRECISION
        return a / b


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValueError("literal in subject position")
        if not isinstance(self.predicate, IRI):
            raise ValueError("predicate must be an IRI")

    def __repr__(self):
        return f"({self.subject!r} {self.predicate!r} {self.object!r})"


_blank_counter = itertools.count(1)
_blank_lock = threading.Lock()


def fresh_blank() -> BlankNode:
    """Globally fresh blank node (standardize-apart across parse scopes,
    so merging graphs is plain set union)."""
    with _blank_lock:
        n = next(_blank_counter)
    return BlankNode(f"b{n}")


def term_sort_key(t: Term):
    """IRIs < blank nodes < literals, each lexicographic."""
    if isinstance(t, IRI):
        return (0, t.value, "", "")
    if isinstance(t, BlankNode):
        return (1, t.label, "", "")
    return (2, t.lexical, t.datatype, t.language or "")


def triple_sort_key(t: Triple):
    return (term_sort_key(t.subject), term_sort_key(t.predicate), term_sort_key(t.object))


class Graph:
    """An immutable set of triples."""

    __slots__ = ("_triples", "_index")

    def __init__(self, triples: Iterable[Triple] = ()):
        object.__setattr__(self, "_triples", frozenset(triples))
        object.__setattr__(self, "_index", None)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._triples == other._triples

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples)"

    def union(self, other: "Graph") -> "Graph":
        if not other._triples:
            return self
        if not self._triples:
            return other
        return Graph(self._triples | other._triples)

    def with_triples(self, extra: Iterable[Triple]) -> "Graph":
        extra = frozenset(extra)
        if extra <= self._triples:
            return self
        return Graph(self._triples | extra)

    def subjects(self) -> set[Term]:
        return {t.subject for t in self._triples}

    def objects_of(self, subject: Term, predicate: IRI) -> list[Term]:
        return [t.object for t in self._triples if t.subject == subject and t.predicate == predicate]

    def sorted(self) -> list[Triple]:
        return sorted(self._triples, key=triple_sort_key)

    def _interned(self):
        """Interned integer view used by the BGP matcher (built lazily;
        benign to race since the result is deterministic)."""
        idx = self._index
        if idx is None:
            from .bgp import build_index

            idx = build_index(self._triples)
            object.__setattr__(self, "_index", idx)
        return idx


EMPTY_GRAPH = Graph()


def merge(g1: Graph, g2: Graph) -> Graph:
    """Set union; parse-time standardize-apart keeps blank scopes distinct."""
    return g1.union(g2)
