"""Basic-graph-pattern matching: the join substrate shared by the rule and
query engines.

Terms are interned to integers and patterns compiled to int triples
(variables encoded as negative slots); the actual join runs in a kernel.
Two kernels with identical semantics exist: a compiled Cython one
(``virtrep._bgpc``) and a pure-Python fallback (``virtrep._bgp_py``).
The compiled one is picked at import time when available; set
``VIRTREP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .terms import BlankNode, Graph, IRI, Literal, PatternTerm, Term, Triple, Variable

if os.environ.get("VIRTREP_PURE_PYTHON"):
    from . import _bgp_py as _kernel

    KERNEL = "python"
else:
    try:
        from . import _bgpc as _kernel  # type: ignore[attr-defined]

        KERNEL = "compiled"
    except ImportError:
        from . import _bgp_py as _kernel

        KERNEL = "python"


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> list[str]:
        return [t.name for t in (self.subject, self.predicate, self.object) if isinstance(t, Variable)]

    def is_ground(self) -> bool:
        return not self.variables()

    def substitute(self, binding: dict[str, Term]) -> "TriplePattern":
        def sub(t):
            if isinstance(t, Variable) and t.name in binding:
                return binding[t.name]
            return t

        return TriplePattern(sub(self.subject), sub(self.predicate), sub(self.object))

    def to_triple(self) -> Triple:
        return Triple(self.subject, self.predicate, self.object)


Binding = dict[str, Term]

_WILD = -1
_MASKS = (
    (True, True, True),
    (True, True, False),
    (True, False, True),
    (False, True, True),
    (True, False, False),
    (False, True, False),
    (False, False, True),
    (False, False, False),
)


class GraphIndex:
    """Interned view of a fixed triple set.

    ``lookup`` maps every bound-slot mask of every triple to the candidate
    triples for that mask; one dict hit answers any pattern lookup.
    """

    __slots__ = ("ids", "terms", "lookup", "size")

    def __init__(self):
        self.ids: dict[Term, int] = {}
        self.terms: list[Term] = []
        self.lookup: dict[tuple[int, int, int], list[tuple[int, int, int]]] = {}
        self.size = 0

    def intern(self, term: Term) -> int:
        tid = self.ids.get(term)
        if tid is None:
            tid = len(self.terms)
            self.ids[term] = tid
            self.terms.append(term)
        return tid

    def add(self, triple: Triple) -> tuple[int, int, int]:
        key = (self.intern(triple.subject), self.intern(triple.predicate), self.intern(triple.object))
        s, p, o = key
        for ms, mp, mo in _MASKS:
            mask = (s if ms else _WILD, p if mp else _WILD, o if mo else _WILD)
            self.lookup.setdefault(mask, []).append(key)
        self.size += 1
        return key


def build_index(triples: Iterable[Triple]) -> GraphIndex:
    index = GraphIndex()
    for t in triples:
        index.add(t)
    return index


def _encode_patterns(
    patterns: Sequence[TriplePattern], index: GraphIndex
) -> Optional[tuple[list[tuple[int, int, int]], list[str]]]:
    """Compile patterns against an index without interning new terms (the
    index may be shared across threads). A constant absent from the graph
    means no match: returns None."""
    var_ids: dict[str, int] = {}
    encoded = []
    for pat in patterns:
        slots = []
        for term in (pat.subject, pat.predicate, pat.object):
            if isinstance(term, Variable):
                vid = var_ids.setdefault(term.name, len(var_ids))
                slots.append(-vid - 1)
            else:
                tid = index.ids.get(term)
                if tid is None:
                    return None
                slots.append(tid)
        encoded.append(tuple(slots))
    return encoded, list(var_ids)


def match_bgp(patterns: Sequence[TriplePattern], graph: Graph) -> list[Binding]:
    """All bindings of the pattern variables whose substitution lands every
    pattern in the graph. The empty conjunction yields one empty binding."""
    if not patterns:
        return [{}]
    index = graph._interned()
    compiled = _encode_patterns(patterns, index)
    if compiled is None:
        return []
    encoded, names = compiled
    raw = _kernel.join(encoded, index.lookup, len(names))
    terms = index.terms
    out = []
    for assignment in dict.fromkeys(raw):
        out.append({name: terms[assignment[i]] for i, name in enumerate(names)})
    return out


def join_encoded(
    encoded: Sequence[tuple[int, int, int]],
    lookup: dict,
    nvars: int,
    delta_lookup: Optional[dict] = None,
    delta_at: int = -1,
) -> list[tuple[int, ...]]:
    """Raw kernel entry point for callers that manage their own interning
    (the rule engine's semi-naive loop)."""
    return _kernel.join(list(encoded), lookup, nvars, delta_lookup, delta_at)
