"""Seeded random instances at desk scale: upstream graphs, terminating
rule programs, and CONSTRUCT queries, all rendered as documents so the
HTTP path and the in-process path parse identical text.

Termination by construction: pattern-only rules never invent new terms,
and arithmetic rules derive only into sink predicates (t:d*) that no rule
body reads.
"""

from __future__ import annotations

import random
from decimal import Decimal
from fractions import Fraction

from virtrep.bgp import TriplePattern
from virtrep.sparql import BinaryOp, Const, UnaryOp, VarRef
from virtrep.terms import BlankNode, Graph, IRI, Literal, Triple, Variable, fresh_blank, integer
from virtrep.vocab import XSD_DECIMAL, XSD_INTEGER

T = "http://t.example/"

SUBJECTS = [f"{T}s{i}" for i in range(5)]
BASE_PREDS = [f"{T}p{i}" for i in range(3)]
NUM_PRED = f"{T}n"
DERIVED_PREDS = [f"{T}d{i}" for i in range(3)]
STRINGS = ["a", "b", "c"]


def random_upstream_graph(rng: random.Random, max_triples: int = 30) -> Graph:
    triples = set()
    for _ in range(rng.randint(3, max_triples)):
        kind = rng.random()
        s = IRI(rng.choice(SUBJECTS))
        if kind < 0.35:
            triples.add(Triple(s, IRI(NUM_PRED), integer(rng.randint(0, 20))))
        elif kind < 0.5:
            lex = f"{rng.randint(0, 99)}.{rng.randint(1, 9)}"
            triples.add(Triple(s, IRI(NUM_PRED), Literal(lex, XSD_DECIMAL)))
        elif kind < 0.85:
            triples.add(Triple(s, IRI(rng.choice(BASE_PREDS)), IRI(rng.choice(SUBJECTS))))
        else:
            triples.add(Triple(s, IRI(rng.choice(BASE_PREDS)), Literal(rng.choice(STRINGS))))
    return Graph(triples)


def _render_graph(graph: Graph) -> str:
    from virtrep.turtle import serialize_turtle

    return serialize_turtle(graph, {"t": T})


def random_program_text(rng: random.Random, endpoints: list[str], max_rules: int = 5) -> str:
    lines = [
        "@prefix http: <http://www.w3.org/2011/http#> .",
        "@prefix httpm: <http://www.w3.org/2011/http-methods#> .",
        "@prefix math: <http://www.w3.org/2000/10/swap/math#> .",
        f"@prefix t: <{T}> .",
        "",
    ]
    for endpoint in endpoints:
        lines.append(f"[] http:mthd httpm:GET ; http:requestURI <{endpoint}> .")
    lines.append("")

    n_rules = rng.randint(1, max_rules)
    for _ in range(n_rules):
        lines.append(_random_rule(rng))
    return "\n".join(lines) + "\n"


def _pname(iri: str) -> str:
    return "t:" + iri[len(T):]


def _random_rule(rng: random.Random) -> str:
    shape = rng.random()
    if shape < 0.25:
        # transitive-style recursion over one base predicate
        p = _pname(rng.choice(BASE_PREDS))
        return f"{{ ?x {p} ?y . ?y {p} ?z . }} => {{ ?x {p} ?z . }} ."
    if shape < 0.55:
        # reshaping rule over base predicates
        p1, p2 = rng.choice(BASE_PREDS), rng.choice(BASE_PREDS)
        head_p = rng.choice(BASE_PREDS + DERIVED_PREDS)
        if rng.random() < 0.5:
            return f"{{ ?x {_pname(p1)} ?y . }} => {{ ?y {_pname(head_p)} ?x . }} ."
        return (
            f"{{ ?x {_pname(p1)} ?y . ?y {_pname(p2)} ?z . }} "
            f"=> {{ ?x {_pname(head_p)} ?z . }} ."
        )
    if shape < 0.8:
        # guarded arithmetic into a sink predicate
        guard = rng.choice(["math:lessThan", "math:greaterThan", "math:notLessThan", "math:notGreaterThan"])
        k = rng.randint(0, 15)
        op = rng.choice(["math:sum", "math:difference", "math:product"])
        m = rng.randint(1, 4)
        d = _pname(rng.choice(DERIVED_PREDS))
        return (
            f"{{ ?x t:n ?v . ?v {guard} {k} . ( ?v {m} ) {op} ?w . }} "
            f"=> {{ ?x {d} ?w . }} ."
        )
    # quotient with a zero-guard exercised via equalTo/comparison mix
    d = _pname(rng.choice(DERIVED_PREDS))
    k = rng.randint(1, 5)
    return f"{{ ?x t:n ?v . ( ?v {k} ) math:quotient ?w . }} => {{ ?x {d} ?w . }} ."


def random_query_text(rng: random.Random) -> str:
    """A CONSTRUCT whose template only uses WHERE/BIND variables."""
    where = []
    usable = []
    numeric_var = None
    n_patterns = rng.randint(1, 3)
    var_names = iter("abcdef")
    for i in range(n_patterns):
        v1, v2 = next(var_names), next(var_names)
        roll = rng.random()
        if roll < 0.4 or (numeric_var is None and i == n_patterns - 1):
            pred = rng.choice([NUM_PRED] + DERIVED_PREDS)
            where.append(f"?{v1} <{pred}> ?{v2} .")
            numeric_var = v2
        else:
            where.append(f"?{v1} <{rng.choice(BASE_PREDS)}> ?{v2} .")
        usable += [v1, v2]

    constraints = []
    bind_target = None
    if numeric_var and rng.random() < 0.6:
        op = rng.choice([">=", ">", "<", "<=", "=", "!="])
        constraints.append(f"FILTER(?{numeric_var} {op} {rng.randint(0, 12)})")
    if numeric_var and rng.random() < 0.5:
        bind_target = "h"
        expr = rng.choice(
            [f"?{numeric_var} + {rng.randint(1, 5)}", f"?{numeric_var} * 2", f"(?{numeric_var} - 1) / 2"]
        )
        constraints.append(f"BIND({expr} AS ?{bind_target})")

    template = []
    out_preds = iter([f"{T}out{i}" for i in range(4)])
    for _ in range(rng.randint(1, 2)):
        v = rng.choice(usable)
        subj = f"<{T}result>" if rng.random() < 0.4 else f"?{rng.choice(usable)}"
        template.append(f"{subj} <{next(out_preds)}> ?{v} .")
    if bind_target and rng.random() < 0.7:
        template.append(f"<{T}result> <{next(out_preds)}> ?{bind_target} .")
    if rng.random() < 0.25:
        template.append(f"<{T}result> <{T}via> [] .")

    return (
        "CONSTRUCT {\n  " + "\n  ".join(template) + "\n}\nWHERE {\n  "
        + "\n  ".join(where + constraints) + "\n}\n"
    )


# --- independent query oracle ----------------------------------------------


def _oracle_value(expr, binding):
    """Restricted expression evaluation (numbers via Fraction); None on
    any error."""
    if isinstance(expr, Const):
        return expr.term
    if isinstance(expr, VarRef):
        return binding.get(expr.name)
    if isinstance(expr, UnaryOp):
        inner = _oracle_value(expr.operand, binding)
        num = _oracle_number(inner)
        if num is None:
            return None
        if expr.op == "-":
            num = -num
        return _oracle_wrap(num)
    assert isinstance(expr, BinaryOp)
    left = _oracle_value(expr.left, binding)
    right = _oracle_value(expr.right, binding)
    if expr.op in ("=", "!=", "<", "<=", ">", ">="):
        result = _oracle_compare(expr.op, left, right)
        if result is None:
            return None
        from virtrep.terms import boolean

        return boolean(result)
    a, b = _oracle_number(left), _oracle_number(right)
    if a is None or b is None:
        return None
    if expr.op == "+":
        return _oracle_wrap(a + b)
    if expr.op == "-":
        return _oracle_wrap(a - b)
    if expr.op == "*":
        return _oracle_wrap(a * b)
    if b == 0:
        return None
    return _oracle_wrap(a / b, quotient=True)


def _oracle_number(term):
    if isinstance(term, Literal):
        v = term.numeric_value
        if v is not None and not isinstance(v, float):
            return Fraction(v)
    return None


def _oracle_wrap(value: Fraction, quotient: bool = False):
    from decimal import localcontext

    from virtrep.terms import decimal as decimal_literal

    if not quotient and value.denominator == 1:
        return integer(int(value))
    with localcontext() as ctx:
        ctx.prec = 34
        return decimal_literal(Decimal(value.numerator) / Decimal(value.denominator))


def _oracle_compare(op, x, y):
    if not (isinstance(x, Literal) and isinstance(y, Literal)):
        if op == "=":
            return x is not None and y is not None and x == y
        if op == "!=":
            return x is not None and y is not None and x != y
        return None
    a, b = _oracle_number(x), _oracle_number(y)
    if a is None or b is None:
        return None
    return {
        "=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
    }[op]


def oracle_construct(query, graph: Graph) -> Graph:
    """Enumerate-and-filter evaluation of a CONSTRUCT query."""
    from .oracles import brute_match

    out = set()
    for sol in brute_match(list(query.where), graph):
        sol = dict(sol)
        for expr, target in query.binds:
            value = _oracle_value(expr, sol)
            if value is not None:
                sol[target] = value
        keep = True
        for f in query.filters:
            value = _oracle_value(f, sol)
            if not (isinstance(value, Literal) and value.lexical == "true"):
                keep = False
                break
        if not keep:
            continue
        minted = {}
        for pattern in query.template:
            terms = []
            ok = True
            for slot in (pattern.subject, pattern.predicate, pattern.object):
                if isinstance(slot, Variable):
                    term = sol.get(slot.name)
                    if term is None:
                        ok = False
                        break
                elif isinstance(slot, BlankNode):
                    term = minted.setdefault(slot, fresh_blank())
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
