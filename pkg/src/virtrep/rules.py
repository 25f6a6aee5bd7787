"""Forward-chaining evaluation of configuration programs.

``evaluate`` dispatches the program's seed HTTP requests through the
supplied collector, merges the responses with the seed graph, then chases
the derivation rules to a fixpoint with semi-naive iteration: each round
joins one body pattern against the newly derived triples and the rest
against the full graph, so nothing is re-derived from scratch.

Arithmetic is exact: integer and decimal operands go through rationals,
and the result is an integer, an exact decimal, or (for quotients whose
expansion does not terminate) a decimal rounded at high precision. Any
float operand switches the operation to binary floating point.
"""

from __future__ import annotations

from fractions import Fraction
from decimal import Decimal, localcontext
from typing import Callable, Optional

from . import bgp
from .bgp import GraphIndex, TriplePattern
from .errors import NonTerminationError, SafetyError, TypeMismatchError
from .n3 import BuiltinAtom, Program, Rule, builtin_order
from .terms import (
    DIVISION_PRECISION,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    Variable,
    decimal as decimal_literal,
    double as double_literal,
    integer as integer_literal,
    merge,
)

DEFAULT_ROUND_LIMIT = 100

# fetcher contract: fetcher(requests) -> (Graph, FetchReport)
Fetcher = Callable


def _fraction_to_decimal(value: Fraction) -> Decimal:
    num, den = value.numerator, value.denominator
    with localcontext() as ctx:
        ctx.prec = DIVISION_PRECISION
        return Decimal(num) / Decimal(den)


def apply_builtin(builtin: str, inputs: list[Literal], output_hint=None):
    """Evaluate one builtin over bound numeric inputs.

    Returns a result Literal for arithmetic, True for a satisfied
    comparison, and False when the atom cannot be satisfied (failed
    comparison or division by zero). Non-numeric input raises
    TypeMismatchError.
    """
    values = []
    for lit in inputs:
        if not isinstance(lit, Literal):
            raise TypeMismatchError(f"builtin input is not a literal: {lit!r}")
        v = lit.numeric_value
        if v is None:
            raise TypeMismatchError(f"builtin input is not numeric: {lit!r}")
        values.append(v)
    if len(values) != 2:
        raise TypeMismatchError(f"math:{builtin} takes exactly two inputs")
    a, b = values

    if builtin in ("greaterThan", "lessThan", "notGreaterThan", "notLessThan", "equalTo"):
        if isinstance(a, float) or isinstance(b, float):
            fa, fb = float(a), float(b)
        else:
            fa, fb = Fraction(a), Fraction(b)
        return {
            "greaterThan": fa > fb,
            "lessThan": fa < fb,
            "notGreaterThan": fa <= fb,
            "notLessThan": fa >= fb,
            "equalTo": fa == fb,
        }[builtin]

    if isinstance(a, float) or isinstance(b, float):
        fa, fb = float(a), float(b)
        if builtin == "sum":
            return double_literal(fa + fb)
        if builtin == "difference":
            return double_literal(fa - fb)
        if builtin == "product":
            return double_literal(fa * fb)
        if fb == 0.0:
            return False
        return double_literal(fa / fb)

    ra, rb = Fraction(a), Fraction(b)
    if builtin == "sum":
        result = ra + rb
    elif builtin == "difference":
        result = ra - rb
    elif builtin == "product":
        result = ra * rb
    else:  # quotient
        if rb == 0:
            return False
        return decimal_literal(_fraction_to_decimal(ra / rb))
    if isinstance(a, int) and isinstance(b, int):
        return integer_literal(int(result))
    return decimal_literal(_fraction_to_decimal(result))


def _resolve(term, binding: dict[str, Term]):
    if isinstance(term, Variable):
        return binding.get(term.name)
    return term


def _numeric_equal(x: Literal, y: Literal) -> bool:
    a, b = x.numeric_value, y.numeric_value
    if a is None or b is None:
        return False
    if isinstance(a, float) or isinstance(b, float):
        return float(a) == float(b)
    return Fraction(a) == Fraction(b)


def apply_builtins(ordered: list[BuiltinAtom], binding: dict[str, Term]) -> Optional[dict[str, Term]]:
    """Extend/filter one binding through the rule's builtins; None when any
    atom is unsatisfied (including type mismatches, which simply stop the
    rule from firing for that binding)."""
    for atom in ordered:
        inputs = [_resolve(t, binding) for t in atom.inputs]
        try:
            result = apply_builtin(atom.builtin, inputs)
        except TypeMismatchError:
            return None
        if result is False:
            return None
        if result is True:
            continue
        # arithmetic result
        out = atom.output
        if isinstance(out, Variable):
            current = binding.get(out.name)
            if current is None:
                binding[out.name] = result
            elif not (isinstance(current, Literal) and _numeric_equal(current, result)):
                return None
        else:
            if not _numeric_equal(out, result):
                return None
    return binding


class _CompiledRule:
    __slots__ = ("rule", "encoded", "var_names", "ordered_builtins", "head")

    def __init__(self, rule: Rule, rule_index: int, index: GraphIndex):
        self.rule = rule
        ordered = builtin_order(rule)
        if ordered is None:
            raise SafetyError(rule_index, "?", "rule builtins are not orderable")
        self.ordered_builtins = ordered
        var_ids: dict[str, int] = {}
        self.encoded = []
        for pat in rule.patterns():
            slots = []
            for term in (pat.subject, pat.predicate, pat.object):
                if isinstance(term, Variable):
                    vid = var_ids.setdefault(term.name, len(var_ids))
                    slots.append(-vid - 1)
                else:
                    slots.append(index.intern(term))
            self.encoded.append(tuple(slots))
        self.var_names = list(var_ids)
        self.head = rule.head


def _instantiate(pattern: TriplePattern, binding: dict[str, Term]) -> Optional[Triple]:
    s = _resolve(pattern.subject, binding)
    p = _resolve(pattern.predicate, binding)
    o = _resolve(pattern.object, binding)
    if s is None or p is None or o is None:
        return None
    if isinstance(s, Literal) or not isinstance(p, IRI):
        return None
    return Triple(s, p, o)


def chase(rules, seed: Graph, round_limit: int = DEFAULT_ROUND_LIMIT) -> Graph:
    """Forward-chain ``rules`` over ``seed`` to a fixpoint."""
    if not rules:
        return seed
    index = GraphIndex()
    facts: dict[tuple[int, int, int], Triple] = {}
    for t in seed:
        facts[index.add(t)] = t
    compiled = [_CompiledRule(r, i, index) for i, r in enumerate(rules)]

    delta = list(facts)
    rounds = 0
    while True:
        rounds += 1
        if rounds > round_limit:
            raise NonTerminationError(round_limit)
        delta_lookup: dict = {}
        for key in delta:
            s, p, o = key
            for ms, mp, mo in bgp._MASKS:
                mask = (s if ms else -1, p if mp else -1, o if mo else -1)
                delta_lookup.setdefault(mask, []).append(key)

        pending: dict[tuple[int, int, int], Triple] = {}
        for cr in compiled:
            if not cr.encoded:
                # no body patterns: fires once, on the first round
                chunks = [[()]] if rounds == 1 else []
            elif rounds == 1:
                # first round sees everything as delta; one pass suffices
                chunks = [
                    bgp.join_encoded(cr.encoded, index.lookup, len(cr.var_names), delta_lookup, 0)
                ]
            else:
                chunks = [
                    bgp.join_encoded(cr.encoded, index.lookup, len(cr.var_names), delta_lookup, di)
                    for di in range(len(cr.encoded))
                ]
            seen = set()
            for chunk in chunks:
                for assignment in chunk:
                    if assignment in seen:
                        continue
                    seen.add(assignment)
                    binding = {
                        name: index.terms[assignment[i]] for i, name in enumerate(cr.var_names)
                    }
                    extended = apply_builtins(cr.ordered_builtins, binding)
                    if extended is None:
                        continue
                    for head_pattern in cr.head:
                        new = _instantiate(head_pattern, extended)
                        if new is None:
                            continue
                        key = (
                            index.intern(new.subject),
                            index.intern(new.predicate),
                            index.intern(new.object),
                        )
                        if key not in facts and key not in pending:
                            pending[key] = new

        if not pending:
            break
        delta = []
        for key, triple in pending.items():
            index.add(triple)
            facts[key] = triple
            delta.append(key)

    return Graph(facts.values())


def evaluate(
    program: Program,
    seed: Graph,
    fetcher: Optional[Fetcher] = None,
    round_limit: int = DEFAULT_ROUND_LIMIT,
) -> Graph:
    """Run a program: dispatch its request directives through ``fetcher``,
    merge the responses with ``seed``, and chase the rules to fixpoint.

    May raise CollectionFailed (propagated from the fetcher's failure
    policy) and NonTerminationError (round limit exceeded).
    """
    graph = seed
    if program.requests:
        if fetcher is None:
            raise ValueError("program has request directives but no fetcher was supplied")
        fetched, _report = fetcher(list(program.requests))
        graph = merge(seed, fetched)
    return chase(program.rules, graph, round_limit)
