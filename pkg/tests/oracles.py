"""Independent reference implementations used as test oracles.

These deliberately avoid the package's join kernel and semi-naive loop:
pattern matching is cross-product-then-filter over explicit triples, and
chasing is naive whole-graph iteration.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from virtrep.n3 import BuiltinAtom, builtin_order
from virtrep.terms import Graph, IRI, Literal, Triple, Variable, decimal, integer


def brute_match(patterns, graph: Graph):
    """All consistent bindings, by enumerating every |g|^k tuple."""
    triples = list(graph)
    if not patterns:
        return [{}]
    results = []
    seen = set()
    for combo in itertools.product(triples, repeat=len(patterns)):
        binding = {}
        ok = True
        for pattern, triple in zip(patterns, combo):
            for slot, term in (
                (pattern.subject, triple.subject),
                (pattern.predicate, triple.predicate),
                (pattern.object, triple.object),
            ):
                if isinstance(slot, Variable):
                    if slot.name in binding:
                        if binding[slot.name] != term:
                            ok = False
                            break
                    else:
                        binding[slot.name] = term
                elif slot != term:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            key = frozenset(binding.items())
            if key not in seen:
                seen.add(key)
                results.append(binding)
    return results


def binding_set(bindings):
    return {frozenset(b.items()) for b in bindings}


def oracle_builtin(atom: BuiltinAtom, binding):
    """Fraction-based reference for one builtin; returns the updated
    binding or None when unsatisfied."""

    def as_fraction(term):
        if isinstance(term, Variable):
            term = binding.get(term.name)
        if not isinstance(term, Literal):
            return None
        v = term.numeric_value
        if v is None or isinstance(v, float):
            # oracle programs stick to exact numerics
            return None if v is None else Fraction(v)
        return Fraction(v)

    a = as_fraction(atom.inputs[0])
    b = as_fraction(atom.inputs[1])
    if a is None or b is None:
        return None
    name = atom.builtin
    if name == "greaterThan":
        return binding if a > b else None
    if name == "lessThan":
        return binding if a < b else None
    if name == "notGreaterThan":
        return binding if a <= b else None
    if name == "notLessThan":
        return binding if a >= b else None
    if name == "equalTo":
        return binding if a == b else None

    if name == "sum":
        result = a + b
    elif name == "difference":
        result = a - b
    elif name == "product":
        result = a * b
    else:
        if b == 0:
            return None
        result = a / b

    int_inputs = all(
        isinstance((binding.get(t.name) if isinstance(t, Variable) else t).numeric_value, int)
        for t in atom.inputs
    )
    if name != "quotient" and int_inputs and result.denominator == 1:
        lit = integer(int(result))
    else:
        from decimal import Decimal, localcontext

        with localcontext() as ctx:
            ctx.prec = 34
            lit = decimal(Decimal(result.numerator) / Decimal(result.denominator))

    out = atom.output
    if isinstance(out, Variable):
        if out.name in binding:
            existing = binding[out.name]
            if not isinstance(existing, Literal) or existing.numeric_value is None:
                return None
            return binding if Fraction(existing.numeric_value) == result else None
        new = dict(binding)
        new[out.name] = lit
        return new
    if out is not None:
        return binding if out.numeric_value is not None and Fraction(out.numeric_value) == result else None
    return binding


def naive_chase(rules, seed: Graph, max_rounds: int = 200) -> Graph:
    """Whole-graph naive iteration to fixpoint."""
    triples = set(seed)
    for _ in range(max_rounds):
        new = set()
        current = Graph(triples)
        for rule in rules:
            patterns = rule.patterns()
            ordered = builtin_order(rule)
            assert ordered is not None, "oracle expects validated rules"
            for binding in brute_match(patterns, current):
                extended = dict(binding)
                failed = False
                for atom in ordered:
                    extended = oracle_builtin(atom, extended)
                    if extended is None:
                        failed = True
                        break
                if failed:
                    continue
                for head in rule.head:
                    terms = []
                    ok = True
                    for slot in (head.subject, head.predicate, head.object):
                        if isinstance(slot, Variable):
                            term = extended.get(slot.name)
                            if term is None:
                                ok = False
                                break
                            terms.append(term)
                        else:
                            terms.append(slot)
                    if not ok:
                        continue
                    s, p, o = terms
                    if isinstance(s, Literal) or not isinstance(p, IRI):
                        continue
                    new.add(Triple(s, p, o))
        if new <= triples:
            return Graph(triples)
        triples |= new
    raise AssertionError("oracle did not converge")
