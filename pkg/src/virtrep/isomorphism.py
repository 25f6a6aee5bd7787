"""Graph isomorphism up to blank-node relabeling (test oracle and
round-trip checker).

Ground triples must match exactly; blank nodes are matched by color
refinement followed by backtracking over same-color candidates. Search is
bounded: graphs with more blank nodes than ``blank_node_limit`` raise
IsomorphismUndecided instead of risking a blow-up.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional

from .errors import IsomorphismUndecided
from .terms import BlankNode, Graph, Triple

DEFAULT_BLANK_NODE_LIMIT = 20


def _blank_nodes(g: Graph) -> set[BlankNode]:
    nodes = set()
    for t in g:
        if isinstance(t.subject, BlankNode):
            nodes.add(t.subject)
        if isinstance(t.object, BlankNode):
            nodes.add(t.object)
    return nodes


def _split(g: Graph) -> tuple[set[Triple], list[Triple]]:
    ground, blank = set(), []
    for t in g:
        if isinstance(t.subject, BlankNode) or isinstance(t.object, BlankNode):
            blank.append(t)
        else:
            ground.add(t)
    return ground, blank


def _refine_colors(blank_triples: list[Triple], nodes: set[BlankNode]) -> dict[BlankNode, int]:
    colors = {b: 0 for b in nodes}
    incident: dict[BlankNode, list[tuple[str, Triple]]] = {b: [] for b in nodes}
    for t in blank_triples:
        if isinstance(t.subject, BlankNode):
            incident[t.subject].append(("s", t))
        if isinstance(t.object, BlankNode):
            incident[t.object].append(("o", t))

    def other_key(role: str, t: Triple):
        other = t.object if role == "s" else t.subject
        if isinstance(other, BlankNode):
            return ("bnode", colors[other])
        return ("term", repr(other))

    for _ in range(max(1, len(nodes))):
        signature = {
            b: hash(tuple(sorted((role, t.predicate.value, other_key(role, t)) for role, t in incident[b])))
            for b in nodes
        }
        palette = {sig: i for i, sig in enumerate(sorted(set(signature.values())))}
        new_colors = {b: palette[signature[b]] for b in nodes}
        if new_colors == colors:
            break
        colors = new_colors
    return colors


def graph_isomorphic(
    g1: Graph, g2: Graph, blank_node_limit: int = DEFAULT_BLANK_NODE_LIMIT
) -> bool:
    """True iff some blank-node bijection maps g1 exactly onto g2."""
    if len(g1) != len(g2):
        return False
    ground1, blank1 = _split(g1)
    ground2, blank2 = _split(g2)
    if ground1 != ground2 or len(blank1) != len(blank2):
        return False
    if not blank1:
        return True

    nodes1, nodes2 = _blank_nodes(g1), _blank_nodes(g2)
    if len(nodes1) != len(nodes2):
        return False
    if len(nodes1) > blank_node_limit:
        raise IsomorphismUndecided(
            f"{len(nodes1)} blank nodes exceeds the search bound of {blank_node_limit}"
        )

    colors1 = _refine_colors(blank1, nodes1)
    colors2 = _refine_colors(blank2, nodes2)
    # Color ids are deterministic functions of structure, so the histograms
    # must agree for isomorphic graphs.
    if Counter(colors1.values()) != Counter(colors2.values()):
        return False

    by_color2: dict[int, list[BlankNode]] = {}
    for b, c in colors2.items():
        by_color2.setdefault(c, []).append(b)
    candidates = {b: by_color2.get(colors1[b], []) for b in nodes1}
    if any(not c for c in candidates.values()):
        return False

    blank2_set = set(blank2)
    triples_of: dict[BlankNode, list[Triple]] = {b: [] for b in nodes1}
    for t in blank1:
        if isinstance(t.subject, BlankNode):
            triples_of[t.subject].append(t)
        if isinstance(t.object, BlankNode) and t.object != t.subject:
            triples_of[t.object].append(t)

    order = sorted(nodes1, key=lambda b: (len(candidates[b]), b.label))
    mapping: dict[BlankNode, BlankNode] = {}
    used: set[BlankNode] = set()

    def mapped(term):
        if isinstance(term, BlankNode):
            return mapping.get(term)
        return term

    def consistent(b: BlankNode) -> bool:
        for t in triples_of[b]:
            s, o = mapped(t.subject), mapped(t.object)
            if s is None or o is None:
                continue  # involves a still-unassigned bnode
            if Triple(s, t.predicate, o) not in blank2_set:
                return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        b = order[i]
        for cand in candidates[b]:
            if cand in used:
                continue
            mapping[b] = cand
            used.add(cand)
            if consistent(b) and backtrack(i + 1):
                return True
            del mapping[b]
            used.discard(cand)
        return False

    return backtrack(0)


def assert_isomorphic(g1: Graph, g2: Graph, context: Optional[str] = None) -> None:
    if not graph_isomorphic(g1, g2):
        from .turtle import serialize_turtle

        msg = "graphs are not isomorphic"
        if context:
            msg = f"{msg} ({context})"
        raise AssertionError(f"{msg}\n--- left ---\n{serialize_turtle(g1)}\n--- right ---\n{serialize_turtle(g2)}")
