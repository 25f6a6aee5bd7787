"""Pure-Python BGP join kernel.

Semantics must stay identical to the compiled kernel in ``_bgpc.pyx``;
``tests/test_bgp.py`` checks parity on random inputs when both are built.

Patterns are int triples: slots >= 0 are interned term ids, slot -v-1 is
variable v. ``lookup`` maps (s|-1, p|-1, o|-1) masks to candidate triples.
When ``delta_at`` is a pattern position, that single pattern draws its
candidates from ``delta_lookup`` instead (semi-naive evaluation).
"""

from __future__ import annotations

_WILD = -1


def join(patterns, lookup, nvars, delta_lookup=None, delta_at=-1):
    k = len(patterns)
    assign = [-1] * nvars
    results: list[tuple[int, ...]] = []

    def rec(i: int) -> None:
        if i == k:
            results.append(tuple(assign))
            return
        ps, pp, po = patterns[i]
        if ps < 0:
            ps = assign[-ps - 1]
        if pp < 0:
            pp = assign[-pp - 1]
        if po < 0:
            po = assign[-po - 1]
        src = delta_lookup if i == delta_at else lookup
        candidates = src.get((ps, pp, po))
        if not candidates:
            return
        raw_s, raw_p, raw_o = patterns[i]
        for ts, tp, to in candidates:
            newly = []
            ok = True
            for slot, tv in ((raw_s, ts), (raw_p, tp), (raw_o, to)):
                if slot < 0:
                    v = -slot - 1
                    cur = assign[v]
                    if cur == -1:
                        assign[v] = tv
                        newly.append(v)
                    elif cur != tv:
                        ok = False
                        break
            if ok:
                rec(i + 1)
            for v in newly:
                assign[v] = -1

    rec(0)
    return results
