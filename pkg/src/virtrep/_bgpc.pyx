# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled BGP join kernel; semantics mirror ``_bgp_py.join`` exactly."""

from cpython.list cimport PyList_GET_ITEM, PyList_GET_SIZE


def join(list patterns, dict lookup, int nvars, delta_lookup=None, int delta_at=-1):
    cdef int k = len(patterns)
    cdef list assign = [-1] * nvars
    cdef list results = []
    _rec(0, k, patterns, lookup, delta_lookup, delta_at, assign, results)
    return results


cdef void _rec(int i, int k, list patterns, dict lookup, object delta_lookup,
               int delta_at, list assign, list results):
    if i == k:
        results.append(tuple(assign))
        return

    cdef tuple pat = <tuple> patterns[i]
    cdef int raw_s = <int> pat[0]
    cdef int raw_p = <int> pat[1]
    cdef int raw_o = <int> pat[2]
    cdef int ps = raw_s
    cdef int pp = raw_p
    cdef int po = raw_o
    if ps < 0:
        ps = <int> assign[-ps - 1]
    if pp < 0:
        pp = <int> assign[-pp - 1]
    if po < 0:
        po = <int> assign[-po - 1]

    cdef object src = delta_lookup if i == delta_at else lookup
    cdef object candidates = (<dict> src).get((ps, pp, po))
    if candidates is None:
        return

    cdef list cands = <list> candidates
    cdef Py_ssize_t n = PyList_GET_SIZE(cands)
    cdef Py_ssize_t j
    cdef tuple cand
    cdef int ts, tp, to, v, cur
    cdef int b0, b1, b2  # vars bound at this level, -1 = none
    cdef bint ok

    for j in range(n):
        cand = <tuple> PyList_GET_ITEM(cands, j)
        ts = <int> cand[0]
        tp = <int> cand[1]
        to = <int> cand[2]
        b0 = b1 = b2 = -1
        ok = True

        if raw_s < 0:
            v = -raw_s - 1
            cur = <int> assign[v]
            if cur == -1:
                assign[v] = ts
                b0 = v
            elif cur != ts:
                ok = False
        if ok and raw_p < 0:
            v = -raw_p - 1
            cur = <int> assign[v]
            if cur == -1:
                assign[v] = tp
                b1 = v
            elif cur != tp:
                ok = False
        if ok and raw_o < 0:
            v = -raw_o - 1
            cur = <int> assign[v]
            if cur == -1:
                assign[v] = to
                b2 = v
            elif cur != to:
                ok = False

        if ok:
            _rec(i + 1, k, patterns, lookup, delta_lookup, delta_at, assign, results)

        if b2 >= 0:
            assign[b2] = -1
        if b1 >= 0:
            assign[b1] = -1
        if b0 >= 0:
            assign[b0] = -1
