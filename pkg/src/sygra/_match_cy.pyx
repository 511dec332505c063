# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled backtracking kernel for morphism search.

Mirrors ``_match_py.search`` exactly: same pre-compiled integer
problem in, same assignments in the same order out. Keep the two in
sync.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset


cdef inline void _fail(void* p) except *:
    if p == NULL:
        raise MemoryError()


def search(
    list order,
    list domains,
    list var_sort,
    list checks,
    list rel,
    list inj,
    list host_counts,
):
    """Enumerate all constraint-satisfying assignments.

    See ``_match_py.search`` for the parameter contract.
    """
    cdef Py_ssize_t n_vars = len(order)
    cdef Py_ssize_t n_all = len(domains)
    cdef Py_ssize_t n_sorts = len(host_counts)
    cdef Py_ssize_t n_rel = len(rel)
    cdef Py_ssize_t i, j, k, total

    cdef int* order_c = <int*> malloc(max(n_vars, 1) * sizeof(int))
    _fail(order_c)
    for i in range(n_vars):
        order_c[i] = order[i]

    cdef int* sort_c = <int*> malloc(max(n_all, 1) * sizeof(int))
    cdef long* dom_off = <long*> malloc((n_all + 1) * sizeof(long))
    cdef long* chk_off = <long*> malloc((n_all + 1) * sizeof(long))
    _fail(sort_c); _fail(dom_off); _fail(chk_off)

    total = 0
    for i in range(n_all):
        sort_c[i] = var_sort[i]
        dom_off[i] = total
        total += len(domains[i])
    dom_off[n_all] = total
    cdef int* dom_val = <int*> malloc(max(total, 1) * sizeof(int))
    _fail(dom_val)
    total = 0
    for i in range(n_all):
        seq = domains[i]
        for j in range(len(seq)):
            dom_val[total] = seq[j]
            total += 1

    total = 0
    for i in range(n_all):
        chk_off[i] = total
        total += len(checks[i])
    chk_off[n_all] = total
    cdef int* chk_dat = <int*> malloc(max(total, 1) * sizeof(int))
    _fail(chk_dat)
    total = 0
    for i in range(n_all):
        seq = checks[i]
        for j in range(len(seq)):
            chk_dat[total] = seq[j]
            total += 1

    cdef long* rel_off = <long*> malloc((n_rel + 1) * sizeof(long))
    _fail(rel_off)
    total = 0
    for i in range(n_rel):
        rel_off[i] = total
        total += len(rel[i])
    rel_off[n_rel] = total
    cdef int* rel_dat = <int*> malloc(max(total, 1) * sizeof(int))
    _fail(rel_dat)
    total = 0
    for i in range(n_rel):
        seq = rel[i]
        for j in range(len(seq)):
            rel_dat[total] = seq[j]
            total += 1

    cdef int* inj_c = <int*> malloc(max(n_sorts, 1) * sizeof(int))
    cdef long* used_off = <long*> malloc((n_sorts + 1) * sizeof(long))
    _fail(inj_c); _fail(used_off)
    total = 0
    for i in range(n_sorts):
        inj_c[i] = inj[i]
        used_off[i] = total
        total += host_counts[i]
    used_off[n_sorts] = total
    cdef char* used = <char*> malloc(max(total, 1) * sizeof(char))
    _fail(used)
    memset(used, 0, max(total, 1))

    cdef int* val = <int*> malloc(max(n_all, 1) * sizeof(int))
    cdef long* cursor = <long*> malloc((n_vars + 1) * sizeof(long))
    _fail(val); _fail(cursor)
    for i in range(n_all):
        val[i] = -1

    results = []
    cdef Py_ssize_t depth = 0
    cdef int var, cand, sort, carrier, endpoint, c_val, e_val, ok, advanced
    cdef long pos, t
    cursor[0] = 0

    try:
        while True:
            if depth == n_vars:
                results.append(tuple([val[i] for i in range(n_all)]))
                depth -= 1
                if depth < 0:
                    break
                var = order_c[depth]
                sort = sort_c[var]
                if inj_c[sort]:
                    used[used_off[sort] + val[var]] = 0
                val[var] = -1
                continue
            var = order_c[depth]
            sort = sort_c[var]
            advanced = 0
            pos = cursor[depth]
            while pos < dom_off[var + 1] - dom_off[var]:
                cand = dom_val[dom_off[var] + pos]
                pos += 1
                if inj_c[sort] and used[used_off[sort] + cand]:
                    continue
                ok = 1
                t = chk_off[var]
                while t < chk_off[var + 1]:
                    carrier = chk_dat[t + 1]
                    endpoint = chk_dat[t + 2]
                    c_val = cand if carrier == var else val[carrier]
                    e_val = cand if endpoint == var else val[endpoint]
                    if c_val >= 0 and e_val >= 0:
                        if rel_dat[rel_off[chk_dat[t]] + c_val] != e_val:
                            ok = 0
                            break
                    t += 3
                if not ok:
                    continue
                val[var] = cand
                if inj_c[sort]:
                    used[used_off[sort] + cand] = 1
                cursor[depth] = pos
                depth += 1
                cursor[depth] = 0
                advanced = 1
                break
            if advanced:
                continue
            depth -= 1
            if depth < 0:
                break
            var = order_c[depth]
            sort = sort_c[var]
            if inj_c[sort]:
                used[used_off[sort] + val[var]] = 0
            val[var] = -1
    finally:
        free(order_c); free(sort_c); free(dom_off); free(dom_val)
        free(chk_off); free(chk_dat); free(rel_off); free(rel_dat)
        free(inj_c); free(used_off); free(used); free(val); free(cursor)

    return results
