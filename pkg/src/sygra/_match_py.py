"""Interpreted backtracking kernel for morphism search.

The compiled twin in ``_match_cy`` implements exactly this algorithm;
both receive the same pre-compiled integer problem and must produce the
same assignments in the same order. Keep the two in sync.
"""

from __future__ import annotations


def search(
    order: list[int],
    domains: list[list[int]],
    var_sort: list[int],
    checks: list[list[int]],
    rel: list[list[int]],
    inj: list[int],
    host_counts: list[int],
) -> list[tuple[int, ...]]:
    """Enumerate all constraint-satisfying assignments.

    order: static variable order (indices into the global variable set)
    domains: candidate host indices per variable
    var_sort: sort rank per variable
    checks: per variable, flat triples (relation, carrier var, endpoint var)
    rel: six host relation arrays indexed by relation code
    inj: per sort, 1 when images must not repeat
    host_counts: host element count per sort
    """
    n_vars = len(order)
    val = [-1] * len(domains)
    used = [bytearray(count) for count in host_counts]
    results: list[tuple[int, ...]] = []

    def admissible(var: int, candidate: int) -> bool:
        triples = checks[var]
        for i in range(0, len(triples), 3):
            relation = rel[triples[i]]
            carrier = triples[i + 1]
            endpoint = triples[i + 2]
            c_val = candidate if carrier == var else val[carrier]
            e_val = candidate if endpoint == var else val[endpoint]
            if c_val < 0 or e_val < 0:
                continue
            if relation[c_val] != e_val:
                return False
        return True

    def extend(depth: int) -> None:
        if depth == n_vars:
            results.append(tuple(val))
            return
        var = order[depth]
        sort = var_sort[var]
        taken = used[sort]
        check_inj = inj[sort]
        for candidate in domains[var]:
            if check_inj and taken[candidate]:
                continue
            if not admissible(var, candidate):
                continue
            val[var] = candidate
            if check_inj:
                taken[candidate] = 1
            extend(depth + 1)
            val[var] = -1
            if check_inj:
                taken[candidate] = 0

    extend(0)
    return results
