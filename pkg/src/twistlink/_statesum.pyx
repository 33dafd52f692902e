# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled state-sum kernel: same contract as twistlink._statesum_py."""

from libc.stdlib cimport malloc, free


cdef int _find(int* parent, int x) nogil:
    cdef int root = x
    cdef int nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def state_counts(int n, edge_u, edge_v, edge_par, long lo, long hi):
    cdef int total_ends = 4 * n
    cdef int m = len(edge_u)
    cdef int* eu = <int*> malloc((m or 1) * sizeof(int))
    cdef int* ev = <int*> malloc((m or 1) * sizeof(int))
    cdef int* ep = <int*> malloc((m or 1) * sizeof(int))
    cdef int* parent = <int*> malloc((total_ends or 1) * sizeof(int))
    cdef int* parr = <int*> malloc((total_ends or 1) * sizeof(int))
    cdef int j, i, base, ra, rb, r, odd, circles, a_count
    cdef long state, state_bits
    if eu == NULL or ev == NULL or ep == NULL or parent == NULL or parr == NULL:
        raise MemoryError()
    for j in range(m):
        eu[j] = edge_u[j]
        ev[j] = edge_v[j]
        ep[j] = edge_par[j]

    counts = {}
    try:
        for state in range(lo, hi):
            for i in range(total_ends):
                parent[i] = i
                parr[i] = 0
            for i in range(n):
                base = 4 * i
                if (state >> i) & 1:
                    ra = _find(parent, base)
                    rb = _find(parent, base + 3)
                    parent[ra] = rb
                    ra = _find(parent, base + 1)
                    rb = _find(parent, base + 2)
                    parent[ra] = rb
                else:
                    ra = _find(parent, base)
                    rb = _find(parent, base + 1)
                    parent[ra] = rb
                    ra = _find(parent, base + 2)
                    rb = _find(parent, base + 3)
                    parent[ra] = rb
            for j in range(m):
                ra = _find(parent, eu[j])
                rb = _find(parent, ev[j])
                if ra != rb:
                    parent[ra] = rb
            for j in range(m):
                r = _find(parent, eu[j])
                parr[r] ^= ep[j]
            circles = 0
            odd = 0
            for i in range(total_ends):
                if _find(parent, i) == i:
                    circles += 1
                    odd += parr[i]
            a_count = n
            state_bits = state
            while state_bits:
                a_count -= state_bits & 1
                state_bits >>= 1
            key = (a_count, circles - odd, odd)
            if key in counts:
                counts[key] += 1
            else:
                counts[key] = 1
    finally:
        free(eu)
        free(ev)
        free(ep)
        free(parent)
        free(parr)
    return counts
