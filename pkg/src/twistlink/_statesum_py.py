"""Pure-Python state-sum kernel; fallback when the compiled one is absent.

Counts, over a range of smoothing states, how many states realize each
(a_count, even_circles, odd_circles) triple.  Crossing i contributes ends
4i..4i+3; state bit i = 0 selects the a-smoothing joining (0,1) and (2,3),
bit 1 the b-smoothing joining (0,3) and (1,2).
"""

from __future__ import annotations


def state_counts(
    n: int,
    edge_u: list[int],
    edge_v: list[int],
    edge_par: list[int],
    lo: int,
    hi: int,
) -> dict[tuple[int, int, int], int]:
    total_ends = 4 * n
    m = len(edge_u)
    counts: dict[tuple[int, int, int], int] = {}
    parent = list(range(total_ends))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for state in range(lo, hi):
        for i in range(total_ends):
            parent[i] = i
        for i in range(n):
            base = 4 * i
            if (state >> i) & 1:
                pairs = ((base, base + 3), (base + 1, base + 2))
            else:
                pairs = ((base, base + 1), (base + 2, base + 3))
            for x, y in pairs:
                parent[find(x)] = find(y)
        for j in range(m):
            parent[find(edge_u[j])] = find(edge_v[j])
        parity: dict[int, int] = {}
        for j in range(m):
            r = find(edge_u[j])
            parity[r] = parity.get(r, 0) ^ edge_par[j]
        roots = {find(i) for i in range(total_ends)}
        odd = sum(parity.get(r, 0) for r in roots)
        even = len(roots) - odd
        a_count = n - bin(state).count("1")
        key = (a_count, even, odd)
        counts[key] = counts.get(key, 0) + 1
    return counts
