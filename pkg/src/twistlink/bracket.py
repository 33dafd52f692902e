"""Twisted bracket state sum, twisted Jones polynomial, Jones specialization.

The bracket of a diagram with n classical crossings is the sum over all
2^n smoothing states of

    A^(a-b) * (-A^-2 - A^2)^c * M^d

where a/b count the two smoothing kinds, c counts state circles with even
bar parity and d those with odd parity.  At every crossing the a-smoothing
joins end slots (0,1) and (2,3); this is the reconnection that respects
orientation exactly at positive crossings, which pins the chirality of all
reported polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import AbstractCrossing, AbstractEdge, AbstractLink, make_abstract, writhe
from .errors import NotDivisibleError, StateSpaceError
from .poly import DELTA, LaurentBipoly, M, minus_a_power, poly_div_exact, poly_eval_M
from .statesum import state_counts

DEFAULT_STATE_CAP = 24


@dataclass(frozen=True)
class StateSummary:
    """Circle statistics of one smoothing state (bit i = choice at crossing i)."""

    state: int
    a_count: int
    b_count: int
    even_circles: int
    odd_circles: int


def _compiled_ends(a: AbstractLink):
    """Index crossings (sorted by id) and edges into flat end arrays."""
    order = sorted(c.cid for c in a.crossings)
    index = {cid: i for i, cid in enumerate(order)}
    edge_u: list[int] = []
    edge_v: list[int] = []
    edge_par: list[int] = []
    for e in sorted(a.real_edges(), key=lambda e: e.eid):
        tc, ts = e.tail
        hc, hs = e.head
        edge_u.append(4 * index[tc] + ts)
        edge_v.append(4 * index[hc] + hs)
        edge_par.append(e.parity)
    return len(order), edge_u, edge_v, edge_par


def _loop_counts(a: AbstractLink) -> tuple[int, int]:
    evens = sum(1 for e in a.loops() if e.parity == 0)
    odds = sum(1 for e in a.loops() if e.parity == 1)
    return evens, odds


def state_summary(a: AbstractLink, state: int) -> StateSummary:
    """Smooth every crossing per the state bits and count circles by parity."""
    n, edge_u, edge_v, edge_par = _compiled_ends(a)
    if not 0 <= state < (1 << n):
        raise ValueError(f"state index {state} out of range for {n} crossings")
    counts = state_counts(n, edge_u, edge_v, edge_par, state, state + 1)
    ((a_count, even, odd),) = counts.keys()
    loop_even, loop_odd = _loop_counts(a)
    return StateSummary(
        state=state,
        a_count=a_count,
        b_count=n - a_count,
        even_circles=even + loop_even,
        odd_circles=odd + loop_odd,
    )


def bracket(
    a: AbstractLink,
    cap: int = DEFAULT_STATE_CAP,
    state_range: tuple[int, int] | None = None,
) -> LaurentBipoly:
    """The twisted bracket polynomial; the empty diagram gives 1.

    ``state_range`` restricts the sum to a half-open state interval, which
    lets callers evaluate the sum as a deterministic parallel reduction:
    partial sums over a partition add up to the sequential result exactly.
    """
    n, edge_u, edge_v, edge_par = _compiled_ends(a)
    if n > cap:
        raise StateSpaceError(
            f"state space too large: {n} crossings exceeds cap {cap}"
        )
    lo, hi = state_range if state_range is not None else (0, 1 << n)
    counts = state_counts(n, edge_u, edge_v, edge_par, lo, hi)
    loop_even, loop_odd = _loop_counts(a)
    total = LaurentBipoly.zero()
    for (a_count, even, odd), mult in sorted(counts.items()):
        term = LaurentBipoly.monomial(mult, 2 * a_count - n, 0)
        term = term * DELTA ** (even + loop_even)
        term = term * M ** (odd + loop_odd)
        total = total + term
    return total


def twisted_jones(a: AbstractLink, cap: int = DEFAULT_STATE_CAP) -> LaurentBipoly:
    """(-A)^(-3w) times the bracket."""
    return minus_a_power(-3 * writhe(a)) * bracket(a, cap=cap)


def jones(a: AbstractLink, cap: int = DEFAULT_STATE_CAP) -> LaurentBipoly:
    """Jones specialization: substitute M -> -A^-2-A^2, divide by -A^-2-A^2.

    The unknot normalizes to 1.  Divisibility is guaranteed for every
    valid input; failure raises NotDivisibleError.
    """
    substituted = poly_eval_M(twisted_jones(a, cap=cap), DELTA)
    if substituted.is_zero():
        return LaurentBipoly.zero()
    quotient = poly_div_exact(substituted, DELTA)
    if quotient is None:
        raise NotDivisibleError("twisted Jones specialization not divisible")
    return quotient


def kamada_check(j: LaurentBipoly, n_components: int) -> bool:
    """Exponent condition satisfied by Jones polynomials of two-colorable links.

    True iff every A-exponent is 0 mod 4 for an odd number of link
    components, and 2 mod 4 for an even number.
    """
    if j.is_zero():
        raise ValueError("kamada_check needs a nonzero polynomial")
    if not j.is_m_free():
        raise ValueError("kamada_check needs an M-free polynomial")
    residue = 0 if n_components % 2 else 2
    return all(e % 4 == residue for e in j.a_exponents())


# ---------------------------------------------------------------------------
# Smoothing surgery (one-step skein resolution)
# ---------------------------------------------------------------------------


def smooth(a: AbstractLink, cid: str, choice: int) -> AbstractLink:
    """Replace crossing ``cid`` by its a-smoothing (choice 0) or b-smoothing (1).

    The resulting circles need not respect the original orientations (the
    b-smoothing at a positive crossing joins two incoming ends), so the
    fused diagram's circles are retraced and reoriented coherently, and the
    remaining crossings' slot anchors fixed up.  The bracket does not see
    orientations, so this is harmless.
    """
    if choice == 0:
        pairs = ((0, 1), (2, 3))
    else:
        pairs = ((0, 3), (1, 2))
    partner: dict[tuple[str, int], tuple[str, int]] = {}
    for x, y in pairs:
        partner[(cid, x)] = (cid, y)
        partner[(cid, y)] = (cid, x)

    at_end: dict[tuple[str, int], tuple[str, bool]] = {}
    for e in a.real_edges():
        at_end[e.tail] = (e.eid, True)  # True: edge points away from this end
        at_end[e.head] = (e.eid, False)
    edges_by_id = {e.eid: e for e in a.edges}

    def far_end(eid: str, forward: bool):
        e = edges_by_id[eid]
        return e.head if forward else e.tail

    new_loops: list[AbstractEdge] = list(a.loops())
    arcs: dict[str, tuple[tuple[str, int], tuple[str, int], int]] = {}
    end_to_arc: dict[tuple[str, int], str] = {}
    visited: set[str] = set()

    # Chains anchored at the remaining crossings' ends (arbitrary orientation).
    anchor_ends = [
        (c.cid, i)
        for c in sorted(a.crossings, key=lambda c: c.cid)
        if c.cid != cid
        for i in range(4)
    ]
    for start in anchor_ends:
        eid, forward = at_end[start]
        if eid in visited:
            continue
        chain = [eid]
        parity = edges_by_id[eid].parity
        cur = far_end(eid, forward)
        while cur[0] == cid:
            nxt = partner[cur]
            eid2, fwd2 = at_end[nxt]
            chain.append(eid2)
            parity ^= edges_by_id[eid2].parity
            cur = far_end(eid2, fwd2)
        visited.update(chain)
        new_id = min(chain)
        arcs[new_id] = (start, cur, parity % 2)
        end_to_arc[start] = new_id
        end_to_arc[cur] = new_id

    # Circles living entirely on the removed crossing.
    for e in sorted(a.real_edges(), key=lambda e: e.eid):
        if e.eid in visited:
            continue
        chain = [e.eid]
        parity = e.parity
        cur = far_end(e.eid, True)
        while True:
            nxt = partner[cur]
            eid2, fwd2 = at_end[nxt]
            if eid2 == e.eid and fwd2:
                break
            chain.append(eid2)
            parity ^= edges_by_id[eid2].parity
            cur = far_end(eid2, fwd2)
        visited.update(chain)
        new_loops.append(AbstractEdge(min(chain), None, None, parity % 2))

    # Orient each circle of the smoothed diagram coherently: follow arcs
    # through the surviving crossings (slot s continues at slot s+2).
    oriented: dict[str, tuple[tuple[str, int], tuple[str, int]]] = {}
    for aid in sorted(arcs):
        if aid in oriented:
            continue
        end_a, end_b, _ = arcs[aid]
        cur_arc, tail_end, head_end = aid, end_a, end_b
        while cur_arc not in oriented:
            oriented[cur_arc] = (tail_end, head_end)
            c2, s2 = head_end
            out_end = (c2, (s2 + 2) % 4)
            nxt_arc = end_to_arc[out_end]
            na, nb, _ = arcs[nxt_arc]
            cur_arc, tail_end, head_end = nxt_arc, out_end, (nb if na == out_end else na)

    new_edges = new_loops + [
        AbstractEdge(aid, oriented[aid][0], oriented[aid][1], arcs[aid][2])
        for aid in sorted(arcs)
    ]

    # Rebuild remaining crossings; re-anchor where the under strand reversed.
    new_crossings: list[AbstractCrossing] = []
    remap: dict[tuple[str, int], tuple[str, int]] = {}
    by_new_id = {e.eid: e for e in new_edges}
    for c in a.crossings:
        if c.cid == cid:
            continue
        slot_edges = [end_to_arc[(c.cid, i)] for i in range(4)]
        shift = 0 if by_new_id[slot_edges[0]].head == (c.cid, 0) else 2
        new_crossings.append(
            AbstractCrossing(
                c.cid, tuple(slot_edges[(i + shift) % 4] for i in range(4))
            )
        )
        for i in range(4):
            remap[(c.cid, (i + shift) % 4)] = (c.cid, i)

    fixed_edges = [
        AbstractEdge(
            e.eid,
            remap.get(e.tail, e.tail) if e.tail else None,
            remap.get(e.head, e.head) if e.head else None,
            e.parity,
        )
        for e in new_edges
    ]
    return make_abstract(new_crossings, fixed_edges)
