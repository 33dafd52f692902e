"""Twisted link diagram types, TLD parser/serializer, validation, projection.

Two levels of structure:

* ``PlanarDiagram`` -- the parsed artifact: a planar combinatorial map with
  classical 4-valent crossings (slot 0 = incoming under-strand, slot 2 =
  outgoing under-strand, slots listed counterclockwise), virtual crossings
  (strands slot0->slot2 and slot1->slot3), crossing-free loop components,
  and per-edge bar counts.

* ``AbstractLink`` -- the stable core every invariant consumes: classical
  crossings only, edges carrying bar *parity*.  Virtual crossings are
  planar drawing artifacts and disappear under projection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import TLDParseError

Slot = tuple[str, bool]  # (edge label, is_out): True = the edge's tail sits here
End = tuple[str, int]  # (vertex id, slot index)


# ---------------------------------------------------------------------------
# Planar diagrams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassicalCrossing:
    cid: str
    slots: tuple[Slot, Slot, Slot, Slot]


@dataclass(frozen=True)
class VirtualCrossing:
    cid: str
    slots: tuple[Slot, Slot, Slot, Slot]


@dataclass(frozen=True)
class PlanarDiagram:
    classical: tuple[ClassicalCrossing, ...]
    virtual: tuple[VirtualCrossing, ...]
    loops: tuple[str, ...]
    bars: dict[str, int] = field(default_factory=dict)

    def bar_count(self, edge: str) -> int:
        return self.bars.get(edge, 0)

    def vertex_ids(self) -> list[str]:
        return [c.cid for c in self.classical] + [v.cid for v in self.virtual]

    def edge_labels(self) -> list[str]:
        seen: set[str] = set()
        for c in list(self.classical) + list(self.virtual):
            for e, _ in c.slots:
                seen.add(e)
        return sorted(seen)


def make_planar(
    classical: Iterable[ClassicalCrossing],
    virtual: Iterable[VirtualCrossing] = (),
    loops: Iterable[str] = (),
    bars: dict[str, int] | None = None,
) -> PlanarDiagram:
    """Normalized constructor: sorts everything and prunes zero bar counts."""
    return PlanarDiagram(
        classical=tuple(sorted(classical, key=lambda c: c.cid)),
        virtual=tuple(sorted(virtual, key=lambda v: v.cid)),
        loops=tuple(sorted(loops)),
        bars={e: n for e, n in sorted((bars or {}).items()) if n},
    )


# ---------------------------------------------------------------------------
# TLD text format
# ---------------------------------------------------------------------------

_SIGNS = {"+": True, "-": False, "−": False}


def _parse_slot(token: str, lineno: int) -> Slot:
    if len(token) < 2 or token[0] not in _SIGNS:
        raise TLDParseError(lineno, f"expected signed edge label, got {token!r}")
    label = token[1:]
    if not label.isalnum():
        raise TLDParseError(lineno, f"edge label {label!r} is not alphanumeric")
    return (label, _SIGNS[token[0]])


def parse_tld(text: str) -> PlanarDiagram:
    """Parse the TLD line format.

    Checks syntax, identifier uniqueness, and edge-label arity (each
    non-loop label appears exactly once as a tail and once as a head);
    planarity is validate()'s job.
    """
    classical: list[ClassicalCrossing] = []
    virtual: list[VirtualCrossing] = []
    loops: list[str] = []
    bars: dict[str, int] = {}
    vertex_ids: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind in ("X", "V"):
            if len(tokens) != 6:
                raise TLDParseError(lineno, f"{kind} line needs an id and 4 slots")
            cid = tokens[1]
            if not cid.isalnum():
                raise TLDParseError(lineno, f"identifier {cid!r} is not alphanumeric")
            if cid in vertex_ids:
                raise TLDParseError(lineno, f"duplicate crossing identifier {cid!r}")
            vertex_ids.add(cid)
            slots = tuple(_parse_slot(t, lineno) for t in tokens[2:6])
            outs = [s[1] for s in slots]
            if kind == "X":
                if outs[0] or not outs[2] or outs[1] == outs[3]:
                    raise TLDParseError(
                        lineno,
                        "classical slots must be -in, +out at 0/2 and one "
                        "incoming over-strand end at 1 or 3",
                    )
                classical.append(ClassicalCrossing(cid, slots))
            else:
                if outs != [False, False, True, True]:
                    raise TLDParseError(
                        lineno, "virtual slots must be -e0 -e1 +e2 +e3"
                    )
                virtual.append(VirtualCrossing(cid, slots))
        elif kind == "O":
            if len(tokens) != 2 or not tokens[1].isalnum():
                raise TLDParseError(lineno, "O line needs one alphanumeric edge label")
            loops.append(tokens[1])
        elif kind == "B":
            if len(tokens) != 3 or not tokens[1].isalnum():
                raise TLDParseError(lineno, "B line needs an edge label and a count")
            try:
                count = int(tokens[2])
            except ValueError:
                raise TLDParseError(lineno, f"bad bar count {tokens[2]!r}") from None
            if count < 0:
                raise TLDParseError(lineno, "bar count must be non-negative")
            bars[tokens[1]] = bars.get(tokens[1], 0) + count
        else:
            raise TLDParseError(lineno, f"unknown line kind {kind!r}")

    tails: dict[str, int] = {}
    heads: dict[str, int] = {}
    for c in classical + virtual:
        for label, is_out in c.slots:
            (tails if is_out else heads)[label] = (tails if is_out else heads).get(label, 0) + 1
    labels = set(tails) | set(heads)
    for label in sorted(labels):
        if tails.get(label, 0) != 1 or heads.get(label, 0) != 1:
            raise TLDParseError(
                0,
                f"edge multiplicity: label {label!r} occurs "
                f"{tails.get(label, 0)} times as tail and {heads.get(label, 0)} as head",
            )
    for label in loops:
        if label in labels:
            raise TLDParseError(0, f"loop label {label!r} also used at a crossing")
    if len(set(loops)) != len(loops):
        raise TLDParseError(0, "duplicate loop label")
    for label in bars:
        if label not in labels and label not in loops:
            raise TLDParseError(0, f"edge multiplicity: bar on unknown edge {label!r}")

    return make_planar(classical, virtual, loops, bars)


def serialize_tld(d: PlanarDiagram) -> str:
    """Canonical text: X then V lines sorted by id, O and B lines sorted by label."""
    out: list[str] = []
    for c in sorted(d.classical, key=lambda c: c.cid):
        slots = " ".join(("+" if o else "-") + e for e, o in c.slots)
        out.append(f"X {c.cid} {slots}")
    for v in sorted(d.virtual, key=lambda v: v.cid):
        slots = " ".join(("+" if o else "-") + e for e, o in v.slots)
        out.append(f"V {v.cid} {slots}")
    for label in sorted(d.loops):
        out.append(f"O {label}")
    for label, count in sorted(d.bars.items()):
        if count:
            out.append(f"B {label} {count}")
    return "\n".join(out) + "\n" if out else ""


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _vertex_slots(d: PlanarDiagram) -> dict[str, tuple[str, tuple[Slot, ...]]]:
    table: dict[str, tuple[str, tuple[Slot, ...]]] = {}
    for c in d.classical:
        table[c.cid] = ("X", c.slots)
    for v in d.virtual:
        table[v.cid] = ("V", v.slots)
    return table


def _edge_ends(d: PlanarDiagram) -> tuple[dict[str, End], dict[str, End]]:
    """Maps edge label -> tail end and edge label -> head end."""
    tails: dict[str, End] = {}
    heads: dict[str, End] = {}
    for kind in (d.classical, d.virtual):
        for c in kind:
            for i, (label, is_out) in enumerate(c.slots):
                if is_out:
                    tails[label] = (c.cid, i)
                else:
                    heads[label] = (c.cid, i)
    return tails, heads


def planar_faces(d: PlanarDiagram) -> list[list[End]]:
    """Faces of the rotation system, as orbits of edge-ends.

    The successor of an end is found by jumping to the edge's other end
    and rotating one slot counterclockwise.  Loops are skipped; they are
    crossing-free circles on their own spheres.
    """
    tails, heads = _edge_ends(d)
    table = _vertex_slots(d)

    def alpha(end: End) -> End:
        vid, slot = end
        label, is_out = table[vid][1][slot]
        return heads[label] if is_out else tails[label]

    ends = [(vid, i) for vid in sorted(table) for i in range(4)]
    seen: set[End] = set()
    faces: list[list[End]] = []
    for start in ends:
        if start in seen:
            continue
        face: list[End] = []
        cur = start
        while cur not in seen:
            seen.add(cur)
            face.append(cur)
            vid, slot = alpha(cur)
            cur = (vid, (slot + 1) % 4)
        faces.append(face)
    return faces


def _planar_components(d: PlanarDiagram) -> dict[str, int]:
    """Connected components of the underlying 4-valent map, vertex id -> index."""
    table = _vertex_slots(d)
    tails, heads = _edge_ends(d)
    parent: dict[str, str] = {vid: vid for vid in table}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for label, (tv, _) in tails.items():
        hv, _ = heads[label]
        parent[find(tv)] = find(hv)
    index: dict[str, int] = {}
    comp: dict[str, int] = {}
    for vid in sorted(table):
        root = find(vid)
        if root not in index:
            index[root] = len(index)
        comp[vid] = index[root]
    return comp


def validate(d: PlanarDiagram) -> ValidationReport:
    """Report every violated structural invariant of a planar diagram."""
    violations: list[Violation] = []

    ids = d.vertex_ids()
    if len(set(ids)) != len(ids):
        violations.append(Violation("duplicate-id", "duplicate crossing identifier"))
    for c in d.classical:
        outs = [s[1] for s in c.slots]
        if outs[0] or not outs[2] or outs[1] == outs[3]:
            violations.append(
                Violation("slot-direction", f"classical crossing {c.cid} slot roles broken")
            )
    for v in d.virtual:
        if [s[1] for s in v.slots] != [False, False, True, True]:
            violations.append(
                Violation("slot-direction", f"virtual crossing {v.cid} slot roles broken")
            )

    tails: dict[str, int] = {}
    heads: dict[str, int] = {}
    for c in list(d.classical) + list(d.virtual):
        for label, is_out in c.slots:
            (tails if is_out else heads)[label] = (tails if is_out else heads).get(label, 0) + 1
    labels = set(tails) | set(heads)
    arity_ok = True
    for label in sorted(labels):
        if tails.get(label, 0) != 1 or heads.get(label, 0) != 1:
            arity_ok = False
            violations.append(
                Violation("edge-multiplicity", f"edge {label} has unbalanced ends")
            )
    for label in d.loops:
        if label in labels:
            arity_ok = False
            violations.append(
                Violation("edge-multiplicity", f"loop {label} also used at a crossing")
            )
    for label, count in d.bars.items():
        if count < 0:
            violations.append(Violation("bar-count", f"negative bar count on {label}"))
        if label not in labels and label not in d.loops:
            violations.append(Violation("bar-label", f"bar on unknown edge {label}"))

    if arity_ok and (d.classical or d.virtual):
        comp = _planar_components(d)
        n_comp = max(comp.values()) + 1 if comp else 0
        v_count = [0] * n_comp
        e_count = [0] * n_comp
        f_count = [0] * n_comp
        for vid, ci in comp.items():
            v_count[ci] += 1
        tmap, _ = _edge_ends(d)
        for label, (tv, _) in tmap.items():
            e_count[comp[tv]] += 1
        for face in planar_faces(d):
            f_count[comp[face[0][0]]] += 1
        for ci in range(n_comp):
            if v_count[ci] - e_count[ci] + f_count[ci] != 2:
                violations.append(
                    Violation(
                        "euler",
                        f"Euler check failed on component {ci}: "
                        f"V-E+F = {v_count[ci] - e_count[ci] + f_count[ci]} != 2",
                    )
                )
    return ValidationReport(tuple(violations))


# ---------------------------------------------------------------------------
# Link components
# ---------------------------------------------------------------------------


def components(d: PlanarDiagram) -> tuple[int, dict[str, int]]:
    """Link components traced through crossings; returns (count, edge -> index).

    Under-in continues to under-out and over-in to over-out at classical
    crossings; slot0->slot2 and slot1->slot3 at virtual ones.  Loops are
    their own components.  Component indices follow sorted edge labels.
    """
    table = _vertex_slots(d)
    edges = d.edge_labels()
    parent: dict[str, str] = {e: e for e in edges}
    for label in d.loops:
        parent[label] = label

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for vid in sorted(table):
        _, slots = table[vid]
        for a, b in ((0, 2), (1, 3)):
            parent[find(slots[a][0])] = find(slots[b][0])

    out: dict[str, int] = {}
    index: dict[str, int] = {}
    for e in sorted(parent):
        root = find(e)
        if root not in index:
            index[root] = len(index)
        out[e] = index[root]
    return (len(index), out)


# ---------------------------------------------------------------------------
# Abstract links
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbstractCrossing:
    cid: str
    slots: tuple[str, str, str, str]  # edge ids at slots 0..3


@dataclass(frozen=True)
class AbstractEdge:
    eid: str
    tail: End | None  # None on both ends marks a crossing-free loop
    head: End | None
    parity: int

    @property
    def is_loop(self) -> bool:
        return self.tail is None


@dataclass(frozen=True)
class AbstractLink:
    crossings: tuple[AbstractCrossing, ...]
    edges: tuple[AbstractEdge, ...]

    def crossing(self, cid: str) -> AbstractCrossing:
        for c in self.crossings:
            if c.cid == cid:
                return c
        raise KeyError(cid)

    def edge(self, eid: str) -> AbstractEdge:
        for e in self.edges:
            if e.eid == eid:
                return e
        raise KeyError(eid)

    def loops(self) -> list[AbstractEdge]:
        return [e for e in self.edges if e.is_loop]

    def real_edges(self) -> list[AbstractEdge]:
        return [e for e in self.edges if not e.is_loop]

    def end_edge(self, end: End) -> AbstractEdge:
        """The edge whose tail or head sits at the given (crossing, slot)."""
        for e in self.edges:
            if e.tail == end or e.head == end:
                return e
        raise KeyError(end)

    def sign(self, cid: str) -> int:
        """+1 iff the over-strand's incoming end sits at slot 3."""
        c = self.crossing(cid)
        e3 = self.edge(c.slots[3])
        return 1 if e3.head == (cid, 3) else -1

    def check(self) -> None:
        """Assert structural consistency; raises ValueError on defects."""
        covered: dict[End, str] = {}
        by_id = {e.eid: e for e in self.edges}
        if len(by_id) != len(self.edges):
            raise ValueError("duplicate edge id")
        for e in self.edges:
            if (e.tail is None) != (e.head is None):
                raise ValueError(f"edge {e.eid} has exactly one endpoint")
            if e.parity not in (0, 1):
                raise ValueError(f"edge {e.eid} parity not in {{0,1}}")
            for end in (e.tail, e.head):
                if end is not None:
                    if end in covered:
                        raise ValueError(f"end {end} covered twice")
                    covered[end] = e.eid
        for c in self.crossings:
            for i in range(4):
                end = (c.cid, i)
                if covered.get(end) != c.slots[i]:
                    raise ValueError(f"crossing {c.cid} slot {i} mismatch")
            e0 = by_id[c.slots[0]]
            e2 = by_id[c.slots[2]]
            if e0.head != (c.cid, 0) or e2.tail != (c.cid, 2):
                raise ValueError(f"crossing {c.cid} under-strand roles broken")
            in1 = by_id[c.slots[1]].head == (c.cid, 1)
            in3 = by_id[c.slots[3]].head == (c.cid, 3)
            if in1 == in3:
                raise ValueError(f"crossing {c.cid} over-strand roles broken")


def make_abstract(
    crossings: Iterable[AbstractCrossing], edges: Iterable[AbstractEdge]
) -> AbstractLink:
    a = AbstractLink(
        crossings=tuple(sorted(crossings, key=lambda c: c.cid)),
        edges=tuple(sorted(edges, key=lambda e: e.eid)),
    )
    a.check()
    return a


def writhe(a: AbstractLink) -> int:
    """Sum of crossing signs; loops contribute nothing."""
    return sum(a.sign(c.cid) for c in a.crossings)


def project_abstract(d: PlanarDiagram) -> AbstractLink:
    """Planar-to-abstract projection.

    Deletes virtual crossings, fusing the arcs they interrupt; keeps
    classical rotations; reduces bar counts to parity.  A fused arc is
    named after its lexicographically smallest constituent label.
    """
    table = _vertex_slots(d)
    tails, heads = _edge_ends(d)
    classical_ids = {c.cid for c in d.classical}

    visited: set[str] = set()
    arcs: list[tuple[str, End | None, End | None, int]] = []
    end_to_arc: dict[End, str] = {}

    # Arcs anchored at classical out-slots.
    for c in sorted(d.classical, key=lambda c: c.cid):
        for slot in range(4):
            label, is_out = c.slots[slot]
            if not is_out:
                continue
            chain = []
            bars = 0
            cur = label
            while True:
                chain.append(cur)
                bars += d.bar_count(cur)
                hv, hs = heads[cur]
                if hv in classical_ids:
                    break
                cur = table[hv][1][(hs + 2) % 4][0]
            eid = min(chain)
            visited.update(chain)
            arcs.append((eid, (c.cid, slot), heads[chain[-1]], bars % 2))
            end_to_arc[(c.cid, slot)] = eid
            end_to_arc[heads[chain[-1]]] = eid

    # Circles passing only through virtual crossings.
    leftover = sorted(set(tails) - visited)
    for label in leftover:
        if label in visited:
            continue
        chain = []
        bars = 0
        cur = label
        while cur not in chain:
            chain.append(cur)
            bars += d.bar_count(cur)
            hv, hs = heads[cur]
            cur = table[hv][1][(hs + 2) % 4][0]
        visited.update(chain)
        arcs.append((min(chain), None, None, bars % 2))

    for label in d.loops:
        arcs.append((label, None, None, d.bar_count(label) % 2))

    crossings = [
        AbstractCrossing(c.cid, tuple(end_to_arc[(c.cid, i)] for i in range(4)))
        for c in d.classical
    ]
    edges = [AbstractEdge(eid, tail, head, parity) for eid, tail, head, parity in arcs]
    return make_abstract(crossings, edges)


def switch_crossing(a: AbstractLink, cid: str) -> AbstractLink:
    """Exchange over and under strands at one crossing (sign negates).

    The rotation is unchanged; the slot labels re-anchor at the new
    under-in, which is the old over-in slot.
    """
    c = a.crossing(cid)
    shift = 3 if a.sign(cid) == 1 else 1
    new_slots = tuple(c.slots[(shift + i) % 4] for i in range(4))
    remap = {(cid, (shift + i) % 4): (cid, i) for i in range(4)}

    def move(end: End | None) -> End | None:
        if end is not None and end in remap:
            return remap[end]
        return end

    crossings = [
        AbstractCrossing(cid, new_slots) if x.cid == cid else x for x in a.crossings
    ]
    edges = [
        AbstractEdge(e.eid, move(e.tail), move(e.head), e.parity) for e in a.edges
    ]
    return make_abstract(crossings, edges)


def switch_all(a: AbstractLink) -> AbstractLink:
    """Exchange over and under strands at every crossing."""
    out = a
    for c in a.crossings:
        out = switch_crossing(out, c.cid)
    return out
