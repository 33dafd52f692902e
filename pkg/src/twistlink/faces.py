"""Face traversal of abstract links, two-colorability, carrier surface.

Faces are the boundary circles of the ribbon neighborhood: they run along
edge sides, turn across rotation corners at crossings, and swap sides in
the middle of an edge with odd bar parity.  Capping every face with a disk
gives the carrier surface; its Euler genus is 2 - (V - E + F) and it is
orientable iff every cycle of the underlying 4-valent graph has even
total bar parity.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import AbstractLink

# A germ is (edge id, end flag, side): end flag 0 = tail, 1 = head, and the
# side is 'L' or 'R' as seen standing at that end looking along the edge.
Germ = tuple[str, int, str]


@dataclass(frozen=True)
class FaceSet:
    """Faces as cyclic germ sequences plus the germ -> face index map."""

    faces: tuple[tuple[Germ, ...], ...]
    germ_face: dict[Germ, int]

    def __len__(self) -> int:
        return len(self.faces)


def faces(a: AbstractLink) -> FaceSet:
    """Boundary circles of the ribbon neighborhood.

    A bar-free loop contributes two one-germ faces; an odd loop one
    two-germ face.
    """
    ends: dict[tuple[str, int], tuple[str, int]] = {}
    for e in a.real_edges():
        ends[e.tail] = (e.eid, 0)
        ends[e.head] = (e.eid, 1)
    edge_by_id = {e.eid: e for e in a.edges}

    def across(germ: Germ) -> Germ:
        """Travel the edge to its other end; odd parity keeps the side label."""
        eid, flag, side = germ
        e = edge_by_id[eid]
        if e.parity:
            return (eid, 1 - flag, side)
        return (eid, 1 - flag, "R" if side == "L" else "L")

    def corner(germ: Germ) -> Germ:
        """Turn across the vertex corner to the adjacent departing germ."""
        eid, flag, side = germ
        e = edge_by_id[eid]
        cid, slot = e.tail if flag == 0 else e.head
        if side == "L":
            nxt = (cid, (slot + 1) % 4)
            return (*ends[nxt], "R")
        nxt = (cid, (slot - 1) % 4)
        return (*ends[nxt], "L")

    all_germs: list[Germ] = []
    for e in sorted(a.real_edges(), key=lambda e: e.eid):
        for flag in (0, 1):
            for side in ("L", "R"):
                all_germs.append((e.eid, flag, side))

    face_list: list[tuple[Germ, ...]] = []
    germ_face: dict[Germ, int] = {}
    seen: set[Germ] = set()
    for start in all_germs:
        if start in seen:
            continue
        # Record the full alternating departure/arrival germ sequence; a
        # face consumes both germs of every side-arc it runs along.
        orbit: list[Germ] = []
        cur = start
        while cur not in seen:
            seen.add(cur)
            orbit.append(cur)
            arrival = across(cur)
            seen.add(arrival)
            orbit.append(arrival)
            cur = corner(arrival)
        idx = len(face_list)
        face_list.append(tuple(orbit))
        for g in orbit:
            germ_face[g] = idx

    for e in sorted(a.loops(), key=lambda e: e.eid):
        if e.parity == 0:
            for side in ("L", "R"):
                idx = len(face_list)
                face_list.append(((e.eid, 0, side),))
                germ_face[(e.eid, 0, side)] = idx
        else:
            idx = len(face_list)
            face_list.append(((e.eid, 0, "L"), (e.eid, 0, "R")))
            germ_face[(e.eid, 0, "L")] = idx
            germ_face[(e.eid, 0, "R")] = idx

    return FaceSet(tuple(face_list), germ_face)


def two_colorable(a: AbstractLink) -> dict[int, int] | None:
    """A 2-coloring of faces separating colors across every arc segment, or None.

    Each maximal segment (edges split at bars) forces its two flanking
    faces to differ; the coloring exists iff that constraint graph is
    bipartite.
    """
    fs = faces(a)
    constraints: list[tuple[int, int]] = []
    for e in sorted(a.real_edges(), key=lambda e: e.eid):
        flags = (0, 1) if e.parity else (0,)
        for flag in flags:
            constraints.append(
                (fs.germ_face[(e.eid, flag, "L")], fs.germ_face[(e.eid, flag, "R")])
            )
    for e in sorted(a.loops(), key=lambda e: e.eid):
        constraints.append(
            (fs.germ_face[(e.eid, 0, "L")], fs.germ_face[(e.eid, 0, "R")])
        )

    color: dict[int, int] = {}
    adjacency: dict[int, list[int]] = {i: [] for i in range(len(fs.faces))}
    for x, y in constraints:
        if x == y:
            return None
        adjacency[x].append(y)
        adjacency[y].append(x)
    for root in range(len(fs.faces)):
        if root in color:
            continue
        color[root] = 0
        queue = [root]
        while queue:
            node = queue.pop()
            for other in adjacency[node]:
                if other not in color:
                    color[other] = 1 - color[node]
                    queue.append(other)
                elif color[other] == color[node]:
                    return None
    return color


@dataclass(frozen=True)
class ComponentCarrier:
    key: str  # smallest crossing id, or loop edge id
    euler_genus: int
    orientable: bool


@dataclass(frozen=True)
class CarrierSummary:
    components: tuple[ComponentCarrier, ...]

    @property
    def total_euler_genus(self) -> int:
        return sum(c.euler_genus for c in self.components)

    @property
    def orientable(self) -> bool:
        return all(c.orientable for c in self.components)


def carrier(a: AbstractLink) -> CarrierSummary:
    """Euler genus and orientability of the carrier surface, per component."""
    parent: dict[str, str] = {c.cid: c.cid for c in a.crossings}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in a.real_edges():
        parent[find(e.tail[0])] = find(e.head[0])

    comp_key: dict[str, str] = {}
    for cid in sorted(parent):
        root = find(cid)
        comp_key[root] = min(comp_key.get(root, cid), cid)

    fs = faces(a)
    edge_by_id = {e.eid: e for e in a.edges}
    v_count: dict[str, int] = {}
    e_count: dict[str, int] = {}
    f_count: dict[str, int] = {}
    for cid in parent:
        v_count[find(cid)] = v_count.get(find(cid), 0) + 1
    for e in a.real_edges():
        e_count[find(e.tail[0])] = e_count.get(find(e.tail[0]), 0) + 1
    for face in fs.faces:
        eid = face[0][0]
        e = edge_by_id[eid]
        if e.is_loop:
            continue
        root = find(e.tail[0])
        f_count[root] = f_count.get(root, 0) + 1

    # Orientability: spanning-tree potentials; any odd cycle kills it.
    potential: dict[str, int] = {}
    orientable_comp: dict[str, bool] = {root: True for root in comp_key}
    adjacency: dict[str, list[tuple[str, int]]] = {cid: [] for cid in parent}
    for e in a.real_edges():
        adjacency[e.tail[0]].append((e.head[0], e.parity))
        adjacency[e.head[0]].append((e.tail[0], e.parity))
    for cid in sorted(parent):
        if cid in potential:
            continue
        potential[cid] = 0
        stack = [cid]
        while stack:
            node = stack.pop()
            for other, par in adjacency[node]:
                if other not in potential:
                    potential[other] = potential[node] ^ par
                    stack.append(other)
                elif potential[other] != potential[node] ^ par:
                    orientable_comp[find(node)] = False

    out: list[ComponentCarrier] = []
    for root in sorted(comp_key.values()):
        r = find(root)
        chi = v_count.get(r, 0) - e_count.get(r, 0) + f_count.get(r, 0)
        out.append(ComponentCarrier(comp_key[r], 2 - chi, orientable_comp[r]))
    for e in sorted(a.loops(), key=lambda e: e.eid):
        if e.parity == 0:
            out.append(ComponentCarrier(e.eid, 0, True))
        else:
            out.append(ComponentCarrier(e.eid, 1, False))
    out.sort(key=lambda c: c.key)
    return CarrierSummary(tuple(out))
