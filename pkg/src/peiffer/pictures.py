"""Combinatorial pictures over a presentation.

A picture is a genus-0 labeled map: disk-shaped vertices labeled by signed
relators, arcs labeled by generators, and a distinguished boundary circle.
The encoding is purely combinatorial (rotation systems); planar isotopy is
the identity on it.

Conventions
-----------
* Arc ``a`` has the two ends ``2a`` and ``2a+1``.  Each end carries a signed
  "stored letter": the letter read when the positive (clockwise) walk around
  its attachment site crosses the arc there.  Boundary attachments use the
  positive walk along the boundary circle.  Consistency of the two ends'
  normal orientation reduces to one rule: with ``ell(e) = stored(e)`` at a
  vertex end and ``-stored(e)`` at a boundary end, the two ends of an arc
  satisfy ``ell(e0) == -ell(e1)``.
* Faces are orbits of ``e -> succ(theta(e))`` where ``theta`` swaps an arc's
  ends and ``succ`` is rotation-next at a vertex and rotation-previous along
  the boundary (the boundary circle acts as a vertex at infinity with the
  reversed rotation).
* The vertex corner ``k`` (the gap before rotation slot ``k``) lies in the
  face of ``rotation[k]``; the boundary gap ``g`` lies in the face of
  ``boundary[g-1]``.
* Crossing an arc out of the face of end ``e`` reads ``ell(e)``.
* Components not attached to the boundary carry a placement
  ``(guest_dart, host_dart)``: the face of ``guest_dart`` opens into the face
  of ``host_dart`` (``host = -1`` is the region at the global basepoint).
* Closed arcs are annotations ``(letter, contents, depth)``: a circle drawn
  around the components listed in ``contents`` (vertex ids), read ``letter``
  when crossed inward; larger ``depth`` means further outside among circles
  with equal contents.  They are invisible to the face structure and enter
  path labels through crossing counts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

from .errors import (
    BoundaryNotTrivial,
    PathNotSimple,
    PreconditionViolated,
    ValidationError,
)
from .presentation import Presentation, parse_presentation, presentation_text
from .sequences import ConjTerm, Sequence, raw_product
from .words import EMPTY, Word, free_reduce, inverse, word_str, parse_word

log = logging.getLogger(__name__)

ROOT = -1  # host marker for the region at the global basepoint


@dataclass(frozen=True)
class PVertex:
    relator: int
    sign: int
    rotation: tuple[int, ...]
    basepoint: int = 0


@dataclass(frozen=True)
class Arc:
    label: int                 # generator index, 1-based
    letters: tuple[int, int]   # stored letters at ends (2a, 2a+1)


@dataclass(frozen=True)
class ClosedArc:
    letter: int                      # read when crossing inward
    contents: frozenset[int]         # vertex ids encircled
    depth: int = 0


@dataclass(frozen=True)
class Placement:
    guest_dart: int
    host_dart: int  # an end id, or ROOT


@dataclass(frozen=True)
class Picture:
    presentation: Presentation
    vertices: tuple[PVertex, ...] = ()
    arcs: tuple[Arc, ...] = ()
    boundary: tuple[int, ...] = ()
    global_basepoint: int = 0
    placements: tuple[Placement, ...] = ()
    closed_arcs: tuple[ClosedArc, ...] = ()

    def __hash__(self):
        return hash(
            (
                self.presentation,
                self.vertices,
                self.arcs,
                self.boundary,
                self.global_basepoint,
                self.placements,
                self.closed_arcs,
            )
        )


def is_spherical(pic: Picture) -> bool:
    return len(pic.vertices) >= 1 and not pic.boundary


def theta(e: int) -> int:
    return e ^ 1


def stored_letter(pic: Picture, e: int) -> int:
    return pic.arcs[e // 2].letters[e % 2]


# ---------------------------------------------------------------------------
# derived structure: attachments, faces, regions, components


class Maps:
    """Derived attachment/face/region data for one picture (read-only)."""

    def __init__(self, pic: Picture):
        self.pic = pic
        n_ends = 2 * len(pic.arcs)
        self.site: list[tuple[str, int, int]] = [("?", 0, 0)] * n_ends  # (kind, index, slot)
        for vid, v in enumerate(pic.vertices):
            for slot, e in enumerate(v.rotation):
                self.site[e] = ("vertex", vid, slot)
        for slot, e in enumerate(pic.boundary):
            self.site[e] = ("boundary", -1, slot)
        self._faces: dict[int, int] = {}
        self._face_orbits: dict[int, tuple[int, ...]] = {}
        self._compute_faces()
        self._components()
        self._regions()

    # -- basic navigation ---------------------------------------------------

    def succ(self, e: int) -> int:
        kind, idx, slot = self.site[e]
        if kind == "vertex":
            rot = self.pic.vertices[idx].rotation
            return rot[(slot + 1) % len(rot)]
        bnd = self.pic.boundary
        return bnd[(slot - 1) % len(bnd)]

    def phi(self, e: int) -> int:
        return self.succ(theta(e))

    def _compute_faces(self):
        seen: set[int] = set()
        for start in range(2 * len(self.pic.arcs)):
            if start in seen or self.site[start][0] == "?":
                continue
            orbit = [start]
            seen.add(start)
            cur = self.phi(start)
            while cur != start:
                orbit.append(cur)
                seen.add(cur)
                cur = self.phi(cur)
            key = min(orbit)
            self._face_orbits[key] = tuple(orbit)
            for e in orbit:
                self._faces[e] = key

    def face(self, e: int) -> int:
        return self._faces[e]

    def face_orbit(self, key: int) -> tuple[int, ...]:
        return self._face_orbits[key]

    def faces(self) -> list[int]:
        return sorted(self._face_orbits)

    def corner_face(self, vid: int, corner: int) -> int:
        return self.face(self.pic.vertices[vid].rotation[corner])

    def gap_face(self, gap: int) -> int | None:
        """Face of the boundary gap before slot ``gap``; None if no boundary arcs."""
        bnd = self.pic.boundary
        if not bnd:
            return None
        return self.face(bnd[(gap - 1) % len(bnd)])

    # -- components ----------------------------------------------------------

    def _components(self):
        # union-find over sites; the boundary circle is site -1
        parent: dict[int, int] = {-1: -1}
        for vid in range(len(self.pic.vertices)):
            parent[vid] = vid

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a in range(len(self.pic.arcs)):
            s0 = self.site[2 * a][1] if self.site[2 * a][0] == "vertex" else -1
            s1 = self.site[2 * a + 1][1] if self.site[2 * a + 1][0] == "vertex" else -1
            r0, r1 = find(s0), find(s1)
            if r0 != r1:
                parent[r0] = r1
        self.component_of: dict[int, int] = {s: find(s) for s in parent}
        groups: dict[int, list[int]] = {}
        for s, root in self.component_of.items():
            groups.setdefault(root, []).append(s)
        self.components: list[frozenset[int]] = [
            frozenset(g) for _root, g in sorted(groups.items())
        ]

    def component_key(self, s: int) -> int:
        return self.component_of[s]

    def end_component(self, e: int) -> int:
        kind, idx, _ = self.site[e]
        return self.component_of[idx if kind == "vertex" else -1]

    # -- regions -------------------------------------------------------------

    def _regions(self):
        # union-find over face keys plus the ROOT sentinel
        parent: dict[int, int] = {ROOT: ROOT}
        for key in self._face_orbits:
            parent[key] = key

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        gap = self.gap_face(self.pic.global_basepoint)
        if gap is not None:
            union(ROOT, gap)
        for pl in self.pic.placements:
            host = ROOT if pl.host_dart == ROOT else self.face(pl.host_dart)
            union(self.face(pl.guest_dart), host)
        self._region_parent = parent
        self._region_find = find

    def region(self, face_key: int | None) -> int:
        if face_key is None:
            return self._region_find(ROOT)
        return self._region_find(face_key)

    def root_region(self) -> int:
        return self._region_find(ROOT)

    def region_of_corner(self, vid: int, corner: int) -> int:
        return self.region(self.corner_face(vid, corner))

    def side_region(self, e: int) -> int:
        return self.region(self.face(e))

    def crossing_from(self, e: int) -> int:
        """Letter read when crossing the arc out of end ``e``'s face."""
        s = stored_letter(self.pic, e)
        return s if self.site[e][0] == "vertex" else -s


_MAPS_CACHE: dict[int, tuple[Picture, Maps]] = {}


def maps(pic: Picture) -> Maps:
    key = id(pic)
    hit = _MAPS_CACHE.get(key)
    if hit is not None and hit[0] is pic:
        return hit[1]
    m = Maps(pic)
    if len(_MAPS_CACHE) > 256:
        _MAPS_CACHE.clear()
    _MAPS_CACHE[key] = (pic, m)
    return m


# ---------------------------------------------------------------------------
# validation


def validate(pic: Picture) -> list[str]:
    """Check all structural invariants; returns violations (empty = valid)."""
    p = pic.presentation
    out: list[str] = []
    n_ends = 2 * len(pic.arcs)
    seen: dict[int, str] = {}
    for vid, v in enumerate(pic.vertices):
        for e in v.rotation:
            if not 0 <= e < n_ends:
                out.append(f"vertex {vid}: rotation references unknown end {e}")
            elif e in seen:
                out.append(f"end {e} attached twice ({seen[e]} and vertex {vid})")
            else:
                seen[e] = f"vertex {vid}"
    for e in pic.boundary:
        if not 0 <= e < n_ends:
            out.append(f"boundary references unknown end {e}")
        elif e in seen:
            out.append(f"end {e} attached twice ({seen[e]} and boundary)")
        else:
            seen[e] = "boundary"
    if len(seen) != n_ends:
        missing = [e for e in range(n_ends) if e not in seen]
        out.append(f"unattached ends: {missing}")
    if out:
        return out

    m = maps(pic)
    for a, arc in enumerate(pic.arcs):
        if not 1 <= arc.label <= len(p.generators):
            out.append(f"arc {a}: label {arc.label} out of range")
            continue
        for pos in (0, 1):
            if abs(arc.letters[pos]) != arc.label:
                out.append(f"arc {a}: stored letter does not match label")
        e0, e1 = 2 * a, 2 * a + 1
        if m.crossing_from(e0) != -m.crossing_from(e1):
            out.append(f"arc {a}: incompatible normal orientation at its two ends")

    for vid, v in enumerate(pic.vertices):
        r = p.relator_word(v.relator)
        core = r if v.sign == 1 else inverse(r)
        if len(v.rotation) != len(r):
            out.append(f"vertex {vid}: degree {len(v.rotation)} != relator length {len(r)}")
            continue
        if not 0 <= v.basepoint < len(r):
            out.append(f"vertex {vid}: basepoint corner out of range")
            continue
        word = tuple(
            stored_letter(pic, v.rotation[(v.basepoint + t) % len(r)]) for t in range(len(r))
        )
        if word != core:
            out.append(
                f"vertex {vid}: basepoint corner reads {word}, expected {core}"
            )

    if not 0 <= pic.global_basepoint <= max(len(pic.boundary) - 1, 0):
        out.append("global basepoint out of range")

    # genus: V - E + F == 2 per component (boundary circle acts as a vertex)
    comp_stats: dict[int, list[int]] = {}
    for key in set(m.component_of.values()):
        comp_stats[key] = [0, 0, 0]
    for s, key in m.component_of.items():
        comp_stats[key][0] += 1
    for a in range(len(pic.arcs)):
        comp_stats[m.end_component(2 * a)][1] += 1
    for fkey, orbit in m._face_orbits.items():
        comp_stats[m.end_component(orbit[0])][2] += 1
    for key, (V, E, F) in comp_stats.items():
        if E == 0:
            F = 1  # an isolated site has a single face
        if V - E + F != 2:
            out.append(f"component {key}: V - E + F = {V - E + F}, expected 2 (genus 0)")

    # placements: exactly one per detached component, acyclic toward the root
    boundary_comp = m.component_of[-1]
    placed: dict[int, Placement] = {}
    for pl in pic.placements:
        comp = m.end_component(pl.guest_dart)
        if comp == boundary_comp:
            out.append("placement given for a boundary-attached component")
        elif comp in placed:
            out.append(f"component of dart {pl.guest_dart} placed twice")
        else:
            placed[comp] = pl
    for comp in set(m.component_of.values()):
        if comp != boundary_comp and comp not in placed:
            out.append(f"detached component {comp} has no placement")
    hosts: dict[int, int] = {}
    for comp, pl in placed.items():
        hosts[comp] = boundary_comp if pl.host_dart == ROOT else m.end_component(pl.host_dart)
    for comp in hosts:
        seen_chain = {comp}
        cur = comp
        while cur != boundary_comp:
            cur = hosts.get(cur, boundary_comp)
            if cur in seen_chain:
                out.append(f"placement cycle through component {comp}")
                break
            seen_chain.add(cur)

    vert_ids = set(range(len(pic.vertices)))
    for c in pic.closed_arcs:
        if not c.contents <= vert_ids:
            out.append("closed arc contents reference unknown vertices")
            continue
        for compset in m.components:
            inside = compset & c.contents
            if inside and not (compset - {-1}) <= c.contents:
                out.append(
                    "closed arc contents cut through a component "
                    f"({sorted(inside)} of {sorted(compset - {-1})})"
                )
    return out


def validate_or_raise(pic: Picture) -> None:
    violations = validate(pic)
    if violations:
        raise ValidationError(violations)


# ---------------------------------------------------------------------------
# reading labels


def boundary_label(pic: Picture) -> Word:
    """Signed labels along the boundary from the global basepoint (unreduced)."""
    m = len(pic.boundary)
    g = pic.global_basepoint
    return tuple(stored_letter(pic, pic.boundary[(g + t) % m]) for t in range(m))


# ---------------------------------------------------------------------------
# construction from sequences


def from_sequence(p: Presentation, seq: Sequence) -> Picture:
    """Balloons-on-strings picture: boundary label is identically the raw product."""
    vertices: list[PVertex] = []
    arcs: list[Arc] = []
    boundary: list[int] = []

    def new_arc(l0: int, l1: int) -> int:
        arcs.append(Arc(abs(l0), (l0, l1)))
        return len(arcs) - 1

    for t in seq:
        r = p.relator_word(t.relator)
        core = r if t.exponent == 1 else inverse(r)
        w = t.conjugator
        left_slots: list[int] = []
        right_slots: list[int] = []
        for letter in w:
            a = new_arc(letter, -letter)
            left_slots.append(2 * a)
            right_slots.append(2 * a + 1)
        rot: list[int] = []
        mid_slots: list[int] = []
        for letter in core:
            a = new_arc(letter, letter)  # vertex end first, boundary end second
            rot.append(2 * a)
            mid_slots.append(2 * a + 1)
        vertices.append(PVertex(t.relator, t.exponent, tuple(rot), 0))
        boundary.extend(left_slots)
        boundary.extend(mid_slots)
        boundary.extend(reversed(right_slots))
    return Picture(
        presentation=p,
        vertices=tuple(vertices),
        arcs=tuple(arcs),
        boundary=tuple(boundary),
        global_basepoint=0,
    )


# ---------------------------------------------------------------------------
# capping the boundary (pairwise cancellation from outside)


def _reduction_pairs(letters: list[int]) -> list[tuple[int, int]] | None:
    """Stack pairing of the positions canceled when reducing the word.

    Returns pairs in pop order (innermost first); None entries never pair.
    The unpaired positions spell the reduced word.
    """
    pairs: list[tuple[int, int]] = []
    stack: list[int] = []
    for i, letter in enumerate(letters):
        if stack and letters[stack[-1]] == -letter:
            pairs.append((stack.pop(), i))
        else:
            stack.append(i)
    return pairs


class _CapState:
    """Mutable view used while merging boundary ends pairwise.

    Gap bookkeeping: ``gaps[k]`` holds the vertex ids of detached components
    currently floating in the boundary gap before ``boundary[k]``.  Capping a
    pair fuses its flanking gaps; a self-merge turns the arc into a circle
    around whatever floats in the gap between its two ends.
    """

    def __init__(self, pic: Picture):
        self.presentation = pic.presentation
        self.vertices = list(pic.vertices)
        self.partner: dict[int, int] = {}
        self.letters: dict[int, int] = {}
        self.arc_label: dict[int, int] = {}
        for a, arc in enumerate(pic.arcs):
            e0, e1 = 2 * a, 2 * a + 1
            self.partner[e0], self.partner[e1] = e1, e0
            self.letters[e0], self.letters[e1] = arc.letters
            self.arc_label[e0] = self.arc_label[e1] = arc.label
        self.boundary: list[int] = list(pic.boundary)
        self.global_basepoint = pic.global_basepoint
        self.placements = list(pic.placements)
        self.closed = list(pic.closed_arcs)
        self.gaps: list[set[int]] = [set() for _ in pic.boundary]
        self.vertex_of_end: dict[int, int] = {}
        for vid, v in enumerate(pic.vertices):
            for e in v.rotation:
                self.vertex_of_end[e] = vid

    def picture(self) -> Picture:
        """Rebuild an immutable picture, renumbering arcs from live chains."""
        live: list[tuple[int, int]] = []
        done: set[int] = set()
        for e in sorted(self.partner):
            if e in done:
                continue
            f = self.partner[e]
            done.update((e, f))
            live.append((e, f))
        end_map: dict[int, int] = {}
        arcs: list[Arc] = []
        for a, (e, f) in enumerate(live):
            end_map[e] = 2 * a
            end_map[f] = 2 * a + 1
            arcs.append(Arc(self.arc_label[e], (self.letters[e], self.letters[f])))
        vertices = tuple(
            replace(v, rotation=tuple(end_map[e] for e in v.rotation)) for v in self.vertices
        )
        return Picture(
            presentation=self.presentation,
            vertices=vertices,
            arcs=tuple(arcs),
            boundary=tuple(end_map[e] for e in self.boundary),
            global_basepoint=self.global_basepoint,
            placements=tuple(
                Placement(end_map[pl.guest_dart], pl.host_dart if pl.host_dart == ROOT else end_map[pl.host_dart])
                for pl in self.placements
            ),
            closed_arcs=tuple(self.closed),
        )

    def _detached(self, vid: int) -> bool:
        """No end of the vertex's component lies on the boundary."""
        comp = self._component_vertices(vid)
        bset = set(self.boundary)
        for v in comp:
            for e in self.vertices[v].rotation:
                if self.partner[e] in bset:
                    return False
        return True

    def _component_vertices(self, vid: int) -> set[int]:
        out = {vid}
        frontier = [vid]
        while frontier:
            v = frontier.pop()
            for e in self.vertices[v].rotation:
                other = self.partner[e]
                w = self.vertex_of_end.get(other)
                if w is not None and w not in out:
                    out.add(w)
                    frontier.append(w)
        return out

    def _merge_gaps(self, i: int, j: int, extra: set[int]) -> None:
        """Fuse the gaps flanking the capped pair; ``extra`` joins the result."""
        hi = (j + 1) % len(self.boundary)
        merged = self.gaps[i] | self.gaps[hi] | extra
        if hi == 0:
            del self.gaps[j], self.gaps[i]
            if self.gaps:
                self.gaps[0] = merged
        else:
            self.gaps[hi] = merged
            del self.gaps[j], self.gaps[i]

    def merge(self, i: int, j: int) -> None:
        """Cap the canceling boundary ends at current positions i, j = i+1.

        Side conventions: the end at position i flanks the inner gap (between
        the pair) and its partner the outer side; the end at position i+1
        flanks the outer gap and its partner the inner side.
        """
        e1, e2 = self.boundary[i], self.boundary[j]
        p1, p2 = self.partner[e1], self.partner[e2]
        inner_members = self.gaps[j]
        if p1 == e2:
            # the arc closes into a circle around the inner gap's residents
            contents = frozenset(inner_members)
            inward = -self.letters[e2]
            depth = 1 + max(
                (c.depth for c in self.closed if c.contents == contents), default=-1
            )
            self.closed.append(ClosedArc(inward, contents, depth))
            for e in (e1, e2):
                del self.partner[e], self.letters[e], self.arc_label[e]
            self.placements = [
                pl if pl.host_dart not in (e1, e2) else Placement(pl.guest_dart, ROOT)
                for pl in self.placements
            ]
            self._merge_gaps(i, j, set(inner_members))
            del self.boundary[j], self.boundary[i]
            return
        # join the two chains through the cap; sides: e1<->p2 inner, e2<->p1 outer
        self.partner[p1], self.partner[p2] = p2, p1
        for e in (e1, e2):
            del self.partner[e], self.letters[e], self.arc_label[e]
        self.placements = [
            Placement(
                pl.guest_dart,
                p2 if pl.host_dart == e1 else p1 if pl.host_dart == e2 else pl.host_dart,
            )
            for pl in self.placements
        ]
        if inner_members:
            # residents of the capped-over gap now live against the new arc's
            # inner side; re-anchor their placements there
            hosted = set(inner_members)
            new_placements = []
            for pl in self.placements:
                vid = self.vertex_of_end.get(pl.guest_dart)
                if vid is not None and vid in hosted:
                    new_placements.append(Placement(pl.guest_dart, p2))
                else:
                    new_placements.append(pl)
            self.placements = new_placements
        self._merge_gaps(i, j, set())
        del self.boundary[j], self.boundary[i]
        detached_verts: set[int] = set()
        for pend in (p1, p2):
            vid = self.vertex_of_end.get(pend)
            if vid is None:
                continue
            comp = self._component_vertices(vid)
            if any(
                any(pl.guest_dart in self.vertices[v].rotation for v in comp)
                for pl in self.placements
            ):
                continue
            if self._detached(vid):
                self.placements.append(Placement(pend, ROOT))
                detached_verts = comp
                break
        if detached_verts and self.gaps:
            target = i % len(self.gaps) if self.boundary else 0
            self.gaps[target if target < len(self.gaps) else 0] |= detached_verts


def cap_boundary(pic: Picture, full: bool = True) -> Picture:
    """Cancel boundary letters pairwise by capping arcs outside the disk.

    With ``full=True`` the boundary label must be freely trivial and the
    result has no boundary arcs; otherwise only the canceling positions of
    the free reduction are capped, leaving the reduced word on the boundary.
    """
    letters = list(boundary_label(pic))
    pairs = _reduction_pairs(letters)
    if full and len(pairs) * 2 != len(letters):
        raise BoundaryNotTrivial(
            f"boundary label {word_str(tuple(letters), pic.presentation.generators)!r} "
            "is not freely trivial"
        )
    # normalize storage so the basepoint sits at gap 0: label coordinates and
    # list coordinates then agree and no pair straddles the seam
    g = pic.global_basepoint
    mlen = len(pic.boundary)
    normalized = replace(
        pic, boundary=pic.boundary[g:] + pic.boundary[:g], global_basepoint=0
    )
    ends_at = list(normalized.boundary)
    state = _CapState(normalized)
    # merge innermost-first (stack pop order guarantees adjacency at merge time)
    for a, b in pairs:
        i = state.boundary.index(ends_at[a])
        j = state.boundary.index(ends_at[b])
        assert j == i + 1, "pairing order violated adjacency"
        state.merge(i, j)
    return state.picture()


def close_to_sphere(pic: Picture) -> Picture:
    """Cap a freely trivial boundary completely; vertices are unchanged."""
    if is_spherical(pic):
        return pic
    return cap_boundary(pic, full=True)


# ---------------------------------------------------------------------------
# sprays


@dataclass(frozen=True)
class Crossing:
    kind: str    # "arc" | "circle"
    index: int
    letter: int


@dataclass(frozen=True)
class SprayPath:
    vertex: int
    crossings: tuple[Crossing, ...]

    def word(self) -> Word:
        return tuple(c.letter for c in self.crossings)


@dataclass(frozen=True)
class Spray:
    paths: tuple[SprayPath, ...]


def _weave_circles(
    pic: Picture, m: Maps, arc_crossings: tuple[Crossing, ...], target_vertex: int
) -> tuple[Crossing, ...]:
    """Insert circle crossings into an arc-crossing path by component entry.

    A circle is crossed where the path first meets an arc of a component it
    encircles (or at the very end when the target itself is encircled), and
    crossed back when the path leaves that territory; concentric circles are
    passed outermost-first on the way in.
    """
    if not pic.closed_arcs:
        return arc_crossings
    boundary_comp = m.component_of[-1]
    comp_verts: dict[int, frozenset[int]] = {}
    for compset in m.components:
        key = m.component_of[next(iter(compset))]
        comp_verts[key] = frozenset(s for s in compset if s != -1)

    def required_for_arc(arc_index: int) -> set[int]:
        comp = m.end_component(2 * arc_index)
        if comp == boundary_comp:
            return set()
        verts = comp_verts[comp]
        return {
            idx for idx, c in enumerate(pic.closed_arcs) if verts and verts <= c.contents
        }

    required_final = {
        idx for idx, c in enumerate(pic.closed_arcs) if target_vertex in c.contents
    }

    def order_key(idx: int):
        c = pic.closed_arcs[idx]
        return (-len(c.contents), -c.depth)

    out: list[Crossing] = []
    current: set[int] = set()

    def transition(required: set[int]):
        entering = sorted(required - current, key=order_key)
        exiting = sorted(current - required, key=order_key, reverse=True)
        for idx in exiting:
            out.append(Crossing("circle", idx, -pic.closed_arcs[idx].letter))
        for idx in entering:
            out.append(Crossing("circle", idx, pic.closed_arcs[idx].letter))
        current.clear()
        current.update(required)

    for cr in arc_crossings:
        transition(required_for_arc(cr.index))
        out.append(cr)
    transition(required_final)
    return tuple(out)


def _region_walk(pic: Picture, m: Maps, region: int, entry_dart: int | None) -> list[int]:
    """Darts of the region in a deterministic walk order."""
    region_faces = [f for f in m.faces() if m.region(f) == region]
    ordered: list[int] = []
    used: set[int] = set()

    def push_orbit(anchor: int):
        # traverse against the phi direction: along the boundary this follows
        # increasing slot order, matching the positive boundary walk
        fkey = m.face(anchor)
        if fkey in used:
            return
        used.add(fkey)
        orbit = tuple(reversed(m.face_orbit(fkey)))
        k = orbit.index(anchor)
        ordered.extend(orbit[k:] + orbit[:k])

    if entry_dart is not None:
        push_orbit(entry_dart)
    elif region == m.root_region() and pic.boundary:
        gap = m.gap_face(pic.global_basepoint)
        if gap is not None:
            # the basepoint gap is passed right after boundary[g-1] in the
            # reversed orbit; start one step later so the walk begins at it
            before = pic.boundary[(pic.global_basepoint - 1) % len(pic.boundary)]
            orbit = tuple(reversed(m.face_orbit(gap)))
            k = orbit.index(before)
            anchor = orbit[(k + 1) % len(orbit)]
            push_orbit(anchor)
    for pl in pic.placements:
        if m.face(pl.guest_dart) in region_faces and m.face(pl.guest_dart) not in used:
            if m.region(m.face(pl.guest_dart)) == region:
                push_orbit(pl.guest_dart)
    for f in region_faces:
        if f not in used:
            push_orbit(m.face_orbit(f)[0])
    return ordered


def find_spray(pic: Picture, strategy: str = "dfs") -> Spray:
    """Spanning-tree spray rooted at the global basepoint region.

    ``strategy`` picks the tree ("dfs" is the canonical clockwise walk,
    "bfs" breadth-first); both are deterministic.
    """
    m = maps(pic)
    root = m.root_region()
    visited_regions = {root}
    visited_vertices: set[int] = set()
    paths: list[SprayPath] = []

    def step(region: int, walk: list[int], prefix: tuple[Crossing, ...]):
        """One pass over the walk: emit basepoint corners and exits in order."""
        found: list[tuple[int, int, tuple[Crossing, ...]]] = []
        for e in walk:
            kind, vid, slot = m.site[e]
            if (
                kind == "vertex"
                and vid not in visited_vertices
                and slot == pic.vertices[vid].basepoint
                and m.region_of_corner(vid, slot) == region
            ):
                visited_vertices.add(vid)
                paths.append(SprayPath(vid, _weave_circles(pic, m, prefix, vid)))
            other = theta(e)
            nxt = m.side_region(other)
            if nxt == region or nxt in visited_regions:
                continue
            visited_regions.add(nxt)
            crossing = (Crossing("arc", e // 2, m.crossing_from(e)),)
            found.append((nxt, other, prefix + crossing))
        return found

    if strategy == "dfs":

        def visit(region: int, entry_dart: int | None, prefix: tuple[Crossing, ...]):
            for e in _region_walk(pic, m, region, entry_dart):
                kind, vid, slot = m.site[e]
                if (
                    kind == "vertex"
                    and vid not in visited_vertices
                    and slot == pic.vertices[vid].basepoint
                    and m.region_of_corner(vid, slot) == region
                ):
                    visited_vertices.add(vid)
                    paths.append(SprayPath(vid, _weave_circles(pic, m, prefix, vid)))
                other = theta(e)
                nxt = m.side_region(other)
                if nxt == region or nxt in visited_regions:
                    continue
                visited_regions.add(nxt)
                crossing = (Crossing("arc", e // 2, m.crossing_from(e)),)
                visit(nxt, other, prefix + crossing)

        visit(root, None, ())
    elif strategy == "bfs":
        queue: list[tuple[int, int | None, tuple[Crossing, ...]]] = [(root, None, ())]
        while queue:
            region, entry, prefix = queue.pop(0)
            queue.extend(step(region, _region_walk(pic, m, region, entry), prefix))
    else:
        raise PreconditionViolated(f"unknown spray strategy {strategy!r}")

    if len(paths) != len(pic.vertices):
        raise PathNotSimple(
            f"spray reached {len(paths)} of {len(pic.vertices)} vertices; "
            "disconnected or inconsistent placements"
        )
    return Spray(tuple(paths))


def sequence_from_spray(pic: Picture, spray: Spray) -> Sequence:
    """The sequence read off a spray: one conjugated relator per path."""
    terms = []
    for path in spray.paths:
        v = pic.vertices[path.vertex]
        terms.append(ConjTerm(path.word(), v.relator, v.sign))
    return tuple(terms)


# ---------------------------------------------------------------------------
# mirror and sum


def mirror(pic: Picture) -> Picture:
    """Reflection: reverses rotations and the boundary, flips signs and letters."""
    vertices = []
    for v in pic.vertices:
        q = len(v.rotation)
        vertices.append(
            PVertex(
                v.relator,
                -v.sign,
                tuple(reversed(v.rotation)),
                (q - v.basepoint) % q,
            )
        )
    arcs = tuple(Arc(a.label, (-a.letters[0], -a.letters[1])) for a in pic.arcs)
    mlen = len(pic.boundary)
    boundary = tuple(reversed(pic.boundary))
    g = (mlen - pic.global_basepoint) % mlen if mlen else 0
    return replace(
        pic,
        vertices=tuple(vertices),
        arcs=arcs,
        boundary=boundary,
        global_basepoint=g,
    )


def _shift_ids(pic: Picture, dv: int, de: int) -> Picture:
    vertices = tuple(
        replace(v, rotation=tuple(e + de for e in v.rotation)) for v in pic.vertices
    )
    return replace(
        pic,
        vertices=vertices,
        boundary=tuple(e + de for e in pic.boundary),
        placements=tuple(
            Placement(
                pl.guest_dart + de, pl.host_dart if pl.host_dart == ROOT else pl.host_dart + de
            )
            for pl in pic.placements
        ),
        closed_arcs=tuple(
            ClosedArc(c.letter, frozenset(v + dv for v in c.contents), c.depth)
            for c in pic.closed_arcs
        ),
    )


def sum_pictures(p1: Picture, p2: Picture) -> Picture:
    """Side-by-side sum; the first picture's global basepoint is retained."""
    if p1.presentation != p2.presentation:
        raise PreconditionViolated("sum requires pictures over the same presentation")

    def rotated(pic: Picture) -> tuple[int, ...]:
        g = pic.global_basepoint
        return pic.boundary[g:] + pic.boundary[:g]

    shifted = _shift_ids(p2, len(p1.vertices), 2 * len(p1.arcs))
    return Picture(
        presentation=p1.presentation,
        vertices=p1.vertices + shifted.vertices,
        arcs=p1.arcs + shifted.arcs,
        boundary=rotated(p1) + rotated(shifted),
        global_basepoint=0,
        placements=p1.placements + shifted.placements,
        closed_arcs=p1.closed_arcs + shifted.closed_arcs,
    )


# ---------------------------------------------------------------------------
# enclosures: subpictures and complements


@dataclass(frozen=True)
class Enclosure:
    """A simple closed path around a set of vertices, as its crossing data."""

    vertices: frozenset[int]
    walk: tuple[int, ...]       # outgoing vertex-side ends, in path order
    label: Word                 # signed labels read along the path

    def is_spherical_subpicture(self) -> bool:
        return not self.walk


def enclose(pic: Picture, vertex_set: frozenset[int], anchor: int | None = None) -> Enclosure:
    """Build the enclosing path around ``vertex_set`` (must walk as one cycle)."""
    m = maps(pic)
    vset = set(vertex_set)
    if not vset <= set(range(len(pic.vertices))):
        raise PathNotSimple("enclosure references unknown vertices")

    def internal(e: int) -> bool:
        kind, vid, _ = m.site[theta(e)]
        return kind == "vertex" and vid in vset

    outgoing = [
        e
        for vid in sorted(vset)
        for e in pic.vertices[vid].rotation
        if not internal(e)
    ]
    if not outgoing:
        return Enclosure(frozenset(vset), (), EMPTY)
    start = anchor if anchor is not None else min(outgoing)
    if start not in outgoing:
        raise PathNotSimple("anchor end is not an outgoing arc of the set")
    walk: list[int] = []
    cur = start
    while True:
        walk.append(cur)
        # scan clockwise from cur, tunneling through internal arcs
        probe = m.succ(cur)
        while internal(probe):
            probe = m.succ(theta(probe))
        cur = probe
        if cur == start:
            break
        if len(walk) > len(outgoing):
            raise PathNotSimple("enclosure walk does not close after all outgoing arcs")
    if len(walk) != len(outgoing):
        raise PathNotSimple("outgoing arcs form more than one cycle around the set")
    label = tuple(stored_letter(pic, e) for e in walk)
    return Enclosure(frozenset(vset), tuple(walk), label)


def subpicture(pic: Picture, enc: Enclosure) -> Picture:
    """The picture enclosed by the path: kept vertices, cut arcs on the boundary."""
    m = maps(pic)
    vset = enc.vertices
    vmap = {vid: k for k, vid in enumerate(sorted(vset))}
    arcs: list[Arc] = []
    end_map: dict[int, int] = {}

    def ensure_arc(l0: int, l1: int) -> int:
        arcs.append(Arc(abs(l0), (l0, l1)))
        return len(arcs) - 1

    # internal arcs survive; cut arcs keep the inner end, boundary gets the other
    boundary: list[int] = []
    for e in enc.walk:
        a = ensure_arc(stored_letter(pic, e), stored_letter(pic, e))
        end_map[e] = 2 * a      # vertex side keeps its stored letter
        boundary.append(2 * a + 1)  # boundary side reads the same letter
    done: set[int] = set()
    for vid in sorted(vset):
        for e in pic.vertices[vid].rotation:
            if e in end_map or e in done:
                continue
            other = theta(e)
            kind, ov, _ = m.site[other]
            if kind == "vertex" and ov in vset:
                a = ensure_arc(stored_letter(pic, e), stored_letter(pic, other))
                end_map[e] = 2 * a
                end_map[other] = 2 * a + 1
                done.update((e, other))
    vertices = tuple(
        replace(
            pic.vertices[vid],
            rotation=tuple(end_map[e] for e in pic.vertices[vid].rotation),
        )
        for vid in sorted(vset)
    )
    circles = []
    for c in pic.closed_arcs:
        if c.contents and c.contents <= vset:
            circles.append(ClosedArc(c.letter, frozenset(vmap[v] for v in c.contents), c.depth))
        elif c.contents & vset:
            raise PathNotSimple("a closed arc straddles the enclosure")
    placements = []
    kept_ends = set(end_map)
    for pl in pic.placements:
        if pl.guest_dart in kept_ends:
            host = pl.host_dart
            placements.append(
                Placement(
                    end_map[pl.guest_dart],
                    ROOT if host == ROOT or host not in kept_ends else end_map[host],
                )
            )
    return Picture(
        presentation=pic.presentation,
        vertices=vertices,
        arcs=tuple(arcs),
        boundary=tuple(boundary),
        global_basepoint=0,
        placements=tuple(placements),
        closed_arcs=tuple(circles),
    )


def complement(pic: Picture, enc: Enclosure) -> Picture:
    """Complement of the enclosed part in a spherical picture.

    Has the same boundary label as the enclosed subpicture; its vertices are
    the remaining ones with opposite signs.
    """
    if not is_spherical(pic):
        raise PreconditionViolated("complement is defined for spherical pictures")
    rest = frozenset(range(len(pic.vertices))) - enc.vertices
    if not rest:
        return Picture(presentation=pic.presentation)
    if not enc.walk:
        outer = subpicture(pic, enclose(pic, rest))
        return mirror(outer)
    # anchor the complementary walk on the same arc so the labels align
    first_arc_outer_end = theta(enc.walk[0])
    comp_enc = enclose(pic, rest, anchor=first_arc_outer_end)
    sub = subpicture(pic, comp_enc)
    mirrored = mirror(sub)
    want = enc.label
    mlen = len(mirrored.boundary)
    for g in range(mlen):
        cand = replace(mirrored, global_basepoint=g)
        if boundary_label(cand) == want:
            return cand
    raise PathNotSimple("complement boundary label cannot be aligned with the enclosure")


# ---------------------------------------------------------------------------
# canonical form


def canonical_key(pic: Picture):
    """Complete isomorphism invariant under arc/vertex renumbering.

    The boundary component is encoded from the basepoint; every detached
    component is encoded minimally over all starting darts.
    """
    m = maps(pic)

    def encode_component(starts: list[int]) -> tuple:
        best = None
        for s in starts:
            enc = _encode_from(pic, m, s)
            if best is None or enc < best:
                best = enc
        return best if best is not None else ()

    boundary_comp = m.component_of[-1]
    comp_ends: dict[int, list[int]] = {}
    for e in range(2 * len(pic.arcs)):
        comp_ends.setdefault(m.end_component(e), []).append(e)

    g = pic.global_basepoint
    mlen = len(pic.boundary)
    bnd_letters = tuple(stored_letter(pic, pic.boundary[(g + t) % mlen]) for t in range(mlen))
    boundary_enc = (
        bnd_letters,
        _encode_from(pic, m, pic.boundary[g % mlen]) if mlen else (),
    )

    detached = []
    vmaps: dict[int, dict[int, int]] = {}
    for comp, ends in sorted(comp_ends.items()):
        if comp == boundary_comp:
            continue
        detached.append((encode_component(ends), comp))
    detached.sort()

    # global canonical vertex ids: boundary component first (discovery order),
    # then detached components in canonical order
    order: list[int] = []
    if mlen:
        seen: set[int] = set()
        for t in range(mlen):
            e = pic.boundary[(g + t) % mlen]
            _collect_vertices(pic, m, e, seen, order)
    for _enc, comp in detached:
        seen2 = set(order)
        start = min(comp_ends[comp])
        _collect_vertices(pic, m, start, seen2, order)
    vmap = {vid: k for k, vid in enumerate(order)}
    for vid in range(len(pic.vertices)):
        vmap.setdefault(vid, len(vmap))

    circles = tuple(
        sorted(
            (c.letter, tuple(sorted(vmap[v] for v in c.contents)), c.depth)
            for c in pic.closed_arcs
        )
    )
    placements = tuple(
        sorted(
            (
                vmap[m.site[pl.guest_dart][1]],
                ROOT if pl.host_dart == ROOT else vmap.get(m.site[pl.host_dart][1], ROOT),
            )
            for pl in pic.placements
        )
    )
    return (boundary_enc, tuple(e for e, _ in detached), circles, placements)


def _collect_vertices(pic: Picture, m: Maps, start: int, seen: set[int], order: list[int]):
    frontier = [start]
    visited_ends: set[int] = set()
    while frontier:
        e = frontier.pop()
        if e in visited_ends:
            continue
        visited_ends.add(e)
        kind, vid, _ = m.site[e]
        if kind == "vertex":
            if vid not in seen:
                seen.add(vid)
                order.append(vid)
            for e2 in pic.vertices[vid].rotation:
                frontier.append(theta(e2))
        frontier.append(theta(e))


def _encode_from(pic: Picture, m: Maps, start: int) -> tuple:
    """Deterministic BFS encoding of the component containing ``start``."""
    end_ids: dict[int, int] = {}
    vertex_ids: dict[int, int] = {}
    queue = [start]
    records: list[tuple] = []
    while queue:
        e = queue.pop(0)
        if e in end_ids:
            continue
        end_ids[e] = len(end_ids)
        kind, vid, slot = m.site[e]
        if kind == "vertex":
            v = pic.vertices[vid]
            if vid not in vertex_ids:
                vertex_ids[vid] = len(vertex_ids)
                q = len(v.rotation)
                records.append(
                    (
                        "v",
                        v.relator,
                        v.sign,
                        (v.basepoint - slot) % q,
                        tuple(stored_letter(pic, v.rotation[(slot + t) % q]) for t in range(q)),
                    )
                )
                for t in range(q):
                    queue.append(theta(v.rotation[(slot + t) % q]))
        else:
            mlen = len(pic.boundary)
            records.append(("b", (slot - pic.global_basepoint) % mlen if mlen else 0))
        queue.append(theta(e))
        records.append(("e", end_ids.get(theta(e), -1)))
    return tuple(records)


# ---------------------------------------------------------------------------
# JSON interchange


def to_json_dict(pic: Picture) -> dict:
    p = pic.presentation
    m = maps(pic)

    def end_desc(e: int) -> dict:
        kind, idx, slot = m.site[e]
        if kind == "vertex":
            return {"at": "vertex", "vertex": idx, "slot": slot}
        return {"at": "boundary", "slot": slot}

    face_ids = {f: k for k, f in enumerate(maps(pic).faces())}
    circle_records = []
    for c in pic.closed_arcs:
        circle_records.append(
            {
                "label": word_str((c.letter,), p.generators),
                "face": -1,
                "nesting": c.depth,
                "contents": sorted(c.contents),
            }
        )
    return {
        "presentation": {
            "source": p.source,
            "text": presentation_text(p),
        },
        "vertices": [
            {
                "relator": v.relator + 1,
                "sign": v.sign,
                "rotation": list(v.rotation),
                "basepoint": v.basepoint,
            }
            for v in pic.vertices
        ],
        "arcs": [
            {
                "label": p.generators[a.label - 1],
                "ends": [end_desc(2 * i), end_desc(2 * i + 1)],
                "normal": [
                    word_str((a.letters[0],), p.generators),
                    word_str((a.letters[1],), p.generators),
                ],
            }
            for i, a in enumerate(pic.arcs)
        ],
        "closed_arcs": circle_records,
        "boundary": list(pic.boundary),
        "global_basepoint": pic.global_basepoint,
        "placements": [
            {"guest": pl.guest_dart, "host": pl.host_dart} for pl in pic.placements
        ],
    }


def from_json_dict(data: dict, presentation: Presentation | None = None) -> Picture:
    if presentation is None:
        presentation = parse_presentation(data["presentation"]["text"])
    p = presentation
    arcs = []
    for rec in data["arcs"]:
        l0 = parse_word(rec["normal"][0], p.generators)[0]
        l1 = parse_word(rec["normal"][1], p.generators)[0]
        label = abs(l0)
        arcs.append(Arc(label, (l0, l1)))
    vertices = tuple(
        PVertex(
            rec["relator"] - 1,
            rec["sign"],
            tuple(rec["rotation"]),
            rec.get("basepoint", 0),
        )
        for rec in data["vertices"]
    )
    circles = tuple(
        ClosedArc(
            parse_word(rec["label"], p.generators)[0],
            frozenset(rec.get("contents", [])),
            rec.get("nesting", 0),
        )
        for rec in data.get("closed_arcs", [])
    )
    placements = tuple(
        Placement(rec["guest"], rec["host"]) for rec in data.get("placements", [])
    )
    return Picture(
        presentation=p,
        vertices=vertices,
        arcs=tuple(arcs),
        boundary=tuple(data.get("boundary", [])),
        global_basepoint=data.get("global_basepoint", 0),
        placements=placements,
        closed_arcs=circles,
    )


def dumps(pic: Picture) -> str:
    return json.dumps(to_json_dict(pic), sort_keys=True, indent=1) + "\n"


def loads(text: str, presentation: Presentation | None = None) -> Picture:
    return from_json_dict(json.loads(text), presentation)
