"""Half-edge planar map with a simple boundary, plus the surgeries peeling needs.

The map is a rooted planar multigraph in which every internal face is a
triangle.  Two kinds of map exist:

* ``half_plane`` -- a finite window of a half-planar triangulation.  The
  bottom boundary path (the revealed part of the infinite boundary) carries
  integer indices ``..., v_-1, v_0, v_1, ...`` with the root edge between
  ``v_0`` and ``v_1``.  The exposed contour (where triangles may still be
  attached) runs from the left window end to the right window end.
* ``disc`` -- a triangulation of a polygon (used for Boltzmann fills and
  gadget graphs).  Its boundary is the outer cycle.

Identifiers are dense non-negative integers.  Ids are never reused after a
deletion within one map.  Orientation conventions: internal face orbits are
counter-clockwise (face to the left of each half-edge); the outer face orbit
is the clockwise contour.  For an uncovered bottom-boundary edge the exposed
(top) half-edge points from the lower boundary index to the higher one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

OUTER = -1

FACE_TRIANGLE = 0
FACE_HOLE = 1

UNREACHED = -1

SERIAL_VERSION = 1


class MapError(ValueError):
    """Precondition violation in a map operation."""


@dataclass
class PolygonHandle:
    """An unfilled polygonal hole left by ``attach_connect_triangle``.

    ``root`` is the hole-side half-edge of the new chord; walking ``next``
    from it traverses the hole cycle (hole to the left).
    """

    face: int
    root: int
    perimeter: int
    closed: bool = False


@dataclass
class IntegrityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "integrity: ok"
        return "integrity: FAILED\n" + "\n".join("  - " + v for v in self.violations)


class HalfEdgeMap:
    def __init__(self, kind: str = "half_plane"):
        if kind not in ("half_plane", "disc"):
            raise MapError(f"unknown map kind {kind!r}")
        self.kind = kind
        # vertex records
        self.v_anchor: list[int] = []      # some outgoing half-edge
        self.v_on_boundary: list[bool] = []  # lies on the infinite boundary?
        self.v_degree: list[int] = []      # outgoing half-edge count (multiplicity)
        # half-edge records (append-only; dead slots keep alive=False)
        self.he_origin: list[int] = []
        self.he_twin: list[int] = []
        self.he_next: list[int] = []
        self.he_prev: list[int] = []
        self.he_face: list[int] = []       # face id, or OUTER
        self.he_bottom: list[bool] = []    # outer half-edge below the boundary path
        self.he_alive: list[bool] = []
        # face records
        self.f_anchor: list[int] = []
        self.f_kind: list[int] = []
        self.f_alive: list[bool] = []
        self.root: int = -1                # root half-edge
        # boundary-path bookkeeping (half_plane kind only)
        self.bindex: dict[int, int] = {}   # vertex id -> boundary index
        self.bvertex: dict[int, int] = {}  # boundary index -> vertex id
        self.b_lo: int = 0                 # leftmost revealed boundary index
        self.b_hi: int = 0                 # rightmost revealed boundary index
        self.left_bottom: int = -1         # bottom half-edge of leftmost boundary edge
        self.right_bottom: int = -1        # bottom half-edge of rightmost boundary edge
        self.n_vertices = 0
        self.n_edges = 0
        self.open_holes: set[int] = set()

    # ------------------------------------------------------------------
    # low-level allocation

    def _new_vertex(self, on_boundary: bool) -> int:
        vid = len(self.v_anchor)
        self.v_anchor.append(-1)
        self.v_on_boundary.append(on_boundary)
        self.v_degree.append(0)
        self.n_vertices += 1
        return vid

    def _new_half_edge(self, origin: int, face: int, bottom: bool = False) -> int:
        hid = len(self.he_origin)
        self.he_origin.append(origin)
        self.he_twin.append(-1)
        self.he_next.append(-1)
        self.he_prev.append(-1)
        self.he_face.append(face)
        self.he_bottom.append(bottom)
        self.he_alive.append(True)
        self.v_degree[origin] += 1
        if self.v_anchor[origin] < 0:
            self.v_anchor[origin] = hid
        return hid

    def _kill_half_edge(self, hid: int) -> None:
        v = self.he_origin[hid]
        self.he_alive[hid] = False
        self.v_degree[v] -= 1
        if self.v_anchor[v] == hid:
            self.v_anchor[v] = -1  # re-anchored by the caller

    def _new_face(self, kind: int, anchor: int) -> int:
        fid = len(self.f_anchor)
        self.f_anchor.append(anchor)
        self.f_kind.append(kind)
        self.f_alive.append(True)
        return fid

    def _link(self, a: int, b: int) -> None:
        self.he_next[a] = b
        self.he_prev[b] = a

    # ------------------------------------------------------------------
    # basic queries

    def dest(self, h: int) -> int:
        return self.he_origin[self.he_twin[h]]

    def degree(self, v: int) -> int:
        """Vertex degree counting edge multiplicity (a double edge adds 2)."""
        return self.v_degree[v]

    def alive_half_edges(self):
        for h in range(len(self.he_origin)):
            if self.he_alive[h]:
                yield h

    def out_half_edges(self, v: int):
        """Outgoing half-edges of v, rotating from the anchor."""
        h0 = self.v_anchor[v]
        h = h0
        while True:
            yield h
            h = self.he_next[self.he_twin[h]]
            if h == h0:
                return

    def neighbors(self, v: int):
        for h in self.out_half_edges(v):
            yield self.dest(h)

    def is_contour(self, h: int) -> bool:
        """Is h an exposed half-edge where a triangle may be attached?"""
        return (
            self.he_alive[h]
            and self.he_face[h] == OUTER
            and not self.he_bottom[h]
        )

    def contour_half_edges(self) -> list[int]:
        """Exposed half-edges, left to right (half_plane) or around the disc."""
        if self.kind == "half_plane":
            out = []
            h = self.he_next[self.left_bottom]
            while h != self.right_bottom:
                out.append(h)
                h = self.he_next[h]
            return out
        # disc: whole outer orbit from the root's outer side
        start = None
        for h in self.alive_half_edges():
            if self.he_face[h] == OUTER:
                start = h
                break
        if start is None:
            return []
        out = [start]
        h = self.he_next[start]
        while h != start:
            out.append(h)
            h = self.he_next[h]
        return out

    def boundary_path(self) -> list[int]:
        """Ordered vertex sequence of the exposed boundary path."""
        hs = self.contour_half_edges()
        if not hs:
            return []
        verts = [self.he_origin[hs[0]]]
        for h in hs:
            verts.append(self.dest(h))
        if self.kind == "disc":
            verts.pop()  # closed cycle: drop the repeat
        return verts

    def root_vertex(self) -> int:
        return self.he_origin[self.root]

    # ------------------------------------------------------------------
    # constructors

    @staticmethod
    def half_plane_segment(width: int) -> "HalfEdgeMap":
        """A bare boundary path of `width` edges; root at the middle edge.

        Vertices carry boundary indices -m..width-m with m = (width-1)//2,
        so the root edge joins v_0 and v_1.
        """
        if width < 1:
            raise MapError("width must be >= 1")
        m = HalfEdgeMap("half_plane")
        mshift = (width - 1) // 2
        vids = []
        for k in range(width + 1):
            v = m._new_vertex(on_boundary=True)
            idx = k - mshift
            m.bindex[v] = idx
            m.bvertex[idx] = v
            vids.append(v)
        m.b_lo = -mshift
        m.b_hi = width - mshift
        tops = []
        bots = []
        for k in range(width):
            top = m._new_half_edge(vids[k], OUTER, bottom=False)
            bot = m._new_half_edge(vids[k + 1], OUTER, bottom=True)
            m.he_twin[top] = bot
            m.he_twin[bot] = top
            m.n_edges += 1
            tops.append(top)
            bots.append(bot)
        # outer orbit: bottoms right-to-left, then tops left-to-right
        for k in range(width - 1, 0, -1):
            m._link(bots[k], bots[k - 1])
        m._link(bots[0], tops[0])
        for k in range(width - 1):
            m._link(tops[k], tops[k + 1])
        m._link(tops[width - 1], bots[width - 1])
        m.left_bottom = bots[0]
        m.right_bottom = bots[width - 1]
        m.root = tops[mshift]
        return m

    @staticmethod
    def polygon(m_gon: int) -> tuple["HalfEdgeMap", PolygonHandle]:
        """A bare m-gon whose interior is a single open hole (disc kind)."""
        if m_gon < 2:
            raise MapError("polygon needs perimeter >= 2")
        m = HalfEdgeMap("disc")
        vids = [m._new_vertex(on_boundary=False) for _ in range(m_gon)]
        inner = []
        outer = []
        for k in range(m_gon):
            a, b = vids[k], vids[(k + 1) % m_gon]
            hin = m._new_half_edge(a, -2)   # face set below
            hout = m._new_half_edge(b, OUTER)
            m.he_twin[hin] = hout
            m.he_twin[hout] = hin
            m.n_edges += 1
            inner.append(hin)
            outer.append(hout)
        hole = m._new_face(FACE_HOLE, inner[0])
        m.open_holes.add(hole)
        for k in range(m_gon):
            m.he_face[inner[k]] = hole
            m._link(inner[k], inner[(k + 1) % m_gon])
            m._link(outer[k], outer[(k - 1) % m_gon])
        m.root = outer[0]
        return m, PolygonHandle(face=hole, root=inner[0], perimeter=m_gon)

    # ------------------------------------------------------------------
    # boundary window extension (half_plane)

    def extend_boundary(self, side: str, count: int = 1) -> None:
        """Append `count` boundary edges at the given window end."""
        if self.kind != "half_plane":
            raise MapError("extend_boundary only applies to half-plane maps")
        for _ in range(count):
            if side == "R":
                old = self.bvertex[self.b_hi]
                v = self._new_vertex(on_boundary=True)
                self.b_hi += 1
                self.bindex[v] = self.b_hi
                self.bvertex[self.b_hi] = v
                top = self._new_half_edge(old, OUTER, bottom=False)
                bot = self._new_half_edge(v, OUTER, bottom=True)
                self.he_twin[top] = bot
                self.he_twin[bot] = top
                self.n_edges += 1
                old_rb = self.right_bottom
                # contour currently ends with some half-edge t: next(t) == old_rb
                t = self.he_prev[old_rb]
                self._link(t, top)
                self._link(top, bot)
                self._link(bot, old_rb)
                self.right_bottom = bot
            elif side == "L":
                old = self.bvertex[self.b_lo]
                v = self._new_vertex(on_boundary=True)
                self.b_lo -= 1
                self.bindex[v] = self.b_lo
                self.bvertex[self.b_lo] = v
                top = self._new_half_edge(v, OUTER, bottom=False)
                bot = self._new_half_edge(old, OUTER, bottom=True)
                self.he_twin[top] = bot
                self.he_twin[bot] = top
                self.n_edges += 1
                old_lb = self.left_bottom
                first_top = self.he_next[old_lb]
                self._link(old_lb, bot)
                self._link(bot, top)
                self._link(top, first_top)
                self.left_bottom = bot
            else:
                raise MapError(f"side must be 'L' or 'R', got {side!r}")

    # ------------------------------------------------------------------
    # surgeries

    def attach_alpha_triangle(self, h: int) -> int:
        """Attach a triangle with a fresh internal apex over contour edge h.

        Returns the new vertex.  The boundary path replaces the edge with two
        edges through the apex.
        """
        if not self.is_contour(h):
            raise MapError("attach_alpha_triangle: edge is not on the exposed boundary")
        u = self.he_origin[h]
        v = self.dest(h)
        w = self._new_vertex(on_boundary=False)
        # triangle sides: h (u->v), v->w, w->u
        t_vw = self._new_half_edge(v, -2)
        t_wu = self._new_half_edge(w, -2)
        f = self._new_face(FACE_TRIANGLE, h)
        # exposed twins: w->v and u->w
        o_wv = self._new_half_edge(w, OUTER)
        o_uw = self._new_half_edge(u, OUTER)
        self.he_twin[t_vw] = o_wv
        self.he_twin[o_wv] = t_vw
        self.he_twin[t_wu] = o_uw
        self.he_twin[o_uw] = t_wu
        self.n_edges += 2
        prev_h = self.he_prev[h]
        next_h = self.he_next[h]
        self.he_face[h] = f
        self.he_face[t_vw] = f
        self.he_face[t_wu] = f
        self._link(h, t_vw)
        self._link(t_vw, t_wu)
        self._link(t_wu, h)
        self._link(prev_h, o_uw)
        self._link(o_uw, o_wv)
        self._link(o_wv, next_h)
        return w

    def _walk_contour(self, h: int, side: str, i: int) -> list[int]:
        """Exposed half-edges covering i contour steps beyond h on `side`."""
        out = []
        cur = h
        for _ in range(i):
            cur = self.he_next[cur] if side == "R" else self.he_prev[cur]
            if cur < 0 or not self.is_contour(cur):
                raise MapError("boundary too short for connect step")
            out.append(cur)
        return out

    def attach_connect_triangle(self, h: int, side: str, i: int) -> PolygonHandle:
        """Attach the (side, i) triangle over contour edge h.

        One new edge runs from the far endpoint of h to the boundary vertex i
        steps away on the given side; the triangle covers h; the enclosed
        (i+1)-gon (the enclosing chord plus the i swallowed boundary edges)
        is returned as an unfilled hole.
        """
        if side not in ("L", "R"):
            raise MapError(f"side must be 'L' or 'R', got {side!r}")
        if i < 1:
            raise MapError("connect step needs i >= 1 (i = 0 would be a self-loop)")
        if not self.is_contour(h):
            raise MapError("attach_connect_triangle: edge is not on the exposed boundary")
        u = self.he_origin[h]
        v = self.dest(h)
        swallowed = self._walk_contour(h, side, i)
        if side == "R":
            w = self.dest(swallowed[-1])
            near, far = v, u
        else:
            w = self.he_origin[swallowed[-1]]
            near, far = u, v
        # chord between `near` and w (hole side faces the swallowed path);
        # frontier edge between `far` and w.
        f = self._new_face(FACE_TRIANGLE, h)
        if side == "R":
            c_t = self._new_half_edge(near, f)    # v -> w, triangle side
            c_h = self._new_half_edge(w, -2)      # w -> v, hole side
            f_t = self._new_half_edge(w, f)       # w -> u, triangle side
            f_o = self._new_half_edge(far, OUTER)  # u -> w, exposed
        else:
            c_t = self._new_half_edge(w, f)       # w -> u (chord, triangle side)
            c_h = self._new_half_edge(near, -2)   # u -> w, hole side
            f_t = self._new_half_edge(far, f)     # v -> w?? see below
            f_o = self._new_half_edge(w, OUTER)   # w -> v, exposed
        self.he_twin[c_t] = c_h
        self.he_twin[c_h] = c_t
        self.he_twin[f_t] = f_o
        self.he_twin[f_o] = f_t
        self.n_edges += 2
        hole = self._new_face(FACE_HOLE, c_h)
        self.open_holes.add(hole)
        prev_h = self.he_prev[h]
        next_h = self.he_next[h]
        self.he_face[h] = f
        self.he_face[c_h] = hole
        if side == "R":
            after = self.he_next[swallowed[-1]]
            # triangle orbit: h (u->v), c_t (v->w), f_t (w->u)
            self._link(h, c_t)
            self._link(c_t, f_t)
            self._link(f_t, h)
            # hole orbit: c_h (w->v) then the swallowed exposed halves v->...->w
            self._link(c_h, swallowed[0])
            for a, b in zip(swallowed, swallowed[1:]):
                self._link(a, b)
            self._link(swallowed[-1], c_h)
            # outer contour: ...prev_h, f_o (u->w), beyond last swallowed
            self._link(prev_h, f_o)
            self._link(f_o, after)
        else:
            before = self.he_prev[swallowed[-1]]
            # triangle orbit: h (u->v), f_t (v->w), c_t (w->u)
            self._link(h, f_t)
            self._link(f_t, c_t)
            self._link(c_t, h)
            # hole orbit: c_h (u->w) then the swallowed halves w->...->u,
            # which point left-to-right and sit below the hole
            self._link(c_h, swallowed[-1])
            for a, b in zip(swallowed[:0:-1], swallowed[-2::-1]):
                self._link(a, b)
            self._link(swallowed[0], c_h)
            self._link(before, f_o)
            self._link(f_o, next_h)
        for s in swallowed:
            self.he_face[s] = hole
        return PolygonHandle(face=hole, root=c_h, perimeter=i + 1)

    # ------------------------------------------------------------------
    # fills

    def hole_cycle(self, handle: PolygonHandle) -> list[int]:
        out = [handle.root]
        h = self.he_next[handle.root]
        while h != handle.root:
            out.append(h)
            h = self.he_next[h]
        return out

    def glue_fill(self, handle: PolygonHandle, fill: "HalfEdgeMap") -> None:
        """Sew a triangulated polygon into an open hole, edge by edge.

        The fill must be a complete disc triangulation whose perimeter equals
        the handle's.  The degenerate closed 2-gon (one edge, no face) is
        accepted for perimeter 2 and identifies the two hole edges.
        """
        if handle.closed:
            raise MapError("handle already filled")
        if handle.face not in self.open_holes:
            raise MapError("handle does not reference an open hole of this map")
        if fill.kind != "disc" or fill.open_holes:
            raise MapError("fill must be a completed disc triangulation")
        hole = self.hole_cycle(handle)
        m = len(hole)
        if m != handle.perimeter:
            raise MapError("corrupt handle: cycle length mismatch")
        fouter = fill.contour_half_edges()
        if len(fouter) != m:
            raise MapError(
                f"fill perimeter {len(fouter)} does not match hole perimeter {m}"
            )
        for h in fill.alive_half_edges():
            if fill.he_origin[h] == fill.dest(h):
                raise MapError("fill contains a self-loop")
        n_faces = sum(1 for f in range(len(fill.f_anchor)) if fill.f_alive[f])
        if n_faces == 0:
            # degenerate closed 2-gon: identify the two hole edges
            if m != 2:
                raise MapError("empty fill is only valid for a 2-gon hole")
            h0, h1 = hole
            a = self.he_twin[h0]
            b = self.he_twin[h1]
            self.he_twin[a] = b
            self.he_twin[b] = a
            self._kill_half_edge(h0)
            self._kill_half_edge(h1)
            self.n_edges -= 1
            for v in (self.he_origin[a], self.he_origin[b]):
                if self.v_anchor[v] < 0 or not self.he_alive[self.v_anchor[v]]:
                    self.v_anchor[v] = a if self.he_origin[a] == v else b
            self.f_alive[handle.face] = False
            self.open_holes.discard(handle.face)
            handle.closed = True
            return
        # host vertex for fill boundary vertex: origin(fouter[j]) -> hole a_{(1-j) mod m}
        hole_v = [self.he_origin[h] for h in hole]
        vmap: dict[int, int] = {}
        for j, oj in enumerate(fouter):
            vmap[fill.he_origin[oj]] = hole_v[(1 - j) % m]
        outer_set = set(fouter)
        hemap: dict[int, int] = {}
        fmap: dict[int, int] = {}
        for x in fill.alive_half_edges():
            if x in outer_set:
                continue
            ox = fill.he_origin[x]
            if ox in vmap:
                host_o = vmap[ox]
            else:
                host_o = self._new_vertex(on_boundary=False)
                vmap[ox] = host_o
            hemap[x] = self._new_half_edge(host_o, -2)
        self.n_edges += fill.n_edges - m
        for f in range(len(fill.f_anchor)):
            if fill.f_alive[f]:
                fmap[f] = self._new_face(FACE_TRIANGLE, 0)
        for x, hx in hemap.items():
            self.he_face[hx] = fmap[fill.he_face[x]]
            self._link(hx, hemap[fill.he_next[x]])
            tw = fill.he_twin[x]
            if tw not in outer_set:
                self.he_twin[hx] = hemap[tw]
        for f, hf in fmap.items():
            self.f_anchor[hf] = hemap[fill.f_anchor[f]]
        # pair fill boundary inner sides with the host sides of the hole edges
        host_partner = [self.he_twin[hk] for hk in hole]
        for j, oj in enumerate(fouter):
            k = (m - j) % m
            host_side = host_partner[k]
            fill_side = hemap[fill.he_twin[oj]]
            self.he_twin[host_side] = fill_side
            self.he_twin[fill_side] = host_side
        for hk in hole:
            self._kill_half_edge(hk)
        for k in range(m):
            v = hole_v[(k + 1) % m]  # host_partner[k] originates at dest(hole[k])
            if self.v_anchor[v] < 0 or not self.he_alive[self.v_anchor[v]]:
                self.v_anchor[v] = host_partner[k]
        self.f_alive[handle.face] = False
        self.open_holes.discard(handle.face)
        handle.closed = True

    # ------------------------------------------------------------------
    # metrics

    def bfs_distance(self, source: int, targets, cap: int | None = None):
        """Graph distance from source to the nearest target vertex.

        `targets` is a predicate on vertex ids.  Multiple edges count as one
        adjacency.  Returns UNREACHED when no target lies within `cap`.
        """
        if targets(source):
            return 0
        dist = {source: 0}
        frontier = [source]
        d = 0
        while frontier:
            d += 1
            if cap is not None and d > cap:
                return UNREACHED
            nxt = []
            for u in frontier:
                for w in self.neighbors(u):
                    if w not in dist:
                        dist[w] = d
                        if targets(w):
                            return d
                        nxt.append(w)
            frontier = nxt
        return UNREACHED

    def bfs_all(self, sources) -> dict[int, int]:
        """Distances from a source set to every reachable vertex."""
        dist = {s: 0 for s in sources}
        frontier = list(dist)
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in self.neighbors(u):
                    if w not in dist:
                        dist[w] = d
                        nxt.append(w)
            frontier = nxt
        return dist

    def counts(self) -> tuple[int, int, int, int]:
        """(vertices, edges, triangles, open holes)."""
        ntri = sum(
            1
            for f in range(len(self.f_anchor))
            if self.f_alive[f] and self.f_kind[f] == FACE_TRIANGLE
        )
        return self.n_vertices, self.n_edges, ntri, len(self.open_holes)

    # ------------------------------------------------------------------
    # integrity

    def check_integrity(self) -> IntegrityReport:
        """Verify every structural invariant; report violations."""
        rep = IntegrityReport()
        alive = [h for h in range(len(self.he_origin)) if self.he_alive[h]]
        aset = set(alive)
        for h in alive:
            t = self.he_twin[h]
            if t not in aset:
                rep.violations.append(f"half-edge {h}: twin {t} is dead or missing")
                continue
            if self.he_twin[t] != h:
                rep.violations.append(f"half-edge {h}: twin is not an involution")
            if t == h:
                rep.violations.append(f"half-edge {h}: twin fixed point")
            if self.he_origin[h] == self.he_origin[t]:
                rep.violations.append(f"half-edge {h}: self-loop")
            n = self.he_next[h]
            if n not in aset:
                rep.violations.append(f"half-edge {h}: next {n} is dead or missing")
            elif self.he_prev[n] != h:
                rep.violations.append(f"half-edge {h}: next/prev mismatch")
        if len(alive) != 2 * self.n_edges:
            rep.violations.append(
                f"edge count {self.n_edges} inconsistent with {len(alive)} half-edges"
            )
        # face orbits
        seen: dict[int, int] = {}
        for h in alive:
            f = self.he_face[h]
            if f >= 0:
                seen[f] = seen.get(f, 0) + 1
        for f, cnt in seen.items():
            if not self.f_alive[f]:
                rep.violations.append(f"face {f}: dead but referenced")
                continue
            a = self.f_anchor[f]
            orbit = [a]
            h = self.he_next[a]
            steps = 0
            while h != a and steps <= cnt + 1:
                orbit.append(h)
                h = self.he_next[h]
                steps += 1
            if len(orbit) != cnt:
                rep.violations.append(f"face {f}: orbit not closed over its half-edges")
            if any(self.he_face[x] != f for x in orbit):
                rep.violations.append(f"face {f}: orbit crosses face labels")
            if self.f_kind[f] == FACE_TRIANGLE and len(orbit) != 3:
                rep.violations.append(f"face {f}: triangle orbit of length {len(orbit)}")
        ntri = sum(
            1 for f in range(len(self.f_anchor))
            if self.f_alive[f] and self.f_kind[f] == FACE_TRIANGLE
        )
        nhole = len(self.open_holes)
        euler = self.n_vertices - self.n_edges + ntri + nhole
        if euler != 1:
            rep.violations.append(
                f"Euler relation violated: V-E+F = {euler} "
                f"(V={self.n_vertices} E={self.n_edges} F={ntri}+{nhole})"
            )
        # degrees, anchors, and rotation closure around every vertex
        deg: dict[int, int] = {}
        for h in alive:
            deg[self.he_origin[h]] = deg.get(self.he_origin[h], 0) + 1
        for v in range(self.n_vertices):
            if self.v_degree[v] != deg.get(v, 0):
                rep.violations.append(
                    f"vertex {v}: stored degree {self.v_degree[v]} != {deg.get(v, 0)}"
                )
            a = self.v_anchor[v]
            if deg.get(v, 0) > 0 and (
                a < 0 or not self.he_alive[a] or self.he_origin[a] != v
            ):
                rep.violations.append(f"vertex {v}: bad anchor")
                continue
            if deg.get(v, 0) > 0:
                rot = 0
                h = a
                while True:
                    if self.he_origin[h] != v:
                        rep.violations.append(f"vertex {v}: rotation leaves the vertex")
                        break
                    rot += 1
                    if rot > deg[v]:
                        rep.violations.append(f"vertex {v}: rotation exceeds degree")
                        break
                    h = self.he_next[self.he_twin[h]]
                    if h == a:
                        if rot != deg[v]:
                            rep.violations.append(
                                f"vertex {v}: rotation closes after {rot} != deg {deg[v]}"
                            )
                        break
        # boundary path simple
        bp = self.boundary_path()
        if self.kind == "half_plane":
            if len(set(bp)) != len(bp):
                rep.violations.append("exposed boundary path repeats a vertex")
            for idx in range(self.b_lo, self.b_hi + 1):
                v = self.bvertex.get(idx)
                if v is None or self.bindex.get(v) != idx:
                    rep.violations.append(f"boundary window index {idx} inconsistent")
                elif not self.v_on_boundary[v]:
                    rep.violations.append(f"boundary vertex {v} not flagged")
        else:
            if bp and len(set(bp)) != len(bp):
                rep.violations.append("outer cycle repeats a vertex")
        return rep

    # ------------------------------------------------------------------
    # serialization

    def serialize(self) -> bytes:
        """Versioned JSON snapshot; see README for the field-by-field format."""
        doc = {
            "version": SERIAL_VERSION,
            "kind": self.kind,
            "root": self.root,
            "n_edges": self.n_edges,
            "vertices": [
                [v, int(self.v_on_boundary[v]), self.bindex.get(v)]
                for v in range(self.n_vertices)
            ],
            "half_edges": [
                [
                    h,
                    self.he_origin[h],
                    self.he_twin[h],
                    self.he_next[h],
                    self.he_face[h],
                    int(self.he_bottom[h]),
                ]
                for h in self.alive_half_edges()
            ],
            "faces": [
                [f, self.f_kind[f], self.f_anchor[f]]
                for f in range(len(self.f_anchor))
                if self.f_alive[f]
            ],
            "window": [self.b_lo, self.b_hi] if self.kind == "half_plane" else None,
            "window_bottoms": (
                [self.left_bottom, self.right_bottom]
                if self.kind == "half_plane"
                else None
            ),
        }
        return json.dumps(doc, separators=(",", ":")).encode()

    @staticmethod
    def deserialize(data: bytes) -> "HalfEdgeMap":
        try:
            doc = json.loads(data.decode())
        except Exception as exc:
            raise MapError(f"malformed map bytes: {exc}") from exc
        if doc.get("version") != SERIAL_VERSION:
            raise MapError(f"unsupported map format version {doc.get('version')!r}")
        m = HalfEdgeMap(doc["kind"])
        nv = len(doc["vertices"])
        m.v_anchor = [-1] * nv
        m.v_on_boundary = [False] * nv
        m.v_degree = [0] * nv
        m.n_vertices = nv
        for v, flag, bidx in doc["vertices"]:
            m.v_on_boundary[v] = bool(flag)
            if bidx is not None:
                m.bindex[v] = bidx
                m.bvertex[bidx] = v
        nh = 1 + max((h for h, *_ in doc["half_edges"]), default=-1)
        m.he_origin = [-1] * nh
        m.he_twin = [-1] * nh
        m.he_next = [-1] * nh
        m.he_prev = [-1] * nh
        m.he_face = [OUTER] * nh
        m.he_bottom = [False] * nh
        m.he_alive = [False] * nh
        for h, origin, twin, nxt, face, bottom in doc["half_edges"]:
            m.he_origin[h] = origin
            m.he_twin[h] = twin
            m.he_next[h] = nxt
            m.he_face[h] = face
            m.he_bottom[h] = bool(bottom)
            m.he_alive[h] = True
            m.v_degree[origin] += 1
            if m.v_anchor[origin] < 0:
                m.v_anchor[origin] = h
        for h in m.alive_half_edges():
            m.he_prev[m.he_next[h]] = h
        nf = 1 + max((f for f, *_ in doc["faces"]), default=-1)
        m.f_anchor = [0] * nf
        m.f_kind = [FACE_TRIANGLE] * nf
        m.f_alive = [False] * nf
        for f, kind, anchor in doc["faces"]:
            m.f_kind[f] = kind
            m.f_anchor[f] = anchor
            m.f_alive[f] = True
            if kind == FACE_HOLE:
                m.open_holes.add(f)
        m.root = doc["root"]
        m.n_edges = doc["n_edges"]
        if doc["window"] is not None:
            m.b_lo, m.b_hi = doc["window"]
            m.left_bottom, m.right_bottom = doc["window_bottoms"]
        return m

    @staticmethod
    def disc_from_triangles(boundary: list, triangles: list) -> "HalfEdgeMap":
        """Build a disc map from a boundary cycle and unordered triangles.

        `boundary` lists the outer cycle counter-clockwise (interior on the
        left); `triangles` are vertex triples in any orientation.  The face
        orientations are resolved by propagation from the boundary.  Only
        simple triangulations (no multiple edges) are supported.
        """
        nb = len(boundary)
        if nb < 3:
            raise MapError("boundary cycle needs at least 3 vertices")
        edge_faces: dict[frozenset, list[int]] = {}
        for fi, tri in enumerate(triangles):
            if len(set(tri)) != 3:
                raise MapError(f"triangle {fi} has repeated vertices")
            for k in range(3):
                e = frozenset((tri[k], tri[(k + 1) % 3]))
                edge_faces.setdefault(e, []).append(fi)
        bset = {
            frozenset((boundary[k], boundary[(k + 1) % nb])) for k in range(nb)
        }
        if len(bset) != nb:
            raise MapError("boundary cycle repeats an edge")
        for e, fs in edge_faces.items():
            want = 1 if e in bset else 2
            if len(fs) != want:
                raise MapError(f"edge {sorted(e)} borders {len(fs)} faces, wanted {want}")
        # orient faces: the directed boundary edge (b_k -> b_{k+1}) belongs to
        # its unique face; interior edges take opposite directions in their
        # two faces
        oriented: dict[int, tuple] = {}
        queue = []
        for k in range(nb):
            a, b = boundary[k], boundary[(k + 1) % nb]
            fi = edge_faces[frozenset((a, b))][0]
            tri = triangles[fi]
            c = next(x for x in tri if x not in (a, b))
            want = (a, b, c)
            if fi in oriented:
                if oriented[fi] not in {(a, b, c), (b, c, a), (c, a, b)}:
                    raise MapError("boundary orientation conflict")
            else:
                oriented[fi] = want
                queue.append(fi)
        while queue:
            fi = queue.pop()
            a, b, c = oriented[fi]
            for x, y in ((a, b), (b, c), (c, a)):
                e = frozenset((x, y))
                for fj in edge_faces[e]:
                    if fj == fi or fj in oriented:
                        if fj != fi and fj in oriented:
                            o = oriented[fj]
                            dirs = {(o[0], o[1]), (o[1], o[2]), (o[2], o[0])}
                            if (y, x) not in dirs:
                                raise MapError("inconsistent triangle orientations")
                        continue
                    z = next(t for t in triangles[fj] if t not in (x, y))
                    oriented[fj] = (y, x, z)
                    queue.append(fj)
        if len(oriented) != len(triangles):
            raise MapError("triangulation is not edge-connected to the boundary")
        m = HalfEdgeMap("disc")
        vids: dict = {}

        def vid(label):
            if label not in vids:
                vids[label] = m._new_vertex(on_boundary=False)
            return vids[label]

        for b in boundary:
            vid(b)
        directed: dict[tuple, int] = {}
        for fi in range(len(triangles)):
            a, b, c = oriented[fi]
            f = m._new_face(FACE_TRIANGLE, 0)
            hs = []
            for x, y in ((a, b), (b, c), (c, a)):
                if (x, y) in directed:
                    raise MapError("directed edge used twice (multi-edge?)")
                h = m._new_half_edge(vid(x), f)
                directed[(x, y)] = h
                hs.append(h)
            m.f_anchor[f] = hs[0]
            m._link(hs[0], hs[1])
            m._link(hs[1], hs[2])
            m._link(hs[2], hs[0])
        outer = []
        for k in range(nb):
            a, b = boundary[k], boundary[(k + 1) % nb]
            h = m._new_half_edge(vid(b), OUTER)
            directed[(b, a)] = h
            outer.append(h)
        for k in range(nb):
            m._link(outer[k], outer[k - 1])  # outer orbit runs clockwise
        for (x, y), h in directed.items():
            m.he_twin[h] = directed[(y, x)]
        m.n_edges = len(directed) // 2
        m.root = outer[0]
        rep = m.check_integrity()
        if not rep.ok:
            raise MapError(f"disc_from_triangles produced a broken map: {rep}")
        return m

    def normalized(self) -> bytes:
        """Canonical serialization: ids renumbered by traversal from the root.

        Two maps are structurally isomorphic (as rooted maps) exactly when
        their normalized serializations agree.
        """
        horder: dict[int, int] = {}
        stack = [self.root]
        while stack:
            h = stack.pop()
            if h in horder or h < 0 or not self.he_alive[h]:
                continue
            horder[h] = len(horder)
            stack.append(self.he_twin[h])
            stack.append(self.he_next[h])
        vorder: dict[int, int] = {}
        for h in sorted(horder, key=horder.get):
            v = self.he_origin[h]
            if v not in vorder:
                vorder[v] = len(vorder)
        forder: dict[int, int] = {}
        for h in sorted(horder, key=horder.get):
            f = self.he_face[h]
            if f >= 0 and f not in forder:
                forder[f] = len(forder)
        doc = {
            "kind": self.kind,
            "root": 0,
            "vertices": [
                [vorder[v], int(self.v_on_boundary[v]), self.bindex.get(v)]
                for v in sorted(vorder, key=vorder.get)
            ],
            "half_edges": [
                [
                    horder[h],
                    vorder[self.he_origin[h]],
                    horder[self.he_twin[h]],
                    horder[self.he_next[h]],
                    forder.get(self.he_face[h], OUTER),
                    int(self.he_bottom[h]),
                ]
                for h in sorted(horder, key=horder.get)
            ],
        }
        return json.dumps(doc, separators=(",", ":")).encode()
