"""Partition functions and Boltzmann (free) triangulations of polygons.

The free distribution on triangulations of an m-gon with weight parameter
q <= 2/27 assigns probability q^n / Z_m(q) to each triangulation with n
internal vertices, where Z_m(q) = sum_n phi(n, m) q^n and phi(n, m) counts
rooted triangulations (no self-loops, multiple edges allowed).

Z has a closed form in terms of the root theta of q = theta*(1-2*theta)^2:

    Z_{m+2}(q) = ((1-6t)m + 2-6t) * (2m)! / (m! (m+2)!) * (1-2t)^(-(2m+2))

The sampler peels the polygon recursively.  At perimeter p the face on the
root edge either has a fresh internal apex (probability q*Z_{p+1}/Z_p) or
connects to the j-th boundary vertex (probability Z_{j+1}*Z_{p-j}/Z_p for
j = 1..p-2), splitting the hole in two.  A 2-gon hole closes up (its two
edges are identified) with probability 1/Z_2.  This one-step law is not
spelled out in the source material; it is derived from the definition plus
the closed form, and is validated against phi_count and the recursion

    Z_p = q Z_{p+1} + sum_{j=1}^{p-2} Z_{j+1} Z_{p-j},      Z_2 = 1 + q Z_3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import exp, lgamma, log, log1p

from .map_core import FACE_HOLE, FACE_TRIANGLE, HalfEdgeMap, MapError, PolygonHandle

Q_MAX = 2.0 / 27.0
_Q_EPS = 1e-15

DEFAULT_PHI_CAP = 10


def solve_theta(q: float) -> float:
    """The unique theta in [0, 1/6] with theta*(1-2*theta)^2 = q.

    The cubic is strictly increasing on this interval; bisection plus a
    Newton polish reaches absolute tolerance 1e-14.
    """
    if not 0.0 <= q <= Q_MAX + _Q_EPS:
        raise ValueError(f"q must lie in [0, 2/27], got {q}")
    if q <= 0.0:
        return 0.0
    if q >= Q_MAX:
        return 1.0 / 6.0
    lo, hi = 0.0, 1.0 / 6.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid * (1.0 - 2.0 * mid) ** 2 < q:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(4):
        ft = t * (1.0 - 2.0 * t) ** 2 - q
        dft = (1.0 - 2.0 * t) * (1.0 - 6.0 * t)
        if dft <= 0:
            break
        t -= ft / dft
        t = min(max(t, 0.0), 1.0 / 6.0)
    return t


def log_partition_Z(m: int, q: float, theta: float | None = None) -> float:
    """log Z_m(q) for perimeter m >= 2, evaluated stably for large m."""
    if m < 2:
        raise ValueError(f"perimeter must be >= 2, got {m}")
    if not 0.0 <= q <= Q_MAX + _Q_EPS:
        raise ValueError(f"q must lie in [0, 2/27], got {q}")
    t = solve_theta(q) if theta is None else theta
    mm = m - 2
    lcat = lgamma(2 * mm + 1) - lgamma(mm + 1) - lgamma(mm + 3)
    return log((1.0 - 6.0 * t) * mm + 2.0 - 6.0 * t) + lcat - (2 * mm + 2) * log1p(-2.0 * t)


def partition_Z(m: int, q: float, theta: float | None = None) -> float:
    """Z_m(q) by the closed form; inf when the value exceeds float range."""
    lz = log_partition_Z(m, q, theta)
    try:
        return exp(lz)
    except OverflowError:
        return math.inf


@dataclass
class BoltzmannParams:
    """Weight q with its root theta, plus cached tables for sampling."""

    q: float
    theta: float = field(default=None)  # type: ignore[assignment]
    _logZ: list[float] = field(default_factory=list, repr=False)
    _steps: dict[int, tuple[float, list[float]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.q <= Q_MAX + _Q_EPS:
            raise ValueError(f"q must lie in [0, 2/27], got {self.q}")
        if self.theta is None:
            self.theta = solve_theta(self.q)
        if abs(self.theta * (1.0 - 2.0 * self.theta) ** 2 - self.q) > 1e-14:
            raise ValueError("theta does not match q")

    def logZ(self, m: int) -> float:
        while len(self._logZ) < m + 1:
            p = len(self._logZ)
            self._logZ.append(
                log_partition_Z(p, self.q, self.theta) if p >= 2 else math.nan
            )
        return self._logZ[m]

    def Z(self, m: int) -> float:
        return exp(self.logZ(m))

    def step_probabilities(self, p: int) -> tuple[float, list[float]]:
        """(P[internal apex], [P[connect to j-th vertex] for j=1..p-2])."""
        cached = self._steps.get(p)
        if cached is not None:
            return cached
        lzp = self.logZ(p)
        p_int = self.q * exp(self.logZ(p + 1) - lzp) if self.q > 0 else 0.0
        if p == 2:
            probs = (p_int, [])
        else:
            connect = [
                exp(self.logZ(j + 1) + self.logZ(p - j) - lzp) for j in range(1, p - 1)
            ]
            probs = (p_int, connect)
        self._steps[p] = probs
        return probs

    def close_probability(self) -> float:
        """Probability that a 2-gon hole closes up with no internal vertex."""
        return exp(-self.logZ(2))


@dataclass
class FreeSampleStats:
    internal_vertex_count: int
    face_count: int
    perimeter: int
    draws: int = 0

    def euler_consistent(self) -> bool:
        return self.face_count == 2 * self.internal_vertex_count + self.perimeter - 2


def phi_count(n: int, m: int, cap: int = DEFAULT_PHI_CAP, _memo: dict | None = None) -> int:
    """Exact number of triangulations of an m-gon with n internal vertices.

    Exhaustive recursive construction over the peeling decomposition of the
    root edge, memoized.  Guarded by a size cap since counts explode.
    """
    if m < 2 or n < 0:
        raise ValueError("need m >= 2 and n >= 0")
    if n + m > cap:
        raise ValueError(f"phi_count cap exceeded: n + m = {n + m} > {cap}")
    memo: dict = {} if _memo is None else _memo

    def rec(nn: int, mm: int) -> int:
        if nn < 0:
            return 0
        key = (nn, mm)
        got = memo.get(key)
        if got is not None:
            return got
        if mm == 2:
            out = (1 if nn == 0 else 0) + rec(nn - 1, 3)
        else:
            out = rec(nn - 1, mm + 1)
            for j in range(1, mm - 1):
                for a in range(nn + 1):
                    left = rec(a, j + 1)
                    if left:
                        out += left * rec(nn - a, mm - j)
        memo[key] = out
        return out

    return rec(n, m)


def _close_two_gon_hole(m: HalfEdgeMap, handle: PolygonHandle) -> None:
    h0 = handle.root
    h1 = m.he_next[h0]
    a = m.he_twin[h0]
    b = m.he_twin[h1]
    m.he_twin[a] = b
    m.he_twin[b] = a
    m._kill_half_edge(h0)
    m._kill_half_edge(h1)
    m.n_edges -= 1
    for v in (m.he_origin[a], m.he_origin[b]):
        if m.v_anchor[v] < 0 or not m.he_alive[m.v_anchor[v]]:
            m.v_anchor[v] = a if m.he_origin[a] == v else b
    m.f_alive[handle.face] = False
    m.open_holes.discard(handle.face)
    handle.closed = True


def _apex_step(m: HalfEdgeMap, handle: PolygonHandle) -> PolygonHandle:
    """Triangle with a fresh internal apex over the hole's root edge."""
    h = handle.root
    a = m.he_origin[h]
    b = m.dest(h)
    prev_h = m.he_prev[h]
    next_h = m.he_next[h]
    w = m._new_vertex(on_boundary=False)
    f = m._new_face(FACE_TRIANGLE, h)
    t_bw = m._new_half_edge(b, f)
    t_wa = m._new_half_edge(w, f)
    o_aw = m._new_half_edge(a, handle.face)
    o_wb = m._new_half_edge(w, handle.face)
    m.he_twin[t_bw] = o_wb
    m.he_twin[o_wb] = t_bw
    m.he_twin[t_wa] = o_aw
    m.he_twin[o_aw] = t_wa
    m.n_edges += 2
    m.he_face[h] = f
    m._link(h, t_bw)
    m._link(t_bw, t_wa)
    m._link(t_wa, h)
    m._link(prev_h, o_aw)
    m._link(o_aw, o_wb)
    m._link(o_wb, next_h)
    m.f_anchor[handle.face] = o_wb
    return PolygonHandle(face=handle.face, root=o_wb, perimeter=handle.perimeter + 1)


def _connect_step(
    m: HalfEdgeMap, handle: PolygonHandle, j: int
) -> tuple[PolygonHandle, PolygonHandle]:
    """Split the hole with a triangle from the root edge to its j-th vertex."""
    p = handle.perimeter
    h = handle.root
    a = m.he_origin[h]
    b = m.dest(h)
    cyc = [h]
    cur = m.he_next[h]
    while cur != h:
        cyc.append(cur)
        cur = m.he_next[cur]
    u = m.dest(cyc[j])
    f = m._new_face(FACE_TRIANGLE, h)
    t_bu = m._new_half_edge(b, f)
    t_ua = m._new_half_edge(u, f)
    h1 = m._new_face(FACE_HOLE, 0)
    h2 = m._new_face(FACE_HOLE, 0)
    o_ub = m._new_half_edge(u, h1)
    o_au = m._new_half_edge(a, h2)
    m.he_twin[t_bu] = o_ub
    m.he_twin[o_ub] = t_bu
    m.he_twin[t_ua] = o_au
    m.he_twin[o_au] = t_ua
    m.n_edges += 2
    m.he_face[h] = f
    m._link(h, t_bu)
    m._link(t_bu, t_ua)
    m._link(t_ua, h)
    # first hole: chord side (u->b), then cyc[1..j]
    m._link(o_ub, cyc[1])
    m._link(cyc[j], o_ub)
    for x in cyc[1 : j + 1]:
        m.he_face[x] = h1
    m.f_anchor[h1] = o_ub
    # second hole: chord side (a->u), then cyc[j+1..p-1]
    m._link(o_au, cyc[j + 1])
    m._link(cyc[p - 1], o_au)
    for x in cyc[j + 1 :]:
        m.he_face[x] = h2
    m.f_anchor[h2] = o_au
    m.f_alive[handle.face] = False
    m.open_holes.discard(handle.face)
    m.open_holes.add(h1)
    m.open_holes.add(h2)
    handle.closed = True
    return (
        PolygonHandle(face=h1, root=o_ub, perimeter=j + 1),
        PolygonHandle(face=h2, root=o_au, perimeter=p - j),
    )


def sample_free(
    m_gon: int,
    q: float,
    rng,
    params: BoltzmannParams | None = None,
    max_steps: int | None = None,
) -> tuple[HalfEdgeMap, FreeSampleStats]:
    """Draw an exact free triangulation of an m-gon with parameter q.

    Returns the triangulation as a disc map together with sample statistics.
    `rng` is a numpy Generator; the number of uniform draws is recorded.
    """
    if m_gon < 2:
        raise ValueError("perimeter must be >= 2")
    if params is None:
        params = BoltzmannParams(q)
    elif abs(params.q - q) > 1e-15:
        raise ValueError("params.q does not match q")
    m, handle = HalfEdgeMap.polygon(m_gon)
    stack = [handle]
    draws = 0
    steps = 0
    while stack:
        hd = stack.pop()
        p = hd.perimeter
        u = rng.random()
        draws += 1
        steps += 1
        if max_steps is not None and steps > max_steps:
            raise RuntimeError("sample_free exceeded max_steps")
        p_int, connect = params.step_probabilities(p)
        if p == 2:
            if u < p_int:
                stack.append(_apex_step(m, hd))
            else:
                _close_two_gon_hole(m, hd)
            continue
        if u < p_int:
            stack.append(_apex_step(m, hd))
            continue
        acc = p_int
        chosen = len(connect)  # fall through to the last option on fp residue
        for idx, pj in enumerate(connect):
            acc += pj
            if u < acc:
                chosen = idx
                break
        j = min(chosen, len(connect) - 1) + 1
        hd1, hd2 = _connect_step(m, hd, j)
        stack.append(hd1)
        stack.append(hd2)
    ntri = sum(
        1 for f in range(len(m.f_anchor)) if m.f_alive[f] and m.f_kind[f] == FACE_TRIANGLE
    )
    stats = FreeSampleStats(
        internal_vertex_count=m.n_vertices - m_gon,
        face_count=ntri,
        perimeter=m_gon,
        draws=draws,
    )
    return m, stats
