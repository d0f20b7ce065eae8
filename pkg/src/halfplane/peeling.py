"""The half-plane peeling step law and the two revelation algorithms.

A peeling step at an exposed boundary edge reveals the triangle sitting on
it.  With probability alpha the triangle has a fresh internal apex; with
probability p_i it connects to the boundary vertex i steps to the left or
right (each side equally likely), swallowing a finite region that is filled
by an independent free triangulation of an (i+1)-gon with parameter
q = alpha*beta, where beta = alpha*(1-alpha)/2 and

    p_i = beta^i * Z_{i+1}(alpha*beta).

The law of the unrevealed region is unchanged by any revelation whose edge
choices do not look at it, so peeling events are i.i.d. across steps.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field
from math import exp, log

from .boltzmann import BoltzmannParams, FreeSampleStats, log_partition_Z, sample_free
from .map_core import HalfEdgeMap, MapError

ALPHA_CRITICAL = 2.0 / 3.0


class BudgetExhausted(RuntimeError):
    """A revelation budget ran out; the partial state remains valid."""


@dataclass
class StepLaw:
    """Truncated peeling step distribution {alpha; p_1..p_I_max}."""

    alpha: float
    beta: float
    q: float
    tail_tol: float
    p: list[float]          # p[i-1] = p_i
    I_max: int
    tail_mass: float

    def log_p(self, i: int) -> float:
        """log p_i for any i >= 1, evaluated directly in log space."""
        return i * log(self.beta) + log_partition_Z(i + 1, self.q)

    def normalization_defect(self) -> float:
        """alpha + 2 sum p_i + tail - 1 (should be ~ float epsilon)."""
        return math.fsum([self.alpha] + [2 * x for x in self.p]) + self.tail_mass - 1.0


def make_step_law(
    alpha: float,
    tail_tol: float = 1e-12,
    i_cap: int = 20000,
    explore: bool = False,
) -> StepLaw:
    """Build the step law for H_alpha, truncated once the two-sided tail
    falls below tail_tol.

    Requires alpha in (2/3, 1); smaller alpha loses the exponential tail
    (and below 2/3 the formula stops normalizing), so it is accepted only
    with explore=True for exploratory runs.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha <= ALPHA_CRITICAL:
        if not explore:
            raise ValueError(
                f"alpha = {alpha} is outside the hyperbolic regime (2/3, 1); "
                "pass explore=True to proceed anyway"
            )
        warnings.warn(
            "tail truncation is unsound at alpha <= 2/3: p_i loses its "
            "exponential tail and the truncated law is biased",
            stacklevel=2,
        )
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    beta = alpha * (1.0 - alpha) / 2.0
    q = alpha * beta
    lb = log(beta)
    terms: list[float] = []
    floor = tail_tol * 1e-5
    i = 1
    while True:
        t = 2.0 * exp(i * lb + log_partition_Z(i + 1, q))
        terms.append(t)
        if t < floor and i >= 4:
            break
        if i >= i_cap:
            raise ValueError(
                f"I_max would exceed {i_cap}: tail_tol={tail_tol} is too small "
                f"for alpha={alpha}"
            )
        i += 1
    # geometric bound on the mass beyond the computed terms
    r = terms[-1] / terms[-2]
    rem = terms[-1] * r / (1.0 - r) if r < 1.0 else math.inf
    # smallest I with sum_{i > I} 2 p_i <= tail_tol
    mass = rem
    I_max = len(terms)
    while I_max > 1 and mass + terms[I_max - 1] <= tail_tol:
        mass += terms[I_max - 1]
        I_max -= 1
    tail_mass = mass
    return StepLaw(
        alpha=alpha,
        beta=beta,
        q=q,
        tail_tol=tail_tol,
        p=[t / 2.0 for t in terms[:I_max]],
        I_max=I_max,
        tail_mass=tail_mass,
    )


@dataclass
class PeelEvent:
    kind: str                      # "alpha" | "connect"
    side: str | None = None        # "L" | "R" for connect
    i: int | None = None
    fill_stats: FreeSampleStats | None = None
    edges_added: int = 0
    new_vertex: int | None = None  # apex, for alpha steps


@dataclass
class HullReport:
    r: int
    peels: int
    ball_sizes: list[int]          # |B_1| .. |B_r| (vertex counts)
    ball_edge_counts: list[int]    # edges with both endpoints in B_k
    exhausted: bool = False
    distances: dict[int, int] = field(default_factory=dict, repr=False)


def event_probability(alpha: float, internal_vertices: int, faces: int) -> float:
    """Probability that a fixed finite configuration Q sits on the boundary.

    Q must be simply connected with a simple boundary, meeting the infinite
    boundary exactly in its marked segment; then P = alpha^V * beta^(F-V)
    with V internal vertices and F faces.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if internal_vertices < 0 or faces < 0 or faces < internal_vertices:
        raise ValueError("need 0 <= V <= F")
    beta = alpha * (1.0 - alpha) / 2.0
    return alpha**internal_vertices * beta ** (faces - internal_vertices)


class LazyHalfPlane:
    """A partially revealed half-planar triangulation.

    Owns the map, the rng stream, the step law, and revelation accounting.
    The boundary window extends automatically before any step that would
    run past its ends.  One instance per execution context.
    """

    def __init__(
        self,
        law: StepLaw,
        rng,
        init_width: int = 3,
        max_vertices: int | None = None,
    ):
        self.law = law
        self.rng = rng
        self.params = BoltzmannParams(law.q)
        self.map = HalfEdgeMap.half_plane_segment(init_width)
        self.max_vertices = max_vertices
        self.peel_count = 0
        self.draws = 0
        self.tail_overflows = 0
        self.window_extensions = 0

    # -- step sampling --------------------------------------------------

    def _sample_event(self) -> tuple[str, str | None, int | None]:
        law = self.law
        while True:
            u = self.rng.random()
            self.draws += 1
            if u < law.alpha:
                return "alpha", None, None
            rem = u - law.alpha
            for idx, pi in enumerate(law.p):
                if rem < pi:
                    return "connect", "L", idx + 1
                rem -= pi
                if rem < pi:
                    return "connect", "R", idx + 1
                rem -= pi
            self.tail_overflows += 1  # landed in the truncated tail: resample

    # -- window management ----------------------------------------------

    def _ensure_contour(self, h: int, side: str, need: int) -> None:
        m = self.map
        avail = 0
        cur = h
        while avail < need:
            cur = m.he_next[cur] if side == "R" else m.he_prev[cur]
            if m.is_contour(cur):
                avail += 1
            else:
                break
        if avail < need:
            m.extend_boundary(side, need - avail)
            self.window_extensions += need - avail

    # -- peeling ---------------------------------------------------------

    def peel_edge(self, h: int) -> PeelEvent:
        """Reveal the triangle on exposed edge h (plus any swallowed region)."""
        m = self.map
        if not m.is_contour(h):
            raise MapError("peel_edge: edge is not on the exposed boundary")
        if self.max_vertices is not None and m.n_vertices >= self.max_vertices:
            raise BudgetExhausted(f"vertex budget {self.max_vertices} reached")
        kind, side, i = self._sample_event()
        edges_before = m.n_edges
        if kind == "alpha":
            w = m.attach_alpha_triangle(h)
            self.peel_count += 1
            return PeelEvent(
                kind="alpha", edges_added=m.n_edges - edges_before, new_vertex=w
            )
        self._ensure_contour(h, side, i)
        handle = m.attach_connect_triangle(h, side, i)
        fill, stats = sample_free(i + 1, self.law.q, self.rng, params=self.params)
        self.draws += stats.draws
        m.glue_fill(handle, fill)
        self.peel_count += 1
        return PeelEvent(
            kind="connect",
            side=side,
            i=i,
            fill_stats=stats,
            edges_added=m.n_edges - edges_before,
        )

    def peel_root(self) -> PeelEvent:
        """Peel at the root edge (it must still be exposed)."""
        return self.peel_edge(self.map.root)

    # -- exposure queries -------------------------------------------------

    def exposed_edge_at(self, v: int):
        """Some exposed edge incident to v, or None if v is interior."""
        m = self.map
        if m.v_degree[v] == 0:
            return None
        for h in m.out_half_edges(v):
            if m.is_contour(h):
                return h
            t = m.he_twin[h]
            if m.is_contour(t):
                return t
        return None

    def is_exposed(self, v: int) -> bool:
        return self.exposed_edge_at(v) is not None

    # -- hull revelation ---------------------------------------------------

    def _relax(self, dist: dict[int, int], seeds) -> list[int]:
        """Propagate shorter distances after structure was added."""
        m = self.map
        queue = list(seeds)
        improved = []
        while queue:
            u = queue.pop()
            du = dist[u]
            for w in m.neighbors(u):
                if dist.get(w, 1 << 60) > du + 1:
                    dist[w] = du + 1
                    queue.append(w)
                    improved.append(w)
        return improved

    def reveal_hull(
        self,
        centers,
        r: int,
        max_peels: int | None = None,
    ) -> HullReport:
        """Peel until every vertex within distance < r of the centers is
        interior to the revealed region (so the hull of B_r is revealed and
        all distances <= r are exact)."""
        if r < 0:
            raise ValueError("radius must be >= 0")
        m = self.map
        centers = list(centers)
        dist: dict[int, int] = {c: 0 for c in centers}
        self._relax(dist, centers)
        peels = 0
        exhausted = False
        if r > 0:
            heap = [(d, v) for v, d in dist.items() if d < r and self.is_exposed(v)]
            heapq.heapify(heap)
            while heap:
                d, v = heapq.heappop(heap)
                if dist.get(v, 1 << 60) != d or d >= r:
                    continue
                h = self.exposed_edge_at(v)
                if h is None:
                    continue
                if max_peels is not None and peels >= max_peels:
                    exhausted = True
                    break
                if self.max_vertices is not None and m.n_vertices >= self.max_vertices:
                    exhausted = True
                    break
                n_he_before = len(m.he_origin)
                self.peel_edge(h)
                peels += 1
                touched = set()
                for hh in range(n_he_before, len(m.he_origin)):
                    if m.he_alive[hh]:
                        a = m.he_origin[hh]
                        if a in dist:
                            touched.add(a)
                improved = self._relax(dist, touched)
                for w in set(improved):
                    if dist[w] < r and self.is_exposed(w):
                        heapq.heappush(heap, (dist[w], w))
                if self.is_exposed(v):
                    heapq.heappush(heap, (dist[v], v))
        sizes = [0] * (r + 1)
        for v, d in dist.items():
            if d <= r:
                sizes[d] += 1
        ball_sizes = []
        acc = 0
        for k in range(r + 1):
            acc += sizes[k]
            if k >= 1:
                ball_sizes.append(acc)
        edges_by_d = [0] * (r + 1)
        for h in m.alive_half_edges():
            if h < m.he_twin[h]:  # one half-edge per edge
                da = dist.get(m.he_origin[h])
                db = dist.get(m.dest(h))
                if da is not None and db is not None and max(da, db) <= r:
                    edges_by_d[max(da, db)] += 1
        edge_counts = []
        acc = 0
        for k in range(r + 1):
            acc += edges_by_d[k]
            if k >= 1:
                edge_counts.append(acc)
        return HullReport(
            r=r,
            peels=peels,
            ball_sizes=ball_sizes,
            ball_edge_counts=edge_counts,
            exhausted=exhausted,
            distances=dist,
        )

    def reveal_walk_neighborhood(self, v: int, max_peels: int | None = None) -> int:
        """Peel until v is interior, so a walk step from v is well defined."""
        peels = 0
        while True:
            h = self.exposed_edge_at(v)
            if h is None:
                return peels
            if max_peels is not None and peels >= max_peels:
                raise BudgetExhausted("reveal_walk_neighborhood peel budget reached")
            self.peel_edge(h)
            peels += 1
