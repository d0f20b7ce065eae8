"""Simple random walk on the lazy map, exact distance certificates, and
exact/Monte-Carlo return probabilities.

The walk and the revelation run together: before each step the hull of the
radius-1 ball around the walker is revealed, so the step distribution is
exact.  Distance-to-boundary values are certified by hull revelation: once
the hull of radius r around the position is revealed, every distance < r
within the revealed map is the true distance in the infinite map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .peeling import BudgetExhausted, LazyHalfPlane, StepLaw, make_step_law
from .seeds import rng_for


@dataclass
class DistanceCertificate:
    lower: int
    upper: int
    exact: bool
    revelation_cost: int

    def __post_init__(self):
        assert self.lower <= self.upper
        assert self.exact == (self.lower == self.upper)


class WalkState:
    """A walker on a lazily revealed half-plane map.

    Position is always interior to the revealed region before each step
    (reveal_walk_neighborhood guarantees it), so steps are exact.
    """

    def __init__(self, lazy: LazyHalfPlane, start: int | None = None):
        self.lazy = lazy
        self.position = lazy.map.root_vertex() if start is None else start
        self.step_index = 0
        self.boundary_visits = 0
        self.last_boundary_visit: int | None = None
        self.checkpoints: list[tuple[int, int]] = []
        if lazy.map.v_on_boundary[self.position]:
            self.boundary_visits += 1
            self.last_boundary_visit = 0

    def step(self) -> int:
        """One SRW move: each incident half-edge equally likely, so a double
        edge is traversed with probability 2/deg."""
        m = self.lazy.map
        v = self.position
        self.lazy.reveal_walk_neighborhood(v)
        deg = m.degree(v)
        k = int(self.lazy.rng.integers(deg))
        self.lazy.draws += 1
        h = m.v_anchor[v]
        for _ in range(k):
            h = m.he_next[m.he_twin[h]]
        self.position = m.dest(h)
        self.step_index += 1
        if m.v_on_boundary[self.position]:
            self.boundary_visits += 1
            self.last_boundary_visit = self.step_index
        return self.position

    def run(self, n_steps: int, checkpoint_stride: int | None = None) -> None:
        for _ in range(n_steps):
            self.step()
            if checkpoint_stride and self.step_index % checkpoint_stride == 0:
                self.checkpoints.append((self.step_index, self.position))


def distance_to_boundary(
    state: WalkState,
    r_cap: int = 8,
    max_peels: int | None = None,
) -> DistanceCertificate:
    """Certified bounds on the distance from the walker to the boundary.

    Reveals hulls of growing radius around the position.  Once the nearest
    boundary vertex lies within the certified radius the value is exact;
    otherwise honest bounds are returned (lower = certified radius + 1 when
    no boundary vertex was seen that close).
    """
    lazy = state.lazy
    m = lazy.map
    pos = state.position
    if m.v_on_boundary[pos]:
        return DistanceCertificate(0, 0, True, 0)
    cost0 = lazy.peel_count
    certified = 0
    upper = None
    budget_left = max_peels
    for r in range(1, r_cap + 1):
        rep = lazy.reveal_hull([pos], r, max_peels=budget_left)
        if budget_left is not None:
            budget_left -= rep.peels
        upper = min(
            d for v, d in rep.distances.items() if m.v_on_boundary[v]
        )
        if rep.exhausted:
            break
        certified = r
        if upper <= r:
            cost = lazy.peel_count - cost0
            return DistanceCertificate(upper, upper, True, cost)
    cost = lazy.peel_count - cost0
    lower = min(upper, certified + 1)
    return DistanceCertificate(lower, upper, lower == upper, cost)


def distance_in_revealed(state: WalkState, target: int) -> int:
    """Distance to a target vertex within the revealed region (upper bound)."""
    return state.lazy.map.bfs_distance(state.position, lambda v: v == target)


# ---------------------------------------------------------------------------
# return probabilities


def _ball_adjacency(m, dist: dict[int, int], n: int):
    verts = sorted(v for v, d in dist.items() if d <= n)
    idx = {v: k for k, v in enumerate(verts)}
    rows, cols = [], []
    for h in m.alive_half_edges():
        a, b = m.he_origin[h], m.dest(h)
        ia = idx.get(a)
        ib = idx.get(b)
        if ia is not None and ib is not None:
            rows.append(ia)
            cols.append(ib)
    data = np.ones(len(rows))
    A = sparse.csr_matrix((data, (rows, cols)), shape=(len(verts), len(verts)))
    return A, idx


def return_probability_exact_on(lazy: LazyHalfPlane, n: int, max_peels: int | None = None) -> float:
    """Quenched P(X_n = root) on this map, exactly.

    Reveals the hull of radius n around the root; an n-step walk cannot
    leave it, so n sparse probability-vector products give the exact value.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0
    rho = lazy.map.root_vertex()
    rep = lazy.reveal_hull([rho], n, max_peels=max_peels)
    if rep.exhausted:
        raise BudgetExhausted(
            f"hull of radius {n} did not fit the revelation budget"
        )
    A, idx = _ball_adjacency(lazy.map, rep.distances, n)
    deg = np.asarray(A.sum(axis=1)).ravel()
    p = np.zeros(A.shape[0])
    p[idx[rho]] = 1.0
    for _ in range(n):
        p = A.T @ (p / deg)
    return float(p[idx[rho]])


def return_probability_exact(
    alpha: float,
    n: int,
    seed: int,
    max_vertices: int = 2_000_000,
    law: StepLaw | None = None,
) -> float:
    """Exact quenched return probability on a fresh map sampled from seed."""
    law = law or make_step_law(alpha)
    lazy = LazyHalfPlane(law, rng_for(seed, "return-exact"), max_vertices=max_vertices)
    return return_probability_exact_on(lazy, n)


def two_step_return_oracle(lazy: LazyHalfPlane) -> float:
    """Closed-form P(X_2 = root): sum over distinct neighbors u of
    (m(root,u)/deg(root)) * (m(u,root)/deg(u)), multiplicities counted."""
    m = lazy.map
    rho = m.root_vertex()
    lazy.reveal_walk_neighborhood(rho)
    mult: dict[int, int] = {}
    for h in m.out_half_edges(rho):
        u = m.dest(h)
        mult[u] = mult.get(u, 0) + 1
        lazy.reveal_walk_neighborhood(u)
    total = 0.0
    for u, k in mult.items():
        total += (k / m.degree(rho)) * (k / m.degree(u))
    return total


@dataclass
class McEstimate:
    n: int
    estimate: float
    stderr: float
    hits: int
    walks: int


def return_probability_mc(
    alpha: float,
    n_list,
    walks: int,
    seed: int,
    walks_per_map: int = 100,
    max_vertices: int | None = None,
    law: StepLaw | None = None,
) -> list[McEstimate]:
    """Annealed return-frequency estimates over independent (map, walk)
    replicas, with map-clustered standard errors."""
    if walks < 1:
        raise ValueError("walks must be >= 1")
    n_list = sorted(set(int(n) for n in n_list))
    n_max = n_list[-1]
    law = law or make_step_law(alpha)
    n_maps = max(1, math.ceil(walks / walks_per_map))
    per_map_rate = np.zeros((n_maps, len(n_list)))
    total_hits = np.zeros(len(n_list), dtype=int)
    total_walks = 0
    for mi in range(n_maps):
        rng = rng_for(seed, "return-mc", mi)
        lazy = LazyHalfPlane(law, rng, max_vertices=max_vertices)
        rho = lazy.map.root_vertex()
        w_here = min(walks_per_map, walks - mi * walks_per_map)
        hits = np.zeros(len(n_list), dtype=int)
        for _ in range(w_here):
            st = WalkState(lazy)
            ptr = 0
            for step in range(1, n_max + 1):
                st.step()
                if ptr < len(n_list) and step == n_list[ptr]:
                    if st.position == rho:
                        hits[ptr] += 1
                    ptr += 1
        per_map_rate[mi] = hits / w_here
        total_hits += hits
        total_walks += w_here
    est = total_hits / total_walks
    if n_maps > 1:
        se = per_map_rate.std(axis=0, ddof=1) / math.sqrt(n_maps)
    else:
        se = np.sqrt(est * (1 - est) / total_walks)
    out = []
    for k, n in enumerate(n_list):
        out.append(
            McEstimate(
                n=n,
                estimate=float(est[k]),
                stderr=float(se[k]),
                hits=int(total_hits[k]),
                walks=total_walks,
            )
        )
    return out
