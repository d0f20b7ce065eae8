"""Nested-triangle trap gadgets and the confinement dynamic programs.

A trap of order n is a chain of n+1 vertex-disjoint triangles, each drawn
inside the previous one, with consecutive triangles joined in antiprism
fashion (six triangular faces per annulus) and nothing inside the last
triangle.  From any vertex of an interior triangle 0 < k < n the walk moves
to triangle k-1, k, or k+1 with probability 1/3 each, because its six
incident edges split two-two-two across those levels.  The level process is
therefore exactly the lazy walk on {0,...,n}, and a walker entering the
trap is delayed for about n^3 steps with probability exp(-c t / n^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .expansion import WeightedGraph
from .map_core import HalfEdgeMap


@dataclass
class TrapGraph:
    order: int
    level: dict[int, int]          # vertex -> triangle index
    graph: WeightedGraph           # unit weights
    entry: list[int]               # the three triangle-1 vertices
    hemap: HalfEdgeMap             # the trap as a triangulation of a 3-gon

    def level_counts_ok(self) -> bool:
        """Exact lumpability: adjacency counts from every vertex split
        evenly across the allowed neighbor levels."""
        n = self.order
        for v, k in self.level.items():
            by_level: dict[int, float] = {}
            for u, w in self.graph.adj[v].items():
                by_level[self.level[u]] = by_level.get(self.level[u], 0) + w
            if 0 < k < n:
                if by_level != {k - 1: 2, k: 2, k + 1: 2}:
                    return False
            elif k == n and n > 0:
                if by_level != {n - 1: 2, n: 2}:
                    return False
        return True


def build_trap(n: int) -> TrapGraph:
    """Trap of order n: 3(n+1) vertices; valid triangulation of a 3-gon."""
    if n < 1:
        raise ValueError("trap order must be >= 1")

    def v(k, j):
        return 3 * k + j % 3

    triangles = []
    for k in range(n):
        for j in range(3):
            # vertical (k,j)-(k+1,j), diagonal (k,j)-(k+1,j-1)
            triangles.append((v(k, j), v(k + 1, j), v(k + 1, j - 1)))
            triangles.append((v(k, j), v(k, j + 1), v(k + 1, j)))
    triangles.append((v(n, 0), v(n, 1), v(n, 2)))
    hemap = HalfEdgeMap.disc_from_triangles([0, 1, 2], triangles)
    graph = WeightedGraph.from_map(hemap, root=0)
    # disc_from_triangles allocates ids in first-seen order of labels, which
    # here coincides with the labels themselves
    level = {v(k, j): k for k in range(n + 1) for j in range(3)}
    return TrapGraph(
        order=n,
        level=level,
        graph=graph,
        entry=[v(1, j) for j in range(3)],
        hemap=hemap,
    )


def _trap_transition(trap: TrapGraph) -> tuple[np.ndarray, list[int]]:
    """Substochastic transition over levels >= 1 (level 0 kills)."""
    states = [u for u, k in sorted(trap.level.items()) if k >= 1]
    idx = {u: a for a, u in enumerate(states)}
    Q = np.zeros((len(states), len(states)))
    for u in states:
        deg = trap.graph.weight(u)
        for x, w in trap.graph.adj[u].items():
            if trap.level[x] >= 1:
                Q[idx[u], idx[x]] += w / deg
    return Q, states

def trap_confinement_dp(n: int, t: int, trap: TrapGraph | None = None) -> float:
    """P(walk from a triangle-1 vertex is at triangle 1 at time t without
    ever visiting triangle 0), exactly, by dense DP over 3n states."""
    if t < 0:
        raise ValueError("t must be >= 0")
    trap = trap or build_trap(n)
    Q, states = _trap_transition(trap)
    p = np.zeros(len(states))
    p[states.index(trap.entry[0])] = 1.0
    for _ in range(t):
        p = Q.T @ p
    mask = np.array([trap.level[u] == 1 for u in states])
    return float(p[mask].sum())


def trap_survival_dp(n: int, t: int, trap: TrapGraph | None = None) -> float:
    """P(walk from a triangle-1 vertex stays off triangle 0 through time t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    trap = trap or build_trap(n)
    Q, states = _trap_transition(trap)
    p = np.zeros(len(states))
    p[states.index(trap.entry[0])] = 1.0
    for _ in range(t):
        p = Q.T @ p
    return float(p.sum())


def trap_stay_level_one_dp(n: int, t: int) -> float:
    """P(walk never leaves triangle 1 through time t): the lumped chain
    stays put with probability 2/deg each step."""
    trap = build_trap(n)
    states = trap.entry
    idx = {u: a for a, u in enumerate(states)}
    Q = np.zeros((3, 3))
    for u in states:
        deg = trap.graph.weight(u)
        for x, w in trap.graph.adj[u].items():
            if x in idx:
                Q[idx[u], idx[x]] += w / deg
    p = np.zeros(3)
    p[0] = 1.0
    for _ in range(t):
        p = Q.T @ p
    return float(p.sum())


def interval_confinement_dp(n: int, t: int, exact: bool = False):
    """P(X_t = 1 and X_1..X_t stay in [1, n]) for the lazy walk on the
    integers started at 1, with steps uniform on {-1, 0, +1}.

    Tridiagonal DP; exact=True computes in rational arithmetic (suitable for
    small t only).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if t < 0:
        raise ValueError("t must be >= 0")
    if exact:
        third = Fraction(1, 3)
        p = [Fraction(0)] * (n + 1)  # index 1..n
        p[1] = Fraction(1)
        for _ in range(t):
            q = [Fraction(0)] * (n + 1)
            for x in range(1, n + 1):
                if p[x]:
                    for y in (x - 1, x, x + 1):
                        if 1 <= y <= n:
                            q[y] += p[x] * third
            p = q
        return p[1]
    p = np.zeros(n + 2)
    p[1] = 1.0
    for _ in range(t):
        q = np.zeros(n + 2)
        q[1 : n + 1] = (p[0:n] + p[1 : n + 1] + p[2 : n + 2]) / 3.0
        p = q
    return float(p[1])
