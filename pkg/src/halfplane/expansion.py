"""Finite-graph expansion analytics: isolation, cores, islands and oceans,
the induced ocean chain, and exact Markov-chain inequality checkers.

Volumes use the degree-sum convention throughout: |S| is the total vertex
weight of S, where a vertex weighs the sum of its incident edge weights
(a self-loop counts once).  |dS| is the total weight of edges with exactly
one endpoint in S; self-loops never cross.

On a finite graph the whole vertex set is vacuously an isolated core (it
has no boundary), so core enumeration is capped below |V|; the cap is what
stands in for "cores have bounded size", which on the infinite graph is a
consequence of anchored expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BITMASK_LIMIT = 20


class GraphFormatError(ValueError):
    pass


class WeightedGraph:
    """Finite symmetric edge-weighted graph with an optional root."""

    def __init__(self, root: int | None = None):
        self.adj: dict[int, dict[int, float]] = {}
        self.root = root

    # -- construction ---------------------------------------------------

    def add_vertex(self, v: int) -> None:
        self.adj.setdefault(v, {})

    def add_edge(self, u: int, v: int, w: float = 1.0) -> None:
        if w <= 0:
            raise ValueError("edge weights must be positive")
        self.adj.setdefault(u, {})
        self.adj.setdefault(v, {})
        self.adj[u][v] = self.adj[u].get(v, 0.0) + w
        if u != v:
            self.adj[v][u] = self.adj[v].get(u, 0.0) + w

    @staticmethod
    def from_edges(edges, root: int | None = None) -> "WeightedGraph":
        g = WeightedGraph(root)
        for e in edges:
            if len(e) == 2:
                g.add_edge(e[0], e[1], 1.0)
            else:
                g.add_edge(e[0], e[1], e[2])
        return g

    @staticmethod
    def from_map(hemap, restrict=None, root: int | None = None) -> "WeightedGraph":
        """Adjacency of a half-edge map; multiplicity becomes edge weight."""
        g = WeightedGraph(root if root is not None else hemap.root_vertex())
        keep = None if restrict is None else set(restrict)
        for h in hemap.alive_half_edges():
            if h < hemap.he_twin[h]:
                a, b = hemap.he_origin[h], hemap.dest(h)
                if keep is None or (a in keep and b in keep):
                    g.add_edge(a, b, 1.0)
        return g

    # -- queries ----------------------------------------------------------

    def vertices(self) -> list[int]:
        return sorted(self.adj)

    def weight(self, v: int) -> float:
        return sum(self.adj[v].values())

    def edge_weight(self, u: int, v: int) -> float:
        return self.adj.get(u, {}).get(v, 0.0)

    def n_edges(self) -> int:
        return sum(1 for u in self.adj for v in self.adj[u] if u <= v)

    def edges(self):
        for u in sorted(self.adj):
            for v in sorted(self.adj[u]):
                if u <= v:
                    yield u, v, self.adj[u][v]

    def is_unweighted(self) -> bool:
        return all(w == 1.0 for _, _, w in self.edges())

    def connected_components(self, within=None) -> list[list[int]]:
        verts = set(self.adj) if within is None else set(within)
        seen: set[int] = set()
        comps = []
        for s in sorted(verts):
            if s in seen:
                continue
            comp = [s]
            seen.add(s)
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self.adj[u]:
                    if w in verts and w not in seen:
                        seen.add(w)
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def subgraph(self, vertices) -> "WeightedGraph":
        keep = set(vertices)
        g = WeightedGraph(self.root if self.root in keep else None)
        for v in keep:
            g.add_vertex(v)
        for u, v, w in self.edges():
            if u in keep and v in keep:
                g.add_edge(u, v, w)
        return g

    # -- edge-list text format ---------------------------------------------

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v} {w!r}\n" for u, v, w in self.edges())

    @staticmethod
    def from_edge_list(text: str) -> "WeightedGraph":
        g = WeightedGraph()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"line {lineno}: expected 'u v [weight]'")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: {exc}") from exc
            g.add_edge(u, v, w)
        return g


# ---------------------------------------------------------------------------
# isolation and cores


def isolation(G: WeightedGraph, S, i: float) -> float:
    """i-isolation of S: i*|S| - |dS| with degree-sum volume."""
    sset = set(S)
    if not sset:
        raise ValueError("S must be nonempty")
    vol = 0.0
    cut = 0.0
    for u in sset:
        vol += G.weight(u)
        for v, w in G.adj[u].items():
            if v != u and v not in sset:
                cut += w
    return i * vol - cut


class SubsetTables:
    """Per-subset volume, cut, and best-proper-subset isolation tables."""

    def __init__(self, G: WeightedGraph, i: float):
        self.verts = G.vertices()
        n = len(self.verts)
        if n > BITMASK_LIMIT:
            raise ValueError(f"exhaustive subset scan limited to {BITMASK_LIMIT} vertices")
        self.n = n
        idx = {v: k for k, v in enumerate(self.verts)}
        degw = [G.weight(v) for v in self.verts]
        degw_noloop = [
            sum(w for u, w in G.adj[v].items() if u != v) for v in self.verts
        ]
        nbrs = [
            [(idx[u], w) for u, w in G.adj[v].items() if u != v] for v in self.verts
        ]
        size = 1 << n
        vol = [0.0] * size
        cut = [0.0] * size
        for mask in range(1, size):
            b = mask & (-mask)
            vi = b.bit_length() - 1
            prev = mask ^ b
            w_in = 0.0
            for ui, w in nbrs[vi]:
                if prev >> ui & 1:
                    w_in += w
            vol[mask] = vol[prev] + degw[vi]
            cut[mask] = cut[prev] + degw_noloop[vi] - 2.0 * w_in
        self.vol = vol
        self.cut = cut
        self.delta = [i * vol[m] - cut[m] for m in range(size)]
        # best isolation over proper subsets (empty set scores 0)
        maxsub = [0.0] * size
        for mask in range(1, size):
            best = 0.0
            mm = mask
            while mm:
                b = mm & (-mm)
                mm ^= b
                sub = mask ^ b
                d = self.delta[sub]
                if d > best:
                    best = d
                s = maxsub[sub]
                if s > best:
                    best = s
            maxsub[mask] = best
        self.maxsub = maxsub

    def mask_of(self, S) -> int:
        idx = {v: k for k, v in enumerate(self.verts)}
        mask = 0
        for v in S:
            mask |= 1 << idx[v]
        return mask

    def members(self, mask: int) -> list[int]:
        return [self.verts[k] for k in range(self.n) if mask >> k & 1]


def is_isolated_core(G: WeightedGraph, S, i: float, tables: SubsetTables | None = None) -> bool:
    """Does S strictly dominate every proper subset in i-isolation?"""
    t = tables if tables is not None else SubsetTables(G, i)
    m = t.mask_of(S)
    return t.delta[m] > t.maxsub[m]


@dataclass
class IsolatedSet:
    vertices: list[int]
    delta: float
    is_core: bool


@dataclass
class IsolationReport:
    i: float
    size_cap: int
    sets: list[IsolatedSet]
    cores: list[list[int]]
    union: list[int]
    islands: list[list[int]]
    oceans: list[list[int]]
    truncated: bool


def enumerate_cores(
    G: WeightedGraph, i: float, size_cap: int = 12, avoid=()
) -> IsolationReport:
    """All i-isolated cores up to size_cap vertices, with islands and oceans.

    The union of the found cores plays the role of A_i; its connected
    components are the islands, the complement components the oceans.  A
    finite graph has no "infinity" for the ocean to attach to, so two knobs
    stand in for it: the size cap (cores are finite on graphs with anchored
    expansion), and an optional `avoid` set of vertices barred from cores
    (the far region / unrevealed frontier).  truncated=True flags a cap
    below |V|.
    """
    t = SubsetTables(G, i)
    n = t.n
    cap = min(size_cap, n)
    avoid_mask = t.mask_of(set(avoid) & set(t.verts))
    union_mask = 0
    sets: list[IsolatedSet] = []
    for mask in range(1, 1 << n):
        if mask.bit_count() > cap or mask & avoid_mask:
            continue
        d = t.delta[mask]
        if d <= 0:
            continue
        core = d > t.maxsub[mask]
        if core:
            union_mask |= mask
        members = t.members(mask)
        if _mask_connected(mask, t, G):
            sets.append(IsolatedSet(vertices=members, delta=d, is_core=core))
    union = t.members(union_mask)
    islands = G.connected_components(within=union) if union else []
    rest = [v for v in t.verts if v not in set(union)]
    oceans = G.connected_components(within=rest) if rest else []
    return IsolationReport(
        i=i,
        size_cap=cap,
        sets=sets,
        cores=[s.vertices for s in sets if s.is_core],
        union=union,
        islands=islands,
        oceans=oceans,
        truncated=cap < n,
    )


def _mask_connected(mask: int, t: _MaskTables, G: WeightedGraph) -> bool:
    if mask == 0:
        return False
    idx = {v: k for k, v in enumerate(t.verts)}
    start = (mask & (-mask)).bit_length() - 1
    seen = 1 << start
    stack = [start]
    while stack:
        u = stack.pop()
        for vtx in G.adj[t.verts[u]]:
            k = idx[vtx]
            if mask >> k & 1 and not seen >> k & 1:
                seen |= 1 << k
                stack.append(k)
    return seen == mask


# ---------------------------------------------------------------------------
# induced ocean chain


def ocean_chain(
    G: WeightedGraph, i: float, size_cap: int | None = None, avoid=()
) -> tuple[WeightedGraph, IsolationReport]:
    """The walk watched only when in the ocean, as a weighted graph.

    Edge weights are w_i(u,v) = w(u) P_u(X_{tau_1} = v) with tau_1 the first
    return time to the ocean, computed exactly by absorbing linear systems
    through the islands.  Vertex weights are inherited: w_i(u) = w(u).
    Returns the induced chain together with the core report that defined it.
    """
    verts = G.vertices()
    if size_cap is None:
        size_cap = len(verts) - 1
    report = enumerate_cores(G, i, size_cap=size_cap, avoid=avoid)
    return induced_chain(G, report.union), report


def induced_chain(G: WeightedGraph, removed) -> WeightedGraph:
    """The first-return chain on G minus `removed` (exact linear solves)."""
    removed = sorted(set(removed))
    ocean = [v for v in G.vertices() if v not in set(removed)]
    if not ocean:
        raise ValueError("ocean is empty; nothing to induce on")
    o_idx = {v: k for k, v in enumerate(ocean)}
    W = np.zeros((len(ocean), len(ocean)))
    # absorption probabilities through each island, solved island by island
    hit: dict[int, dict[int, float]] = {}  # island vertex -> {ocean vertex: prob}
    for island in G.connected_components(within=removed):
        k = len(island)
        ii = {v: a for a, v in enumerate(island)}
        Q = np.zeros((k, k))
        R = np.zeros((k, len(ocean)))
        for v in island:
            wv = G.weight(v)
            for u, w in G.adj[v].items():
                if u in ii:
                    Q[ii[v], ii[u]] += w / wv
                elif u in o_idx:
                    R[ii[v], o_idx[u]] += w / wv
        H = np.linalg.solve(np.eye(k) - Q, R)
        for v in island:
            hit[v] = {ocean[j]: H[ii[v], j] for j in range(len(ocean)) if H[ii[v], j] > 0}
    for u in ocean:
        wu = G.weight(u)
        for x, w in G.adj[u].items():
            if x in o_idx:
                W[o_idx[u], o_idx[x]] += w
            else:
                for v, p in hit[x].items():
                    W[o_idx[u], o_idx[v]] += w * p
    defect = float(np.max(np.abs(W - W.T))) if len(ocean) > 1 else 0.0
    W = 0.5 * (W + W.T)
    out = WeightedGraph(G.root if G.root in o_idx else None)
    for v in ocean:
        out.add_vertex(v)
    for a in range(len(ocean)):
        for b in range(a, len(ocean)):
            if W[a, b] > 0:
                out.add_edge(ocean[a], ocean[b], W[a, b])
    out.symmetry_defect = defect
    return out


# ---------------------------------------------------------------------------
# Cheeger, spectral norm, and the exact inequality checkers


def cheeger_bruteforce(G: WeightedGraph, within=None) -> float:
    """Exact Cheeger constant: min |dS|/|S| over nonempty subsets.

    `within` restricts S to subsets of the given vertex set (used for killed
    chains, where the complement stands in for the rest of an infinite
    graph).  Without a restriction, proper subsets are scanned; the full set
    has empty boundary and would trivially give zero.
    """
    t = SubsetTables(G, 0.0)
    n = t.n
    if within is None:
        allowed = (1 << n) - 1
        exclude_full = True
    else:
        allowed = t.mask_of(within)
        exclude_full = False
    best = math.inf
    sub = allowed
    while sub:
        if not (exclude_full and sub == allowed):
            ratio = t.cut[sub] / t.vol[sub]
            if ratio < best:
                best = ratio
        sub = (sub - 1) & allowed
    return best


def transition_matrix(G: WeightedGraph, order=None) -> tuple[np.ndarray, list[int]]:
    verts = list(order) if order is not None else G.vertices()
    idx = {v: k for k, v in enumerate(verts)}
    P = np.zeros((len(verts), len(verts)))
    for v in verts:
        wv = G.weight(v)
        for u, w in G.adj[v].items():
            if u in idx:
                P[idx[v], idx[u]] += w / wv
    return P, verts


def killed_operator_norm(G: WeightedGraph, alive, tol: float = 1e-10, max_iter: int = 200000) -> float:
    """Operator norm of the killed walk on l2(w), by power iteration."""
    alive = sorted(alive)
    P, verts = transition_matrix(G, order=alive)
    w = np.array([G.weight(v) for v in verts])
    # symmetrize: S = D^{1/2} P D^{-1/2} has the same spectrum
    d = np.sqrt(w)
    S = (P * d[:, None]) / d[None, :]
    S = 0.5 * (S + S.T)  # exact symmetry against float noise
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(len(verts))
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(max_iter):
        y = S @ x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        if abs(nrm - prev) < tol:
            return float(nrm)
        prev = nrm
    return float(prev)


@dataclass
class SpectralReport:
    i: float
    norm: float
    bound: float
    norm_ok: bool
    return_probs: list[float]
    return_bound_ok: bool

    @property
    def ok(self) -> bool:
        return self.norm_ok and self.return_bound_ok


def spectral_bound_check(
    G: WeightedGraph,
    absorbing,
    i: float | None = None,
    n_max: int = 50,
    start: int | None = None,
) -> SpectralReport:
    """Check |P| <= 1 - i^2/2 and the return-probability corollary.

    `absorbing` is a nonempty vertex set standing in for the rest of an
    infinite graph: the walk is killed there, and the Cheeger constant is
    taken over subsets of the surviving part (boundary edges into the
    absorbing set count).
    """
    absorbing = set(absorbing)
    if not absorbing:
        raise ValueError("need a nonempty absorbing set")
    alive = [v for v in G.vertices() if v not in absorbing]
    if not alive:
        raise ValueError("no alive vertices")
    if i is None:
        i = cheeger_bruteforce(G, within=alive)
    norm = killed_operator_norm(G, alive)
    bound = 1.0 - i * i / 2.0
    rho = start if start is not None else (G.root if G.root in set(alive) else alive[0])
    P, verts = transition_matrix(G, order=alive)
    idx = {v: k for k, v in enumerate(verts)}
    p = np.zeros(len(verts))
    p[idx[rho]] = 1.0
    probs = []
    ok_ret = True
    for n in range(1, n_max + 1):
        p = P.T @ p
        val = float(p[idx[rho]])
        probs.append(val)
        if val > bound**n + 1e-12:
            ok_ret = False
    return SpectralReport(
        i=i,
        norm=norm,
        bound=bound,
        norm_ok=norm <= bound + 1e-10,
        return_probs=probs,
        return_bound_ok=ok_ret,
    )


@dataclass
class CVReport:
    x: int
    n: int
    slacks: dict[int, float]
    max_slack: float
    ok: bool


def carne_varopoulos_check(G: WeightedGraph, x: int, n: int) -> CVReport:
    """Exact n-step distribution against the Carne-Varopoulos bound.

    The spectral radius factor is replaced by 1 (a safe weakening), so the
    bound reads P_x(X_n = y) <= 2 sqrt(w(y)/w(x)) exp(-d(x,y)^2 / 2n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    P, verts = transition_matrix(G)
    idx = {v: k for k, v in enumerate(verts)}
    p = np.zeros(len(verts))
    p[idx[x]] = 1.0
    for _ in range(n):
        p = P.T @ p
        total = float(p.sum())
        if abs(total - 1.0) > 1e-12:
            raise AssertionError(f"probability mass drifted to {total}")
    # unweighted graph distance
    dist = {x: 0}
    frontier = [x]
    while frontier:
        nxt = []
        for u in frontier:
            for v in G.adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    wx = G.weight(x)
    slacks = {}
    for y in verts:
        pv = float(p[idx[y]])
        if pv == 0.0:
            continue
        bound = 2.0 * math.sqrt(G.weight(y) / wx) * math.exp(-dist[y] ** 2 / (2.0 * n))
        slacks[y] = pv / bound
    mx = max(slacks.values()) if slacks else 0.0
    return CVReport(x=x, n=n, slacks=slacks, max_slack=mx, ok=mx <= 1.0 + 1e-12)


@dataclass
class HittingTailReport:
    m: int
    horizon: int
    max_survival: float
    bound: float
    ok: bool


def hitting_tail_check(G: WeightedGraph, S, m: int) -> HittingTailReport:
    """Exact check of P_x(tau_S > 4 m k^2) <= 2^-m for every start x.

    k is the number of edges; the underlying lemma is for unweighted graphs,
    so unit weights are required.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not G.is_unweighted():
        raise ValueError("hitting_tail_check requires an unweighted graph")
    S = set(S)
    if not S:
        raise ValueError("S must be nonempty")
    k = G.n_edges()
    t = 4 * m * k * k
    outside = [v for v in G.vertices() if v not in S]
    if not outside:
        return HittingTailReport(m=m, horizon=t, max_survival=0.0, bound=2.0**-m, ok=True)
    idx = {v: a for a, v in enumerate(outside)}
    Q = np.zeros((len(outside), len(outside)))
    for v in outside:
        wv = G.weight(v)
        for u, w in G.adj[v].items():
            if u in idx:
                Q[idx[v], idx[u]] += w / wv
    # survival after t steps = Q^t 1, with Q^t by binary exponentiation
    power = Q
    surv = np.ones(len(outside))
    e = t
    acc = None
    while e:
        if e & 1:
            acc = power if acc is None else acc @ power
        e >>= 1
        if e:
            power = power @ power
    surv = acc @ surv if acc is not None else surv
    mx = float(surv.max())
    return HittingTailReport(m=m, horizon=t, max_survival=mx, bound=2.0**-m, ok=mx <= 2.0**-m)


# ---------------------------------------------------------------------------
# path degree scan (map diagnostic)


@dataclass
class PathScanReport:
    max_len: int
    per_length_max: list[float]   # index L: max avg degree over length-L paths
    per_length_mean: list[float]
    cumulative_max: list[float]   # max over lengths <= L
    paths_seen: int
    cap_exhausted: bool


def path_degree_scan(hemap, L: int, cap: int = 200000) -> PathScanReport:
    """Average vertex degree along simple paths from the root.

    Paths start at the root, avoid the infinite boundary except at the root,
    and have length up to L (edges).  Degrees are read from the map as
    revealed; reveal the hull of radius L+1 first for exact values.  The
    enumeration stops after `cap` paths and flags the truncation.
    """
    rho = hemap.root_vertex()
    best = [0.0] * (L + 1)
    sums = [0.0] * (L + 1)
    counts = [0] * (L + 1)
    seen = 0
    exhausted = False

    path = [rho]
    on_path = {rho}
    degsum = [hemap.degree(rho)]

    def visit(length):
        nonlocal seen, exhausted
        avg = degsum[-1] / (length + 1)
        if avg > best[length]:
            best[length] = avg
        sums[length] += avg
        counts[length] += 1
        seen += 1
        if seen >= cap:
            exhausted = True
            return
        if length == L:
            return
        v = path[-1]
        for w in sorted(set(hemap.neighbors(v))):
            if w in on_path or hemap.v_on_boundary[w]:
                continue
            path.append(w)
            on_path.add(w)
            degsum.append(degsum[-1] + hemap.degree(w))
            visit(length + 1)
            degsum.pop()
            on_path.discard(w)
            path.pop()
            if exhausted:
                return

    visit(0)
    per_mean = [sums[k] / counts[k] if counts[k] else 0.0 for k in range(L + 1)]
    cum = []
    run = 0.0
    for k in range(L + 1):
        run = max(run, best[k])
        cum.append(run)
    return PathScanReport(
        max_len=L,
        per_length_max=best,
        per_length_mean=per_mean,
        cumulative_max=cum,
        paths_seen=seen,
        cap_exhausted=exhausted,
    )
