"""Seeded graph corpus shared by the expansion and acceptance tests."""

import random

from halfplane.expansion import WeightedGraph


def random_connected_graph(
    rng: random.Random,
    n_min=4,
    n_max=10,
    p=0.35,
    weighted=False,
) -> WeightedGraph:
    """Erdos-Renyi-ish connected graph; a spanning tree guarantees connectivity."""
    n = rng.randint(n_min, n_max)
    g = WeightedGraph(root=0)
    perm = list(range(n))
    rng.shuffle(perm)
    for k in range(1, n):
        a = perm[k]
        b = perm[rng.randrange(k)]
        w = rng.uniform(0.2, 3.0) if weighted else 1.0
        g.add_edge(a, b, w)
    for a in range(n):
        for b in range(a + 1, n):
            if g.edge_weight(a, b) == 0 and rng.random() < p:
                w = rng.uniform(0.2, 3.0) if weighted else 1.0
                g.add_edge(a, b, w)
    return g


def graph_corpus(seed, count, **kw):
    rng = random.Random(seed)
    return [random_connected_graph(rng, **kw) for _ in range(count)]


def barbell_graph(k=4, bridge=1) -> WeightedGraph:
    """Two k-cliques joined by a path: reliable island structure."""
    g = WeightedGraph(root=0)
    for a in range(k):
        for b in range(a + 1, k):
            g.add_edge(a, b)
            g.add_edge(k + bridge + a, k + bridge + b)
    chain = [k - 1] + [k + j for j in range(bridge)] + [k + bridge]
    for x, y in zip(chain, chain[1:]):
        g.add_edge(x, y)
    return g


def island_body_graph(rng: random.Random, weighted=False):
    """A dense body with pendant cliques hanging off single edges.

    The pendants are the only isolated cores for i between the pendant
    boundary ratio (~1/13 for a K4 on one edge) and the body's internal
    expansion.  A couple of body vertices are designated "far" (standing in
    for the rest of an infinite graph): cores must avoid them, which is what
    keeps the body from counting as one huge island.  Returns (graph, i, far).
    """
    body_n = rng.randint(5, 7)
    g = WeightedGraph(root=0)
    for a in range(body_n):
        for b in range(a + 1, body_n):
            if rng.random() < 0.85 or b == a + 1:
                w = rng.uniform(0.8, 1.2) if weighted else 1.0
                g.add_edge(a, b, w)
    nxt = body_n
    for _ in range(rng.randint(1, 2)):
        k = rng.choice([4, 5])
        members = list(range(nxt, nxt + k))
        nxt += k
        for x in range(k):
            for y in range(x + 1, k):
                w = rng.uniform(0.8, 1.2) if weighted else 1.0
                g.add_edge(members[x], members[y], w)
        anchor = rng.randrange(2, body_n)
        w = rng.uniform(0.8, 1.2) if weighted else 1.0
        g.add_edge(anchor, members[0], w)
    far = [0, 1]
    return g, rng.uniform(0.09, 0.15), far


def faithful_decomposition(g, i, size_cap, avoid=()):
    """Did the size cap lose any far-avoiding isolated core?  (The finite
    emulation of the island/ocean decomposition is only meaningful when it
    did not.)"""
    from halfplane.expansion import enumerate_cores

    full = enumerate_cores(g, i, size_cap=len(g.vertices()), avoid=avoid)
    capped = enumerate_cores(g, i, size_cap=size_cap, avoid=avoid)
    return set(full.union) == set(capped.union)
