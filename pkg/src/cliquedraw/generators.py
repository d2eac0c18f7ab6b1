"""Seeded generators for test families: k-trees, triangulations, lower-bound graphs.

Every generator is deterministic under (parameters, seed).
"""

from __future__ import annotations

import random

import networkx as nx

from .decomposition import TreeDecomposition
from .errors import GenerationBudgetError, GraphError
from .graphs import Graph, edge_key, sorted_vertices
from .planar import find_separating_triangles


def gen_k_tree(n: int, k: int, seed=0):
    """Random k-tree on vertices 0..n-1 with its natural width-k decomposition."""
    if n < k + 1:
        raise GraphError(f"a {k}-tree needs at least {k + 1} vertices, got {n}")
    rng = random.Random(f"ktree:{n}:{k}:{seed}")
    base = list(range(k + 1))
    edges = [(a, b) for i, a in enumerate(base) for b in base[i + 1:]]
    cliques = [tuple(base[:i] + base[i + 1:]) for i in range(k + 1)] or [()]
    if k == 0:
        cliques = [()]
    bags = {0: frozenset(base)}
    bag_of_clique = {c: 0 for c in cliques}
    tree_edges = set()
    for v in range(k + 1, n):
        c = cliques[rng.randrange(len(cliques))]
        edges.extend((u, v) for u in c)
        bag_id = len(bags)
        bags[bag_id] = frozenset(c) | {v}
        tree_edges.add((bag_of_clique[c], bag_id))
        for i in range(len(c)):
            newc = tuple(sorted(c[:i] + c[i + 1:] + (v,)))
            cliques.append(newc)
            bag_of_clique[newc] = bag_id
    g = Graph.build(range(n), edges)
    td = TreeDecomposition(bags=bags, tree_edges=frozenset(tree_edges))
    return g, td


def gen_partial_k_tree(n: int, k: int, edge_keep_prob: float, seed=0):
    """Spanning subgraph of a seeded k-tree; the k-tree's decomposition remains valid."""
    if not 0 < edge_keep_prob <= 1:
        raise GraphError("edge_keep_prob must be in (0, 1]")
    g, td = gen_k_tree(n, k, seed)
    rng = random.Random(f"partial:{n}:{k}:{edge_keep_prob}:{seed}")
    kept = [e for e in sorted(g.edges, key=lambda e: (e[0], e[1]))
            if rng.random() < edge_keep_prob]
    return Graph.build(g.vertices, kept), td


def _flip_random_edge(g: Graph, rng) -> Graph:
    """One random diagonal flip in a maximal planar graph (if legal)."""
    ok, emb = nx.check_planarity(nx.Graph(sorted(g.edges)))
    if not ok:
        raise GraphError("internal: triangulation lost planarity")
    edges = sorted(g.edges)
    u, v = edges[rng.randrange(len(edges))]
    face1 = emb.traverse_face(u, v)
    face2 = emb.traverse_face(v, u)
    if len(face1) != 3 or len(face2) != 3:
        return g
    x = next(w for w in face1 if w not in (u, v))
    y = next(w for w in face2 if w not in (u, v))
    if x == y or g.has_edge(x, y):
        return g
    new_edges = (set(g.edges) - {edge_key(u, v)}) | {edge_key(x, y)}
    return Graph(g.vertices, frozenset(new_edges))


def gen_triangulation(n: int, seed=0, forbid_separating_triangles: bool = False) -> Graph:
    """Random maximal planar graph by stacked insertion plus diagonal flips.

    With the flag set, resamples and flips until no separating triangle
    remains; raises GenerationBudgetError when the budget runs out (for
    n = 5 no such triangulation exists).
    """
    if n < 4:
        raise GraphError("a triangulation needs at least 4 vertices")
    for restart in range(6):
        rng = random.Random(f"tri:{n}:{seed}:{restart}")
        edges = {(a, b) for i, a in enumerate(range(4)) for b in range(i + 1, 4)}
        faces = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
        for v in range(4, n):
            fi = rng.randrange(len(faces))
            a, b, c = faces.pop(fi)
            edges |= {edge_key(a, v), edge_key(b, v), edge_key(c, v)}
            faces.extend([(a, b, v), (a, c, v), (b, c, v)])
        g = Graph.build(range(n), edges)
        flips = 4 * n if not forbid_separating_triangles else 8 * n
        for _ in range(flips):
            g = _flip_random_edge(g, rng)
        if not forbid_separating_triangles:
            return g
        for _ in range(12 * n):
            if not find_separating_triangles(g):
                return g
            g = _flip_random_edge(g, rng)
        if not find_separating_triangles(g):
            return g
    raise GenerationBudgetError(
        f"no separating-triangle-free triangulation found for n={n} within budget")


def gen_disjoint_k33(n: int) -> Graph:
    """Floor(n/6) disjoint K3,3 copies plus isolated remainder vertices."""
    if n < 6:
        raise GraphError("need at least 6 vertices for one K3,3 copy")
    edges = []
    copies = n // 6
    for c in range(copies):
        base = 6 * c
        for i in range(3):
            for j in range(3, 6):
                edges.append((base + i, base + j))
    return Graph.build(range(n), edges)


def gen_thickened_k33(n: int, delta: int) -> Graph:
    """Disjoint K3,3 copies made denser by length-2 paths between vertex pairs.

    Every pair inside a copy gains p = floor((delta-3)/5) paths, so each of
    the six original vertices ends at degree 3 + 5p <= delta; path midpoints
    have degree 2.  Remainder vertices stay isolated.
    """
    if delta < 4:
        raise GraphError("delta must be at least 4")
    p = (delta - 3) // 5
    size = 6 + 15 * p
    copies = n // size
    if copies == 0:
        raise GraphError(f"n={n} is too small for one copy of size {size} at delta={delta}")
    edges = []
    for c in range(copies):
        base = c * size
        core = list(range(base, base + 6))
        for i in range(3):
            for j in range(3, 6):
                edges.append((core[i], core[j]))
        mid = base + 6
        pairs = [(core[i], core[j]) for i in range(6) for j in range(i + 1, 6)]
        for (u, v) in pairs:
            for _ in range(p):
                edges.append((u, mid))
                edges.append((mid, v))
                mid += 1
    return Graph.build(range(n), edges)
