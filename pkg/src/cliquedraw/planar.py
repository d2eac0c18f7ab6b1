"""Planarity, combinatorial embeddings, separating triangles, crossing-free drawing.

Planarity testing and the grid drawing use networkx (left-right planarity
and the Chrobak-Payne shift method); everything around them -- face
traversal, separating-triangle detection and splitting, strip layout for
disconnected inputs, general-position repair -- is local.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import networkx as nx

from .errors import GeometryError, GraphError, NotPlanarError
from .geometry import (Drawing, Point, _pow2_at_most, count_crossings,
                       is_general_position, pt, rat)
from .graphs import Graph, Multigraph, induced_subgraph, sorted_vertices, vkey

import random


@dataclass(frozen=True)
class RotationSystem:
    """Clockwise cyclic edge order per vertex plus an outer face designation."""

    order: Mapping
    outer_face: tuple

    def vertices(self):
        return set(self.order)


def _to_nx(g: Graph) -> nx.Graph:
    out = nx.Graph()
    out.add_nodes_from(g.vertices)
    out.add_edges_from(g.edges)
    return out


def _canonical_cycle(walk: tuple) -> tuple:
    """Smallest rotation of a cyclic vertex walk, for deterministic choices."""
    if not walk:
        return walk
    rotations = [walk[i:] + walk[:i] for i in range(len(walk))]
    return min(rotations, key=lambda w: [vkey(v) for v in w])


def _trace_faces(order: Mapping) -> list:
    """Walk every dart once; each walk is one face boundary."""
    faces_out = []
    succ = {}
    for v, cyc in order.items():
        for i, u in enumerate(cyc):
            succ[(v, u)] = cyc[(i + 1) % len(cyc)]
    seen = set()
    for v in sorted_vertices(order):
        for u in order[v]:
            dart = (v, u)
            if dart in seen:
                continue
            walk = []
            cur = dart
            while cur not in seen:
                seen.add(cur)
                walk.append(cur[0])
                a, b = cur
                cur = (b, succ[(b, a)])
            faces_out.append(tuple(walk))
    return faces_out


def planar_embedding(g: Graph) -> RotationSystem:
    """Compute a combinatorial embedding, or raise with a Kuratowski witness."""
    ok, cert = nx.check_planarity(_to_nx(g), counterexample=True)
    if not ok:
        witness = Graph.build(cert.nodes, cert.edges)
        deg4 = sum(1 for v in witness.vertices if witness.degree(v) == 4)
        kind = "K5" if deg4 == 5 else "K3,3"
        raise NotPlanarError(kind, witness)
    order = {v: tuple(cert.neighbors_cw_order(v)) for v in g.vertices}
    walks = _trace_faces(order)
    outer = ()
    if walks:
        best_len = max(len(w) for w in walks)
        outer = min((_canonical_cycle(w) for w in walks if len(w) == best_len),
                    key=lambda w: [vkey(v) for v in w])
    return RotationSystem(order=order, outer_face=outer)


def faces(rotation: RotationSystem) -> list:
    """All face boundary walks; every dart is used exactly once overall."""
    return [_canonical_cycle(w) for w in _trace_faces(rotation.order)]


def _triangles(g: Graph) -> list:
    adj = g.adjacency()
    out = []
    for (u, v) in sorted(g.edges, key=lambda e: (vkey(e[0]), vkey(e[1]))):
        for w in sorted_vertices(adj[u] & adj[v]):
            tri = tuple(sorted_vertices((u, v, w)))
            if tri[0] == u and tri[1] == v:  # count each triangle once
                out.append(tri)
    return out


def _component_of(g: Graph, seeds) -> set:
    adj = g.adjacency()
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def find_separating_triangles(g: Graph) -> list:
    """All triangles whose removal disconnects their own component."""
    planar_embedding(g)  # non-planar input is an error
    out = []
    for tri in _triangles(g):
        comp = _component_of(g, tri)
        rest = comp - set(tri)
        if not rest:
            continue
        inner = induced_subgraph(g, rest)
        if len(inner.components()) >= 2:
            out.append(tri)
    return out


def split_at_separating_triangle(g: Graph, tri) -> tuple:
    """Split g at a separating triangle into two strictly smaller planar graphs.

    The first part is the triangle plus its lexicographically smallest side;
    the second is everything else (including components not touching the
    triangle).  The 3-clique-sum of the parts at the triangle reconstructs g.
    """
    tri = tuple(sorted_vertices(tri))
    if not g.is_clique(tri) or len(tri) != 3:
        raise GraphError(f"{tri!r} is not a triangle of the graph")
    comp = _component_of(g, tri)
    rest = comp - set(tri)
    sides = induced_subgraph(g, rest).components() if rest else []
    if len(sides) < 2:
        raise GraphError(f"triangle {tri!r} is not separating")
    first = set(sides[0]) | set(tri)
    g1 = induced_subgraph(g, first)
    g2 = induced_subgraph(g, (g.vertices - set(sides[0])))
    return g1, g2


def _nx_embedding_from_rotation(rotation: RotationSystem, keep) -> nx.PlanarEmbedding:
    emb = nx.PlanarEmbedding()
    emb.add_nodes_from(keep)
    for v in keep:
        cyc = [u for u in rotation.order[v] if u in keep]
        prev = None
        for u in cyc:
            if prev is None:
                emb.add_half_edge_first(v, u)
            else:
                emb.add_half_edge_cw(v, u, prev)
            prev = u
    emb.check_structure()
    return emb


def _grid_positions(sub: Graph, rotation: RotationSystem | None) -> dict:
    """Integer grid positions with no crossings (Chrobak-Payne shift method)."""
    verts = sorted_vertices(sub.vertices)
    if len(verts) == 1:
        return {verts[0]: (0, 0)}
    if len(verts) == 2:
        return {verts[0]: (0, 0), verts[1]: (1, 0)}
    if rotation is not None:
        emb = _nx_embedding_from_rotation(rotation, set(verts))
    else:
        ok, emb = nx.check_planarity(_to_nx(sub))
        if not ok:  # callers pre-check; defensive
            raise NotPlanarError("K5", sub)
    pos = nx.combinatorial_embedding_to_pos(emb, fully_triangulate=False)
    return {v: (int(x), int(y)) for v, (x, y) in pos.items()}


def _jiggle_off_grid(graph: Multigraph, grid_pos: dict, span: int, seed) -> Drawing:
    """Perturb an integer-grid crossing-free drawing into general position.

    Offsets are below half the minimum feature separation of integer-grid
    drawings (1/(3*span)), so no crossing pair can appear; the result is
    re-verified and resampled until general position holds.
    """
    delta = _pow2_at_most(rat(1, 64 * (span + 1)))
    rng = random.Random(f"fary:{seed}")
    for _ in range(40):
        positions = {}
        taken = set()
        for v in sorted_vertices(graph.vertices):
            x, y = grid_pos[v]
            while True:
                cand = Point(x + rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 20) * delta,
                             y + rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 20) * delta)
                if cand not in taken:
                    break
            positions[v] = cand
            taken.add(cand)
        candidate = Drawing(graph, positions)
        ok, _ = is_general_position(candidate)
        if ok:
            return candidate
    raise GeometryError("grid jiggle failed to reach general position")


def fary_draw(g: Graph, rotation: RotationSystem | None = None, *, seed=0) -> Drawing:
    """Crossing-free straight-line drawing of a planar graph.

    Components are drawn independently on integer grids and stacked in
    disjoint horizontal strips, then nudged into general position with a
    crossing budget of zero.
    """
    graph = g.to_multigraph()
    if g.num_vertices == 0:
        return Drawing(graph, {})
    grid = {}
    y_off = 0
    comps = g.components()
    for comp in comps:
        sub = induced_subgraph(g, comp)
        pos = _grid_positions(sub, rotation if rotation is not None and len(comps) == 1 else None)
        xs = [p[0] for p in pos.values()]
        ys = [p[1] for p in pos.values()]
        for v, (x, y) in pos.items():
            grid[v] = (x - min(xs), y - min(ys) + y_off)
        y_off += (max(ys) - min(ys)) + 3
    span = max(max(abs(x), abs(y)) for x, y in grid.values()) + 1
    flat = Drawing(graph, {v: pt(x, y) for v, (x, y) in grid.items()})
    report = count_crossings(flat)
    if report.total != 0:
        raise GeometryError("internal: grid drawing of a planar graph has crossings")
    drawing = _jiggle_off_grid(graph, grid, span, seed)
    return drawing
