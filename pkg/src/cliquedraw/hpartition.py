"""Drawing multigraphs through partitions indexed by a quotient graph.

A partition places every vertex of the multigraph K into a bag indexed by a
vertex of a simple quotient graph H; drawing K means drawing H, shrinking
each bag into an epsilon-disk around its quotient vertex, and drawing all
edges straight.  The epsilon is certified by explicit exact checks on
vertex disks, edge corridors and busy regions, and the crossing guarantees
of the resulting drawing are re-verified by counting.

Three constructions are provided: the face-bag partition for blowups of
planar graphs without separating triangles, the two-bag partition that
works for every base graph, and the absorbing partition whose quotient is
the base graph itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction  # noqa: F401  (public annotations)
from typing import Mapping

from .errors import BoundViolationError, GeometryError, GraphError, NotPlanarError, StructuralMismatchError
from .geometry import (CrossingReport, Drawing, Point, count_crossings,
                       dist2_point_point, dist2_point_segment, dist2_segment_segment,
                       is_general_position, rat, segment_intersection_point,
                       segments_cross, Segment)
from .graphs import Graph, Multigraph, SimplicialBlowup, sorted_vertices, vkey
from .planar import fary_draw, find_separating_triangles, planar_embedding


@dataclass(frozen=True)
class HPartition:
    """Bags of K-vertices indexed by the vertices of a simple quotient graph."""

    quotient: Graph
    bags: Mapping

    def bag_of(self) -> dict:
        owner = {}
        for b, members in self.bags.items():
            for v in members:
                owner[v] = b
        return owner


def validate_hpartition(p: HPartition, k: Multigraph) -> None:
    if set(p.bags) != set(p.quotient.vertices):
        raise GraphError("bags must be indexed by exactly the quotient's vertices")
    owner = {}
    for b in p.bags:
        if not p.bags[b]:
            raise GraphError(f"bag {b!r} is empty")
        for v in p.bags[b]:
            if v in owner:
                raise GraphError(f"vertex {v!r} appears in two bags")
            owner[v] = b
    if set(owner) != set(k.vertices):
        raise GraphError("bags do not partition the multigraph's vertex set")
    for eid, (u, v) in k.edges.items():
        a, b = owner[u], owner[v]
        if a != b and not p.quotient.has_edge(a, b):
            raise GraphError(f"edge {eid} joins bags {a!r}, {b!r} with no quotient edge")


@dataclass(frozen=True)
class PartitionStats:
    width: int
    density: int
    nonsolitary_independent: bool
    per_bag_density: Mapping


def partition_stats(p: HPartition, k: Multigraph) -> PartitionStats:
    """Exact width, density (with edge multiplicity) and solitary structure."""
    validate_hpartition(p, k)
    width = max(len(b) for b in p.bags.values())
    per_bag = {}
    for b, members in p.bags.items():
        per_bag[b] = sum(1 for (u, v) in k.edges.values() if u in members or v in members)
    density = max(per_bag.values())
    nonsolitary = {b for b, members in p.bags.items() if len(members) > 1}
    independent = not any(u in nonsolitary and v in nonsolitary for u, v in p.quotient.edges)
    return PartitionStats(width=width, density=density,
                          nonsolitary_independent=independent, per_bag_density=per_bag)


# ---------------------------------------------------------------------------
# Epsilon certification
# ---------------------------------------------------------------------------


def _l1(p: Point, q: Point) -> Fraction:
    return abs(p.x - q.x) + abs(p.y - q.y)


def _busy_balls(dh: Drawing, eps: Fraction) -> list:
    """Enclosing ball (center, radius) per crossing pair of quotient edges.

    Any point within eps of both crossing segments lies within
    2*eps*|u|*|v|/|u x v| of the crossing point; L1 norms over-approximate
    the Euclidean ones to keep the radius rational.
    """
    segs = []
    for eid in sorted(dh.graph.edges):
        u, v = dh.graph.edges[eid]
        segs.append((u, v, dh.positions[u], dh.positions[v]))
    balls = []
    for i in range(len(segs)):
        u1, v1, a, b = segs[i]
        for j in range(i + 1, len(segs)):
            u2, v2, c, d = segs[j]
            if u1 in (u2, v2) or v1 in (u2, v2):
                continue
            if not segments_cross(Segment(a, b), Segment(c, d)):
                continue
            x = segment_intersection_point(Segment(a, b), Segment(c, d))
            if x is None:
                raise GeometryError("overlapping quotient edges; quotient drawing not in general position")
            cross = abs((b.x - a.x) * (d.y - c.y) - (b.y - a.y) * (d.x - c.x))
            rho = 2 * eps * _l1(a, b) * _l1(c, d) / cross
            balls.append((x, rho, (u1, v1), (u2, v2)))
    return balls


def epsilon_conditions_ok(dh: Drawing, eps: Fraction) -> bool:
    """Explicit checker for the epsilon-disk conditions on a quotient drawing."""
    verts = sorted_vertices(dh.graph.vertices)
    pos = dh.positions
    four_eps2 = (2 * eps) ** 2
    for i, a in enumerate(verts):
        for b in verts[i + 1:]:
            if dist2_point_point(pos[a], pos[b]) <= four_eps2:
                return False
    segs = []
    for eid in sorted(dh.graph.edges):
        u, v = dh.graph.edges[eid]
        if (u, v) not in [(s[0], s[1]) for s in segs]:
            segs.append((u, v, pos[u], pos[v]))
    for i in range(len(segs)):
        u1, v1, a, b = segs[i]
        for j in range(i + 1, len(segs)):
            u2, v2, c, d = segs[j]
            if u1 in (u2, v2) or v1 in (u2, v2):
                continue
            if segments_cross(Segment(a, b), Segment(c, d)):
                continue
            if dist2_segment_segment(a, b, c, d) <= four_eps2:
                return False
    for u, v, a, b in segs:
        for q in verts:
            if q in (u, v):
                continue
            if dist2_point_segment(pos[q], a, b) <= four_eps2:
                return False
    balls = _busy_balls(dh, eps)
    for i in range(len(balls)):
        x1, r1 = balls[i][0], balls[i][1]
        for j in range(i + 1, len(balls)):
            x2, r2 = balls[j][0], balls[j][1]
            if dist2_point_point(x1, x2) <= (r1 + r2) ** 2:
                return False
        for q in verts:
            if dist2_point_point(x1, pos[q]) <= (r1 + eps) ** 2:
                return False
    return True


def safe_epsilon(dh: Drawing, p: HPartition | None = None) -> Fraction:
    """Largest tested power-of-two epsilon passing the disk/corridor conditions."""
    if p is not None and set(dh.graph.vertices) != set(p.quotient.vertices):
        raise GraphError("quotient drawing does not match the partition's quotient")
    verts = sorted_vertices(dh.graph.vertices)
    if len(verts) <= 1:
        return rat(1)
    min_gap = min(dist2_point_point(dh.positions[a], dh.positions[b])
                  for i, a in enumerate(verts) for b in verts[i + 1:])
    eps = rat(1)
    while (4 * eps) ** 2 >= min_gap:
        eps /= 2
    for _ in range(200):
        if epsilon_conditions_ok(dh, eps):
            return eps
        eps /= 2
    raise GeometryError("no valid epsilon found; is the quotient drawing in general position?")


# ---------------------------------------------------------------------------
# Drawing through a partition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HPartitionBounds:
    """Certified crossing guarantees for a partition-based drawing."""

    width: int
    density: int
    quotient_crossings: int
    nonsolitary_independent: bool
    part1_bound: int
    per_edge_bound: int | None
    total_bound: int
    observed: CrossingReport


def draw_via_hpartition(k: Multigraph, p: HPartition, dh: Drawing, seed=0):
    """Place bag members inside epsilon-disks of the quotient drawing.

    Returns the drawing of ``k`` together with its verified bound package:
    the general formula quotient_crossings*w^2*Delta^2 + (w-1)*sum of
    squared degrees over non-solitary vertices always applies; with a
    crossing-free quotient the per-edge guarantee is 2*density, improving
    to density when non-solitary bags form an independent set.
    """
    stats = partition_stats(p, k)
    ok, violations = is_general_position(dh)
    if not ok:
        raise GeometryError(f"quotient drawing not in general position: {violations[:3]!r}")
    eps = safe_epsilon(dh, p)
    rng = random.Random(f"hpartition:{seed}")
    half = eps / 2
    for _ in range(50):
        positions = {}
        taken = set()
        for b in sorted_vertices(p.bags):
            center = dh.positions[b]
            for v in sorted_vertices(p.bags[b]):
                while True:
                    cand = Point(center.x + rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 20) * half,
                                 center.y + rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 20) * half)
                    if cand not in taken:
                        break
                positions[v] = cand
                taken.add(cand)
        candidate = Drawing(k, positions)
        ok, _ = is_general_position(candidate)
        if ok:
            quotient_crossings = count_crossings(dh).total
            observed = count_crossings(candidate)
            bounds = _compute_bounds(observed, stats, quotient_crossings, k, p)
            return candidate, bounds
    raise GeometryError("bag placement failed to reach general position")


def _compute_bounds(observed: CrossingReport, stats: PartitionStats,
                    quotient_crossings: int, k: Multigraph, p: HPartition) -> HPartitionBounds:
    w, d = stats.width, stats.density
    delta = k.max_degree()
    deg2 = 0
    for b, members in p.bags.items():
        if len(members) > 1:
            deg2 += sum(k.degree(v) ** 2 for v in members)
    part1 = quotient_crossings * w * w * delta * delta + (w - 1) * deg2
    per_edge = None
    if quotient_crossings == 0:
        per_edge = d if stats.nonsolitary_independent else 2 * d
    total = per_edge * k.num_edges if per_edge is not None else part1
    if observed.total > total:
        raise BoundViolationError(
            f"partition drawing has {observed.total} crossings, certified {total}")
    if quotient_crossings == 0 and observed.total > part1:
        raise BoundViolationError(
            f"partition drawing has {observed.total} crossings, general bound {part1}")
    if per_edge is not None:
        worst = max(observed.per_edge.values(), default=0)
        if worst > per_edge:
            raise BoundViolationError(
                f"an edge carries {worst} crossings, certified {per_edge} per edge")
    return HPartitionBounds(width=w, density=d, quotient_crossings=quotient_crossings,
                            nonsolitary_independent=stats.nonsolitary_independent,
                            part1_bound=part1, per_edge_bound=per_edge,
                            total_bound=total, observed=observed)


def classify_partition_crossing(p: HPartition, pair, k: Multigraph) -> str:
    """Label a crossing pair: 'shared_bag' when one bag touches both edges,
    else 'busy_region' (four endpoints in four distinct bags)."""
    owner = p.bag_of()
    (e1, e2) = pair
    u1, v1 = k.edges[e1]
    u2, v2 = k.edges[e2]
    bags1 = {owner[u1], owner[v1]}
    bags2 = {owner[u2], owner[v2]}
    return "shared_bag" if bags1 & bags2 else "busy_region"


# ---------------------------------------------------------------------------
# Partition constructions
# ---------------------------------------------------------------------------


def _planar_partition(base: Graph, k: Multigraph, added) -> tuple:
    """Face-bag partition: quotient = base + absorbed low-degree added vertices
    + one bag vertex per attachment triangle."""
    absorbed = []
    by_triangle = {}
    for u in sorted_vertices(added):
        nbrs = tuple(sorted_vertices(k.distinct_neighbors(u)))
        if len(nbrs) <= 2:
            absorbed.append((u, nbrs))
        else:
            if len(nbrs) != 3:
                raise GraphError(f"added vertex {u!r} attaches to {len(nbrs)} vertices; at most 3 allowed")
            by_triangle.setdefault(nbrs, []).append(u)

    h_vertices = set(base.vertices) | {u for u, _ in absorbed}
    h_edges = set()
    solid = h_vertices
    for (u, v) in k.simple().edges:
        if u in solid and v in solid:
            h_edges.add((u, v))
    bags = {v: frozenset({v}) for v in h_vertices}
    for tri, members in sorted(by_triangle.items(), key=lambda kv: [vkey(x) for x in kv[0]]):
        apex = ("bag",) + tri
        h_vertices.add(apex)
        bags[apex] = frozenset(members)
        for x in tri:
            h_edges.add((apex, x) if vkey(apex) <= vkey(x) else (x, apex))
    h = Graph.build(h_vertices, h_edges)
    try:
        planar_embedding(h)
    except NotPlanarError as exc:
        raise StructuralMismatchError(
            "an attachment triangle is not a face of the planar base; "
            "was the base free of separating triangles?") from exc
    part = HPartition(quotient=h, bags=bags)
    stats = partition_stats(part, k)
    if not stats.nonsolitary_independent:
        raise StructuralMismatchError("internal: face bags must form an independent set")
    if stats.density > 3 * k.max_degree():
        raise StructuralMismatchError("internal: face-bag density exceeds 3*Delta")
    return h, part


def build_planar_blowup_partition(g: Graph, q: SimplicialBlowup) -> tuple:
    """Partition for a (<=3)-blowup of a planar base without separating triangles."""
    if q.base is not g and (q.base.vertices != g.vertices or q.base.edges != g.edges):
        raise GraphError("blowup base does not match the given graph")
    if q.k > 3 and any(len(att) > 3 for att in q.attachments.values()):
        raise GraphError("the face-bag partition needs attachment cliques of size at most 3")
    tris = find_separating_triangles(g)
    if tris:
        raise StructuralMismatchError(f"base graph has separating triangles, e.g. {tris[0]!r}")
    return _planar_partition(g, q.realize(), q.added)


def _two_bag_partition(base_vertices, k: Multigraph, added) -> tuple:
    """Two poles carry the base (one vertex vs the rest); added vertices are solitary."""
    base_sorted = sorted_vertices(base_vertices)
    if len(base_sorted) < 2:
        raise GraphError("the two-bag partition needs a base with at least 2 vertices")
    pole0, pole1 = ("pole", 0), ("pole", 1)
    bags = {pole0: frozenset({base_sorted[0]}), pole1: frozenset(base_sorted[1:])}
    h_edges = [(pole0, pole1)]
    for u in sorted_vertices(added):
        apex = ("apex", u)
        bags[apex] = frozenset({u})
        h_edges.append((apex, pole0))
        h_edges.append((apex, pole1))
    h = Graph.build(bags.keys(), h_edges)
    return h, HPartition(quotient=h, bags=bags)


def build_two_bag_partition(g: Graph, q: SimplicialBlowup) -> tuple:
    """Partition from the universal construction: works for every base graph."""
    if q.base.vertices != g.vertices or q.base.edges != g.edges:
        raise GraphError("blowup base does not match the given graph")
    return _two_bag_partition(g.vertices, q.realize(), q.added)


def _absorbing_partition(base: Graph, k: Multigraph, added) -> tuple:
    """Quotient isomorphic to the base; each added vertex joins a neighbour's bag."""
    if not base.vertices and added:
        raise GraphError("cannot absorb added vertices into an empty base")
    assigned = {v: {v} for v in base.vertices}
    fallback = sorted_vertices(base.vertices)[0] if base.vertices else None
    for u in sorted_vertices(added):
        nbrs = k.distinct_neighbors(u)
        host = min(nbrs, key=vkey) if nbrs else fallback
        assigned[host].add(u)
    bags = {v: frozenset(s) for v, s in assigned.items()}
    return base, HPartition(quotient=base, bags=bags)


def build_absorbing_partition(g: Graph, q: SimplicialBlowup) -> tuple:
    """Partition with quotient g itself; width at most Delta(Q)+1."""
    if q.base.vertices != g.vertices or q.base.edges != g.edges:
        raise GraphError("blowup base does not match the given graph")
    return _absorbing_partition(g, q.realize(), q.added)


# ---------------------------------------------------------------------------
# Drawing workers (shared with the clique-sum composer)
# ---------------------------------------------------------------------------


def _scatter_drawing(k: Multigraph, seed=0) -> Drawing:
    """Generic positions for an edgeless multigraph."""
    rng = random.Random(f"scatter:{seed}")
    positions = {}
    taken = set()
    for i, v in enumerate(sorted_vertices(k.vertices)):
        while True:
            cand = Point(rat(i) + rat(rng.randint(1, 2 ** 20), 2 ** 21),
                         rat(rng.randint(1, 2 ** 20), 2 ** 20))
            if cand not in taken:
                break
        positions[v] = cand
        taken.add(cand)
    return Drawing(k, positions)


def _star_drawing(center, k: Multigraph, seed=0) -> Drawing:
    """Crossing-free drawing of a star-shaped multigraph (all edges at one vertex)."""
    rng = random.Random(f"star:{seed}")
    for attempt in range(50):
        positions = {center: Point(rat(0), rat(0))}
        taken = {positions[center]}
        for v in sorted_vertices(k.vertices):
            if v == center:
                continue
            while True:
                cand = Point(rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 18),
                             rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 18))
                if cand not in taken and cand != positions[center]:
                    break
            positions[v] = cand
            taken.add(cand)
        candidate = Drawing(k, positions)
        ok, _ = is_general_position(candidate)
        if ok:
            return candidate
    raise GeometryError("star placement failed to reach general position")


def draw_blowup_two_bag(base_vertices, k: Multigraph, added, seed=0):
    """Draw a blowup through the two-bag partition; certifies (|base|-1)*Delta*m.

    Bases with fewer than two vertices degenerate to stars or scatters,
    which are drawn crossing-free directly.
    """
    base_sorted = sorted_vertices(base_vertices)
    if len(base_sorted) == 0:
        drawing = _scatter_drawing(k, seed)
        observed = count_crossings(drawing)
        bounds = HPartitionBounds(width=1, density=0, quotient_crossings=0,
                                  nonsolitary_independent=True, part1_bound=0,
                                  per_edge_bound=0, total_bound=0, observed=observed)
        if observed.total:
            raise BoundViolationError("edgeless drawing has crossings")
        return drawing, bounds
    if len(base_sorted) == 1:
        drawing = _star_drawing(base_sorted[0], k, seed)
        observed = count_crossings(drawing)
        if observed.total:
            raise BoundViolationError("star drawing has crossings")
        bounds = HPartitionBounds(width=1, density=k.num_edges, quotient_crossings=0,
                                  nonsolitary_independent=True, part1_bound=0,
                                  per_edge_bound=0, total_bound=0, observed=observed)
        return drawing, bounds
    h, part = _two_bag_partition(base_vertices, k, added)
    dh = fary_draw(h, seed=f"{seed}-quotient")
    return draw_via_hpartition(k, part, dh, seed=seed)


def draw_blowup_planar(base: Graph, k: Multigraph, added, seed=0):
    """Draw a (<=3)-blowup of a separating-triangle-free planar base; 3*Delta per edge."""
    h, part = _planar_partition(base, k, added)
    dh = fary_draw(h, seed=f"{seed}-quotient")
    return draw_via_hpartition(k, part, dh, seed=seed)
