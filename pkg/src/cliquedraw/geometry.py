"""Exact rational plane geometry.

Predicates, crossing counting with multigraph semantics, general-position
certification and repair, safe disk radii, and rigid embedding of
sub-drawings into disks.  Every decision path uses exact ``Fraction``
arithmetic; floats appear only in SVG emission (module :mod:`cliquedraw.io`).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DegenerateSegmentError, GeometryError, PerturbationError
from .graphs import Multigraph, VertexId, sorted_vertices, vkey

try:  # gmpy2 rationals are exact like Fraction and much faster
    from gmpy2 import mpq as _mpq

    def rat(a, b=1):
        return _mpq(a, b)
except ImportError:  # pragma: no cover
    def rat(a, b=1):
        return Fraction(a, b)

Rational = Fraction  # public alias; any exact rational type is accepted


@dataclass(frozen=True, order=True)
class Point:
    x: Fraction
    y: Fraction


def pt(x, y) -> Point:
    """Point constructor coercing ints, strings and rationals exactly."""
    return Point(rat(x), rat(y))


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a == self.b:
            raise DegenerateSegmentError(f"zero-length segment at {self.a}")


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: Fraction

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("disk radius must be positive")

    def contains(self, p: Point, strict: bool = False) -> bool:
        d2 = (p.x - self.center.x) ** 2 + (p.y - self.center.y) ** 2
        r2 = self.radius * self.radius
        return d2 < r2 if strict else d2 <= r2


def orientation(p: Point, q: Point, r: Point) -> int:
    """Sign of the cross product (q-p) x (r-p): +1 ccw, -1 cw, 0 collinear."""
    v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    return (v > 0) - (v < 0)


def collinear(p: Point, q: Point, r: Point) -> bool:
    return orientation(p, q, r) == 0


def _within_box(a: Point, b: Point, p: Point) -> bool:
    return (min(a.x, b.x) <= p.x <= max(a.x, b.x)
            and min(a.y, b.y) <= p.y <= max(a.y, b.y))


def point_on_segment(p: Point, a: Point, b: Point) -> bool:
    """True iff p lies on the closed segment ab."""
    return collinear(a, b, p) and _within_box(a, b, p)


def segments_cross(s: Segment, t: Segment) -> bool:
    """True iff the segments share a point and share no endpoint.

    Overlapping segments without a common endpoint do intersect; identical
    segments necessarily share endpoints and return False.
    """
    a, b, c, d = s.a, s.b, t.a, t.b
    if a in (c, d) or b in (c, d):
        return False
    o1 = orientation(c, d, a)
    o2 = orientation(c, d, b)
    o3 = orientation(a, b, c)
    o4 = orientation(a, b, d)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _within_box(c, d, a):
        return True
    if o2 == 0 and _within_box(c, d, b):
        return True
    if o3 == 0 and _within_box(a, b, c):
        return True
    if o4 == 0 and _within_box(a, b, d):
        return True
    return False


def segment_intersection_point(s: Segment, t: Segment) -> Point | None:
    """Exact intersection point of two segments crossing at a single point.

    Returns None for disjoint pairs and for collinear overlaps (no unique
    point).  Endpoint touches count and return the touch point.
    """
    a, b, c, d = s.a, s.b, t.a, t.b
    r = (b.x - a.x, b.y - a.y)
    q = (d.x - c.x, d.y - c.y)
    denom = r[0] * q[1] - r[1] * q[0]
    if denom == 0:
        return None
    tnum = (c.x - a.x) * q[1] - (c.y - a.y) * q[0]
    unum = (c.x - a.x) * r[1] - (c.y - a.y) * r[0]
    tpar = rat(tnum, denom)
    upar = rat(unum, denom)
    if 0 <= tpar <= 1 and 0 <= upar <= 1:
        return Point(a.x + tpar * r[0], a.y + tpar * r[1])
    return None


def dist2_point_point(p: Point, q: Point) -> Fraction:
    return (p.x - q.x) ** 2 + (p.y - q.y) ** 2


def dist2_point_segment(p: Point, a: Point, b: Point) -> Fraction:
    abx, aby = b.x - a.x, b.y - a.y
    apx, apy = p.x - a.x, p.y - a.y
    den = abx * abx + aby * aby
    if den == 0:
        return apx * apx + apy * apy
    num = apx * abx + apy * aby
    if num <= 0:
        return apx * apx + apy * apy
    if num >= den:
        return dist2_point_point(p, b)
    cross = apx * aby - apy * abx
    return cross * cross / den


def dist2_segment_segment(a: Point, b: Point, c: Point, d: Point) -> Fraction:
    try:
        if segments_cross(Segment(a, b), Segment(c, d)):
            return rat(0)
    except DegenerateSegmentError:
        pass
    if a in (c, d) or b in (c, d):
        return rat(0)
    return min(
        dist2_point_segment(a, c, d) if c != d else dist2_point_point(a, c),
        dist2_point_segment(b, c, d) if c != d else dist2_point_point(b, c),
        dist2_point_segment(c, a, b) if a != b else dist2_point_point(c, a),
        dist2_point_segment(d, a, b) if a != b else dist2_point_point(d, a),
    )


# ---------------------------------------------------------------------------
# Drawings and crossing reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Drawing:
    """Exact positions for the vertices of a multigraph; edges are segments."""

    graph: Multigraph
    positions: Mapping[VertexId, Point]

    def __post_init__(self):
        missing = self.graph.vertices - set(self.positions)
        if missing:
            raise GeometryError(f"unpositioned vertices: {sorted_vertices(missing)!r}")
        seen = {}
        for v in self.graph.vertices:
            p = self.positions[v]
            if p in seen:
                raise GeometryError(f"vertices {seen[p]!r} and {v!r} share position {p}")
            seen[p] = v

    def segment(self, eid: int) -> Segment:
        u, v = self.graph.edges[eid]
        return Segment(self.positions[u], self.positions[v])

    def translated(self, dx: Fraction, dy: Fraction) -> "Drawing":
        pos = {v: Point(p.x + dx, p.y + dy) for v, p in self.positions.items()}
        return Drawing(self.graph, pos)


@dataclass(frozen=True)
class CrossingReport:
    total: int
    per_edge: Mapping[int, int]
    pairs: frozenset

    def __post_init__(self):
        if self.total != len(self.pairs):
            raise GeometryError("crossing report: total != |pairs|")
        if sum(self.per_edge.values()) != 2 * self.total:
            raise GeometryError("crossing report: per-edge sum != 2*total")


def _scaled_coords(positions: Mapping[VertexId, Point]) -> dict:
    """Map every vertex to integer coordinates on a common grid."""
    scale = 1
    for p in positions.values():
        scale = scale * p.x.denominator // math.gcd(scale, p.x.denominator)
        scale = scale * p.y.denominator // math.gcd(scale, p.y.denominator)
    out = {}
    for v, p in positions.items():
        out[v] = (p.x.numerator * (scale // p.x.denominator),
                  p.y.numerator * (scale // p.y.denominator))
    return out


def _int_segments_cross(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    """Integer-coordinate version of segments_cross without endpoint checks."""
    def orient(px, py, qx, qy, rx, ry):
        v = (qx - px) * (ry - py) - (qy - py) * (rx - px)
        return (v > 0) - (v < 0)

    o1 = orient(cx, cy, dx, dy, ax, ay)
    o2 = orient(cx, cy, dx, dy, bx, by)
    o3 = orient(ax, ay, bx, by, cx, cy)
    o4 = orient(ax, ay, bx, by, dx, dy)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def boxed(px, py, qx, qy, rx, ry):
        return min(px, qx) <= rx <= max(px, qx) and min(py, qy) <= ry <= max(py, qy)

    if o1 == 0 and boxed(cx, cy, dx, dy, ax, ay):
        return True
    if o2 == 0 and boxed(cx, cy, dx, dy, bx, by):
        return True
    if o3 == 0 and boxed(ax, ay, bx, by, cx, cy):
        return True
    if o4 == 0 and boxed(ax, ay, bx, by, dx, dy):
        return True
    return False


def count_crossings(d: Drawing) -> CrossingReport:
    """Exact crossing-pair enumeration under multigraph drawing semantics.

    Edge pairs with a common endpoint never count; in particular parallel
    copies of the same vertex pair (overlapping segments) contribute no
    pair, while a third edge crossing their shared segment contributes one
    pair per copy.
    """
    coords = _scaled_coords(d.positions)
    items = []
    for eid in sorted(d.graph.edges):
        u, v = d.graph.edges[eid]
        (ax, ay), (bx, by) = coords[u], coords[v]
        items.append((min(ax, bx), max(ax, bx), min(ay, by), max(ay, by),
                      ax, ay, bx, by, u, v, eid))
    items.sort(key=lambda it: it[0])
    per_edge = {eid: 0 for eid in d.graph.edges}
    pairs = set()
    n = len(items)
    for i in range(n):
        it1 = items[i]
        maxx1 = it1[1]
        for j in range(i + 1, n):
            it2 = items[j]
            if it2[0] > maxx1:
                break
            if it1[3] < it2[2] or it2[3] < it1[2]:
                continue
            u1, v1, u2, v2 = it1[8], it1[9], it2[8], it2[9]
            if u1 in (u2, v2) or v1 in (u2, v2):
                continue
            if _int_segments_cross(it1[4], it1[5], it1[6], it1[7],
                                   it2[4], it2[5], it2[6], it2[7]):
                e1, e2 = it1[10], it2[10]
                pairs.add((e1, e2) if e1 < e2 else (e2, e1))
                per_edge[e1] += 1
                per_edge[e2] += 1
    return CrossingReport(total=len(pairs), per_edge=per_edge, pairs=frozenset(pairs))


# ---------------------------------------------------------------------------
# General position
# ---------------------------------------------------------------------------


def _primitive_direction(dx: int, dy: int) -> tuple:
    g = math.gcd(abs(dx), abs(dy))
    dx, dy = dx // g, dy // g
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return dx, dy


def _distinct_segments(d: Drawing) -> list:
    """Deduped geometric segments: one item per distinct vertex pair with an edge."""
    seen = set()
    out = []
    for eid in sorted(d.graph.edges):
        pair = d.graph.edges[eid]
        if pair in seen:
            continue
        seen.add(pair)
        out.append(pair)
    return out


def is_general_position(d: Drawing, strict: bool = False):
    """Check the general-position conditions; returns (ok, violations).

    Checked: (a) no three vertex points collinear, (b) crossing points of
    distinct segments pairwise distinct unless all segments through the
    point share a common endpoint, (c) no vertex interior to a non-incident
    segment.  ``strict`` extends (b) to segments between *all* vertex
    pairs, not only edges (quadratically many segments; small inputs only).
    """
    violations = []
    verts = sorted_vertices(d.graph.vertices)
    coords = _scaled_coords(d.positions)

    for i, a in enumerate(verts):
        dirs = {}
        ax, ay = coords[a]
        for b in verts[i + 1:]:
            bx, by = coords[b]
            prim = _primitive_direction(bx - ax, by - ay)
            if prim in dirs:
                violations.append(("collinear", (a, dirs[prim], b)))
            else:
                dirs[prim] = b

    segs = _distinct_segments(d)
    if strict:
        segs = [(verts[i], verts[j]) for i in range(len(verts)) for j in range(i + 1, len(verts))]
    for (u, v) in segs:
        pu, pv = d.positions[u], d.positions[v]
        for w in verts:
            if w in (u, v):
                continue
            if point_on_segment(d.positions[w], pu, pv):
                violations.append(("vertex_on_segment", (w, (u, v))))

    by_point = {}
    nseg = len(segs)
    for i in range(nseg):
        u1, v1 = segs[i]
        s1 = Segment(d.positions[u1], d.positions[v1])
        for j in range(i + 1, nseg):
            u2, v2 = segs[j]
            if u1 in (u2, v2) or v1 in (u2, v2):
                continue
            s2 = Segment(d.positions[u2], d.positions[v2])
            if not segments_cross(s1, s2):
                continue
            x = segment_intersection_point(s1, s2)
            if x is None:
                continue  # collinear overlap; reported via collinearity above
            by_point.setdefault(x, set()).update({segs[i], segs[j]})
    for x, through in by_point.items():
        if len(through) < 3:
            continue
        common = None
        for (u, v) in through:
            ends = {d.positions[u], d.positions[v]}
            common = ends if common is None else (common & ends)
        if not common:
            violations.append(("concurrent", (x, tuple(sorted(through, key=lambda s: (vkey(s[0]), vkey(s[1])))))))

    return (not violations, violations)


def perturb_general_position(d: Drawing, crossing_budget: int | None = None,
                             seed=0, max_attempts: int = 80) -> Drawing:
    """Nudge vertices until the drawing is in general position.

    With ``crossing_budget=None`` the output's crossing pairs are a subset
    of the input's (in particular a crossing-free input stays crossing
    free); otherwise any output with at most ``crossing_budget`` crossings
    is accepted.  Correctness is guarded by re-verification, not by the
    perturbation magnitude.
    """
    ok, violations = is_general_position(d)
    if ok:
        if crossing_budget is None:
            return d
        if count_crossings(d).total <= crossing_budget:
            return d
        raise PerturbationError("drawing already in general position but above the crossing budget")

    base_pairs = count_crossings(d).pairs
    verts = sorted_vertices(d.graph.vertices)
    if len(verts) >= 2:
        min_gap = min(
            max(abs(d.positions[a].x - d.positions[b].x), abs(d.positions[a].y - d.positions[b].y))
            for i, a in enumerate(verts) for b in verts[i + 1:]
        )
        delta0 = _pow2_at_most(min_gap / 16)
    else:
        delta0 = rat(1)
    rng = random.Random(f"perturb:{seed}")

    movers = set()
    for attempt in range(max_attempts):
        for kind, payload in violations:
            if kind == "collinear":
                movers.add(payload[2])
            elif kind == "vertex_on_segment":
                movers.add(payload[0])
            else:
                movers.add(payload[1][0][0])
        delta = delta0 / (2 ** (attempt // 10))
        trial = dict(d.positions)
        taken = set(trial.values())
        for v in sorted_vertices(movers):
            taken.discard(trial[v])
            while True:
                off_x = rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 20) * delta
                off_y = rat(rng.randint(-(2 ** 20), 2 ** 20), 2 ** 20) * delta
                cand = Point(d.positions[v].x + off_x, d.positions[v].y + off_y)
                if cand not in taken:
                    break
            trial[v] = cand
            taken.add(cand)
        candidate = Drawing(d.graph, trial)
        ok, violations = is_general_position(candidate)
        if not ok:
            continue
        report = count_crossings(candidate)
        if crossing_budget is None:
            if report.pairs <= base_pairs:
                return candidate
        elif report.total <= crossing_budget:
            return candidate
    raise PerturbationError(f"no valid perturbation found after {max_attempts} attempts")


# ---------------------------------------------------------------------------
# Safe disks (vertex replacement machinery)
# ---------------------------------------------------------------------------


def _star_segments(d: Drawing, w: VertexId) -> list:
    """One (neighbour, segment) entry per distinct neighbour of w."""
    pw = d.positions[w]
    out = []
    for nb in sorted_vertices(d.graph.distinct_neighbors(w)):
        out.append((nb, pw, d.positions[nb]))
    return out


def _near_star_candidates(d: Drawing, w: VertexId, pad: Fraction):
    """Vertices and edges whose bounding boxes come within ``pad`` of w's star.

    Everything outside is at distance greater than ``pad`` from every star
    segment, so capsule checks at radius <= pad may skip it.
    """
    stars = _star_segments(d, w)
    pw = d.positions[w]
    xs, ys = [pw.x], [pw.y]
    for _, _, b in stars:
        xs.append(b.x)
        ys.append(b.y)
    lo_x, hi_x = min(xs) - pad, max(xs) + pad
    lo_y, hi_y = min(ys) - pad, max(ys) + pad
    near_v = []
    for v in sorted_vertices(d.graph.vertices):
        p = d.positions[v]
        if lo_x <= p.x <= hi_x and lo_y <= p.y <= hi_y:
            near_v.append(v)
    near_e = []
    for eid in sorted(d.graph.edges):
        u, v = d.graph.edges[eid]
        pu, pv = d.positions[u], d.positions[v]
        if max(pu.x, pv.x) < lo_x or min(pu.x, pv.x) > hi_x:
            continue
        if max(pu.y, pv.y) < lo_y or min(pu.y, pv.y) > hi_y:
            continue
        near_e.append(eid)
    return stars, near_v, near_e


def _local_crossing_points(d: Drawing, w: VertexId, reach2: Fraction, candidates=None) -> list:
    """Crossing points of the drawing within ``sqrt(reach2)`` of w's star.

    Returns (point, on_beam) entries where ``on_beam`` is the set of
    neighbours v with the point on segment w-v.
    """
    if candidates is None:
        stars, _, near_e = _near_star_candidates(d, w, _pow2_at_least_sqrt(reach2))
    else:
        stars, _, near_e = candidates
    if not stars:
        return []
    reach = _pow2_at_least_sqrt(reach2)
    close = set()
    for nb, a, b in stars:
        lo_x, hi_x = min(a.x, b.x) - reach, max(a.x, b.x) + reach
        lo_y, hi_y = min(a.y, b.y) - reach, max(a.y, b.y) + reach
        for eid in near_e:
            if eid in close:
                continue
            u, v = d.graph.edges[eid]
            pu, pv = d.positions[u], d.positions[v]
            if max(pu.x, pv.x) < lo_x or min(pu.x, pv.x) > hi_x:
                continue
            if max(pu.y, pv.y) < lo_y or min(pu.y, pv.y) > hi_y:
                continue
            if dist2_segment_segment(pu, pv, a, b) <= reach2:
                close.add(eid)
    cands = sorted(close)
    points = {}
    for i, e1 in enumerate(cands):
        u1, v1 = d.graph.edges[e1]
        s1 = Segment(d.positions[u1], d.positions[v1])
        for e2 in cands[i + 1:]:
            u2, v2 = d.graph.edges[e2]
            if u1 in (u2, v2) or v1 in (u2, v2):
                continue
            s2 = Segment(d.positions[u2], d.positions[v2])
            if not segments_cross(s1, s2):
                continue
            x = segment_intersection_point(s1, s2)
            if x is not None:
                points[x] = None
    out = []
    for x in points:
        on_beam = {nb for nb, a, b in stars if point_on_segment(x, a, b)}
        out.append((x, on_beam))
    return out


def _pow2_at_least_sqrt(m: Fraction) -> Fraction:
    """Smallest power of two r with r*r >= m (m >= 0)."""
    if m <= 0:
        return rat(0)
    r = rat(1)
    while r * r < m:
        r *= 2
    while (r / 2) ** 2 >= m:
        r /= 2
    return r


def _segment_in_capsule_union(x: Point, y: Point, capsules: list, r2: Fraction,
                              depth: int = 24) -> bool:
    """Conservative test: is segment xy contained in the union of capsules?

    capsules are (a, b) segment cores with common squared radius ``r2``.
    May answer True for borderline cases (safe direction: forces a smaller
    radius); never answers False for a truly contained segment.
    """
    def inside(p):
        return any(dist2_point_segment(p, a, b) <= r2 for a, b in capsules)

    def in_single(p, q):
        return any(dist2_point_segment(p, a, b) <= r2 and dist2_point_segment(q, a, b) <= r2
                   for a, b in capsules)

    if not inside(x) or not inside(y):
        return False
    if in_single(x, y):
        return True
    if depth == 0:
        return True
    mid = Point((x.x + y.x) / 2, (x.y + y.y) / 2)
    return (_segment_in_capsule_union(x, mid, capsules, r2, depth - 1)
            and _segment_in_capsule_union(mid, y, capsules, r2, depth - 1))


def disk_conditions_ok(d: Drawing, w: VertexId, radius: Fraction, _candidates=None) -> bool:
    """Explicit checker for the safe-disk conditions at the given radius.

    Beams from each neighbour into the disk are over-approximated by
    capsules of the same radius around the star segments, so a True answer
    certifies the exact conditions.
    """
    pw = d.positions[w]
    r2 = radius * radius
    if _candidates is None:
        _candidates = _near_star_candidates(d, w, radius)
    stars, near_v, near_e = _candidates
    incident = {eid for eid in near_e if w in d.graph.edges[eid]}

    for v in near_v:
        if v == w:
            continue
        if dist2_point_point(d.positions[v], pw) <= r2:
            return False
    for eid in near_e:
        if eid in incident:
            continue
        u, v = d.graph.edges[eid]
        if dist2_point_segment(pw, d.positions[u], d.positions[v]) <= r2:
            return False

    for nb, a, b in stars:
        for v in near_v:
            if v in (w, nb):
                continue
            if dist2_point_segment(d.positions[v], a, b) <= r2:
                return False

    crossings = _local_crossing_points(d, w, r2, candidates=_candidates)
    for x, on_beam in crossings:
        if on_beam:
            continue
        if any(dist2_point_segment(x, a, b) <= r2 for nb, a, b in stars):
            return False

    capsules = [(a, b) for nb, a, b in stars]
    on_beam_pts = [(x, on_beam) for x, on_beam in crossings if on_beam]
    for i, (x, bx) in enumerate(on_beam_pts):
        for y, by in on_beam_pts[i + 1:]:
            if bx & by:
                continue  # on a common edge w-v: exempt
            if _segment_in_capsule_union(x, y, capsules, r2):
                return False
    return True


def _pow2_at_most(value: Fraction) -> Fraction:
    """Largest power of two that is <= value (value > 0)."""
    if value <= 0:
        raise GeometryError("no positive power of two below a non-positive value")
    p = rat(1)
    if value >= 1:
        while p * 2 <= value:
            p *= 2
        return p
    while p > value:
        p /= 2
    return p


def _pow2_below_sqrt(m: Fraction) -> Fraction:
    """Largest power of two r with r*r < m."""
    if m <= 0:
        raise GeometryError("need a positive squared bound")
    r = rat(1)
    if r * r >= m:
        while r * r >= m:
            r /= 2
        return r
    while (2 * r) ** 2 < m:
        r *= 2
    return r


def safe_disk_radius(d: Drawing, w: VertexId) -> Disk:
    """A disk around w meeting the vertex-replacement conditions.

    The conditions, checked explicitly: no other vertex in the disk or in
    any beam; the only crossing points inside a beam lie on the edge to
    that beam's neighbour; no segment between two crossing points is fully
    inside the beam union unless it lies along a single star edge.  The
    drawing must be in general position.
    """
    if w not in d.graph.vertices:
        raise GeometryError(f"vertex {w!r} not in the drawing")
    pw = d.positions[w]
    others = [v for v in d.graph.vertices if v != w]
    if not others:
        return Disk(pw, rat(1))

    pool = [min(dist2_point_point(d.positions[v], pw) for v in others)]
    start = _pow2_below_sqrt(pool[0] / 4)

    # phase 1: vertex and edge clearances give a provisional radius
    stars, near_v, near_e = _near_star_candidates(d, w, start)
    incident = {eid for eid in near_e if w in d.graph.edges[eid]}
    for eid in near_e:
        if eid in incident:
            continue
        u, v = d.graph.edges[eid]
        pool.append(dist2_point_segment(pw, d.positions[u], d.positions[v]))
    for nb, a, b in stars:
        for v in near_v:
            if v in (w, nb):
                continue
            d2 = dist2_point_segment(d.positions[v], a, b)
            if d2 > 0:
                pool.append(d2)
    positive = [m for m in pool if m > 0]
    r1 = min(start, _pow2_below_sqrt(min(positive))) if positive else start

    # phase 2: crossing points only matter inside the provisional tube
    candidates = _near_star_candidates(d, w, r1)
    crossings = _local_crossing_points(d, w, r1 * r1, candidates=candidates)
    stars = candidates[0]
    for x, on_beam in crossings:
        if not on_beam:
            for nb, a, b in stars:
                d2 = dist2_point_segment(x, a, b)
                if d2 > 0:
                    pool.append(d2)
    on_beam_pts = [(x, ob) for x, ob in crossings if ob]
    for i, (x, bx) in enumerate(on_beam_pts):
        for y, by in on_beam_pts[i + 1:]:
            if bx & by:
                continue
            best = rat(0)
            for tnum in (1, 2, 3):
                s = Point(x.x + rat(tnum, 4) * (y.x - x.x),
                          x.y + rat(tnum, 4) * (y.y - x.y))
                d2 = min(dist2_point_segment(s, a, b) for nb, a, b in stars)
                best = max(best, d2)
            if best > 0:
                pool.append(best)

    positive = [m for m in pool if m > 0]
    radius = min(r1, _pow2_below_sqrt(min(positive))) if positive else r1
    for _ in range(64):
        if disk_conditions_ok(d, w, radius):
            return Disk(pw, radius)
        radius /= 2
    raise GeometryError(f"no safe disk radius found around {w!r}; is the drawing in general position?")


def replace_vertex_by_points(d: Drawing, w: VertexId, disk: Disk,
                             assignment: Mapping[int, Point],
                             check: bool = True) -> Drawing:
    """Split vertex w into points inside its safe disk.

    ``assignment`` maps every w-incident edge id to a point in the disk;
    edges re-attach to (new vertices at) those points.  With a single
    distinct point the vertex keeps its name and the result is a drawing
    of the same multigraph.  With ``check`` the result is verified to be
    in general position.
    """
    if w not in d.graph.vertices:
        raise GeometryError(f"vertex {w!r} not in the drawing")
    incident = {eid for eid in d.graph.edges if w in d.graph.edges[eid]}
    if set(assignment) != incident:
        raise GeometryError("assignment must cover exactly the edges incident to the replaced vertex")
    for eid, p in assignment.items():
        if not disk.contains(p):
            raise GeometryError(f"assigned point for edge {eid} lies outside the disk")

    distinct = sorted(set(assignment.values()))
    if len(distinct) == 1:
        name_of = {distinct[0]: w}
    else:
        name_of = {p: ("split", w, i) for i, p in enumerate(distinct)}

    vertices = set(d.graph.vertices) - {w} | set(name_of.values())
    edges = {}
    for eid in sorted(d.graph.edges):
        u, v = d.graph.edges[eid]
        if eid in incident:
            other = v if u == w else u
            edges[eid] = tuple(sorted((other, name_of[assignment[eid]]), key=vkey))
        else:
            edges[eid] = (u, v)
    positions = {v: p for v, p in d.positions.items() if v != w}
    for p, name in name_of.items():
        positions[name] = p
    out = Drawing(Multigraph(frozenset(vertices), edges), positions)
    if check:
        ok, violations = is_general_position(out)
        if not ok:
            raise GeometryError(f"replacement destroys general position: {violations[:3]!r}")
    return out


_ROTATIONS = [
    (1, 0, 1), (3, 4, 5), (4, 3, 5), (3, -4, 5), (5, 12, 13), (12, 5, 13),
    (5, -12, 13), (8, 15, 17), (15, 8, 17), (7, 24, 25), (24, 7, 25),
    (20, 21, 29), (9, 40, 41), (12, 35, 37), (28, 45, 53), (0, 1, 1),
]


def _light_union_ok(new_pos: dict, ctx: Drawing | None, new_edges: list) -> bool:
    """Cheap degeneracy screen for a freshly placed point set against a context.

    Rejects coincident points, collinear triples involving a new point, new
    points on context segments and context points on new segments.  Full
    general-position certification is the caller's job.
    """
    pts = list(new_pos.values())
    if len(set(pts)) != len(pts):
        return False
    ctx_pts = list(ctx.positions.values()) if ctx is not None else []
    if set(pts) & set(ctx_pts):
        return False
    allpts = pts + ctx_pts
    for i, p in enumerate(pts):
        dirs = set()
        for q in allpts:
            if q == p:
                continue
            dx, dy = q.x - p.x, q.y - p.y
            num_dx = dx.numerator * dy.denominator
            num_dy = dy.numerator * dx.denominator
            g = math.gcd(abs(num_dx), abs(num_dy))
            if g:
                prim = (num_dx // g, num_dy // g)
                if prim[0] < 0 or (prim[0] == 0 and prim[1] < 0):
                    prim = (-prim[0], -prim[1])
            else:
                prim = (0, 0)
            if prim in dirs:
                return False
            dirs.add(prim)
    if ctx is not None:
        for pair in _distinct_segments(ctx):
            a, b = ctx.positions[pair[0]], ctx.positions[pair[1]]
            lo_x, hi_x = min(a.x, b.x), max(a.x, b.x)
            lo_y, hi_y = min(a.y, b.y), max(a.y, b.y)
            for p in pts:
                if lo_x <= p.x <= hi_x and lo_y <= p.y <= hi_y and point_on_segment(p, a, b):
                    return False
        for (pa, pb) in new_edges:
            for q in ctx_pts:
                if point_on_segment(q, pa, pb):
                    return False
    return True


def embed_in_disk(inner: Drawing, disk: Disk, context: Drawing | None = None,
                  full_check: bool = True) -> Drawing:
    """Rigidly map ``inner`` strictly inside ``disk``.

    The map is a rational rotation composed with a power-of-two scale and a
    translation, so all incidences and crossing pairs of ``inner`` are
    preserved exactly.  Rotation candidates are tried in a fixed order
    until the union with ``context`` passes the degeneracy checks; on
    failure the scale is halved.
    """
    if context is not None and (set(inner.graph.vertices) & set(context.graph.vertices)):
        raise GeometryError("inner and context drawings share vertex names")
    xs = [p.x for p in inner.positions.values()]
    ys = [p.y for p in inner.positions.values()]
    cx = (min(xs) + max(xs)) / 2
    cy = (min(ys) + max(ys)) / 2
    max_l1 = max((abs(p.x - cx) + abs(p.y - cy) for p in inner.positions.values()), default=rat(0))
    if max_l1 == 0:
        scale = rat(1)
    else:
        scale = _pow2_at_most(disk.radius / (2 * max_l1))

    for _ in range(10):
        for cos_n, sin_n, den in _ROTATIONS:
            cos_r = rat(cos_n, den)
            sin_r = rat(sin_n, den)
            new_pos = {}
            for v, p in inner.positions.items():
                rx, ry = p.x - cx, p.y - cy
                qx = cos_r * rx - sin_r * ry
                qy = sin_r * rx + cos_r * ry
                new_pos[v] = Point(disk.center.x + scale * qx, disk.center.y + scale * qy)
            new_edges = [(new_pos[u], new_pos[v]) for u, v in inner.graph.edges.values()]
            if not _light_union_ok(new_pos, context, new_edges):
                continue
            candidate = Drawing(inner.graph, new_pos)
            if full_check and context is not None:
                merged = _union_drawing(candidate, context)
                ok, _ = is_general_position(merged)
                if not ok:
                    continue
            return candidate
        scale /= 2
    raise GeometryError("could not place the inner drawing in general position inside the disk")


def _union_drawing(a: Drawing, b: Drawing) -> Drawing:
    edges = {}
    nid = 0
    for src in (a, b):
        for eid in sorted(src.graph.edges):
            edges[nid] = src.graph.edges[eid]
            nid += 1
    graph = Multigraph(frozenset(a.graph.vertices | b.graph.vertices), edges)
    positions = dict(a.positions)
    positions.update(b.positions)
    return Drawing(graph, positions)


def snap_drawing(d: Drawing, grid_bits: Iterable[int] = (24, 32, 48, 64)) -> Drawing:
    """Round-and-verify coordinate compaction.

    Snaps all coordinates to a power-of-two grid and keeps the result only
    if the crossing report is unchanged and general position still holds;
    otherwise returns the input unchanged.
    """
    before = count_crossings(d)
    def snap(x, q):
        num, den = x.numerator, x.denominator
        return rat((2 * num * q + den) // (2 * den), q)

    for bits in grid_bits:
        q = 1 << bits
        pos = {v: Point(snap(p.x, q), snap(p.y, q)) for v, p in d.positions.items()}
        if len(set(pos.values())) != len(pos):
            continue
        cand = Drawing(d.graph, pos)
        if count_crossings(cand).pairs != before.pairs:
            continue
        ok, _ = is_general_position(cand)
        if ok:
            return cand
    return d
