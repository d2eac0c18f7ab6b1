"""File formats, SVG rendering and report serialization.

One graph format, one tree-decomposition format, one clique-sum
decomposition format, one drawing format.  Drawings serialize exact
rationals as ``numerator/denominator`` integer pairs so stored drawings
remain exact certificates; an embedded crossing record is re-verified on
parse.  SVG is the only lossy surface and is explicitly non-authoritative.
"""

from __future__ import annotations

import json
from typing import Iterable

from .composer import BoundReport
from .decomposition import TreeDecomposition
from .errors import FormatError, TamperError
from .geometry import (Drawing, Point, count_crossings, rat,
                       segment_intersection_point)
from .graphs import (CliqueSumDecomposition, Graph, Multigraph, Piece,
                     PieceKind, edge_key, sorted_vertices, vkey)


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c ") or line == "c":
            continue
        yield lineno, line.split()


# ---------------------------------------------------------------------------
# Graph files
# ---------------------------------------------------------------------------


def emit_graph(g: Graph) -> str:
    out = [f"p {g.num_vertices} {g.num_edges}"]
    named = set()
    for u, v in sorted(g.edges, key=lambda e: (vkey(e[0]), vkey(e[1]))):
        out.append(f"{u} {v}")
        named.add(u)
        named.add(v)
    for v in sorted_vertices(g.vertices - named):
        out.append(f"{v}")
    return "\n".join(out) + "\n"


def parse_graph(text: str) -> Graph:
    """Edge-list format: ``p <n> <m>``, m edge lines, then isolated vertices."""
    it = _lines(text)
    try:
        lineno, parts = next(it)
    except StopIteration:
        raise FormatError("empty graph file") from None
    if len(parts) != 3 or parts[0] != "p":
        raise FormatError("expected header 'p <n> <m>'", lineno)
    try:
        n, m = int(parts[1]), int(parts[2])
    except ValueError:
        raise FormatError("non-integer counts in header", lineno) from None
    edges = []
    vertices = set()
    seen = set()
    for _ in range(m):
        try:
            lineno, parts = next(it)
        except StopIteration:
            raise FormatError(f"expected {m} edge lines, file ended early") from None
        if len(parts) != 2:
            raise FormatError("edge line must have exactly two vertex names", lineno)
        u, v = parts
        if u == v:
            raise FormatError(f"loop edge at {u!r}", lineno)
        e = edge_key(u, v)
        if e in seen:
            raise FormatError(f"duplicate edge {u} {v}", lineno)
        seen.add(e)
        edges.append(e)
        vertices.update(e)
    for lineno, parts in it:
        if len(parts) != 1:
            raise FormatError("expected a single isolated-vertex name", lineno)
        if parts[0] in vertices:
            raise FormatError(f"vertex {parts[0]!r} already declared", lineno)
        vertices.add(parts[0])
    if len(vertices) != n:
        raise FormatError(f"header declares {n} vertices, file defines {len(vertices)}")
    return Graph.build(vertices, edges)


# ---------------------------------------------------------------------------
# Tree decomposition files (PACE-style, with vertex names)
# ---------------------------------------------------------------------------


def emit_td(td: TreeDecomposition) -> str:
    out = [f"s td {len(td.bags)} {td.width + 1} "
           f"{len(set().union(*td.bags.values()) if td.bags else set())}"]
    for i in sorted(td.bags):
        members = " ".join(str(v) for v in sorted_vertices(td.bags[i]))
        out.append(f"b {i + 1} {members}".rstrip())
    for a, b in sorted(td.tree_edges):
        out.append(f"{a + 1} {b + 1}")
    return "\n".join(out) + "\n"


def parse_td(td_text: str) -> TreeDecomposition:
    """PACE-style: ``s td <bags> <width+1> <n>``, ``b <id> <names...>``, tree edges."""
    it = _lines(td_text)
    try:
        lineno, parts = next(it)
    except StopIteration:
        raise FormatError("empty tree-decomposition file") from None
    if len(parts) != 5 or parts[0] != "s" or parts[1] != "td":
        raise FormatError("expected header 's td <bags> <width+1> <n>'", lineno)
    try:
        nbags, width_plus, _ = int(parts[2]), int(parts[3]), int(parts[4])
    except ValueError:
        raise FormatError("non-integer counts in header", lineno) from None
    bags = {}
    edges = set()
    for lineno, parts in it:
        if parts[0] == "b":
            if len(parts) < 2:
                raise FormatError("bag line needs an id", lineno)
            try:
                bid = int(parts[1]) - 1
            except ValueError:
                raise FormatError("bag id must be an integer", lineno) from None
            if not (0 <= bid < nbags):
                raise FormatError(f"bag id {bid + 1} out of range 1..{nbags}", lineno)
            if bid in bags:
                raise FormatError(f"duplicate bag id {bid + 1}", lineno)
            bags[bid] = frozenset(parts[2:])
        else:
            if len(parts) != 2:
                raise FormatError("expected tree edge '<i> <j>'", lineno)
            try:
                a, b = int(parts[0]) - 1, int(parts[1]) - 1
            except ValueError:
                raise FormatError("tree edge ids must be integers", lineno) from None
            if not (0 <= a < nbags and 0 <= b < nbags):
                raise FormatError("tree edge references an unknown bag", lineno)
            edges.add((min(a, b), max(a, b)))
    if len(bags) != nbags:
        raise FormatError(f"header declares {nbags} bags, file defines {len(bags)}")
    td = TreeDecomposition(bags=bags, tree_edges=frozenset(edges))
    if td.width + 1 != width_plus:
        raise FormatError(f"header declares width {width_plus - 1}, bags give {td.width}")
    return td


# ---------------------------------------------------------------------------
# Clique-sum decomposition files
# ---------------------------------------------------------------------------

_KIND_TOKENS = {
    PieceKind.PLANAR_NO_SEP_TRIANGLE: "planar_nosep",
    PieceKind.COMPLETE: "complete",
    PieceKind.GENERIC: "generic",
}


def _kind_token(piece: Piece) -> str:
    if piece.kind == PieceKind.TREEWIDTH:
        return f"treewidth:{piece.treewidth}"
    return _KIND_TOKENS[piece.kind]


def _parse_kind(token: str, lineno: int):
    if token.startswith("treewidth:"):
        try:
            return PieceKind.TREEWIDTH, int(token.split(":", 1)[1])
        except ValueError:
            raise FormatError(f"bad treewidth tag {token!r}", lineno) from None
    for kind, tok in _KIND_TOKENS.items():
        if tok == token:
            return kind, None
    raise FormatError(f"unknown piece kind {token!r}", lineno)


def emit_decomposition(d: CliqueSumDecomposition) -> str:
    out = [f"s cliquesum {d.num_pieces}"]
    for j, piece in enumerate(d.pieces):
        g = piece.graph
        out.append(f"piece {j + 1} {_kind_token(piece)} {g.num_vertices} {g.num_edges}")
        named = set()
        for u, v in sorted(g.edges, key=lambda e: (vkey(e[0]), vkey(e[1]))):
            out.append(f"e {u} {v}")
            named.update((u, v))
        for v in sorted_vertices(g.vertices - named):
            out.append(f"i {v}")
    for j in sorted(d.parent):
        clique = " ".join(str(v) for v in sorted_vertices(d.parent_clique[j]))
        out.append(f"join {j + 1} {d.parent[j] + 1} {clique}")
    for j in sorted(d.deletions):
        for u, v in sorted(d.deletions[j], key=lambda e: (vkey(e[0]), vkey(e[1]))):
            out.append(f"del {j + 1} {u} {v}")
    return "\n".join(out) + "\n"


def parse_decomposition(text: str) -> CliqueSumDecomposition:
    it = _lines(text)
    try:
        lineno, parts = next(it)
    except StopIteration:
        raise FormatError("empty decomposition file") from None
    if len(parts) != 3 or parts[0] != "s" or parts[1] != "cliquesum":
        raise FormatError("expected header 's cliquesum <pieces>'", lineno)
    try:
        h = int(parts[2])
    except ValueError:
        raise FormatError("piece count must be an integer", lineno) from None
    pieces = [None] * h
    current = None
    vertices = None
    edges = None
    pending_edges = 0
    parent = {}
    clique = {}
    deletions = {}

    def finish(lineno):
        if current is None:
            return
        if pending_edges:
            raise FormatError(f"piece {current + 1} is missing {pending_edges} edge lines", lineno)
        pieces[current] = (vertices, edges)

    kinds = {}
    for lineno, parts in it:
        tag = parts[0]
        if tag == "piece":
            finish(lineno)
            if len(parts) != 5:
                raise FormatError("expected 'piece <id> <kind> <n> <m>'", lineno)
            try:
                idx = int(parts[1]) - 1
                n_p, m_p = int(parts[3]), int(parts[4])
            except ValueError:
                raise FormatError("piece counts must be integers", lineno) from None
            if not (0 <= idx < h) or pieces[idx] is not None:
                raise FormatError(f"bad or duplicate piece id {parts[1]}", lineno)
            kinds[idx] = _parse_kind(parts[2], lineno)
            current, vertices, edges, pending_edges = idx, set(), [], m_p
        elif tag == "e":
            if current is None or len(parts) != 3:
                raise FormatError("edge line outside a piece or malformed", lineno)
            if pending_edges == 0:
                raise FormatError("more edge lines than declared", lineno)
            u, v = parts[1], parts[2]
            edges.append((u, v))
            vertices.update((u, v))
            pending_edges -= 1
        elif tag == "i":
            if current is None or len(parts) != 2:
                raise FormatError("isolated-vertex line outside a piece or malformed", lineno)
            vertices.add(parts[1])
        elif tag == "join":
            finish(lineno)
            current = None
            if len(parts) < 4:
                raise FormatError("expected 'join <child> <parent> <names...>'", lineno)
            try:
                child, par = int(parts[1]) - 1, int(parts[2]) - 1
            except ValueError:
                raise FormatError("join ids must be integers", lineno) from None
            parent[child] = par
            clique[child] = frozenset(parts[3:])
        elif tag == "del":
            finish(lineno)
            current = None
            if len(parts) != 4:
                raise FormatError("expected 'del <child> <u> <v>'", lineno)
            try:
                child = int(parts[1]) - 1
            except ValueError:
                raise FormatError("deletion id must be an integer", lineno) from None
            deletions.setdefault(child, set()).add(edge_key(parts[2], parts[3]))
        else:
            raise FormatError(f"unknown record {tag!r}", lineno)
    finish(None)
    missing = [i + 1 for i in range(h) if pieces[i] is None]
    if missing:
        raise FormatError(f"pieces {missing} were never defined")
    built = []
    for idx in range(h):
        verts, eds = pieces[idx]
        kind, tw = kinds[idx]
        built.append(Piece(graph=Graph.build(verts, eds), kind=kind, treewidth=tw))
    return CliqueSumDecomposition(
        pieces=tuple(built), parent=parent, parent_clique=clique,
        deletions={j: frozenset(s) for j, s in deletions.items()})


# ---------------------------------------------------------------------------
# Drawing files
# ---------------------------------------------------------------------------


def _emit_rational(x) -> str:
    return f"{x.numerator}/{x.denominator}"


def _parse_rational(token: str, lineno: int):
    if "/" not in token:
        raise FormatError(f"rational {token!r} must be 'num/den'", lineno)
    num_s, den_s = token.split("/", 1)
    try:
        num, den = int(num_s), int(den_s)
    except ValueError:
        raise FormatError(f"non-integer rational {token!r}", lineno) from None
    if den <= 0:
        raise FormatError(f"rational {token!r} must have a positive denominator", lineno)
    import math
    if math.gcd(abs(num), den) != 1:
        raise FormatError(f"rational {token!r} is not in canonical reduced form", lineno)
    return rat(num, den)


def emit_drawing(d: Drawing, include_report: bool = True) -> str:
    out = [f"s drawing {d.graph.num_vertices} {d.graph.num_edges}"]
    for v in sorted_vertices(d.graph.vertices):
        p = d.positions[v]
        out.append(f"v {v} {_emit_rational(p.x)} {_emit_rational(p.y)}")
    for eid in sorted(d.graph.edges):
        u, v = d.graph.edges[eid]
        out.append(f"e {u} {v}")
    if include_report:
        out.append(f"x {count_crossings(d).total}")
    return "\n".join(out) + "\n"


def parse_drawing(text: str) -> Drawing:
    """Parse and re-verify: an embedded crossing record must match a recount."""
    it = _lines(text)
    try:
        lineno, parts = next(it)
    except StopIteration:
        raise FormatError("empty drawing file") from None
    if len(parts) != 4 or parts[0] != "s" or parts[1] != "drawing":
        raise FormatError("expected header 's drawing <n> <m>'", lineno)
    try:
        n, m = int(parts[2]), int(parts[3])
    except ValueError:
        raise FormatError("non-integer counts in header", lineno) from None
    positions = {}
    pairs = []
    claimed = None
    for lineno, parts in it:
        tag = parts[0]
        if tag == "v":
            if len(parts) != 4:
                raise FormatError("expected 'v <name> <x> <y>'", lineno)
            name = parts[1]
            if name in positions:
                raise FormatError(f"duplicate vertex {name!r}", lineno)
            positions[name] = Point(_parse_rational(parts[2], lineno),
                                    _parse_rational(parts[3], lineno))
        elif tag == "e":
            if len(parts) != 3:
                raise FormatError("expected 'e <u> <v>'", lineno)
            u, v = parts[1], parts[2]
            if u not in positions or v not in positions:
                raise FormatError(f"edge references missing vertex position", lineno)
            pairs.append((u, v))
        elif tag == "x":
            if len(parts) != 2:
                raise FormatError("expected 'x <total>'", lineno)
            try:
                claimed = int(parts[1])
            except ValueError:
                raise FormatError("crossing record must be an integer", lineno) from None
        else:
            raise FormatError(f"unknown record {tag!r}", lineno)
    if len(positions) != n:
        raise FormatError(f"header declares {n} vertices, file defines {len(positions)}")
    if len(pairs) != m:
        raise FormatError(f"header declares {m} edges, file defines {len(pairs)}")
    drawing = Drawing(Multigraph.build(positions.keys(), pairs), positions)
    if claimed is not None:
        actual = count_crossings(drawing).total
        if actual != claimed:
            raise TamperError(
                f"embedded crossing record claims {claimed}, recount gives {actual}")
    return drawing


# ---------------------------------------------------------------------------
# SVG rendering (lossy, non-authoritative)
# ---------------------------------------------------------------------------


def render_svg(d: Drawing, labels: bool = True, crossing_markers: bool = False,
               size: int = 640) -> str:
    """Deterministic SVG for a drawing; floats appear only here."""
    pts = list(d.positions.values())
    if pts:
        min_x = min(float(p.x) for p in pts)
        max_x = max(float(p.x) for p in pts)
        min_y = min(float(p.y) for p in pts)
        max_y = max(float(p.y) for p in pts)
    else:
        min_x = min_y = 0.0
        max_x = max_y = 1.0
    span = max(max_x - min_x, max_y - min_y, 1e-9)
    pad = 0.05 * span
    scale = size / (span + 2 * pad)

    def sx(x):
        return (float(x) - min_x + pad) * scale

    def sy(y):
        return size - (float(y) - min_y + pad) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    for eid in sorted(d.graph.edges):
        u, v = d.graph.edges[eid]
        pu, pv = d.positions[u], d.positions[v]
        out.append(f'  <line x1="{sx(pu.x):.4f}" y1="{sy(pu.y):.4f}" '
                   f'x2="{sx(pv.x):.4f}" y2="{sy(pv.y):.4f}" '
                   f'stroke="black" stroke-width="1"/>')
    if crossing_markers:
        report = count_crossings(d)
        seen = set()
        for e1, e2 in sorted(report.pairs):
            x = segment_intersection_point(d.segment(e1), d.segment(e2))
            if x is None or x in seen:
                continue
            seen.add(x)
            out.append(f'  <circle cx="{sx(x.x):.4f}" cy="{sy(x.y):.4f}" r="3" '
                       f'fill="none" stroke="red" stroke-width="1"/>')
    for v in sorted_vertices(d.graph.vertices):
        p = d.positions[v]
        out.append(f'  <circle cx="{sx(p.x):.4f}" cy="{sy(p.y):.4f}" r="2.5" fill="black"/>')
        if labels:
            out.append(f'  <text x="{sx(p.x) + 4:.4f}" y="{sy(p.y) - 4:.4f}" '
                       f'font-size="10">{v}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def report_to_json(report: BoundReport) -> str:
    payload = {
        "formula": report.formula,
        "num_vertices": report.num_vertices,
        "num_edges": report.num_edges,
        "max_degree": report.max_degree,
        "k": report.k,
        "c": report.c,
        "t": report.t,
        "guaranteed": report.guaranteed,
        "observed": report.observed.total,
        "case_split": dict(report.case_split),
        "piece_count": report.piece_count,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
