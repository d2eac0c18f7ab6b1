"""Tree decompositions and clique-sum decompositions: build, validate, convert.

The conversion to clique-sums of complete pieces goes through a perfect
elimination order of the decomposition's chordal completion, re-eliminating
the input graph along that order.  Every fill edge is then deletable inside
the join clique of the piece that created it, the adhesion never exceeds
the width, and no piece core is empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GraphError
from .graphs import (CliqueSumDecomposition, Graph, Piece, PieceKind, edge_key,
                     induced_subgraph, reconstruct, sorted_vertices, vkey)
from .planar import find_separating_triangles, planar_embedding, split_at_separating_triangle
from .errors import NotPlanarError


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags indexed by integer ids, connected by tree edges."""

    bags: Mapping[int, frozenset]
    tree_edges: frozenset

    def __post_init__(self):
        ids = set(self.bags)
        for a, b in self.tree_edges:
            if a not in ids or b not in ids:
                raise GraphError(f"tree edge ({a}, {b}) references an unknown bag")
            if a == b:
                raise GraphError("tree edge must join two distinct bags")
        if ids:
            adj = {i: set() for i in ids}
            for a, b in self.tree_edges:
                adj[a].add(b)
                adj[b].add(a)
            start = min(ids)
            seen = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if seen != ids:
                raise GraphError("tree decomposition tree is not connected")
            if len(self.tree_edges) != len(ids) - 1:
                raise GraphError("tree decomposition tree contains a cycle")

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def adhesion(self) -> int:
        return max((len(self.bags[a] & self.bags[b]) for a, b in self.tree_edges), default=0)


@dataclass(frozen=True)
class TDReport:
    ok: bool
    violations: tuple
    width: int
    adhesion: int


def validate_tree_decomposition(g: Graph, td: TreeDecomposition) -> TDReport:
    """Check both decomposition axioms; report width and adhesion."""
    violations = []
    covered = set()
    for bag in td.bags.values():
        covered |= bag
    for v in g.vertices - covered:
        violations.append(("vertex_uncovered", v))
    for (u, v) in g.edges:
        if not any({u, v} <= bag for bag in td.bags.values()):
            violations.append(("edge_uncovered", (u, v)))
    adj = {i: set() for i in td.bags}
    for a, b in td.tree_edges:
        adj[a].add(b)
        adj[b].add(a)
    for v in sorted_vertices(g.vertices & covered):
        trace = {i for i, bag in td.bags.items() if v in bag}
        if not trace:
            continue
        start = min(trace)
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in trace and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != trace:
            violations.append(("trace_disconnected", v))
    return TDReport(ok=not violations, violations=tuple(violations),
                    width=td.width, adhesion=td.adhesion())


def greedy_tree_decomposition(g: Graph) -> TreeDecomposition:
    """Min-fill elimination heuristic; valid but not necessarily optimal."""
    adj = {v: set(ns) for v, ns in g.adjacency().items()}
    order = []
    nplus = {}
    while adj:
        best = None
        best_fill = None
        for v in adj:
            ns = adj[v]
            fill = 0
            nl = sorted_vertices(ns)
            for i, x in enumerate(nl):
                for y in nl[i + 1:]:
                    if y not in adj[x]:
                        fill += 1
            if best is None or (fill, vkey(v)) < (best_fill, vkey(best)):
                best, best_fill = v, fill
        ns = sorted_vertices(adj[best])
        for i, x in enumerate(ns):
            for y in ns[i + 1:]:
                adj[x].add(y)
                adj[y].add(x)
        for x in ns:
            adj[x].discard(best)
        nplus[best] = frozenset(ns)
        order.append(best)
        del adj[best]

    index = {v: i for i, v in enumerate(order)}
    bags = {i: frozenset({v}) | nplus[v] for i, v in enumerate(order)}
    edges = set()
    roots = []
    for i, v in enumerate(order):
        if nplus[v]:
            w = min(nplus[v], key=lambda u: index[u])
            edges.add((i, index[w]))
        else:
            roots.append(i)
    for a, b in zip(roots, roots[1:]):
        edges.add((a, b))
    return TreeDecomposition(bags=bags, tree_edges=frozenset(edges))


# ---------------------------------------------------------------------------
# Tree decomposition -> clique-sums of complete pieces
# ---------------------------------------------------------------------------


def _chordal_peo(h_adj: dict) -> list:
    """Perfect elimination order of a chordal graph, smallest vertex first."""
    adj = {v: set(ns) for v, ns in h_adj.items()}
    order = []
    while adj:
        pick = None
        for v in sorted_vertices(adj):
            ns = sorted_vertices(adj[v])
            simplicial = all(y in adj[x] for i, x in enumerate(ns) for y in ns[i + 1:])
            if simplicial:
                pick = v
                break
        if pick is None:
            raise GraphError("internal: completion of a tree decomposition must be chordal")
        for x in adj[pick]:
            adj[x].discard(pick)
        del adj[pick]
        order.append(pick)
    return order


def _eliminate_along(g: Graph, order: list):
    """Eliminate g along ``order``; yields (v, higher-neighbours, fills created)."""
    adj = {v: set(ns) for v, ns in g.adjacency().items()}
    info = []
    for v in order:
        ns = sorted_vertices(adj[v])
        fills = []
        for i, x in enumerate(ns):
            for y in ns[i + 1:]:
                if y not in adj[x]:
                    adj[x].add(y)
                    adj[y].add(x)
                    fills.append(edge_key(x, y))
        for x in ns:
            adj[x].discard(v)
        info.append((v, frozenset(ns), tuple(fills)))
        del adj[v]
    return info


def _assemble(nodes: dict, parent: dict, fills: list, g: Graph):
    """Renumber a bag forest into a CliqueSumDecomposition with deletions assigned.

    Returns None when some fill pair fits inside no join clique (callers
    then retry without pruning).
    """
    children = {i: [] for i in nodes}
    roots = []
    for i in nodes:
        if parent.get(i) is None:
            roots.append(i)
        else:
            children[parent[i]].append(i)

    def bagkey(i):
        return [vkey(v) for v in sorted_vertices(nodes[i][0])]

    new_index = {}
    pieces = []
    new_parent = {}
    new_clique = {}
    for root in sorted(roots, key=bagkey):
        stack = [root]
        while stack:
            i = stack.pop()
            idx = len(pieces)
            new_index[i] = idx
            bag, join = nodes[i]
            pieces.append(Piece(graph=_complete(bag), kind=PieceKind.COMPLETE))
            if parent.get(i) is not None:
                new_parent[idx] = new_index[parent[i]]
                new_clique[idx] = frozenset(join)
            for c in sorted(children[i], key=bagkey, reverse=True):
                stack.append(c)

    joins = sorted(new_parent)
    deletions = {}
    for pair in fills:
        assigned = False
        for j in joins:
            if set(pair) <= new_clique[j]:
                deletions.setdefault(j, set()).add(pair)
                assigned = True
                break
        if not assigned:
            return None
    decomposition = CliqueSumDecomposition(
        pieces=tuple(pieces),
        parent=new_parent,
        parent_clique=new_clique,
        deletions={j: frozenset(s) for j, s in deletions.items()},
    )
    rebuilt = reconstruct(decomposition)
    if rebuilt.vertices != g.vertices or rebuilt.edges != g.edges:
        return None
    return decomposition


def _complete(vs) -> Graph:
    vs = sorted_vertices(vs)
    return Graph.build(vs, [(a, b) for i, a in enumerate(vs) for b in vs[i + 1:]])


def treedecomp_to_cliquesums(g: Graph, td: TreeDecomposition) -> CliqueSumDecomposition:
    """One complete piece per (pruned) elimination bag; reconstructs g exactly."""
    if g.num_vertices == 0:
        raise GraphError("the empty graph admits no clique-sum decomposition")
    report = validate_tree_decomposition(g, td)
    if not report.ok:
        raise GraphError(f"invalid tree decomposition: {report.violations[:3]!r}")

    h_adj = {v: set() for v in g.vertices}
    for bag in td.bags.values():
        bl = sorted_vertices(bag)
        for i, x in enumerate(bl):
            for y in bl[i + 1:]:
                h_adj[x].add(y)
                h_adj[y].add(x)
    order = _chordal_peo(h_adj)
    info = _eliminate_along(g, order)

    position = {v: i for i, (v, _, _) in enumerate(info)}
    nodes = {}
    parent = {}
    fills = []
    for i, (v, ns, fl) in enumerate(info):
        nodes[i] = (frozenset({v}) | ns, frozenset(ns))
        if ns:
            parent[i] = position[min(ns, key=lambda u: position[u])]
        else:
            parent[i] = None
        fills.extend(fl)

    if max(len(bag) for bag, _ in nodes.values()) - 1 > max(report.width, 0):
        raise GraphError("internal: elimination width exceeded the decomposition width")

    pruned_nodes = {i: nodes[i] for i in nodes}
    pruned_parent = dict(parent)
    changed = True
    while changed:
        changed = False
        for i in sorted(pruned_nodes):
            p = pruned_parent.get(i)
            if p is None:
                continue
            bag_i = pruned_nodes[i][0]
            bag_p = pruned_nodes[p][0]
            if bag_i <= bag_p:
                for c in list(pruned_nodes):
                    if pruned_parent.get(c) == i:
                        pruned_parent[c] = p
                del pruned_nodes[i]
                del pruned_parent[i]
                changed = True
                break
            if bag_p <= bag_i:
                grand = pruned_parent.get(p)
                join_p = pruned_nodes[p][1]
                for c in list(pruned_nodes):
                    if pruned_parent.get(c) == p and c != i:
                        pruned_parent[c] = i
                pruned_nodes[i] = (bag_i, join_p if grand is not None else frozenset())
                pruned_parent[i] = grand
                del pruned_nodes[p]
                del pruned_parent[p]
                changed = True
                break

    result = _assemble(pruned_nodes, pruned_parent, fills, g)
    if result is None:
        result = _assemble(nodes, parent, fills, g)
    if result is None:
        raise GraphError("internal: clique-sum conversion failed to reconstruct the graph")
    return result


# ---------------------------------------------------------------------------
# Normalization and validation of clique-sum decompositions
# ---------------------------------------------------------------------------


def normalize_planar_pieces(d: CliqueSumDecomposition) -> CliqueSumDecomposition:
    """Split planar-tagged pieces at separating triangles until none remain."""
    nodes = []
    for j, piece in enumerate(d.pieces):
        nodes.append({
            "graph": piece.graph, "kind": piece.kind, "tw": piece.treewidth,
            "parent": d.parent.get(j), "clique": d.parent_clique.get(j, frozenset()),
            "deletions": d.deletions.get(j, frozenset()),
            "certificate": d.certificates.get(j) if d.certificates else None,
        })

    queue = [i for i, nd in enumerate(nodes) if nd["kind"] == PieceKind.PLANAR_NO_SEP_TRIANGLE]
    while queue:
        i = queue.pop(0)
        g = nodes[i]["graph"]
        try:
            tris = find_separating_triangles(g)
        except NotPlanarError as exc:
            raise GraphError(f"piece {i} tagged planar is not planar") from exc
        if not tris:
            continue
        tri = tris[0]
        g1, g2 = split_at_separating_triangle(g, tri)
        pclique = nodes[i]["clique"]
        keep, other = (g1, g2) if pclique <= g1.vertices else (g2, g1)
        for c, nd in enumerate(nodes):
            if nd["parent"] == i and not nd["clique"] <= keep.vertices:
                nd["parent"] = len(nodes)
        nodes[i]["graph"] = keep
        nodes.append({
            "graph": other, "kind": PieceKind.PLANAR_NO_SEP_TRIANGLE, "tw": None,
            "parent": i, "clique": frozenset(tri), "deletions": frozenset(),
            "certificate": None,
        })
        queue.append(i)
        queue.append(len(nodes) - 1)

    children = {i: [] for i in range(len(nodes))}
    roots = []
    for i, nd in enumerate(nodes):
        if nd["parent"] is None:
            roots.append(i)
        else:
            children[nd["parent"]].append(i)
    new_index = {}
    ordered = []
    for root in roots:
        stack = [root]
        while stack:
            i = stack.pop()
            new_index[i] = len(ordered)
            ordered.append(i)
            for c in reversed(children[i]):
                stack.append(c)

    pieces = tuple(Piece(graph=nodes[i]["graph"], kind=nodes[i]["kind"], treewidth=nodes[i]["tw"])
                   for i in ordered)
    parent = {}
    clique = {}
    deletions = {}
    certificates = {}
    for i in ordered:
        idx = new_index[i]
        nd = nodes[i]
        if nd["parent"] is not None:
            parent[idx] = new_index[nd["parent"]]
            clique[idx] = nd["clique"]
            if nd["deletions"]:
                deletions[idx] = nd["deletions"]
        if nd["certificate"] is not None:
            certificates[idx] = nd["certificate"]
    out = CliqueSumDecomposition(pieces=pieces, parent=parent, parent_clique=clique,
                                 deletions=deletions, certificates=certificates)
    before = reconstruct(d)
    after = reconstruct(out)
    if before.vertices != after.vertices or before.edges != after.edges:
        raise GraphError("internal: normalization changed the reconstructed graph")
    return out


def treewidth_at_most(g: Graph, t: int, node_budget: int = 200_000):
    """Exact decision 'treewidth <= t' by elimination search.

    Returns True/False, or None when the search budget is exhausted
    (callers should then require a certificate decomposition).
    """
    if t < 0:
        return g.num_vertices == 0
    adj0 = {v: frozenset(ns) for v, ns in g.adjacency().items()}
    memo = {}
    budget = [node_budget]

    def reduce_and_check(adj):
        adj = {v: set(ns) for v, ns in adj.items()}
        changed = True
        while changed:
            changed = False
            for v in list(adj):
                ns = adj[v]
                if len(ns) > t:
                    continue
                nl = sorted_vertices(ns)
                if all(y in adj[x] for i, x in enumerate(nl) for y in nl[i + 1:]):
                    for x in ns:
                        adj[x].discard(v)
                    del adj[v]
                    changed = True
        return adj

    def search(adj):
        if len(adj) <= t + 1:
            return True
        key = frozenset(adj)
        if key in memo:
            return memo[key]
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        if min(len(ns) for ns in adj.values()) > t:
            memo[key] = False
            return False
        result = False
        for v in sorted_vertices(adj):
            if len(adj[v]) > t:
                continue
            nxt = {u: set(ns) for u, ns in adj.items()}
            nl = sorted_vertices(nxt[v])
            for i, x in enumerate(nl):
                for y in nl[i + 1:]:
                    nxt[x].add(y)
                    nxt[y].add(x)
            for x in nl:
                nxt[x].discard(v)
            del nxt[v]
            sub = search(reduce_and_check(nxt))
            if sub is None:
                memo.pop(key, None)
                return None
            if sub:
                result = True
                break
        memo[key] = result
        return result

    return search(reduce_and_check(adj0))


@dataclass(frozen=True)
class DecompositionReport:
    ok: bool
    violations: tuple
    adhesion: int
    max_treewidth_tag: int


def validate_decomposition(d: CliqueSumDecomposition, g: Graph, k: int, t: int) -> DecompositionReport:
    """Verify reconstruction, adhesion and every piece's kind claim."""
    violations = []
    rebuilt = reconstruct(d)
    if rebuilt.vertices != g.vertices:
        violations.append(("vertices_mismatch", None))
    if rebuilt.edges != g.edges:
        violations.append(("edges_mismatch", None))
    adhesion = max((len(c) for c in d.parent_clique.values()), default=0)
    if adhesion > k:
        violations.append(("adhesion_exceeded", adhesion))
    max_tw = 0
    for j, piece in enumerate(d.pieces):
        pg = piece.graph
        if j in d.parent and not (d.parent_clique[j] < pg.vertices):
            violations.append(("empty_core", j))
        if piece.kind == PieceKind.PLANAR_NO_SEP_TRIANGLE:
            try:
                tris = find_separating_triangles(pg)
                if tris:
                    violations.append(("separating_triangle_in_clean_piece", (j, tris[0])))
            except NotPlanarError:
                violations.append(("non_planar_piece", j))
        elif piece.kind == PieceKind.COMPLETE:
            n = pg.num_vertices
            if pg.num_edges != n * (n - 1) // 2:
                violations.append(("not_complete", j))
        elif piece.kind == PieceKind.TREEWIDTH:
            tag = piece.treewidth if piece.treewidth is not None else t
            max_tw = max(max_tw, tag)
            if tag > t:
                violations.append(("treewidth_tag_exceeds_t", (j, tag)))
            cert = d.certificates.get(j) if d.certificates else None
            if cert is not None:
                rep = validate_tree_decomposition(pg, cert)
                if not rep.ok or rep.width > tag:
                    violations.append(("bad_certificate", j))
            elif t <= 4:
                verdict = treewidth_at_most(pg, tag)
                if verdict is False:
                    violations.append(("treewidth_exceeded", j))
                elif verdict is None:
                    violations.append(("treewidth_unverifiable", j))
            else:
                violations.append(("certificate_required", j))
    return DecompositionReport(ok=not violations, violations=tuple(violations),
                               adhesion=adhesion, max_treewidth_tag=max_tw)
