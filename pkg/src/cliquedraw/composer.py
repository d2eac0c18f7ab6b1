"""Clique-sum composition of certified piece drawings.

Each piece of a rooted decomposition, minus its parent clique, is blown up
with one dummy vertex per child; cross-piece edges become labelled isthmus
edges attached to the dummies, carrying the identity of the final edge they
represent.  Pieces are drawn by the partition machinery, then joined in
index order by replacing each dummy with a rigidly shrunken copy of its
subtree's drawing inside a safe disk.  The observed crossing total is
compared against the certified bound on every run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .decomposition import (TreeDecomposition, greedy_tree_decomposition,
                            treedecomp_to_cliquesums, normalize_planar_pieces,
                            validate_decomposition, validate_tree_decomposition)
from .errors import BoundViolationError, GraphError, StructuralMismatchError
from .geometry import (CrossingReport, Drawing, count_crossings, embed_in_disk,
                       is_general_position, perturb_general_position, rat,
                       safe_disk_radius)
from .graphs import (CliqueSumDecomposition, Graph, Multigraph, Piece, PieceKind,
                     SimplicialBlowup, VertexId, edge_key, induced_subgraph,
                     make_blowup, reconstruct, sorted_vertices, vkey)
from .hpartition import HPartitionBounds, draw_blowup_planar, draw_blowup_two_bag


@dataclass(frozen=True)
class DummyVertex:
    """Placeholder vertex standing in for an unjoined child piece."""

    scope: str
    index: int


@dataclass(frozen=True)
class IsthmusLabel:
    """Identity of the final edge an isthmus edge represents.

    ``anchor`` lives in the home piece's core, ``target`` deeper in the
    child subtree; ``path`` lists the piece indices from home to the
    target's owner (consulted only for diagnostics and classification).
    """

    anchor: VertexId
    target: VertexId
    path: tuple


@dataclass(frozen=True)
class PieceTree:
    parent: Mapping[int, int]
    children: Mapping[int, tuple]
    roots: tuple
    subtree: Mapping[int, frozenset]
    owner: Mapping[VertexId, int]
    cores: Mapping[int, frozenset]

    def tree_path(self, i: int, p: int) -> tuple:
        """Piece indices from ancestor i down to descendant p."""
        path = [p]
        while path[-1] != i:
            path.append(self.parent[path[-1]])
        return tuple(reversed(path))


def root_and_order(d: CliqueSumDecomposition) -> PieceTree:
    """Rooted piece forest with subtree and vertex-ownership accessors."""
    h = d.num_pieces
    children = {i: [] for i in range(h)}
    for j in sorted(d.parent):
        children[d.parent[j]].append(j)
    roots = tuple(j for j in range(h) if j not in d.parent)
    cores = {}
    owner = {}
    for j in range(h):
        core = d.pieces[j].graph.vertices - d.parent_clique.get(j, frozenset())
        if not core:
            raise GraphError(f"piece {j} has an empty core (bag contained in its parent clique)")
        cores[j] = frozenset(core)
        for v in core:
            owner[v] = j
    subtree = {}
    for j in range(h - 1, -1, -1):
        acc = {j}
        for c in children[j]:
            acc |= subtree[c]
        subtree[j] = frozenset(acc)
    return PieceTree(parent=dict(d.parent), children={i: tuple(c) for i, c in children.items()},
                     roots=roots, subtree=subtree, owner=owner, cores=cores)


@dataclass(frozen=True)
class PieceBlowup:
    """A piece core augmented with dummy vertices and labelled isthmus edges.

    ``multigraph`` carries the global edge ids of the final graph: core
    edges keep their id, and each cross edge appears as one isthmus edge
    (anchor, dummy) under its own final id.
    """

    index: int
    core: Graph
    multigraph: Multigraph
    dummies: Mapping[int, DummyVertex]
    labels: Mapping[int, IsthmusLabel]
    blowup: SimplicialBlowup


def build_piece_blowups(gm: Multigraph, d: CliqueSumDecomposition, tree: PieceTree,
                        scope: str = "cs") -> list:
    """Construct every piece blowup; validates edge conservation en route."""
    simple = gm.simple()
    ancestors = {}
    for j in range(d.num_pieces):
        chain = {j}
        x = j
        while x in tree.parent:
            x = tree.parent[x]
            chain.add(x)
        ancestors[j] = chain

    core_edges = {i: [] for i in range(d.num_pieces)}
    isthmus = {i: [] for i in range(d.num_pieces)}
    for eid in sorted(gm.edges):
        u, v = gm.edges[eid]
        iu, iv = tree.owner[u], tree.owner[v]
        if iu == iv:
            core_edges[iu].append(eid)
            continue
        if iv in ancestors[iu]:
            anchor, target, home, deep = v, u, iv, iu
        elif iu in ancestors[iv]:
            anchor, target, home, deep = u, v, iu, iv
        else:
            raise GraphError(f"edge {eid} spans unrelated pieces {iu} and {iv}")
        isthmus[home].append((eid, anchor, target, deep))

    out = []
    for i in range(d.num_pieces):
        piece_graph = d.pieces[i].graph
        pclique = d.parent_clique.get(i, frozenset())
        core = induced_subgraph(piece_graph, piece_graph.vertices - pclique)
        for eid in core_edges[i]:
            if gm.edges[eid] not in core.edges:
                raise GraphError(f"edge {eid} not present in its owning piece {i}")
        dummies = {j: DummyVertex(scope, j) for j in tree.children[i]}
        edges = {}
        labels = {}
        for eid in core_edges[i]:
            edges[eid] = gm.edges[eid]
        attachments = {j: {} for j in tree.children[i]}
        for eid, anchor, target, deep in isthmus[i]:
            j = next(c for c in tree.children[i] if deep in tree.subtree[c])
            if anchor not in d.parent_clique.get(j, frozenset()):
                raise GraphError(f"isthmus anchor {anchor!r} of edge {eid} not in child clique P_{j}")
            dummy = dummies[j]
            edges[eid] = tuple(sorted((anchor, dummy), key=vkey))
            labels[eid] = IsthmusLabel(anchor=anchor, target=target,
                                       path=tree.tree_path(i, deep))
            attachments[j][anchor] = attachments[j].get(anchor, 0) + 1
        mg = Multigraph(frozenset(core.vertices | set(dummies.values())), edges)
        deleted = frozenset(e for e in core.edges if e not in simple.edges)
        involved = [d.parent_clique.get(j, frozenset()) & core.vertices
                    for j in tree.children[i]]
        blowup = make_blowup(core, {dummies[j]: att for j, att in attachments.items()},
                             deletions=deleted, involved_cliques=involved,
                             k=max((len(att) for att in attachments.values()), default=0))
        out.append(PieceBlowup(index=i, core=core, multigraph=mg,
                               dummies=dummies, labels=labels, blowup=blowup))

    if sum(b.multigraph.num_edges for b in out) != gm.num_edges:
        raise GraphError("internal: piece blowups do not conserve the edge count")
    return out


def verify_degree_claim(blowups: list, k: int, delta_g: int) -> list:
    """Check deg <= k*Delta(G) for every vertex of every piece blowup."""
    violations = []
    for b in blowups:
        for v in b.multigraph.vertices:
            deg = b.multigraph.degree(v)
            if deg > k * delta_g:
                violations.append((b.index, v, deg))
    return violations


@dataclass(frozen=True)
class BoundReport:
    """Certified bound next to the observed count, with the charge split."""

    num_vertices: int
    num_edges: int
    max_degree: int
    k: int
    c: int
    t: int | None
    formula: str
    guaranteed: int
    observed: CrossingReport
    case_split: Mapping[str, int]
    piece_count: int

    def check(self) -> None:
        if self.observed.total > self.guaranteed:
            raise BoundViolationError(
                f"observed {self.observed.total} crossings exceed the certified "
                f"bound {self.guaranteed} ({self.formula})")


def draw_piece(b: PieceBlowup, kind: PieceKind, *, t: int | None = None,
               certificate: TreeDecomposition | None = None, seed=0):
    """Draw one piece blowup under its kind's guarantee; returns (drawing, c)."""
    k_mg = b.multigraph
    added = frozenset(b.dummies.values())
    if kind == PieceKind.PLANAR_NO_SEP_TRIANGLE:
        drawing, bounds = draw_blowup_planar(b.core, k_mg, added, seed=seed)
        return drawing, 3
    if kind in (PieceKind.COMPLETE, PieceKind.GENERIC):
        drawing, bounds = draw_blowup_two_bag(b.core.vertices, k_mg, added, seed=seed)
        return drawing, max(b.core.num_vertices - 1, 0)
    if kind == PieceKind.TREEWIDTH:
        if t is None:
            raise GraphError("treewidth piece needs its width tag")
        drawing, report = _draw_treewidth_blowup(b, t, certificate, seed)
        return drawing, t * (t + 2)
    raise GraphError(f"unknown piece kind {kind!r}")


def _blowup_tree_decomposition(b: PieceBlowup, t: int,
                               certificate: TreeDecomposition | None) -> TreeDecomposition:
    """Width-<=t decomposition of the blown-up piece (core plus dummies)."""
    simple = b.multigraph.simple()
    if certificate is not None:
        keep = set(b.core.vertices)
        bags = {i: bag & frozenset(keep) for i, bag in certificate.bags.items()}
        td = TreeDecomposition(bags=bags, tree_edges=certificate.tree_edges)
    else:
        td = greedy_tree_decomposition(b.core)
    if td.width > t:
        raise StructuralMismatchError(
            f"piece {b.index}: no width-{t} decomposition of the core available "
            f"(got width {td.width}); supply a certificate")
    bags = dict(td.bags)
    edges = set(td.tree_edges)
    next_id = max(bags, default=-1) + 1
    for j in sorted(b.dummies):
        dummy = b.dummies[j]
        clique = frozenset(simple.adjacency().get(dummy, set()))
        host = None
        for i in sorted(bags):
            if clique <= bags[i]:
                host = i
                break
        if host is None:
            raise GraphError(f"internal: attachment clique of dummy {j} fits no bag")
        bags[next_id] = clique | {dummy}
        edges.add((host, next_id))
        next_id += 1
    return TreeDecomposition(bags=bags, tree_edges=frozenset(edges))


def _draw_treewidth_blowup(b: PieceBlowup, t: int,
                           certificate: TreeDecomposition | None, seed):
    """A blowup of a width-<=t core has width <=t itself; recurse through
    clique-sums of complete pieces."""
    td = _blowup_tree_decomposition(b, t, certificate)
    rep = validate_tree_decomposition(b.multigraph.simple(), td)
    if not rep.ok:
        raise GraphError(f"internal: derived blowup decomposition invalid: {rep.violations[:3]!r}")
    inner = treedecomp_to_cliquesums(b.multigraph.simple(), td)
    return compose(b.multigraph, inner, k=max(t, 1), c=max(t, 1),
                   formula="treewidth piece", seed=f"{seed}/tw{b.index}")


def replace_dummy(outer: Drawing, dummy: VertexId, inner: Drawing,
                  retarget: Mapping[int, VertexId], full_check: bool = False) -> Drawing:
    """Swap a dummy vertex for a shrunken copy of its subtree's drawing.

    ``retarget`` maps every dummy-incident edge id to its new endpoint
    inside ``inner`` (the real target when it is already drawn, else the
    dummy representing the deeper subtree).
    """
    if dummy not in outer.graph.vertices:
        raise GraphError(f"dummy {dummy!r} not present in the drawing")
    incident = {eid for eid, pair in outer.graph.edges.items() if dummy in pair}
    if set(retarget) != incident:
        raise GraphError("retarget map must cover exactly the dummy-incident edges")
    if set(outer.graph.edges) & set(inner.graph.edges):
        raise GraphError("outer and inner drawings share edge ids")
    for eid, tgt in retarget.items():
        if tgt not in inner.graph.vertices:
            raise GraphError(f"edge {eid} retargets to {tgt!r} outside the inner drawing")

    disk = safe_disk_radius(outer, dummy)
    ctx_vertices = outer.graph.vertices - {dummy}
    ctx_edges = {eid: pair for eid, pair in outer.graph.edges.items() if eid not in incident}
    ctx = Drawing(Multigraph(frozenset(ctx_vertices), ctx_edges),
                  {v: p for v, p in outer.positions.items() if v != dummy})
    placed = embed_in_disk(inner, disk, context=ctx, full_check=full_check)

    edges = dict(ctx_edges)
    for eid in sorted(inner.graph.edges):
        edges[eid] = inner.graph.edges[eid]
    for eid in sorted(incident):
        u, v = outer.graph.edges[eid]
        anchor = v if u == dummy else u
        edges[eid] = tuple(sorted((anchor, retarget[eid]), key=vkey))
    positions = dict(ctx.positions)
    positions.update(placed.positions)
    return Drawing(Multigraph(frozenset(ctx_vertices | set(inner.graph.vertices)), edges),
                   positions)


def _classify(pairs, blowups, tree):
    """Assign every crossing pair to one proof case; count charges."""
    home = {}
    for b in blowups:
        for eid in b.multigraph.edges:
            lbl = b.labels.get(eid)
            if lbl is None:
                home[eid] = ("core", b.index, None)
            else:
                home[eid] = ("isthmus", b.index, lbl.path[1] if len(lbl.path) > 1 else None)

    split = {"initial_core": 0, "case1": 0, "case2a": 0, "case2b": 0,
             "case3": 0, "case4": 0, "unexplained": 0}
    sibling_charge = {}
    inner_charge = {}

    for (e1, e2) in sorted(pairs):
        k1, i1, j1 = home[e1]
        k2, i2, j2 = home[e2]
        if k1 == "core" and k2 == "core":
            split["initial_core" if i1 == i2 else "unexplained"] += 1
            continue
        if k1 == "core":
            (e1, k1, i1, j1), (e2, k2, i2, j2) = (e2, k2, i2, j2), (e1, k1, i1, j1)
        # e1 is isthmus at home i1 entering subtree j1
        if k2 == "core":
            if i2 == i1:
                split["case1"] += 1
            elif j1 is not None and i2 in tree.subtree[j1]:
                split["case3"] += 1
                inner_charge[e2] = inner_charge.get(e2, 0) + 1
            else:
                split["unexplained"] += 1
            continue
        if i1 == i2:
            if j1 == j2:
                split["case2b"] += 1
                sibling_charge[e1] = sibling_charge.get(e1, 0) + 1
                sibling_charge[e2] = sibling_charge.get(e2, 0) + 1
            else:
                split["case2a"] += 1
            continue
        if j1 is not None and i2 in tree.subtree[j1]:
            split["case4"] += 1
            inner_charge[e2] = inner_charge.get(e2, 0) + 1
        elif j2 is not None and i1 in tree.subtree[j2]:
            split["case4"] += 1
            inner_charge[e1] = inner_charge.get(e1, 0) + 1
        else:
            split["unexplained"] += 1
    return split, sibling_charge, inner_charge


def compose(g, d: CliqueSumDecomposition, *, k: int, c: int | None = None,
            formula: str = "clique-sum", t: int | None = None,
            seed=0, verify: bool = True):
    """Join certified piece drawings into a drawing of the whole graph.

    Returns (drawing, report) with report.guaranteed = k*(c+2)*Delta*m.
    In verify mode the underlying graph, the degree claim, the charge
    accounting and the final bound are all checked; violations raise.
    """
    gm = g.to_multigraph() if isinstance(g, Graph) else g
    simple = gm.simple()
    rebuilt = reconstruct(d)
    if rebuilt.vertices != simple.vertices or rebuilt.edges != simple.edges:
        raise GraphError("decomposition does not reconstruct the input graph")

    tree = root_and_order(d)
    scope = f"{seed}"
    blowups = build_piece_blowups(gm, d, tree, scope=scope)
    delta = gm.max_degree()
    bad = verify_degree_claim(blowups, k, delta)
    if bad:
        raise BoundViolationError(f"degree claim violated: {bad[:3]!r}")

    piece_c = {}
    drawings = {}
    for b in blowups:
        piece = d.pieces[b.index]
        t_i = piece.treewidth if piece.treewidth is not None else t
        cert = d.certificates.get(b.index) if d.certificates else None
        drawings[b.index], piece_c[b.index] = draw_piece(
            b, piece.kind, t=t_i, certificate=cert, seed=f"{seed}/piece/{b.index}")
    worst_c = max(piece_c.values(), default=0)
    if c is None:
        c_eff = worst_c
    else:
        if worst_c > c:
            raise GraphError(f"piece agreeability constants up to {worst_c} exceed the requested c={c}")
        c_eff = c

    per_root = {}
    for r in tree.roots:
        per_root[r] = drawings[r]
    root_of = {}
    for r in tree.roots:
        for j in tree.subtree[r]:
            root_of[j] = r

    all_labels = {}
    for b in blowups:
        all_labels.update(b.labels)

    for j in range(d.num_pieces):
        if j in tree.roots:
            continue
        r = root_of[j]
        running = per_root[r]
        dummy = blowups[tree.parent[j]].dummies[j]
        retarget = {}
        for eid in sorted(running.graph.edges):
            if dummy not in running.graph.edges[eid]:
                continue
            lbl = all_labels[eid]
            if tree.owner[lbl.target] == j:
                retarget[eid] = lbl.target
            else:
                step = lbl.path[lbl.path.index(j) + 1]
                retarget[eid] = blowups[j].dummies[step]
        per_root[r] = replace_dummy(running, dummy, drawings[j], retarget)

    final = _merge_strips([per_root[r] for r in tree.roots])

    if final.graph.vertices != gm.vertices or dict(final.graph.edges) != dict(gm.edges):
        raise GraphError("internal: composed drawing does not match the input graph")

    ok, _ = is_general_position(final)
    if not ok:
        final = perturb_general_position(final, seed=f"{seed}/final")

    observed = count_crossings(final)
    split, sibling_charge, inner_charge = _classify(observed.pairs, blowups, tree)
    guaranteed = k * (c_eff + 2) * delta * gm.num_edges
    report = BoundReport(num_vertices=gm.num_vertices, num_edges=gm.num_edges,
                         max_degree=delta, k=k, c=c_eff, t=t, formula=formula,
                         guaranteed=guaranteed, observed=observed,
                         case_split=split, piece_count=d.num_pieces)
    if verify:
        if split["unexplained"]:
            raise BoundViolationError(f"{split['unexplained']} crossing pairs fit no proof case")
        new_total = split["case2b"] + split["case3"] + split["case4"]
        if new_total > 2 * k * delta * gm.num_edges:
            raise BoundViolationError("new crossings exceed the 2*k*Delta*m charge budget")
        cap = k * delta
        worst_sibling = max(sibling_charge.values(), default=0)
        worst_inner = max(inner_charge.values(), default=0)
        if worst_sibling > cap or worst_inner > cap:
            raise BoundViolationError("a single edge is charged more than k*Delta new crossings")
        report.check()
    return final, report


def _merge_strips(parts: list) -> Drawing:
    """Disjoint drawings stacked in horizontal strips with unit margins."""
    if len(parts) == 1:
        return parts[0]
    edges = {}
    positions = {}
    vertices = set()
    y_off = rat(0)
    for part in parts:
        xs = [p.x for p in part.positions.values()] or [rat(0)]
        ys = [p.y for p in part.positions.values()] or [rat(0)]
        shifted = part.translated(-min(xs), y_off - min(ys))
        y_off += (max(ys) - min(ys)) + 1
        vertices |= set(shifted.graph.vertices)
        for eid in sorted(shifted.graph.edges):
            if eid in edges:
                raise GraphError("internal: strip drawings share edge ids")
            edges[eid] = shifted.graph.edges[eid]
        positions.update(shifted.positions)
    return Drawing(Multigraph(frozenset(vertices), edges), positions)


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------


def _empty_report(formula: str, k: int, c: int, t=None) -> BoundReport:
    empty = CrossingReport(total=0, per_edge={}, pairs=frozenset())
    return BoundReport(num_vertices=0, num_edges=0, max_degree=0, k=k, c=c, t=t,
                       formula=formula, guaranteed=0, observed=empty,
                       case_split={}, piece_count=0)


def draw_treewidth(g, td: TreeDecomposition, *, seed=0, verify: bool = True):
    """Draw a graph from a width-k tree decomposition within k*(k+2)*Delta*m."""
    gm = g.to_multigraph() if isinstance(g, Graph) else g
    simple = gm.simple()
    if gm.num_vertices == 0:
        return Drawing(gm, {}), _empty_report("treewidth k(k+2)*Delta*m", 1, 1)
    rep = validate_tree_decomposition(simple, td)
    if not rep.ok:
        raise GraphError(f"invalid tree decomposition: {rep.violations[:3]!r}")
    k = max(rep.width, 1)
    d = treedecomp_to_cliquesums(simple, td)
    drawing, report = compose(gm, d, k=k, c=k, formula="treewidth k(k+2)*Delta*m",
                              seed=seed, verify=verify)
    return drawing, report


def draw_single_crossing_free(g, d: CliqueSumDecomposition, *, t: int | None = None,
                              seed=0, check: bool = True, verify: bool = True):
    """Draw a clique-sum of planar and width-<=t pieces within 3*(t^2+2t+2)*Delta*m."""
    gm = g.to_multigraph() if isinstance(g, Graph) else g
    simple = gm.simple()
    if gm.num_vertices == 0:
        return Drawing(gm, {}), _empty_report("single-crossing 3(t^2+2t+2)*Delta*m", 3, 15, t=3)
    tags = [p.treewidth for p in d.pieces if p.kind == PieceKind.TREEWIDTH and p.treewidth]
    t_eff = max([3] + tags + ([t] if t is not None else []))
    if check:
        rep = validate_decomposition(d, simple, k=3, t=t_eff)
        if not rep.ok:
            raise GraphError(f"invalid decomposition: {rep.violations[:3]!r}")
    normalized = normalize_planar_pieces(d)
    c = t_eff * (t_eff + 2)
    drawing, report = compose(gm, normalized, k=3, c=c, t=t_eff,
                              formula="single-crossing 3(t^2+2t+2)*Delta*m",
                              seed=seed, verify=verify)
    return drawing, report
