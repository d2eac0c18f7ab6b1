"""Value-semantic graphs, multigraphs, simplicial blowups and clique-sum decompositions.

Vertex identifiers are opaque hashables (ints, strings, tuples of those).
All structures are immutable after construction and safe to share between
workers.  Parallel edges in a multigraph are distinct edges: they carry
distinct dense integer ids assigned in insertion order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Hashable, Iterable, Mapping

from .errors import GraphError

if TYPE_CHECKING:  # pragma: no cover
    from .decomposition import TreeDecomposition

VertexId = Hashable
EdgeKey = tuple  # canonical unordered pair, sorted by vkey


def vkey(v: VertexId):
    """Deterministic sort key valid across mixed vertex-id types."""
    if isinstance(v, bool):
        return ("bool", v)
    if isinstance(v, int):
        return ("int", v)
    if isinstance(v, str):
        return ("str", v)
    if isinstance(v, tuple):
        return ("tuple", tuple(vkey(x) for x in v))
    return (type(v).__name__, repr(v))


def edge_key(u: VertexId, v: VertexId) -> EdgeKey:
    """Canonical unordered representation of an edge."""
    if u == v:
        raise GraphError(f"loop edge at {u!r} is not allowed")
    return (u, v) if vkey(u) <= vkey(v) else (v, u)


def sorted_vertices(vs: Iterable[VertexId]) -> list:
    return sorted(vs, key=vkey)


@dataclass(frozen=True)
class Graph:
    """A finite simple graph: no loops, no parallel edges."""

    vertices: frozenset
    edges: frozenset

    @staticmethod
    def build(vertices: Iterable[VertexId] = (), edges: Iterable[tuple] = ()) -> "Graph":
        vset = set(vertices)
        eset = set()
        for u, v in edges:
            e = edge_key(u, v)
            vset.add(u)
            vset.add(v)
            eset.add(e)
        return Graph(frozenset(vset), frozenset(eset))

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"loop edge at {u!r}")
            if u not in self.vertices or v not in self.vertices:
                raise GraphError(f"edge ({u!r}, {v!r}) has an endpoint outside the vertex set")
            if edge_key(u, v) != (u, v):
                raise GraphError(f"edge ({u!r}, {v!r}) is not in canonical order")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict:
        adj = self.__dict__.get("_adj")
        if adj is None:
            adj = {v: set() for v in self.vertices}
            for u, v in self.edges:
                adj[u].add(v)
                adj[v].add(u)
            object.__setattr__(self, "_adj", adj)
        return adj

    def neighbors(self, v: VertexId) -> set:
        return self.adjacency()[v]

    def degree(self, v: VertexId) -> int:
        return len(self.adjacency()[v])

    def max_degree(self) -> int:
        return max((len(s) for s in self.adjacency().values()), default=0)

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        return edge_key(u, v) in self.edges

    def is_clique(self, vs: Iterable[VertexId]) -> bool:
        vs = list(vs)
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                if not self.has_edge(u, v):
                    return False
        return True

    def components(self) -> list:
        """Connected components, each a sorted vertex list; deterministic order."""
        seen = set()
        comps = []
        adj = self.adjacency()
        for start in sorted_vertices(self.vertices):
            if start in seen:
                continue
            comp = [start]
            seen.add(start)
            stack = [start]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted_vertices(comp))
        return comps

    def to_multigraph(self) -> "Multigraph":
        pairs = sorted(self.edges, key=lambda e: (vkey(e[0]), vkey(e[1])))
        return Multigraph.build(self.vertices, pairs)


def induced_subgraph(g: Graph, keep: Iterable[VertexId]) -> Graph:
    """Subgraph induced by ``keep``; every member must be a vertex of ``g``."""
    keep = set(keep)
    unknown = keep - g.vertices
    if unknown:
        raise GraphError(f"unknown vertices in induced_subgraph: {sorted_vertices(unknown)!r}")
    edges = frozenset(e for e in g.edges if e[0] in keep and e[1] in keep)
    return Graph(frozenset(keep), edges)


@dataclass(frozen=True)
class Multigraph:
    """A loopless multigraph with stable integer edge ids.

    ``edges`` maps every edge id to its canonical endpoint pair; parallel
    edges repeat the pair under distinct ids.  ``degree`` counts incident
    edge ids, which may exceed the number of distinct neighbours.
    """

    vertices: frozenset
    edges: Mapping[int, tuple]

    @staticmethod
    def build(vertices: Iterable[VertexId] = (), pairs: Iterable[tuple] = ()) -> "Multigraph":
        vset = set(vertices)
        edict = {}
        for i, (u, v) in enumerate(pairs):
            e = edge_key(u, v)
            vset.add(u)
            vset.add(v)
            edict[i] = e
        return Multigraph(frozenset(vset), edict)

    def __post_init__(self):
        for eid, (u, v) in self.edges.items():
            if u == v:
                raise GraphError(f"loop edge {eid} at {u!r}")
            if u not in self.vertices or v not in self.vertices:
                raise GraphError(f"edge {eid} has an endpoint outside the vertex set")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def incidence(self) -> dict:
        inc = self.__dict__.get("_inc")
        if inc is None:
            inc = {v: [] for v in self.vertices}
            for eid in sorted(self.edges):
                u, v = self.edges[eid]
                inc[u].append(eid)
                inc[v].append(eid)
            object.__setattr__(self, "_inc", inc)
        return inc

    def degree(self, v: VertexId) -> int:
        return len(self.incidence()[v])

    def max_degree(self) -> int:
        return max((len(s) for s in self.incidence().values()), default=0)

    def distinct_neighbors(self, v: VertexId) -> set:
        out = set()
        for eid in self.incidence()[v]:
            u, w = self.edges[eid]
            out.add(w if u == v else u)
        return out

    def multiplicity(self, u: VertexId, v: VertexId) -> int:
        e = edge_key(u, v)
        return sum(1 for pair in self.edges.values() if pair == e)

    def simple(self) -> Graph:
        """Underlying simple graph (parallel copies collapsed)."""
        return Graph(self.vertices, frozenset(self.edges.values()))


@dataclass(frozen=True)
class SimplicialBlowup:
    """A multigraph obtained from ``base`` by adding an independent set.

    Each added vertex attaches to a clique of ``base`` of size at most ``k``
    with per-neighbour multiplicities, after which some edges within the
    attachment cliques may be deleted.
    """

    base: Graph
    added: frozenset
    attachments: Mapping[VertexId, Mapping[VertexId, int]]
    clique_deletions: frozenset
    k: int

    def realize(self) -> Multigraph:
        """The blown-up multigraph; base edges first, added edges by sorted vertex."""
        pairs = [e for e in sorted(self.base.edges, key=lambda e: (vkey(e[0]), vkey(e[1])))
                 if e not in self.clique_deletions]
        for u in sorted_vertices(self.added):
            att = self.attachments[u]
            for nb in sorted_vertices(att):
                pairs.extend([(u, nb)] * att[nb])
        return Multigraph.build(self.base.vertices | self.added, pairs)


def make_blowup(base: Graph,
                attachments: Mapping[VertexId, Mapping[VertexId, int]],
                deletions: Iterable[tuple] = (),
                k: int | None = None,
                involved_cliques: Iterable = ()) -> SimplicialBlowup:
    """Validate and build a (<= k)-simplicial blowup of ``base``.

    Deleted edges must lie inside an attachment clique or inside one of the
    explicitly declared ``involved_cliques`` (cliques of the base a blowup
    vertex attaches into, even when it reaches only a subset of them).
    """
    added = set(attachments)
    overlap = added & base.vertices
    if overlap:
        raise GraphError(f"added vertices intersect the base graph: {sorted_vertices(overlap)!r}")
    if k is None:
        k = max((len(att) for att in attachments.values()), default=0)
    attached_cliques = []
    for u, att in attachments.items():
        clique = set(att)
        if len(clique) > k:
            raise GraphError(f"attachment of {u!r} has size {len(clique)} > k={k}")
        if not clique <= base.vertices:
            raise GraphError(f"attachment of {u!r} is not inside the base graph")
        if not base.is_clique(clique):
            raise GraphError(f"attachment of {u!r} is not a clique of the base graph")
        for nb, mult in att.items():
            if mult < 1:
                raise GraphError(f"multiplicity of ({u!r}, {nb!r}) must be >= 1")
        attached_cliques.append(clique)
    for extra in involved_cliques:
        extra = set(extra)
        if not extra <= base.vertices or not base.is_clique(extra):
            raise GraphError(f"involved clique {sorted_vertices(extra)!r} is not a clique of the base")
        attached_cliques.append(extra)
    del_set = set()
    for u, v in deletions:
        e = edge_key(u, v)
        if e not in base.edges:
            raise GraphError(f"deleted edge {e!r} is not a base edge")
        if not any({u, v} <= c for c in attached_cliques):
            raise GraphError(f"deleted edge {e!r} lies outside every attachment clique")
        del_set.add(e)
    return SimplicialBlowup(
        base=base,
        added=frozenset(added),
        attachments={u: dict(att) for u, att in attachments.items()},
        clique_deletions=frozenset(del_set),
        k=k,
    )


class PieceKind(enum.Enum):
    PLANAR_NO_SEP_TRIANGLE = "planar_nosep"
    COMPLETE = "complete"
    TREEWIDTH = "treewidth"
    GENERIC = "generic"


@dataclass(frozen=True)
class Piece:
    graph: Graph
    kind: PieceKind = PieceKind.GENERIC
    treewidth: int | None = None  # only meaningful for PieceKind.TREEWIDTH


@dataclass(frozen=True)
class CliqueSumDecomposition:
    """A rooted forest of pieces glued along named cliques.

    Pieces are 0-indexed; ``parent[j] < j`` for every non-root ``j`` and
    ``parent_clique[j]`` is the set of vertex names identified between piece
    ``j`` and its parent.  ``deletions[j]`` lists edges inside that clique
    that are absent from the reconstructed graph.  Vertex names are global:
    identification is by name, never by index.
    """

    pieces: tuple
    parent: Mapping[int, int] = field(default_factory=dict)
    parent_clique: Mapping[int, frozenset] = field(default_factory=dict)
    deletions: Mapping[int, frozenset] = field(default_factory=dict)
    certificates: Mapping[int, "TreeDecomposition"] = field(default_factory=dict)

    def __post_init__(self):
        h = len(self.pieces)
        if h == 0:
            raise GraphError("a decomposition needs at least one piece")
        seen = set()
        for j in range(h):
            g = self.pieces[j].graph
            if j in self.parent:
                i = self.parent[j]
                if not (0 <= i < j):
                    raise GraphError(f"parent of piece {j} must be an earlier piece, got {i}")
                clique = frozenset(self.parent_clique.get(j, frozenset()))
                if not clique:
                    raise GraphError(f"piece {j} has a parent but an empty parent clique")
                pg = self.pieces[i].graph
                if not clique <= g.vertices or not clique <= pg.vertices:
                    raise GraphError(f"parent clique of piece {j} missing from piece or parent")
                if not g.is_clique(clique) or not pg.is_clique(clique):
                    raise GraphError(f"parent clique of piece {j} does not induce a clique on both sides")
                shared = g.vertices & seen
                if shared != clique:
                    raise GraphError(
                        f"piece {j} shares {sorted_vertices(shared)!r} with earlier pieces, "
                        f"expected exactly its parent clique {sorted_vertices(clique)!r}")
                for u, v in self.deletions.get(j, frozenset()):
                    if u not in clique or v not in clique:
                        raise GraphError(f"deletion ({u!r}, {v!r}) at join {j} lies outside the join clique")
            else:
                if j in self.parent_clique and self.parent_clique[j]:
                    raise GraphError(f"root piece {j} must have an empty parent clique")
                if g.vertices & seen:
                    raise GraphError(f"root piece {j} shares vertices with earlier pieces")
                if j in self.deletions and self.deletions[j]:
                    raise GraphError(f"root piece {j} cannot carry join deletions")
            seen |= g.vertices
        for j in self.parent:
            if not (1 <= j < h):
                raise GraphError(f"join index {j} out of range")

    @property
    def num_pieces(self) -> int:
        return len(self.pieces)

    def roots(self) -> list:
        return [j for j in range(len(self.pieces)) if j not in self.parent]

    def children(self) -> dict:
        ch = {i: [] for i in range(len(self.pieces))}
        for j in sorted(self.parent):
            ch[self.parent[j]].append(j)
        return ch


def reconstruct(d: CliqueSumDecomposition) -> Graph:
    """Union of piece edge sets under name identification, minus join deletions."""
    vertices = set()
    edges = set()
    for piece in d.pieces:
        vertices |= piece.graph.vertices
        edges |= piece.graph.edges
    removed = set()
    for j, dels in d.deletions.items():
        for u, v in dels:
            removed.add(edge_key(u, v))
    return Graph(frozenset(vertices), frozenset(edges - removed))
