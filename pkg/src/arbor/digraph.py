"""Finite simple digraphs: loading, reachability, strong components, reversal.

Digraphs are immutable. Loops and duplicate edges are rejected; a pair of
inversely directed edges between two vertices is allowed. Every iteration
order (adjacency lists, component labels, path tie-breaks) is sorted by
vertex id so that all derived certificates are reproducible.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional


class DigraphError(ValueError):
    """Malformed digraph input."""


class LoopEdge(DigraphError):
    def __init__(self, edge):
        super().__init__(f"loop edge {list(edge)} is forbidden")
        self.edge = tuple(edge)


class DuplicateEdge(DigraphError):
    def __init__(self, edge):
        super().__init__(f"duplicate edge {list(edge)}")
        self.edge = tuple(edge)


class UnknownVertex(DigraphError):
    def __init__(self, vertex, edge=None):
        where = f" in edge {list(edge)}" if edge is not None else ""
        super().__init__(f"unknown vertex {vertex}{where}")
        self.vertex = vertex
        self.edge = tuple(edge) if edge is not None else None


@dataclass(frozen=True)
class DirectedPath:
    """A directed path given by its vertex sequence; nontrivial iff length >= 2."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a path has at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError(f"path vertices must be distinct: {self.vertices}")

    @classmethod
    def in_digraph(cls, d: "Digraph", vertices: Iterable[int]) -> "DirectedPath":
        verts = tuple(vertices)
        for v, w in zip(verts, verts[1:]):
            if not d.has_edge(v, w):
                raise ValueError(f"({v},{w}) is not an edge of the host digraph")
        return cls(verts)

    @property
    def first(self) -> int:
        return self.vertices[0]

    @property
    def last(self) -> int:
        return self.vertices[-1]

    @property
    def is_trivial(self) -> bool:
        return len(self.vertices) == 1

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


@dataclass(frozen=True)
class Digraph:
    """A finite simple digraph on integer vertex ids."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    names: dict[int, str] = field(default_factory=dict)

    @classmethod
    def build(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]],
              names: Optional[Mapping[int, str]] = None) -> "Digraph":
        """Validate and construct; vertex ids are kept as given (sorted order is canonical)."""
        vset = set()
        for v in vertices:
            if not isinstance(v, int) or v < 0:
                raise DigraphError(f"vertex ids must be non-negative integers, got {v!r}")
            if v in vset:
                raise DigraphError(f"duplicate vertex {v}")
            vset.add(v)
        eset = set()
        for e in edges:
            t, h = e
            if t not in vset:
                raise UnknownVertex(t, e)
            if h not in vset:
                raise UnknownVertex(h, e)
            if t == h:
                raise LoopEdge(e)
            if (t, h) in eset:
                raise DuplicateEdge(e)
            eset.add((t, h))
        return cls(tuple(sorted(vset)), tuple(sorted(eset)),
                   dict(names) if names else {})

    def __contains__(self, v: int) -> bool:
        return v in self._vertex_set

    @cached_property
    def _vertex_set(self) -> frozenset[int]:
        return frozenset(self.vertices)

    @cached_property
    def _edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    @cached_property
    def _out(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for t, h in self.edges:
            adj[t].append(h)
        return {v: tuple(sorted(ws)) for v, ws in adj.items()}

    @cached_property
    def _in(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for t, h in self.edges:
            adj[h].append(t)
        return {v: tuple(sorted(ws)) for v, ws in adj.items()}

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return self._in[v]

    def has_edge(self, v: int, w: int) -> bool:
        return (v, w) in self._edge_set

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def induced(self, keep: Iterable[int]) -> "Digraph":
        ks = frozenset(keep)
        missing = ks - self._vertex_set
        if missing:
            raise UnknownVertex(min(missing))
        return Digraph(tuple(sorted(ks)),
                       tuple(e for e in self.edges if e[0] in ks and e[1] in ks),
                       {v: s for v, s in self.names.items() if v in ks})

    def minus(self, removed: Iterable[int]) -> "Digraph":
        return self.induced(self._vertex_set - frozenset(removed))

    def reverse(self) -> "Digraph":
        return Digraph(self.vertices, tuple(sorted((h, t) for t, h in self.edges)),
                       dict(self.names))

    def reachable_from(self, start: int) -> frozenset[int]:
        if start not in self:
            raise UnknownVertex(start)
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in self._out[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return frozenset(seen)

    def label(self, v: int) -> str:
        return self.names.get(v, str(v))


@dataclass(frozen=True)
class SCCPartition:
    """Strong components of a digraph minus a deleted vertex set.

    Components are ordered by their smallest contained id; labels are the
    positions in that ordering.
    """

    deleted: frozenset[int]
    components: tuple[frozenset[int], ...]
    component_of: dict[int, int]

    def same_component(self, v: int, w: int) -> bool:
        return self.component_of[v] == self.component_of[w]

    def component(self, v: int) -> frozenset[int]:
        return self.components[self.component_of[v]]


def strong_components(d: Digraph, x: Iterable[int] = ()) -> SCCPartition:
    """Strong components of d minus x (iterative Tarjan, deterministic labels)."""
    xs = frozenset(x)
    for v in xs:
        if v not in d:
            raise UnknownVertex(v)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[frozenset[int]] = []
    counter = 0
    for root in d.vertices:
        if root in xs or root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            v, i = work[-1]
            adj = d.out_neighbors(v)
            advanced = False
            while i < len(adj):
                w = adj[i]
                i += 1
                if w in xs:
                    continue
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work[-1] = (v, i)
                    work.append((w, 0))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                comps.append(frozenset(comp))
    comps.sort(key=min)
    component_of = {v: i for i, comp in enumerate(comps) for v in comp}
    return SCCPartition(xs, tuple(comps), component_of)


def find_path(d: Digraph, sources: Iterable[int], targets: Iterable[int],
              forbidden_interior: Iterable[int] = ()) -> Optional[DirectedPath]:
    """Shortest sources-to-targets path whose interior avoids the forbidden set.

    The path meets `sources` precisely in its first vertex and `targets`
    precisely in its last; interior vertices also avoid `forbidden_interior`.
    Among shortest such paths the one with lexicographically smallest id
    sequence is returned; None means no qualifying path exists.
    """
    src = frozenset(sources)
    tgt = frozenset(targets)
    if not src or not tgt:
        raise ValueError("sources and targets must be nonempty")
    for v in src | tgt:
        if v not in d:
            raise UnknownVertex(v)
    common = src & tgt
    if common:
        return DirectedPath((min(common),))
    allowed_mid = d._vertex_set - frozenset(forbidden_interior) - src - tgt
    # Distance to the nearest target, moving only through allowed interiors.
    dist: dict[int, int] = {t: 0 for t in tgt}
    queue = deque(sorted(tgt))
    while queue:
        y = queue.popleft()
        if y not in tgt and y not in allowed_mid:
            continue  # a source vertex terminates expansion
        for v in d.in_neighbors(y):
            if v in dist:
                continue
            if v in allowed_mid or v in src:
                dist[v] = dist[y] + 1
                queue.append(v)
    reachable_sources = [s for s in src if s in dist]
    if not reachable_sources:
        return None
    best = min(dist[s] for s in reachable_sources)
    cur = min(s for s in reachable_sources if dist[s] == best)
    path = [cur]
    remaining = best
    while remaining > 0:
        nxt = min(w for w in d.out_neighbors(cur)
                  if dist.get(w) == remaining - 1 and (w in allowed_mid or w in tgt))
        path.append(nxt)
        cur = nxt
        remaining -= 1
    return DirectedPath(tuple(path))


# --- serialization ---------------------------------------------------------

def load_digraph(document) -> Digraph:
    """Load a digraph from its JSON document (text or already-parsed dict).

    Vertex ids are made dense (0..n-1 in the order of the sorted input ids);
    when the input ids are not already dense, the original ids are preserved
    as names.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise DigraphError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict) or "vertices" not in document or "edges" not in document:
        raise DigraphError("digraph document needs 'vertices' and 'edges'")
    raw_vertices = document["vertices"]
    seen = set()
    for v in raw_vertices:
        if not isinstance(v, int) or v < 0:
            raise DigraphError(f"vertex ids must be non-negative integers, got {v!r}")
        if v in seen:
            raise DigraphError(f"duplicate vertex {v}")
        seen.add(v)
    ordered = sorted(seen)
    dense = {v: i for i, v in enumerate(ordered)}
    identity = all(v == i for i, v in enumerate(ordered))
    raw_names = {int(k): str(s) for k, s in (document.get("names") or {}).items()}
    for k in raw_names:
        if k not in seen:
            raise UnknownVertex(k)
    names: dict[int, str] = {}
    for v in ordered:
        if v in raw_names:
            names[dense[v]] = raw_names[v]
        elif not identity:
            names[dense[v]] = str(v)
    edges = []
    eset = set()
    for e in document["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise DigraphError(f"edge must be a pair, got {e!r}")
        t, h = e
        if t not in seen:
            raise UnknownVertex(t, e)
        if h not in seen:
            raise UnknownVertex(h, e)
        if t == h:
            raise LoopEdge(e)
        if (t, h) in eset:
            raise DuplicateEdge(e)
        eset.add((t, h))
        edges.append((dense[t], dense[h]))
    return Digraph(tuple(range(len(ordered))), tuple(sorted(edges)), names)


def digraph_to_json_dict(d: Digraph) -> dict:
    doc = {"vertices": list(d.vertices), "edges": [list(e) for e in d.edges]}
    if d.names:
        doc["names"] = {str(v): s for v, s in sorted(d.names.items())}
    return doc


def digraph_to_json(d: Digraph, indent: Optional[int] = None) -> str:
    return json.dumps(digraph_to_json_dict(d), indent=indent)


def digraph_to_dot(d: Digraph, separator: Iterable[int] = (),
                   graph_name: str = "D") -> str:
    """DOT rendering; separator vertices get a doubled border."""
    sep = frozenset(separator)
    lines = [f"digraph {graph_name} {{"]
    for v in d.vertices:
        attrs = [f'label="{d.label(v)}"']
        if v in sep:
            attrs.append("peripheries=2")
        lines.append(f'  {v} [{", ".join(attrs)}];')
    for t, h in d.edges:
        lines.append(f"  {t} -> {h};")
    lines.append("}")
    return "\n".join(lines) + "\n"
