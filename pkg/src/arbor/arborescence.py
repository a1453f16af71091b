"""Arborescences, normal assistants, normality certificates and sensitive orders.

An arborescence is a rooted oriented tree with a directed path from the root
to every vertex; its tree order is `v <= w` iff the root-to-w path passes v.
The normal assistant of an arborescence T in a host digraph D adds an edge
(v, w) for every tree-incomparable pair admitting a T-path from the subtree
above v to the subtree above w; T is normal iff that overlay is acyclic.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .digraph import Digraph, DirectedPath, find_path, strong_components


class TreeError(ValueError):
    """Malformed tree-side input."""


class VertexNotInTree(TreeError):
    pass


class NotAnArborescence(TreeError):
    pass


class EdgeMissingFromHost(TreeError):
    pass


class RootMissing(TreeError):
    pass


class NotACycle(TreeError):
    pass


class NotALinearExtension(TreeError):
    pass


class ComparableVertices(TreeError):
    pass


class PreconditionOrderViolated(TreeError):
    pass


class NotSpanningReachableSet(TreeError):
    pass


class NotNormalInput(TreeError):
    pass


class NotNormalError(TreeError):
    """Raised by operations that require a normal arborescence; carries the certificate."""

    def __init__(self, certificate: "CycleCertificate"):
        super().__init__(f"arborescence is not normal; assistant cycle {list(certificate.vertices)}")
        self.certificate = certificate


@dataclass(frozen=True)
class Arborescence:
    """Root plus parent mapping for every non-root vertex."""

    root: int
    parent: dict[int, int]

    def __post_init__(self):
        if self.root in self.parent:
            raise NotAnArborescence(f"root {self.root} must not have a parent")
        verts = set(self.parent) | {self.root}
        state: dict[int, int] = {}  # 1 = on current chain, 2 = settled
        for start in self.parent:
            chain = []
            v = start
            while state.get(v, 0) == 0 and v != self.root:
                state[v] = 1
                chain.append(v)
                if v not in self.parent:
                    raise NotAnArborescence(f"vertex {v} has no path to the root")
                v = self.parent[v]
                if v not in verts:
                    raise NotAnArborescence(f"parent {v} is not a tree vertex")
                if state.get(v) == 1:
                    raise NotAnArborescence(f"parent chain through {start} has a cycle")
            for u in chain:
                state[u] = 2

    @cached_property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.parent) | {self.root}

    @cached_property
    def vertex_list(self) -> tuple[int, ...]:
        return tuple(sorted(self.vertices))

    @cached_property
    def children(self) -> dict[int, tuple[int, ...]]:
        kids: dict[int, list[int]] = {v: [] for v in self.vertices}
        for c, p in self.parent.items():
            kids[p].append(c)
        return {v: tuple(sorted(cs)) for v, cs in kids.items()}

    @cached_property
    def depth(self) -> dict[int, int]:
        depths = {self.root: 0}
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for c in self.children[v]:
                depths[c] = depths[v] + 1
                queue.append(c)
        return depths

    @cached_property
    def _top_down(self) -> tuple[int, ...]:
        order = [self.root]
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for c in self.children[v]:
                order.append(c)
                queue.append(c)
        return tuple(order)

    @cached_property
    def subtree(self) -> dict[int, frozenset[int]]:
        """Up-closure of every vertex (the vertex together with its descendants)."""
        subs: dict[int, set[int]] = {}
        for v in reversed(self._top_down):
            s = {v}
            for c in self.children[v]:
                s |= subs[c]
            subs[v] = s
        return {v: frozenset(s) for v, s in subs.items()}

    def _require(self, *vs: int) -> None:
        for v in vs:
            if v not in self.vertices:
                raise VertexNotInTree(f"vertex {v} is not in the tree")

    def leq(self, v: int, w: int) -> bool:
        """Tree order: True iff the root-to-w path passes v."""
        self._require(v, w)
        dv = self.depth[v]
        while self.depth[w] > dv:
            w = self.parent[w]
        return v == w

    def incomparable(self, v: int, w: int) -> bool:
        return not self.leq(v, w) and not self.leq(w, v)

    def up_closure(self, v: int) -> frozenset[int]:
        self._require(v)
        return self.subtree[v]

    def down_closure(self, v: int) -> frozenset[int]:
        self._require(v)
        chain = {v}
        while v != self.root:
            v = self.parent[v]
            chain.add(v)
        return frozenset(chain)

    def meet(self, v: int, w: int) -> int:
        """The tree-maximal common element of the two down-closures."""
        self._require(v, w)
        while self.depth[v] > self.depth[w]:
            v = self.parent[v]
        while self.depth[w] > self.depth[v]:
            w = self.parent[w]
        while v != w:
            v = self.parent[v]
            w = self.parent[w]
        return v

    def level_of(self, v: int) -> int:
        self._require(v)
        return self.depth[v]

    def levels(self) -> tuple[frozenset[int], ...]:
        by_depth: dict[int, set[int]] = {}
        for v, dep in self.depth.items():
            by_depth.setdefault(dep, set()).add(v)
        return tuple(frozenset(by_depth[i]) for i in range(len(by_depth)))

    def tree_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((p, c) for c, p in self.parent.items()))

    def key(self):
        """Hashable identity, for collecting sets of arborescences."""
        return (self.root, frozenset(self.parent.items()))


def tree_query(t: Arborescence, kind: str, *args: int):
    """Dispatch for the basic tree-order queries."""
    if kind == "leq":
        return t.leq(*args)
    if kind == "up_closure":
        return t.up_closure(*args)
    if kind == "down_closure":
        return t.down_closure(*args)
    if kind == "meet":
        return t.meet(*args)
    if kind == "level":
        return t.level_of(*args)
    raise ValueError(f"unknown tree query kind {kind!r}")


# --- normal assistant ------------------------------------------------------

@dataclass(frozen=True)
class NormalAssistant:
    """The tree plus one edge per incomparable pair joined by a T-path, with witnesses."""

    base: Arborescence
    added: tuple[tuple[int, int], ...]
    witness: dict[tuple[int, int], DirectedPath]

    @cached_property
    def _edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.base.tree_edges()) | frozenset(self.added)

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self._edge_set))

    def has_edge(self, v: int, w: int) -> bool:
        return (v, w) in self._edge_set

    @cached_property
    def _out(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {v: [] for v in self.base.vertices}
        for t, h in self._edge_set:
            adj[t].append(h)
        return {v: tuple(sorted(ws)) for v, ws in adj.items()}

    def out_neighbors(self, v: int) -> tuple[int, ...]:
        return self._out[v]

    @cached_property
    def _reach(self) -> dict[int, frozenset[int]]:
        reach = {}
        for v in self.base.vertex_list:
            seen: set[int] = set()
            queue = deque(self._out[v])
            seen.update(self._out[v])
            while queue:
                w = queue.popleft()
                for u in self._out[w]:
                    if u not in seen:
                        seen.add(u)
                        queue.append(u)
            reach[v] = frozenset(seen)
        return reach

    def normal_leq(self, v: int, w: int) -> bool:
        """The normal order: reachability in the assistant."""
        return v == w or w in self._reach[v]

    def as_digraph(self) -> Digraph:
        return Digraph.build(self.base.vertices, self._edge_set)


def _tpath_endpoints(d: Digraph, t: Arborescence) -> dict[int, frozenset[int]]:
    """For each tree vertex x, the tree vertices reachable by a T-path starting at x.

    A T-path is a nontrivial directed path meeting the tree exactly in its
    endvertices, so the search leaves x, runs through non-tree vertices and
    stops on re-entering the tree.
    """
    tree_verts = t.vertices
    table: dict[int, frozenset[int]] = {}
    for x in t.vertex_list:
        hits: set[int] = set()
        seen_outside: set[int] = set()
        queue: deque[int] = deque()
        for y in d.out_neighbors(x):
            if y in tree_verts:
                if y != x:
                    hits.add(y)
            elif y not in seen_outside:
                seen_outside.add(y)
                queue.append(y)
        while queue:
            z = queue.popleft()
            for y in d.out_neighbors(z):
                if y in tree_verts:
                    if y != x:
                        hits.add(y)
                elif y not in seen_outside:
                    seen_outside.add(y)
                    queue.append(y)
        table[x] = frozenset(hits)
    return table


def _validate_subdigraph(d: Digraph, t: Arborescence) -> None:
    for v in t.vertices:
        if v not in d:
            raise EdgeMissingFromHost(f"tree vertex {v} is not a host vertex")
    for p, c in t.tree_edges():
        if not d.has_edge(p, c):
            raise EdgeMissingFromHost(f"tree edge ({p},{c}) is not a host edge")


def normal_assistant(d: Digraph, t: Arborescence) -> NormalAssistant:
    """Build the normal assistant of t in d with a shortest witness per added edge."""
    _validate_subdigraph(d, t)
    direct = _tpath_endpoints(d, t)
    # hits_above[v]: all T-path endpoints reachable from anywhere in v's subtree.
    hits_above: dict[int, frozenset[int]] = {}
    for v in reversed(t._top_down):
        s = set(direct[v])
        for c in t.children[v]:
            s |= hits_above[c]
        hits_above[v] = frozenset(s)
    tree_verts = frozenset(t.vertices)
    added: list[tuple[int, int]] = []
    witness: dict[tuple[int, int], DirectedPath] = {}
    verts = t.vertex_list
    for v in verts:
        sub_v = t.subtree[v]
        for w in verts:
            if v == w or w in sub_v or v in t.subtree[w]:
                continue
            if hits_above[v].isdisjoint(t.subtree[w]):
                continue
            path = find_path(d, sub_v, t.subtree[w], forbidden_interior=tree_verts)
            assert path is not None and not path.is_trivial
            added.append((v, w))
            witness[(v, w)] = path
    return NormalAssistant(t, tuple(added), witness)


# --- normality and cycle certificates --------------------------------------

@dataclass(frozen=True)
class CycleCertificate:
    """A directed cycle of the assistant; normalized means consecutive vertices are incomparable."""

    vertices: tuple[int, ...]
    normalized: bool


def _shortest_cycle(vertices: Sequence[int], out) -> Optional[tuple[int, ...]]:
    """Shortest directed cycle (lexicographically least among the shortest), or None."""
    best: Optional[tuple[int, tuple[int, ...]]] = None
    for x in vertices:
        dist = {x: 0}
        prev: dict[int, int] = {}
        queue = deque([x])
        closed: Optional[tuple[int, ...]] = None
        while queue:
            v = queue.popleft()
            for w in out(v):
                if w == x:
                    cyc = [v]
                    while cyc[-1] != x:
                        cyc.append(prev[cyc[-1]])
                    candidate = tuple(reversed(cyc))
                    if closed is None or (len(candidate), candidate) < (len(closed), closed):
                        closed = candidate
                elif w not in dist:
                    dist[w] = dist[v] + 1
                    prev[w] = v
                    queue.append(w)
        if closed is not None and (best is None or (len(closed), closed) < best):
            best = (len(closed), closed)
    return best[1] if best else None


def normalize_cycle(h: NormalAssistant, cycle: Sequence[int]) -> CycleCertificate:
    """Rewrite an assistant cycle until consecutive vertices are tree-incomparable.

    Each rewrite replaces a subpath u,v,w (u the tree parent of v, v and w
    incomparable) by the assistant edge u,w, shortening the cycle by one.
    """
    t = h.base
    verts = list(cycle)
    if len(verts) < 2 or len(set(verts)) != len(verts):
        raise NotACycle(f"{verts} is not a cycle")
    for a, b in zip(verts, verts[1:] + verts[:1]):
        if not h.has_edge(a, b):
            raise NotACycle(f"({a},{b}) is not an assistant edge")

    def all_incomparable(vs: list[int]) -> bool:
        return all(t.incomparable(a, b) for a, b in zip(vs, vs[1:] + vs[:1]))

    if all_incomparable(verts):
        return CycleCertificate(tuple(verts), True)
    while not all_incomparable(verts):
        n = len(verts)
        rewritten = False
        for i in range(n):
            u, v, w = verts[i], verts[(i + 1) % n], verts[(i + 2) % n]
            if t.parent.get(v) == u and t.incomparable(v, w) and h.has_edge(u, w):
                del verts[(i + 1) % n]
                rewritten = True
                break
        if not rewritten:
            # The rewrite pattern is unavailable; fall back to a shortest cycle
            # among the incomparable-pair edges alone, which exists whenever the
            # assistant is cyclic.
            added_out: dict[int, list[int]] = {v: [] for v in t.vertices}
            for a, b in h.added:
                added_out[a].append(b)
            fallback = _shortest_cycle(t.vertex_list, lambda v: sorted(added_out[v]))
            if fallback is None:
                raise NotACycle("no incomparable-consecutive cycle exists")
            verts = list(fallback)
            break
    return CycleCertificate(tuple(verts), True)


@dataclass(frozen=True)
class NormalityResult:
    assistant: NormalAssistant
    certificate: Optional[CycleCertificate]

    @property
    def is_normal(self) -> bool:
        return self.certificate is None

    def __bool__(self) -> bool:
        return self.is_normal


def check_normal(d: Digraph, t: Arborescence) -> NormalityResult:
    """Normality of t in d; on failure the result carries a normalized cycle certificate."""
    h = normal_assistant(d, t)
    cycle = _shortest_cycle(t.vertex_list, h.out_neighbors)
    if cycle is None:
        return NormalityResult(h, None)
    return NormalityResult(h, normalize_cycle(h, cycle))


def is_normal(d: Digraph, t: Arborescence) -> bool:
    return check_normal(d, t).is_normal


# --- sensitive orders ------------------------------------------------------

@dataclass(frozen=True)
class LinearExtension:
    """A total order on the tree vertices as a bijective rank mapping."""

    rank: dict[int, int]

    def __post_init__(self):
        n = len(self.rank)
        if sorted(self.rank.values()) != list(range(n)):
            raise NotALinearExtension("ranks must be a bijection onto 0..n-1")

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "LinearExtension":
        return cls({v: i for i, v in enumerate(order)})

    def order(self) -> tuple[int, ...]:
        return tuple(sorted(self.rank, key=self.rank.__getitem__))

    def __len__(self) -> int:
        return len(self.rank)


@dataclass(frozen=True)
class Violation:
    """Why a linear extension fails to be sensitive for one incomparable pair."""

    kind: str  # "branch" or "path"
    small: int
    large: int
    blocker: Optional[int] = None          # branch: the subtree vertex ordered past `large`
    witness: Optional[DirectedPath] = None  # path: a T-path from `large` to `small`


def _check_extension(t: Arborescence, ext: LinearExtension) -> None:
    if set(ext.rank) != set(t.vertices):
        raise NotALinearExtension("order must rank exactly the tree vertices")
    for c, p in t.parent.items():
        if ext.rank[p] > ext.rank[c]:
            raise NotALinearExtension(
                f"tree order violated: parent {p} ranked after child {c}")


def check_sensitive(d: Digraph, t: Arborescence, ext: LinearExtension) -> Optional[Violation]:
    """First branch- or path-sensitivity violation of the extension, or None."""
    _validate_subdigraph(d, t)
    _check_extension(t, ext)
    rank = ext.rank
    direct = _tpath_endpoints(d, t)
    max_rank: dict[int, int] = {}
    for v in reversed(t._top_down):
        max_rank[v] = max([rank[v]] + [max_rank[c] for c in t.children[v]])
    verts = t.vertex_list
    for a in verts:
        for b in verts:
            if a >= b or not t.incomparable(a, b):
                continue
            v, w = (a, b) if rank[a] < rank[b] else (b, a)
            if max_rank[v] >= rank[w]:
                blocker = min(x for x in t.subtree[v] if rank[x] >= rank[w])
                return Violation("branch", v, w, blocker=blocker)
            if v in direct[w]:
                witness = find_path(d, {w}, {v}, forbidden_interior=t.vertices)
                return Violation("path", v, w, witness=witness)
    return None


def is_sensitive(d: Digraph, t: Arborescence, ext: LinearExtension) -> bool:
    return check_sensitive(d, t, ext) is None


def sensitive_order_build(d: Digraph, t: Arborescence) -> LinearExtension:
    """Build a sensitive order for a normal arborescence (raises NotNormalError otherwise).

    Children of each node are sorted by a topological order of the normal
    order restricted to them; the result ranks vertices in the induced
    depth-first block order.
    """
    res = check_normal(d, t)
    if res.certificate is not None:
        raise NotNormalError(res.certificate)
    h = res.assistant

    def sibling_order(kids: tuple[int, ...]) -> list[int]:
        remaining = set(kids)
        out: list[int] = []
        while remaining:
            free = [k for k in remaining
                    if not any(h.normal_leq(o, k) for o in remaining if o != k)]
            pick = min(free) if free else min(remaining)
            out.append(pick)
            remaining.discard(pick)
        return out

    order: list[int] = []
    stack = [t.root]
    while stack:
        v = stack.pop()
        order.append(v)
        for c in reversed(sibling_order(t.children[v])):
            stack.append(c)
    ext = LinearExtension.from_order(order)
    violation = check_sensitive(d, t, ext)
    assert violation is None, f"built order is not sensitive: {violation}"
    return ext


# --- depth-first search ----------------------------------------------------

def dfs_build(d: Digraph, r: int, priority: Optional[Sequence[int]] = None) -> Arborescence:
    """Depth-first search tree from r; out-neighbors are explored in priority order.

    `priority` lists vertices in exploration preference (earlier = visited
    first); unlisted vertices come after all listed ones, by id.
    """
    if r not in d:
        raise RootMissing(f"root {r} is not a vertex of the digraph")
    pos = {v: i for i, v in enumerate(priority)} if priority is not None else {}
    fallback = len(pos)

    def explore_key(v: int) -> tuple[int, int]:
        return (pos.get(v, fallback), v)

    visited = {r}
    parent: dict[int, int] = {}
    stack: list[tuple[int, list[int], int]] = [(r, sorted(d.out_neighbors(r), key=explore_key), 0)]
    while stack:
        v, adj, i = stack[-1]
        while i < len(adj) and adj[i] in visited:
            i += 1
        if i == len(adj):
            stack.pop()
            continue
        w = adj[i]
        stack[-1] = (v, adj, i + 1)
        visited.add(w)
        parent[w] = v
        stack.append((w, sorted(d.out_neighbors(w), key=explore_key), 0))
    return Arborescence(r, parent)


def is_dfs_tree(d: Digraph, t: Arborescence) -> bool:
    """Whether t arises from some depth-first search run (equivalently, t is normal)."""
    reach = d.reachable_from(t.root)
    if t.vertices != reach:
        raise NotSpanningReachableSet(
            f"tree spans {sorted(t.vertices)} but the root reaches {sorted(reach)}")
    return is_normal(d.induced(t.vertices), t)


# --- separation and levels -------------------------------------------------

def branch_child(t: Arborescence, v: int, w: int) -> int:
    """The child of meet(v, w) on w's side, for tree-incomparable v and w."""
    m = t.meet(v, w)
    while t.parent[w] != m:
        w = t.parent[w]
    return w


def separation_check(d: Digraph, t: Arborescence, v: int, w: int) -> Optional[DirectedPath]:
    """Check that every w-to-v path meets the common down-closure of v and w.

    Requires t normal, v and w tree-incomparable, and w's whole branch not
    below v in the normal order: the child of meet(v, w) toward w must not
    precede v. (The weaker per-vertex condition admits counterexamples; at
    least one orientation of every incomparable pair qualifies.) Returns
    None when the separation holds, otherwise a counterexample path avoiding
    the intersection.
    """
    t._require(v, w)
    if not t.incomparable(v, w):
        raise ComparableVertices(f"{v} and {w} are comparable in the tree order")
    res = check_normal(d, t)
    if res.certificate is not None:
        raise NotNormalError(res.certificate)
    if res.assistant.normal_leq(branch_child(t, v, w), v):
        raise PreconditionOrderViolated(
            f"the branch of {w} precedes {v} in the normal order; "
            f"check the pair the other way around")
    x = t.down_closure(v) & t.down_closure(w)
    return find_path(d, {w}, {v}, forbidden_interior=x)


@dataclass(frozen=True)
class LevelReport:
    levels: tuple[frozenset[int], ...]
    acyclic: tuple[bool, ...]

    @property
    def all_acyclic(self) -> bool:
        return all(self.acyclic)


def level_partition(d: Digraph, t: Arborescence) -> LevelReport:
    """Tree levels of a normal spanning arborescence, with per-level acyclicity."""
    if t.vertices != frozenset(d.vertices):
        raise NotSpanningReachableSet("arborescence must span the digraph")
    res = check_normal(d, t)
    if res.certificate is not None:
        raise NotNormalInput(f"assistant has cycle {list(res.certificate.vertices)}")
    levels = t.levels()
    acyclic = []
    for level in levels:
        parts = strong_components(d.induced(level))
        acyclic.append(all(len(c) == 1 for c in parts.components))
    return LevelReport(levels, tuple(acyclic))


# --- serialization ---------------------------------------------------------

def load_arborescence(document) -> Arborescence:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise NotAnArborescence(f"invalid JSON: {exc}") from exc
    if not isinstance(document, dict) or "root" not in document or "edges" not in document:
        raise NotAnArborescence("arborescence document needs 'root' and 'edges'")
    parent: dict[int, int] = {}
    for e in document["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise NotAnArborescence(f"edge must be a [parent, child] pair, got {e!r}")
        p, c = e
        if c in parent:
            raise NotAnArborescence(f"vertex {c} has two parents")
        parent[c] = p
    return Arborescence(document["root"], parent)


def arborescence_to_json_dict(t: Arborescence) -> dict:
    return {"root": t.root, "edges": [list(e) for e in t.tree_edges()]}


def arborescence_to_json(t: Arborescence, indent: Optional[int] = None) -> str:
    return json.dumps(arborescence_to_json_dict(t), indent=indent)


def assistant_to_json_dict(h: NormalAssistant) -> dict:
    return {
        "base": arborescence_to_json_dict(h.base),
        "added": [{"tail": v, "head": w, "witness": list(h.witness[(v, w)].vertices)}
                  for v, w in h.added],
    }


def certificate_to_json_dict(cert: CycleCertificate) -> dict:
    return {"vertices": list(cert.vertices), "normalized": cert.normalized}


def tree_to_dot(t: Arborescence, assistant: Optional[NormalAssistant] = None,
                graph_name: str = "T") -> str:
    """DOT rendering: tree edges solid, assistant-added edges dashed."""
    lines = [f"digraph {graph_name} {{"]
    for v in t.vertex_list:
        shape = ", shape=doublecircle" if v == t.root else ""
        lines.append(f'  {v} [label="{v}"{shape}];')
    for p, c in t.tree_edges():
        lines.append(f"  {p} -> {c};")
    if assistant is not None:
        for v, w in assistant.added:
            lines.append(f"  {v} -> {w} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
