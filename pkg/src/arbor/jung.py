"""Directed combs, dispersedness probing, and the target-driven construction
of normal arborescences.

The builder maintains an arborescence together with a sensitive order and
attaches each requested target along a path whose starting vertex is maximal
in that order; the result is normal by construction and contains every
target.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence, Union

from .arborescence import (
    Arborescence,
    LinearExtension,
    RootMissing,
    check_normal,
    check_sensitive,
)
from .digraph import Digraph, DirectedPath, find_path


class UnreachableTarget(ValueError):
    def __init__(self, vertex):
        super().__init__(f"target {vertex} cannot be placed from the root")
        self.vertex = vertex


@dataclass(frozen=True)
class DirectedComb:
    """A spine path plus disjoint tooth paths, each meeting the spine in its first vertex."""

    spine: DirectedPath
    paths: tuple[DirectedPath, ...]

    def __post_init__(self):
        on_spine = set(self.spine.vertices)
        used: set[int] = set()
        for p in self.paths:
            if p.first not in on_spine:
                raise ValueError(f"tooth path {p.vertices} does not start on the spine")
            for v in p.vertices[1:]:
                if v in on_spine:
                    raise ValueError(f"tooth path {p.vertices} re-enters the spine")
            if used & set(p.vertices):
                raise ValueError("tooth paths must be pairwise disjoint")
            used |= set(p.vertices)

    @property
    def teeth(self) -> tuple[int, ...]:
        return tuple(p.last for p in self.paths)

    def to_json_dict(self) -> dict:
        return {
            "spine": list(self.spine.vertices),
            "paths": [list(p.vertices) for p in self.paths],
            "teeth": list(self.teeth),
        }


@dataclass(frozen=True)
class WellOrderedTargets:
    """Target vertices in the order they must be absorbed; optional block labels."""

    order: tuple[int, ...]
    blocks: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("target order must not repeat vertices")

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "WellOrderedTargets":
        """Concatenate per-block orders into one well-order (earlier blocks first)."""
        blocks = tuple(tuple(b) for b in blocks)
        seen: set[int] = set()
        order: list[int] = []
        for b in blocks:
            for v in b:
                if v not in seen:
                    seen.add(v)
                    order.append(v)
        return cls(tuple(order), blocks)


def load_targets(document) -> WellOrderedTargets:
    if isinstance(document, (str, bytes)):
        document = json.loads(document)
    if "order" in document:
        blocks = document.get("blocks")
        return WellOrderedTargets(tuple(document["order"]),
                                  tuple(tuple(b) for b in blocks) if blocks else None)
    if "blocks" in document:
        return WellOrderedTargets.from_blocks(document["blocks"])
    raise ValueError("targets document needs 'order' or 'blocks'")


def targets_to_json_dict(t: WellOrderedTargets) -> dict:
    doc: dict = {"order": list(t.order)}
    if t.blocks is not None:
        doc["blocks"] = [list(b) for b in t.blocks]
    return doc


# --- comb search ------------------------------------------------------------

def _max_disjoint_teeth(d: Digraph, spine: Sequence[int], u_set: frozenset[int],
                        k: int) -> list[tuple[int, ...]]:
    """Up to k vertex-disjoint tooth paths rooted at distinct spine vertices.

    Unit-capacity flow on the split graph: each spine vertex may root one
    tooth, each off-spine vertex carries at most one tooth path, paths end at
    the first harvested u-vertex.
    """
    on_spine = set(spine)
    SOURCE, SINK = ("S",), ("T",)
    adj: dict = {SOURCE: [], SINK: []}
    cap: dict = {}
    real: set = set()

    def add(a, b):
        adj.setdefault(a, [])
        adj.setdefault(b, [])
        if (a, b) not in cap:
            adj[a].append(b)
            adj[b].append(a)
        cap[(a, b)] = 1
        cap.setdefault((b, a), 0)
        real.add((a, b))

    for s in spine:
        add(SOURCE, ("sp", s))
        if s in u_set:
            add(("sp", s), SINK)
        for w in d.out_neighbors(s):
            if w not in on_spine:
                add(("sp", s), ("in", w))
    for x in d.vertices:
        if x in on_spine:
            continue
        add(("in", x), ("out", x))
        if x in u_set:
            add(("out", x), SINK)
        for w in d.out_neighbors(x):
            if w not in on_spine:
                add(("out", x), ("in", w))

    flow = 0
    while flow < k:
        prev = {SOURCE: SOURCE}
        queue = deque([SOURCE])
        while queue and SINK not in prev:
            a = queue.popleft()
            for b in adj[a]:
                if b not in prev and cap.get((a, b), 0) > 0:
                    prev[b] = a
                    queue.append(b)
        if SINK not in prev:
            break
        b = SINK
        while b != SOURCE:
            a = prev[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        flow += 1

    # decompose: a unit edge carries flow iff its capacity is exhausted;
    # restore the capacity on consumption so each unit is used once
    teeth: list[tuple[int, ...]] = []
    for s in spine:
        if cap.get((SOURCE, ("sp", s)), 1) != 0:
            continue
        path = [s]
        node = ("sp", s)
        while node != SINK:
            for b in adj[node]:
                if (node, b) in real and cap[(node, b)] == 0:
                    cap[(node, b)] = 1
                    if b == SINK:
                        node = SINK
                    elif b[0] == "in":
                        path.append(b[1])
                        node = b
                    else:  # ("out", x): pass through the split
                        node = b
                    break
            else:
                raise AssertionError("flow decomposition lost its way")
        teeth.append(tuple(path))
    return teeth


def comb_search(host, u, k: int, depth: Optional[int] = None) -> Optional[DirectedComb]:
    """A comb prefix with k teeth satisfying u, or None if none exists in the window.

    For a lazy family host the search runs inside the depth-d window; for a
    finite digraph it is exact. Spines are enumerated exhaustively in id
    order and the first success is returned.
    """
    if k < 1:
        raise ValueError("tooth count must be at least 1")
    if isinstance(host, Digraph):
        d = host
    else:
        if depth is None:
            raise ValueError("a depth is required for lazy hosts")
        from .families import truncate
        d = truncate(host, depth).digraph
    pred = u if callable(u) else frozenset(u).__contains__
    u_set = frozenset(v for v in d.vertices if pred(v))
    if len(u_set) < k:
        return None

    def build(spine: list[int], teeth: list[tuple[int, ...]]) -> DirectedComb:
        spine_path = DirectedPath.in_digraph(d, spine)
        return DirectedComb(spine_path, tuple(DirectedPath(t) for t in teeth))

    def extend(spine: list[int], on_spine: set[int]) -> Optional[DirectedComb]:
        teeth = _max_disjoint_teeth(d, spine, u_set, k)
        if len(teeth) >= k:
            return build(spine, teeth[:k])
        for w in d.out_neighbors(spine[-1]):
            if w in on_spine:
                continue
            on_spine.add(w)
            spine.append(w)
            got = extend(spine, on_spine)
            if got is not None:
                return got
            spine.pop()
            on_spine.discard(w)
        return None

    for s in d.vertices:
        got = extend([s], {s})
        if got is not None:
            return got
    return None


# --- the existence construction ---------------------------------------------

@dataclass(frozen=True)
class JungStep:
    target: int
    start: int
    path: tuple[int, ...]
    tree_after: dict[int, int]
    order_after: tuple[int, ...]


@dataclass(frozen=True)
class JungBuild:
    tree: Arborescence
    order: LinearExtension
    steps: tuple[JungStep, ...] = ()


def _target_sequence(targets) -> tuple[int, ...]:
    if isinstance(targets, WellOrderedTargets):
        return targets.order
    return tuple(targets)


def jung_build(d: Digraph, r: int, targets, record_steps: bool = False) -> JungBuild:
    """Grow a normal arborescence from r that contains every target, in order.

    Each missing target u is attached along a tree-to-u path whose interior
    avoids the tree and whose starting vertex is maximal in the maintained
    sensitive order (ties: shortest path, then lexicographic); the new
    vertices are inserted as a block right after the starting vertex.
    """
    if r not in d:
        raise RootMissing(f"root {r} is not a vertex of the digraph")
    seq = _target_sequence(targets)
    reach = d.reachable_from(r)
    for u in seq:
        if u not in d or u not in reach:
            raise UnreachableTarget(u)

    parent: dict[int, int] = {}
    order: list[int] = [r]
    in_tree: set[int] = {r}
    steps: list[JungStep] = []
    for u in seq:
        if u in in_tree:
            continue
        attach = None
        for v in reversed(order):
            path = find_path(d, {v}, {u}, forbidden_interior=in_tree)
            if path is not None:
                attach = path
                break
        assert attach is not None, f"reachable target {u} admits no tree path"
        verts = attach.vertices
        for a, b in zip(verts, verts[1:]):
            parent[b] = a
        at = order.index(verts[0]) + 1
        order[at:at] = verts[1:]
        in_tree.update(verts[1:])
        if record_steps:
            steps.append(JungStep(u, verts[0], verts, dict(parent), tuple(order)))

    tree = Arborescence(r, parent)
    ext = LinearExtension.from_order(order)
    res = check_normal(d, tree)
    assert res.is_normal, f"construction produced a non-normal tree: {res.certificate}"
    violation = check_sensitive(d, tree, ext)
    assert violation is None, f"construction order is not sensitive: {violation}"
    return JungBuild(tree, ext, tuple(steps))


@dataclass(frozen=True)
class ReverseArborescence:
    """An arborescence of the reversed host: every vertex has a directed path to the root."""

    root: int
    parent: dict[int, int]

    def forward(self) -> Arborescence:
        return Arborescence(self.root, self.parent)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.parent) | {self.root}

    def edges_in_host(self) -> tuple[tuple[int, int], ...]:
        """Edges as they appear in the original digraph, child to parent."""
        return tuple(sorted((c, p) for c, p in self.parent.items()))


@dataclass(frozen=True)
class ReverseJungBuild:
    tree: ReverseArborescence
    order: LinearExtension
    steps: tuple[JungStep, ...] = ()


def reverse_jung_build(d: Digraph, r: int, targets,
                       record_steps: bool = False) -> ReverseJungBuild:
    """Run the construction on the reverse digraph; the result is a reverse
    arborescence into r, normal in d in the reversed sense."""
    rev = d.reverse()
    seq = _target_sequence(targets)
    if r not in d:
        raise RootMissing(f"root {r} is not a vertex of the digraph")
    reach = rev.reachable_from(r)
    for u in seq:
        if u not in d or u not in reach:
            raise UnreachableTarget(u)
    build = jung_build(rev, r, targets, record_steps)
    return ReverseJungBuild(ReverseArborescence(build.tree.root, dict(build.tree.parent)),
                            build.order, build.steps)
