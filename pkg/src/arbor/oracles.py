"""Brute-force oracles and corpus generation for cross-checking the library.

Everything here is exponential-time machinery meant for small instances: it
enumerates depth-first search runs, spanning arborescences, linear
extensions, simple paths and reachability partitions independently of the
main code paths, so that the two routes can be compared on shared inputs.
"""
from __future__ import annotations

import itertools
import random
from typing import Iterable, Iterator, Optional

from .arborescence import Arborescence, LinearExtension, _tpath_endpoints
from .digraph import Digraph


def all_digraphs(n: int) -> Iterator[Digraph]:
    """Every digraph on vertices 0..n-1 (all subsets of the ordered pairs)."""
    verts = tuple(range(n))
    pairs = [(v, w) for v in verts for w in verts if v != w]
    for mask in range(1 << len(pairs)):
        edges = tuple(p for i, p in enumerate(pairs) if mask >> i & 1)
        yield Digraph(verts, edges)


def complete_symmetric(n: int) -> Digraph:
    verts = tuple(range(n))
    edges = tuple(sorted((v, w) for v in verts for w in verts if v != w))
    return Digraph(verts, edges)


def spanning_arborescences(d: Digraph, root: int) -> Iterator[Arborescence]:
    """All spanning arborescences of d rooted at `root` (empty if none exist)."""
    others = [v for v in d.vertices if v != root]
    choices = [d.in_neighbors(v) for v in others]
    if any(not c for c in choices):
        return
    for combo in itertools.product(*choices):
        parent = dict(zip(others, combo))
        ok = True
        for start in others:
            seen = set()
            v = start
            while v != root:
                if v in seen:
                    ok = False
                    break
                seen.add(v)
                v = parent[v]
            if not ok:
                break
        if ok:
            yield Arborescence(root, parent)


def all_dfs_trees(d: Digraph, root: int) -> set:
    """Keys of every tree producible by some depth-first search run from root.

    The search branches over every choice of unvisited out-neighbor at every
    step, which covers all neighbor-exploration orders.
    """
    trees: set = set()

    def run(stack: list[int], visited: frozenset[int], parent: dict[int, int]) -> None:
        stack = list(stack)
        while stack:
            v = stack[-1]
            options = [w for w in d.out_neighbors(v) if w not in visited]
            if not options:
                stack.pop()
                continue
            for w in options:
                run(stack + [w], visited | {w}, {**parent, w: v})
            return
        trees.add((root, frozenset(parent.items())))

    run([root], frozenset([root]), {})
    return trees


def linear_extensions(t: Arborescence) -> Iterator[LinearExtension]:
    """All linear extensions of the tree order, by backtracking over minimal elements."""
    placed: list[int] = []
    pending_children = {v: set(t.children[v]) for v in t.vertices}
    available = {t.root}

    def backtrack() -> Iterator[LinearExtension]:
        if len(placed) == len(t.vertices):
            yield LinearExtension.from_order(placed)
            return
        for v in sorted(available):
            available.discard(v)
            placed.append(v)
            added = pending_children[v]
            available.update(added)
            yield from backtrack()
            available.difference_update(added)
            placed.pop()
            available.add(v)

    yield from backtrack()


def sensitive_extension_exists(d: Digraph, t: Arborescence) -> bool:
    """Whether some linear extension of the tree order is branch- and path-sensitive.

    Inlined fast check over all extensions; equivalent to running
    `is_sensitive` on each but without re-deriving the T-path table.
    """
    direct = _tpath_endpoints(d, t)
    verts = t.vertex_list
    pairs = [(a, b) for a in verts for b in verts if a < b and t.incomparable(a, b)]
    subtree = t.subtree
    for ext in linear_extensions(t):
        rank = ext.rank
        ok = True
        for a, b in pairs:
            v, w = (a, b) if rank[a] < rank[b] else (b, a)
            rw = rank[w]
            if any(rank[x] >= rw for x in subtree[v]):
                ok = False
                break
            if v in direct[w]:
                ok = False
                break
        if ok:
            return True
    return False


def all_simple_paths(d: Digraph, source: int, target: int) -> Iterator[tuple[int, ...]]:
    """Every simple directed path from source to target."""
    path = [source]
    on_path = {source}

    def extend() -> Iterator[tuple[int, ...]]:
        v = path[-1]
        if v == target:
            yield tuple(path)
            return
        for w in d.out_neighbors(v):
            if w in on_path:
                continue
            path.append(w)
            on_path.add(w)
            yield from extend()
            path.pop()
            on_path.discard(w)

    yield from extend()


def scc_bruteforce(d: Digraph, x: Iterable[int] = ()) -> set[frozenset[int]]:
    """Strong components of d minus x via pairwise reachability."""
    xs = frozenset(x)
    keep = [v for v in d.vertices if v not in xs]
    reach: dict[int, frozenset[int]] = {}
    for v in keep:
        seen = {v}
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in d.out_neighbors(u):
                if w not in xs and w not in seen:
                    seen.add(w)
                    frontier.append(w)
        reach[v] = frozenset(seen)
    comps = set()
    for v in keep:
        comps.add(frozenset(w for w in keep if w in reach[v] and v in reach[w]))
    return comps


# --- corpus generation -----------------------------------------------------

def random_digraph(rng: random.Random, n: int, p: float) -> Digraph:
    verts = tuple(range(n))
    edges = tuple(sorted((v, w) for v in verts for w in verts
                         if v != w and rng.random() < p))
    return Digraph(verts, edges)


def random_arborescence_in(rng: random.Random, d: Digraph, root: int,
                           spanning: bool) -> Optional[Arborescence]:
    """A random arborescence whose tree edges lie in d, grown from root.

    With spanning=True the whole reachable set is covered (None when the
    root reaches nothing... a single vertex tree is still returned); with
    spanning=False growth stops early, leaving room for longer T-paths.
    """
    reach = d.reachable_from(root)
    parent: dict[int, int] = {}
    in_tree = {root}
    frontier = [(v, w) for v in in_tree for w in d.out_neighbors(v) if w not in in_tree]
    while frontier:
        if not spanning and len(in_tree) > 1 and rng.random() < 0.3:
            break
        v, w = rng.choice(frontier)
        parent[w] = v
        in_tree.add(w)
        frontier = [(a, b) for a in in_tree for b in d.out_neighbors(a) if b not in in_tree]
    if spanning and in_tree != reach:
        return None
    return Arborescence(root, parent)


def corpus(seed: int = 0, count: int = 120, max_n: int = 7) -> list[tuple[Digraph, Arborescence]]:
    """Deterministic mixed corpus of (digraph, arborescence) instances.

    Mixes DFS-built trees (always normal), random parent choices (often not
    normal) and non-spanning trees (exercising T-paths with interior
    vertices), plus a few handcrafted instances.
    """
    rng = random.Random(seed)
    instances: list[tuple[Digraph, Arborescence]] = []

    star_host = Digraph((0, 1, 2), ((0, 1), (0, 2), (1, 2)))
    instances.append((star_host, Arborescence(0, {1: 0, 2: 0})))
    two_cycle_host = Digraph((0, 1, 2), ((0, 1), (0, 2), (1, 2), (2, 1)))
    instances.append((two_cycle_host, Arborescence(0, {1: 0, 2: 0})))
    chain_cycle = Digraph((0, 1, 2, 3), ((0, 1), (1, 2), (0, 3), (2, 3), (3, 1)))
    instances.append((chain_cycle, Arborescence(0, {1: 0, 2: 1, 3: 0})))
    detour = Digraph((0, 1, 2, 3), ((0, 1), (0, 2), (1, 3), (3, 2)))
    instances.append((detour, Arborescence(0, {1: 0, 2: 0})))

    while len(instances) < count:
        n = rng.randint(2, max_n)
        d = random_digraph(rng, n, rng.uniform(0.2, 0.7))
        root = rng.randrange(n)
        style = rng.random()
        if style < 0.4:
            priority = list(range(n))
            rng.shuffle(priority)
            from .arborescence import dfs_build
            t = dfs_build(d, root, priority)
        else:
            t = random_arborescence_in(rng, d, root, spanning=style < 0.7)
            if t is None:
                continue
        instances.append((d, t))
    return instances
