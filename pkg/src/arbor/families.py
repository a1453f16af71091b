"""Finitely presented infinite digraph families with end oracles.

Each family enumerates its vertices (the enumeration index is the vertex
id), exposes computable in/out neighborhoods, and declares its ends through
representative-ray tracers plus any limit edges. Finite analysis happens on
truncation windows: the induced digraph on the first d enumerated vertices
plus a slack pad, probed against the canonical separator tower
X_n = {0, ..., n-1}.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence, Union

from .arborescence import Arborescence, check_normal
from .digraph import Digraph, SCCPartition, strong_components


class FamilyError(ValueError):
    pass


class UnknownFamily(FamilyError):
    pass


class BadParameters(FamilyError):
    pass


class UnknownEnd(FamilyError):
    pass


class NotATree(FamilyError):
    pass


class NoNecklaceInWindow(FamilyError):
    pass


class NotNormalAtDepth(FamilyError):
    pass


@dataclass(frozen=True)
class LimitEdgeDecl:
    """A declared limit edge; endpoints are ('end', name) or ('vertex', id)."""

    tail: tuple[str, object]
    head: tuple[str, object]

    def is_end_end(self) -> bool:
        return self.tail[0] == "end" and self.head[0] == "end"


@dataclass(frozen=True)
class EndOracle:
    """Ground truth for a family at a working depth: ends, rays, limit edges."""

    ends: tuple[str, ...]
    limit_edges: tuple[LimitEdgeDecl, ...]
    depth: int


class LazyFamily:
    """Base class for catalog families; vertex ids are enumeration indices."""

    name: str = "?"
    declared_solid: bool = False
    max_link_length: int = 1
    component_bound: int = 4  # cap on window component counts for solid families

    def __init__(self, params: Optional[dict] = None, build_depth: int = 20):
        self.params = dict(params or {})
        self.build_depth = build_depth

    # -- vertex universe --
    def size(self) -> Optional[int]:
        return None

    @property
    def slack(self) -> int:
        return 2 * max(self.max_link_length, 2)

    def label(self, i: int) -> str:
        raise NotImplementedError

    def out_within(self, i: int, bound: int) -> list[int]:
        raise NotImplementedError

    def in_within(self, i: int, bound: int) -> list[int]:
        raise NotImplementedError

    def out_clipped(self, i: int, bound: int) -> bool:
        raise NotImplementedError

    def in_clipped(self, i: int, bound: int) -> bool:
        raise NotImplementedError

    # -- ends --
    def ends_in_window(self, depth: int) -> tuple[str, ...]:
        return ()

    def ray_vertex(self, end: str, j: int) -> int:
        raise UnknownEnd(f"family {self.name} has no end {end!r}")

    def sym_ray_vertex(self, end: str, j: int) -> int:
        return self.ray_vertex(end, j)

    def limit_edges(self) -> tuple[LimitEdgeDecl, ...]:
        return ()

    # -- canonical arborescence presentation --
    def has_canonical_tree(self) -> bool:
        return False

    def parent_of(self, i: int) -> Optional[int]:
        raise BadParameters(f"family {self.name} has no canonical arborescence")

    def tree_ray_names(self, depth: int) -> tuple[str, ...]:
        return ()

    def tree_ray_vertex(self, name: str, j: int) -> int:
        raise UnknownEnd(f"no tree ray {name!r}")

    # -- oracle --
    def oracle_at(self, depth: int) -> EndOracle:
        return EndOracle(self.ends_in_window(depth), self.limit_edges(), depth)

    @property
    def oracle(self) -> EndOracle:
        return self.oracle_at(self.build_depth)


class SymmetricRay(LazyFamily):
    """One two-way infinite ray: vertices v0, v1, ... with edges vi <-> vi+1."""

    name = "symmetric_ray"
    declared_solid = True
    component_bound = 3

    def label(self, i):
        return f"v{i}"

    def out_within(self, i, bound):
        return [j for j in (i - 1, i + 1) if 0 <= j < bound]

    in_within = out_within

    def out_clipped(self, i, bound):
        return i + 1 >= bound

    in_clipped = out_clipped

    def ends_in_window(self, depth):
        return ("omega",)

    def ray_vertex(self, end, j):
        if end != "omega":
            raise UnknownEnd(end)
        return j

    def has_canonical_tree(self):
        return True

    def parent_of(self, i):
        return None if i == 0 else i - 1

    def tree_ray_names(self, depth):
        return ("spine",)

    def tree_ray_vertex(self, name, j):
        if name != "spine":
            raise UnknownEnd(name)
        return j


class DirectedLadder(LazyFamily):
    """Two symmetric rays a, b with one-way rungs a_i -> b_i; ids a_i=2i, b_i=2i+1."""

    name = "directed_ladder"
    declared_solid = True
    component_bound = 4

    def label(self, i):
        return f"a{i // 2}" if i % 2 == 0 else f"b{i // 2}"

    def out_within(self, i, bound):
        if i % 2 == 0:
            cand = [i - 2, i + 1, i + 2]
        else:
            cand = [i - 2, i + 2]
        return sorted(j for j in cand if 0 <= j < bound)

    def in_within(self, i, bound):
        if i % 2 == 0:
            cand = [i - 2, i + 2]
        else:
            cand = [i - 2, i - 1, i + 2]
        return sorted(j for j in cand if 0 <= j < bound)

    def out_clipped(self, i, bound):
        return i + 2 >= bound

    in_clipped = out_clipped

    def ends_in_window(self, depth):
        return ("a", "b")

    def ray_vertex(self, end, j):
        if end == "a":
            return 2 * j
        if end == "b":
            return 2 * j + 1
        raise UnknownEnd(end)

    def limit_edges(self):
        return (LimitEdgeDecl(("end", "a"), ("end", "b")),)

    def has_canonical_tree(self):
        return True

    def parent_of(self, i):
        if i == 0:
            return None
        if i == 1:
            return 0
        return i - 2

    def tree_ray_names(self, depth):
        return ("a", "b")

    def tree_ray_vertex(self, name, j):
        if name == "a":
            return 2 * j
        if name == "b":
            return 0 if j == 0 else 2 * j - 1
        raise UnknownEnd(name)


class CombOfColumns(LazyFamily):
    """A one-way bottom ray b0 -> b1 -> ... with a symmetric column ray on each b_i.

    Enumeration interleaves three (base, first cell) pairs with one higher
    column cell (in diagonal order), so windows open a fresh column every
    couple of vertices while still exhausting every cell.
    """

    name = "comb_of_columns"
    declared_solid = False
    component_bound = 4

    @staticmethod
    def _base_id(m: int) -> int:
        return 7 * (m // 3) + 2 * (m % 3)

    @staticmethod
    def _cell_id(c: int, k: int) -> int:
        # k >= 2; cells are enumerated along diagonals of constant c + k
        s = c + k
        j = (s - 1) * (s - 2) // 2 + c + 1
        return 7 * j - 1

    @staticmethod
    def _decode(i: int) -> tuple:
        r = i % 7
        if r == 6:
            j = i // 7 + 1
            s = 2
            while s * (s - 1) // 2 < j:
                s += 1
            c = j - (s - 1) * (s - 2) // 2 - 1
            return ("v", c, s - c)
        m = 3 * (i // 7) + r // 2
        return ("b", m) if r % 2 == 0 else ("v", m, 1)

    def label(self, i):
        kind = self._decode(i)
        if kind[0] == "b":
            return f"b{kind[1]}"
        return f"v{kind[1]},{kind[2]}"

    def _column_vertex(self, c: int, k: int) -> int:
        if k == 0:
            return self._base_id(c)
        if k == 1:
            return self._base_id(c) + 1
        return self._cell_id(c, k)

    def _neighbors(self, i: int) -> tuple[list[int], list[int]]:
        kind = self._decode(i)
        if kind[0] == "b":
            m = kind[1]
            out = [self._base_id(m + 1), self._column_vertex(m, 1)]
            ins = [self._column_vertex(m, 1)]
            if m > 0:
                ins.append(self._base_id(m - 1))
            return out, ins
        _, c, k = kind
        both = [self._column_vertex(c, k - 1), self._column_vertex(c, k + 1)]
        return both, list(both)

    def out_within(self, i, bound):
        return sorted(j for j in self._neighbors(i)[0] if j < bound)

    def in_within(self, i, bound):
        return sorted(j for j in self._neighbors(i)[1] if j < bound)

    def out_clipped(self, i, bound):
        return any(j >= bound for j in self._neighbors(i)[0])

    def in_clipped(self, i, bound):
        return any(j >= bound for j in self._neighbors(i)[1])

    def _columns_open(self, depth: int) -> int:
        m = 0
        while self._base_id(m) < depth:
            m += 1
        return m

    def ends_in_window(self, depth):
        return tuple(f"col{m}" for m in range(self._columns_open(depth)))

    def ray_vertex(self, end, j):
        if not end.startswith("col"):
            raise UnknownEnd(end)
        c = int(end[3:])
        return self._column_vertex(c, j)

    def has_canonical_tree(self):
        return True

    def parent_of(self, i):
        if i == 0:
            return None
        kind = self._decode(i)
        if kind[0] == "b":
            return self._base_id(kind[1] - 1)
        _, c, k = kind
        return self._column_vertex(c, k - 1)

    def tree_ray_names(self, depth):
        return ("bottom",) + tuple(f"col{m}" for m in range(self._columns_open(depth)))

    def tree_ray_vertex(self, name, j):
        if name == "bottom":
            return self._base_id(j)
        if name.startswith("col"):
            c = int(name[3:])
            return self._base_id(j) if j <= c else self._column_vertex(c, j - c)
        raise UnknownEnd(name)


class ApexNecklace(LazyFamily):
    """A symmetric ray v0, v1, ... plus an apex u with edges u -> v_i for every i.

    Ids: 0 is the apex, i+1 is v_i. The apex has infinite out-degree; its
    neighbors are enumerated lazily per window.
    """

    name = "apex_necklace"
    declared_solid = True
    component_bound = 3

    def label(self, i):
        return "u" if i == 0 else f"v{i - 1}"

    def out_within(self, i, bound):
        if i == 0:
            return list(range(1, bound))
        cand = [i - 1, i + 1]
        return sorted(j for j in cand if 1 <= j < bound)

    def in_within(self, i, bound):
        if i == 0:
            return []
        cand = {0, i + 1}
        if i >= 2:
            cand.add(i - 1)
        return sorted(j for j in cand if j < bound)

    def out_clipped(self, i, bound):
        return True if i == 0 else i + 1 >= bound

    def in_clipped(self, i, bound):
        return False if i == 0 else i + 1 >= bound

    def ends_in_window(self, depth):
        return ("omega",)

    def ray_vertex(self, end, j):
        if end != "omega":
            raise UnknownEnd(end)
        return j + 1

    def limit_edges(self):
        return (LimitEdgeDecl(("vertex", 0), ("end", "omega")),)

    def has_canonical_tree(self):
        return True

    def parent_of(self, i):
        return None if i == 0 else i - 1

    def tree_ray_names(self, depth):
        return ("spine",)

    def tree_ray_vertex(self, name, j):
        if name != "spine":
            raise UnknownEnd(name)
        return j


class TransitiveOmega(LazyFamily):
    """The natural numbers with an edge i -> j whenever i < j; no solid rays at all."""

    name = "transitive_omega"
    declared_solid = False
    component_bound = 4

    def label(self, i):
        return str(i)

    def out_within(self, i, bound):
        return list(range(i + 1, bound))

    def in_within(self, i, bound):
        return list(range(0, min(i, bound)))

    def out_clipped(self, i, bound):
        return True

    def in_clipped(self, i, bound):
        return False

    def has_canonical_tree(self):
        return True

    def parent_of(self, i):
        return None if i == 0 else 0


class InfiniteStar(LazyFamily):
    """A root with infinitely many out-leaves; tree-shaped helper for star-comb runs."""

    name = "infinite_star"
    declared_solid = False
    component_bound = 4

    def label(self, i):
        return "c" if i == 0 else f"l{i - 1}"

    def out_within(self, i, bound):
        return list(range(1, bound)) if i == 0 else []

    def in_within(self, i, bound):
        return [] if i == 0 else [0]

    def out_clipped(self, i, bound):
        return i == 0

    def in_clipped(self, i, bound):
        return False

    def has_canonical_tree(self):
        return True

    def parent_of(self, i):
        return None if i == 0 else 0


class FiniteFamily(LazyFamily):
    """A finite digraph embedded as a (trivially solid) family; it has no ends."""

    name = "finite"
    declared_solid = True

    def __init__(self, digraph: Digraph, params: Optional[dict] = None, build_depth: int = 20):
        super().__init__(params, build_depth)
        if tuple(digraph.vertices) != tuple(range(digraph.n)):
            raise BadParameters("embedded digraph needs dense ids 0..n-1")
        self.digraph = digraph
        self.component_bound = max(4, digraph.n)

    def size(self):
        return self.digraph.n

    def label(self, i):
        return self.digraph.label(i)

    def out_within(self, i, bound):
        return [j for j in self.digraph.out_neighbors(i) if j < bound]

    def in_within(self, i, bound):
        return [j for j in self.digraph.in_neighbors(i) if j < bound]

    def out_clipped(self, i, bound):
        return any(j >= bound for j in self.digraph.out_neighbors(i))

    def in_clipped(self, i, bound):
        return any(j >= bound for j in self.digraph.in_neighbors(i))


_CATALOG = {
    "symmetric_ray": SymmetricRay,
    "directed_ladder": DirectedLadder,
    "comb_of_columns": CombOfColumns,
    "apex_necklace": ApexNecklace,
    "transitive_omega": TransitiveOmega,
    "infinite_star": InfiniteStar,
}


def family_build(spec) -> LazyFamily:
    """Instantiate a catalog family from its spec (name, dict, or JSON text)."""
    if isinstance(spec, (str, bytes)):
        text = spec.decode() if isinstance(spec, bytes) else spec
        if text.strip().startswith("{"):
            spec = json.loads(text)
        else:
            spec = {"family": text}
    if not isinstance(spec, dict) or "family" not in spec:
        raise BadParameters("family spec needs a 'family' name")
    name = spec["family"]
    params = spec.get("params") or {}
    depth = spec.get("depth", 20)
    if not isinstance(depth, int) or depth < 1:
        raise BadParameters(f"depth must be a positive integer, got {depth!r}")
    if name == "finite":
        if "digraph" not in params:
            raise BadParameters("finite family needs params['digraph']")
        from .digraph import load_digraph
        d = params["digraph"]
        return FiniteFamily(d if isinstance(d, Digraph) else load_digraph(d),
                            params, depth)
    if name not in _CATALOG:
        raise UnknownFamily(f"unknown family {name!r}")
    if name != "finite" and params:
        raise BadParameters(f"family {name!r} takes no parameters")
    return _CATALOG[name]({}, depth)


# --- truncation -------------------------------------------------------------

@dataclass(frozen=True)
class Truncation:
    """A padded finite window of a family plus its clipped boundary."""

    family: LazyFamily
    depth: int
    bound: int
    digraph: Digraph
    boundary: frozenset[int]

    @property
    def core(self) -> Digraph:
        """The window without the slack pad."""
        return self.digraph.induced(range(min(self.depth, self.bound)))

    def separator(self, n: int) -> frozenset[int]:
        return frozenset(range(min(n, self.bound)))


def truncate(f: LazyFamily, depth: int) -> Truncation:
    if depth < 1:
        raise BadParameters("depth must be at least 1")
    bound = depth + f.slack
    if f.size() is not None:
        bound = min(bound, f.size())
    edges = []
    boundary = set()
    for i in range(bound):
        for j in f.out_within(i, bound):
            edges.append((i, j))
        if f.out_clipped(i, bound) or f.in_clipped(i, bound):
            boundary.add(i)
    names = {i: lab for i in range(bound) if (lab := f.label(i)) != str(i)}
    window = Digraph.build(range(bound), edges, names)
    return Truncation(f, depth, bound, window, frozenset(boundary))


def canonical_arborescence(f: LazyFamily, bound: int) -> Arborescence:
    """The family's canonical spanning arborescence restricted to the window."""
    if not f.has_canonical_tree():
        raise BadParameters(f"family {f.name} has no canonical arborescence")
    parent = {}
    for i in range(bound):
        p = f.parent_of(i)
        if p is not None:
            if p >= bound:
                raise BadParameters(f"canonical parent of {i} lies outside the window")
            parent[i] = p
    return Arborescence(0, parent)


def ray_in_window(f: LazyFamily, end: str, bound: int,
                  tracer: Optional[Callable[[str, int], int]] = None) -> tuple[int, ...]:
    """The in-window prefix of an end's representative ray (tracer ids increase)."""
    get = tracer or f.ray_vertex
    out = []
    j = 0
    while True:
        v = get(end, j)
        if out and v <= out[-1]:
            raise AssertionError(f"ray tracer for {end!r} must have increasing ids")
        if v >= bound:
            break
        out.append(v)
        j += 1
    return tuple(out)


def tail_component(scc: SCCPartition, ray_verts: Sequence[int],
                   x: frozenset[int]) -> tuple[Optional[int], bool]:
    """Component of the deepest surviving ray tail, plus whether the whole
    surviving suffix sits in one component."""
    suffix = []
    for v in reversed(ray_verts):
        if v in x:
            break
        suffix.append(v)
    if not suffix:
        return None, True
    comps = {scc.component_of[v] for v in suffix}
    return scc.component_of[suffix[0]], len(comps) == 1


def _as_predicate(u) -> Callable[[int], bool]:
    if callable(u):
        return u
    return frozenset(u).__contains__


# --- component towers and end approximation ---------------------------------

@dataclass(frozen=True)
class EndsReport:
    depth: int
    ns: tuple[int, ...]
    ends: tuple[str, ...]
    distinct_counts: dict[int, int]
    thread_count: int
    stabilization_depth: Optional[int]
    agrees_with_oracle: bool
    approximate_ends: tuple[str, ...]
    tails: dict[tuple[str, int], Optional[int]]
    coherent: bool
    component_counts: dict[int, int]

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "separators": list(self.ns),
            "ends": list(self.ends),
            "distinct_tail_components": {str(n): c for n, c in self.distinct_counts.items()},
            "component_counts": {str(n): c for n, c in self.component_counts.items()},
            "thread_count": self.thread_count,
            "stabilization_depth": self.stabilization_depth,
            "agrees_with_oracle": self.agrees_with_oracle,
            "approximate_ends": list(self.approximate_ends),
        }


def ends_approx(f: LazyFamily, depth: int, n_max: Optional[int] = None) -> EndsReport:
    """Strong-component tower of the window, threaded by the oracle's ray tails."""
    tr = truncate(f, depth)
    ns = tuple(range((n_max if n_max is not None else depth) + 1))
    ends = f.ends_in_window(depth)
    rays = {e: ray_in_window(f, e, tr.bound) for e in ends}
    tails: dict[tuple[str, int], Optional[int]] = {}
    coherent = True
    distinct_counts: dict[int, int] = {}
    component_counts: dict[int, int] = {}
    sccs: dict[int, SCCPartition] = {}
    for n in ns:
        x = tr.separator(n)
        scc = strong_components(tr.digraph, x)
        sccs[n] = scc
        component_counts[n] = len(scc.components)
        seen = set()
        for e in ends:
            comp, ok = tail_component(scc, rays[e], x)
            tails[(e, n)] = comp
            coherent = coherent and ok
            if comp is not None:
                seen.add(comp)
        distinct_counts[n] = len(seen)

    separated: set[tuple[str, str]] = set()
    for i, e1 in enumerate(ends):
        for e2 in ends[i + 1:]:
            for n in ns:
                c1, c2 = tails[(e1, n)], tails[(e2, n)]
                if c1 is not None and c2 is not None and c1 != c2:
                    separated.add((e1, e2))
                    break
    # threads: transitive closure of "never separated"
    cls = {e: i for i, e in enumerate(ends)}
    for e1, e2 in [(a, b) for i, a in enumerate(ends) for b in ends[i + 1:]
                   if (a, b) not in separated]:
        old, new = cls[e2], cls[e1]
        for e in cls:
            if cls[e] == old:
                cls[e] = new
    thread_count = len(set(cls.values()))

    final = max(distinct_counts.values(), default=0)
    stabilization = next((n for n in ns if distinct_counts[n] == final), None)
    approx = []
    for e in ends:
        defined = [n for n in ns if tails[(e, n)] is not None]
        if not defined:
            approx.append(e)
            continue
        last = max(defined)
        comp = sccs[last].components[tails[(e, last)]]
        if comp & tr.boundary:
            approx.append(e)
    return EndsReport(depth, ns, ends, distinct_counts, thread_count, stabilization,
                      thread_count == len(ends), tuple(approx), tails, coherent,
                      component_counts)


def closure_contains(f: LazyFamily, u, end: str, depth: int,
                     n_max: Optional[int] = None) -> bool:
    """Whether every tested component housing the end meets the vertex set u."""
    if end not in f.ends_in_window(depth):
        raise UnknownEnd(f"{end!r} is not an oracle end of {f.name} at depth {depth}")
    pred = _as_predicate(u)
    tr = truncate(f, depth)
    ray = ray_in_window(f, end, tr.bound)
    for n in range((n_max if n_max is not None else depth) + 1):
        x = tr.separator(n)
        scc = strong_components(tr.digraph, x)
        comp, _ = tail_component(scc, ray, x)
        if comp is None:
            continue
        if not any(pred(v) for v in scc.components[comp]):
            return False
    return True


def solidity_check(f: LazyFamily, depth: int) -> dict:
    """Window component counts per separator against the family's declared bound."""
    tr = truncate(f, depth)
    counts = {}
    for n in range(depth + 1):
        counts[n] = len(strong_components(tr.digraph, tr.separator(n)).components)
    worst = max(counts.values())
    return {"counts": counts, "worst": worst, "bound": f.component_bound,
            "within_bound": worst <= f.component_bound}


# --- end-faithfulness --------------------------------------------------------

@dataclass(frozen=True)
class RayTrace:
    end: str
    vertices: tuple[int, ...]
    exists: bool
    ambiguous_at: Optional[tuple[int, tuple[int, ...]]]


@dataclass(frozen=True)
class FaithfulReport:
    depth: int
    ends: tuple[str, ...]
    rays: dict[str, RayTrace]
    ambiguous_events: tuple[tuple[str, int], ...]
    separations: dict[tuple[str, str], bool]

    @property
    def ok(self) -> bool:
        return (not self.ambiguous_events
                and all(r.exists for r in self.rays.values())
                and all(self.separations.values()))

    def to_json_dict(self) -> dict:
        return {
            "depth": self.depth,
            "ends": list(self.ends),
            "rays": {e: {"vertices": list(r.vertices), "exists": r.exists,
                         "ambiguous": r.ambiguous_at is not None}
                     for e, r in self.rays.items()},
            "ambiguous_events": [list(ev) for ev in self.ambiguous_events],
            "separations": {f"{a}|{b}": v for (a, b), v in self.separations.items()},
            "ok": self.ok,
        }


def end_faithful_check(f: LazyFamily, u, depth: int,
                       n_max: Optional[int] = None) -> FaithfulReport:
    """Trace one normal ray per oracle end in the closure of u, checking uniqueness.

    At every tree vertex the qualifying children are those whose window
    subtree meets the end's component for every tested separator; two
    qualifying children constitute an ambiguity violation. Distinct traced
    rays must be separated by deleting their common prefix.
    """
    tr = truncate(f, depth)
    t = canonical_arborescence(f, tr.bound)
    res = check_normal(tr.digraph, t)
    if not res.is_normal:
        raise NotNormalAtDepth(
            f"{f.name} canonical arborescence not normal at depth {depth}: "
            f"{list(res.certificate.vertices)}")
    pred = _as_predicate(u)
    ns = tuple(range((n_max if n_max is not None else depth) + 1))
    sccs = {n: strong_components(tr.digraph, tr.separator(n)) for n in ns}

    ends = []
    targets: dict[str, list[frozenset[int]]] = {}
    deepest: dict[str, tuple[int, int]] = {}
    for e in f.ends_in_window(depth):
        ray = ray_in_window(f, e, tr.bound)
        comps = []
        in_closure = True
        last = None
        for n in ns:
            comp, _ = tail_component(sccs[n], ray, tr.separator(n))
            if comp is None:
                continue
            members = sccs[n].components[comp]
            if not any(pred(v) for v in members):
                in_closure = False
                break
            comps.append(members)
            last = (n, comp)
        if in_closure and last is not None:
            ends.append(e)
            targets[e] = comps
            deepest[e] = last

    rays: dict[str, RayTrace] = {}
    ambiguous: list[tuple[str, int]] = []
    for e in ends:
        v = t.root
        trace = [v]
        amb = None
        while True:
            qual = [c for c in t.children[v]
                    if all(not t.subtree[c].isdisjoint(members) for members in targets[e])]
            if not qual:
                break
            if len(qual) > 1:
                amb = (v, tuple(qual))
                ambiguous.append((e, v))
                break
            v = qual[0]
            trace.append(v)
        n_last, comp_last = deepest[e]
        exists = amb is None and trace[-1] in sccs[n_last].components[comp_last]
        rays[e] = RayTrace(e, tuple(trace), exists, amb)

    separations: dict[tuple[str, str], bool] = {}
    for i, e1 in enumerate(ends):
        for e2 in ends[i + 1:]:
            r1, r2 = rays[e1].vertices, rays[e2].vertices
            shared = 0
            while shared < min(len(r1), len(r2)) and r1[shared] == r2[shared]:
                shared += 1
            if shared == len(r1) or shared == len(r2):
                separations[(e1, e2)] = False  # one trace is a prefix of the other
                continue
            x = frozenset(r1[:shared])
            scc = strong_components(tr.digraph, x)
            separations[(e1, e2)] = (scc.component_of[r1[-1]] != scc.component_of[r2[-1]])
    return FaithfulReport(depth, tuple(ends), rays, tuple(ambiguous), separations)


# --- star-comb extraction ----------------------------------------------------

@dataclass(frozen=True)
class StarCombResult:
    kind: str  # "comb" | "star" | "exhausted"
    spine: Optional[tuple[int, ...]] = None
    paths: tuple[tuple[int, ...], ...] = ()
    center: Optional[int] = None

    @property
    def teeth(self) -> tuple[int, ...]:
        return tuple(p[-1] for p in self.paths)


def star_comb(f: LazyFamily, w, k: int, depth: int) -> StarCombResult:
    """On a tree-shaped family, extract a k-tooth comb prefix or a k-leaf
    subdivided-star prefix with ends in w, searching the depth window."""
    if k < 1:
        raise ValueError("k must be at least 1")
    tr = truncate(f, depth)
    d = tr.digraph
    und: dict[int, set[int]] = {v: set() for v in d.vertices}
    for a, b in d.edges:
        und[a].add(b)
        und[b].add(a)
    edge_count = sum(len(s) for s in und.values()) // 2
    if edge_count != d.n - 1:
        raise NotATree(f"window of {f.name} is not a tree")
    parent: dict[int, int] = {}
    order = [0]
    seen = {0}
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        for c in sorted(und[v]):
            if c not in seen:
                seen.add(c)
                parent[c] = v
                order.append(c)
    if len(seen) != d.n:
        raise NotATree(f"window of {f.name} is not connected")
    children: dict[int, list[int]] = {v: [] for v in d.vertices}
    for c, p in parent.items():
        children[p].append(c)
    pred = _as_predicate(w)
    wcount: dict[int, int] = {}
    for v in reversed(order):
        wcount[v] = (1 if pred(v) else 0) + sum(wcount[c] for c in children[v])

    def descend_to_w(start: int, entry: int) -> tuple[int, ...]:
        # shortest tree path from start into entry's subtree ending at a w-vertex
        path = [start, entry]
        v = entry
        while not pred(v):
            v = min((c for c in children[v] if wcount[c] > 0),
                    key=lambda c: (-wcount[c], c))
            path.append(v)
        return tuple(path)

    spine: list[int] = []
    teeth: list[tuple[int, ...]] = []
    v = 0
    while True:
        spine.append(v)
        branches = sorted(c for c in children[v] if wcount[c] > 0)
        if len(branches) >= k:
            paths = tuple(descend_to_w(v, c) for c in branches[:k])
            return StarCombResult("star", center=v, paths=paths)
        harvested = False
        if pred(v):
            teeth.append((v,))  # a spine vertex is its own (trivial) tooth
            harvested = True
        if len(teeth) >= k:
            return StarCombResult("comb", spine=tuple(spine), paths=tuple(teeth[:k]))
        if not branches:
            return StarCombResult("exhausted")
        go = max(branches, key=lambda c: (wcount[c], -c))
        if not harvested:
            side = [c for c in branches if c != go]
            if side:
                teeth.append(descend_to_w(v, side[0]))
        if len(teeth) >= k:
            return StarCombResult("comb", spine=tuple(spine), paths=tuple(teeth[:k]))
        v = go


# --- necklace prefixes -------------------------------------------------------

@dataclass(frozen=True)
class NecklacePrefix:
    end: str
    beads: tuple[frozenset[int], ...]
    links: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    apex_edges: Optional[tuple[tuple[int, int], ...]] = None

    def to_json_dict(self) -> dict:
        doc = {
            "end": self.end,
            "beads": [sorted(b) for b in self.beads],
            "links": [[list(fw), list(bw)] for fw, bw in self.links],
        }
        if self.apex_edges is not None:
            doc["apex_edges"] = [list(e) for e in self.apex_edges]
        return doc


def necklace_prefix(f: LazyFamily, end: str, k: int, depth: int) -> NecklacePrefix:
    """First k beads of a necklace representing the end inside the window.

    The catalog ends carry symmetric-ray tails, so singleton beads along the
    symmetric tracer suffice; for families declaring a vertex-to-end limit
    edge the apex must send an edge into every returned bead.
    """
    if end not in f.ends_in_window(depth):
        raise UnknownEnd(f"{end!r} is not an oracle end of {f.name} at depth {depth}")
    tr = truncate(f, depth)
    verts = ray_in_window(f, end, tr.bound, tracer=f.sym_ray_vertex)
    if len(verts) < k:
        raise NoNecklaceInWindow(
            f"only {len(verts)} symmetric-ray vertices in the window, need {k}")
    beads = verts[:k]
    links = []
    for a, b in zip(beads, beads[1:]):
        if not (tr.digraph.has_edge(a, b) and tr.digraph.has_edge(b, a)):
            raise NoNecklaceInWindow(f"missing symmetric link between {a} and {b}")
        links.append(((a, b), (b, a)))
    apex_edges = None
    for decl in f.limit_edges():
        if decl.tail[0] == "vertex" and decl.head == ("end", end):
            apex = decl.tail[1]
            edges = []
            for bead in beads:
                if not tr.digraph.has_edge(apex, bead):
                    raise NoNecklaceInWindow(
                        f"declared apex {apex} sends no edge into bead {bead}")
                edges.append((apex, bead))
            apex_edges = tuple(edges)
    return NecklacePrefix(end, tuple(frozenset({b}) for b in beads),
                          tuple(links), apex_edges)
