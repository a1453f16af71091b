"""Solidification, end maps, limit-edge correspondence and horizon reflection.

The horizon of a digraph is treated as a combinatorial graph: its ends plus
the limit edges between them. For a family with a canonical normal
arborescence presentation, the tree's horizon is the horizon of the
solidified normal assistant, with ends realized as tree-ray threads through
the window's component towers. Reflection is checked through its finite
proxies: bijectivity of the end maps, arc correspondence, and separator
witnesses in both directions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Union

from .arborescence import Arborescence, NormalAssistant, check_normal
from .digraph import Digraph, SCCPartition, UnknownVertex, strong_components
from .families import (
    FamilyError,
    LazyFamily,
    NotNormalAtDepth,
    Truncation,
    canonical_arborescence,
    end_faithful_check,
    ray_in_window,
    tail_component,
    truncate,
)


class NotSolidFamily(FamilyError):
    pass


class NoWitnessInWindow(FamilyError):
    pass


def solidify(g: Digraph, t: Union[Arborescence, NormalAssistant]) -> Digraph:
    """Add the reverse of every tree edge of t to g.

    For a normal assistant only the base tree edges are reversed; the added
    incomparable-pair edges stay one-way.
    """
    base = t.base if isinstance(t, NormalAssistant) else t
    for v in base.vertices:
        if v not in g:
            raise UnknownVertex(v)
    edges = set(g.edges)
    if isinstance(t, NormalAssistant):
        edges |= set(t.edges())
    else:
        edges |= set(base.tree_edges())
    edges |= {(c, p) for p, c in base.tree_edges()}
    return Digraph.build(g.vertices, sorted(edges), g.names)


@dataclass
class HorizonContext:
    """Shared per-depth scaffolding: window, canonical tree, assistant, solidification."""

    family: LazyFamily
    depth: int
    truncation: Truncation
    tree: Arborescence
    assistant: NormalAssistant
    hbar: Digraph
    ns: tuple[int, ...]

    @property
    def host(self) -> Digraph:
        return self.truncation.digraph

    @cached_property
    def host_sccs(self) -> dict[int, SCCPartition]:
        return {n: strong_components(self.host, self.truncation.separator(n))
                for n in self.ns}

    @cached_property
    def hbar_sccs(self) -> dict[int, SCCPartition]:
        return {n: strong_components(self.hbar, self.truncation.separator(n))
                for n in self.ns}

    @cached_property
    def end_rays(self) -> dict[str, tuple[int, ...]]:
        return {e: ray_in_window(self.family, e, self.truncation.bound)
                for e in self.family.ends_in_window(self.depth)}

    @cached_property
    def tree_rays(self) -> dict[str, tuple[int, ...]]:
        return {name: ray_in_window(self.family, name, self.truncation.bound,
                                    tracer=self.family.tree_ray_vertex)
                for name in self.family.tree_ray_names(self.depth)}


def build_context(f: LazyFamily, depth: int, n_max: Optional[int] = None) -> HorizonContext:
    tr = truncate(f, depth)
    t = canonical_arborescence(f, tr.bound)
    res = check_normal(tr.digraph, t)
    if not res.is_normal:
        raise NotNormalAtDepth(
            f"{f.name} canonical arborescence not normal at depth {depth}")
    hbar = solidify(res.assistant.as_digraph(), res.assistant)
    ns = tuple(range((n_max if n_max is not None else depth) + 1))
    return HorizonContext(f, depth, tr, t, res.assistant, hbar, ns)


# --- end map table -----------------------------------------------------------

@dataclass(frozen=True)
class ZetaCheck:
    """Tree-ray threads in the solidified assistant: totality, pairwise meet-chain
    separation, and classification of every window component."""

    total: bool
    separated_pairs: dict[tuple[str, str], bool]
    coverage: dict[int, dict[str, int]]  # n -> {"ray": .., "boundary": .., "interior": ..}

    @property
    def injective(self) -> bool:
        return all(self.separated_pairs.values())

    @property
    def bijective_at_depth(self) -> bool:
        return self.total and self.injective


def zeta_check(ctx: HorizonContext) -> ZetaCheck:
    rays = ctx.tree_rays
    total = all(
        tail_component(ctx.hbar_sccs[0], rv, frozenset())[0] is not None
        for rv in rays.values())
    separated: dict[tuple[str, str], bool] = {}
    names = sorted(rays)
    for i, r1 in enumerate(names):
        for r2 in names[i + 1:]:
            v1, v2 = rays[r1], rays[r2]
            shared = 0
            while shared < min(len(v1), len(v2)) and v1[shared] == v2[shared]:
                shared += 1
            if shared == len(v1) or shared == len(v2):
                separated[(r1, r2)] = False
                continue
            x = frozenset(v1[:shared])
            scc = strong_components(ctx.hbar, x)
            separated[(r1, r2)] = scc.component_of[v1[-1]] != scc.component_of[v2[-1]]
    coverage: dict[int, dict[str, int]] = {}
    for n in ctx.ns:
        scc = ctx.hbar_sccs[n]
        x = ctx.truncation.separator(n)
        tail_comps = {tail_component(scc, rv, x)[0] for rv in rays.values()}
        counts = {"ray": 0, "boundary": 0, "interior": 0}
        for idx, comp in enumerate(scc.components):
            if idx in tail_comps:
                counts["ray"] += 1
            elif comp & ctx.truncation.boundary:
                counts["boundary"] += 1
            else:
                counts["interior"] += 1
        coverage[n] = counts
    return ZetaCheck(total, separated, coverage)


@dataclass(frozen=True)
class PsiCheck:
    """The traced-normal-ray map from oracle ends to tree rays."""

    matches: dict[str, Optional[str]]
    total: bool
    injective: bool
    surjective: bool
    unhit_rays: tuple[str, ...]

    @property
    def bijective_at_depth(self) -> bool:
        return self.total and self.injective and self.surjective


def psi_check(ctx: HorizonContext) -> PsiCheck:
    report = end_faithful_check(ctx.family, lambda v: True, ctx.depth,
                                n_max=ctx.ns[-1])
    matches: dict[str, Optional[str]] = {}
    for e, trace in report.rays.items():
        candidates = [name for name, rv in ctx.tree_rays.items()
                      if trace.vertices == rv[:len(trace.vertices)]]
        matches[e] = candidates[0] if len(candidates) == 1 else None
    total = bool(report.ends) == bool(ctx.family.ends_in_window(ctx.depth)) and \
        all(r.exists for r in report.rays.values())
    hit = {m for m in matches.values() if m is not None}
    injective = (len(hit) == len([m for m in matches.values() if m is not None])
                 and all(report.separations.values()))
    unhit = tuple(sorted(set(ctx.tree_rays) - hit))
    return PsiCheck(matches, total, injective, not unhit, unhit)


# --- horizon graphs ----------------------------------------------------------

@dataclass(frozen=True)
class HorizonArc:
    tail: str
    head: str
    provenance: str  # "oracle" | "detected"
    witnesses: dict[int, tuple[int, int]]
    separating_ns: tuple[int, ...]
    refuted_at: Optional[int]

    @property
    def present(self) -> bool:
        return self.refuted_at is None

    @property
    def vacuous(self) -> bool:
        return not self.separating_ns


def _detect_arcs(d: Digraph, sccs: dict[int, SCCPartition],
                 threads: dict[str, tuple[int, ...]],
                 separators, declared: frozenset[tuple[str, str]]) -> list[HorizonArc]:
    arcs = []
    names = sorted(threads)
    for tail in names:
        for head in names:
            if tail == head:
                continue
            witnesses: dict[int, tuple[int, int]] = {}
            separating = []
            refuted = None
            for n, scc in sccs.items():
                x = separators(n)
                ct, _ = tail_component(scc, threads[tail], x)
                ch, _ = tail_component(scc, threads[head], x)
                if ct is None or ch is None or ct == ch:
                    continue
                separating.append(n)
                bundle = [(a, b) for (a, b) in d.edges
                          if a in scc.components[ct] and b in scc.components[ch]]
                if bundle:
                    witnesses[n] = min(bundle)
                elif refuted is None:
                    refuted = n
            arcs.append(HorizonArc(
                tail, head,
                "oracle" if (tail, head) in declared else "detected",
                witnesses, tuple(separating), refuted))
    return arcs


@dataclass(frozen=True)
class HorizonGraph:
    nodes: tuple[str, ...]
    arcs: tuple[HorizonArc, ...]

    def arc(self, tail: str, head: str) -> Optional[HorizonArc]:
        for a in self.arcs:
            if a.tail == tail and a.head == head:
                return a
        return None

    def present_arcs(self) -> tuple[HorizonArc, ...]:
        return tuple(a for a in self.arcs if a.present and a.separating_ns)

    def to_json_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "arcs": [{
                "tail": a.tail, "head": a.head, "provenance": a.provenance,
                "present": a.present, "refuted_at": a.refuted_at,
                "witnesses": {str(n): list(e) for n, e in sorted(a.witnesses.items())},
            } for a in self.arcs],
        }


def horizon_graph(f: LazyFamily, depth: int, of_tree: bool = False,
                  n_max: Optional[int] = None) -> HorizonGraph:
    """The host's horizon (ends + detected/declared limit arcs), or with
    of_tree=True the horizon of the canonical arborescence's solidified assistant."""
    ctx = build_context(f, depth, n_max)
    declared = frozenset((d.tail[1], d.head[1]) for d in f.limit_edges()
                         if d.is_end_end())
    if of_tree:
        arcs = _detect_arcs(ctx.hbar, ctx.hbar_sccs, ctx.tree_rays,
                            ctx.truncation.separator, frozenset())
        return HorizonGraph(tuple(sorted(ctx.tree_rays)), tuple(arcs))
    arcs = _detect_arcs(ctx.host, ctx.host_sccs, ctx.end_rays,
                        ctx.truncation.separator, declared)
    return HorizonGraph(tuple(sorted(ctx.end_rays)), tuple(arcs))


def vertex_end_limit_check(f: LazyFamily, depth: int,
                           n_max: Optional[int] = None) -> dict:
    """Verify declared vertex-to-end limit edges in the window: an edge from the
    vertex into the end's component for every tested separator placing the
    vertex outside that component."""
    ctx = build_context(f, depth, n_max)
    results = {}
    for decl in f.limit_edges():
        if decl.is_end_end() or decl.tail[0] != "vertex":
            continue
        v = decl.tail[1]
        end = decl.head[1]
        ok = True
        checked = []
        for n in ctx.ns:
            scc = ctx.host_sccs[n]
            comp, _ = tail_component(scc, ctx.end_rays[end], ctx.truncation.separator(n))
            if comp is None:
                continue
            members = scc.components[comp]
            if v in members:
                continue
            checked.append(n)
            if not any(ctx.host.has_edge(v, w) for w in members):
                ok = False
                break
        results[(v, end)] = {"holds": ok, "separators_checked": checked}
    return results


# --- separator witnesses (both directions) -----------------------------------

@dataclass(frozen=True)
class WitnessResult:
    end: str
    direction: str  # "forward" | "backward"
    x: frozenset[int]
    x_prime: frozenset[int]
    pivot: Optional[int]
    contained: bool
    host_component: frozenset[int]
    hbar_component: frozenset[int]


def _resolve_separator(ctx: HorizonContext, x) -> frozenset[int]:
    if isinstance(x, int):
        return ctx.truncation.separator(x)
    return frozenset(x)


def _traced_ray(ctx: HorizonContext, end: str) -> tuple[int, ...]:
    match = psi_check(ctx).matches.get(end)
    if match is None:
        raise NoWitnessInWindow(f"end {end!r} has no traced normal ray at this depth")
    return ctx.tree_rays[match]


def horizon_witness_forward(f: LazyFamily, end: str, x, depth: int,
                            n_max: Optional[int] = None) -> WitnessResult:
    """Find a ray vertex whose window subtree sits inside the host component of
    the end past x; the chain strictly below it confines the solidified
    assistant's component inside the host one."""
    if not f.declared_solid:
        raise NotSolidFamily(f"{f.name} is not declared solid")
    ctx = build_context(f, depth, n_max)
    xs = _resolve_separator(ctx, x)
    host_scc = strong_components(ctx.host, xs)
    comp, _ = tail_component(host_scc, ctx.end_rays[end], xs)
    if comp is None:
        raise NoWitnessInWindow(f"the window holds no tail of {end!r} past the separator")
    c_host = host_scc.components[comp]
    ray = _traced_ray(ctx, end)
    pivot = None
    last_bad = -1
    for idx, v in enumerate(ray):
        if not ctx.tree.subtree[v] <= c_host:
            last_bad = idx
    for idx in range(last_bad + 1, len(ray)):
        if ctx.tree.subtree[ray[idx]] <= c_host:
            pivot = ray[idx]
            break
    if pivot is None:
        raise NoWitnessInWindow(
            f"no ray vertex above all bad vertices fits inside the component; raise the depth")
    x_prime = ctx.tree.down_closure(pivot) - {pivot}
    hbar_scc = strong_components(ctx.hbar, x_prime)
    comp_p, _ = tail_component(hbar_scc, ray, x_prime)
    if comp_p is None:
        raise NoWitnessInWindow("the ray tail vanished from the solidified window")
    c_hbar = hbar_scc.components[comp_p]
    return WitnessResult(end, "forward", xs, frozenset(x_prime), pivot,
                         c_hbar <= c_host, c_host, c_hbar)


def horizon_witness_backward(f: LazyFamily, end: str, x_prime, depth: int,
                             n_max: Optional[int] = None) -> WitnessResult:
    """The tree down-closure of x_prime confines the host component inside the
    solidified assistant's component."""
    if not f.declared_solid:
        raise NotSolidFamily(f"{f.name} is not declared solid")
    ctx = build_context(f, depth, n_max)
    xps = _resolve_separator(ctx, x_prime)
    for v in xps:
        if v not in ctx.tree.vertices:
            raise NoWitnessInWindow(f"{v} is not a window tree vertex")
    x = frozenset().union(*(ctx.tree.down_closure(v) for v in xps)) if xps else frozenset()
    ray = _traced_ray(ctx, end)
    hbar_scc = strong_components(ctx.hbar, xps)
    comp_p, _ = tail_component(hbar_scc, ray, xps)
    if comp_p is None:
        raise NoWitnessInWindow("the ray tail vanished from the solidified window")
    c_hbar = hbar_scc.components[comp_p]
    host_scc = strong_components(ctx.host, x)
    comp, _ = tail_component(host_scc, ctx.end_rays[end], x)
    if comp is None:
        raise NoWitnessInWindow(f"the window holds no tail of {end!r} past the down-closure")
    c_host = host_scc.components[comp]
    return WitnessResult(end, "backward", x, xps, None,
                         c_host <= c_hbar, c_host, c_hbar)


# --- limit edge correspondence ------------------------------------------------

@dataclass(frozen=True)
class PairVerdict:
    pair: tuple[str, str]
    declared: bool
    host_arc: HorizonArc
    hbar_arc: HorizonArc

    @property
    def agree(self) -> bool:
        return self.host_arc.present == self.hbar_arc.present

    @property
    def matches_declaration(self) -> bool:
        return self.host_arc.present == self.declared


def limit_edge_correspondence(f: LazyFamily, depth: int,
                              n_max: Optional[int] = None) -> list[PairVerdict]:
    """Per ordered end pair: does the host horizon arc match the arc of the
    solidified assistant's horizon under the end maps? Solid families only."""
    if not f.declared_solid:
        raise NotSolidFamily(f"{f.name} is not declared solid")
    ctx = build_context(f, depth, n_max)
    psi = psi_check(ctx)
    declared = frozenset((d.tail[1], d.head[1]) for d in f.limit_edges() if d.is_end_end())
    host_arcs = {(a.tail, a.head): a
                 for a in _detect_arcs(ctx.host, ctx.host_sccs, ctx.end_rays,
                                       ctx.truncation.separator, declared)}
    images = {e: psi.matches[e] for e in ctx.end_rays}
    if any(v is None for v in images.values()):
        raise NoWitnessInWindow("some end has no traced ray; raise the depth")
    image_rays = {e: ctx.tree_rays[images[e]] for e in images}
    hbar_arcs = {(a.tail, a.head): a
                 for a in _detect_arcs(ctx.hbar, ctx.hbar_sccs, image_rays,
                                       ctx.truncation.separator, frozenset())}
    verdicts = []
    ends = sorted(ctx.end_rays)
    for tail in ends:
        for head in ends:
            if tail == head:
                continue
            verdicts.append(PairVerdict((tail, head), (tail, head) in declared,
                                        host_arcs[(tail, head)], hbar_arcs[(tail, head)]))
    return verdicts


# --- the composite verdict ----------------------------------------------------

@dataclass(frozen=True)
class HorizonVerdict:
    reflects: bool
    depth: int
    reason: Optional[str]
    zeta: ZetaCheck
    psi: PsiCheck
    correspondence: Optional[list[PairVerdict]] = None
    witnesses: Optional[list[WitnessResult]] = None
    isolation: Optional[dict] = None
    accumulation: Optional[dict] = None

    def to_json_dict(self) -> dict:
        doc = {
            "verdict": f"Reflects({self.depth})" if self.reflects
                       else f"CounterExample({self.reason})",
            "depth": self.depth,
            "zeta_bijective": self.zeta.bijective_at_depth,
            "psi": {"total": self.psi.total, "injective": self.psi.injective,
                    "surjective": self.psi.surjective,
                    "unhit_rays": list(self.psi.unhit_rays)},
        }
        if self.correspondence is not None:
            doc["limit_edges"] = [
                {"pair": list(v.pair), "declared": v.declared,
                 "host": v.host_arc.present, "tree": v.hbar_arc.present,
                 "agree": v.agree} for v in self.correspondence]
        if self.witnesses is not None:
            doc["witnesses"] = [
                {"end": w.end, "direction": w.direction, "contained": w.contained}
                for w in self.witnesses]
        if self.isolation is not None:
            doc["isolation"] = {k: v for k, v in self.isolation.items()}
        if self.accumulation is not None:
            doc["accumulation"] = {
                ray: {str(n): {str(dd): c for dd, c in counts.items()}
                      for n, counts in per_n.items()}
                for ray, per_n in self.accumulation.items()}
        return doc


def _isolation_witness(ctx: HorizonContext) -> dict:
    scc = ctx.host_sccs[0]
    comps = {}
    for e, rv in ctx.end_rays.items():
        comp, _ = tail_component(scc, rv, frozenset())
        comps[e] = comp
    values = [c for c in comps.values() if c is not None]
    return {"components": comps,
            "all_distinct": len(set(values)) == len(values) and None not in comps.values()}


def _accumulation_counts(f: LazyFamily, unhit_rays: tuple[str, ...],
                         probe_depths: Iterable[int],
                         probe_ns: Iterable[int] = (0, 1, 2)) -> dict:
    """Per unhit tree ray: how many other tree-ray threads share its component
    of the solidified window minus X_n, per probe depth."""
    out: dict = {}
    for ray in unhit_rays:
        per_n: dict[int, dict[int, int]] = {n: {} for n in probe_ns}
        for dd in probe_depths:
            ctx = build_context(f, dd, n_max=max(probe_ns))
            rays = ctx.tree_rays
            if ray not in rays:
                continue
            for n in probe_ns:
                scc = ctx.hbar_sccs[n]
                x = ctx.truncation.separator(n)
                mine, _ = tail_component(scc, rays[ray], x)
                if mine is None:
                    continue
                count = sum(
                    1 for other, rv in rays.items()
                    if other != ray and tail_component(scc, rv, x)[0] == mine)
                per_n[n][dd] = count
        out[ray] = per_n
    return out


def verify_horizon(f: LazyFamily, depth: int, n_wit: Optional[int] = None,
                   probe_depths: Optional[Iterable[int]] = None) -> HorizonVerdict:
    """Composite horizon-reflection verdict for a family's canonical arborescence.

    Solid families must pass: tree-ray threading bijective, traced end map
    bijective, every limit-edge pair in agreement, and both separator-witness
    directions succeeding for every end and tested separator. Non-solid
    families yield a counterexample verdict with its finite evidence.
    """
    ctx = build_context(f, depth)
    zeta = zeta_check(ctx)
    psi = psi_check(ctx)
    if not f.declared_solid:
        reason = "psi-not-surjective" if psi.unhit_rays else "family-not-solid"
        probes = tuple(probe_depths) if probe_depths is not None else tuple(
            sorted({max(1, depth // 4), max(1, depth // 2), max(1, 3 * depth // 4), depth}))
        return HorizonVerdict(
            False, depth, reason, zeta, psi,
            isolation=_isolation_witness(ctx),
            accumulation=_accumulation_counts(f, psi.unhit_rays, probes))
    failures = []
    if not zeta.bijective_at_depth:
        failures.append("zeta-not-bijective")
    if not psi.bijective_at_depth:
        failures.append("psi-not-bijective")
    correspondence = limit_edge_correspondence(f, depth)
    if not all(v.agree and v.matches_declaration for v in correspondence):
        failures.append("limit-edge-mismatch")
    witnesses = []
    top = n_wit if n_wit is not None else min(10, depth)
    try:
        for end in ctx.end_rays:
            for n in range(top + 1):
                witnesses.append(horizon_witness_forward(f, end, n, depth))
                witnesses.append(horizon_witness_backward(f, end, n, depth))
    except (NoWitnessInWindow, NotSolidFamily) as exc:
        failures.append(f"witness-failed: {exc}")
    if any(not w.contained for w in witnesses):
        failures.append("witness-containment-failed")
    if failures:
        return HorizonVerdict(False, depth, ";".join(failures), zeta, psi,
                              correspondence, witnesses)
    return HorizonVerdict(True, depth, None, zeta, psi, correspondence, witnesses)


def horizon_to_dot(g: HorizonGraph, graph_name: str = "Horizon") -> str:
    lines = [f"digraph {graph_name} {{"]
    for node in g.nodes:
        lines.append(f'  "{node}";')
    for a in g.arcs:
        if a.present and a.separating_ns:
            style = "solid" if a.provenance == "oracle" else "dashed"
            lines.append(f'  "{a.tail}" -> "{a.head}" [style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
