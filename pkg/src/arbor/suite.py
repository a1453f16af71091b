"""The acceptance matrix: one runnable check per verified theorem or lemma.

Each criterion returns a CriterionResult with a pass flag and a short
evidence summary; the CLI `suite` verb prints one line per criterion and
the test suite asserts each flag. The brute-force sides live in
`arbor.oracles` so that every check compares two independent routes.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable, Optional

from . import oracles
from .arborescence import (
    Arborescence,
    NotNormalError,
    branch_child,
    check_normal,
    is_normal,
    is_sensitive,
    level_partition,
    normalize_cycle,
    sensitive_order_build,
    separation_check,
)
from .digraph import Digraph
from .families import end_faithful_check, family_build, truncate, canonical_arborescence
from .horizon import verify_horizon
from .jung import comb_search, jung_build

CORPUS_SEED = 0
FIVE_VERTEX_SEED = 1905
JUNG_SEED = 61


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


def _timed(fn: Callable[[], tuple[bool, str]], number: int, name: str) -> CriterionResult:
    start = time.time()
    passed, detail = fn()
    return CriterionResult(number, name, passed, detail, time.time() - start)


def _spanning_keys_agree(d: Digraph) -> tuple[int, int]:
    """(#spanning arborescences from 0, #mismatches) on one digraph."""
    arbs = list(oracles.spanning_arborescences(d, 0))
    if not arbs:
        return 0, 0
    dfs_keys = {k for k in oracles.all_dfs_trees(d, 0) if len(k[1]) == d.n - 1}
    normal_keys = {t.key() for t in arbs if is_normal(d, t)}
    return len(arbs), 0 if normal_keys == dfs_keys else 1


def criterion_1() -> tuple[bool, str]:
    """DFS <-> normal over all digraphs on <= 4 vertices plus a 5-vertex sample."""
    mismatches = 0
    arbs = 0
    graphs = 0
    for n in (1, 2, 3, 4):
        for d in oracles.all_digraphs(n):
            graphs += 1
            a, m = _spanning_keys_agree(d)
            arbs += a
            mismatches += m
    rng = random.Random(FIVE_VERTEX_SEED)
    for _ in range(500):
        d = oracles.random_digraph(rng, 5, rng.uniform(0.1, 0.9))
        graphs += 1
        a, m = _spanning_keys_agree(d)
        arbs += a
        mismatches += m
    return mismatches == 0, (
        f"{graphs} digraphs, {arbs} spanning arborescences, {mismatches} mismatches")


def criterion_2() -> tuple[bool, str]:
    """Sensitive order exists iff normal; built orders always pass the checker."""
    mismatches = 0
    checked = 0
    for d, t in oracles.corpus(CORPUS_SEED):
        checked += 1
        try:
            ext = sensitive_order_build(d, t)
            built = True
            if not is_sensitive(d, t, ext):
                mismatches += 1
                continue
        except NotNormalError:
            built = False
        if built != oracles.sensitive_extension_exists(d, t):
            mismatches += 1
    return mismatches == 0, f"{checked} corpus instances, {mismatches} mismatches"


def criterion_3() -> tuple[bool, str]:
    """Lemma 3.4 separation on every qualifying incomparable pair of every
    normal corpus instance, cross-checked by full path enumeration."""
    counterexamples = 0
    pairs = 0
    for d, t in oracles.corpus(CORPUS_SEED):
        res = check_normal(d, t)
        if not res.is_normal:
            continue
        verts = t.vertex_list
        for v in verts:
            for w in verts:
                if v == w or not t.incomparable(v, w):
                    continue
                if res.assistant.normal_leq(branch_child(t, v, w), v):
                    continue
                pairs += 1
                if separation_check(d, t, v, w) is not None:
                    counterexamples += 1
                    continue
                x = t.down_closure(v) & t.down_closure(w)
                for path in oracles.all_simple_paths(d, w, v):
                    if not set(path) & x:
                        counterexamples += 1
                        break
    return counterexamples == 0, f"{pairs} qualifying pairs, {counterexamples} counterexamples"


def criterion_4() -> tuple[bool, str]:
    """Every non-normal corpus instance yields a valid normalized cycle certificate."""
    invalid = 0
    certs = 0
    for d, t in oracles.corpus(CORPUS_SEED):
        res = check_normal(d, t)
        if res.is_normal:
            continue
        certs += 1
        cert = res.certificate
        cyc = cert.vertices
        ok = len(cyc) >= 2 and len(set(cyc)) == len(cyc)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            ok = ok and res.assistant.has_edge(a, b) and t.incomparable(a, b)
        if not ok:
            invalid += 1
    return invalid == 0, f"{certs} certificates, {invalid} invalid"


def criterion_5() -> tuple[bool, str]:
    """Levels of every normal spanning corpus arborescence induce acyclic subdigraphs."""
    violations = 0
    spanning = 0
    for d, t in oracles.corpus(CORPUS_SEED):
        if t.vertices != frozenset(d.vertices) or not is_normal(d, t):
            continue
        spanning += 1
        if not level_partition(d, t).all_acyclic:
            violations += 1
    return violations == 0, f"{spanning} normal spanning instances, {violations} violations"


def criterion_6() -> tuple[bool, str]:
    """The construction yields normal arborescences containing the targets; on
    complete symmetric digraphs the output is a Hamiltonian path from the root."""
    rng = random.Random(JUNG_SEED)
    failures = 0
    runs = 0
    while runs < 1000:
        n = rng.randint(2, 12)
        d = oracles.random_digraph(rng, n, rng.uniform(0.15, 0.8))
        r = rng.randrange(n)
        reach = sorted(d.reachable_from(r))
        size = rng.randint(0, len(reach))
        targets = rng.sample(reach, size)
        runs += 1
        build = jung_build(d, r, targets)  # normality and sensitivity assert inside
        t = build.tree
        if t.root != r or not set(targets) <= t.vertices:
            failures += 1
            continue
        if not is_normal(d, t):
            failures += 1
    ham_failures = 0
    for n in range(2, 7):
        k = oracles.complete_symmetric(n)
        for r in range(n):
            t = jung_build(k, r, list(range(n))).tree
            is_path = (len(t.vertices) == n
                       and all(len(t.children[v]) <= 1 for v in t.vertex_list))
            if not is_path or t.root != r:
                ham_failures += 1
    return failures + ham_failures == 0, (
        f"{runs} random instances ({failures} failures), "
        f"complete-symmetric paths up to n=6 ({ham_failures} failures)")


def criterion_7() -> tuple[bool, str]:
    """End-faithfulness at depth 50: one unique normal ray per oracle end."""
    problems = []
    counts = {}
    for name in ("directed_ladder", "comb_of_columns"):
        f = family_build(name)
        report = end_faithful_check(f, lambda v: True, 50)
        counts[name] = len(report.ends)
        if report.ambiguous_events:
            problems.append(f"{name}: {len(report.ambiguous_events)} ambiguous")
        if not all(r.exists for r in report.rays.values()):
            problems.append(f"{name}: missing rays")
        if not all(report.separations.values()):
            problems.append(f"{name}: rays not separated")
        if set(report.ends) != set(f.ends_in_window(50)):
            problems.append(f"{name}: closure misses oracle ends")
    detail = ", ".join(f"{k}: {v} ends" for k, v in counts.items())
    return not problems, detail + ("; " + "; ".join(problems) if problems else "")


def criterion_8() -> tuple[bool, str]:
    """Horizon reflection on the ladder at depth 20 with full witness coverage."""
    v = verify_horizon(family_build("directed_ladder"), 20, n_wit=10)
    problems = []
    if not v.reflects:
        problems.append(f"verdict {v.reason}")
    if not v.zeta.bijective_at_depth:
        problems.append("zeta not bijective")
    if not v.psi.bijective_at_depth:
        problems.append("psi not bijective")
    by_pair = {pv.pair: pv for pv in v.correspondence or []}
    ab = by_pair.get(("a", "b"))
    ba = by_pair.get(("b", "a"))
    if ab is None or not (ab.host_arc.present and ab.hbar_arc.present):
        problems.append("(a,b) arc missing")
    elif set(ab.host_arc.witnesses) != set(ab.host_arc.separating_ns):
        problems.append("(a,b) host witnesses incomplete")
    if ba is None or ba.host_arc.present or ba.hbar_arc.present:
        problems.append("(b,a) arc unexpectedly present")
    wit = v.witnesses or []
    if len(wit) != 2 * 2 * 11 or not all(w.contained for w in wit):
        problems.append(f"witness coverage {len(wit)}")
    return not problems, "Reflects(20), witnesses 2 ends x n<=10 x both directions" \
        if not problems else "; ".join(problems)


def criterion_9() -> tuple[bool, str]:
    """The comb-of-columns counterexample: psi not surjective, isolated host ends,
    and an accumulating extra tree end with strictly growing share counts."""
    v = verify_horizon(family_build("comb_of_columns"), 20, probe_depths=(5, 10, 15, 20))
    problems = []
    if v.reflects or v.reason != "psi-not-surjective":
        problems.append(f"verdict {v.reason}")
    if not v.isolation or not v.isolation["all_distinct"]:
        problems.append("host ends not isolated at the empty separator")
    acc = (v.accumulation or {}).get("bottom", {})
    for n, counts in acc.items():
        series = [counts.get(dd) for dd in (5, 10, 15, 20)]
        if None in series or not all(a < b for a, b in zip(series, series[1:])):
            problems.append(f"counts not strictly increasing at n={n}: {series}")
    if not acc:
        problems.append("no accumulation data for the bottom ray")
    return not problems, ("CounterExample(psi-not-surjective), accumulation "
                          + str({n: [c.get(dd) for dd in (5, 10, 15, 20)]
                                 for n, c in acc.items()})) \
        if not problems else "; ".join(problems)


def criterion_10() -> tuple[bool, str]:
    """Normality of the all-edges-from-0 star next to non-dispersedness on the
    transitive family's truncations."""
    f = family_build("transitive_omega")
    problems = []
    for n in range(1, 31):
        tr = truncate(f, n + 1)
        core = tr.core
        star = Arborescence(0, {i: 0 for i in core.vertices if i != 0})
        if not is_normal(core, star):
            problems.append(f"star not normal on {{0..{n}}}")
            break
    for k in range(1, 11):
        comb = comb_search(f, lambda v: True, k, depth=30)
        if comb is None:
            problems.append(f"no {k}-tooth comb prefix at depth 30")
        elif len(comb.teeth) < k:
            problems.append(f"comb at k={k} has too few teeth")
    return not problems, "star normal on all truncations, comb prefixes k<=10 found" \
        if not problems else "; ".join(problems)


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "depth-first search trees are exactly the normal spanning arborescences", criterion_1),
    (2, "a sensitive order exists exactly for normal arborescences", criterion_2),
    (3, "incomparable pairs are separated by their common down-closure", criterion_3),
    (4, "assistant cycles normalize to incomparable-consecutive cycles", criterion_4),
    (5, "levels of normal spanning arborescences are acyclic", criterion_5),
    (6, "the target construction yields normal arborescences containing the targets", criterion_6),
    (7, "one unique normal ray per end at truncation depth 50", criterion_7),
    (8, "the ladder's canonical arborescence reflects its horizon", criterion_8),
    (9, "the comb of columns fails reflection: extra accumulating tree end", criterion_9),
    (10, "normality without dispersedness on the transitive family", criterion_10),
]


def run_criterion(number: int) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            return _timed(fn, num, name)
    raise ValueError(f"no criterion {number}")


def run_all(numbers: Optional[list[int]] = None) -> list[CriterionResult]:
    wanted = set(numbers) if numbers else {num for num, _, _ in CRITERIA}
    return [_timed(fn, num, name) for num, name, fn in CRITERIA if num in wanted]
