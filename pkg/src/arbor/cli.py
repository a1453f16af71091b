"""Command-line surface: one verb per library operation.

Exit codes: 0 for success or a positive verdict, 1 for a negative verdict
(the output carries the certificate), 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import oracles, suite
from .arborescence import (
    Arborescence,
    NotNormalError,
    arborescence_to_json_dict,
    assistant_to_json_dict,
    certificate_to_json_dict,
    check_normal,
    check_sensitive,
    dfs_build,
    is_dfs_tree,
    is_normal,
    level_partition,
    load_arborescence,
    normal_assistant,
    sensitive_order_build,
    separation_check,
    tree_to_dot,
)
from .digraph import (
    Digraph,
    DigraphError,
    digraph_to_dot,
    digraph_to_json_dict,
    load_digraph,
)
from .families import (
    FamilyError,
    canonical_arborescence,
    closure_contains,
    end_faithful_check,
    ends_approx,
    family_build,
    necklace_prefix,
    star_comb,
    truncate,
)
from .horizon import (
    NoWitnessInWindow,
    NotSolidFamily,
    horizon_graph,
    horizon_to_dot,
    horizon_witness_backward,
    horizon_witness_forward,
    limit_edge_correspondence,
    solidify,
    verify_horizon,
)
from .jung import (
    UnreachableTarget,
    comb_search,
    jung_build,
    load_targets,
    reverse_jung_build,
)


class UsageError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_digraph_arg(args) -> Digraph:
    if not args.digraph:
        raise UsageError("a digraph file is required (-d/--digraph)")
    return load_digraph(_read_json(args.digraph))


def _load_tree_arg(args) -> Arborescence:
    if not args.tree:
        raise UsageError("an arborescence file is required (-t/--tree)")
    return load_arborescence(_read_json(args.tree))


def _load_family_arg(args, default_depth=20):
    if not args.family:
        raise UsageError("a family name is required (--family)")
    depth = args.depth if args.depth is not None else default_depth
    return family_build({"family": args.family, "depth": depth}), depth


def _vertex_set_arg(args, attr="set"):
    raw = getattr(args, attr, None)
    if raw is None or raw == "all":
        return lambda v: True
    if os.path.exists(raw):
        doc = _read_json(raw)
        return frozenset(doc["vertices"] if isinstance(doc, dict) else doc)
    try:
        return frozenset(int(x) for x in raw.split(","))
    except ValueError as exc:
        raise UsageError(f"vertex set must be 'all', a file, or a CSV of ids: {raw!r}") from exc


def _emit(args, document, dot: Optional[str] = None) -> None:
    if getattr(args, "format", "json") == "dot":
        if dot is None:
            raise UsageError("this verb has no DOT rendering")
        text = dot
    else:
        text = json.dumps(document, indent=2, default=_json_default) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, frozenset):
        return sorted(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


# --- verbs -------------------------------------------------------------------

def _cmd_assistant(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    h = normal_assistant(d, t)
    _emit(args, assistant_to_json_dict(h), tree_to_dot(t, h))
    return 0


def _cmd_check_normal(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    res = check_normal(d, t)
    if res.is_normal:
        _emit(args, {"normal": True})
        return 0
    _emit(args, {"normal": False,
                 "certificate": certificate_to_json_dict(res.certificate)})
    return 1


def _cmd_order(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    if args.rank:
        doc = _read_json(args.rank)
        from .arborescence import LinearExtension
        ext = (LinearExtension.from_order(doc["order"]) if "order" in doc
               else LinearExtension({int(k): v for k, v in doc["rank"].items()}))
        violation = check_sensitive(d, t, ext)
        if violation is None:
            _emit(args, {"sensitive": True})
            return 0
        _emit(args, {"sensitive": False, "violation": {
            "kind": violation.kind, "small": violation.small, "large": violation.large,
            "blocker": violation.blocker,
            "witness": list(violation.witness.vertices) if violation.witness else None}})
        return 1
    try:
        ext = sensitive_order_build(d, t)
    except NotNormalError as exc:
        _emit(args, {"normal": False,
                     "certificate": certificate_to_json_dict(exc.certificate)})
        return 1
    _emit(args, {"order": list(ext.order())})
    return 0


def _cmd_dfs(args) -> int:
    d = _load_digraph_arg(args)
    if args.root is None:
        raise UsageError("--root is required")
    priority = [int(x) for x in args.priority.split(",")] if args.priority else None
    t = dfs_build(d, args.root, priority)
    _emit(args, arborescence_to_json_dict(t), tree_to_dot(t))
    return 0


def _cmd_is_dfs(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    ok = is_dfs_tree(d, t)
    _emit(args, {"is_dfs": ok})
    return 0 if ok else 1


def _cmd_separate(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    if not args.pair:
        raise UsageError("--pair v,w is required")
    v, w = (int(x) for x in args.pair.split(","))
    counter = separation_check(d, t, v, w)
    if counter is None:
        _emit(args, {"holds": True, "pair": [v, w]})
        return 0
    _emit(args, {"holds": False, "pair": [v, w],
                 "counter_path": list(counter.vertices)})
    return 1


def _cmd_levels(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    from .arborescence import NotNormalInput
    try:
        report = level_partition(d, t)
    except NotNormalInput as exc:
        _emit(args, {"normal": False, "error": str(exc)})
        return 1
    _emit(args, {"levels": [sorted(level) for level in report.levels],
                 "acyclic": list(report.acyclic),
                 "all_acyclic": report.all_acyclic})
    return 0 if report.all_acyclic else 1


def _cmd_jung(args) -> int:
    d = _load_digraph_arg(args)
    if args.root is None:
        raise UsageError("--root is required")
    targets = load_targets(_read_json(args.targets)) if args.targets else []
    if args.reverse:
        build = reverse_jung_build(d, args.root, targets)
        _emit(args, {"root": build.tree.root, "reverse": True,
                     "edges": [list(e) for e in build.tree.edges_in_host()],
                     "order": list(build.order.order())})
        return 0
    build = jung_build(d, args.root, targets)
    doc = arborescence_to_json_dict(build.tree)
    doc["order"] = list(build.order.order())
    _emit(args, doc, tree_to_dot(build.tree))
    return 0


def _cmd_comb(args) -> int:
    pred = _vertex_set_arg(args)
    if args.family:
        host, depth = _load_family_arg(args)
        comb = comb_search(host, pred, args.teeth, depth=depth)
    else:
        comb = comb_search(_load_digraph_arg(args), pred, args.teeth)
    if comb is None:
        _emit(args, {"found": False, "teeth": args.teeth, "depth": args.depth})
        return 1
    doc = comb.to_json_dict()
    doc["found"] = True
    _emit(args, doc)
    return 0


def _cmd_ends(args) -> int:
    f, depth = _load_family_arg(args)
    report = ends_approx(f, depth)
    _emit(args, report.to_json_dict())
    return 0


def _cmd_closure(args) -> int:
    f, depth = _load_family_arg(args)
    if not args.end:
        raise UsageError("--end is required")
    contained = closure_contains(f, _vertex_set_arg(args), args.end, depth)
    _emit(args, {"end": args.end, "contains": contained})
    return 0 if contained else 1


def _cmd_faithful(args) -> int:
    f, depth = _load_family_arg(args)
    report = end_faithful_check(f, _vertex_set_arg(args), depth)
    _emit(args, report.to_json_dict())
    return 0 if report.ok else 1


def _cmd_necklace(args) -> int:
    f, depth = _load_family_arg(args)
    if not args.end:
        raise UsageError("--end is required")
    prefix = necklace_prefix(f, args.end, args.beads, depth)
    _emit(args, prefix.to_json_dict())
    return 0


def _cmd_solidify(args) -> int:
    d = _load_digraph_arg(args)
    t = _load_tree_arg(args)
    bar = solidify(d, t)
    _emit(args, digraph_to_json_dict(bar), digraph_to_dot(bar))
    return 0


def _cmd_horizon(args) -> int:
    f, depth = _load_family_arg(args)
    if args.graph in ("host", "tree"):
        g = horizon_graph(f, depth, of_tree=args.graph == "tree")
        _emit(args, g.to_json_dict(), horizon_to_dot(g))
        return 0
    verdict = verify_horizon(f, depth)
    _emit(args, verdict.to_json_dict())
    return 0 if verdict.reflects else 1


def _cmd_witness(args) -> int:
    f, depth = _load_family_arg(args)
    if not args.end:
        raise UsageError("--end is required")
    if args.backward:
        xp = frozenset(int(x) for x in args.xprime.split(",")) if args.xprime \
            else frozenset(range(args.sep or 0))
        res = horizon_witness_backward(f, args.end, xp, depth)
    else:
        res = horizon_witness_forward(f, args.end, args.sep or 0, depth)
    _emit(args, {"end": res.end, "direction": res.direction,
                 "x": sorted(res.x), "x_prime": sorted(res.x_prime),
                 "pivot": res.pivot, "contained": res.contained})
    return 0 if res.contained else 1


def _cmd_export_dot(args) -> int:
    if args.family:
        f, depth = _load_family_arg(args)
        tr = truncate(f, depth)
        sep = frozenset(range(args.sep)) if args.sep else frozenset()
        sys.stdout.write(digraph_to_dot(tr.digraph, separator=sep))
        return 0
    d = _load_digraph_arg(args)
    if args.tree:
        t = _load_tree_arg(args)
        h = normal_assistant(d, t)
        sys.stdout.write(tree_to_dot(t, h))
        return 0
    sep = frozenset(int(x) for x in args.pair.split(",")) if args.pair else frozenset()
    sys.stdout.write(digraph_to_dot(d, separator=sep))
    return 0


def _cmd_suite(args) -> int:
    numbers = [int(x) for x in args.only.split(",")] if args.only else None
    results = suite.run_all(numbers)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        mark = "pass" if r.passed else "FAIL"
        print(f"[{mark}] {r.number:2d}  {r.name:<{width}}  {r.seconds:7.1f}s  {r.detail}")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} criteria passed")
    return 0 if failures == 0 else 1


def _cmd_oracle(args) -> int:
    seed = int(os.environ.get("ARBOR_SEED", "0"))
    import random
    rng = random.Random(seed)
    mismatches = 0
    runs = args.count
    if args.check == "scc":
        from .digraph import strong_components
        for _ in range(runs):
            d = oracles.random_digraph(rng, rng.randint(1, 8), rng.random())
            x = frozenset(v for v in d.vertices if rng.random() < 0.2)
            fast = set(strong_components(d, x).components)
            slow = oracles.scc_bruteforce(d, x)
            mismatches += fast != slow
    elif args.check == "dfs":
        for _ in range(runs):
            d = oracles.random_digraph(rng, rng.randint(1, 5), rng.random())
            dfs_keys = {k for k in oracles.all_dfs_trees(d, 0) if len(k[1]) == d.n - 1}
            normal_keys = {t.key() for t in oracles.spanning_arborescences(d, 0)
                           if is_normal(d, t)}
            mismatches += dfs_keys != normal_keys
    elif args.check == "sensitive":
        for d, t in oracles.corpus(seed, count=runs):
            try:
                sensitive_order_build(d, t)
                built = True
            except NotNormalError:
                built = False
            mismatches += built != oracles.sensitive_extension_exists(d, t)
    else:
        raise UsageError(f"unknown oracle check {args.check!r}")
    print(f"{args.check}: {runs} runs, {mismatches} mismatches (seed {seed})")
    return 0 if mismatches == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbor",
        description="Normal arborescences in digraphs: certificates, orders, ends, horizons.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("-d", "--digraph", help="digraph JSON file")
        p.add_argument("-t", "--tree", help="arborescence JSON file")
        p.add_argument("--root", type=int, help="root vertex id")
        p.add_argument("--priority", help="CSV of vertex ids, first explored first")
        p.add_argument("--family", help="catalog family name")
        p.add_argument("--depth", type=int, help="truncation depth")
        p.add_argument("--targets", help="targets JSON file")
        p.add_argument("--format", choices=("json", "dot"), default="json")
        p.add_argument("--out", help="output file (default stdout)")
        return p

    add("assistant", _cmd_assistant, help="build the normal assistant with witnesses")
    add("check-normal", _cmd_check_normal, help="normality verdict with cycle certificate")
    p = add("order", _cmd_order, help="build or check a sensitive order")
    p.add_argument("--rank", help="order JSON file to check instead of building")
    add("dfs", _cmd_dfs, help="depth-first search arborescence")
    add("is-dfs", _cmd_is_dfs, help="whether the tree arises from some DFS run")
    p = add("separate", _cmd_separate, help="separation along the common down-closure")
    p.add_argument("--pair", help="v,w")
    add("levels", _cmd_levels, help="level partition with acyclicity report")
    p = add("jung", _cmd_jung, help="normal arborescence through prescribed targets")
    p.add_argument("--reverse", action="store_true", help="build into the root instead")
    p = add("comb", _cmd_comb, help="directed comb prefix search")
    p.add_argument("--teeth", type=int, default=3)
    p.add_argument("--set", help="'all', a CSV of ids, or a JSON file")
    add("ends", _cmd_ends, help="strong-component tower and end threads")
    p = add("closure", _cmd_closure, help="is the end in the closure of the set")
    p.add_argument("--end", help="end id")
    p.add_argument("--set", help="'all', a CSV of ids, or a JSON file")
    p = add("faithful", _cmd_faithful, help="one unique normal ray per end")
    p.add_argument("--set", help="'all', a CSV of ids, or a JSON file")
    p = add("necklace", _cmd_necklace, help="necklace prefix for an end")
    p.add_argument("--end", help="end id")
    p.add_argument("--beads", type=int, default=3)
    add("solidify", _cmd_solidify, help="add reverse tree edges")
    p = add("horizon", _cmd_horizon, help="horizon reflection verdict")
    p.add_argument("--graph", choices=("host", "tree"),
                   help="emit the horizon graph instead of the verdict")
    p = add("witness", _cmd_witness, help="separator witnesses in either direction")
    p.add_argument("--end", help="end id")
    p.add_argument("--sep", type=int, help="separator index n (X_n)")
    p.add_argument("--backward", action="store_true")
    p.add_argument("--xprime", help="CSV of tree vertex ids")
    p = add("export-dot", _cmd_export_dot, help="DOT rendering of a digraph, tree or window")
    p.add_argument("--pair", help="CSV of separator ids to double-border")
    p.add_argument("--sep", type=int, help="separator index for family windows")
    p = add("suite", _cmd_suite, help="run the acceptance matrix")
    p.add_argument("--only", help="CSV of criterion numbers")
    p = add("oracle", _cmd_oracle, help="brute-force cross-checks (ARBOR_SEED)")
    p.add_argument("--check", choices=("scc", "dfs", "sensitive"), default="scc")
    p.add_argument("--count", type=int, default=50)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (UsageError, DigraphError, FamilyError, NotSolidFamily, NoWitnessInWindow,
            UnreachableTarget, ValueError) as exc:
        print(f"arbor {args.verb}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"arbor {args.verb}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
