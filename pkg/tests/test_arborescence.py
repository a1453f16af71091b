import itertools
import random

import pytest

from arbor.arborescence import (
    Arborescence,
    ComparableVertices,
    LinearExtension,
    NotACycle,
    NotALinearExtension,
    NotAnArborescence,
    NotNormalError,
    NotSpanningReachableSet,
    PreconditionOrderViolated,
    RootMissing,
    VertexNotInTree,
    arborescence_to_json,
    branch_child,
    check_normal,
    check_sensitive,
    dfs_build,
    is_dfs_tree,
    is_normal,
    is_sensitive,
    level_partition,
    load_arborescence,
    normal_assistant,
    normalize_cycle,
    sensitive_order_build,
    separation_check,
    tree_query,
    tree_to_dot,
)
from arbor.digraph import Digraph, find_path
from arbor.oracles import (
    all_digraphs,
    all_simple_paths,
    complete_symmetric,
    corpus,
    linear_extensions,
    sensitive_extension_exists,
    spanning_arborescences,
)

STAR_HOST = Digraph((0, 1, 2), ((0, 1), (0, 2), (1, 2)))
STAR = Arborescence(0, {1: 0, 2: 0})
TWO_CYCLE_HOST = Digraph((0, 1, 2), ((0, 1), (0, 2), (1, 2), (2, 1)))


def all_trees_with_increasing_labels(n):
    """Every arborescence shape on 0..n-1 with parent(i) < i; covers all shapes."""
    if n == 1:
        yield Arborescence(0, {})
        return
    for parents in itertools.product(*[range(i) for i in range(1, n)]):
        yield Arborescence(0, {i + 1: p for i, p in enumerate(parents)})


# --- tree order queries ------------------------------------------------------

def test_chain_order_and_meet():
    chain = Arborescence(0, {1: 0, 2: 1})
    assert chain.leq(1, 2) and not chain.leq(2, 1)
    assert chain.meet(1, 2) == 1
    assert tree_query(chain, "leq", 1, 2) is True
    assert tree_query(chain, "meet", 1, 2) == 1


def test_star_meet_and_level():
    assert STAR.meet(1, 2) == 0
    assert STAR.level_of(1) == 1
    assert tree_query(STAR, "level", 1) == 1
    assert tree_query(STAR, "up_closure", 0) == frozenset({0, 1, 2})
    assert tree_query(STAR, "down_closure", 2) == frozenset({0, 2})


def test_down_closure_intersection_is_chain_to_meet():
    for t in all_trees_with_increasing_labels(7):
        verts = t.vertex_list
        for v in verts:
            for w in verts:
                common = t.down_closure(v) & t.down_closure(w)
                m = t.meet(v, w)
                assert common == t.down_closure(m)


def test_vertex_not_in_tree():
    with pytest.raises(VertexNotInTree):
        STAR.leq(0, 7)


def test_arborescence_validation():
    with pytest.raises(NotAnArborescence):
        Arborescence(0, {1: 2, 2: 1})  # cycle, no path to root
    with pytest.raises(NotAnArborescence):
        Arborescence(0, {0: 1, 1: 0})  # root with a parent
    with pytest.raises(NotAnArborescence):
        load_arborescence('{"root":0,"edges":[[0,1],[2,1]]}')  # two parents


def test_arborescence_json_round_trip():
    t = Arborescence(3, {1: 3, 0: 3, 2: 0})
    assert load_arborescence(arborescence_to_json(t)) == t


# --- normal assistant --------------------------------------------------------

def test_assistant_star_single_edge_witness():
    h = normal_assistant(STAR_HOST, STAR)
    assert h.added == ((1, 2),)
    assert h.witness[(1, 2)].vertices == (1, 2)


def test_assistant_symmetric_pair():
    h = normal_assistant(TWO_CYCLE_HOST, STAR)
    assert h.added == ((1, 2), (2, 1))


def test_assistant_empty_on_hamiltonian_path():
    d = TWO_CYCLE_HOST
    t = Arborescence(0, {1: 0, 2: 1})
    assert normal_assistant(d, t).added == ()


def test_assistant_witness_through_outside_vertices():
    # tree on {0,1,2}; 3 is outside, carrying the only T-path from 1 to 2
    d = Digraph((0, 1, 2, 3), ((0, 1), (0, 2), (1, 3), (3, 2)))
    t = Arborescence(0, {1: 0, 2: 0})
    h = normal_assistant(d, t)
    assert h.added == ((1, 2),)
    assert h.witness[(1, 2)].vertices == (1, 3, 2)


def test_assistant_inherits_to_ancestors():
    # deep pair (2,1) via edge 2->1 also adds the ancestor pair (hosted above)
    d = Digraph((0, 1, 2, 3), ((0, 1), (0, 3), (3, 2), (2, 1)))
    t = Arborescence(0, {1: 0, 3: 0, 2: 3})
    h = normal_assistant(d, t)
    assert (2, 1) in h.added and (3, 1) in h.added


def test_assistant_witness_soundness_on_corpus():
    for d, t in corpus(2, count=60):
        h = normal_assistant(d, t)
        for (v, w), path in h.witness.items():
            assert t.incomparable(v, w)
            assert path.first in t.up_closure(v)
            assert path.last in t.up_closure(w)
            assert not path.is_trivial
            for a, b in zip(path.vertices, path.vertices[1:]):
                assert d.has_edge(a, b)
            for inner in path.vertices[1:-1]:
                assert inner not in t.vertices


def test_assistant_rejects_missing_edges():
    from arbor.arborescence import EdgeMissingFromHost
    with pytest.raises(EdgeMissingFromHost):
        normal_assistant(Digraph((0, 1), ()), Arborescence(0, {1: 0}))


def test_single_vertex_tree_is_normal():
    assert is_normal(Digraph((0,), ()), Arborescence(0, {}))


# --- normality ---------------------------------------------------------------

def test_normal_star():
    assert is_normal(STAR_HOST, STAR)


def test_not_normal_with_two_cycle_certificate():
    res = check_normal(TWO_CYCLE_HOST, STAR)
    assert not res.is_normal
    assert sorted(res.certificate.vertices) == [1, 2]
    assert res.certificate.normalized


def test_complete_symmetric_normal_iff_hamiltonian_path():
    for n in range(2, 6):
        d = complete_symmetric(n)
        for t in spanning_arborescences(d, 0):
            is_path = all(len(t.children[v]) <= 1 for v in t.vertex_list)
            assert is_normal(d, t) == is_path


# --- cycle normalization -----------------------------------------------------

def test_normalize_cycle_fixed_point():
    res = check_normal(TWO_CYCLE_HOST, STAR)
    h = res.assistant
    cert = normalize_cycle(h, (1, 2))
    assert cert.vertices == (1, 2)


def test_normalize_cycle_through_parent_edge():
    # tree 0->1->2, 0->3; cycle 1,2,3 passes the tree edge 1->2
    d = Digraph((0, 1, 2, 3), ((0, 1), (1, 2), (0, 3), (2, 3), (3, 1)))
    t = Arborescence(0, {1: 0, 2: 1, 3: 0})
    res = check_normal(d, t)
    h = res.assistant
    assert (2, 3) in h.added and (3, 1) in h.added and (1, 3) in h.added
    cert = normalize_cycle(h, (1, 2, 3))
    assert len(cert.vertices) <= 3
    cyc = cert.vertices
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        assert t.incomparable(a, b)
        assert h.has_edge(a, b)


def test_normalize_cycle_never_lengthens():
    for d, t in corpus(3, count=80):
        res = check_normal(d, t)
        if res.is_normal:
            continue
        h = res.assistant
        # rebuild some cycle by walking the assistant from the certificate
        cert = res.certificate
        again = normalize_cycle(h, cert.vertices)
        assert len(again.vertices) <= len(cert.vertices)


def test_normalize_cycle_rejects_non_cycles():
    res = check_normal(TWO_CYCLE_HOST, STAR)
    with pytest.raises(NotACycle):
        normalize_cycle(res.assistant, (1,))
    with pytest.raises(NotACycle):
        normalize_cycle(res.assistant, (0, 1))  # (1,0) is not an assistant edge


def test_four_vertex_example_cycles_all_normalize():
    # star with third branch; 3-cycle among the leaves
    d = Digraph((0, 1, 2, 3), ((0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)))
    t = Arborescence(0, {1: 0, 2: 0, 3: 0})
    res = check_normal(d, t)
    assert not res.is_normal
    cyc = res.certificate.vertices
    assert sorted(cyc) == [1, 2, 3]
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        assert t.incomparable(a, b)


# --- sensitive orders --------------------------------------------------------

def test_sensitive_build_star():
    ext = sensitive_order_build(STAR_HOST, STAR)
    assert ext.order() == (0, 1, 2)


def test_sensitive_build_chain_is_tree_order():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    chain = Arborescence(0, {1: 0, 2: 1})
    assert sensitive_order_build(d, chain).order() == (0, 1, 2)


def test_sensitive_build_raises_with_certificate():
    with pytest.raises(NotNormalError) as info:
        sensitive_order_build(TWO_CYCLE_HOST, STAR)
    assert sorted(info.value.certificate.vertices) == [1, 2]


def test_sensitive_violation_path():
    ext = LinearExtension({0: 0, 2: 1, 1: 2})  # b before a
    violation = check_sensitive(STAR_HOST, STAR, ext)
    assert violation is not None
    assert violation.kind == "path"
    assert (violation.large, violation.small) == (1, 2)
    assert violation.witness.vertices == (1, 2)


def test_sensitive_violation_branch():
    # order 0 < 1 < 3 < 2 puts 1 before 3 but 1's subtree vertex 2 after 3
    d = Digraph((0, 1, 2, 3), ((0, 1), (1, 2), (0, 3)))
    t = Arborescence(0, {1: 0, 2: 1, 3: 0})
    ext = LinearExtension({0: 0, 1: 1, 3: 2, 2: 3})
    violation = check_sensitive(d, t, ext)
    assert violation is not None and violation.kind == "branch"
    assert violation.blocker == 2


def test_any_extension_of_chain_is_sensitive():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    chain = Arborescence(0, {1: 0, 2: 1})
    for ext in linear_extensions(chain):
        assert is_sensitive(d, chain, ext)


def test_extension_validation():
    with pytest.raises(NotALinearExtension):
        LinearExtension({0: 0, 1: 2})
    with pytest.raises(NotALinearExtension):
        check_sensitive(STAR_HOST, STAR, LinearExtension({0: 1, 1: 0, 2: 2}))
    with pytest.raises(NotALinearExtension):
        check_sensitive(STAR_HOST, STAR, LinearExtension({0: 0, 1: 1, 5: 2}))


def test_built_orders_sensitive_and_equivalence_small():
    for d, t in corpus(7, count=60, max_n=6):
        try:
            ext = sensitive_order_build(d, t)
            assert is_sensitive(d, t, ext)
            assert sensitive_extension_exists(d, t)
        except NotNormalError:
            assert not sensitive_extension_exists(d, t)


# --- depth-first search ------------------------------------------------------

def test_dfs_explores_priority_first():
    d = Digraph((0, 1, 2), ((0, 1), (0, 2), (1, 2)))
    t = dfs_build(d, 0, priority=[2, 1, 0])
    assert t.parent == {2: 0, 1: 0}


def test_dfs_on_symmetric_pair_gives_hamiltonian_path():
    for priority in ([1, 2], [2, 1]):
        t = dfs_build(TWO_CYCLE_HOST, 0, priority=[0] + priority)
        assert all(len(t.children[v]) <= 1 for v in t.vertex_list)
        assert len(t.vertices) == 3


def test_dfs_single_vertex():
    t = dfs_build(Digraph((0,), ()), 0)
    assert t.vertices == frozenset({0})


def test_dfs_root_missing():
    with pytest.raises(RootMissing):
        dfs_build(Digraph((0,), ()), 3)


def test_dfs_output_always_normal():
    rng = random.Random(13)
    from arbor.oracles import random_digraph
    for _ in range(120):
        d = random_digraph(rng, rng.randint(1, 7), rng.random())
        priority = list(d.vertices)
        rng.shuffle(priority)
        root = rng.choice(d.vertices)
        t = dfs_build(d, root, priority)
        assert is_normal(d.induced(t.vertices), t)


def test_is_dfs_tree_star_false():
    assert is_dfs_tree(TWO_CYCLE_HOST, STAR) is False


def test_is_dfs_tree_accepts_dfs_outputs():
    rng = random.Random(17)
    from arbor.oracles import random_digraph
    for _ in range(60):
        d = random_digraph(rng, rng.randint(1, 6), rng.random())
        t = dfs_build(d, 0)
        assert is_dfs_tree(d, t)


def test_is_dfs_tree_hamiltonian_path_in_k4():
    d = complete_symmetric(4)
    path = Arborescence(0, {1: 0, 2: 1, 3: 2})
    assert is_dfs_tree(d, path)


def test_is_dfs_tree_requires_spanning_reachable_set():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    with pytest.raises(NotSpanningReachableSet):
        is_dfs_tree(d, Arborescence(0, {1: 0}))


# --- separation and levels ---------------------------------------------------

def test_separation_star_pair_holds_vacuously():
    assert separation_check(STAR_HOST, STAR, 1, 2) is None


def test_separation_rejects_comparable():
    chain = Arborescence(0, {1: 0, 2: 1})
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    with pytest.raises(ComparableVertices):
        separation_check(d, chain, 1, 2)


def test_separation_precondition_rejects_wrong_orientation():
    # (1,2) in the star host: branch of 1 (namely 1 itself) precedes 2
    with pytest.raises(PreconditionOrderViolated):
        separation_check(STAR_HOST, STAR, 2, 1)


def test_separation_holds_on_corpus_with_path_enumeration():
    for d, t in corpus(19, count=60):
        res = check_normal(d, t)
        if not res.is_normal:
            continue
        for v in t.vertex_list:
            for w in t.vertex_list:
                if v == w or not t.incomparable(v, w):
                    continue
                if res.assistant.normal_leq(branch_child(t, v, w), v):
                    continue
                assert separation_check(d, t, v, w) is None
                x = t.down_closure(v) & t.down_closure(w)
                for path in all_simple_paths(d, w, v):
                    assert set(path) & x


def test_every_incomparable_pair_qualifies_in_one_orientation():
    for d, t in corpus(19, count=60):
        res = check_normal(d, t)
        if not res.is_normal:
            continue
        for v in t.vertex_list:
            for w in t.vertex_list:
                if v >= w or not t.incomparable(v, w):
                    continue
                q1 = not res.assistant.normal_leq(branch_child(t, v, w), v)
                q2 = not res.assistant.normal_leq(branch_child(t, w, v), w)
                assert q1 or q2


def test_levels_chain_all_singletons():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    chain = Arborescence(0, {1: 0, 2: 1})
    report = level_partition(d, chain)
    assert [sorted(level) for level in report.levels] == [[0], [1], [2]]
    assert report.all_acyclic


def test_levels_star_level_one_acyclic():
    report = level_partition(STAR_HOST, STAR)
    assert report.levels[1] == frozenset({1, 2})
    assert report.all_acyclic


def test_levels_rejects_non_normal():
    from arbor.arborescence import NotNormalInput
    with pytest.raises(NotNormalInput):
        level_partition(TWO_CYCLE_HOST, STAR)


def test_levels_acyclic_on_random_normal_spanning():
    rng = random.Random(29)
    from arbor.oracles import random_digraph
    found = 0
    while found < 40:
        d = random_digraph(rng, rng.randint(2, 8), rng.random())
        t = dfs_build(d, 0)
        if t.vertices != frozenset(d.vertices):
            continue
        found += 1
        assert level_partition(d, t).all_acyclic


# --- corollary: DFS <-> normal on small instances ---------------------------

def test_dfs_equivalence_all_three_vertex_digraphs():
    from arbor.oracles import all_dfs_trees
    for d in all_digraphs(3):
        dfs_keys = {k for k in all_dfs_trees(d, 0) if len(k[1]) == d.n - 1}
        normal_keys = {t.key() for t in spanning_arborescences(d, 0) if is_normal(d, t)}
        assert dfs_keys == normal_keys


def test_tree_dot_render():
    h = normal_assistant(STAR_HOST, STAR)
    dot = tree_to_dot(STAR, h)
    assert "style=dashed" in dot and "0 -> 1" in dot
