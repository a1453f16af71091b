import json
import random

import pytest

from arbor.digraph import (
    Digraph,
    DirectedPath,
    DuplicateEdge,
    LoopEdge,
    UnknownVertex,
    digraph_to_dot,
    digraph_to_json_dict,
    find_path,
    load_digraph,
    strong_components,
)
from arbor.oracles import random_digraph, scc_bruteforce


def test_load_smallest_valid():
    d = load_digraph('{"vertices":[0,1],"edges":[[0,1]]}')
    assert d.n == 2 and d.m == 1
    assert d.has_edge(0, 1) and not d.has_edge(1, 0)


def test_load_rejects_loop():
    with pytest.raises(LoopEdge):
        load_digraph('{"vertices":[0],"edges":[[0,0]]}')


def test_load_accepts_inverse_pair():
    d = load_digraph('{"vertices":[0,1],"edges":[[0,1],[1,0]]}')
    assert d.m == 2


def test_load_rejects_duplicate_edge():
    with pytest.raises(DuplicateEdge):
        load_digraph('{"vertices":[0,1],"edges":[[0,1],[0,1]]}')


def test_load_rejects_unknown_vertex():
    with pytest.raises(UnknownVertex) as info:
        load_digraph('{"vertices":[0,1],"edges":[[0,2]]}')
    assert info.value.edge == (0, 2)


def test_load_densifies_sparse_ids():
    d = load_digraph('{"vertices":[5,9],"edges":[[5,9]]}')
    assert d.vertices == (0, 1)
    assert d.edges == ((0, 1),)
    assert d.names == {0: "5", 1: "9"}


def test_round_trip():
    doc = {"vertices": [0, 1, 2], "edges": [[0, 1], [2, 1]], "names": {"2": "sink"}}
    d = load_digraph(json.dumps(doc))
    again = load_digraph(json.dumps(digraph_to_json_dict(d)))
    assert again == d


def test_scc_two_cycle_single_component():
    d = Digraph((0, 1), ((0, 1), (1, 0)))
    parts = strong_components(d)
    assert parts.components == (frozenset({0, 1}),)


def test_scc_one_way_edge_two_components():
    d = Digraph((0, 1), ((0, 1),))
    parts = strong_components(d)
    assert parts.components == (frozenset({0}), frozenset({1}))


def test_scc_complete_symmetric_triangle_minus_middle():
    d = Digraph((0, 1, 2), tuple((v, w) for v in range(3) for w in range(3) if v != w))
    parts = strong_components(d, {1})
    assert parts.components == (frozenset({0, 2}),)
    assert parts.deleted == frozenset({1})


def test_scc_matches_bruteforce_on_random_digraphs():
    rng = random.Random(4)
    for _ in range(200):
        d = random_digraph(rng, rng.randint(1, 8), rng.random())
        x = frozenset(v for v in d.vertices if rng.random() < 0.25)
        assert set(strong_components(d, x).components) == scc_bruteforce(d, x)


def test_scc_labels_ordered_by_smallest_member():
    d = Digraph((0, 1, 2, 3), ((1, 0), (2, 3), (3, 2)))
    parts = strong_components(d)
    mins = [min(c) for c in parts.components]
    assert mins == sorted(mins)
    for v in d.vertices:
        assert v in parts.components[parts.component_of[v]]


def test_reverse_single_edge_and_involution():
    d = Digraph((0, 1), ((0, 1),))
    assert d.reverse().edges == ((1, 0),)
    rng = random.Random(11)
    for _ in range(30):
        g = random_digraph(rng, rng.randint(1, 7), rng.random())
        assert g.reverse().reverse() == g


def test_reverse_fixes_symmetric_digraph():
    d = Digraph((0, 1, 2), ((0, 1), (1, 0), (1, 2), (2, 1)))
    assert d.reverse() == d


def test_reverse_preserves_scc_partition():
    rng = random.Random(23)
    for _ in range(60):
        d = random_digraph(rng, rng.randint(1, 7), rng.random())
        x = frozenset(v for v in d.vertices if rng.random() < 0.2)
        fwd = set(strong_components(d, x).components)
        bwd = set(strong_components(d.reverse(), x).components)
        assert fwd == bwd


def test_find_path_simple_chain():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    p = find_path(d, {0}, {2})
    assert p.vertices == (0, 1, 2)


def test_find_path_blocked_interior():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    assert find_path(d, {0}, {2}, forbidden_interior={1}) is None


def test_find_path_prefers_shortest():
    d = Digraph((0, 1, 2), ((0, 1), (0, 2), (1, 2)))
    assert find_path(d, {0}, {2}).vertices == (0, 2)


def test_find_path_lexicographic_tie_break():
    # two shortest 0->3 routes: 0,1,3 and 0,2,3
    d = Digraph((0, 1, 2, 3), ((0, 1), (0, 2), (1, 3), (2, 3)))
    assert find_path(d, {0}, {3}).vertices == (0, 1, 3)


def test_find_path_deterministic():
    rng = random.Random(5)
    for _ in range(40):
        d = random_digraph(rng, 6, 0.4)
        a = find_path(d, {0}, {5}, forbidden_interior={2})
        b = find_path(d, {0}, {5}, forbidden_interior={2})
        assert (a is None) == (b is None)
        if a is not None:
            assert a.vertices == b.vertices


def test_find_path_trivial_when_sets_meet():
    d = Digraph((0, 1), ((0, 1),))
    p = find_path(d, {0, 1}, {1})
    assert p.vertices == (1,) and p.is_trivial


def test_find_path_avoids_source_as_interior():
    # the only 0->3 walk through 1 passes source vertex 1; interior may not
    # re-enter the source set
    d = Digraph((0, 1, 2, 3), ((0, 1), (1, 3),))
    assert find_path(d, {0, 1}, {3}) is not None  # path 1,3 starts at 1 instead
    assert find_path(d, {0, 1}, {3}).vertices == (1, 3)


def test_directed_path_validation():
    with pytest.raises(ValueError):
        DirectedPath((0, 1, 0))
    d = Digraph((0, 1), ((0, 1),))
    with pytest.raises(ValueError):
        DirectedPath.in_digraph(d, (1, 0))


def test_dot_export_marks_separator():
    d = Digraph((0, 1), ((0, 1),), {0: "start"})
    dot = digraph_to_dot(d, separator={1})
    assert "peripheries=2" in dot and 'label="start"' in dot
