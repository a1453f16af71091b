import pytest

from arbor.arborescence import is_normal
from arbor.digraph import Digraph
from arbor.families import (
    BadParameters,
    NoNecklaceInWindow,
    NotATree,
    UnknownEnd,
    UnknownFamily,
    canonical_arborescence,
    closure_contains,
    end_faithful_check,
    ends_approx,
    family_build,
    necklace_prefix,
    ray_in_window,
    solidity_check,
    star_comb,
    truncate,
)

ALL_FAMILIES = ["symmetric_ray", "directed_ladder", "comb_of_columns",
                "apex_necklace", "transitive_omega", "infinite_star"]


# --- building ----------------------------------------------------------------

def test_build_by_name_and_spec():
    f = family_build("directed_ladder")
    assert f.name == "directed_ladder" and f.declared_solid
    g = family_build({"family": "directed_ladder", "params": {}, "depth": 30})
    assert g.build_depth == 30
    assert g.oracle.ends == ("a", "b")
    assert len(g.oracle.limit_edges) == 1


def test_build_unknown_family():
    with pytest.raises(UnknownFamily):
        family_build("moebius_ladder")


def test_build_bad_parameters():
    with pytest.raises(BadParameters):
        family_build({"family": "finite"})
    with pytest.raises(BadParameters):
        family_build({"family": "symmetric_ray", "depth": 0})


def test_finite_family_embeds_digraph():
    d = Digraph((0, 1, 2), ((0, 1), (1, 2)))
    f = family_build({"family": "finite", "params": {"digraph": d}})
    assert f.ends_in_window(10) == ()
    tr = truncate(f, 10)
    assert tr.digraph == d
    assert tr.boundary == frozenset()


def test_comb_oracle_ends():
    f = family_build("comb_of_columns")
    assert f.ends_in_window(10) == ("col0", "col1", "col2", "col3", "col4")


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_neighborhood_consistency(name):
    f = family_build(name)
    tr = truncate(f, 12)
    for v in range(tr.bound):
        for w in f.out_within(v, tr.bound):
            assert v in f.in_within(w, tr.bound)
        for w in f.in_within(v, tr.bound):
            assert v in f.out_within(w, tr.bound)


@pytest.mark.parametrize("name", ALL_FAMILIES)
def test_windows_nest(name):
    f = family_build(name)
    small, large = truncate(f, 8), truncate(f, 14)
    keep = set(small.digraph.vertices)
    assert large.digraph.induced(keep) == small.digraph


# --- truncation --------------------------------------------------------------

def test_truncate_symmetric_ray_is_path():
    f = family_build("symmetric_ray")
    tr = truncate(f, 3)
    assert tr.bound == 3 + f.slack
    assert tr.core.n == 3
    for i in range(tr.bound - 1):
        assert tr.digraph.has_edge(i, i + 1) and tr.digraph.has_edge(i + 1, i)


def test_truncate_comb_counts_match_enumerator():
    f = family_build("comb_of_columns")
    tr = truncate(f, 10)
    assert tr.digraph.n == 10 + f.slack
    labels = [f.label(i) for i in range(10)]
    assert labels == ["b0", "v0,1", "b1", "v1,1", "b2", "v2,1", "v0,2", "b3", "v3,1", "b4"]


def test_truncate_ladder_alternates():
    f = family_build("directed_ladder")
    assert [f.label(i) for i in range(4)] == ["a0", "b0", "a1", "b1"]
    tr = truncate(f, 10)
    assert tr.digraph.has_edge(0, 1)  # rung a0 -> b0
    assert not tr.digraph.has_edge(1, 0)


def test_canonical_trees_are_normal_in_windows():
    for name in ALL_FAMILIES:
        f = family_build(name)
        tr = truncate(f, 15)
        t = canonical_arborescence(f, tr.bound)
        assert t.vertices == frozenset(tr.digraph.vertices)
        assert is_normal(tr.digraph, t), name


def test_canonical_tree_unavailable_for_finite():
    d = Digraph((0, 1), ((0, 1),))
    f = family_build({"family": "finite", "params": {"digraph": d}})
    with pytest.raises(BadParameters):
        canonical_arborescence(f, 2)


# --- ends approximation ------------------------------------------------------

def test_ends_symmetric_ray_one_thread():
    report = ends_approx(family_build("symmetric_ray"), 10)
    assert report.thread_count == 1
    assert report.agrees_with_oracle
    assert report.coherent
    assert report.stabilization_depth == 0


def test_ends_ladder_two_threads():
    report = ends_approx(family_build("directed_ladder"), 10)
    assert report.thread_count == 2
    assert report.agrees_with_oracle


def test_ends_comb_many_threads_at_empty_separator():
    report = ends_approx(family_build("comb_of_columns"), 10)
    assert report.distinct_counts[0] >= 5  # >= depth/2: not solid
    assert report.thread_count == len(report.ends)


def test_ends_comb_thread_count_grows_linearly():
    counts = [ends_approx(family_build("comb_of_columns"), d).thread_count
              for d in (8, 16, 24)]
    assert counts[0] < counts[1] < counts[2]


def test_ends_finite_family_none():
    d = Digraph((0, 1), ((0, 1),))
    report = ends_approx(family_build({"family": "finite", "params": {"digraph": d}}), 5)
    assert report.ends == ()
    assert report.thread_count == 0


# --- closure -----------------------------------------------------------------

def test_closure_even_vertices_of_ray():
    f = family_build("symmetric_ray")
    for d in (5, 10, 15):
        assert closure_contains(f, lambda v: v % 2 == 0, "omega", d)


def test_closure_single_vertex_fails_once_separated():
    f = family_build("directed_ladder")
    assert not closure_contains(f, {0}, "a", 10)


def test_closure_all_vertices():
    f = family_build("directed_ladder")
    assert closure_contains(f, lambda v: True, "a", 10)
    assert closure_contains(f, lambda v: True, "b", 10)


def test_closure_antitone_in_depth():
    f = family_build("directed_ladder")
    u = {1, 3, 5}  # b0, b1, b2: separated from end b eventually
    values = [closure_contains(f, u, "b", d) for d in (2, 6, 12)]
    for earlier, later in zip(values, values[1:]):
        assert earlier or not later  # True at larger depth implies True at smaller


def test_closure_unknown_end():
    with pytest.raises(UnknownEnd):
        closure_contains(family_build("symmetric_ray"), lambda v: True, "nope", 5)


# --- end-faithfulness --------------------------------------------------------

def test_faithful_ladder_traces_both_ends():
    f = family_build("directed_ladder")
    report = end_faithful_check(f, lambda v: True, 20)
    assert report.ok
    assert set(report.ends) == {"a", "b"}
    assert report.rays["a"].vertices[:4] == (0, 2, 4, 6)
    assert report.rays["b"].vertices[:4] == (0, 1, 3, 5)
    assert all(report.separations.values())


def test_faithful_comb_traces_each_column():
    f = family_build("comb_of_columns")
    report = end_faithful_check(f, lambda v: True, 20)
    assert report.ok
    assert not report.ambiguous_events
    trace = report.rays["col1"].vertices
    assert trace[:3] == (0, 2, 3)  # b0, b1, v1,1


def test_faithful_finite_family_vacuous():
    d = Digraph((0, 1), ((0, 1),))
    f = family_build({"family": "finite", "params": {"digraph": d}})
    with pytest.raises(BadParameters):
        end_faithful_check(f, lambda v: True, 5)


def test_faithful_respects_closure_restriction():
    f = family_build("directed_ladder")
    # only vertices of ray a: end b is not in the closure
    report = end_faithful_check(f, lambda v: v % 2 == 0, 14)
    assert set(report.ends) == {"a"}
    assert report.ok


# --- star-comb ---------------------------------------------------------------

def test_star_comb_ray_self_teeth():
    res = star_comb(family_build("symmetric_ray"), lambda v: True, 5, 10)
    assert res.kind == "comb"
    assert len(res.paths) == 5
    assert all(len(p) == 1 for p in res.paths)


def test_star_comb_infinite_star():
    res = star_comb(family_build("infinite_star"), lambda v: True, 5, 10)
    assert res.kind == "star"
    assert res.center == 0
    assert len(res.paths) == 5


def test_star_comb_comb_of_columns_one_per_column():
    f = family_build("comb_of_columns")
    w = {f._column_vertex(c, 1) for c in range(50)}
    res = star_comb(f, w, 3, 9)
    assert res.kind == "comb"
    assert len(res.paths) == 3
    assert set(res.teeth) <= w
    # teeth paths leave the bottom spine
    for p in res.paths:
        assert p[0] in res.spine
        assert all(v not in res.spine for v in p[1:])


def test_star_comb_rejects_non_tree():
    with pytest.raises(NotATree):
        star_comb(family_build("directed_ladder"), lambda v: True, 3, 10)


def test_star_comb_never_stars_beyond_degree():
    # locally finite tree: max degree 3, so no 4-leaf star can be found
    f = family_build("comb_of_columns")
    res = star_comb(f, lambda v: True, 4, 20)
    assert res.kind != "star"


def test_star_comb_exhausted_when_window_too_small():
    res = star_comb(family_build("symmetric_ray"), {1000}, 1, 5)
    assert res.kind == "exhausted"


# --- necklaces ---------------------------------------------------------------

def test_necklace_symmetric_ray_singleton_beads():
    prefix = necklace_prefix(family_build("symmetric_ray"), "omega", 4, 10)
    assert [sorted(b) for b in prefix.beads] == [[0], [1], [2], [3]]
    assert prefix.apex_edges is None
    for (fw, bw) in prefix.links:
        assert fw == tuple(reversed(bw))


def test_necklace_apex_sends_edge_into_every_bead():
    prefix = necklace_prefix(family_build("apex_necklace"), "omega", 4, 10)
    assert len(prefix.beads) == 4
    assert prefix.apex_edges is not None
    assert all(e[0] == 0 for e in prefix.apex_edges)


def test_necklace_ladder_ray_a():
    prefix = necklace_prefix(family_build("directed_ladder"), "a", 3, 10)
    assert [sorted(b) for b in prefix.beads] == [[0], [2], [4]]


def test_necklace_window_too_small():
    with pytest.raises(NoNecklaceInWindow):
        necklace_prefix(family_build("symmetric_ray"), "omega", 50, 5)


# --- solidity ----------------------------------------------------------------

def test_solidity_bounds_solid_families():
    for name in ("symmetric_ray", "directed_ladder", "apex_necklace"):
        assert solidity_check(family_build(name), 15)["within_bound"], name


def test_solidity_fails_for_non_solid_families():
    for name in ("comb_of_columns", "transitive_omega"):
        assert not solidity_check(family_build(name), 15)["within_bound"], name


def test_ray_prefix_ids_increase():
    f = family_build("comb_of_columns")
    verts = ray_in_window(f, "col2", truncate(f, 25).bound)
    assert list(verts) == sorted(verts)
    assert f.label(verts[0]) == "b2"
