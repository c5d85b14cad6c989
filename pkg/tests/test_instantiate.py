"""Generation, equivalence search, fixpoint combination, and extraction of
task-specific probabilistic landmark graphs."""

import pytest
from hypothesis import given, settings, strategies as st

from plgg.pddl import Atom
from plgg.plog import LiftedEdge
from plgg.instantiate import (PLgg, VarConstraintStore, VarSource, apply_instantiation,
                              combine, equiv_candidates, equivalent_atoms,
                              equivalent_params, extract_result, fresh_variables,
                              generate_plgg_goal, generate_plgg_init,
                              get_instantiated_lms, instantiate_task, instantiation,
                              param_distance, plgg_from_json, plgg_to_dot,
                              plgg_to_json, search_best_equiv, update_distinct_consts)


# --- constraint bookkeeping -----------------------------------------------------


def test_update_distinct_consts_open_variable():
    store = VarConstraintStore()
    pred = Atom("p", ("a", "?x2"))
    lm = Atom("q", ("a", "?x0", "?x1"))
    update_distinct_consts(store, pred, lm)
    assert store.forbidden_objects("?x2") == {"a"}
    assert store.forbidden_variables("?x2") == {"?x0", "?x1"}


def test_update_distinct_consts_shared_variable_exempt():
    # a variable the landmark itself carries is not constrained against it
    store = VarConstraintStore()
    update_distinct_consts(store, Atom("on", ("?x0", "?x1")), Atom("on", ("b", "?x1")))
    assert store.forbidden_objects("?x1") == frozenset()
    assert store.forbidden_objects("?x0") == {"b"}
    assert store.forbidden_variables("?x0") == {"?x1"}


def test_store_merge_unions_constraints():
    a, b = VarConstraintStore(), VarConstraintStore()
    a.for_var("?x0").objects.add("a")
    b.for_var("?x0").objects.add("b")
    b.for_var("?x1").variables.add("?x0")
    a.merge(b)
    assert a.forbidden_objects("?x0") == {"a", "b"}
    assert a.forbidden_variables("?x1") == {"?x0"}


def test_fresh_variables_keep_coreferences():
    source = VarSource()
    edge = LiftedEdge(src=Atom("clear", ("?x1",)), dst=Atom("on", ("?x0", "?x1")))
    renamed = fresh_variables(edge, source)
    assert renamed.dst.args[1] == renamed.src.args[0]
    assert renamed.dst.args[0] != renamed.dst.args[1]
    again = fresh_variables(edge, source)
    assert set(again.dst.args).isdisjoint(set(renamed.dst.args))


# --- equivalence ----------------------------------------------------------------


def test_equivalent_params_clauses():
    store = VarConstraintStore()
    store.for_var("?x2").objects.add("a")
    assert equivalent_params("a", "a", store)
    assert not equivalent_params("a", "b", store)
    assert not equivalent_params("?x2", "a", store)
    assert equivalent_params("?x2", "b", store)
    # same forbidden sets, no mutual ban
    store.for_var("?x3").objects.add("a")
    assert equivalent_params("?x2", "?x3", store)
    store.for_var("?x2").variables.add("?x3")
    assert not equivalent_params("?x2", "?x3", store)
    # differing forbidden sets
    assert not equivalent_params("?x2", "?x4", store)


def test_equivalent_atoms_requires_same_predicate():
    store = VarConstraintStore()
    assert equivalent_atoms(Atom("on", ("?x0", "b")), Atom("on", ("a", "b")), store)
    assert not equivalent_atoms(Atom("clear", ("a",)), Atom("holding", ("a",)), store)
    assert not equivalent_atoms(Atom("on", ("a",)), Atom("on", ("a", "b")), store)


def test_param_distance_counts_mixed_positions():
    assert param_distance(Atom("p", ("a", "?x0", "?x1")), Atom("p", ("a", "b", "c"))) == 2
    assert param_distance(Atom("p", ("a", "b", "c")), Atom("p", ("a", "b", "c"))) == 0
    assert param_distance(Atom("p", ("?x0", "?x1")), Atom("p", ("?x2", "b"))) == 1


def spec_candidates_graph():
    # five candidate nodes around lm = p(a,b,c), ranking probabilities set
    # so that p(a,?x4,c) outranks p(a,b,?x5)
    r = Atom("r", ())
    nodes = {
        Atom("p", ("a", "?x0", "?x1")): {r: 0.9},
        Atom("p", ("?x2", "b", "?x3")): {r: 0.9},
        Atom("p", ("a", "?x4", "c")): {r: 0.5},
        Atom("p", ("a", "b", "?x5")): {r: 0.25},
        Atom("p", ("?x6", "?x7", "?x8")): {r: 0.9},
        r: {},
    }
    return PLgg(nodes=nodes, side="goal", store=VarConstraintStore())


def test_candidate_distances_match_worked_example():
    plgg = spec_candidates_graph()
    lm = Atom("p", ("a", "b", "c"))
    found = equiv_candidates(plgg, lm, VarConstraintStore())
    assert sorted(c.distance for c in found) == [1, 1, 2, 2, 3]
    closest = {c.candidate for c in found if c.distance == 1}
    assert closest == {Atom("p", ("a", "?x4", "c")), Atom("p", ("a", "b", "?x5"))}


def test_top_n_binding_selection():
    plgg = spec_candidates_graph()
    lm = Atom("p", ("a", "b", "c"))
    assert search_best_equiv(plgg, lm, VarConstraintStore(), top_n=1) == {"?x4": "b"}
    assert search_best_equiv(plgg, lm, VarConstraintStore(), top_n=2) == {
        "?x4": "b", "?x5": "c"}


def test_search_best_equiv_without_candidates():
    plgg = PLgg(nodes={}, side="goal", store=VarConstraintStore())
    assert search_best_equiv(plgg, Atom("p", ("a",)), VarConstraintStore()) == {}


def test_first_binding_wins_across_landmarks():
    store = VarConstraintStore()
    nodes = {Atom("q", ("?x0",)): {Atom("r", ()): 1.0}, Atom("r", ()): {}}
    plgg = PLgg(nodes=nodes, side="goal", store=store)
    out = instantiation(plgg, [Atom("q", ("a",)), Atom("q", ("b",))], store)
    assert Atom("q", ("a",)) in out.nodes
    assert Atom("q", ("b",)) not in out.nodes


# --- rewriting ------------------------------------------------------------------


def test_apply_instantiation_copies_edges():
    store = VarConstraintStore()
    lifted = Atom("on", ("b", "?x0"))
    nodes = {lifted: {Atom("clear", ("?x0",)): 0.7}, Atom("clear", ("?x0",)): {}}
    plgg = PLgg(nodes=nodes, side="goal", store=store)
    out = apply_instantiation(plgg, {"?x0": "a"})
    assert out.nodes[Atom("on", ("b", "a"))] == {Atom("clear", ("a",)): 0.7}
    assert lifted in out.nodes  # the lifted original survives


def test_apply_instantiation_noop_binding():
    store = VarConstraintStore()
    plgg = PLgg(nodes={Atom("clear", ("a",)): {}}, side="goal", store=store)
    out = apply_instantiation(plgg, {"?x9": "b"})
    assert out.nodes == plgg.nodes


def test_apply_instantiation_respects_constraints(caplog):
    store = VarConstraintStore()
    store.for_var("?x0").objects.add("a")
    plgg = PLgg(nodes={Atom("on", ("b", "?x0")): {}}, side="goal", store=store)
    with caplog.at_level("WARNING"):
        out = apply_instantiation(plgg, {"?x0": "a"})
    assert Atom("on", ("b", "a")) not in out.nodes
    assert any("constraint" in record.message for record in caplog.records)


def test_partial_binding_leaves_disjunctive_node():
    store = VarConstraintStore()
    node = Atom("p", ("?x0", "?x1", "c"))
    plgg = PLgg(nodes={node: {}}, side="goal", store=store)
    out = apply_instantiation(plgg, {"?x0": "a"})
    assert Atom("p", ("a", "?x1", "c")) in out.nodes


# --- generation -----------------------------------------------------------------


def test_goal_generation_reaches_hand_facts(plog, make_task):
    task = make_task("p06")
    plgg, _ = generate_plgg_goal(plog, task)
    assert Atom("on", ("a", "b")) in plgg.nodes
    assert Atom("holding", ("a",)) in plgg.nodes
    assert Atom("clear", ("b",)) in plgg.nodes
    assert Atom("handempty", ()) in plgg.nodes
    # predecessors of the goal carry the learned probability (6 of the 10
    # on-rooted training subgraphs have the holding in-edge)
    assert plgg.nodes[Atom("on", ("a", "b"))][Atom("holding", ("a",))] == pytest.approx(0.6)


def test_goal_generation_stops_at_init_facts(plog, make_task):
    task = make_task("p06")
    plgg, _ = generate_plgg_goal(plog, task)
    for fact in task.init:
        if fact in plgg.nodes:
            assert plgg.nodes[fact] == {}


def test_init_generation_covers_initial_state(plog, make_task):
    task = make_task("p06")
    plgg, _ = generate_plgg_init(plog, task)
    assert set(task.init) <= set(plgg.nodes)


def test_generation_records_constraints(plog, make_task):
    task = make_task("p06")
    _, store = generate_plgg_goal(plog, task)
    constrained = [v for v in store.variables() if store.forbidden_objects(v)]
    assert constrained


def test_generation_warns_on_unknown_seed(plog, make_task, caplog, domain):
    from plgg.pddl import ground_task, parse_problem
    text = ("(define (problem odd) (:domain blocksworld) "
            "(:objects a b - block) "
            "(:init (ontable a) (ontable b) (clear a) (clear b) (handempty)) "
            "(:goal (and (holding a) (ontable b))))")
    task = ground_task(domain, parse_problem(text, domain))
    with caplog.at_level("WARNING"):
        plgg, _ = generate_plgg_goal(plog, task)
    assert Atom("holding", ("a",)) in plgg.nodes


# --- combination ----------------------------------------------------------------


def test_combine_reaches_monotone_fixpoint(plog, make_task):
    task = make_task("p06")
    log = []
    plgg = instantiate_task(plog, task, iteration_log=log)
    assert len(log) - 1 <= len(task.facts)
    for before, after in zip(log, log[1:]):
        assert before <= after
    grounded = {n for n in plgg.nodes if n.is_ground}
    expected = set(task.init) | set(task.goal) | {Atom("holding", ("a",)),
                                                  Atom("holding", ("b",))}
    assert expected <= grounded


def test_combine_side_order_converges_to_same_landmarks(plog, make_task):
    task = make_task("p09")
    source_a = VarSource()
    store_a = VarConstraintStore()
    goal_a, _ = generate_plgg_goal(plog, task, var_source=source_a, store=store_a)
    init_a, _ = generate_plgg_init(plog, task, var_source=source_a, store=store_a)
    first = combine(goal_a, init_a, task, store_a, init_first=True)
    source_b = VarSource()
    store_b = VarConstraintStore()
    goal_b, _ = generate_plgg_goal(plog, task, var_source=source_b, store=store_b)
    init_b, _ = generate_plgg_init(plog, task, var_source=source_b, store=store_b)
    second = combine(goal_b, init_b, task, store_b, init_first=False)
    assert get_instantiated_lms(first, task) == get_instantiated_lms(second, task)


def test_combined_union_is_predecessor_oriented(plog, make_task):
    task = make_task("p06")
    plgg = instantiate_task(plog, task)
    goal = Atom("on", ("a", "b"))
    assert plgg.nodes[goal].get(Atom("holding", ("a",))) == pytest.approx(0.6)
    # init-side successors appear as predecessor entries of the successor
    init_fact = Atom("clear", ("a",))
    successors = [n for n, preds in plgg.nodes.items() if init_fact in preds]
    assert successors


# --- extraction and serialization ----------------------------------------------


def test_extract_result_threshold(plog, make_task):
    task = make_task("p06")
    plgg = instantiate_task(plog, task)
    full = extract_result(plgg, threshold=0.0)
    assert all(0.0 < mu <= 1.0 for mu in full.orderings.values())
    strict = extract_result(plgg, threshold=0.3)
    assert all(mu >= 0.3 for mu in strict.orderings.values())
    assert len(strict.orderings) < len(full.orderings)


def test_extract_result_keeps_isolated_nodes():
    store = VarConstraintStore()
    plgg = PLgg(nodes={Atom("clear", ("a",)): {},
                       Atom("on", ("a", "b")): {Atom("clear", ("b",)): 0.29}},
                side="goal", store=store)
    content = extract_result(plgg, threshold=0.3)
    assert Atom("clear", ("a",)) in content.landmarks_grounded
    assert not content.orderings
    assert Atom("on", ("a", "b")) not in content.landmarks_grounded


@given(st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=40, deadline=None)
def test_extraction_shrinks_with_threshold(plog, make_task, threshold):
    plgg = instantiate_task(plog, make_task("p05"))
    base = extract_result(plgg, threshold=0.0)
    cut = extract_result(plgg, threshold=threshold)
    assert set(cut.orderings) <= set(base.orderings)
    assert cut.landmarks <= base.landmarks
    assert all(mu >= threshold for mu in cut.orderings.values())


def test_plgg_json_roundtrip(plog, make_task):
    plgg = instantiate_task(plog, make_task("p05"))
    text = plgg_to_json(plgg)
    back = plgg_from_json(text)
    assert plgg_to_json(back) == text
    a, b = extract_result(plgg), extract_result(back)
    assert a.landmarks == b.landmarks and a.orderings == b.orderings


def test_plgg_json_side_orientation(plog, make_task):
    task = make_task("p01")
    goal_side, _ = generate_plgg_goal(plog, task)
    init_side, _ = generate_plgg_init(plog, task)
    for side in (goal_side, init_side):
        back = plgg_from_json(plgg_to_json(side))
        assert extract_result(back).orderings == extract_result(side).orderings


def test_plgg_dot_marks_lifted(plog, make_task):
    plgg = instantiate_task(plog, make_task("p01"))
    dot = plgg_to_dot(plgg)
    assert dot.startswith("digraph")
    assert "style=dashed" in dot
