"""Lifting, pooled counts, and the probability laws of learned graphs."""

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from plgg.pddl import Atom
from plgg.lgg import LGG, extract_lgg
from plgg.plog import (VocabularyError, WLog, build_log, build_task_log,
                       finalize_plog, learn_plog, lift_atom, lift_edge,
                       merge_wlogs, plog_from_json, plog_to_dot, plog_to_json)


def test_lift_atom_examples():
    assert lift_atom(Atom("on", ("a", "b"))) == Atom("on", ("?x0", "?x1"))
    assert lift_atom(Atom("on", ("a", "a"))) == Atom("on", ("?x0", "?x0"))
    assert lift_atom(Atom("handempty", ())) == Atom("handempty", ())
    assert lift_atom(Atom("clear", ("c",))) == Atom("clear", ("?x0",))


def test_lift_edge_destination_first():
    # destination parameters claim ?x0... so the dst stays standalone-canonical
    edge = lift_edge(Atom("p", ("c",)), Atom("q", ("d",)))
    assert edge.src == Atom("p", ("?x1",)) and edge.dst == Atom("q", ("?x0",))
    edge = lift_edge(Atom("clear", ("b",)), Atom("on", ("a", "b")))
    assert edge.src == Atom("clear", ("?x1",))
    assert edge.dst == Atom("on", ("?x0", "?x1"))


def test_lift_edge_shared_object_shares_variable():
    edge = lift_edge(Atom("holding", ("a",)), Atom("on", ("a", "b")))
    assert edge.src == Atom("holding", ("?x0",))
    assert edge.dst == Atom("on", ("?x0", "?x1"))


@given(st.text(alphabet="abc", min_size=1, max_size=2),
       st.lists(st.sampled_from("defg"), min_size=0, max_size=4))
@settings(max_examples=200)
def test_lift_atom_inverts(pred, args):
    # substituting each canonical variable back recovers the original atom
    ground = Atom(pred, tuple(args))
    lifted = lift_atom(ground)
    inverse = {v: o for v, o in zip(lifted.args, ground.args)}
    assert lifted.substitute(inverse) == ground


def test_build_log_dedups_lifted_edges():
    dst = Atom("on", ("a", "b"))
    lgg = LGG(task="t",
              vertices=(Atom("clear", ("b",)), Atom("clear", ("c",)), dst,
                        Atom("on", ("c", "d")), Atom("on", ("a", "d"))),
              edges=((Atom("clear", ("b",)), dst),
                     (Atom("clear", ("c",)), Atom("on", ("c", "d")))))
    log = build_log(lgg, dst)
    assert log.root == Atom("on", ("?x0", "?x1"))
    assert len(log.edges) == 1


def test_ngraph_counts_occurrences_not_tasks(train_lggs):
    # every vertex occurrence roots one LOG, so counts exceed the task count
    wlog = merge_wlogs([build_task_log(lgg) for lgg in train_lggs])
    holding = Atom("holding", ("?x0",))
    assert wlog.log_counts[holding] == 6
    assert wlog.log_counts[Atom("handempty", ())] == 4


def test_learned_probabilities(plog):
    probs = {(str(e.src).replace(" ", ""), str(e.dst).replace(" ", "")): mu
             for e, mu in plog.probs.items()}
    assert probs[("clear(?x0)", "holding(?x0)")] == 1.0
    assert probs[("handempty()", "holding(?x0)")] == 1.0
    assert probs[("ontable(?x0)", "holding(?x0)")] == pytest.approx(5 / 6)
    assert probs[("on(?x0,?x1)", "holding(?x0)")] == pytest.approx(1 / 6)


def test_all_probabilities_in_unit_interval(plog):
    assert all(0.0 < mu <= 1.0 for mu in plog.probs.values())


def test_single_graph_gives_certainty(train_lggs, domain):
    plog = learn_plog(train_lggs[:1], domain=domain.name)
    assert all(mu == 1.0 for mu in plog.probs.values())


@given(st.randoms(use_true_random=False))
@settings(max_examples=50, deadline=None)
def test_merge_is_order_invariant(train_lggs, rng):
    parts = [build_task_log(lgg) for lgg in train_lggs]
    shuffled = list(parts)
    rng.shuffle(shuffled)
    a = finalize_plog(merge_wlogs(parts))
    b = finalize_plog(merge_wlogs(shuffled))
    assert a.probs == b.probs and a.log_counts == b.log_counts


def test_arity_conflict_rejected():
    one = WLog(vertices={Atom("p", ("?x0",))})
    other = WLog(vertices={Atom("p", ("?x0", "?x1"))})
    with pytest.raises(VocabularyError):
        merge_wlogs([one, other])


def test_domain_conflict_rejected():
    one = WLog(vertices=set(), domain="alpha")
    other = WLog(vertices=set(), domain="beta")
    with pytest.raises(VocabularyError):
        merge_wlogs([one, other])


def test_count_exceeding_support_rejected(train_lggs):
    wlog = merge_wlogs([build_task_log(lgg) for lgg in train_lggs])
    edge = next(iter(wlog.edge_counts))
    wlog.edge_counts[edge] = wlog.log_counts[edge.dst] + 1
    with pytest.raises(VocabularyError):
        finalize_plog(wlog)


def test_json_roundtrip_preserves_edge_context(plog):
    text = plog_to_json(plog)
    back = plog_from_json(text)
    assert back.probs == plog.probs
    assert back.log_counts == plog.log_counts
    assert plog_to_json(back) == text
    # source patterns that co-reference the destination survive the format
    payload = json.loads(text)
    args = {tuple(v["args"]) for v in payload["vertices"]}
    assert ("?x0", "?x1") in args


def test_dot_output_marks_lifted_nodes(plog):
    dot = plog_to_dot(plog)
    assert dot.startswith("digraph")
    assert "style=dashed" in dot
    assert "1.00" in dot
