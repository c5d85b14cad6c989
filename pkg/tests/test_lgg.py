"""Landmark extraction against the exhaustive delete-relaxation oracle,
plus serialization of the graph files."""

import json

import pytest

from plgg.pddl import Atom
from plgg.lgg import (LGG, LggFormatError, UnsolvableTaskError, extract_lgg,
                      is_landmark_oracle, lgg_from_json, lgg_to_json,
                      oracle_landmarks, relaxed_levels)


def atom(s):
    name, _, rest = s.partition("(")
    args = tuple(a.strip() for a in rest.rstrip(")").split(",") if a.strip())
    return Atom(name, args)


# --- oracle verdicts ------------------------------------------------------------


def test_oracle_init_membership(make_task):
    # membership in the initial state decides before any reachability check
    verdict = is_landmark_oracle(make_task("p01"), atom("ontable(c)"))
    assert verdict.is_landmark
    assert verdict.reason == "in-init-or-goal"


def test_oracle_goal_membership(make_task):
    verdict = is_landmark_oracle(make_task("p01"), atom("on(a,b)"))
    assert verdict.is_landmark
    assert verdict.reason == "in-init-or-goal"


def test_oracle_necessary_intermediate(make_task):
    # the hand must hold a before on(a,b) can ever be achieved
    verdict = is_landmark_oracle(make_task("p01"), atom("holding(a)"))
    assert verdict.is_landmark
    assert verdict.reason == "goal-unreachable-without"


def test_oracle_rejects_unneeded_fact(make_task):
    verdict = is_landmark_oracle(make_task("p01"), atom("holding(b)"))
    assert not verdict.is_landmark
    assert verdict.reason == "achievable-without"


def test_oracle_rejects_unknown_atom(make_task):
    with pytest.raises(ValueError):
        is_landmark_oracle(make_task("p01"), atom("on(a,z)"))


def test_oracle_set_contains_init_and_goal(make_task):
    task = make_task("p02")
    landmarks = oracle_landmarks(task)
    assert set(task.init) <= landmarks
    assert set(task.goal) <= landmarks


# --- extraction -----------------------------------------------------------------


P01_VERTICES = {"clear(a)", "clear(b)", "handempty()", "holding(a)", "on(a,b)",
                "ontable(a)"}
P01_EDGES = {("clear(a)", "holding(a)"), ("clear(b)", "on(a,b)"),
             ("handempty()", "holding(a)"), ("holding(a)", "on(a,b)"),
             ("ontable(a)", "holding(a)")}


def test_extract_p01_exact(make_task):
    lgg = extract_lgg(make_task("p01"))
    assert {str(v).replace(" ", "") for v in lgg.vertices} == P01_VERTICES
    edges = {(str(s).replace(" ", ""), str(d).replace(" ", "")) for s, d in lgg.edges}
    assert edges == P01_EDGES


def test_extracted_vertices_are_sound(make_task):
    for name in ("p01", "p05"):
        task = make_task(name)
        for vertex in extract_lgg(task).vertices:
            assert is_landmark_oracle(task, vertex).is_landmark


def test_extractor_recall_below_oracle(make_task):
    # effect-side landmarks like holding(a) on a tower task escape the
    # shared-precondition candidate generator, so the oracle finds more
    task = make_task("p02")
    extracted = set(extract_lgg(task).vertices)
    oracle = oracle_landmarks(task)
    assert extracted < oracle
    assert len(extracted) == 9 and len(oracle) == 11


def test_unsolvable_task_raises(domain):
    from plgg.pddl import ground_task, parse_problem
    text = ("(define (problem impossible) (:domain blocksworld) "
            "(:objects a - block) (:init (ontable a) (clear a) (handempty)) "
            "(:goal (and (on a a))))")
    task = ground_task(domain, parse_problem(text, domain))
    with pytest.raises(UnsolvableTaskError) as err:
        extract_lgg(task)
    assert "impossible" in str(err.value)


def test_relaxed_levels_start_at_init(make_task):
    task = make_task("p01")
    fact_level, action_level = relaxed_levels(task)
    for fact in task.init:
        assert fact_level[fact] == 0
    assert all(level >= 0 for level in action_level.values())


# --- serialization --------------------------------------------------------------


def test_json_roundtrip(make_task):
    lgg = extract_lgg(make_task("p03"))
    text = lgg_to_json(lgg)
    back = lgg_from_json(text)
    assert back == lgg
    assert lgg_to_json(back) == text


def test_import_external_graph_file():
    # four-edge file in the external format, written by hand
    payload = {
        "task": "external-1",
        "order_type": "greedy_necessary",
        "vertices": [{"pred": "clear", "args": ["b"]},
                     {"pred": "holding", "args": ["a"]},
                     {"pred": "on", "args": ["a", "b"]},
                     {"pred": "ontable", "args": ["a"]},
                     {"pred": "handempty", "args": []}],
        "edges": [[0, 2], [1, 2], [3, 1], [4, 1]],
    }
    lgg = lgg_from_json(json.dumps(payload))
    assert lgg.task == "external-1"
    assert len(lgg.vertices) == 5 and len(lgg.edges) == 4
    assert (Atom("clear", ("b",)), Atom("on", ("a", "b"))) in lgg.edges


BROKEN = [
    ("not json at all", "/"),
    (json.dumps({"task": "t"}), "/"),
    (json.dumps({"task": "t", "order_type": "total", "vertices": [], "edges": []}),
     "/order_type"),
    (json.dumps({"task": "t", "order_type": "greedy_necessary",
                 "vertices": [{"pred": "p"}], "edges": []}), "/vertices/0"),
    (json.dumps({"task": "t", "order_type": "greedy_necessary",
                 "vertices": [{"pred": "p", "args": []}], "edges": [[0, 5]]}),
     "/edges/0/1"),
    (json.dumps({"task": "t", "order_type": "greedy_necessary",
                 "vertices": [{"pred": "p", "args": []}, {"pred": "p", "args": []}],
                 "edges": []}), "/vertices/1"),
]


@pytest.mark.parametrize("text,pointer", BROKEN)
def test_format_errors_carry_pointers(text, pointer):
    with pytest.raises(LggFormatError) as err:
        lgg_from_json(text)
    assert err.value.pointer == pointer
