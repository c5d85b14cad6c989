"""Landmark generation graphs for ground tasks.

A landmark generation graph (LGG) collects ground landmarks of a task and
greedy-necessary orderings between them: an edge (L1, L2) says L1 holds
immediately before L2 is first achieved.  Verdicts come from a brute-force
oracle over the delete relaxation; extraction back-chains from the goal
through first achievers.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .pddl import Atom, GroundAction, GroundTask, PddlError

logger = logging.getLogger(__name__)

ORDER_TYPE = "greedy_necessary"


class UnsolvableTaskError(PddlError):
    """Raised when a goal atom is unreachable even in the delete relaxation."""


class LggFormatError(PddlError):
    """A persisted landmark graph violates its schema; carries a JSON pointer."""

    def __init__(self, message: str, pointer: str):
        super().__init__(f"{message} (at {pointer})")
        self.pointer = pointer


@dataclass(frozen=True)
class LandmarkVerdict:
    atom: Atom
    is_landmark: bool
    reason: str  # "in-init-or-goal" | "goal-unreachable-without" | "achievable-without"


@dataclass(frozen=True)
class LGG:
    """Ground landmarks plus greedy-necessary ordering edges, with provenance."""

    task: str
    vertices: frozenset[Atom]
    edges: frozenset[tuple[Atom, Atom]]


def relaxed_closure(init: Iterable[Atom], actions: Iterable[GroundAction]) -> frozenset[Atom]:
    """Fixpoint of fact reachability when deletes are ignored."""
    facts = set(init)
    pending = list(actions)
    while True:
        ready = [a for a in pending if a.pre <= facts]
        if not ready:
            return frozenset(facts)
        pending = [a for a in pending if not a.pre <= facts]
        for a in ready:
            facts.update(a.add)


def relaxed_levels(task: GroundTask) -> tuple[dict[Atom, int], dict[GroundAction, int]]:
    """First level at which each fact holds / each action applies, relaxed.

    Init facts sit at level 0; an action applicable at level t contributes
    its add effects at level t + 1.
    """
    fact_level = {f: 0 for f in task.init}
    action_level: dict[GroundAction, int] = {}
    remaining = list(task.actions)
    level = 0
    while remaining:
        ready = [a for a in remaining if all(p in fact_level for p in a.pre)]
        if not ready:
            break
        for a in ready:
            action_level[a] = level
        remaining = [a for a in remaining if a not in action_level]
        fresh = {f for a in ready for f in a.add if f not in fact_level}
        if not fresh:
            break
        for f in fresh:
            fact_level[f] = level + 1
        level += 1
    return fact_level, action_level


def is_landmark_oracle(task: GroundTask, atom: Atom) -> LandmarkVerdict:
    """Decide by brute force whether `atom` is a landmark of the task.

    Membership in init or goal settles it immediately.  Otherwise the atom
    is a landmark exactly when forbidding every action that adds it leaves
    the goal unreachable in the delete relaxation.
    """
    if atom not in task.facts:
        raise ValueError(f"{atom} is not a fact of task {task.name}")
    if atom in task.init or atom in task.goal:
        return LandmarkVerdict(atom, True, "in-init-or-goal")
    allowed = [a for a in task.actions if atom not in a.add]
    reachable = relaxed_closure(task.init, allowed)
    if task.goal <= reachable:
        return LandmarkVerdict(atom, False, "achievable-without")
    return LandmarkVerdict(atom, True, "goal-unreachable-without")


def oracle_landmarks(task: GroundTask) -> frozenset[Atom]:
    """Every fact the oracle accepts.  Exhaustive; meant for small tasks."""
    return frozenset(f for f in task.facts if is_landmark_oracle(task, f).is_landmark)


def extract_lgg(task: GroundTask) -> LGG:
    """Back-chain greedy-necessary landmarks from the goal.

    For a landmark L outside init, every atom shared by the preconditions
    of all first achievers of L (achievers applicable strictly before L
    first holds in the relaxation) is a candidate; candidates that pass
    the oracle become vertices with an edge into L and are chained further.
    """
    fact_level, action_level = relaxed_levels(task)
    missing = sorted(g for g in task.goal if g not in fact_level)
    if missing:
        raise UnsolvableTaskError(
            f"task {task.name} is unsolvable: goal atom {missing[0]} is "
            "unreachable in the delete relaxation")

    vertices: set[Atom] = set(task.goal)
    edges: set[tuple[Atom, Atom]] = set()
    verdict_cache: dict[Atom, bool] = {}

    def passes(atom: Atom) -> bool:
        if atom not in verdict_cache:
            verdict_cache[atom] = is_landmark_oracle(task, atom).is_landmark
        return verdict_cache[atom]

    queue = deque(sorted(task.goal))
    seen = set(queue)
    while queue:
        lm = queue.popleft()
        if lm in task.init:
            continue
        level = fact_level[lm]
        first_achievers = [a for a in task.actions
                           if lm in a.add and action_level.get(a, level) < level]
        if not first_achievers:
            continue
        shared = frozenset.intersection(*(a.pre for a in first_achievers))
        for cand in sorted(shared):
            if cand == lm or not passes(cand):
                continue
            vertices.add(cand)
            edges.add((cand, lm))
            if cand not in seen:
                seen.add(cand)
                queue.append(cand)

    lgg = LGG(task=task.name, vertices=frozenset(vertices), edges=frozenset(edges))
    if _has_cycle(lgg):
        logger.warning("landmark graph of %s contains an ordering cycle", task.name)
    return lgg


def _has_cycle(lgg: LGG) -> bool:
    succs: dict[Atom, list[Atom]] = {}
    for src, dst in lgg.edges:
        succs.setdefault(src, []).append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {v: WHITE for v in lgg.vertices}

    def visit(v: Atom) -> bool:
        color[v] = GREY
        for nxt in succs.get(v, ()):
            if color[nxt] == GREY:
                return True
            if color[nxt] == WHITE and visit(nxt):
                return True
        color[v] = BLACK
        return False

    return any(color[v] == WHITE and visit(v) for v in sorted(lgg.vertices))


# --- serialization ----------------------------------------------------------


def lgg_to_json(lgg: LGG) -> str:
    vertices = sorted(lgg.vertices)
    index = {v: i for i, v in enumerate(vertices)}
    payload = {
        "task": lgg.task,
        "vertices": [{"pred": v.pred, "args": list(v.args)} for v in vertices],
        "edges": sorted([index[s], index[d]] for s, d in lgg.edges),
        "order_type": ORDER_TYPE,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def lgg_from_json(text: str) -> LGG:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LggFormatError(f"not valid JSON: {exc}", "/") from None
    if not isinstance(payload, dict):
        raise LggFormatError("top level must be an object", "/")
    for key in ("task", "vertices", "edges", "order_type"):
        if key not in payload:
            raise LggFormatError(f"missing required key {key!r}", "/")
    if payload["order_type"] != ORDER_TYPE:
        raise LggFormatError(f"unsupported order_type {payload['order_type']!r}",
                             "/order_type")
    if not isinstance(payload["task"], str):
        raise LggFormatError("task must be a string", "/task")

    vertices: list[Atom] = []
    if not isinstance(payload["vertices"], list):
        raise LggFormatError("vertices must be an array", "/vertices")
    for i, entry in enumerate(payload["vertices"]):
        ptr = f"/vertices/{i}"
        if (not isinstance(entry, dict) or not isinstance(entry.get("pred"), str)
                or not isinstance(entry.get("args"), list)
                or not all(isinstance(a, str) for a in entry["args"])):
            raise LggFormatError("vertex must be {pred: str, args: [str]}", ptr)
        atom = Atom(entry["pred"], tuple(entry["args"]))
        if atom in vertices:
            raise LggFormatError(f"duplicate vertex {atom}", ptr)
        vertices.append(atom)

    edges: set[tuple[Atom, Atom]] = set()
    if not isinstance(payload["edges"], list):
        raise LggFormatError("edges must be an array", "/edges")
    for i, pair in enumerate(payload["edges"]):
        ptr = f"/edges/{i}"
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)):
            raise LggFormatError("edge must be a [src, dst] index pair", ptr)
        for j, idx in enumerate(pair):
            if not 0 <= idx < len(vertices):
                raise LggFormatError(f"edge endpoint {idx} is not a vertex index",
                                     f"{ptr}/{j}")
        edges.add((vertices[pair[0]], vertices[pair[1]]))

    return LGG(task=payload["task"], vertices=frozenset(vertices), edges=frozenset(edges))


def write_lgg(lgg: LGG, path: str | Path) -> None:
    Path(path).write_text(lgg_to_json(lgg))


def read_lgg(path: str | Path) -> LGG:
    return lgg_from_json(Path(path).read_text())
