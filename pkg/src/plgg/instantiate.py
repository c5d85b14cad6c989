"""Task-specific probabilistic landmark graphs.

Given a learned lifted ordering graph and a new ground task, two graphs are
generated: one backward from the goal (nodes point at predecessors) and one
forward from the initial state (nodes point at successors).  Landmarks
grounded on one side then drive variable bindings on the other, round after
round, until no new ground landmark appears; the union of both sides is the
task's probabilistic landmark graph.

Whenever an expansion introduces a variable next to known parameters, the
known parameters are recorded as forbidden values for that variable: a
variable standing next to the block `a` in `on(a, ?x1)` can never be `a`.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

from .pddl import Atom, GroundTask, is_variable
from .plog import PLog, LiftedEdge, lift_atom

logger = logging.getLogger(__name__)

SIDE_GOAL = "goal"
SIDE_INIT = "init"
SIDE_COMBINED = "combined"


@dataclass
class VarConstraints:
    """Values a variable must stay distinct from."""

    objects: set[str] = field(default_factory=set)
    variables: set[str] = field(default_factory=set)


class VarConstraintStore:
    """Distinct-value constraints per variable, shared across one task run."""

    def __init__(self):
        self._by_var: dict[str, VarConstraints] = {}

    def for_var(self, var: str) -> VarConstraints:
        if var not in self._by_var:
            self._by_var[var] = VarConstraints()
        return self._by_var[var]

    def forbidden_objects(self, var: str) -> frozenset[str]:
        entry = self._by_var.get(var)
        return frozenset(entry.objects) if entry else frozenset()

    def forbidden_variables(self, var: str) -> frozenset[str]:
        entry = self._by_var.get(var)
        return frozenset(entry.variables) if entry else frozenset()

    def variables(self) -> frozenset[str]:
        return frozenset(self._by_var)

    def merge(self, other: "VarConstraintStore") -> None:
        for var, entry in other._by_var.items():
            mine = self.for_var(var)
            mine.objects.update(entry.objects)
            mine.variables.update(entry.variables)


class VarSource:
    """Hands out globally fresh canonical variable names."""

    def __init__(self, start: int = 0):
        self._next = start

    def fresh(self) -> str:
        name = f"?x{self._next}"
        self._next += 1
        return name


def fresh_variables(edge: LiftedEdge, source: VarSource) -> LiftedEdge:
    """Rename the edge's variables to fresh ones, keeping co-references."""
    mapping: dict[str, str] = {}
    for p in edge.dst.args + edge.src.args:
        if is_variable(p) and p not in mapping:
            mapping[p] = source.fresh()
    return LiftedEdge(src=edge.src.substitute(mapping), dst=edge.dst.substitute(mapping))


def update_distinct_consts(store: VarConstraintStore, pred: Atom, lm: Atom) -> None:
    """Record that `pred`'s open variables differ from everything in `lm`.

    Every variable of `pred` that does not itself occur in `lm` must take a
    value distinct from all of `lm`'s parameters, so `lm`'s objects join
    its forbidden objects and `lm`'s variables its forbidden variables.
    """
    lm_params = lm.params()
    for var in sorted(pred.variables()):
        if var in lm_params:
            continue
        entry = store.for_var(var)
        entry.objects.update(lm.objects())
        entry.variables.update(lm.variables())


@dataclass
class PLgg:
    """One side (or the union) of a task's probabilistic landmark graph.

    `nodes` maps each atom to its neighbours with edge probabilities; on the
    goal side neighbours are predecessors, on the init side successors, and
    the combined graph is predecessor-oriented.
    """

    nodes: dict[Atom, dict[Atom, float]]
    side: str
    store: VarConstraintStore
    domain: str = ""


def _edges_by_dst(plog: PLog) -> dict[Atom, list[tuple[LiftedEdge, float]]]:
    index: dict[Atom, list[tuple[LiftedEdge, float]]] = {}
    for edge in sorted(plog.probs):
        index.setdefault(edge.dst, []).append((edge, plog.probs[edge]))
    return index


def _edges_by_src(plog: PLog) -> dict[Atom, list[tuple[LiftedEdge, float]]]:
    index: dict[Atom, list[tuple[LiftedEdge, float]]] = {}
    for edge in sorted(plog.probs):
        index.setdefault(lift_atom(edge.src), []).append((edge, plog.probs[edge]))
    return index


def _generate(plog: PLog, task: GroundTask, seeds: Iterable[Atom], side: str,
              var_source: VarSource | None, store: VarConstraintStore | None):
    store = store if store is not None else VarConstraintStore()
    source = var_source if var_source is not None else VarSource()
    backward = side == SIDE_GOAL
    index = _edges_by_dst(plog) if backward else _edges_by_src(plog)
    blocked = task.init if backward else task.goal

    nodes: dict[Atom, dict[Atom, float]] = {}
    expanded: set[Atom] = set()
    queue = deque(sorted(seeds))
    seed_set = frozenset(seeds)
    while queue:
        lm = queue.popleft()
        if lm in expanded:
            continue
        expanded.add(lm)
        nodes.setdefault(lm, {})
        if not lm.objects() or lm in blocked:
            continue
        entries = index.get(lift_atom(lm), ())
        if not entries and lm in seed_set:
            logger.warning("no learned orderings touch %s; keeping it isolated", lm)
        for edge, mu in entries:
            renamed = fresh_variables(edge, source)
            anchor = renamed.dst if backward else renamed.src
            binding = dict(zip(anchor.args, lm.args))
            neighbour = (renamed.src if backward else renamed.dst).substitute(binding)
            update_distinct_consts(store, neighbour, lm)
            nodes.setdefault(neighbour, {})
            current = nodes[lm].get(neighbour)
            nodes[lm][neighbour] = mu if current is None else max(mu, current)
            if neighbour.objects() and neighbour not in expanded:
                queue.append(neighbour)
    return PLgg(nodes=nodes, side=side, store=store, domain=plog.domain), store


def generate_plgg_goal(plog: PLog, task: GroundTask, *,
                       var_source: VarSource | None = None,
                       store: VarConstraintStore | None = None):
    """Grow the goal-side graph backward through learned in-edges.

    Each dequeued atom with at least one object that is not an init fact is
    expanded: every learned edge into its lifted form is freshly renamed,
    its destination unified with the atom, and the resulting predecessor
    inserted (and queued, if it mentions any object).  Atoms already present
    are not re-expanded.
    """
    return _generate(plog, task, task.goal, SIDE_GOAL, var_source, store)


def generate_plgg_init(plog: PLog, task: GroundTask, *,
                       var_source: VarSource | None = None,
                       store: VarConstraintStore | None = None):
    """Mirror of the goal side: forward from init along learned out-edges."""
    return _generate(plog, task, task.init, SIDE_INIT, var_source, store)


# --- equivalence and instantiation -------------------------------------------


def equivalent_params(x: str, y: str, store: VarConstraintStore) -> bool:
    """Can these two parameters stand for the same thing?

    Identical symbols of the same kind always can.  A variable matches an
    object unless the object is forbidden for it.  Two variables match when
    they carry the same forbidden-object set and neither forbids the other.
    """
    xv, yv = is_variable(x), is_variable(y)
    if xv == yv:
        if x == y:
            return True
        if not xv:
            return False
        return (store.forbidden_objects(x) == store.forbidden_objects(y)
                and x not in store.forbidden_variables(y)
                and y not in store.forbidden_variables(x))
    var, obj = (x, y) if xv else (y, x)
    return obj not in store.forbidden_objects(var)


def equivalent_atoms(a: Atom, b: Atom, store: VarConstraintStore) -> bool:
    """Same predicate, same arity, parameters pairwise equivalent."""
    if a.pred != b.pred or a.arity != b.arity:
        return False
    return all(equivalent_params(x, y, store) for x, y in zip(a.args, b.args))


def param_distance(a: Atom, b: Atom) -> int:
    """Number of positions where exactly one of the two atoms has a variable."""
    return sum(1 for x, y in zip(a.args, b.args) if is_variable(x) != is_variable(y))


@dataclass(frozen=True)
class EquivCandidate:
    candidate: Atom
    distance: int
    prob: float


def _best_incident_prob(plgg: PLgg) -> dict[Atom, float]:
    best: dict[Atom, float] = {}
    for node, neighbours in plgg.nodes.items():
        for neighbour, mu in neighbours.items():
            best[node] = max(best.get(node, 0.0), mu)
            best[neighbour] = max(best.get(neighbour, 0.0), mu)
    return best


def equiv_candidates(plgg: PLgg, lm: Atom, store: VarConstraintStore) -> list[EquivCandidate]:
    """Lifted nodes equivalent to the ground atom `lm`, closest first.

    Ties on distance are broken by higher best incident probability, then
    lexicographically.
    """
    best = _best_incident_prob(plgg)
    found = [EquivCandidate(node, param_distance(node, lm), best.get(node, 0.0))
             for node in plgg.nodes
             if node.variables() and equivalent_atoms(node, lm, store)]
    found.sort(key=lambda c: (c.distance, -c.prob, c.candidate))
    return found


def search_best_equiv(plgg: PLgg, lm: Atom, store: VarConstraintStore,
                      top_n: int = 1) -> dict[str, str]:
    """Variable bindings harvested from the closest equivalents of `lm`.

    Among equivalent lifted nodes only those at minimum distance compete;
    the `top_n` most probable of them contribute bindings position by
    position, and a variable bound once is never rebound.
    """
    candidates = equiv_candidates(plgg, lm, store)
    if not candidates:
        return {}
    dmin = candidates[0].distance
    chosen = [c for c in candidates if c.distance == dmin][:max(top_n, 0)]
    bindings: dict[str, str] = {}
    for entry in chosen:
        for cand_param, lm_param in zip(entry.candidate.args, lm.args):
            if is_variable(cand_param) and not is_variable(lm_param):
                bindings.setdefault(cand_param, lm_param)
    return bindings


def get_lifted_landmarks(plgg: PLgg) -> list[Atom]:
    return sorted(node for node in plgg.nodes if node.variables())


def get_instantiated_lms(plgg: PLgg, task: GroundTask) -> set[Atom]:
    """Fully ground nodes that are facts of the task; anything outside the
    task's fact set is an ungroundable artifact and is not harvested."""
    return {node for node in plgg.nodes if node.is_ground and node in task.facts}


def apply_instantiation(plgg: PLgg, bindings: Mapping[str, str]) -> PLgg:
    """Rewrite every lifted node under `bindings`.

    A node changed by the rewrite acquires (or extends) a copy of its
    neighbour set, itself rewritten under the same bindings; the lifted
    original stays.  Bindings that hit a forbidden object are dropped.
    """
    safe: dict[str, str] = {}
    for var, obj in sorted(bindings.items()):
        if obj in plgg.store.forbidden_objects(var):
            logger.warning("binding %s -> %s violates a distinct-value constraint; skipped",
                           var, obj)
            continue
        safe[var] = obj
    nodes = {node: dict(neighbours) for node, neighbours in plgg.nodes.items()}
    for lifted in sorted(node for node in plgg.nodes if node.variables()):
        inst = lifted.substitute(safe)
        if inst == lifted:
            continue
        bucket = nodes.setdefault(inst, {})
        for neighbour, mu in plgg.nodes[lifted].items():
            rewritten = neighbour.substitute(safe)
            bucket[rewritten] = max(mu, bucket.get(rewritten, 0.0))
    return PLgg(nodes=nodes, side=plgg.side, store=plgg.store, domain=plgg.domain)


def instantiation(plgg: PLgg, lms: Iterable[Atom], store: VarConstraintStore,
                  top_n: int = 1) -> PLgg:
    """One instantiation pass: harvest bindings from every known landmark,
    first binding per variable wins, then rewrite the graph once."""
    var_inst: dict[str, str] = {}
    for lm in sorted(lms):
        for var, obj in search_best_equiv(plgg, lm, store, top_n).items():
            var_inst.setdefault(var, obj)
    return apply_instantiation(plgg, var_inst)


def combine(goal_side: PLgg, init_side: PLgg, task: GroundTask,
            store: VarConstraintStore | None = None, top_n: int = 1, *,
            iteration_log: list | None = None, init_first: bool = True) -> PLgg:
    """Alternate instantiation between the two sides until a fixpoint.

    Ground landmarks known on one side feed bindings into the other; the
    loop stops when a full round adds no new ground landmark.  The returned
    graph is the predecessor-oriented union of both sides.
    """
    if store is None:
        if goal_side.store is init_side.store:
            store = goal_side.store
        else:
            store = VarConstraintStore()
            store.merge(goal_side.store)
            store.merge(init_side.store)
    g_goal = replace(goal_side, store=store)
    g_init = replace(init_side, store=store)

    lms_init = set(task.init)
    lms_goal = set(task.goal)
    known = lms_init | lms_goal
    if iteration_log is not None:
        iteration_log.append(frozenset(known))
    while True:
        if init_first:
            g_init = instantiation(g_init, lms_goal, store, top_n)
            lms_init |= get_instantiated_lms(g_init, task)
            g_goal = instantiation(g_goal, lms_init, store, top_n)
            lms_goal |= get_instantiated_lms(g_goal, task)
        else:
            g_goal = instantiation(g_goal, lms_init, store, top_n)
            lms_goal |= get_instantiated_lms(g_goal, task)
            g_init = instantiation(g_init, lms_goal, store, top_n)
            lms_init |= get_instantiated_lms(g_init, task)
        grown = known | lms_init | lms_goal
        if iteration_log is not None:
            iteration_log.append(frozenset(grown))
        if grown == known:
            break
        known = grown

    nodes: dict[Atom, dict[Atom, float]] = {}

    def ensure(atom: Atom) -> dict[Atom, float]:
        return nodes.setdefault(atom, {})

    for node, predecessors in g_goal.nodes.items():
        bucket = ensure(node)
        for pred, mu in predecessors.items():
            ensure(pred)
            bucket[pred] = max(mu, bucket.get(pred, 0.0))
    for node, successors in g_init.nodes.items():
        ensure(node)
        for succ, mu in successors.items():
            bucket = ensure(succ)
            bucket[node] = max(mu, bucket.get(node, 0.0))
    return PLgg(nodes=nodes, side=SIDE_COMBINED, store=store,
                domain=goal_side.domain or init_side.domain)


def instantiate_task(plog: PLog, task: GroundTask, top_n: int = 1, *,
                     iteration_log: list | None = None) -> PLgg:
    """Full pipeline for one task: generate both sides (sharing fresh-name
    supply and constraint store) and combine them."""
    source = VarSource()
    store = VarConstraintStore()
    goal_side, _ = generate_plgg_goal(plog, task, var_source=source, store=store)
    init_side, _ = generate_plgg_init(plog, task, var_source=source, store=store)
    return combine(goal_side, init_side, task, store, top_n,
                   iteration_log=iteration_log)


# --- result extraction --------------------------------------------------------


@dataclass
class PlggContent:
    """What a thresholded probabilistic landmark graph claims about a task."""

    landmarks_grounded: set[Atom]
    landmarks_lifted: set[Atom]
    orderings: dict[tuple[Atom, Atom], float]

    @property
    def landmarks(self) -> set[Atom]:
        return self.landmarks_grounded | self.landmarks_lifted

    def orderings_grounded(self) -> dict[tuple[Atom, Atom], float]:
        return {(s, d): mu for (s, d), mu in self.orderings.items()
                if s.is_ground and d.is_ground}

    def orderings_lifted(self) -> dict[tuple[Atom, Atom], float]:
        return {(s, d): mu for (s, d), mu in self.orderings.items()
                if not (s.is_ground and d.is_ground)}


def _directed_edges(plgg: PLgg) -> dict[tuple[Atom, Atom], float]:
    edges: dict[tuple[Atom, Atom], float] = {}
    for node, neighbours in plgg.nodes.items():
        for neighbour, mu in neighbours.items():
            edge = (node, neighbour) if plgg.side == SIDE_INIT else (neighbour, node)
            edges[edge] = max(mu, edges.get(edge, 0.0))
    return edges


def extract_result(plgg: PLgg, threshold: float = 0.0) -> PlggContent:
    """Keep nodes and edges whose probability clears the threshold.

    An edge's probability is its own; a node's is the best over its incident
    edges.  Nodes with no incident edges (the seeds) always survive.
    """
    edges = _directed_edges(plgg)
    best: dict[Atom, float] = {}
    atoms = set(plgg.nodes)
    for (src, dst), mu in edges.items():
        atoms.update((src, dst))
        best[src] = max(mu, best.get(src, 0.0))
        best[dst] = max(mu, best.get(dst, 0.0))
    kept_atoms = {a for a in atoms if a not in best or best[a] >= threshold}
    kept_edges = {e: mu for e, mu in edges.items() if mu >= threshold}
    return PlggContent(
        landmarks_grounded={a for a in kept_atoms if a.is_ground},
        landmarks_lifted={a for a in kept_atoms if not a.is_ground},
        orderings=kept_edges)


# --- serialization ------------------------------------------------------------


def plgg_to_json(plgg: PLgg) -> str:
    edges = _directed_edges(plgg)
    table = sorted(set(plgg.nodes) | {a for e in edges for a in e})
    index = {a: i for i, a in enumerate(table)}
    payload = {
        "domain": plgg.domain,
        "side": plgg.side,
        "vertices": [{"pred": a.pred, "args": list(a.args), "grounded": a.is_ground}
                     for a in table],
        "edges": [{"src": index[s], "dst": index[d], "mu": mu}
                  for (s, d), mu in sorted(edges.items())],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def plgg_from_json(text: str) -> PLgg:
    from .lgg import LggFormatError
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LggFormatError(f"not valid JSON: {exc}", "/") from None
    for key in ("domain", "side", "vertices", "edges"):
        if not isinstance(payload, dict) or key not in payload:
            raise LggFormatError(f"missing required key {key!r}", "/")
    side = payload["side"]
    if side not in (SIDE_GOAL, SIDE_INIT, SIDE_COMBINED):
        raise LggFormatError(f"unknown side {side!r}", "/side")
    table: list[Atom] = []
    for i, entry in enumerate(payload["vertices"]):
        ptr = f"/vertices/{i}"
        if (not isinstance(entry, dict) or not isinstance(entry.get("pred"), str)
                or not isinstance(entry.get("args"), list)):
            raise LggFormatError("vertex must be {pred, args, grounded}", ptr)
        table.append(Atom(entry["pred"], tuple(entry["args"])))
    nodes: dict[Atom, dict[Atom, float]] = {a: {} for a in table}
    for i, entry in enumerate(payload["edges"]):
        ptr = f"/edges/{i}"
        if (not isinstance(entry, dict)
                or not isinstance(entry.get("mu"), (int, float))):
            raise LggFormatError("edge must be {src, dst, mu}", ptr)
        try:
            src, dst = table[entry["src"]], table[entry["dst"]]
        except (TypeError, IndexError, KeyError):
            raise LggFormatError("edge endpoints must be vertex indices", ptr) from None
        if side == SIDE_INIT:
            nodes[src][dst] = float(entry["mu"])
        else:
            nodes[dst][src] = float(entry["mu"])
    return PLgg(nodes=nodes, side=side, store=VarConstraintStore(),
                domain=payload["domain"])


def write_plgg(plgg: PLgg, path: str | Path) -> None:
    Path(path).write_text(plgg_to_json(plgg))


def read_plgg(path: str | Path) -> PLgg:
    return plgg_from_json(Path(path).read_text())


def plgg_to_dot(plgg: PLgg) -> str:
    """Graphviz rendering; lifted nodes are dashed, edges carry probabilities."""
    edges = _directed_edges(plgg)
    table = sorted(set(plgg.nodes) | {a for e in edges for a in e})
    index = {a: i for i, a in enumerate(table)}
    lines = ["digraph plgg {", "  rankdir=BT;"]
    for a in table:
        style = " style=dashed" if not a.is_ground else ""
        lines.append(f'  n{index[a]} [label="{a}"{style}];')
    for (s, d), mu in sorted(edges.items()):
        lines.append(f'  n{index[s]} -> n{index[d]} [label="{mu:.2f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
