"""Typed STRIPS fragment of PDDL: model types, parser, printer, grounding.

The fragment accepted here is deliberately small: ``:strips`` and ``:typing``
are the only requirements honoured, preconditions are conjunctions of
positive atoms, and effects are conjunctions of positive and negated atoms.
Identifiers are case-insensitive and normalised to lower case.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

ROOT_TYPE = "object"
SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing"})


class PddlError(Exception):
    """Base class for everything that can go wrong building a task model."""


class ParseError(PddlError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column


def is_variable(symbol: str) -> bool:
    """Parameters beginning with ``?`` denote variables, anything else objects."""
    return symbol.startswith("?")


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to a tuple of parameter symbols.

    The same class covers lifted and ground atoms; an atom is ground when
    none of its arguments is a ``?``-variable.
    """

    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"{self.pred}()"
        return f"{self.pred}({', '.join(self.args)})"

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def params(self) -> frozenset[str]:
        return frozenset(self.args)

    def objects(self) -> frozenset[str]:
        return frozenset(a for a in self.args if not is_variable(a))

    def variables(self) -> frozenset[str]:
        return frozenset(a for a in self.args if is_variable(a))

    def substitute(self, binding: Mapping[str, str]) -> "Atom":
        """Replace every argument that appears as a key in `binding`."""
        return Atom(self.pred, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True)
class Predicate:
    name: str
    param_types: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.param_types)


@dataclass(frozen=True)
class ActionSchema:
    """A lifted action. `params` keeps declaration order as (variable, type)."""

    name: str
    params: tuple[tuple[str, str], ...]
    pre: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]


@dataclass(frozen=True, order=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: frozenset[Atom] = field(compare=False)
    add: frozenset[Atom] = field(compare=False)
    delete: frozenset[Atom] = field(compare=False)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.args)})"


@dataclass
class Domain:
    name: str
    types: dict[str, str | None]          # type name -> parent (None for the root)
    predicates: dict[str, Predicate]
    schemas: dict[str, ActionSchema]
    constants: dict[str, str]             # constant name -> type

    def is_subtype(self, sub: str, ancestor: str) -> bool:
        """True when `sub` equals `ancestor` or descends from it."""
        cur: str | None = sub
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self.types.get(cur)
        return False


@dataclass
class Problem:
    name: str
    domain_name: str
    objects: dict[str, str]               # object name -> type
    init: frozenset[Atom]
    goal: frozenset[Atom]


@dataclass
class GroundTask:
    """A fully ground task over the delete-relaxed-reachable fact set."""

    name: str
    facts: frozenset[Atom]
    actions: tuple[GroundAction, ...]
    init: frozenset[Atom]
    goal: frozenset[Atom]
    objects: dict[str, str]
    domain: Domain


# --- tokenizer / s-expression reader ---------------------------------------

_TOKEN_RE = re.compile(r"\(|\)|[^()\s;]+")


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


class _SList(list):
    """A parenthesised group; carries the position of its opening paren."""

    line = 0
    col = 0


def _tokenize(text: str) -> Iterator[_Tok]:
    for lineno, line in enumerate(text.split("\n"), start=1):
        body = line.split(";", 1)[0]
        for m in _TOKEN_RE.finditer(body):
            yield _Tok(m.group(0).lower(), lineno, m.start() + 1)


def _read_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    last: _Tok | None = None
    for tok in _tokenize(text):
        last = tok
        if tok.text == "(":
            node = _SList()
            node.line, node.col = tok.line, tok.col
            stack[-1].append(node)
            stack.append(node)
        elif tok.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            stack.pop()
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        where = (last.line, last.col) if last else (1, 1)
        raise ParseError("unbalanced '(': input ended inside a form", *where)
    return stack[0]


def _form_name(node) -> str:
    if isinstance(node, _SList) and node and isinstance(node[0], _Tok):
        return node[0].text
    return ""


def _expect_symbol(node, what: str) -> _Tok:
    if not isinstance(node, _Tok):
        line, col = (node.line, node.col) if isinstance(node, _SList) else (None, None)
        raise ParseError(f"expected {what}, found a parenthesised form", line, col)
    return node


def _parse_typed_list(items: list, what: str, known_types: dict[str, str | None] | None):
    """Parse ``a b - t c d`` style lists into (name, type) pairs.

    When `known_types` is given, every mentioned type must be declared.
    """
    pairs: list[tuple[str, str, _Tok]] = []
    pending: list[_Tok] = []
    it = iter(items)
    for item in it:
        tok = _expect_symbol(item, f"a {what} name")
        if tok.text == "-":
            try:
                type_tok = _expect_symbol(next(it), "a type name")
            except StopIteration:
                raise ParseError(f"dangling '-' in {what} list", tok.line, tok.col) from None
            if known_types is not None and type_tok.text not in known_types:
                raise ParseError(f"unknown type {type_tok.text}", type_tok.line, type_tok.col)
            for p in pending:
                pairs.append((p.text, type_tok.text, p))
            pending = []
        else:
            pending.append(tok)
    for p in pending:
        pairs.append((p.text, ROOT_TYPE, p))
    return pairs


# --- domain parsing ---------------------------------------------------------


def parse_domain(text: str) -> Domain:
    """Parse PDDL domain text into a `Domain`.

    Rejects requirements outside :strips/:typing, undeclared types and
    predicates, unbound variables, and contradictory (add and delete the
    same atom) effects.
    """
    forms = _read_sexprs(text)
    if len(forms) != 1 or _form_name(forms[0]) != "define":
        raise ParseError("expected a single (define (domain ...) ...) form")
    define = forms[0]
    if len(define) < 2 or _form_name(define[1]) != "domain" or len(define[1]) != 2:
        raise ParseError("expected (domain <name>) after define", define.line, define.col)
    name = _expect_symbol(define[1][1], "a domain name").text

    types: dict[str, str | None] = {ROOT_TYPE: None}
    predicates: dict[str, Predicate] = {}
    schemas: dict[str, ActionSchema] = {}
    constants: dict[str, str] = {}

    sections = define[2:]
    for section in sections:
        kind = _form_name(section)
        if kind == ":requirements":
            for req in section[1:]:
                tok = _expect_symbol(req, "a requirement flag")
                if tok.text not in SUPPORTED_REQUIREMENTS:
                    raise ParseError(f"unsupported requirement {tok.text}", tok.line, tok.col)
        elif kind == ":types":
            declared = _parse_typed_list(section[1:], "type", None)
            for tname, parent, tok in declared:
                if tname == ROOT_TYPE:
                    if parent != ROOT_TYPE:
                        raise ParseError("the root type cannot be re-parented", tok.line, tok.col)
                    continue
                previous = types.get(tname)
                if previous is not None and previous != parent:
                    raise ParseError(f"type {tname} declared twice with different parents",
                                     tok.line, tok.col)
                types[tname] = parent
            for tname, parent, tok in declared:
                if parent != ROOT_TYPE and parent not in types:
                    raise ParseError(f"unknown parent type {parent}", tok.line, tok.col)
            _check_type_forest(types, section)
        elif kind == ":constants":
            for cname, ctype, tok in _parse_typed_list(section[1:], "constant", types):
                if cname in constants:
                    raise ParseError(f"constant {cname} declared twice", tok.line, tok.col)
                constants[cname] = ctype
        elif kind == ":predicates":
            for decl in section[1:]:
                if not isinstance(decl, _SList) or not decl:
                    raise ParseError("expected a (name ?arg - type ...) predicate declaration",
                                     section.line, section.col)
                pname = _expect_symbol(decl[0], "a predicate name").text
                if pname in predicates:
                    raise ParseError(f"predicate {pname} declared twice", decl.line, decl.col)
                params = _parse_typed_list(decl[1:], "parameter", types)
                for vname, _, tok in params:
                    if not is_variable(vname):
                        raise ParseError(f"predicate parameter {vname} must be a ?variable",
                                         tok.line, tok.col)
                predicates[pname] = Predicate(pname, tuple(t for _, t, _ in params))
        elif kind == ":action":
            schema = _parse_action(section, types, predicates)
            if schema.name in schemas:
                raise ParseError(f"action {schema.name} declared twice", section.line, section.col)
            schemas[schema.name] = schema
        elif kind in ("domain",):
            continue
        else:
            line, col = (section.line, section.col) if isinstance(section, _SList) else (None, None)
            raise ParseError(f"unsupported domain section {kind or section!r}", line, col)

    return Domain(name=name, types=types, predicates=predicates,
                  schemas=schemas, constants=constants)


def _check_type_forest(types: dict[str, str | None], section: _SList) -> None:
    for tname in types:
        seen = set()
        cur: str | None = tname
        while cur is not None:
            if cur in seen:
                raise ParseError(f"type hierarchy contains a cycle through {tname}",
                                 section.line, section.col)
            seen.add(cur)
            cur = types.get(cur)


def _parse_action(section: _SList, types, predicates) -> ActionSchema:
    items = list(section[1:])
    if not items:
        raise ParseError("action without a name", section.line, section.col)
    name = _expect_symbol(items[0], "an action name").text
    fields: dict[str, object] = {}
    i = 1
    while i < len(items):
        key = _expect_symbol(items[i], "an action keyword").text
        if key not in (":parameters", ":precondition", ":effect"):
            raise ParseError(f"unsupported action section {key}", items[i].line, items[i].col)
        if i + 1 >= len(items):
            raise ParseError(f"{key} without a body", items[i].line, items[i].col)
        fields[key] = items[i + 1]
        i += 2

    raw_params = fields.get(":parameters")
    if raw_params is None or not isinstance(raw_params, _SList):
        raise ParseError(f"action {name} needs a :parameters list", section.line, section.col)
    params: list[tuple[str, str]] = []
    for vname, vtype, tok in _parse_typed_list(list(raw_params), "parameter", types):
        if not is_variable(vname):
            raise ParseError(f"action parameter {vname} must be a ?variable", tok.line, tok.col)
        if any(v == vname for v, _ in params):
            raise ParseError(f"parameter {vname} declared twice in action {name}",
                             tok.line, tok.col)
        params.append((vname, vtype))
    param_vars = {v for v, _ in params}

    def check_atom(atom: Atom, where: str, tok_line, tok_col) -> None:
        decl = predicates.get(atom.pred)
        if decl is None:
            raise ParseError(f"unknown predicate {atom.pred} in {where} of action {name}",
                             tok_line, tok_col)
        if decl.arity != atom.arity:
            raise ParseError(
                f"arity mismatch for {atom.pred} in {where} of action {name}: "
                f"expected {decl.arity}, got {atom.arity}", tok_line, tok_col)
        for a in atom.args:
            if is_variable(a) and a not in param_vars:
                raise ParseError(f"unbound variable {a} in {where} of action {name}",
                                 tok_line, tok_col)
            if not is_variable(a):
                raise ParseError(f"constant {a} in {where} of action {name} is not supported",
                                 tok_line, tok_col)

    pre = frozenset(_parse_conjunction(fields.get(":precondition"), allow_not=False,
                                       check=lambda a, l, c: check_atom(a, "precondition", l, c)))
    if ":effect" not in fields:
        raise ParseError(f"action {name} has no :effect", section.line, section.col)
    literals = _parse_conjunction(fields[":effect"], allow_not=True,
                                  check=lambda a, l, c: check_atom(a, "effect", l, c))
    add = frozenset(a for a, positive in literals if positive)
    delete = frozenset(a for a, positive in literals if not positive)
    if add & delete:
        clash = sorted(add & delete)[0]
        raise ParseError(f"action {name} both adds and deletes {clash}",
                         section.line, section.col)
    return ActionSchema(name=name, params=tuple(params), pre=pre, add=add, delete=delete)


def _atom_from_form(form: _SList) -> Atom:
    pname = _expect_symbol(form[0], "a predicate name").text
    args = tuple(_expect_symbol(a, "an atom argument").text for a in form[1:])
    return Atom(pname, args)


def _parse_conjunction(form, allow_not: bool, check):
    """Flatten an atom / (not atom) / (and ...) form.

    Returns plain atoms when `allow_not` is false, (atom, positive) pairs
    otherwise.
    """
    if form is None:
        return []
    if not isinstance(form, _SList) or not form:
        line, col = (form.line, form.col) if isinstance(form, _SList) else (None, None)
        raise ParseError("expected an atom, (not ...), or (and ...)", line, col)
    head = _form_name(form)
    out = []
    if head == "and":
        for sub in form[1:]:
            out.extend(_parse_conjunction(sub, allow_not, check))
        return out
    if head == "not":
        if not allow_not:
            raise ParseError("negations are not allowed here", form.line, form.col)
        if len(form) != 2 or not isinstance(form[1], _SList):
            raise ParseError("(not ...) must wrap a single atom", form.line, form.col)
        atom = _atom_from_form(form[1])
        check(atom, form.line, form.col)
        return [(atom, False)]
    atom = _atom_from_form(form)
    check(atom, form.line, form.col)
    return [(atom, True)] if allow_not else [atom]


# --- problem parsing --------------------------------------------------------


def parse_problem(text: str, domain: Domain) -> Problem:
    """Parse PDDL problem text against an already-parsed domain."""
    forms = _read_sexprs(text)
    if len(forms) != 1 or _form_name(forms[0]) != "define":
        raise ParseError("expected a single (define (problem ...) ...) form")
    define = forms[0]
    if len(define) < 2 or _form_name(define[1]) != "problem" or len(define[1]) != 2:
        raise ParseError("expected (problem <name>) after define", define.line, define.col)
    name = _expect_symbol(define[1][1], "a problem name").text

    objects: dict[str, str] = {}
    init: set[Atom] = set()
    goal: set[Atom] = set()
    domain_name = ""

    def check_ground_atom(atom: Atom, where: str, line, col) -> None:
        decl = domain.predicates.get(atom.pred)
        if decl is None:
            raise ParseError(f"unknown predicate {atom.pred} in {where}", line, col)
        if decl.arity != atom.arity:
            raise ParseError(f"arity mismatch for {atom.pred} in {where}: "
                             f"expected {decl.arity}, got {atom.arity}", line, col)
        for a in atom.args:
            if is_variable(a):
                raise ParseError(f"variable {a} is not allowed in {where}", line, col)
            otype = objects.get(a, domain.constants.get(a))
            if otype is None:
                raise ParseError(f"unknown object {a} in {where}", line, col)

    for section in define[2:]:
        kind = _form_name(section)
        if kind == ":domain":
            domain_name = _expect_symbol(section[1], "a domain name").text
            if domain_name != domain.name:
                raise ParseError(f"problem declares domain {domain_name}, "
                                 f"expected {domain.name}", section.line, section.col)
        elif kind == ":requirements":
            for req in section[1:]:
                tok = _expect_symbol(req, "a requirement flag")
                if tok.text not in SUPPORTED_REQUIREMENTS:
                    raise ParseError(f"unsupported requirement {tok.text}", tok.line, tok.col)
        elif kind == ":objects":
            for oname, otype, tok in _parse_typed_list(section[1:], "object", domain.types):
                if oname in objects or oname in domain.constants:
                    raise ParseError(f"object {oname} declared twice", tok.line, tok.col)
                objects[oname] = otype
        elif kind == ":init":
            for form in section[1:]:
                if not isinstance(form, _SList) or not form:
                    raise ParseError("expected an atom in :init", section.line, section.col)
                atom = _atom_from_form(form)
                check_ground_atom(atom, ":init", form.line, form.col)
                init.add(atom)
        elif kind == ":goal":
            if len(section) != 2:
                raise ParseError(":goal takes exactly one formula", section.line, section.col)
            got = _parse_conjunction(section[1], allow_not=False,
                                     check=lambda a, l, c: check_ground_atom(a, ":goal", l, c))
            goal.update(got)
        else:
            line, col = (section.line, section.col) if isinstance(section, _SList) else (None, None)
            raise ParseError(f"unsupported problem section {kind or section!r}", line, col)

    if not domain_name:
        raise ParseError("problem is missing its (:domain ...) section")
    return Problem(name=name, domain_name=domain_name, objects=objects,
                   init=frozenset(init), goal=frozenset(goal))


# --- printing ---------------------------------------------------------------


def _typed_list_str(pairs: Iterable[tuple[str, str]]) -> str:
    chunks = []
    for name, typ in pairs:
        chunks.append(f"{name} - {typ}")
    return " ".join(chunks)


def _atom_str(atom: Atom) -> str:
    return "(" + " ".join((atom.pred,) + atom.args) + ")"


def _conj_str(atoms: Iterable[Atom], negated: Iterable[Atom] = ()) -> str:
    parts = [_atom_str(a) for a in sorted(atoms)]
    parts += [f"(not {_atom_str(a)})" for a in sorted(negated)]
    return "(and " + " ".join(parts) + ")"


def domain_to_pddl(domain: Domain) -> str:
    """Render a domain back to PDDL text that re-parses to an equal model."""
    lines = [f"(define (domain {domain.name})",
             "  (:requirements :strips :typing)"]
    declared = [(t, p) for t, p in sorted(domain.types.items()) if p is not None]
    if declared:
        lines.append("  (:types " + _typed_list_str(declared) + ")")
    if domain.constants:
        lines.append("  (:constants " + _typed_list_str(sorted(domain.constants.items())) + ")")
    preds = []
    for p in sorted(domain.predicates.values(), key=lambda p: p.name):
        args = _typed_list_str((f"?x{i}", t) for i, t in enumerate(p.param_types))
        preds.append(f"({p.name}{' ' + args if args else ''})")
    lines.append("  (:predicates " + " ".join(preds) + ")")
    for schema in sorted(domain.schemas.values(), key=lambda s: s.name):
        lines.append(f"  (:action {schema.name}")
        lines.append("    :parameters (" + _typed_list_str(schema.params) + ")")
        lines.append("    :precondition " + _conj_str(schema.pre))
        lines.append("    :effect " + _conj_str(schema.add, schema.delete) + ")")
    lines.append(")")
    return "\n".join(lines) + "\n"


def problem_to_pddl(problem: Problem) -> str:
    lines = [f"(define (problem {problem.name})",
             f"  (:domain {problem.domain_name})"]
    if problem.objects:
        lines.append("  (:objects " + _typed_list_str(sorted(problem.objects.items())) + ")")
    lines.append("  (:init " + " ".join(_atom_str(a) for a in sorted(problem.init)) + ")")
    lines.append("  (:goal " + _conj_str(problem.goal) + ")")
    lines.append(")")
    return "\n".join(lines) + "\n"


# --- grounding --------------------------------------------------------------


def ground_task(domain: Domain, problem: Problem) -> GroundTask:
    """Ground a problem over its delete-relaxed-reachable fact set.

    Substitutions are enumerated per schema over type-compatible objects.
    A substitution that makes an add and a delete collide is discarded (it
    has no consistent STRIPS reading); everything else is kept exactly when
    its preconditions become reachable in the delete relaxation of the task.
    """
    objects = dict(domain.constants)
    objects.update(problem.objects)

    candidates: list[GroundAction] = []
    for schema in sorted(domain.schemas.values(), key=lambda s: s.name):
        pools = []
        for _, ptype in schema.params:
            pools.append(sorted(o for o, ot in objects.items() if domain.is_subtype(ot, ptype)))
        for combo in itertools.product(*pools):
            binding = {v: o for (v, _), o in zip(schema.params, combo)}
            add = frozenset(a.substitute(binding) for a in schema.add)
            delete = frozenset(a.substitute(binding) for a in schema.delete)
            if add & delete:
                continue
            candidates.append(GroundAction(
                name=schema.name, args=combo,
                pre=frozenset(a.substitute(binding) for a in schema.pre),
                add=add, delete=delete))

    facts: set[Atom] = set(problem.init)
    applied: list[GroundAction] = []
    pending = candidates
    while True:
        ready = [a for a in pending if a.pre <= facts]
        if not ready:
            break
        pending = [a for a in pending if not a.pre <= facts]
        applied.extend(ready)
        for a in ready:
            facts.update(a.add)

    for a in applied:
        facts.update(a.delete)
    facts.update(problem.goal)

    return GroundTask(name=problem.name,
                      facts=frozenset(facts),
                      actions=tuple(sorted(applied)),
                      init=problem.init,
                      goal=problem.goal,
                      objects=objects,
                      domain=domain)
