"""Model documents: one JSON file that fully determines a verification run.

Top-level sections (all objects unless noted):

``ontology``          entities / datatypes / purposes, each ``{"elements", "order"}``
``interpretation``    extra ``functions`` / ``predicates`` as finite tables
``devices``           ``{name: {"entity": e, "role": "ds" | "dc" | "repository"}}``
``items``             ``{name: {"type": t, "owner": d, "values": [v, ...]}}``
``policies``          structural policies by name
``policy_order``      abstract policies: ``{"policies": {id: datatype | null},
                      "order": [[lo, hi], ...], "transfers": [[q, p], ...]}``
``initial_policies``  ``{device: [choice, ...]}``, a choice is a name or a list of names
``system``            ``{"kind": "abstract" | "direct" | "indirect" | "custom",
                      "mode": "async" | "sync", "mutant": name, "transfers": bool}``
``program_graphs``    graphs for ``kind: custom`` (see :func:`parse_program_graph`)
``invariants``        ``{name: condition}`` over ``"Graph.var"`` refs (``"Graph@"`` is
                      the location of a graph)
``config``            ``{"always_active": bool, "policy_mode": "abstract" | "structural",
                      "bound": int}``

Value encoding: ``null`` is undefined, a list is a tuple, ``{"set": [...]}``
is a set.  See ``docs/model-format.md`` for a full example.
"""
from __future__ import annotations

import contextlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .casestudies import MUTANTS, CaseStudy, build_direct_system, build_indirect_system
from .checker import BUILTIN_INVARIANTS, InvariantSpec
from .conditions import (DEFAULT_INTERPRETATION, Const, Interpretation, evaluate,
                         parse_condition, parse_term)
from .errors import ConfigError, ModelError, ParseError, PilotError
from .ontology import UNDEFINED, Ontology, canon_key, load_ontology
from .policy import parse_policy
from .proggraph import (ANY, ActionLabel, Composition, ProgramGraph, Transition, Variable,
                        compose, policy_interpretation)
from .semantics import AbstractSystem, ModelConfig, abstract_ts
from .universe import AbstractUniverse, PolicyUniverse, StructuralUniverse, check_datatypes

SECTIONS = ("ontology", "interpretation", "devices", "items", "policies", "policy_order",
            "initial_policies", "system", "program_graphs", "invariants", "config")
SYSTEM_KINDS = ("abstract", "direct", "indirect", "custom")


def decode_value(v):
    if v is None:
        return UNDEFINED
    if isinstance(v, list):
        return tuple(decode_value(x) for x in v)
    if isinstance(v, dict):
        if set(v) == {"set"} and isinstance(v["set"], list):
            return frozenset(decode_value(x) for x in v["set"])
        raise ParseError(f"cannot read value {v!r}")
    return v


def encode_value(v):
    if v is UNDEFINED:
        return None
    if isinstance(v, tuple):
        return [encode_value(x) for x in v]
    if isinstance(v, frozenset):
        return {"set": [encode_value(x) for x in sorted(v, key=canon_key)]}
    return v


# -- locating faults in the source text -------------------------------------------

def locate(text, section=None, names=()):
    """Best-effort 1-based line of a fault inside top-level ``section``.

    ``names`` are searched for one after the other, so ``("DC1", "p9")``
    finds the ``"p9"`` that follows ``"DC1"``.
    """
    if not text or section is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(section), text)
    if m is None:
        return None
    pos = m.start()
    cursor = m.end()
    for name in names:
        n = re.search(r'"%s"' % re.escape(str(name)), text[cursor:])
        if n is None:
            break
        pos = cursor + n.start()
        cursor = cursor + n.end()
    return text.count("\n", 0, pos) + 1


@contextlib.contextmanager
def _in_section(section):
    """Tag any library error raised while reading ``section`` with that section."""
    try:
        yield
    except ModelError as e:
        if e.section is None:
            raise type(e)(e.message, section=section) from None
        raise
    except (PilotError, KeyError, TypeError, ValueError) as e:
        msg = str(e) if not isinstance(e, KeyError) or isinstance(e, PilotError) \
            else f"missing entry {e}"
        raise ModelError(msg, section=section) from None


# -- program graphs ---------------------------------------------------------------

def _action(doc):
    text = doc.get("action", "tau")
    params = tuple(parse_term(p) for p in doc.get("params", []))
    if text in ("tau", "τ"):
        return ActionLabel("tau")
    if text.startswith("!"):
        return ActionLabel("send", text[1:], params)
    if text.startswith("?"):
        return ActionLabel("recv", text[1:], params)
    return ActionLabel("local", text, params)


def parse_program_graph(name, doc) -> ProgramGraph:
    """Read one graph::

        {"locations": [...], "initial": [...],
         "variables": {v: {"domain": [...], "initial": value}},
         "initial_condition": cond,
         "transitions": [{"from", "to", "action": "!a" | "?a" | "a" | "tau",
                          "params": [terms], "guard": cond,
                          "effect": {v: term}, "choose": {v: [values]}}]}

    A variable with a domain but no ``initial`` starts at every domain value.
    """
    variables = []
    for v, spec in (doc.get("variables") or {}).items():
        spec = spec or {}
        domain = tuple(decode_value(x) for x in spec["domain"]) if "domain" in spec else None
        if "initial" in spec:
            init = decode_value(spec["initial"])
        elif domain is not None:
            init = ANY
        else:
            init = UNDEFINED
        variables.append(Variable(v, domain, init))
    transitions = []
    for t in doc.get("transitions", []):
        effect = tuple((v, _term(x)) for v, x in (t.get("effect") or {}).items())
        choose = tuple((v, tuple(decode_value(x) for x in vals))
                       for v, vals in (t.get("choose") or {}).items())
        transitions.append(Transition(t["from"], _action(t), t["to"],
                                      parse_condition(t.get("guard", "tt")), effect, choose))
    return ProgramGraph(name, tuple(doc["locations"]), tuple(variables), tuple(transitions),
                        tuple(doc.get("initial", doc["locations"][:1])),
                        parse_condition(doc.get("initial_condition", "tt")))


def _term(doc):
    if isinstance(doc, dict) and set(doc) == {"set"}:
        return Const(decode_value(doc))
    if doc is None:
        return Const(UNDEFINED)
    return parse_term(doc)


def composed_invariant(system: Composition, name, cond, interp) -> InvariantSpec:
    def look(st):
        def lookup(ref):
            if ref.endswith("@"):
                return system.location(st, ref[:-1])
            return system.value(st, ref)
        return lookup

    def holds(st):
        return evaluate(cond, look(st), interp) is True

    return InvariantSpec(name, holds, str(cond))


# -- the model ---------------------------------------------------------------------

@dataclass
class Model:
    doc: dict
    source: str = "<model>"
    text: str = ""
    kind: str = "abstract"
    mode: str = "async"
    mutant: str | None = None
    transfers: bool = False
    ontology: Ontology | None = None
    interpretation: Interpretation = DEFAULT_INTERPRETATION
    universe: PolicyUniverse | None = None
    cfg: ModelConfig | None = None
    bound: int | None = None
    graphs: list = field(default_factory=list)
    invariant_docs: dict = field(default_factory=dict)
    _case: CaseStudy | None = None
    _system: object = None

    def case_study(self) -> CaseStudy:
        if self._case is None:
            build = build_direct_system if self.kind == "direct" else build_indirect_system
            with _in_section("system"):
                kw = {"mode": self.mode, "mutant": self.mutant}
                if self.kind == "indirect":
                    kw["transfers"] = self.transfers
                self._case = build(self.cfg, **kw)
        return self._case

    def abstract_system(self) -> AbstractSystem:
        if self.cfg is None:
            raise ConfigError("no abstract system: the model has no devices/policies",
                              section="system")
        return abstract_ts(self.cfg)

    def system(self):
        """The transition system the model is about."""
        if self._system is None:
            if self.kind == "abstract":
                self._system = self.abstract_system()
            elif self.kind in ("direct", "indirect"):
                self._system = self.case_study().system
            else:
                interp = self.interpretation
                if self.universe is not None:
                    interp = policy_interpretation(self.universe, interp)
                with _in_section("program_graphs"):
                    self._system = compose(self.graphs, self.mode, interp, name="custom")
        return self._system

    def invariant(self, name) -> InvariantSpec:
        if name in self.invariant_docs:
            system = self.system()
            if not isinstance(system, Composition):
                raise ConfigError(f"invariant {name!r} reads program graph variables; "
                                  "the model's system is abstract", section="invariants")
            return composed_invariant(system, name, self.invariant_docs[name], system.interp)
        if name in BUILTIN_INVARIANTS:
            if self.cfg is None:
                raise ConfigError(f"{name} needs devices, items and policies",
                                  section="system")
            inv = BUILTIN_INVARIANTS[name](self.cfg)
            if self.kind in ("direct", "indirect"):
                inv = inv.through(self.case_study().mapping)
            return inv
        known = sorted(set(BUILTIN_INVARIANTS) | set(self.invariant_docs))
        raise ConfigError(f"unknown invariant {name!r}; known: {', '.join(known)}",
                          section="invariants")

    def refinement(self):
        """(implementation, specification, mapping) for the model's system."""
        if self.kind in ("direct", "indirect"):
            cs = self.case_study()
            return cs.system, cs.spec, cs.mapping
        if self.kind == "abstract":
            ts = self.abstract_system()
            return ts, ts, lambda s: s
        raise ConfigError("custom program graphs carry no refinement mapping; "
                          "use system kind 'direct' or 'indirect'", section="system")


def _pairs(doc, what):
    out = []
    for e in doc or []:
        if not isinstance(e, list) or len(e) != 2:
            raise ParseError(f"{what} entries must be pairs, got {e!r}")
        out.append(tuple(e))
    return out


def build_model(doc, source="<model>", text="") -> Model:
    if not isinstance(doc, dict):
        raise ParseError("a model document must be a JSON object")
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ParseError(f"unknown top-level section(s): {', '.join(unknown)}",
                         section=unknown[0])
    m = Model(doc, source, text)

    with _in_section("config"):
        conf = doc.get("config") or {}
        always_active = conf.get("always_active", True)
        bound = conf.get("bound")
        if bound is not None and (not isinstance(bound, int) or bound < 1):
            raise ParseError(f"bound must be a positive integer, got {bound!r}")
        m.bound = bound
        mode = conf.get("policy_mode")

    with _in_section("system"):
        sysdoc = doc.get("system") or {}
        m.kind = sysdoc.get("kind", "custom" if "program_graphs" in doc else "abstract")
        if m.kind not in SYSTEM_KINDS:
            raise ParseError(f"unknown system kind {m.kind!r}")
        m.mode = sysdoc.get("mode", "async")
        if m.mode not in ("async", "sync"):
            raise ParseError(f"unknown composition mode {m.mode!r}")
        m.mutant = sysdoc.get("mutant")
        if m.mutant is not None and m.mutant not in MUTANTS.get(m.kind, ()):
            raise ParseError(f"unknown mutant {m.mutant!r} for system kind {m.kind!r}")
        m.transfers = bool(sysdoc.get("transfers", False))

    with _in_section("interpretation"):
        m.interpretation = Interpretation.from_tables(doc.get("interpretation"))

    if "ontology" in doc:
        with _in_section("devices"):
            devices = doc.get("devices") or {}
        with _in_section("items"):
            items = doc.get("items") or {}
            for i, spec in items.items():
                if not isinstance(spec, dict):
                    raise ParseError(f"item {i!r} must be an object")
        with _in_section("ontology"):
            m.ontology = load_ontology(
                doc["ontology"], devices,
                {i: {k: v for k, v in s.items() if k != "values"} for i, s in items.items()})

        if mode is None:
            mode = "abstract" if "policy_order" in doc else "structural"
        if mode == "abstract":
            if "policy_order" not in doc:
                raise ConfigError("policy_mode 'abstract' needs a policy_order section",
                                  section="config")
            with _in_section("policy_order"):
                po = doc["policy_order"]
                transfers = po.get("transfers")
                m.universe = AbstractUniverse(
                    dict(po["policies"]), _pairs(po.get("order"), "order"),
                    None if transfers is None else _pairs(transfers, "transfers"))
                check_datatypes(m.universe, m.ontology)
        elif mode == "structural":
            if "policies" not in doc:
                raise ConfigError("policy_mode 'structural' needs a policies section",
                                  section="config")
            with _in_section("policies"):
                pols = {n: parse_policy(p) for n, p in doc["policies"].items()}
                m.universe = StructuralUniverse(pols, m.ontology, m.interpretation)
        else:
            raise ConfigError(f"unknown policy_mode {mode!r}", section="config")

        with _in_section("initial_policies"):
            init = {}
            for d, choices in (doc.get("initial_policies") or {}).items():
                if not isinstance(choices, list) or not choices:
                    raise ParseError(f"device {d!r}: expected a nonempty list of choices")
                init[d] = [tuple(c) if isinstance(c, list) else (c,) for c in choices]
        with _in_section("items"):
            values = {i: [decode_value(v) for v in s.get("values", [])]
                      for i, s in items.items()}
            values = {i: v for i, v in values.items() if v}
        with _in_section("config"):
            m.cfg = ModelConfig(m.ontology, m.universe, init, values,
                                always_active=always_active, policy_mode=mode,
                                interpretation=m.interpretation, bound=bound)
    elif m.kind != "custom":
        raise ConfigError(f"system kind {m.kind!r} needs an ontology section",
                          section="ontology")

    with _in_section("program_graphs"):
        pg = doc.get("program_graphs") or {}
        graphs = pg.get("graphs", pg) if isinstance(pg, dict) else pg
        if isinstance(graphs, dict):
            m.graphs = [parse_program_graph(n, g) for n, g in graphs.items()]
        else:
            m.graphs = [parse_program_graph(g["name"], g) for g in graphs]
        if m.kind == "custom" and not m.graphs:
            raise ConfigError("system kind 'custom' needs at least one program graph")

    with _in_section("invariants"):
        m.invariant_docs = {n: parse_condition(c) for n, c in (doc.get("invariants") or {}).items()}
        clash = set(m.invariant_docs) & set(BUILTIN_INVARIANTS)
        if clash:
            raise ParseError(f"invariant name {sorted(clash)[0]!r} is reserved")
    return m


def parse_model(text: str, source="<model>") -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: invalid JSON: {e.msg}", line=e.lineno) from None
    try:
        return build_model(doc, source, text)
    except ModelError as e:
        if e.line is None:
            line = locate(text, e.section, re.findall(r"'([^']+)'", e.message))
            raise type(e)(e.message, section=e.section, line=line) from None
        raise


def load_model(path) -> Model:
    path = Path(path)
    return parse_model(path.read_text(encoding="utf-8"), str(path))


def fixture_path(name) -> Path:
    """Path of a bundled model document, e.g. ``fixture_path("three_policy_abstract.cfg")``."""
    return Path(__file__).parent / "fixtures" / name
