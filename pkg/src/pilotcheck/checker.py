"""Explicit-state exploration, invariant checking and refinement checking.

Any object with ``initial_states()``, ``successors(state)`` (an ordered list
of ``(label, state)``) and ``describe(state)`` (a JSON-ready dict) is a
transition system here.  Exploration is breadth-first with a hash-set of
visited states, so counterexamples are shortest; successors come out in a
fixed order, so equal inputs give equal reports.
"""
from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .errors import BoundExceeded

STUTTER_NOTE = ("stutter steps are those whose mapped states agree on ν, π and ρ; "
                "the clock is not compared")


@dataclass
class ReachSummary:
    states: int
    transitions: int
    depth: int
    bound: int | None = None


@dataclass
class InvariantSpec:
    name: str
    predicate: Callable
    description: str = ""
    notes: tuple = ()

    def __call__(self, state):
        return bool(self.predicate(state))

    def through(self, mapping):
        """The same requirement read on implementation states via ``mapping``."""
        return InvariantSpec(self.name, lambda s: self.predicate(mapping(s)),
                             self.description, self.notes)


@dataclass
class Trace:
    states: list
    labels: list

    def __len__(self):
        return len(self.labels)


@dataclass
class Verdict:
    passed: bool
    kind: str                       # invariant | refinement
    obligation: str
    system: str
    summary: ReachSummary
    trace: Trace | None = None
    reason: str = ""
    abstract: list | None = None    # mapped states along the trace (refinement)
    notes: list = field(default_factory=list)

    @property
    def exit_code(self):
        return 0 if self.passed else 1


# -- exploration ----------------------------------------------------------------

def _bfs(ts, bound, on_state=None, on_edge=None):
    """Generic breadth-first search.

    ``on_state(s)`` / ``on_edge(s, label, t)`` may return a truthy value to
    stop; the search then returns ``(parents, hit)``.
    """
    parents = {}
    depth = {}
    queue = deque()
    transitions = 0
    max_depth = 0

    def summary():
        return ReachSummary(len(parents), transitions, max_depth, bound)

    for s in ts.initial_states():
        if s in parents:
            continue
        parents[s] = None
        depth[s] = 0
        if bound is not None and len(parents) > bound:
            raise BoundExceeded(summary())
        if on_state and on_state(s):
            return parents, ("state", s), summary()
        queue.append(s)
    while queue:
        s = queue.popleft()
        for label, t in ts.successors(s):
            transitions += 1
            if on_edge and on_edge(s, label, t):
                return parents, ("edge", (s, label, t)), summary()
            if t in parents:
                continue
            parents[t] = (s, label)
            depth[t] = depth[s] + 1
            max_depth = max(max_depth, depth[t])
            if bound is not None and len(parents) > bound:
                raise BoundExceeded(summary())
            if on_state and on_state(t):
                return parents, ("state", t), summary()
            queue.append(t)
    return parents, None, summary()


def _path(parents, s):
    states, labels = [s], []
    while parents[s] is not None:
        s, label = parents[s]
        states.append(s)
        labels.append(label)
    states.reverse()
    labels.reverse()
    return Trace(states, labels)


def explore(ts, bound: int | None = None) -> ReachSummary:
    """Count reachable states and transitions; raise BoundExceeded past ``bound`` states."""
    return _bfs(ts, bound)[2]


def reachable(ts, bound: int | None = None):
    """The reachable states in breadth-first discovery order."""
    return list(_bfs(ts, bound)[0])


def _system_name(ts):
    return getattr(ts, "name", type(ts).__name__)


def check_invariant(ts, inv: InvariantSpec, bound: int | None = None) -> Verdict:
    parents, hit, summ = _bfs(ts, bound, on_state=lambda s: not inv(s))
    notes = list(inv.notes)
    if hit is None:
        return Verdict(True, "invariant", inv.name, _system_name(ts), summ, notes=notes)
    trace = _path(parents, hit[1])
    return Verdict(False, "invariant", inv.name, _system_name(ts), summ, trace,
                   reason=f"{inv.name} is violated in the final state", notes=notes)


def check_refinement(impl, spec, mapping, bound: int | None = None) -> Verdict:
    """Every implementation step maps to a spec step or to a stutter."""
    spec_init = {s.untimed() for s in spec.initial_states()}
    cache = {}
    failure = {}

    def spec_next(a):
        key = a.untimed()
        if key not in cache:
            cache[key] = {t.untimed() for _, t in spec.successors(a)}
        return cache[key]

    impl_initial = set(impl.initial_states())

    def on_state(s):
        if s in impl_initial and mapping(s).untimed() not in spec_init:
            failure["reason"] = "the initial state maps to no initial abstract state"
            return True
        return False

    def on_edge(s, label, t):
        a, b = mapping(s), mapping(t)
        if a.untimed() == b.untimed():
            return False
        if b.untimed() in spec_next(a):
            return False
        failure["reason"] = ("the final step changes the mapped state but no abstract "
                             "event leads there")
        return True

    parents, hit, summ = _bfs(impl, bound, on_state=on_state, on_edge=on_edge)
    name = f"refines {_system_name(spec)}"
    notes = [STUTTER_NOTE]
    if hit is None:
        return Verdict(True, "refinement", name, _system_name(impl), summ, notes=notes)
    if hit[0] == "state":
        trace = Trace([hit[1]], [])
    else:
        s, label, t = hit[1]
        trace = _path(parents, s)
        trace.states.append(t)
        trace.labels.append(label)
    abstract = [mapping(s) for s in trace.states]
    return Verdict(False, "refinement", name, _system_name(impl), summ, trace,
                   reason=failure["reason"], abstract=abstract, notes=notes)


def replay(ts, trace: Trace) -> bool:
    """Re-execute ``trace`` through ``ts``; raise AssertionError at the first mismatch."""
    if trace.states[0] not in set(ts.initial_states()):
        raise AssertionError("trace does not start in an initial state")
    for k, label in enumerate(trace.labels):
        prev, nxt = trace.states[k], trace.states[k + 1]
        if (label, nxt) not in ts.successors(prev):
            raise AssertionError(f"step {k + 1} ({label}) is not a transition of the system")
    return True


def simulate(ts, steps: int, seed: int = 0) -> Trace:
    """One random run of at most ``steps`` steps; stops early at a deadlock."""
    rng = random.Random(seed)
    s = rng.choice(list(ts.initial_states()))
    trace = Trace([s], [])
    for _ in range(steps):
        succ = ts.successors(s)
        if not succ:
            break
        label, s = succ[rng.randrange(len(succ))]
        trace.labels.append(label)
        trace.states.append(s)
    return trace


# -- privacy requirements ---------------------------------------------------------

def _type_ok(cfg, item, p):
    """Policy ``p`` governs ``item``; the empty policy governs every type."""
    t = cfg.universe.datatype(p)
    return t is None or (cfg.ontology.type(item), t) in cfg.ontology.datatypes.pairs


def _overlapping_owner_policies(cfg):
    """Owners that may start with several own policies covering one item."""
    onto = cfg.ontology
    found = set()
    for i in onto.items:
        owner = onto.owner(i)
        for choice in cfg.initial_policies.get(owner, ()):
            if sum(_type_ok(cfg, i, p) for p in choice) > 1:
                found.add(owner)
    return sorted(found)


def pr1(cfg) -> InvariantSpec:
    """Data held by a controller is governed by a policy at least as strict as the owner's.

    When the owner holds several policies for the item's type, every one of
    them must cover the controller's policy.
    """
    onto, u = cfg.ontology, cfg.universe
    dcs = onto.devices_with_role("dc")
    notes = tuple(f"{d} may hold several own policies for one item; pr1 requires all of them"
                  for d in _overlapping_owner_policies(cfg))

    def holds(st):
        for d in dcs:
            for (_, i, p_i) in st.received(d):
                owner = onto.owner(i)
                for (o, p) in st.policies(owner):
                    if o == owner and _type_ok(cfg, i, p) and not u.leq(p_i, p):
                        return False
        return True

    return InvariantSpec("pr1", holds, "every (·, i, p) ∈ ρ(DC) has p ⊑ the owner's own policy",
                         notes)


def pr2(cfg) -> InvariantSpec:
    """The owner held the collector's policy for the item's type before collection."""
    onto, u = cfg.ontology, cfg.universe

    def holds(st):
        for rcv in onto.devices:
            for (sndr, i, _) in st.received(rcv):
                if onto.owner(i) != sndr:
                    continue
                t = onto.type(i)
                if not any(d == rcv and u.datatype(p) is not None
                           and (t, u.datatype(p)) in onto.datatypes.pairs
                           for (d, p) in st.policies(sndr)):
                    return False
        return True

    return InvariantSpec("pr2", holds,
                         "every collected (owner, i, ·) ∈ ρ(d) has some (d, p) ∈ π(owner)")


BUILTIN_INVARIANTS = {"pr1": pr1, "pr2": pr2}


# -- reports ----------------------------------------------------------------------

def _flatten(doc, prefix=""):
    out = {}
    if isinstance(doc, dict):
        for k, v in doc.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    else:
        out[prefix[:-1]] = doc
    return out


def _changes(before, after):
    a, b = _flatten(before), _flatten(after)
    keys = sorted(set(a) | set(b))
    return [(k, a.get(k), b.get(k)) for k in keys if a.get(k) != b.get(k)]


def _fmt(v):
    return json.dumps(v, ensure_ascii=False, sort_keys=True)


def report_json(verdict: Verdict, ts) -> dict:
    doc = {
        "result": "pass" if verdict.passed else "fail",
        "check": verdict.kind,
        "obligation": verdict.obligation,
        "system": verdict.system,
        "states": verdict.summary.states,
        "transitions": verdict.summary.transitions,
        "depth": verdict.summary.depth,
        "notes": list(verdict.notes),
    }
    if verdict.trace is not None:
        doc["reason"] = verdict.reason
        doc["trace"] = {
            "states": [ts.describe(s) for s in verdict.trace.states],
            "labels": [str(label) for label in verdict.trace.labels],
        }
        if verdict.abstract is not None:
            doc["trace"]["abstract"] = [a.to_json() for a in verdict.abstract]
    return doc


def render_json(verdict: Verdict, ts) -> str:
    return json.dumps(report_json(verdict, ts), ensure_ascii=False, sort_keys=True,
                      indent=2) + "\n"


def render_text(verdict: Verdict, ts) -> str:
    s = verdict.summary
    head = "Pass" if verdict.passed else "Fail"
    lines = [f"{head}: {verdict.obligation} on {verdict.system}",
             f"states explored: {s.states}, transitions: {s.transitions}, depth: {s.depth}"]
    lines += [f"note: {n}" for n in verdict.notes]
    if verdict.trace is not None:
        lines.append(f"reason: {verdict.reason}")
        lines.append(f"counterexample ({len(verdict.trace)} steps):")
        states = [ts.describe(x) for x in verdict.trace.states]
        lines.append(f"  0. initial state {_fmt(states[0])}")
        for k, label in enumerate(verdict.trace.labels, start=1):
            lines.append(f"  {k}. {label}")
            for key, old, new in _changes(states[k - 1], states[k]):
                lines.append(f"       {key}: {_fmt(old)} -> {_fmt(new)}")
        if verdict.abstract is not None:
            lines.append("mapped abstract states:")
            for k, a in enumerate(verdict.abstract):
                lines.append(f"  {k}. {_fmt(a.to_json())}")
    return "\n".join(lines) + "\n"


def render_trace(trace: Trace, ts) -> str:
    states = [ts.describe(x) for x in trace.states]
    lines = [f"0. initial state {_fmt(states[0])}"]
    for k, label in enumerate(trace.labels, start=1):
        lines.append(f"{k}. {label}")
        for key, old, new in _changes(states[k - 1], states[k]):
            lines.append(f"     {key}: {_fmt(old)} -> {_fmt(new)}")
    return "\n".join(lines) + "\n"


def to_dot(ts, bound: int | None = None) -> str:
    """The reachable graph in DOT format; nodes numbered in discovery order."""
    order = reachable(ts, bound)
    ids = {s: k for k, s in enumerate(order)}
    init = set(ts.initial_states())
    lines = ["digraph system {", "  node [shape=circle, label=\"\"];"]
    for s, k in ids.items():
        tip = _fmt(ts.describe(s)).replace("\\", "\\\\").replace('"', '\\"')
        shape = ", shape=doublecircle" if s in init else ""
        lines.append(f'  n{k} [label="{k}", tooltip="{tip}"{shape}];')
    for s in order:
        for label, t in ts.successors(s):
            text = str(label).replace("\\", "\\\\").replace('"', '\\"')
            lines.append(f'  n{ids[s]} -> n{ids[t]} [label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

