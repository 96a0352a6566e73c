"""Program graphs and their composition into a transition system.

A program graph is a finite set of locations with typed variables and
guarded transitions.  Each transition carries an action label, an optional
nondeterministic choice of variable values, a guard and a simultaneous
assignment.  Composition interleaves local steps and matches sending and
receiving actions of the same name, either as one joint step (``sync``) or
through a set of messages in transit (``async``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .conditions import (TT, DEFAULT_INTERPRETATION, Const, Interpretation, Ref, evaluate,
                         eval_term, refs)
from .errors import AmbiguousHandshake, ArityMismatch, ModelError
from .ontology import UNDEFINED, canon_key


class _Any:
    def __repr__(self):
        return "ANY"


ANY = _Any()


@dataclass(frozen=True)
class Variable:
    """``initial`` is a fixed start value, or ANY to start from every value in ``domain``."""
    name: str
    domain: tuple | None = None
    initial: object = UNDEFINED

    def start_values(self):
        if self.initial is ANY:
            if not self.domain:
                raise ModelError(f"variable {self.name!r} starts unconstrained "
                                 "but has no finite domain", section="program_graphs")
            return tuple(self.domain)
        return (self.initial,)


@dataclass(frozen=True)
class ActionLabel:
    kind: str              # tau | local | send | recv
    name: str = ""
    params: tuple = ()     # terms; receive params must be Ref (bind) or Const (match)

    def __str__(self):
        if self.kind == "tau":
            return "τ"
        mark = {"send": "!", "recv": "?"}.get(self.kind, "")
        return f"{mark}{self.name}({', '.join(map(str, self.params))})"


def tau():
    return ActionLabel("tau")


def local(name, *params):
    return ActionLabel("local", name, tuple(params))


def send(name, *params):
    return ActionLabel("send", name, tuple(params))


def recv(name, *params):
    return ActionLabel("recv", name, tuple(params))


@dataclass(frozen=True)
class Transition:
    source: str
    action: ActionLabel
    target: str
    guard: object = TT
    effect: tuple = ()     # ((var, term), ...) applied simultaneously
    choose: tuple = ()     # ((var, values), ...) picked before the guard is read


@dataclass
class ProgramGraph:
    name: str
    locations: tuple
    variables: tuple
    transitions: tuple
    initial_locations: tuple
    initial_condition: object = TT

    def __post_init__(self):
        self.locations = tuple(self.locations)
        self.variables = tuple(self.variables)
        self.transitions = tuple(self.transitions)
        self.initial_locations = tuple(self.initial_locations)
        self.var_names = tuple(v.name for v in self.variables)
        self.index = {n: k for k, n in enumerate(self.var_names)}
        if len(self.index) != len(self.var_names):
            raise ModelError(f"{self.name}: duplicate variable name", section="program_graphs")
        declared = set(self.var_names)
        locs = set(self.locations)
        for loc in self.initial_locations:
            if loc not in locs:
                raise ModelError(f"{self.name}: undeclared initial location {loc!r}",
                                 section="program_graphs")
        for t in self.transitions:
            where = f"{self.name}: {t.source} -{t.action}-> {t.target}"
            if t.source not in locs or t.target not in locs:
                raise ModelError(f"{where}: endpoint is not a declared location",
                                 section="program_graphs")
            used = refs(t.guard) | {v for v, _ in t.effect} | {v for v, _ in t.choose}
            for _, term in t.effect:
                used |= refs(term)
            for p in t.action.params:
                if t.action.kind == "recv" and not isinstance(p, (Ref, Const)):
                    raise ModelError(f"{where}: receive parameters must be variables or "
                                     "constants", section="program_graphs")
                used |= refs(p)
            missing = used - declared
            if missing:
                raise ModelError(f"{where}: undeclared variable(s) {sorted(missing)}",
                                 section="program_graphs")
        self._outgoing = {loc: [t for t in self.transitions if t.source == loc]
                          for loc in self.locations}

    def outgoing(self, loc):
        return self._outgoing[loc]

    def initial_valuations(self, interp=DEFAULT_INTERPRETATION):
        out = []
        for vals in itertools.product(*(v.start_values() for v in self.variables)):
            if evaluate(self.initial_condition, self._lookup(vals), interp) is True:
                out.append(tuple(vals))
        return out

    def _lookup(self, vals):
        index = self.index
        return lambda name: vals[index[name]]

    def actions(self):
        return {t.action.name: t.action for t in self.transitions if t.action.kind != "tau"}


# -- composition ----------------------------------------------------------------

@dataclass(frozen=True)
class CompositionState:
    locations: tuple
    valuations: tuple      # per component, values in declaration order
    msgs: frozenset = frozenset()


def show(v):
    """Stable text rendering of a variable value."""
    if v is UNDEFINED:
        return "⊥"
    if isinstance(v, frozenset):
        return "{" + ", ".join(show(x) for x in sorted(v, key=canon_key)) + "}"
    if isinstance(v, tuple):
        return "(" + ", ".join(show(x) for x in v) + ")"
    return str(v)


def to_json(v):
    if v is UNDEFINED:
        return None
    if isinstance(v, frozenset):
        return [to_json(x) for x in sorted(v, key=canon_key)]
    if isinstance(v, tuple):
        return [to_json(x) for x in v]
    return v


@dataclass(frozen=True)
class StepLabel:
    """One composed step: which components moved and under which action."""
    kind: str              # tau | local | send | recv | sync
    components: tuple
    name: str = ""
    values: tuple = ()
    detail: str = ""

    def sort_key(self):
        return canon_key((self.kind, self.components, self.name, self.values, self.detail))

    def __str__(self):
        who = "→".join(self.components)
        if self.kind == "tau":
            return f"{who}: τ {self.detail}"
        mark = {"send": "!", "recv": "?"}.get(self.kind, "")
        args = ", ".join(show(v) for v in self.values)
        return f"{who}: {mark}{self.name}({args})"


class Composition:
    """Transition system of several program graphs run side by side."""

    def __init__(self, pgs, mode="async", interp: Interpretation = DEFAULT_INTERPRETATION,
                 handshakes=None, pairwise=False, name="composition"):
        self.name = name
        if mode not in ("sync", "async"):
            raise ModelError(f"unknown composition mode {mode!r}", section="system")
        self.pgs = tuple(pgs)
        self.mode = mode
        self.interp = interp
        self.names = tuple(pg.name for pg in self.pgs)
        if len(set(self.names)) != len(self.names):
            raise ModelError("program graph names must be distinct", section="program_graphs")
        self.pos = {n: k for k, n in enumerate(self.names)}
        arity, kinds, senders, receivers = {}, {}, {}, {}
        for k, pg in enumerate(self.pgs):
            for t in pg.transitions:
                a = t.action
                if a.kind == "tau":
                    continue
                kinds.setdefault(a.name, set()).add(a.kind)
                if a.kind in ("send", "recv"):
                    n = len(a.params)
                    if arity.setdefault(a.name, n) != n:
                        raise ArityMismatch(f"action {a.name!r} used with {arity[a.name]} "
                                            f"and {n} parameters")
                    (senders if a.kind == "send" else receivers).setdefault(
                        a.name, set()).add(k)
        for name, ks in kinds.items():
            if "local" in ks and ks & {"send", "recv"}:
                raise AmbiguousHandshake(f"{name!r} is both a local and a handshake action")
        if handshakes is None:
            handshakes = set(senders) | set(receivers)
        self.handshakes = frozenset(handshakes)
        if pairwise:
            for name in self.handshakes:
                if len(senders.get(name, ())) > 1:
                    raise AmbiguousHandshake(f"{name!r} is sent by more than one component")
                if len(receivers.get(name, ())) > 1:
                    raise AmbiguousHandshake(f"{name!r} is received by more than one component")
        self.arity = arity

    # -- helpers

    def _lookup(self, k, vals):
        index = self.pgs[k].index

        def look(name):
            return vals[index[name]]
        return look

    def _assign(self, k, vals, pairs):
        vals = list(vals)
        index = self.pgs[k].index
        for name, v in pairs:
            vals[index[name]] = v
        return tuple(vals)

    def _chosen(self, k, t, vals):
        """Valuations after the transition's nondeterministic choice whose guard holds."""
        if t.choose:
            names = [n for n, _ in t.choose]
            combos = itertools.product(*(tuple(d) for _, d in t.choose))
            cands = [self._assign(k, vals, zip(names, c)) for c in combos]
        else:
            cands = [vals]
        return cands

    def _guard(self, k, t, vals):
        return evaluate(t.guard, self._lookup(k, vals), self.interp) is True

    def _effect(self, k, t, vals):
        look = self._lookup(k, vals)
        new = [(name, eval_term(term, look, self.interp)) for name, term in t.effect]
        return self._assign(k, vals, new)

    def _params(self, k, t, vals):
        look = self._lookup(k, vals)
        return tuple(eval_term(p, look, self.interp) for p in t.action.params)

    def _bind(self, k, t, vals, values):
        """Bind receive parameters to ``values``; None if a constant does not match."""
        pairs = []
        for p, v in zip(t.action.params, values):
            if isinstance(p, Const):
                if p.value != v:
                    return None
            else:
                pairs.append((p.name, v))
        return self._assign(k, vals, pairs)

    def _fire_send(self, k, t, vals):
        """(parameter values, post-valuation) for each enabled way to fire a send."""
        out = []
        for v in self._chosen(k, t, vals):
            if self._guard(k, t, v):
                out.append((self._params(k, t, v), self._effect(k, t, v)))
        return out

    def _fire_recv(self, k, t, vals, values):
        v = self._bind(k, t, vals, values)
        if v is None:
            return []
        out = []
        for w in self._chosen(k, t, v):
            if self._guard(k, t, w):
                out.append(self._effect(k, t, w))
        return out

    @staticmethod
    def _put(tup, k, x):
        return tup[:k] + (x,) + tup[k + 1:]

    # -- transition system interface

    def initial_states(self):
        per = []
        for pg in self.pgs:
            per.append([(loc, vals) for loc in pg.initial_locations
                        for vals in pg.initial_valuations(self.interp)])
        out = []
        for combo in itertools.product(*per):
            out.append(CompositionState(tuple(c[0] for c in combo),
                                        tuple(c[1] for c in combo)))
        return out

    def successors(self, st: CompositionState):
        out = []
        for k, pg in enumerate(self.pgs):
            loc, vals = st.locations[k], st.valuations[k]
            for t in pg.outgoing(loc):
                kind = t.action.kind
                if kind in ("send", "recv") and t.action.name not in self.handshakes:
                    kind = "local"      # unmatched handshake label behaves like a local action
                if kind in ("tau", "local"):
                    for v in self._chosen(k, t, vals):
                        if not self._guard(k, t, v):
                            continue
                        values = () if kind == "tau" else self._params(k, t, v)
                        nxt = CompositionState(
                            self._put(st.locations, k, t.target),
                            self._put(st.valuations, k, self._effect(k, t, v)), st.msgs)
                        lab = StepLabel(kind, (pg.name,), t.action.name, values,
                                        f"{t.source}->{t.target}")
                        out.append((lab, nxt))
                elif self.mode == "async":
                    out.extend(self._async_steps(st, k, t))
                elif kind == "send":
                    out.extend(self._sync_steps(st, k, t))
        out.sort(key=lambda e: (e[0].sort_key(), canon_key(self._state_key(e[1]))))
        return out

    def _async_steps(self, st, k, t):
        pg = self.pgs[k]
        vals = st.valuations[k]
        locs = self._put(st.locations, k, t.target)
        out = []
        if t.action.kind == "send":
            for values, post in self._fire_send(k, t, vals):
                msg = (t.action.name, values)
                nxt = CompositionState(locs, self._put(st.valuations, k, post),
                                       st.msgs | {msg})
                out.append((StepLabel("send", (pg.name,), t.action.name, values,
                                      f"{t.source}->{t.target}"), nxt))
        else:
            for msg in st.msgs:
                name, values = msg
                if name != t.action.name:
                    continue
                for post in self._fire_recv(k, t, vals, values):
                    nxt = CompositionState(locs, self._put(st.valuations, k, post),
                                           st.msgs - {msg})
                    out.append((StepLabel("recv", (pg.name,), name, values,
                                          f"{t.source}->{t.target}"), nxt))
        return out

    def _sync_steps(self, st, k, t):
        out = []
        name = t.action.name
        for values, post in self._fire_send(k, t, st.valuations[k]):
            for j, other in enumerate(self.pgs):
                if j == k:
                    continue
                for u in other.outgoing(st.locations[j]):
                    if u.action.kind != "recv" or u.action.name != name:
                        continue
                    for rpost in self._fire_recv(j, u, st.valuations[j], values):
                        locs = self._put(self._put(st.locations, k, t.target), j, u.target)
                        vals = self._put(self._put(st.valuations, k, post), j, rpost)
                        lab = StepLabel("sync", (self.names[k], other.name), name, values,
                                        f"{t.source}->{t.target}|{u.source}->{u.target}")
                        out.append((lab, CompositionState(locs, vals, st.msgs)))
        return out

    @staticmethod
    def _state_key(st):
        return (st.locations, st.valuations, st.msgs)

    def value(self, st, qualified):
        """Value of ``"Component.var"`` in a composed state."""
        comp, var = qualified.split(".", 1)
        k = self.pos[comp]
        return st.valuations[k][self.pgs[k].index[var]]

    def location(self, st, comp):
        return st.locations[self.pos[comp]]

    def describe(self, st):
        return {
            "locations": {n: st.locations[k] for k, n in enumerate(self.names)},
            "vars": {f"{n}.{var}": to_json(st.valuations[k][idx])
                     for k, n in enumerate(self.names)
                     for var, idx in self.pgs[k].index.items()},
            "msgs": [[name, [to_json(v) for v in vals]]
                     for name, vals in sorted(st.msgs, key=canon_key)],
        }


def compose(pgs, mode="async", interp: Interpretation = DEFAULT_INTERPRETATION,
            handshakes=None, pairwise=False, name="composition") -> Composition:
    """Compose program graphs.

    With ``pairwise=True`` every handshake must have exactly one sending and
    one receiving component (the classic binary handshake); the case-study
    systems need several senders per action and leave it off.
    """
    return Composition(pgs, mode, interp, handshakes, pairwise, name)


def policy_interpretation(universe, base: Interpretation = DEFAULT_INTERPRETATION):
    """Guard interpretation with policy subsumption and small set/tuple helpers."""

    def sub(a, b):
        return a in universe and b in universe and universe.leq(a, b)

    def add(s, x):
        return s | {x} if isinstance(s, frozenset) else UNDEFINED

    return base.extend(
        functions={"pair": (2, lambda a, b: (a, b)), "add": (2, add)},
        predicates={"⊑": sub, "in": lambda x, s: isinstance(s, frozenset) and x in s},
    )

