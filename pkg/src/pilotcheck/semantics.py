"""Abstract operational semantics as an explorable transition system.

A state is ⟨ν, π, ρ⟩ plus a logical clock:

* ``nu``  item values held by each device (absent = undefined),
* ``pi``  each device's policy base, pairs (origin device, policy name),
* ``rho`` data received by each device, triples (source, item, policy name).

The clock counts events.  It only matters through ``clock < retention``
tests, so it saturates at the largest retention time in the model; in
always-active mode it stays at 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Mapping

from .conditions import DEFAULT_INTERPRETATION, Interpretation
from .errors import ConfigError
from .events import Request, Send, Transfer
from .ontology import UNDEFINED, Ontology, canon_key
from .policy import active_policy, active_transfer
from .universe import PolicyUniverse


class _NotEnabled:
    """Returned by the ``apply_*`` functions when a rule's premises fail."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "NotEnabled"


NotEnabled = _NotEnabled()


def _lookup(entries, key, default):
    for k, v in entries:
        if k == key:
            return v
    return default


def _put(entries, key, value):
    return tuple((k, value if k == key else v) for k, v in entries)


@dataclass(frozen=True)
class SystemState:
    nu: tuple = ()     # sorted ((device, item), value), defined entries only
    pi: tuple = ()     # ((device, frozenset{(origin, policy)}), ...) sorted by device
    rho: tuple = ()    # ((device, frozenset{(source, item, policy)}), ...)
    clock: int = 0

    def value(self, device, item):
        return _lookup(self.nu, (device, item), UNDEFINED)

    def policies(self, device):
        return _lookup(self.pi, device, frozenset())

    def received(self, device):
        return _lookup(self.rho, device, frozenset())

    def untimed(self):
        return (self.nu, self.pi, self.rho)

    def with_value(self, device, item, value):
        nu = dict(self.nu)
        if value is UNDEFINED:
            nu.pop((device, item), None)
        else:
            nu[(device, item)] = value
        return replace(self, nu=tuple(sorted(nu.items(), key=lambda kv: canon_key(kv[0]))))

    def with_policies(self, device, pairs):
        return replace(self, pi=_put(self.pi, device, frozenset(pairs)))

    def with_received(self, device, triples):
        return replace(self, rho=_put(self.rho, device, frozenset(triples)))

    @classmethod
    def make(cls, devices, nu=None, pi=None, rho=None, clock=0):
        """Build a state from plain dicts; devices missing from pi/rho get empty sets."""
        nu = {k: v for k, v in (nu or {}).items() if v is not UNDEFINED}
        pi = pi or {}
        rho = rho or {}
        return cls(
            nu=tuple(sorted(nu.items(), key=lambda kv: canon_key(kv[0]))),
            pi=tuple((d, frozenset(pi.get(d, ()))) for d in sorted(devices)),
            rho=tuple((d, frozenset(rho.get(d, ()))) for d in sorted(devices)),
            clock=clock,
        )

    def to_json(self):
        def sets(entries):
            return {d: sorted((list(x) for x in s), key=canon_key_list) for d, s in entries}
        return {
            "nu": {f"{d}.{i}": _json_value(v) for (d, i), v in self.nu},
            "pi": sets(self.pi),
            "rho": sets(self.rho),
            "clock": self.clock,
        }


def canon_key_list(xs):
    return canon_key(tuple(xs))


def _json_value(v):
    if v is UNDEFINED:
        return None
    if isinstance(v, frozenset):
        return sorted((_json_value(x) for x in v), key=lambda x: repr(x))
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    return v


@dataclass
class ModelConfig:
    """Everything the abstract semantics needs to generate a transition system.

    ``initial_policies`` maps a device to its alternative initial policy sets
    (each a tuple of policy names); ``initial_values`` maps an item to the
    alternative values its owner starts with.  Every combination is an
    initial state.
    """

    ontology: Ontology
    universe: PolicyUniverse
    initial_policies: Mapping = field(default_factory=dict)
    initial_values: Mapping = field(default_factory=dict)
    always_active: bool = True
    policy_mode: str = "abstract"
    interpretation: Interpretation = DEFAULT_INTERPRETATION
    bound: int | None = None

    def __post_init__(self):
        if self.policy_mode != self.universe.mode:
            raise ConfigError(
                f"policy_mode {self.policy_mode!r} does not match a {self.universe.mode} "
                "policy universe", section="config")
        if not self.always_active and self.universe.mode != "structural":
            raise ConfigError("abstract policies carry no conditions or retention times; "
                              "they require always_active", section="config")
        onto = self.ontology
        for d, choices in self.initial_policies.items():
            if d not in onto.devices:
                raise ConfigError(f"initial policies for undeclared device {d!r}",
                                  section="initial_policies")
            for choice in choices:
                for p in choice:
                    if p not in self.universe:
                        raise ConfigError(f"device {d!r}: undeclared policy {p!r}",
                                          section="initial_policies")
        for i in self.initial_values:
            if i not in onto.items:
                raise ConfigError(f"initial value for undeclared item {i!r}", section="items")
        self.devices = onto.devices
        self.dcs = tuple(d for d in onto.devices if onto.role(d) == "dc")
        self.participants = tuple(d for d in onto.devices if onto.role(d) != "repository")
        self.horizon = 0 if self.always_active else self.universe.horizon

    def tick(self, st):
        return min(st.clock + 1, self.horizon)

    def type_compatible(self, item, p):
        """``type(i) ≤_T p.t``; the empty policy is compatible with nothing."""
        t = self.universe.datatype(p)
        return t is not None and (self.ontology.type(item), t) in self.ontology.datatypes.pairs

    def active(self, p, event, st):
        if self.always_active:
            return self.type_compatible(event.item, p)
        return active_policy(self.universe.policy(p), event, st, self.ontology,
                             self.interpretation)

    def initial_states(self):
        onto = self.ontology
        dev_choices = [[(d, tuple(c)) for c in self.initial_policies[d]]
                       for d in sorted(self.initial_policies)]
        item_choices = [[(i, v) for v in self.initial_values[i]]
                        for i in sorted(self.initial_values)]
        out = []
        for combo in itertools.product(*dev_choices, *item_choices):
            pols = combo[:len(dev_choices)]
            vals = combo[len(dev_choices):]
            pi = {d: {(d, p) for p in ps} for d, ps in pols}
            nu = {(onto.owner(i), i): v for i, v in vals}
            out.append(SystemState.make(self.devices, nu=nu, pi=pi))
        return out


# -- rules --------------------------------------------------------------------

def apply_request(st: SystemState, sndr, rcv, t, p, cfg: ModelConfig):
    """R1 adds (sndr, p) to π(rcv); R2 replaces every comparable (sndr, q) by it."""
    onto, u = cfg.ontology, cfg.universe
    if sndr == rcv or onto.role(sndr) != "dc" or onto.role(rcv) == "repository":
        return NotEnabled
    if (sndr, p) not in st.policies(sndr) or u.datatype(p) != t:
        return NotEnabled
    base = st.policies(rcv)
    kept = {(s, q) for (s, q) in base if not (s == sndr and u.comparable(p, q))}
    kept.add((sndr, p))
    return replace(st.with_policies(rcv, kept), clock=cfg.tick(st))


def _receiver_policies(st, sndr, rcv, p_rcv):
    cands = sorted(q for (d, q) in st.policies(sndr) if d == rcv)
    if p_rcv is not None:
        cands = [q for q in cands if q == p_rcv]
    return cands


def _deliver(st, sndr, rcv, item, p_rcv, cfg):
    out = st.with_received(rcv, st.received(rcv) | {(sndr, item, p_rcv)})
    out = out.with_value(rcv, item, st.value(sndr, item))
    return replace(out, clock=cfg.tick(st))


def send_candidates(st, sndr, rcv, item, cfg, p_rcv=None):
    """Receiver policies under which Send(sndr, rcv, item) may fire."""
    onto, u = cfg.ontology, cfg.universe
    if sndr == rcv or onto.owner(item) != sndr or onto.role(rcv) != "dc":
        return []
    if st.value(sndr, item) is UNDEFINED:
        return []
    ev = Send(sndr, rcv, item)
    own = [q for (d, q) in st.policies(sndr) if d == sndr and cfg.active(q, ev, st)]
    return [q for q in _receiver_policies(st, sndr, rcv, p_rcv)
            if cfg.active(q, ev, st) and any(u.leq(q, ps) for ps in own)]


def apply_send(st: SystemState, sndr, rcv, item, cfg: ModelConfig, p_rcv=None):
    """Collection of ``item`` from its owner ``sndr`` by ``rcv``.

    When ``p_rcv`` is None the smallest eligible receiver policy (by name) is
    used; pass it explicitly to pick among several.
    """
    cands = send_candidates(st, sndr, rcv, item, cfg, p_rcv)
    if not cands:
        return NotEnabled
    return _deliver(st, sndr, rcv, item, cands[0], cfg)


def transfer_candidates(st, sndr, rcv, item, cfg, p_rcv=None):
    onto, u = cfg.ontology, cfg.universe
    if sndr == rcv or onto.role(rcv) != "dc" or onto.role(sndr) == "repository":
        return []
    if st.value(sndr, item) is UNDEFINED:
        return []
    held = sorted({p for (_, i, p) in st.received(sndr) if i == item})
    if not held:
        return []
    ev = Transfer(sndr, rcv, item)
    out = []
    for q in _receiver_policies(st, sndr, rcv, p_rcv):
        if not cfg.active(q, ev, st):
            continue
        for p in held:
            if cfg.always_active:
                ok = u.transfer_ok(q, p)
            else:
                pol = u.policy(p)
                ok = any(active_transfer(tr, pol, ev, st, onto, cfg.interpretation)
                         for tr in u.transfer_rules_for(q, p))
            if ok:
                out.append(q)
                break
    return out


def apply_transfer(st: SystemState, sndr, rcv, item, cfg: ModelConfig, p_rcv=None):
    """Onward sharing of previously received ``item`` from ``sndr`` to ``rcv``."""
    cands = transfer_candidates(st, sndr, rcv, item, cfg, p_rcv)
    if not cands:
        return NotEnabled
    return _deliver(st, sndr, rcv, item, cands[0], cfg)


def apply_event(st, event, cfg):
    if isinstance(event, Request):
        return apply_request(st, event.sndr, event.rcv, event.datatype, event.policy, cfg)
    if isinstance(event, Send):
        return apply_send(st, event.sndr, event.rcv, event.item, cfg, event.policy)
    if isinstance(event, Transfer):
        return apply_transfer(st, event.sndr, event.rcv, event.item, cfg, event.policy)
    raise TypeError(f"not an event: {event!r}")


def enabled_events(st: SystemState, cfg: ModelConfig):
    """Every firing event instance with its successor, requests then sends then transfers."""
    onto, u = cfg.ontology, cfg.universe
    out = []
    for sndr in cfg.dcs:
        own = sorted(p for (d, p) in st.policies(sndr) if d == sndr)
        for rcv in cfg.participants:
            if rcv == sndr:
                continue
            for p in own:
                t = u.datatype(p)
                if t is None:
                    continue
                nxt = apply_request(st, sndr, rcv, t, p, cfg)
                if nxt is not NotEnabled:
                    out.append((Request(sndr, rcv, t, p), nxt))
    for item in onto.items:
        sndr = onto.owner(item)
        for rcv in cfg.dcs:
            for q in send_candidates(st, sndr, rcv, item, cfg):
                out.append((Send(sndr, rcv, item, q), _deliver(st, sndr, rcv, item, q, cfg)))
    for sndr in cfg.participants:
        for item in onto.items:
            for rcv in cfg.dcs:
                for q in transfer_candidates(st, sndr, rcv, item, cfg):
                    out.append((Transfer(sndr, rcv, item, q),
                                _deliver(st, sndr, rcv, item, q, cfg)))
    return out


class AbstractSystem:
    """The abstract semantics packaged as a transition system."""

    name = "abstract"

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg

    def initial_states(self):
        return self.cfg.initial_states()

    def successors(self, state):
        return enabled_events(state, self.cfg)

    def describe(self, state):
        return state.to_json()

    def replay_step(self, state, label):
        return apply_event(state, label, self.cfg)


def abstract_ts(cfg: ModelConfig) -> AbstractSystem:
    return AbstractSystem(cfg)
