"""Gateway program graphs for direct and indirect consent exchange.

Direct: each data controller gateway asks the data subject gateway (or a
peer controller) for data by sending its policy; the subject gateway hands
the item over only when that policy subsumes its own.

Indirect: controllers upload their policies to a repository; the subject
gateway downloads the repository contents and broadcasts the item with a
policy it accepts; controllers keep broadcasts addressed to them whose
policy their own subsumes and drop the rest.

Each builder returns a :class:`CaseStudy` bundling the composed system, the
abstract system it should refine, and the mapping between their states.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .conditions import FF, TT, Apply, Const, Not, Pred, Ref, conj
from .errors import ConfigError, MappingPartial
from .ontology import UNDEFINED
from .proggraph import (ANY, Composition, ProgramGraph, Transition, Variable, compose, local,
                        policy_interpretation, recv, send, tau)
from .semantics import ModelConfig, SystemState, abstract_ts

MUTANTS = {"direct": ("ds_guard",), "indirect": ("dc_guard",)}

V = Ref
NONE = Const(UNDEFINED)


def sub(a, b):
    return Pred("⊑", a, b)


def pair(a, b):
    return Apply("pair", (a, b))


def add(s, x):
    return Apply("add", (s, x))


def _reset(*names):
    return tuple((n, NONE) for n in names)


class RefinementMapping:
    """Implementation state → abstract state, with a human-readable description."""

    def __init__(self, fn: Callable, description: str = ""):
        self.fn = fn
        self.description = description

    def __call__(self, state):
        try:
            out = self.fn(state)
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise MappingPartial(f"mapping undefined on {state}: {e}") from None
        if not isinstance(out, SystemState):
            raise MappingPartial(f"mapping returned {out!r} for {state}")
        return out


@dataclass
class CaseStudy:
    name: str
    system: Composition
    spec: object
    mapping: RefinementMapping
    cfg: ModelConfig


@dataclass
class _Setup:
    ds: str
    dcs: tuple
    item: str
    values: tuple
    pools: dict
    repo: str | None = None


def _setup(cfg: ModelConfig, need_repo=False) -> _Setup:
    onto = cfg.ontology
    if not cfg.always_active:
        raise ConfigError("gateway systems are built for always_active mode", section="config")
    dss = onto.devices_with_role("ds")
    dcs = onto.devices_with_role("dc")
    repos = onto.devices_with_role("repository")
    if len(dss) != 1:
        raise ConfigError(f"exactly one data subject device is required, found {len(dss)}",
                          section="devices")
    if not dcs:
        raise ConfigError("at least one data controller device is required", section="devices")
    if need_repo and len(repos) != 1:
        raise ConfigError(f"exactly one repository device is required, found {len(repos)}",
                          section="devices")
    ds = dss[0]
    owned = [i for i in onto.items if onto.owner(i) == ds]
    if len(owned) != 1 or len(onto.items) != 1:
        raise ConfigError("gateway systems model exactly one item, owned by the data subject",
                          section="items")
    item = owned[0]
    values = tuple(cfg.initial_values.get(item, ()))
    if not values:
        raise ConfigError(f"item {item!r} needs at least one initial value", section="items")
    pools = {}
    for d in (ds, *dcs):
        choices = cfg.initial_policies.get(d)
        if not choices:
            raise ConfigError(f"device {d!r} needs an initial policy pool",
                              section="initial_policies")
        if any(len(c) != 1 for c in choices):
            raise ConfigError(f"device {d!r}: gateway devices start with exactly one policy",
                              section="initial_policies")
        pools[d] = tuple(c[0] for c in choices)
    return _Setup(ds, dcs, item, values, pools, repos[0] if need_repo else None)


def _state(cfg, nu, pi, rho):
    return SystemState.make(cfg.devices, nu=nu, pi=pi, rho=rho)


# -- direct ---------------------------------------------------------------------

def direct_ds_gateway(ds, pool, values, mutant=None):
    give = TT if mutant == "ds_guard" else sub(V("p_DC"), V("p_DS"))
    return ProgramGraph(
        name=ds,
        locations=("s0", "s1", "s2"),
        variables=(
            Variable("policy_in", pool, ANY),
            Variable("data_in", values, ANY),
            Variable("p_DS"), Variable("i"),
            Variable("base", None, frozenset()),
            Variable("cur"), Variable("p_DC"),
        ),
        transitions=(
            Transition("s0", local("init"), "s1",
                       effect=(("p_DS", V("policy_in")), ("i", V("data_in")))),
            Transition("s1", recv("request", V("cur"), Const(ds), V("p_DC")), "s2",
                       effect=(("base", add(V("base"), pair(V("cur"), V("p_DC")))),)),
            Transition("s2", tau(), "s1", guard=Not(sub(V("p_DC"), V("p_DS"))),
                       effect=_reset("cur", "p_DC")),
            Transition("s2", send("send", Const(ds), V("cur"), V("p_DC"), V("i")), "s1",
                       guard=give, effect=_reset("cur", "p_DC")),
        ),
        initial_locations=("s0",),
    )


def direct_dc_gateway(dc, pool, targets, relay=True):
    """Controller gateway; ``relay`` adds the onward-sharing loop s3 ↔ s4."""
    trans = [
        Transition("s0", local("init"), "s1", effect=(("p_DC", V("policy_in")),)),
        Transition("s1", send("request", Const(dc), V("to"), V("p_DC")), "s2",
                   choose=(("to", tuple(targets)),)),
        Transition("s2", recv("send", V("src"), Const(dc), V("p_i"), V("i")), "s3"),
    ]
    if relay:
        trans += [
            Transition("s3", recv("request", V("req"), Const(dc), V("p_req")), "s4",
                       effect=(("base", add(V("base"), pair(V("req"), V("p_req")))),)),
            Transition("s4", tau(), "s3", guard=Not(sub(V("p_req"), V("p_i"))),
                       effect=_reset("req", "p_req")),
            Transition("s4", send("send", Const(dc), V("req"), V("p_req"), V("i")), "s3",
                       guard=sub(V("p_req"), V("p_i")), effect=_reset("req", "p_req")),
        ]
    return ProgramGraph(
        name=dc,
        locations=("s0", "s1", "s2", "s3", "s4"),
        variables=(
            Variable("policy_in", pool, ANY),
            Variable("p_DC"), Variable("to"),
            Variable("src"), Variable("p_i"), Variable("i"),
            Variable("req"), Variable("p_req"),
            Variable("base", None, frozenset()),
        ),
        transitions=tuple(trans),
        initial_locations=("s0",),
    )


def build_direct_system(cfg: ModelConfig, mode="async", mutant=None) -> CaseStudy:
    if mutant not in (None, *MUTANTS["direct"]):
        raise ConfigError(f"unknown direct mutant {mutant!r}", section="system")
    s = _setup(cfg)
    pgs = [direct_ds_gateway(s.ds, s.pools[s.ds], s.values, mutant)]
    for dc in s.dcs:
        targets = (s.ds,) + tuple(d for d in s.dcs if d != dc)
        pgs.append(direct_dc_gateway(dc, s.pools[dc], targets))
    system = compose(pgs, mode, policy_interpretation(cfg.universe, cfg.interpretation))
    ds, item = s.ds, s.item

    def m(st):
        val = system.value
        nu = {(ds, item): val(st, f"{ds}.data_in")}
        pi = {ds: {(ds, val(st, f"{ds}.policy_in"))} | val(st, f"{ds}.base")}
        rho = {}
        for dc in s.dcs:
            pi[dc] = {(dc, val(st, f"{dc}.policy_in"))} | val(st, f"{dc}.base")
            if system.location(st, dc) in ("s3", "s4"):
                nu[(dc, item)] = val(st, f"{dc}.i")
                rho[dc] = {(val(st, f"{dc}.src"), item, val(st, f"{dc}.p_i"))}
        return _state(cfg, nu, pi, rho)

    desc = (f"ν({ds},{item}) = {ds}.data_in; π(d) = {{(d, d.policy_in)}} ∪ d.base; "
            f"ρ(DC) = {{(DC.src, {item}, DC.p_i)}} once DC holds data; "
            "locations and messages in transit are invisible")
    name = "direct" + (f"[{mutant}]" if mutant else "")
    system.name = name
    return CaseStudy(name, system, abstract_ts(cfg), RefinementMapping(m, desc), cfg)


# -- indirect -------------------------------------------------------------------

def indirect_ds_gateway(ds, pool, values, dcs, policies):
    return ProgramGraph(
        name=ds,
        locations=("s0", "s1", "s2", "s3"),
        variables=(
            Variable("policy_in", pool, ANY),
            Variable("data_in", values, ANY),
            Variable("p_DS"), Variable("i"),
            Variable("Pi", None, frozenset()),
            Variable("to"), Variable("p"),
        ),
        transitions=(
            Transition("s0", local("init"), "s1",
                       effect=(("p_DS", V("policy_in")), ("i", V("data_in")))),
            Transition("s1", send("requestPolicies", Const(ds)), "s2"),
            Transition("s2", recv("downloadPolicies", Const(ds), V("Pi")), "s3"),
            Transition("s3", tau(), "s1", effect=(("Pi", Const(frozenset())),)),
            Transition("s3", send("broadcast", Const(ds), V("i"), V("to"), V("p")), "s3",
                       choose=(("to", tuple(dcs)), ("p", tuple(policies))),
                       guard=conj(Pred("in", pair(V("to"), V("p")), V("Pi")),
                                  sub(V("p"), V("p_DS"))),
                       effect=_reset("to", "p")),
        ),
        initial_locations=("s0",),
    )


def repository(name):
    return ProgramGraph(
        name=name,
        locations=("r0", "r1"),
        variables=(Variable("Pi", None, frozenset()), Variable("up_dc"), Variable("up_p"),
                   Variable("rq")),
        transitions=(
            Transition("r0", recv("uploadPolicy", V("up_dc"), V("up_p")), "r0",
                       effect=(("Pi", add(V("Pi"), pair(V("up_dc"), V("up_p")))),
                               *_reset("up_dc", "up_p"))),
            Transition("r0", recv("requestPolicies", V("rq")), "r1"),
            Transition("r1", send("downloadPolicies", V("rq"), V("Pi")), "r0",
                       effect=_reset("rq")),
        ),
        initial_locations=("r0",),
    )


def indirect_dc_gateway(dc, pool, peers=(), mutant=None, transfers=False):
    """Controller gateway.  ``transfers`` adds peer requests and the relay loop."""
    mine = conj(Pred("=", V("to"), Const(dc)), sub(V("p"), V("p_DC")))
    keep = TT if mutant == "dc_guard" else mine
    drop = FF if mutant == "dc_guard" else Not(mine)
    trans = [
        Transition("s0", local("init"), "s1", effect=(("p_DC", V("policy_in")),)),
        Transition("s1", send("uploadPolicy", Const(dc), V("p_DC")), "s2"),
        Transition("s2", recv("broadcast", V("src"), V("i"), V("to"), V("p")), "s2",
                   guard=drop, effect=_reset("src", "i", "to", "p")),
        Transition("s2", recv("broadcast", V("src"), V("i"), V("to"), V("p")), "s3",
                   guard=keep),
    ]
    locations = ["s0", "s1", "s2", "s3"]
    if transfers:
        locations += ["s4", "s5"]
        trans += [
            Transition("s2", send("request", Const(dc), V("to"), V("p_DC")), "s5",
                       choose=(("to", tuple(peers)),)),
            Transition("s5", recv("send", V("src"), Const(dc), V("p"), V("i")), "s3"),
            Transition("s3", recv("request", V("req"), Const(dc), V("p_req")), "s4",
                       effect=(("base", add(V("base"), pair(V("req"), V("p_req")))),)),
            Transition("s4", tau(), "s3", guard=Not(sub(V("p_req"), V("p"))),
                       effect=_reset("req", "p_req")),
            Transition("s4", send("send", Const(dc), V("req"), V("p_req"), V("i")), "s3",
                       guard=sub(V("p_req"), V("p")), effect=_reset("req", "p_req")),
        ]
    return ProgramGraph(
        name=dc,
        locations=tuple(locations),
        variables=(
            Variable("policy_in", pool, ANY), Variable("p_DC"),
            Variable("src"), Variable("i"), Variable("to"), Variable("p"),
            Variable("req"), Variable("p_req"), Variable("base", None, frozenset()),
        ),
        transitions=tuple(trans),
        initial_locations=("s0",),
    )


def build_indirect_system(cfg: ModelConfig, mode="async", mutant=None,
                          transfers=False) -> CaseStudy:
    if mutant not in (None, *MUTANTS["indirect"]):
        raise ConfigError(f"unknown indirect mutant {mutant!r}", section="system")
    s = _setup(cfg, need_repo=True)
    policies = cfg.universe.names
    pgs = [indirect_ds_gateway(s.ds, s.pools[s.ds], s.values, s.dcs, policies),
           repository(s.repo)]
    for dc in s.dcs:
        peers = tuple(d for d in s.dcs if d != dc)
        pgs.append(indirect_dc_gateway(dc, s.pools[dc], peers, mutant,
                                       transfers and bool(peers)))
    system = compose(pgs, mode, policy_interpretation(cfg.universe, cfg.interpretation))
    ds, item, repo = s.ds, s.item, s.repo

    def m(st):
        val = system.value
        nu = {(ds, item): val(st, f"{ds}.data_in")}
        pi = {ds: {(ds, val(st, f"{ds}.policy_in"))} | val(st, f"{repo}.Pi")}
        rho = {}
        for dc in s.dcs:
            pi[dc] = {(dc, val(st, f"{dc}.policy_in"))} | val(st, f"{dc}.base")
            if system.location(st, dc) in ("s3", "s4"):
                nu[(dc, item)] = val(st, f"{dc}.i")
                rho[dc] = {(val(st, f"{dc}.src"), item, val(st, f"{dc}.p"))}
        return _state(cfg, nu, pi, rho)

    desc = (f"ν({ds},{item}) = {ds}.data_in; π({ds}) = {{({ds}, {ds}.policy_in)}} ∪ {repo}.Pi; "
            f"π(DC) = {{(DC, DC.policy_in)}} ∪ DC.base; "
            f"ρ(DC) = {{(DC.src, {item}, DC.p)}} once DC accepted a broadcast; "
            f"{ds}.Pi, locations and messages in transit are invisible")
    name = "indirect" + (f"[{mutant}]" if mutant else "")
    system.name = name
    return CaseStudy(name, system, abstract_ts(cfg), RefinementMapping(m, desc), cfg)
