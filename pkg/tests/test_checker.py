import json
from collections import deque

import pytest

from conftest import three_policy_config
from pilotcheck import semantics
from pilotcheck.casestudies import RefinementMapping, build_direct_system
from pilotcheck.checker import (InvariantSpec, check_invariant, check_refinement, explore, pr1,
                                pr2, reachable, render_json, render_text, replay, simulate,
                                to_dot)
from pilotcheck.errors import BoundExceeded, MappingPartial
from pilotcheck.events import Send
from pilotcheck.semantics import ModelConfig, SystemState, abstract_ts


class Line:
    """0 → 1 → ... → n-1, with a deadlock at the end."""

    name = "line"

    def __init__(self, n):
        self.n = n

    def initial_states(self):
        return [0]

    def successors(self, s):
        return [("step", s + 1)] if s + 1 < self.n else []

    def describe(self, s):
        return {"x": s}


def test_single_deadlock_state():
    summ = explore(Line(1))
    assert (summ.states, summ.transitions, summ.depth) == (1, 0, 0)


def test_bound_exceeded_carries_counts():
    with pytest.raises(BoundExceeded) as info:
        explore(Line(50), bound=10)
    assert info.value.summary.states == 11
    assert info.value.summary.bound == 10


def test_false_invariant_fails_at_start(three_policy_cfg):
    ts = abstract_ts(three_policy_cfg)
    v = check_invariant(ts, InvariantSpec("never", lambda s: False))
    assert not v.passed and len(v.trace) == 0
    assert v.trace.states[0] in ts.initial_states()


def test_pr1_pr2_pass_on_three_policy_config(three_policy_cfg):
    ts = abstract_ts(three_policy_cfg)
    for make in (pr1, pr2):
        v = check_invariant(ts, make(three_policy_cfg))
        assert v.passed and v.exit_code == 0
        assert v.summary.states == 728


DEV = ("DC1", "DC2", "DS")


def test_pr1_examples(three_policy_cfg):
    inv = pr1(three_policy_cfg)
    assert inv(SystemState.make(DEV))
    ok = SystemState.make(DEV, pi={"DS": {("DS", "p2")}}, rho={"DC1": {("DS", "i", "p1")}})
    assert inv(ok)
    bad = SystemState.make(DEV, pi={"DS": {("DS", "p2")}}, rho={"DC1": {("DS", "i", "p3")}})
    assert not inv(bad)


def test_pr1_bottom_subject_policy_covers_every_type(three_policy_cfg):
    cfg = three_policy_config(ds_pool=("bottom",))
    st_ = SystemState.make(DEV, pi={"DS": {("DS", "bottom")}}, rho={"DC1": {("DS", "i", "p1")}})
    assert not pr1(cfg)(st_)


def test_pr2_examples(three_policy_cfg):
    inv = pr2(three_policy_cfg)
    assert inv(SystemState.make(DEV))
    ok = SystemState.make(DEV, pi={"DS": {("DC1", "p1")}}, rho={"DC1": {("DS", "i", "p1")}})
    assert inv(ok)
    bad = SystemState.make(DEV, pi={"DS": {("DS", "p1")}}, rho={"DC1": {("DS", "i", "p1")}})
    assert not inv(bad)
    relayed = SystemState.make(DEV, rho={"DC2": {("DC1", "i", "p1")}})
    assert inv(relayed)


def _send_without_subsumption(st, sndr, rcv, item, cfg, p_rcv=None):
    onto = cfg.ontology
    if sndr == rcv or onto.owner(item) != sndr or onto.role(rcv) != "dc":
        return []
    if st.value(sndr, item) is semantics.UNDEFINED:
        return []
    ev = Send(sndr, rcv, item)
    return [q for (d, q) in sorted(st.policies(sndr)) if d == rcv and cfg.active(q, ev, st)]


@pytest.fixture
def mutant_semantics(monkeypatch):
    monkeypatch.setattr(semantics, "send_candidates", _send_without_subsumption)


def test_pr1_catches_missing_send_premise(three_policy_cfg, mutant_semantics):
    ts = abstract_ts(three_policy_cfg)
    v = check_invariant(ts, pr1(three_policy_cfg))
    assert not v.passed
    assert replay(ts, v.trace)
    last = v.trace.states[-1]
    p_ds = [p for (d, p) in last.policies("DS") if d == "DS"][0]
    assert any(not three_policy_cfg.universe.leq(p, p_ds)
               for dc in ("DC1", "DC2") for (_, _, p) in last.received(dc))


def test_counterexample_is_shortest(three_policy_cfg, mutant_semantics):
    ts = abstract_ts(three_policy_cfg)
    inv = pr1(three_policy_cfg)
    v = check_invariant(ts, inv)
    # independent breadth-first distances
    dist = {s: 0 for s in ts.initial_states()}
    queue = deque(dist)
    while queue:
        s = queue.popleft()
        for _, t in ts.successors(s):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    assert len(v.trace) == min(d for s, d in dist.items() if not inv(s))


def test_identity_refinement(three_policy_cfg):
    ts = abstract_ts(three_policy_cfg)
    v = check_refinement(ts, ts, lambda s: s)
    assert v.passed and v.summary.states == 728


def test_refinement_fails_on_bad_initial_state(three_policy_cfg):
    ts = abstract_ts(three_policy_cfg)
    wrong = lambda s: SystemState.make(DEV, pi={"DS": {("DS", "p9")}})  # noqa: E731
    v = check_refinement(ts, ts, wrong)
    assert not v.passed and len(v.trace) == 0


def test_mapping_partial(three_policy_cfg):
    cs = build_direct_system(three_policy_cfg)
    broken = RefinementMapping(lambda s: s.locations[99])
    with pytest.raises(MappingPartial):
        check_refinement(cs.system, cs.spec, broken)


def test_direct_mutant_refinement_trace(three_policy_cfg):
    cs = build_direct_system(three_policy_cfg, mutant="ds_guard")
    v = check_refinement(cs.system, cs.spec, cs.mapping)
    assert not v.passed
    assert replay(cs.system, v.trace)
    assert v.abstract[-1] == cs.mapping(v.trace.states[-1])
    assert v.abstract[-2].untimed() != v.abstract[-1].untimed()


def test_replay_rejects_tampering(three_policy_cfg, mutant_semantics):
    ts = abstract_ts(three_policy_cfg)
    v = check_invariant(ts, pr1(three_policy_cfg))
    v.trace.labels[-1] = v.trace.labels[0]
    with pytest.raises(AssertionError):
        replay(ts, v.trace)


def test_reports_are_deterministic(three_policy_cfg):
    cs = build_direct_system(three_policy_cfg, mutant="ds_guard")
    a = render_text(check_refinement(cs.system, cs.spec, cs.mapping), cs.system)
    cs2 = build_direct_system(three_policy_config(), mutant="ds_guard")
    b = render_text(check_refinement(cs2.system, cs2.spec, cs2.mapping), cs2.system)
    assert a == b
    assert "clock is not compared" in a
    doc = json.loads(render_json(check_refinement(cs.system, cs.spec, cs.mapping), cs.system))
    assert doc["result"] == "fail"
    assert len(doc["trace"]["states"]) == len(doc["trace"]["labels"]) + 1


def test_simulate_is_a_valid_run(three_policy_cfg):
    cs = build_direct_system(three_policy_cfg)
    t = simulate(cs.system, 30, seed=7)
    assert replay(cs.system, t)
    assert simulate(cs.system, 30, seed=7) == t


def test_dot_export():
    text = to_dot(Line(3))
    assert text.startswith("digraph")
    assert text.count("->") == 2


def test_reachable_in_bfs_order():
    assert reachable(Line(4)) == [0, 1, 2, 3]


def test_pr1_notes_overlapping_owner_policies():
    cfg = three_policy_config()
    assert pr1(cfg).notes == ()
    overlap = ModelConfig(cfg.ontology, cfg.universe,
                          dict(cfg.initial_policies, DS=[("p1", "p3")]), cfg.initial_values)
    v = check_invariant(abstract_ts(overlap), pr1(overlap))
    assert any("DS may hold several" in n for n in v.notes)
