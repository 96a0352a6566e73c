import pytest

from conftest import three_policy_config
from pilotcheck.casestudies import build_direct_system, build_indirect_system
from pilotcheck.checker import (check_invariant, check_refinement, pr1, pr2, reachable, replay)
from pilotcheck.errors import ConfigError
from pilotcheck.semantics import ModelConfig


def mapped_states(cs):
    return {cs.mapping(s).untimed() for s in reachable(cs.system)}


def test_direct_holders_follow_ds_policy(three_policy_cfg):
    cs = build_direct_system(three_policy_cfg)
    u = three_policy_cfg.universe
    held = 0
    for s in reachable(cs.system):
        p_ds = cs.system.value(s, "DS.policy_in")
        for dc in ("DC1", "DC2"):
            for (_, _, p) in cs.mapping(s).received(dc):
                held += 1
                assert u.leq(p, p_ds)
    assert held > 0


def test_direct_bottom_subject_never_sends():
    cfg = three_policy_config(ds_pool=("bottom",))
    cs = build_direct_system(cfg)
    for s in reachable(cs.system):
        assert cs.system.location(s, "DC1") in ("s0", "s1", "s2")
        assert cs.system.location(s, "DC2") in ("s0", "s1", "s2")


def test_direct_mutant_violates_pr1(three_policy_cfg):
    cs = build_direct_system(three_policy_cfg, mutant="ds_guard")
    v = check_invariant(cs.system, pr1(three_policy_cfg).through(cs.mapping))
    assert not v.passed
    assert replay(cs.system, v.trace)
    last = cs.mapping(v.trace.states[-1])
    p_ds = cs.system.value(v.trace.states[-1], "DS.policy_in")
    bad = [(s, p) for dc in ("DC1", "DC2") for (s, _, p) in last.received(dc)
           if not three_policy_cfg.universe.leq(p, p_ds)]
    assert bad and bad[0][0] == "DS"


def test_indirect_repository_grows_and_acceptance_is_safe(three_policy_cfg_repo):
    cs = build_indirect_system(three_policy_cfg_repo)
    ts, u = cs.system, three_policy_cfg_repo.universe
    for s in reachable(ts):
        for label, t in ts.successors(s):
            assert ts.value(s, "Repo.Pi") <= ts.value(t, "Repo.Pi")
            if label.kind == "recv" and label.name == "broadcast":
                dc = label.components[0]
                if ts.location(t, dc) == "s3":
                    _, _, to, p = label.values
                    assert to == dc
                    assert u.leq(p, ts.value(t, f"{dc}.p_DC"))
                    assert u.leq(p, ts.value(t, "DS.p_DS"))


def test_indirect_broadcast_needs_uploaded_policy(three_policy_cfg_repo):
    ts = build_indirect_system(three_policy_cfg_repo).system
    for s in reachable(ts):
        for label, _ in ts.successors(s):
            if label.kind == "send" and label.name == "broadcast":
                assert ts.value(s, "DS.Pi")
                assert ts.value(s, "Repo.Pi")


def test_indirect_misaddressed_broadcast_is_dropped(three_policy_cfg_repo):
    ts = build_indirect_system(three_policy_cfg_repo).system
    u = three_policy_cfg_repo.universe
    seen = 0
    for s in reachable(ts):
        for label, t in ts.successors(s):
            if label.kind == "recv" and label.name == "broadcast" and label.components == ("DC2",):
                _, _, to, p = label.values
                if to == "DC1" and not u.leq(p, ts.value(s, "DC2.p_DC")):
                    seen += 1
                    assert ts.location(t, "DC2") == "s2"
                    assert all(ts.value(t, f"DC2.{v}") == ts.value(s, f"DC2.{v}")
                               for v in ("src", "i", "to", "p"))
    assert seen > 0


def test_indirect_with_transfers_still_refines(three_policy_cfg_repo):
    cs = build_indirect_system(three_policy_cfg_repo, transfers=True)
    assert check_refinement(cs.system, cs.spec, cs.mapping).passed


def test_sync_and_async_agree_indirect(three_policy_cfg_repo):
    sync = build_indirect_system(three_policy_cfg_repo, mode="sync")
    asyn = build_indirect_system(three_policy_cfg_repo, mode="async")
    assert mapped_states(sync) == mapped_states(asyn)


def test_sync_direct_is_contained_in_async(three_policy_cfg):
    # The subject gateway serves one request at a time.  With joint steps the
    # data reaches the controller before the next request is taken; with
    # buffered messages the next request can overtake the data in transit.
    sync = build_direct_system(three_policy_cfg, mode="sync")
    asyn = build_direct_system(three_policy_cfg, mode="async")
    sync_states = mapped_states(sync)
    assert sync_states < mapped_states(asyn)
    for s in reachable(asyn.system):
        if asyn.mapping(s).untimed() not in sync_states:
            assert any(name == "send" for name, _ in s.msgs)


@pytest.mark.parametrize("build,cfg_fn", [
    (build_direct_system, lambda: three_policy_config()),
    (build_indirect_system, lambda: three_policy_config(repo=True)),
])
def test_refinement_carries_invariants(build, cfg_fn):
    cfg = cfg_fn()
    cs = build(cfg)
    assert check_refinement(cs.system, cs.spec, cs.mapping).passed
    for make in (pr1, pr2):
        assert check_invariant(cs.spec, make(cfg)).passed
        assert check_invariant(cs.system, make(cfg).through(cs.mapping)).passed


def test_builder_config_errors():
    cfg = three_policy_config()
    with pytest.raises(ConfigError):
        build_indirect_system(cfg)                      # no repository
    with pytest.raises(ConfigError):
        build_direct_system(cfg, mutant="nope")
    multi = ModelConfig(cfg.ontology, cfg.universe,
                        {**cfg.initial_policies, "DS": [("p1", "p2")]}, cfg.initial_values)
    with pytest.raises(ConfigError):
        build_direct_system(multi)
    novalue = ModelConfig(cfg.ontology, cfg.universe, cfg.initial_policies, {})
    with pytest.raises(ConfigError):
        build_direct_system(novalue)
