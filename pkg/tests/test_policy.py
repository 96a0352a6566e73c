import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import to_pilot
from oracles import policy_leq, small_universe
from pilotcheck.conditions import FF, TT, Pred, Ref, Const
from pilotcheck.errors import (OntologyMismatch, ParseError, TransferNotInPolicy, UnknownEntity,
                               UnknownPurpose)
from pilotcheck.events import Send, Transfer
from pilotcheck.ontology import load_ontology
from pilotcheck.policy import (BOTTOM, DataCommunicationRule as DCR, DataUsageRule as DUR,
                               PilotPolicy, active_policy, active_transfer, comparable,
                               dump_policy, parse_policy, subsumes_dcr, subsumes_dur,
                               subsumes_policy)
from pilotcheck.semantics import SystemState


@pytest.fixture(scope="module")
def onto():
    return load_ontology(
        {"entities": {"elements": ["Google", "Alphabet", "Other"],
                      "order": [["Google", "Alphabet"]]},
         "datatypes": {"elements": ["city", "address"], "order": [["city", "address"]]},
         "purposes": {"elements": ["research", "newsletter", "advertisement"],
                      "order": [["newsletter", "advertisement"]]}},
        devices={"DS": {"entity": "Other", "role": "ds"}, "G": {"entity": "Google"},
                 "A": {"entity": "Alphabet"}},
        items={"home": {"type": "city", "owner": "DS"}, "age": {"type": "address", "owner": "DS"}})


def dur(ps, rt):
    return DUR(frozenset(ps), rt)


def test_dur_examples(onto):
    assert subsumes_dur(dur([], 0), dur(["research"], 5), onto)
    assert subsumes_dur(dur([], 0), dur([], 0), onto)
    d = dur(["newsletter"], 3)
    assert subsumes_dur(d, d, onto)
    assert not subsumes_dur(dur(["research"], 100), dur(["research"], 50), onto)
    assert subsumes_dur(dur(["newsletter"], 1), dur(["advertisement"], 1), onto)
    assert not subsumes_dur(dur(["advertisement"], 1), dur(["newsletter"], 1), onto)


def test_dur_unknown_purpose(onto):
    with pytest.raises(UnknownPurpose):
        subsumes_dur(dur(["gaming"], 1), dur([], 1), onto)


def test_dcr_examples(onto):
    d = dur(["research"], 5)
    assert subsumes_dcr(DCR(TT, "Google", d), DCR(FF, "Alphabet", d), onto)
    c = DCR(TT, "Google", d)
    assert subsumes_dcr(c, c, onto)
    assert not subsumes_dcr(DCR(TT, "Alphabet", d), DCR(TT, "Google", d), onto)


def test_dcr_unknown_entity(onto):
    with pytest.raises(UnknownEntity):
        subsumes_dcr(DCR(TT, "Nobody", dur([], 0)), DCR(TT, "Google", dur([], 0)), onto)


def test_policy_unknown_datatype(onto):
    p = PilotPolicy("city", DCR(TT, "Google", dur([], 0)))
    with pytest.raises(OntologyMismatch):
        subsumes_policy(p, PilotPolicy("shoe", DCR(TT, "Google", dur([], 0))), onto)


def test_bottom(onto):
    p = PilotPolicy("city", DCR(TT, "Google", dur([], 0)))
    assert subsumes_policy(BOTTOM, p, onto)
    assert not subsumes_policy(p, BOTTOM, onto)
    assert subsumes_policy(BOTTOM, BOTTOM, onto)
    assert comparable(BOTTOM, p, onto)


def test_subsumption_not_antisymmetric(onto):
    # two syntactically different policies that subsume each other
    a = PilotPolicy("city", DCR(TT, "Google", dur(["research"], 5)))
    b = PilotPolicy("city", DCR(FF, "Google", dur(["research"], 5)))
    assert a != b
    assert subsumes_policy(a, b, onto) and subsumes_policy(b, a, onto)


def test_cookie_banner_examples(cookie_banner):
    u = cookie_banner.universe
    assert u.leq("option2", "option3")
    assert not u.leq("option3", "option2")
    assert u.leq("option4", "option3")
    assert u.leq("option1", "option2")
    assert u.comparable("option2", "option3")
    assert not u.comparable("option2", "option4")


def test_parse_dump_round_trip(cookie_banner):
    for name, p in cookie_banner.universe.policies.items():
        assert parse_policy(dump_policy(p)) == p


def test_parse_policy_rejects():
    with pytest.raises(ParseError):
        parse_policy({"datatype": "t"})
    with pytest.raises(ParseError):
        parse_policy({"datatype": "t", "dcr": {"entity": "e",
                                               "dur": {"purposes": [], "retention": -1}}})


# -- activity

def state(nu=None, clock=0):
    return SystemState.make(["DS", "G", "A"], nu=nu or {}, clock=clock)


def test_active_policy_examples(onto):
    p = PilotPolicy("address", DCR(TT, "Alphabet", dur([], 10)))
    ev = Send("DS", "G", "home")
    assert active_policy(p, ev, state(clock=0), onto)
    assert not active_policy(p, ev, state(clock=10), onto)
    q = PilotPolicy("address", DCR(TT, "Google", dur([], 10)))
    assert not active_policy(q, Send("DS", "A", "home"), state(), onto)
    assert not active_policy(BOTTOM, ev, state(), onto)


def test_active_policy_type_and_condition(onto):
    cond = Pred("≥", Ref("age"), Const(18))
    p = PilotPolicy("city", DCR(cond, "Alphabet", dur([], 10)))
    # type(age) = address is not below city
    assert not active_policy(p, Send("DS", "G", "age"), state({("DS", "age"): 30}), onto)
    ev = Send("DS", "G", "home")
    assert not active_policy(p, ev, state(), onto)                    # age undefined
    assert not active_policy(p, ev, state({("DS", "age"): 12}), onto)
    assert active_policy(p, ev, state({("DS", "age"): 30}), onto)


def test_active_transfer_examples(onto):
    tr = DCR(TT, "Alphabet", dur([], 5))
    p = PilotPolicy("address", DCR(TT, "Alphabet", dur([], 3)), {tr})
    ev = Transfer("G", "A", "home")
    assert active_transfer(tr, p, ev, state(clock=2), onto)
    # the holder's own retention has expired although tr's has not
    assert not active_transfer(tr, p, ev, state(clock=3), onto)
    off = DCR(FF, "Alphabet", dur([], 5))
    p2 = PilotPolicy("address", DCR(TT, "Alphabet", dur([], 3)), {off})
    assert not active_transfer(off, p2, ev, state(), onto)
    with pytest.raises(TransferNotInPolicy):
        active_transfer(off, p, ev, state(), onto)


# -- properties over the enumerated universe

POLS, T, E, P = small_universe()
ONTO = load_ontology(
    {"entities": {"elements": ["e0", "e1"], "order": [["e0", "e1"]]},
     "datatypes": {"elements": ["t0", "t1"], "order": [["t0", "t1"]]},
     "purposes": {"elements": ["q0", "q1"], "order": [["q0", "q1"]]}},
    devices={"s": {"entity": "e0", "role": "ds"}, "r0": {"entity": "e0"},
             "r1": {"entity": "e1"}},
    items={"x0": {"type": "t0", "owner": "s"}, "x1": {"type": "t1", "owner": "s"}})
PILOTS = [to_pilot(p) for p in POLS]
index = st.integers(0, len(POLS) - 1)


def test_universe_size():
    assert len(POLS) == 313


@settings(max_examples=1500, deadline=None)
@given(index, index, index)
def test_preorder(a, b, c):
    x, y, z = PILOTS[a], PILOTS[b], PILOTS[c]
    assert subsumes_policy(x, x, ONTO)
    if subsumes_policy(x, y, ONTO) and subsumes_policy(y, z, ONTO):
        assert subsumes_policy(x, z, ONTO)


@settings(max_examples=1500, deadline=None)
@given(index, index)
def test_matches_oracle_on_samples(a, b):
    assert subsumes_policy(PILOTS[a], PILOTS[b], ONTO) == policy_leq(POLS[a], POLS[b], T, E, P)


purpose_sets = st.frozensets(st.sampled_from(["q0", "q1"]))


@settings(max_examples=1500, deadline=None)
@given(purpose_sets, st.integers(0, 3), purpose_sets, st.integers(0, 3), st.data())
def test_dur_monotone(p1, rt1, p2, rt2, data):
    if not subsumes_dur(DUR(p1, rt1), DUR(p2, rt2), ONTO):
        return
    smaller = data.draw(st.frozensets(st.sampled_from(sorted(p1))) if p1 else st.just(p1))
    lower = data.draw(st.integers(0, rt1))
    assert subsumes_dur(DUR(smaller, rt1), DUR(p2, rt2), ONTO)
    assert subsumes_dur(DUR(p1, lower), DUR(p2, rt2), ONTO)


@settings(max_examples=1500, deadline=None)
@given(index, st.sampled_from(["x0", "x1"]), st.sampled_from(["r0", "r1"]),
       st.integers(0, 4))
def test_expired_retention_never_active(a, item, rcv, clock):
    p = PILOTS[a]
    st_ = SystemState.make(ONTO.devices, nu={("s", item): 1}, clock=clock)
    ev = Send("s", rcv, item)
    if p is BOTTOM or clock >= p.retention:
        assert not active_policy(p, ev, st_, ONTO)
    else:
        expected = ((ONTO.type(item), p.t) in ONTO.datatypes.pairs
                    and (ONTO.entity(rcv), p.dcr.entity) in ONTO.entities.pairs)
        assert active_policy(p, ev, st_, ONTO) == expected
