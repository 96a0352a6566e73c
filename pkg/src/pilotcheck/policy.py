"""PILOT policies, subsumption, and the activity predicates.

A policy is a triple (datatype, data communication rule, transfer rules), or
the empty policy ``BOTTOM``.  ``p ⊑ q`` reads "p is at least as restrictive
as q".  Subsumption is a preorder, not a partial order: two syntactically
different policies can subsume each other.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .conditions import (TT, DEFAULT_INTERPRETATION, Interpretation, dump_condition,
                         eval_condition, parse_condition)
from .errors import (OntologyMismatch, ParseError, TransferNotInPolicy, UnknownEntity,
                     UnknownPurpose)
from .events import Request
from .ontology import Ontology


@dataclass(frozen=True)
class DataUsageRule:
    purposes: frozenset
    retention: int

    def __post_init__(self):
        object.__setattr__(self, "purposes", frozenset(self.purposes))

    def __str__(self):
        return f"⟨{{{', '.join(sorted(self.purposes))}}}, {self.retention}⟩"


@dataclass(frozen=True)
class DataCommunicationRule:
    condition: object
    entity: str
    dur: DataUsageRule

    def __str__(self):
        return f"⟨{self.condition}, {self.entity}, {self.dur}⟩"


@dataclass(frozen=True)
class PilotPolicy:
    datatype: str
    dcr: DataCommunicationRule
    transfers: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "transfers", frozenset(self.transfers))

    # accessors as written in the semantics: p.t, p.dcr, p.TR
    @property
    def t(self):
        return self.datatype

    @property
    def TR(self):
        return self.transfers

    @property
    def retention(self):
        return self.dcr.dur.retention

    def with_dcr(self, dcr):
        """The policy (p.t, dcr, p.TR): used to check a transfer rule."""
        return PilotPolicy(self.datatype, dcr, self.transfers)

    def __str__(self):
        trs = ", ".join(sorted(str(tr) for tr in self.transfers))
        return f"({self.datatype}, {self.dcr}, {{{trs}}})"


class _Bottom:
    """The empty policy: nothing beyond necessary processing is allowed."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    __str__ = lambda self: "⊥"  # noqa: E731

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


# -- subsumption --------------------------------------------------------------

def _check_purposes(onto, purposes):
    for p in purposes:
        if p not in onto.purposes:
            raise UnknownPurpose(f"unknown purpose {p!r}")


def subsumes_dur(d1: DataUsageRule, d2: DataUsageRule, onto: Ontology) -> bool:
    _check_purposes(onto, d1.purposes)
    _check_purposes(onto, d2.purposes)
    if d1.retention > d2.retention:
        return False
    pairs = onto.purposes.pairs
    return all(any((p1, p2) in pairs for p2 in d2.purposes) for p1 in d1.purposes)


def subsumes_dcr(c1: DataCommunicationRule, c2: DataCommunicationRule, onto: Ontology) -> bool:
    # conditions are deliberately not compared
    for e in (c1.entity, c2.entity):
        if e not in onto.entities:
            raise UnknownEntity(f"unknown entity {e!r}")
    return (c1.entity, c2.entity) in onto.entities.pairs and subsumes_dur(c1.dur, c2.dur, onto)


def subsumes_policy(p1, p2, onto: Ontology) -> bool:
    """``p1 ⊑ p2``.  BOTTOM is below everything and above only itself."""
    if p1 is BOTTOM:
        return True
    if p2 is BOTTOM:
        return False
    if p1.datatype not in onto.datatypes or p2.datatype not in onto.datatypes:
        raise OntologyMismatch(
            f"datatype {p1.datatype!r} or {p2.datatype!r} not in the ontology")
    if (p1.datatype, p2.datatype) not in onto.datatypes.pairs:
        return False
    if not subsumes_dcr(p1.dcr, p2.dcr, onto):
        return False
    return all(any(subsumes_dcr(tr1, tr2, onto) for tr2 in p2.transfers)
               for tr1 in p1.transfers)


def comparable(p, q, onto: Ontology) -> bool:
    return subsumes_policy(p, q, onto) or subsumes_policy(q, p, onto)


# -- activity -----------------------------------------------------------------

def _event_item(event):
    if isinstance(event, Request):
        raise TypeError("activity is only defined for send and transfer events")
    return event.item


def _clock(st):
    return getattr(st, "clock", 0)


def active_policy(p, event, st, onto: Ontology,
                  interp: Interpretation = DEFAULT_INTERPRETATION) -> bool:
    """Whether ``p`` licenses ``event`` (a Send or Transfer) in state ``st``.

    The condition must evaluate to exactly True at the sender; UNDEFINED blocks.
    BOTTOM is never active.
    """
    if p is BOTTOM:
        return False
    item = _event_item(event)
    if (onto.type(item), p.datatype) not in onto.datatypes.pairs:
        return False
    if eval_condition(st, event.sndr, p.dcr.condition, interp) is not True:
        return False
    if not _clock(st) < p.retention:
        return False
    return (onto.entity(event.rcv), p.dcr.entity) in onto.entities.pairs


def active_transfer(tr, p, event, st, onto: Ontology,
                    interp: Interpretation = DEFAULT_INTERPRETATION) -> bool:
    if p is BOTTOM or tr not in p.transfers:
        raise TransferNotInPolicy(f"{tr} is not a transfer rule of {p}")
    _event_item(event)
    now = _clock(st)
    if not now < p.retention:
        return False
    if eval_condition(st, event.sndr, tr.condition, interp) is not True:
        return False
    if not now < tr.dur.retention:
        return False
    return (onto.entity(event.rcv), tr.entity) in onto.entities.pairs


# -- plain-data form ----------------------------------------------------------

def parse_dur(doc) -> DataUsageRule:
    try:
        rt = doc["retention"]
        purposes = doc.get("purposes", [])
    except (TypeError, KeyError):
        raise ParseError(f"data usage rule needs 'purposes' and 'retention': {doc!r}",
                         section="policies") from None
    if not isinstance(rt, int) or isinstance(rt, bool) or rt < 0:
        raise ParseError(f"retention must be a natural number, got {rt!r}",
                         section="policies")
    return DataUsageRule(frozenset(purposes), rt)


def parse_dcr(doc) -> DataCommunicationRule:
    if not isinstance(doc, Mapping) or "entity" not in doc or "dur" not in doc:
        raise ParseError(f"data communication rule needs 'entity' and 'dur': {doc!r}",
                         section="policies")
    cond = parse_condition(doc.get("condition", "tt"))
    return DataCommunicationRule(cond, doc["entity"], parse_dur(doc["dur"]))


def parse_policy(doc):
    if doc == "bottom" or doc is None:
        return BOTTOM
    if not isinstance(doc, Mapping) or "datatype" not in doc or "dcr" not in doc:
        raise ParseError(f"policy needs 'datatype' and 'dcr': {doc!r}", section="policies")
    return PilotPolicy(doc["datatype"], parse_dcr(doc["dcr"]),
                       frozenset(parse_dcr(t) for t in doc.get("transfers", [])))


def dump_policy(p):
    if p is BOTTOM:
        return "bottom"

    def dcr(c):
        out = {"entity": c.entity,
               "dur": {"purposes": sorted(c.dur.purposes), "retention": c.dur.retention}}
        if c.condition != TT:
            out["condition"] = dump_condition(c.condition)
        return out

    return {"datatype": p.datatype, "dcr": dcr(p.dcr),
            "transfers": sorted((dcr(t) for t in p.transfers), key=repr)}


def validate_policy(p, onto: Ontology, interp: Interpretation, name="policy"):
    """Check every name in ``p`` against the ontology and the symbol registry."""
    if p is BOTTOM:
        return
    if p.datatype not in onto.datatypes:
        raise OntologyMismatch(f"{name}: unknown datatype {p.datatype!r}")
    for c in (p.dcr, *p.transfers):
        if c.entity not in onto.entities:
            raise UnknownEntity(f"{name}: unknown entity {c.entity!r}")
        _check_purposes(onto, c.dur.purposes)
        interp.check(c.condition)
