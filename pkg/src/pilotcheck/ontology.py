"""Finite universes, their partial orders and the maps between them.

Everything policy subsumption needs to know about the world lives here:
entities, datatypes and purposes (each with an order), devices with their
entity and role, and data items with their datatype and owner device.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import CycleError, DanglingReference, ParseError, UnknownElement

DEVICE_ROLES = ("ds", "dc", "repository")


class _Undefined:
    """The undefined value. Distinct from every constant."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()


def canon_key(value):
    """Total sort key over every value that can appear in a state.

    Python refuses to order ``1 < "a"``; states mix ints, strings, tuples,
    frozensets and UNDEFINED, and exploration order must not depend on hash
    seeds, so everything is ordered through this key.
    """
    if value is UNDEFINED:
        return (0,)
    if isinstance(value, bool):
        return (1, int(value))
    if isinstance(value, int):
        return (2, value)
    if isinstance(value, str):
        return (3, value)
    if isinstance(value, tuple):
        return (4, tuple(canon_key(v) for v in value))
    if isinstance(value, frozenset):
        return (5, tuple(sorted(canon_key(v) for v in value)))
    return (6, repr(value))


def closure(elements, edges):
    """Reflexive-transitive closure of ``edges`` over ``elements`` (Warshall)."""
    elements = list(elements)
    above = {a: {a} for a in elements}
    for a, b in edges:
        above[a].add(b)
    for k in elements:
        for i in elements:
            if k in above[i]:
                above[i] |= above[k]
    return frozenset((a, b) for a in elements for b in above[a])


@dataclass(frozen=True)
class PartialOrder:
    """A finite partial order stored fully closed."""

    elements: frozenset
    pairs: frozenset

    @classmethod
    def from_edges(cls, elements: Iterable[str], edges: Iterable[tuple] = (), name="order"):
        elements = frozenset(elements)
        edges = [tuple(e) for e in edges]
        for a, b in edges:
            for x in (a, b):
                if x not in elements:
                    raise DanglingReference(f"{name}: edge mentions undeclared element {x!r}")
        pairs = closure(sorted(elements), edges)
        for a, b in pairs:
            if a != b and (b, a) in pairs:
                raise CycleError(f"{name}: {a!r} and {b!r} are ordered both ways")
        return cls(elements, pairs)

    def leq(self, a, b) -> bool:
        if a not in self.elements:
            raise UnknownElement(f"{a!r} is not an element of this order")
        if b not in self.elements:
            raise UnknownElement(f"{b!r} is not an element of this order")
        return (a, b) in self.pairs

    def __contains__(self, x):
        return x in self.elements


def leq(order: PartialOrder, a, b) -> bool:
    return order.leq(a, b)


@dataclass(frozen=True)
class Ontology:
    entities: PartialOrder
    datatypes: PartialOrder
    purposes: PartialOrder
    devices: tuple = ()
    entity_of: Mapping = field(default_factory=dict)
    role_of: Mapping = field(default_factory=dict)
    items: tuple = ()
    type_of: Mapping = field(default_factory=dict)
    owner_of: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for d in self.devices:
            if d not in self.entity_of:
                raise DanglingReference(f"device {d!r} has no entity", section="devices")
            if self.entity_of[d] not in self.entities:
                raise DanglingReference(
                    f"device {d!r} maps to undeclared entity {self.entity_of[d]!r}",
                    section="devices")
            if self.role_of.get(d, "dc") not in DEVICE_ROLES:
                raise ParseError(f"device {d!r} has unknown role {self.role_of[d]!r}",
                                 section="devices")
        for i in self.items:
            if i not in self.type_of or self.type_of[i] not in self.datatypes:
                raise DanglingReference(f"item {i!r} has no declared datatype", section="items")
            if i not in self.owner_of or self.owner_of[i] not in self.devices:
                raise DanglingReference(f"item {i!r} has no declared owner device",
                                        section="items")

    # per-device and per-item lookups
    def entity(self, device):
        return self.entity_of[device]

    def type(self, item):
        return self.type_of[item]

    def owner(self, item):
        return self.owner_of[item]

    def role(self, device):
        return self.role_of.get(device, "dc")

    def devices_with_role(self, role):
        return tuple(d for d in self.devices if self.role(d) == role)

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        return self is other


def _order_section(doc, key):
    sec = doc.get(key, {})
    if isinstance(sec, list):
        return sec, []
    if not isinstance(sec, dict):
        raise ParseError(f"'{key}' must be an object with 'elements' and 'order'",
                         section="ontology")
    return sec.get("elements", []), sec.get("order", [])


def load_ontology(doc: Mapping, devices: Mapping | None = None,
                  items: Mapping | None = None) -> Ontology:
    """Build an :class:`Ontology` from the plain-data sections of a model document.

    ``doc`` is the ``ontology`` section::

        {"entities":  {"elements": [...], "order": [[lo, hi], ...]},
         "datatypes": {...}, "purposes": {...}}

    ``devices`` maps device name to ``{"entity": e, "role": "ds"|"dc"|"repository"}``
    and ``items`` maps item name to ``{"type": t, "owner": d}``.
    """
    if not isinstance(doc, Mapping):
        raise ParseError("ontology section must be an object", section="ontology")
    orders = {}
    for key in ("entities", "datatypes", "purposes"):
        elements, edges = _order_section(doc, key)
        try:
            orders[key] = PartialOrder.from_edges(elements, edges, name=key)
        except (CycleError, DanglingReference) as e:
            raise type(e)(e.message, section="ontology") from None
        except (TypeError, ValueError):
            raise ParseError(f"'{key}' order edges must be pairs", section="ontology") from None

    devices = devices or {}
    items = items or {}
    entity_of, role_of, type_of, owner_of = {}, {}, {}, {}
    for d, spec in devices.items():
        if not isinstance(spec, Mapping) or "entity" not in spec:
            raise ParseError(f"device {d!r} needs an 'entity'", section="devices")
        entity_of[d] = spec["entity"]
        role_of[d] = spec.get("role", "dc")
    for i, spec in items.items():
        if not isinstance(spec, Mapping) or "type" not in spec or "owner" not in spec:
            raise ParseError(f"item {i!r} needs 'type' and 'owner'", section="items")
        type_of[i] = spec["type"]
        owner_of[i] = spec["owner"]
    return Ontology(
        entities=orders["entities"],
        datatypes=orders["datatypes"],
        purposes=orders["purposes"],
        devices=tuple(sorted(devices)),
        entity_of=entity_of,
        role_of=role_of,
        items=tuple(sorted(items)),
        type_of=type_of,
        owner_of=owner_of,
    )
