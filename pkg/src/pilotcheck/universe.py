"""Named policy pools used by the semantics and the program graphs.

States refer to policies by name.  A universe resolves names to what the
semantics needs: datatype, subsumption, and which policies may receive a
transfer of data held under a given policy.  Two kinds exist:

* :class:`StructuralUniverse` holds full PILOT policies and decides
  subsumption by their definitions.
* :class:`AbstractUniverse` holds bare ids with an explicit preorder, which
  is all the checker needs in always-active mode and much cheaper.
"""
from __future__ import annotations

from typing import Mapping

from .conditions import DEFAULT_INTERPRETATION, Interpretation
from .errors import ModelError, OntologyMismatch
from .ontology import Ontology, closure
from .policy import BOTTOM, subsumes_policy, validate_policy

BOTTOM_NAME = "bottom"


class PolicyUniverse:
    mode = None

    def __init__(self, names):
        self.names = tuple(sorted(names))
        self._index = {n: k for k, n in enumerate(self.names)}

    def __contains__(self, name):
        return name in self._index

    def leq(self, a, b) -> bool:
        return (a, b) in self._leq

    def comparable(self, a, b) -> bool:
        return (a, b) in self._leq or (b, a) in self._leq

    def transfer_ok(self, q, p) -> bool:
        """Some transfer rule of ``p`` yields a policy that ``q`` subsumes."""
        return (q, p) in self._transfer

    def is_bottom(self, name) -> bool:
        return self.datatype(name) is None

    def relation(self):
        return frozenset(self._leq)


class StructuralUniverse(PolicyUniverse):
    mode = "structural"

    def __init__(self, policies: Mapping, onto: Ontology,
                 interp: Interpretation = DEFAULT_INTERPRETATION):
        super().__init__(policies)
        self.policies = dict(policies)
        self.onto = onto
        self.interp = interp
        for name, p in self.policies.items():
            validate_policy(p, onto, interp, name=name)
        names = self.names
        self._leq = {(a, b) for a in names for b in names
                     if subsumes_policy(self.policies[a], self.policies[b], onto)}
        self._transfer = {(q, p) for q in names for p in names
                          if self.transfer_rules_for(q, p)}
        rts = [0]
        for p in self.policies.values():
            if p is not BOTTOM:
                rts.append(p.retention)
                rts.extend(tr.dur.retention for tr in p.transfers)
        self.horizon = max(rts)

    def policy(self, name):
        return self.policies[name]

    def datatype(self, name):
        p = self.policies[name]
        return None if p is BOTTOM else p.datatype

    def transfer_rules_for(self, q, p):
        """Transfer rules ``tr`` of ``p`` with ``q ⊑ (p.t, tr, p.TR)``, in canonical order."""
        pp = self.policies[p]
        if pp is BOTTOM:
            return ()
        qq = self.policies[q]
        return tuple(tr for tr in sorted(pp.transfers, key=str)
                     if subsumes_policy(qq, pp.with_dcr(tr), self.onto))


class AbstractUniverse(PolicyUniverse):
    """Policies as ids with a declared datatype and an explicit preorder.

    ``order`` lists pairs ``(lo, hi)`` meaning ``lo ⊑ hi``; the reflexive
    transitive closure is taken.  ``transfers`` lists pairs ``(q, p)`` meaning
    a holder of data under ``p`` may transfer it to a device committing to
    ``q``; when omitted it defaults to the order itself.
    """

    mode = "abstract"

    def __init__(self, datatypes: Mapping, order=(), transfers=None):
        super().__init__(datatypes)
        self.datatypes = dict(datatypes)
        for a, b in order:
            for x in (a, b):
                if x not in self.datatypes:
                    raise ModelError(f"policy order mentions undeclared policy {x!r}",
                                     section="policy_order")
        bottoms = [n for n in self.names if self.datatypes[n] is None]
        edges = list(order) + [(b, n) for b in bottoms for n in self.names]
        self._leq = set(closure(self.names, edges))
        for b in bottoms:
            for n in self.names:
                if n != b and (n, b) in self._leq:
                    raise ModelError(f"{n!r} cannot be below the empty policy {b!r}",
                                     section="policy_order")
        if transfers is None:
            self._transfer = {(q, p) for (q, p) in self._leq
                              if self.datatypes[p] is not None}
        else:
            self._transfer = set()
            for q, p in transfers:
                if q not in self.datatypes or p not in self.datatypes:
                    raise ModelError(f"transfer pair ({q!r}, {p!r}) names an undeclared policy",
                                     section="policy_order")
                self._transfer.add((q, p))
        self.horizon = 0

    def datatype(self, name):
        return self.datatypes[name]

    @classmethod
    def from_structural(cls, su: StructuralUniverse) -> "AbstractUniverse":
        """Tabulate a structural universe: same names, same relations."""
        u = cls({n: su.datatype(n) for n in su.names})
        u._leq = set(su._leq)
        u._transfer = set(su._transfer)
        return u


def check_datatypes(universe: PolicyUniverse, onto: Ontology):
    for n in universe.names:
        t = universe.datatype(n)
        if t is not None and t not in onto.datatypes:
            raise OntologyMismatch(f"policy {n!r} has unknown datatype {t!r}")
