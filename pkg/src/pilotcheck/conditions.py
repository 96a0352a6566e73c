"""The condition language and its three-valued evaluator.

Terms are item/variable references, constants, or function applications.
Conditions are binary predicates over terms, negation, conjunction, and the
two constants ``TT``/``FF``.  Evaluation returns ``True``, ``False`` or
``UNDEFINED``; an undefined operand makes every enclosing predicate and
connective undefined.

Conditions have a plain-data form used in model documents::

    "tt" | "ff" | ["not", c] | ["and", c1, c2, ...] | [pred, t1, t2]
    term := {"ref": name} | {"fn": name, "args": [t, ...]} | int | str
"""
from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import ArityMismatch, ParseError, UnknownSymbol
from .ontology import UNDEFINED


# -- terms --------------------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    """Reference to a data item (policy conditions) or a variable (PG guards)."""
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: object

    def __str__(self):
        return repr(self.value) if isinstance(self.value, str) else str(self.value)


@dataclass(frozen=True)
class Apply:
    fn: str
    args: tuple = ()

    def __str__(self):
        return f"{self.fn}({', '.join(map(str, self.args))})"


# -- conditions ---------------------------------------------------------------

@dataclass(frozen=True)
class _Truth:
    value: bool

    def __str__(self):
        return "tt" if self.value else "ff"


TT = _Truth(True)
FF = _Truth(False)


@dataclass(frozen=True)
class Pred:
    pred: str
    left: object
    right: object

    def __str__(self):
        return f"{self.left} {self.pred} {self.right}"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return f"¬({self.arg})"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        return " ∧ ".join(f"({a})" for a in self.args)


def conj(*conds):
    conds = tuple(c for c in conds if c != TT)
    if not conds:
        return TT
    if len(conds) == 1:
        return conds[0]
    return And(conds)


def refs(node):
    """Names referenced anywhere inside a term or condition."""
    if isinstance(node, Ref):
        return {node.name}
    if isinstance(node, Apply):
        return set().union(*(refs(a) for a in node.args)) if node.args else set()
    if isinstance(node, Pred):
        return refs(node.left) | refs(node.right)
    if isinstance(node, Not):
        return refs(node.arg)
    if isinstance(node, And):
        return set().union(*(refs(a) for a in node.args))
    return set()


# -- interpretation -----------------------------------------------------------

def _nat_order(op):
    def pred(a, b):
        if isinstance(a, bool) or isinstance(b, bool):
            return False
        if isinstance(a, int) and isinstance(b, int):
            return op(a, b)
        return False
    return pred


def _plus(a, b):
    return a + b if isinstance(a, int) and isinstance(b, int) else UNDEFINED


def _minus(a, b):
    return max(a - b, 0) if isinstance(a, int) and isinstance(b, int) else UNDEFINED


BUILTIN_PREDICATES = {
    "=": operator.eq,
    "!=": operator.ne,
    "≠": operator.ne,
    "<": _nat_order(operator.lt),
    "<=": _nat_order(operator.le),
    "≤": _nat_order(operator.le),
    ">": _nat_order(operator.gt),
    ">=": _nat_order(operator.ge),
    "≥": _nat_order(operator.ge),
}

BUILTIN_FUNCTIONS = {
    "+": (2, _plus),
    "-": (2, _minus),
}


@dataclass(frozen=True)
class Interpretation:
    """Registry of function and predicate symbols, shared by every device.

    ``functions`` maps a name to ``(arity, callable)``; ``predicates`` maps a
    name to a binary callable returning bool.
    """

    functions: Mapping[str, tuple] = field(default_factory=lambda: dict(BUILTIN_FUNCTIONS))
    predicates: Mapping[str, Callable] = field(
        default_factory=lambda: dict(BUILTIN_PREDICATES))

    def extend(self, functions=None, predicates=None) -> "Interpretation":
        f = dict(self.functions)
        f.update(functions or {})
        p = dict(self.predicates)
        p.update(predicates or {})
        return Interpretation(f, p)

    def check(self, node):
        """Raise if ``node`` uses an unregistered symbol or a wrong arity."""
        if isinstance(node, Apply):
            if node.fn not in self.functions:
                raise UnknownSymbol(f"unknown function symbol {node.fn!r}")
            arity = self.functions[node.fn][0]
            if arity is not None and arity != len(node.args):
                raise ArityMismatch(
                    f"{node.fn!r} takes {arity} arguments, got {len(node.args)}")
            for a in node.args:
                self.check(a)
        elif isinstance(node, Pred):
            if node.pred not in self.predicates:
                raise UnknownSymbol(f"unknown predicate symbol {node.pred!r}")
            self.check(node.left)
            self.check(node.right)
        elif isinstance(node, Not):
            self.check(node.arg)
        elif isinstance(node, And):
            for a in node.args:
                self.check(a)

    @classmethod
    def from_tables(cls, doc: Mapping | None) -> "Interpretation":
        """Extend the built-ins with symbols given as finite tables.

        ``{"functions": {"f": [[a1, ..., an, result], ...]},
           "predicates": {"p": [[a, b], ...]}}``.  Arguments outside a
        function's table evaluate to UNDEFINED; a predicate holds exactly on
        its listed pairs.
        """
        base = cls()
        if not doc:
            return base
        functions, predicates = {}, {}
        for name, rows in (doc.get("functions") or {}).items():
            arities = {len(r) - 1 for r in rows}
            if len(arities) != 1:
                raise ParseError(f"function {name!r}: rows of different arity",
                                 section="interpretation")
            table = {tuple(_freeze(a) for a in r[:-1]): _freeze(r[-1]) for r in rows}
            functions[name] = (arities.pop(),
                               lambda *args, _t=table: _t.get(tuple(args), UNDEFINED))
        for name, rows in (doc.get("predicates") or {}).items():
            if any(len(r) != 2 for r in rows):
                raise ParseError(f"predicate {name!r}: rows must be pairs",
                                 section="interpretation")
            rel = frozenset((_freeze(a), _freeze(b)) for a, b in rows)
            predicates[name] = lambda a, b, _r=rel: (a, b) in _r
        return base.extend(functions, predicates)


def _freeze(v):
    return tuple(_freeze(x) for x in v) if isinstance(v, list) else v


DEFAULT_INTERPRETATION = Interpretation()


# -- evaluation ---------------------------------------------------------------

def eval_term(term, lookup, interp: Interpretation):
    if isinstance(term, Ref):
        return lookup(term.name)
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Apply):
        try:
            arity, fn = interp.functions[term.fn]
        except KeyError:
            raise UnknownSymbol(f"unknown function symbol {term.fn!r}") from None
        if arity is not None and arity != len(term.args):
            raise ArityMismatch(f"{term.fn!r} takes {arity} arguments, got {len(term.args)}")
        args = [eval_term(a, lookup, interp) for a in term.args]
        if any(a is UNDEFINED for a in args):
            return UNDEFINED
        return fn(*args)
    raise TypeError(f"not a term: {term!r}")


def evaluate(phi, lookup: Callable[[str], object], interp: Interpretation = DEFAULT_INTERPRETATION):
    """Three-valued evaluation of ``phi`` with ``lookup`` resolving references."""
    if isinstance(phi, _Truth):
        return phi.value
    if isinstance(phi, Pred):
        try:
            pred = interp.predicates[phi.pred]
        except KeyError:
            raise UnknownSymbol(f"unknown predicate symbol {phi.pred!r}") from None
        a = eval_term(phi.left, lookup, interp)
        b = eval_term(phi.right, lookup, interp)
        if a is UNDEFINED or b is UNDEFINED:
            return UNDEFINED
        return bool(pred(a, b))
    if isinstance(phi, Not):
        v = evaluate(phi.arg, lookup, interp)
        return UNDEFINED if v is UNDEFINED else not v
    if isinstance(phi, And):
        # every conjunct is evaluated: undefinedness is not short-circuited away
        vals = [evaluate(a, lookup, interp) for a in phi.args]
        if any(v is UNDEFINED for v in vals):
            return UNDEFINED
        return all(vals)
    raise TypeError(f"not a condition: {phi!r}")


def eval_condition(nu, d, phi, interp: Interpretation = DEFAULT_INTERPRETATION):
    """Evaluate ``phi`` at device ``d`` under valuation ``nu``.

    ``nu`` is either a mapping ``(device, item) -> value`` or any object with a
    ``value(device, item)`` method (e.g. a SystemState).  Missing entries read
    as UNDEFINED.
    """
    if hasattr(nu, "value"):
        lookup = lambda name: nu.value(d, name)  # noqa: E731
    else:
        lookup = lambda name: nu.get((d, name), UNDEFINED)  # noqa: E731
    return evaluate(phi, lookup, interp)


# -- plain-data form ----------------------------------------------------------

def parse_term(doc):
    if isinstance(doc, bool):
        raise ParseError(f"booleans are not terms: {doc!r}")
    if isinstance(doc, (int, str)):
        return Const(doc)
    if isinstance(doc, dict):
        if "ref" in doc:
            return Ref(doc["ref"])
        if "fn" in doc:
            return Apply(doc["fn"], tuple(parse_term(a) for a in doc.get("args", [])))
    raise ParseError(f"cannot read term {doc!r}")


def parse_condition(doc):
    if doc == "tt" or doc is True:
        return TT
    if doc == "ff" or doc is False:
        return FF
    if isinstance(doc, list) and doc:
        head = doc[0]
        if head == "not" and len(doc) == 2:
            return Not(parse_condition(doc[1]))
        if head == "and" and len(doc) >= 2:
            return And(tuple(parse_condition(c) for c in doc[1:]))
        if isinstance(head, str) and len(doc) == 3:
            return Pred(head, parse_term(doc[1]), parse_term(doc[2]))
    raise ParseError(f"cannot read condition {doc!r}")


def dump_term(t):
    if isinstance(t, Ref):
        return {"ref": t.name}
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Apply):
        return {"fn": t.fn, "args": [dump_term(a) for a in t.args]}
    raise TypeError(t)


def dump_condition(c):
    if isinstance(c, _Truth):
        return "tt" if c.value else "ff"
    if isinstance(c, Not):
        return ["not", dump_condition(c.arg)]
    if isinstance(c, And):
        return ["and", *[dump_condition(a) for a in c.args]]
    if isinstance(c, Pred):
        return [c.pred, dump_term(c.left), dump_term(c.right)]
    raise TypeError(c)
