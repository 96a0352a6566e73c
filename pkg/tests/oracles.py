"""Independent reference implementations used to cross-check the package.

Nothing here imports pilotcheck's algorithms: orders are closed by boolean
matrix saturation, subsumption is evaluated clause by clause on plain
tuples, and exploration is a naive recursive walk over a list.
"""
import itertools
import sys

import numpy as np


def matrix_closure(elements, edges):
    """Reflexive-transitive closure by squaring a boolean matrix until it stops changing."""
    elements = list(elements)
    idx = {e: k for k, e in enumerate(elements)}
    n = len(elements)
    m = np.eye(n, dtype=bool)
    for a, b in edges:
        m[idx[a], idx[b]] = True
    while True:
        nxt = m | ((m.astype(np.int64) @ m.astype(np.int64)) > 0)
        if (nxt == m).all():
            break
        m = nxt
    return {(elements[i], elements[j]) for i in range(n) for j in range(n) if m[i, j]}


# A plain policy is None (the empty policy) or (datatype, dcr, transfers) where
# dcr = (entity, frozenset(purposes), retention) and transfers is a frozenset of dcrs.

def dur_leq(d1, d2, P):
    (p1, rt1), (p2, rt2) = d1, d2
    purposes_ok = all(any((a, b) in P for b in p2) for a in p1)
    return purposes_ok and rt1 <= rt2


def dcr_leq(c1, c2, E, P):
    e1, p1, rt1 = c1
    e2, p2, rt2 = c2
    return (e1, e2) in E and dur_leq((p1, rt1), (p2, rt2), P)


def policy_leq(x, y, T, E, P):
    if x is None:
        return True
    if y is None:
        return False
    t1, c1, tr1 = x
    t2, c2, tr2 = y
    if (t1, t2) not in T:
        return False
    if not dcr_leq(c1, c2, E, P):
        return False
    for a in tr1:
        if not any(dcr_leq(a, b, E, P) for b in tr2):
            return False
    return True


def small_universe():
    """Two-element chains for each order, purposes ⊆ one element, rt ∈ {1, 2}, |TR| ≤ 1."""
    T = matrix_closure(["t0", "t1"], [("t0", "t1")])
    E = matrix_closure(["e0", "e1"], [("e0", "e1")])
    P = matrix_closure(["q0", "q1"], [("q0", "q1")])
    purposes = [frozenset(), frozenset({"q0"}), frozenset({"q1"})]
    dcrs = [(e, ps, rt) for e in ("e0", "e1") for ps in purposes for rt in (1, 2)]
    trs = [frozenset()] + [frozenset({c}) for c in dcrs]
    pols = [None] + [(t, c, tr) for t in ("t0", "t1") for c in dcrs for tr in trs]
    return pols, T, E, P


def naive_reachable(ts):
    """All reachable states by depth-first recursion; visited is a plain list."""
    seen = []
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

    def visit(s):
        for other in seen:
            if other == s:
                return
        seen.append(s)
        for _, t in ts.successors(s):
            visit(t)

    for s in ts.initial_states():
        visit(s)
    return seen


def all_pairs(xs):
    return itertools.product(xs, xs)
