"""Check the bundled three-policy configuration end to end.

Runs both privacy requirements on the abstract semantics, then checks that
the direct and indirect gateway protocols refine it.

    python demos/walkthrough.py
"""
import time

from pilotcheck.checker import check_invariant, check_refinement, render_text
from pilotcheck.model import fixture_path, load_model


def timed(label, fn):
    t0 = time.perf_counter()
    verdict, ts = fn()
    print(f"--- {label} ({time.perf_counter() - t0:.1f}s)")
    print(render_text(verdict, ts))


def main():
    abstract = load_model(fixture_path("three_policy_abstract.cfg"))
    for name in ("pr1", "pr2"):
        ts = abstract.system()
        timed(f"{name} on the abstract semantics",
              lambda: (check_invariant(ts, abstract.invariant(name), abstract.bound), ts))

    for fixture in ("three_policy_direct.cfg", "three_policy_indirect.cfg"):
        m = load_model(fixture_path(fixture))
        impl, spec, mapping = m.refinement()
        timed(f"{impl.name} refines {spec.name}",
              lambda: (check_refinement(impl, spec, mapping, m.bound), impl))


if __name__ == "__main__":
    main()
