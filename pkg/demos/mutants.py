"""Delete a gateway guard and watch the checker catch it.

Each counterexample is replayed through the system before it is printed.
"""
from pilotcheck.checker import check_refinement, render_text, replay
from pilotcheck.model import fixture_path, load_model


def main():
    for fixture in ("direct_mutant.cfg", "indirect_mutant.cfg"):
        m = load_model(fixture_path(fixture))
        impl, spec, mapping = m.refinement()
        verdict = check_refinement(impl, spec, mapping, m.bound)
        replay(impl, verdict.trace)
        print(render_text(verdict, impl))


if __name__ == "__main__":
    main()
