"""Print the subsumption matrix of the cookie-banner options.

A cell is "x" when the row policy is at least as restrictive as the column
policy.  Afterwards PR1 is checked with the full structural policies, which
finds the flights-to-hotels relay discussed in the README.
"""
from pilotcheck.checker import check_invariant, render_text
from pilotcheck.model import fixture_path, load_model


def main():
    m = load_model(fixture_path("cookie_banner.cfg"))
    names = list(m.universe.names)
    rel = m.universe.relation()
    width = max(map(len, names)) + 2
    print("".ljust(width) + "".join(n.ljust(width) for n in names))
    for a in names:
        print(a.ljust(width) + "".join(("x" if (a, b) in rel else ".").ljust(width)
                                       for b in names))
    print()
    ts = m.system()
    print(render_text(check_invariant(ts, m.invariant("pr1"), m.bound), ts))


if __name__ == "__main__":
    main()
