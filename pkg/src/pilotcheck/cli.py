"""Command-line front end.

    pilotcheck check --model F --invariant pr1|pr2|NAME [--format text|json]
    pilotcheck refine --model F [--format text|json]
    pilotcheck simulate --model F --steps N --seed S
    pilotcheck export-dot --model F --out G

Exit codes: 0 pass, 1 violation, 2 usage or model error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checker import (check_invariant, check_refinement, render_json, render_text,
                      render_trace, simulate, to_dot)
from .errors import BoundExceeded, PilotError
from .model import load_model

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def make_parser():
    p = _Parser(prog="pilotcheck", description="Check consent protocols against PILOT policies.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--model", required=True, help="model document (JSON)")
        sp.add_argument("--bound", type=int, default=None,
                        help="state limit; overrides the model's config.bound")

    c = sub.add_parser("check", help="check a state invariant")
    common(c)
    c.add_argument("--invariant", default="pr1")
    c.add_argument("--format", choices=("text", "json"), default="text")

    r = sub.add_parser("refine", help="check refinement against the abstract semantics")
    common(r)
    r.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("simulate", help="print one random run")
    common(s)
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("export-dot", help="write the reachable graph in DOT format")
    common(d)
    d.add_argument("--out", required=True)
    return p


def _render(verdict, ts, fmt):
    return render_json(verdict, ts) if fmt == "json" else render_text(verdict, ts)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = make_parser().parse_args(argv)
    try:
        model = load_model(args.model)
        bound = args.bound if args.bound is not None else model.bound
        if args.command == "check":
            inv = model.invariant(args.invariant)
            ts = model.system()
            verdict = check_invariant(ts, inv, bound)
            out.write(_render(verdict, ts, args.format))
            return verdict.exit_code
        if args.command == "refine":
            impl, spec, mapping = model.refinement()
            verdict = check_refinement(impl, spec, mapping, bound)
            out.write(_render(verdict, impl, args.format))
            return verdict.exit_code
        if args.command == "simulate":
            if args.steps < 0:
                raise PilotError("--steps must be non-negative")
            ts = model.system()
            out.write(render_trace(simulate(ts, args.steps, args.seed), ts))
            return EXIT_PASS
        if args.command == "export-dot":
            text = to_dot(model.system(), bound)
            Path(args.out).write_text(text, encoding="utf-8")
            return EXIT_PASS
    except BoundExceeded as e:
        err.write(f"error: {e}\n")
        return EXIT_ERROR
    except PilotError as e:
        err.write(f"error: {e}\n")
        return EXIT_ERROR
    except OSError as e:
        err.write(f"error: cannot read or write {e.filename}: {e.strerror}\n")
        return EXIT_ERROR
    return EXIT_ERROR


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as e:
        code = e.code if isinstance(e.code, int) else EXIT_ERROR
    sys.exit(code)


if __name__ == "__main__":
    main()
