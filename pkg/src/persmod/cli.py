"""``persmod`` command line: JSON in, JSON out.

Exit codes: 0 success, 2 invalid input, 3 budget exhausted or undecided.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from itertools import combinations

from . import io
from .complexes import cech_complex, rips_complex, sandwich_check
from .core import GridModule, verify_interleaving
from .decomposition import barcode
from .fields import DimensionMismatch
from .kan import MODES, CENTER, IncoherentSystem, extend, segment_interpolation, star_extension, verify_coherent
from .metrics import DEFAULT_BUDGET, BudgetExceeded, interleaving_distance, interleaving_oracle, oracle_distance
from .rational import INF, format_rational, parse_rational
from .spacetime import eta, worldline_interleaving_distance

EXIT_OK, EXIT_INVALID, EXIT_UNDECIDED = 0, 2, 3


class Undecided(Exception):
    """A well-formed question the budget could not settle; carries a partial result."""

    def __init__(self, result: dict):
        super().__init__("undecided")
        self.result = result


def _rational_arg(text: str):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _scale_arg(text: str):
    value = _rational_arg(text)
    if value == INF or value < 0:
        raise argparse.ArgumentTypeError("scale must be a finite nonnegative rational")
    return value


def _samples_arg(text: str) -> list:
    return [_rational_arg(s) for s in text.split(",") if s.strip()]


def _module(path: str, p: int | None) -> GridModule:
    u = io.module_from_json(io.load(path))
    if p is not None and u.p != p:
        raise ValueError(f"{path} is over F_{u.p} but --p {p} was given")
    return u


def _modules(paths, p) -> list[GridModule]:
    mods = [_module(path, p) for path in paths]
    if len({u.p for u in mods}) > 1:
        raise ValueError("input modules are over different primes")
    return mods


def _inputs(args) -> list[str]:
    return list(args.inputs or []) + list(args.input or [])


def _need(paths: list[str], n: int | None, what: str) -> list[str]:
    if n is not None and len(paths) != n:
        raise ValueError(f"{what} needs {n} input file(s), got {len(paths)}")
    return paths


def cmd_barcode(args) -> dict:
    (path,) = _need(_inputs(args), 1, "barcode")
    return io.diagram_to_json(barcode(_module(path, args.p)))


def cmd_distance(args) -> dict:
    u, v = _modules(_need(_inputs(args), 2, "distance"), args.p)
    return {"distance": format_rational(interleaving_distance(u, v))}


def cmd_oracle(args) -> dict:
    u, v = _modules(_need(_inputs(args), 2, "oracle"), args.p)
    if args.e is None:
        return {"distance": format_rational(oracle_distance(u, v, args.budget))}
    found = interleaving_oracle(u, v, args.e, args.budget)
    out = {"e": format_rational(args.e), "interleaved": found is not None}
    if found is not None:
        out["phi"] = io.morphism_to_json(found[0])
        out["psi"] = io.morphism_to_json(found[1])
    return out


def cmd_eta_check(args) -> dict:
    (path,) = _need(_inputs(args), 1, "eta-check")
    m = io.metric_from_json(io.load(path))
    grid = args.samples or [Fraction(0)]
    pairs, ok = [], True
    for x, y in combinations(m.points, 2):
        got = worldline_interleaving_distance(eta(m, grid, x), eta(m, grid, y))
        ok &= got == m.d(x, y)
        pairs.append({"x": io.label(x), "y": io.label(y), "d": format_rational(m.d(x, y)), "eta": format_rational(got)})
    return {"isometric": ok, "pairs": pairs}


def cmd_coherence(args) -> dict:
    (path,) = _need(_inputs(args), 1, "coherence")
    report = verify_coherent(io.system_from_json(io.load(path)))
    out = {"coherent": report.coherent}
    if not report.coherent:
        out["violation"] = report.violation
    return out


def cmd_extend(args) -> dict:
    (path,) = _need(_inputs(args), 1, "extend")
    if not args.metric:
        raise ValueError("extend needs --metric with the larger space")
    system = io.system_from_json(io.load(path))
    space = io.metric_from_json(io.load(args.metric))
    return io.system_to_json(extend(system, space, args.mode))


def cmd_interpolate_segment(args) -> dict:
    u, v = _modules(_need(_inputs(args), 2, "interpolate-segment"), args.p)
    if args.e is None:
        raise ValueError("interpolate-segment needs --e")
    if (args.phi is None) != (args.psi is None):
        raise ValueError("give both --phi and --psi, or neither")
    if args.phi is not None:
        phi = io.morphism_from_json(io.load(args.phi), u, v)
        psi = io.morphism_from_json(io.load(args.psi), v, u)
        if not verify_interleaving(phi, psi, args.e):
            raise ValueError(f"--phi/--psi are not an {format_rational(args.e)}-interleaving")
    else:
        found = interleaving_oracle(u, v, args.e, args.budget)
        if found is None:
            raise ValueError(f"inputs are not {format_rational(args.e)}-interleaved")
        phi, psi = found
    samples = args.samples or [Fraction(k, 4) * args.e for k in range(5)]
    fam = segment_interpolation(u, v, phi, psi, args.e, samples, args.mode)
    labels = sorted(fam.modules)
    morphisms = {}
    for a in labels:
        for b in labels:
            m = fam.forward.get((a, b)) or fam.backward.get((a, b))
            if m is not None:
                morphisms[f"{io.label(a)}->{io.label(b)}"] = io.morphism_to_json(m)
    return {
        "e": format_rational(args.e),
        "mode": args.mode,
        "modules": {io.label(s): io.module_to_json(fam.modules[s]) for s in labels},
        "morphisms": morphisms,
    }


def cmd_interpolate_star(args) -> dict:
    (path,) = _need(_inputs(args), 1, "interpolate-star")
    system = io.system_from_json(io.load(path))
    pts = list(system.points)
    dists = {system.space.d(a, b) for a, b in combinations(pts, 2)}
    if len(dists) > 1:
        raise ValueError("star interpolation needs an equilateral system")
    e = args.e if args.e is not None else (dists.pop() / 2 if dists else Fraction(0))
    if dists and dists != {2 * e}:
        raise ValueError(f"system distances must equal 2e = {format_rational(2 * e)}")
    index = {x: i for i, x in enumerate(pts)}
    morphisms = {(index[a], index[b]): m for (a, b), m in system.morphisms.items()}
    ext = star_extension([system.modules[x] for x in pts], morphisms, e, args.mode)
    return {
        "e": format_rational(e),
        "mode": args.mode,
        "center": io.module_to_json(ext.module(CENTER)),
        "interleavings": {
            io.label(x): {
                "to_center": io.morphism_to_json(ext.morphism(index[x], CENTER)),
                "from_center": io.morphism_to_json(ext.morphism(CENTER, index[x])),
            }
            for x in pts
        },
    }


def _scale(args, name: str):
    if args.e is None:
        raise ValueError(f"{name} needs --e")
    return args.e


def cmd_rips(args) -> dict:
    mods = _modules(_inputs(args), args.p)
    return io.complex_to_json(rips_complex(mods, _scale(args, "rips"), args.max_dim), certificates=False)


def cmd_cech(args) -> dict:
    mods = _modules(_inputs(args), args.p)
    c = cech_complex(mods, _scale(args, "cech"), args.max_dim, args.budget)
    out = io.complex_to_json(c)
    if c.unknown:
        raise Undecided(out)
    return out


def cmd_sandwich(args) -> dict:
    mods = _modules(_inputs(args), args.p)
    rep = sandwich_check(mods, _scale(args, "sandwich"), args.max_dim, args.budget)
    out = {
        "holds": rep.holds,
        "violations": [{"inclusion": what, "simplex": list(s)} for what, s in rep.violations],
        "cech_e": io.complex_to_json(rep.cech_e, certificates=False),
        "rips_2e": io.complex_to_json(rep.rips_2e, certificates=False),
        "cech_2e": io.complex_to_json(rep.cech_2e, certificates=False),
    }
    if rep.unknown:
        raise Undecided(out)
    return out


COMMANDS = {
    "barcode": (cmd_barcode, "interval decomposition of a module"),
    "distance": (cmd_distance, "interleaving distance via the bottleneck distance"),
    "oracle": (cmd_oracle, "brute-force interleaving search over F_p"),
    "eta-check": (cmd_eta_check, "compare world-line distances of constant world lines with the metric"),
    "coherence": (cmd_coherence, "check the pair and triangle identities of a system"),
    "extend": (cmd_extend, "Kan-extend a coherent system to a larger metric space"),
    "interpolate-segment": (cmd_interpolate_segment, "interpolate an interleaved pair along a segment"),
    "interpolate-star": (cmd_interpolate_star, "center module of an equilateral coherent system"),
    "rips": (cmd_rips, "Rips complex of a module collection"),
    "cech": (cmd_cech, "Čech complex with coherent certificates"),
    "sandwich": (cmd_sandwich, "check cech(e) <= rips(2e) <= cech(2e)"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="persmod", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text, description=help_text)
        cmd.add_argument("inputs", nargs="*", help="input JSON files")
        cmd.add_argument("-i", "--input", action="append", help="input JSON file (repeatable)")
        cmd.add_argument("-o", "--output", help="write JSON here instead of stdout")
        cmd.add_argument("--p", type=int, default=None, help="expected prime of the inputs")
        cmd.add_argument("--e", type=_scale_arg, default=None, help="scale, as a or a/b")
        cmd.add_argument("--mode", choices=MODES, default="image")
        cmd.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        cmd.add_argument("--max-dim", type=int, default=None)
        cmd.add_argument("--samples", type=_samples_arg, default=None, help="comma-separated rationals")
        cmd.add_argument("--metric", help="metric JSON (extend)")
        cmd.add_argument("--phi", help="morphism JSON u -> v (interpolate-segment)")
        cmd.add_argument("--psi", help="morphism JSON v -> u (interpolate-segment)")
    return parser


def _emit(result: dict, path: str | None) -> None:
    text = io.dumps(result) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = COMMANDS[args.command][0]
    try:
        _emit(handler(args), args.output)
    except Undecided as exc:
        _emit(exc.result, args.output)
        print("persmod: budget exhausted before every question was decided", file=sys.stderr)
        return EXIT_UNDECIDED
    except BudgetExceeded as exc:
        print(f"persmod: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (OSError, ValueError, TypeError, KeyError, DimensionMismatch, IncoherentSystem) as exc:
        print(f"persmod: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
