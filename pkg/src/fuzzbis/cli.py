"""Command-line front end.

Exit codes: 0 the property holds (or the computation succeeded), 1 the
property is violated, 2 usage or validation error, 3 the solver did not
converge.
"""
from __future__ import annotations

import argparse
import io
import json
import random
import sys
from contextlib import redirect_stderr
from pathlib import Path

from .automata import (AutomatonError, correspondence_check, check_forward_bisimulation,
                       greatest_forward_bisimulation, load_automaton)
from .bisim import SolverConfig, SolverError, check_bisimulation, greatest_bisimulation
from .hm import (GatingError, PreconditionError, default_constant_pool, EnumerationBudget, hm_check,
                 invariance_check, program_zigzag_check)
from .lattice import (CarrierError, LatticeError, check_laws, exhaustive_tuples, get_lattice,
                      random_tuples, to_fraction)
from .model import ModelError, eval_formula_vector, load_model
from .relation import DomainError, FuzzyRelation
from .syntax import FragmentSpec, ParseError, parse_formula, parse_program

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

PATH_FLAGS = {"--model", "--left", "--right", "--relation", "--output", "--trace-csv", "--depth-csv"}

VALIDATION_ERRORS = (ModelError, AutomatonError, ParseError, DomainError, LatticeError, CarrierError,
                     SolverError, PreconditionError, FileNotFoundError, IsADirectoryError,
                     json.JSONDecodeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(args, out, payload):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    out.write(text)
    if getattr(args, "output", None):
        Path(args.output).write_text(text)


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(tolerance=to_fraction(args.tolerance), max_iterations=args.max_iterations,
                        mode=args.mode)


def _load_relation(path, L, rows, cols) -> FuzzyRelation:
    doc = json.loads(Path(path).read_text())
    doc = doc.get("relation", doc)
    doc.setdefault("rows", list(rows))
    doc.setdefault("cols", list(cols))
    R = FuzzyRelation.from_json(L, doc)
    if R.rows != tuple(rows) or R.cols != tuple(cols):
        raise DomainError(f"{path}: relation domains do not match the inputs")
    return R


def _models(args):
    M = load_model(args.left, args.lattice)
    N = load_model(args.right, args.lattice)
    if M.lattice.name != N.lattice.name:
        raise DomainError(f"{args.left} and {args.right} use different lattices; pass --lattice")
    return M, N


def _fragment(text):
    if text is None:
        return None
    markers = [t.strip() for t in text.split(",") if t.strip()]
    return FragmentSpec.of(*markers)


# -- commands ----------------------------------------------------------------

def cmd_eval(args, out):
    M = load_model(args.model, args.lattice)
    L = M.lattice
    phi = parse_formula(args.formula, L)
    vals = eval_formula_vector(M, phi)
    if args.at is not None:
        if args.at not in M.index:
            raise ModelError(f"unknown state {args.at!r}")
        _emit(args, out, L.format(vals[M.index[args.at]], args.decimal) + "\n")
    else:
        _emit(args, out, {"lattice": L.name, "formula": args.formula,
                          "values": {s: L.format(v, args.decimal) for s, v in zip(M.states, vals)}})
    return EXIT_OK


def cmd_bisim_check(args, out):
    M, N = _models(args)
    Z = _load_relation(args.relation, M.lattice, M.states, N.states)
    rep = check_bisimulation(M, N, Z)
    _emit(args, out, rep.to_json(M.lattice, args.decimal))
    return EXIT_OK if rep.holds else EXIT_VIOLATED


def _write_trace(args, res):
    if args.trace_csv:
        Path(args.trace_csv).write_text(res.trace_csv())


def cmd_bisim_greatest(args, out):
    M, N = _models(args)
    res = greatest_bisimulation(M, N, _solver_cfg(args))
    _write_trace(args, res)
    _emit(args, out, {"lattice": M.lattice.name, "mode": res.mode, "converged": res.converged,
                      "exact": res.exact, "certified": res.certified, "iterations": res.iterations,
                      "relation": res.relation.to_json(args.decimal)})
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_hm(args, out):
    M, N = _models(args)
    pool = default_constant_pool(M.lattice, [M, N], args.pool_rounds)
    rep = hm_check(M, N, EnumerationBudget(args.depth, pool), _solver_cfg(args))
    if args.depth_csv:
        Path(args.depth_csv).write_text(rep.depth_csv())
    _emit(args, out, rep.to_json(args.decimal))
    if not rep.solver.converged:
        return EXIT_NONCONVERGED
    if not rep.sound or (args.require_match and not rep.matched):
        return EXIT_VIOLATED
    return EXIT_OK


def _relation_or_greatest(args, M, N):
    if args.relation:
        return _load_relation(args.relation, M.lattice, M.states, N.states)
    res = greatest_bisimulation(M, N, _solver_cfg(args))
    if not res.certified:
        raise SolverError("solver result is not a certified bisimulation; pass --relation")
    return res.relation


def cmd_invariance(args, out):
    M, N = _models(args)
    L = M.lattice
    phi = parse_formula(args.formula, L)
    Z = _relation_or_greatest(args, M, N)
    rep = invariance_check(M, N, Z, phi, _fragment(args.fragment), not args.no_gating, args.gating_mode)
    _emit(args, out, rep.to_json(L, args.decimal))
    return EXIT_OK if rep.holds else EXIT_VIOLATED


def cmd_zigzag(args, out):
    M, N = _models(args)
    alpha = parse_program(args.program, M.lattice)
    Z = _relation_or_greatest(args, M, N)
    rep = program_zigzag_check(M, N, Z, alpha, _fragment(args.fragment), not args.no_gating, args.gating_mode)
    _emit(args, out, rep.to_json(M.lattice, args.decimal))
    return EXIT_OK if rep.holds else EXIT_VIOLATED


def _automata(args):
    A = load_automaton(args.left, args.lattice)
    B = load_automaton(args.right, args.lattice)
    return A, B


def cmd_automata_bisim(args, out):
    A, B = _automata(args)
    L = A.lattice
    if args.relation:
        Z = _load_relation(args.relation, L, A.states, B.states)
        rep = check_forward_bisimulation(A, B, Z)
        _emit(args, out, rep.to_json(L, args.decimal))
        return EXIT_OK if rep.holds else EXIT_VIOLATED
    res = greatest_forward_bisimulation(A, B, _solver_cfg(args))
    _write_trace(args, res)
    _emit(args, out, {"lattice": L.name, "mode": res.mode, "converged": res.converged, "exact": res.exact,
                      "certified": res.certified, "iterations": res.iterations, "initial_ok": res.initial_ok,
                      "initial_violations": [v.to_json(L, args.decimal) for v in res.initial_violations],
                      "relation": res.relation.to_json(args.decimal)})
    if not res.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK if res.initial_ok else EXIT_VIOLATED


def cmd_automata_corresp(args, out):
    A, B = _automata(args)
    L = A.lattice
    if args.relation:
        Z = _load_relation(args.relation, L, A.states, B.states)
    else:
        Z = greatest_forward_bisimulation(A, B, _solver_cfg(args)).relation
    rep = correspondence_check(A, B, Z)
    _emit(args, out, rep.to_json(L, args.decimal))
    return EXIT_OK if rep.holds else EXIT_VIOLATED


def cmd_lattice_laws(args, out):
    L = get_lattice(args.lattice or "godel")
    if L.is_finite:
        tuples, how = exhaustive_tuples(L), "exhaustive"
    else:
        tuples, how = random_tuples(random.Random(args.seed), args.samples), f"{args.samples} random tuples"
    bad = check_laws(L, tuples, limit=args.limit)
    _emit(args, out, {"lattice": L.name, "heyting": L.is_heyting, "linear": L.is_linear, "checked": how,
                      "violations": [str(v) for v in bad]})
    return EXIT_OK if not bad else EXIT_VIOLATED


def json_subset(expected, actual) -> bool:
    """Dicts match key-wise, lists by containment of every expected item."""
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and json_subset(v, actual[k])
                                                for k, v in expected.items())
    if isinstance(expected, list):
        return isinstance(actual, list) and all(any(json_subset(e, a) for a in actual) for e in expected)
    return expected == actual


def cmd_suite(args, out):
    manifest = Path(args.manifest)
    try:
        doc = json.loads(manifest.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read manifest {manifest}: {exc}")
    jobs = doc.get("jobs", []) if isinstance(doc, dict) else None
    if not isinstance(jobs, list):
        raise UsageError(f"{manifest}: 'jobs' must be a list")
    base = manifest.parent
    prepared = []
    for k, job in enumerate(jobs):
        name = job.get("name", f"job{k}")
        argv = [str(a) for a in job.get("argv", [])]
        for i, a in enumerate(argv[:-1]):
            if a in PATH_FLAGS:
                p = Path(argv[i + 1])
                argv[i + 1] = str(p if p.is_absolute() else base / p)
                if a not in ("--output", "--trace-csv", "--depth-csv") and not Path(argv[i + 1]).exists():
                    raise UsageError(f"job {name!r}: file {argv[i + 1]} does not exist")
        if argv and argv[0] == "suite":
            raise UsageError(f"job {name!r}: nested suites are not supported")
        prepared.append((name, argv, job))
    results = []
    for name, argv, job in prepared:
        buf, err = io.StringIO(), io.StringIO()
        with redirect_stderr(err):
            code = run(argv, buf)
        ok = code == job.get("expect_exit", 0)
        if "expect_stdout" in job:
            ok = ok and buf.getvalue().strip() == str(job["expect_stdout"]).strip()
        for needle in job.get("expect_contains", []):
            ok = ok and needle in buf.getvalue()
        if "expect_json" in job:
            try:
                ok = ok and json_subset(job["expect_json"], json.loads(buf.getvalue()))
            except json.JSONDecodeError:
                ok = False
        results.append({"name": name, "exit": code, "passed": ok, "stderr": err.getvalue().strip()})
    report = {"jobs": results, "passed": sum(r["passed"] for r in results), "total": len(results)}
    _emit(args, out, report)
    for r in results:
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']} (exit {r['exit']})", file=sys.stderr)
    if all(r["passed"] for r in results):
        return EXIT_OK
    if any(r["exit"] == EXIT_USAGE for r in results if not r["passed"]):
        return EXIT_USAGE
    return EXIT_VIOLATED


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--lattice", help="godel, lukasiewicz, product, boolean4, chain:N or a lattice JSON file")
    common.add_argument("--decimal", type=int, default=None, metavar="DIGITS", help="print decimals instead of rationals")
    common.add_argument("--output", help="also write the report to this file")
    solver = _Parser(add_help=False)
    solver.add_argument("--mode", choices=["auto", "exact", "approximate"], default="auto")
    solver.add_argument("--tolerance", default="1/1000000000")
    solver.add_argument("--max-iterations", type=int, default=10_000)
    solver.add_argument("--trace-csv", help="write per-iteration deltas as CSV")
    pair = _Parser(add_help=False)
    pair.add_argument("--left", required=True)
    pair.add_argument("--right", required=True)
    gate = _Parser(add_help=False)
    gate.add_argument("--relation", help="relation JSON; defaults to the greatest bisimulation")
    gate.add_argument("--fragment", help="excluded constructors, comma separated (union,implies,test)")
    gate.add_argument("--no-gating", action="store_true", help="evaluate even if the lattice conditions fail")
    gate.add_argument("--gating-mode", choices=["heyting", "laws"], default="heyting")

    p = _Parser(prog="fuzzbis", description="Fuzzy PDL evaluation and fuzzy bisimulation tools")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", parents=[common], help="evaluate a formula on a model")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--at", help="state; without it all states are printed")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bisim-check", parents=[common, pair], help="check a relation is a fuzzy bisimulation")
    s.add_argument("--relation", required=True)
    s.set_defaults(func=cmd_bisim_check)

    s = sub.add_parser("bisim-greatest", parents=[common, pair, solver], help="compute the greatest bisimulation")
    s.set_defaults(func=cmd_bisim_greatest)

    s = sub.add_parser("hm", parents=[common, pair, solver], help="logical distance vs greatest bisimulation")
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--pool-rounds", type=int, default=1)
    s.add_argument("--require-match", action="store_true", help="exit 1 unless distance equals the solver result")
    s.add_argument("--depth-csv", help="write convergence by depth as CSV")
    s.set_defaults(func=cmd_hm)

    s = sub.add_parser("invariance", parents=[common, pair, solver, gate], help="check formula invariance")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_invariance)

    s = sub.add_parser("zigzag", parents=[common, pair, solver, gate], help="zig-zag conditions for a program")
    s.add_argument("--program", required=True)
    s.set_defaults(func=cmd_zigzag)

    s = sub.add_parser("automata-bisim", parents=[common, pair, solver], help="forward bisimulation of automata")
    s.add_argument("--relation", help="check this relation instead of computing the greatest one")
    s.set_defaults(func=cmd_automata_bisim)

    s = sub.add_parser("automata-corresp", parents=[common, pair, solver], help="automata/Kripke correspondence")
    s.add_argument("--relation")
    s.set_defaults(func=cmd_automata_corresp)

    s = sub.add_parser("lattice-laws", parents=[common], help="check the residuated-lattice law suite")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--limit", type=int, default=20)
    s.set_defaults(func=cmd_lattice_laws)

    s = sub.add_parser("suite", parents=[common], help="run a manifest of jobs")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_suite)
    return p


def run(argv, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GatingError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    code = run(sys.argv[1:] if argv is None else argv)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
