"""Command-line entry point: `tinv <command> <model> [options]`."""

import argparse
import logging
import sys
from pathlib import Path

import pandas as pd

from config import CUBE_BUDGET, MODELS_DIR, STATE_LIMIT, VerifierOptions, configure_logging
from errors import TinvError
from history_extension import extend_system
from model_core import format_component, format_formula
from model_parser import load_model
from oracle import oracle_check
from persistent_storage import ReportStorage
from traps import format_semiflows, format_traps
from untimed_heuristics import format_location_regexes, location_regexes
from verifier import (
    DEADLOCK, Outcome, build_global_invariant, check, describe_invariant, eliminate_history, readable_invariants,
    resolve_property,
)
from zone_graph import component_invariant, reach

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ["model", "n", "q", "c", "i", "h", "verdict", "t", "t_solver"]


def resolve_model_path(name):
    """A path as given, or a bundled model by file name with or without `.tinv`."""
    path = Path(name)
    if path.exists():
        return path
    for candidate in (MODELS_DIR / name, MODELS_DIR / f"{name}.tinv"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"No model file {name} (also looked in {MODELS_DIR})")


def _add_pipeline_options(parser):
    parser.add_argument("--glue", action="append",
                        help="glue families: e, estar, sep, sepc, prec or none (comma list, repeatable)")
    parser.add_argument("--heuristic", action="append", help="heuristics: regex, prec (comma list)")
    parser.add_argument("--symmetry", action="store_true", help="symmetry-reduced separation constraints")
    parser.add_argument("--exact-separation", action="store_true",
                        help="separation constants from observer exploration instead of path bounds")
    parser.add_argument("--no-traps", action="store_true", help="leave the interaction invariant out")
    parser.add_argument("--no-place-invariants", action="store_true", help="leave the place semiflow clauses out")
    parser.add_argument("--state-limit", type=int, default=STATE_LIMIT)
    parser.add_argument("--budget", type=int, default=CUBE_BUDGET, help="checker branch budget")


def _options(args, **extra):
    return VerifierOptions.from_flags(
        glue=args.glue,
        heuristic=args.heuristic,
        symmetry=args.symmetry,
        exact_separation=args.exact_separation,
        use_traps=not args.no_traps,
        use_place_invariants=not args.no_place_invariants,
        state_limit=args.state_limit,
        cube_budget=args.budget,
        **extra,
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="tinv", description="Compositional verification of timed systems")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a safety property")
    p.add_argument("model")
    p.add_argument("--prop", help=f"property name, or {DEADLOCK}")
    _add_pipeline_options(p)
    p.add_argument("--solver", default="internal", choices=["internal", "smtlib"])
    p.add_argument("--smt-out", help="write the final query as SMT-LIB2")
    p.add_argument("--allow-history-props", action="store_true")
    p.add_argument("--dump-extended", action="store_true", help="print the history-extended components")
    p.add_argument("--dump-traps", action="store_true")
    p.add_argument("--dump-regex", action="store_true", help="print location regexes of untimed components")
    p.add_argument("--save-report", action="store_true", help="archive the report under the data directory")

    p = sub.add_parser("deadlock", help="check deadlock freedom")
    p.add_argument("model")
    _add_pipeline_options(p)
    p.add_argument("--save-report", action="store_true")

    p = sub.add_parser("invariants", help="print CI, II and glue")
    p.add_argument("model")
    _add_pipeline_options(p)
    p.add_argument("--eliminate", action="store_true", help="project history clocks out of each CI")

    p = sub.add_parser("reach", help="zone graph of one component")
    p.add_argument("model")
    p.add_argument("--component", required=True)
    p.add_argument("--history", action="store_true", help="explore the history-extended component")
    p.add_argument("--dump-zonegraph", action="store_true")
    p.add_argument("--state-limit", type=int, default=STATE_LIMIT)

    p = sub.add_parser("oracle", help="ground truth by exploring the composed system")
    p.add_argument("model")
    p.add_argument("--prop", help=f"property name, or {DEADLOCK}")
    p.add_argument("--state-limit", type=int, default=STATE_LIMIT)

    p = sub.add_parser("bench", help="benchmark table over several models")
    p.add_argument("models", nargs="*", help="model files (default: every bundled model)")
    p.add_argument("--prop", help="property name; each model's only property or deadlock by default")
    _add_pipeline_options(p)
    return parser


def _print_dumps(args, model, options):
    bundle = build_global_invariant(model, options)
    if args.dump_extended:
        for inst in bundle.extended.instances:
            print(format_component(inst))
    if args.dump_traps:
        print(format_traps(bundle.traps))
        if bundle.semiflows:
            print(format_semiflows(bundle.semiflows))
    if args.dump_regex:
        for inst in model.instances:
            if inst.is_untimed:
                print(f"# {inst.name}")
                print(format_location_regexes(location_regexes(inst, options.rewrite_limit)))


def _finish(report, args):
    print(report.summary())
    if getattr(args, "save_report", False):
        ReportStorage().save_report(report)
    return report.exit_code


def cmd_check(args):
    model = load_model(resolve_model_path(args.model))
    options = _options(
        args, solver=args.solver, smt_out=args.smt_out, allow_history_props=args.allow_history_props,
    )
    if args.dump_extended or args.dump_traps or args.dump_regex:
        _print_dumps(args, model, options)
    return _finish(check(model, args.prop, options), args)


def cmd_deadlock(args):
    model = load_model(resolve_model_path(args.model))
    return _finish(check(model, DEADLOCK, _options(args)), args)


def cmd_invariants(args):
    model = load_model(resolve_model_path(args.model))
    bundle = build_global_invariant(model, _options(args))
    print(describe_invariant(bundle))
    if args.eliminate and bundle.history is not None:
        print("# history clocks eliminated")
        for name, f in readable_invariants(bundle, args.budget).items():
            print(f"CI({name}) =")
            print(f"  {format_formula(f)}")
        logger.debug(f"∃H.GI = {format_formula(eliminate_history(bundle, args.budget))}")
    for key, value in bundle.sizes().items():
        print(f"{key}: {value}")
    return 0


def cmd_reach(args):
    model = load_model(resolve_model_path(args.model))
    if args.history:
        model, _ = extend_system(model)
    component = model.instance(args.component)
    graph = reach(component, args.state_limit)
    if args.dump_zonegraph:
        print(graph.dump())
    else:
        print(f"{component.name}: {len(graph.states)} symbolic states, {len(graph.edges)} edges")
        print(format_formula(component_invariant(graph)))
    return 0


def cmd_oracle(args):
    model = load_model(resolve_model_path(args.model))
    name, prop = resolve_property(model, args.prop)
    holds = oracle_check(model, prop, state_limit=args.state_limit)
    print(f"{'✅' if holds else '❌'} {name}: {'holds' if holds else 'violated'} on the composed system")
    return 0 if holds else 1


def run_bench(paths, prop_name, options):
    """One benchmark-table row per model."""
    rows = []
    for path in paths:
        model = load_model(path)
        name = prop_name
        if name is None:
            name = model.property_names[0] if len(model.properties) == 1 else DEADLOCK
        report = check(model, name, options)
        rows.append({
            "model": Path(path).stem,
            **{k: report.stats.get(k) for k in ("n", "q", "c", "i", "h")},
            "verdict": report.verdict.value,
            "t": round(report.total_time, 3),
            "t_solver": round(report.timings.get("check", 0.0), 3),
        })
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def cmd_bench(args):
    paths = [resolve_model_path(m) for m in args.models] or sorted(MODELS_DIR.glob("*.tinv"))
    table = run_bench(paths, args.prop, _options(args))
    print(table.to_string(index=False))
    return 0


COMMANDS = {
    "check": cmd_check,
    "deadlock": cmd_deadlock,
    "invariants": cmd_invariants,
    "reach": cmd_reach,
    "oracle": cmd_oracle,
    "bench": cmd_bench,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (TinvError, ValueError, KeyError, FileNotFoundError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return Outcome.ERROR.exit_code


if __name__ == "__main__":
    sys.exit(main())
