#!/usr/bin/env python3
"""
Command-line surface for generating instances, running mechanisms and auditing them
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from tabulate import tabulate

from src.core.analysis import claim3_closed, claim3_direct, g_monotone_check
from src.core.evaluation import derive_stream, emit_curves, run_suite
from src.core.exact_oracle import (
    SETTING_FAMILY,
    SETTING_K,
    InfeasibleEnumerationError,
    bound_audit,
    correlation_sweep,
    exact_distribution,
    expected_indegree,
    impartiality_audit,
)
from src.core.graph_core import gen_figure_family, gen_random, gen_random_plurality, max_k_indegree
from src.core.mechanisms import run_mechanism
from src.data.instance_store import (
    CURVE_COLUMNS,
    EVAL_COLUMNS,
    InstanceStore,
    bound_report_to_dict,
    curves_to_csv,
    distribution_to_dict,
    eval_report_to_csv,
    eval_report_to_dict,
    load_graph,
    load_prediction,
    load_spec,
)
from src.data.models import (
    BoundSetting,
    FigureFamily,
    GuaranteeKind,
    InstanceFamily,
    MechanismKind,
    MechanismSpec,
    Prediction,
    TrialConfig,
    format_rational,
)
from src.utils.config_manager import ConfigManager
from src.utils.logging_setup import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_USAGE = 2


def parse_prediction(text: str) -> Prediction:
    """'0,3' -> Prediction((0, 3))"""
    try:
        return Prediction(int(v) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ValueError(f"invalid prediction {text!r}: {e}")


def parse_k_range(text: str) -> List[int]:
    """'1-5' or '2' or '1,3,4'"""
    try:
        if "-" in text:
            low, high = text.split("-", 1)
            return list(range(int(low), int(high) + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"invalid k range {text!r}; use '1-5' or '1,2,3'.")


def build_spec(args: argparse.Namespace, k_default: Optional[int] = None) -> MechanismSpec:
    if getattr(args, "spec", None):
        return load_spec(args.spec)
    if args.mech == MechanismKind.LOTTERY.value:
        raise ValueError("lottery mechanisms are described with --spec FILE.")
    k = args.k if args.k is not None else k_default
    return MechanismSpec(args.mech, k=k, rho=args.rho)


def _graph_and_prediction(args: argparse.Namespace) -> tuple:
    if not args.graph:
        raise ValueError("--graph is required.")
    g = load_graph(args.graph)
    p = parse_prediction(args.pred) if args.pred else load_prediction(args.graph)
    return g, p.validate_for(g)


def _write(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        logger.info("wrote %s", args.out)
    else:
        print(text)


def _emit(args: argparse.Namespace, payload: Dict[str, Any], headers: Sequence[str],
          rows: List[Sequence[Any]], csv_text: Optional[str] = None) -> None:
    if args.format == "json":
        _write(args, json.dumps(payload, indent=2))
    elif args.format == "csv" and csv_text is not None:
        _write(args, csv_text)
    else:
        _write(args, tabulate(rows, headers=headers, tablefmt="github"))


##################
# Sub-commands
##################

def cmd_gen(args: argparse.Namespace) -> int:
    store = InstanceStore(args.out_dir)
    seed = _evaluation_default(args, "seed")
    saved = []
    if args.kind == "figure":
        family = InstanceFamily(args.family, args.n)
        for index, (g, p) in enumerate(gen_figure_family(family), start=1):
            saved.append(store.save_instance(f"{family.family.value}-{index}", g, p))
    else:
        if args.n is None:
            raise ValueError("--n is required for random instances.")
        k = args.k if args.k is not None else 1
        for offset in range(args.count):
            if args.kind == "plurality":
                g = gen_random_plurality(args.n, seed + offset)
            else:
                g = gen_random(args.n, args.edge_prob, seed + offset)
            # Accurate prediction unless one is given
            p = parse_prediction(args.pred) if args.pred else Prediction(max_k_indegree(g, k)[1])
            saved.append(store.save_instance(f"{args.kind}-n{args.n}-s{seed + offset}", g, p.validate_for(g)))
    _emit(args, {"saved": saved}, ["instance file"], [[path] for path in saved])
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    g, p = _graph_and_prediction(args)
    spec = build_spec(args, p.k)
    seed = _evaluation_default(args, "seed")
    selected = sorted(run_mechanism(spec, g, p, derive_stream(seed)))
    _emit(args, {"mechanism": spec.label(), "seed": seed, "selected": selected},
          ["mechanism", "seed", "selected"], [[spec.label(), seed, selected]])
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    g, p = _graph_and_prediction(args)
    spec = build_spec(args, p.k)
    dist = exact_distribution(spec, g, p)
    payload = distribution_to_dict(dist)
    rows = [[v, format_rational(value), f"{float(value):.6f}"] for v, value in dist.probs.items()]
    rows.append(["E[indeg]", format_rational(expected_indegree(dist, g)), ""])
    _emit(args, payload, ["vertex", "f", "decimal"], rows)
    return EXIT_OK


def cmd_audit_impartiality(args: argparse.Namespace) -> int:
    if args.family:
        instances = gen_figure_family(InstanceFamily(args.family))
    else:
        instances = [_graph_and_prediction(args)]

    results = []
    for index, (g, p) in enumerate(instances):
        spec = build_spec(args, p.k)
        vertices = [args.vertex] if args.vertex is not None else list(g.vertices)
        for i in vertices:
            results.append((index, i, impartiality_audit(spec, g, p, i, plurality_mode=args.plurality_mode)))

    passed = all(ok for _, _, ok in results)
    payload = {"pass": passed,
               "checks": [{"instance": index, "vertex": i, "pass": ok} for index, i, ok in results]}
    _emit(args, payload, ["instance", "vertex", "impartial"],
          [[index, i, "yes" if ok else "NO"] for index, i, ok in results])
    return EXIT_OK if passed else EXIT_AUDIT_FAILED


def cmd_audit_bounds(args: argparse.Namespace) -> int:
    setting = BoundSetting(args.setting)
    spec = build_spec(args, SETTING_K[setting])
    report = bound_audit(setting, spec)
    rows = [["figure", c.graph_index, c.label, format_rational(c.lhs), format_rational(c.rhs),
             "pass" if c.passed else "FAIL"] for c in report.constraints]
    rows += [["region", "", c.label, format_rational(c.lhs), format_rational(c.rhs),
              "pass" if c.passed else "FAIL"] for c in report.region]
    rows += [["linkage", f"{c.first}~{c.second}", c.label, format_rational(c.first_value),
              format_rational(c.second_value), "pass" if c.equal else "FAIL"] for c in report.linkage]
    if args.format == "table":
        print(f"{report.spec_label} on {SETTING_FAMILY[setting].value}: "
              f"alpha_hat={format_rational(report.alpha_hat)} beta_hat={format_rational(report.beta_hat)}")
    _emit(args, bound_report_to_dict(report), ["kind", "instance", "check", "lhs", "rhs", "result"], rows)
    return EXIT_OK if report.passed else EXIT_AUDIT_FAILED


def cmd_audit_claims(args: argparse.Namespace) -> int:
    claim_failures = [(k, p) for k in range(1, args.k_max + 1) for p in range(k)
                      if claim3_closed(k, p) != claim3_direct(k, p)]
    monotone_failures = [k for k in range(1, args.g_k_max + 1) if not g_monotone_check(k)]
    checked, correlation_failures = correlation_sweep(args.correlation_n)

    passed = not (claim_failures or monotone_failures or correlation_failures)
    payload = {
        "pass": passed,
        "closed_form": {"k_max": args.k_max, "failures": claim_failures},
        "monotone": {"k_max": args.g_k_max, "failures": monotone_failures},
        "correlation": {"n": args.correlation_n, "checked": checked,
                        "failures": [list(f) for f in correlation_failures]},
    }
    rows = [
        ["closed form = direct sum", f"k <= {args.k_max}", len(claim_failures)],
        ["g(k, p) non-increasing in p", f"k <= {args.g_k_max}", len(monotone_failures)],
        ["conditional correlation", f"n = {args.correlation_n}, {checked} cases", len(correlation_failures)],
    ]
    _emit(args, payload, ["identity", "range", "failures"], rows)
    return EXIT_OK if passed else EXIT_AUDIT_FAILED


def cmd_eval(args: argparse.Namespace) -> int:
    instances = InstanceStore(args.instances).load_all()
    if not instances:
        raise ValueError(f"no instances found in {args.instances or 'the configured instance directory'}.")
    spec = build_spec(args, instances[0][2].k)
    cfg = TrialConfig(spec, _evaluation_default(args, "trials"), _evaluation_default(args, "seed"),
                      source=args.spec or "inline")
    report = run_suite(cfg, instances, workers=args.workers)
    rows = [[r.instance_id, r.n, r.k, r.delta_k, r.pred_indegree, format_rational(r.eta),
             f"{r.mean:.4f}", f"{r.ci:.4f}", f"{r.ratio:.4f}"] for r in report.rows]
    if args.format == "table":
        alpha = "n/a" if report.alpha_hat is None else f"{report.alpha_hat:.4f}"
        print(f"{report.spec_label}: alpha_hat={alpha} beta_hat={report.beta_hat:.4f}\n{report.note}")
    _emit(args, eval_report_to_dict(report), EVAL_COLUMNS, rows, eval_report_to_csv(report))
    return EXIT_OK


def cmd_curves(args: argparse.Namespace) -> int:
    kinds = [GuaranteeKind(kind.strip()) for kind in args.kinds.split(",")]
    rho_set = [rho.strip() for rho in (args.rho or "1/2,2/3,3/4,1").split(",")]
    rows = emit_curves(kinds, parse_k_range(args.k_range), rho_set)
    payload = {"rows": [{"kind": r.kind.value, "k": r.k, "rho": format_rational(r.rho),
                         "alpha": format_rational(r.alpha), "beta": format_rational(r.beta)} for r in rows]}
    table = [[r.kind.value, r.k, format_rational(r.rho), format_rational(r.alpha), f"{float(r.alpha):.4f}",
              format_rational(r.beta), f"{float(r.beta):.4f}"] for r in rows]
    _emit(args, payload, CURVE_COLUMNS, table, curves_to_csv(rows))
    return EXIT_OK


def _evaluation_default(args: argparse.Namespace, name: str) -> int:
    value = getattr(args, name, None)
    if value is None:
        value = getattr(ConfigManager().get_config("evaluation"), name)
    return value


##################
# Parser
##################

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Random seed (default from config)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials (default from config)")
    common.add_argument("--rho", type=str, help="Exact rational such as 2/3")
    common.add_argument("--k", type=int, help="Number of vertices to select")
    common.add_argument("--out", type=str, help="Write output to this file instead of stdout")
    common.add_argument("--format", choices=["table", "json", "csv"], default="table")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")
    return common


def _mechanism_options(parser: argparse.ArgumentParser, graph: bool = True) -> None:
    parser.add_argument("--mech", choices=[kind.value for kind in MechanismKind],
                        default=MechanismKind.RHO_PERMUTATION.value)
    parser.add_argument("--spec", type=str, help="JSON mechanism spec file (required for lottery)")
    if graph:
        parser.add_argument("--graph", type=str, help="Graph or instance JSON file")
        parser.add_argument("--pred", type=str, help="Predicted vertices, e.g. 0,3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impartialkit",
        description="Impartial selection with predictions: mechanisms, exact audits and evaluation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s gen --kind figure --family fig5 --out-dir instances
  %(prog)s exact --mech rho-permutation --rho 2/3 --graph instances/fig3-1.json
  %(prog)s audit-impartiality --mech det-k --k 3 --family fig6
  %(prog)s audit-bounds --setting sel2 --mech fixed-bidirectional
  %(prog)s audit-claims --k-max 25
  %(prog)s eval --mech rho-partition --rho 3/4 --k 2 --instances instances --trials 10000
  %(prog)s curves --kinds rho-partition,k-partition --k-range 1-5 --format csv
        """
    )
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="Generate and store instances")
    gen.add_argument("--kind", choices=["random", "plurality", "figure"], default="random")
    gen.add_argument("--n", type=int)
    gen.add_argument("--edge-prob", type=float, default=0.5)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--family", choices=[f.value for f in FigureFamily], default=FigureFamily.FIG3_1SEL.value)
    gen.add_argument("--pred", type=str, help="Prediction for random instances (default: an accurate one)")
    gen.add_argument("--out-dir", type=str, help="Instance directory (default from config)")
    gen.set_defaults(handler=cmd_gen)

    run = sub.add_parser("run", parents=[common], help="One seeded draw of a mechanism")
    _mechanism_options(run)
    run.set_defaults(handler=cmd_run)

    exact = sub.add_parser("exact", parents=[common], help="Exact selection probabilities")
    _mechanism_options(exact)
    exact.set_defaults(handler=cmd_exact)

    impartial = sub.add_parser("audit-impartiality", parents=[common],
                               help="Check that no vertex can change its own selection probability")
    _mechanism_options(impartial)
    impartial.add_argument("--family", choices=[f.value for f in FigureFamily])
    impartial.add_argument("--vertex", type=int, help="Audit one vertex only")
    impartial.add_argument("--plurality-mode", action="store_true",
                           help="Only vary over single outgoing edges")
    impartial.set_defaults(handler=cmd_audit_impartiality)

    bounds = sub.add_parser("audit-bounds", parents=[common],
                            help="Check a mechanism against a worst-case instance family")
    _mechanism_options(bounds, graph=False)
    bounds.add_argument("--setting", choices=[s.value for s in BoundSetting], required=True)
    bounds.set_defaults(handler=cmd_audit_bounds)

    claims = sub.add_parser("audit-claims", parents=[common], help="Check the analytic identities")
    claims.add_argument("--k-max", type=int, default=25)
    claims.add_argument("--g-k-max", type=int, default=100)
    claims.add_argument("--correlation-n", type=int, default=4)
    claims.set_defaults(handler=cmd_audit_claims)

    evaluate = sub.add_parser("eval", parents=[common], help="Monte Carlo evaluation over stored instances")
    _mechanism_options(evaluate, graph=False)
    evaluate.add_argument("--instances", type=str, help="Instance directory (default from config)")
    evaluate.add_argument("--workers", type=int, help="Worker processes (default from config)")
    evaluate.set_defaults(handler=cmd_eval)

    curves = sub.add_parser("curves", parents=[common], help="Closed-form consistency/robustness rows")
    curves.add_argument("--kinds", type=str, default=GuaranteeKind.RHO_PARTITION.value,
                        help="Comma-separated guarantee kinds")
    curves.add_argument("--k-range", type=str, default="1-5")
    curves.set_defaults(handler=cmd_curves)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        package_logger = configure_logging()
        if args.verbose:
            package_logger.setLevel(logging.DEBUG)
        return args.handler(args)
    except (ValueError, FileNotFoundError, InfeasibleEnumerationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("\ninterrupted", file=sys.stderr)
        return 130


def cli_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
