"""Command-line front end: ``tsncalc {validate,analyze,curve,simulate,compare}``."""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import analyze_network, service_curve_for
from .errors import (
    InfeasibleError,
    ModelError,
    ParameterError,
    ScopeError,
    TsnCalcError,
    UnboundedError,
)
from .exact import parse_exact, render_decimal
from .minplus import to_csv, zero
from .model import cdt_spec_of, load_model
from .service import POLICIES
from .sim import check_bounds_against_sim, simulate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_UNBOUNDED = 4
EXIT_SCOPE = 5


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _us(q) -> str:
    return render_decimal(q * 10**6, 6)


def report_table(report) -> str:
    """Human-readable summary of a :class:`NetworkReport`."""
    lines = []
    head = f"{'port':<16}{'class':<8}{'mech':<9}{'flows':>6}{'delay [us]':>16}{'backlog [bit]':>18}"
    lines.append(head)
    lines.append("-" * len(head))
    for q in report.queues:
        lines.append(
            f"{q.port:<16}{q.traffic_class:<8}{q.mechanism:<9}{len(q.flows):>6}"
            f"{_us(q.delay_bound):>16}{render_decimal(q.backlog_bound, 8):>18}"
        )
    lines.append("")
    head = f"{'flow':<16}{'hops':>5}{'technical [us]':>18}{'end-to-end [us]':>18}"
    lines.append(head)
    lines.append("-" * len(head))
    for f in report.flows:
        tech = sum(f.technical_delays, 0)
        lines.append(f"{f.flow:<16}{len(f.hops):>5}{_us(tech):>18}{_us(f.end_to_end_delay):>18}")
    return "\n".join(lines) + "\n"


def verdict_table(verdict) -> str:
    lines = []
    head = (
        f"{'port':<16}{'class':<8}{'delay obs/bound [us]':>26}{'ratio':>9}"
        f"{'backlog obs/bound':>24}{'ratio':>9}  ok"
    )
    lines.append(head)
    lines.append("-" * len(head))
    for r in verdict.rows:
        d = f"{_us(parse_exact(r['observedDelay']['exact']))}/{_us(parse_exact(r['delayBound']['exact']))}"
        b = f"{r['observedBacklog']['decimal']}/{r['backlogBound']['decimal']}"
        lines.append(
            f"{r['port']:<16}{r['class']:<8}{d:>26}{r['delayRatio'] or '-':>9}"
            f"{b:>24}{r['backlogRatio'] or '-':>9}  {'yes' if r['ok'] else 'NO'}"
        )
    lines.append(f"verdict: {'PASS' if verdict.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args):
    model = load_model(args.model)
    sw = sum(1 for n in model.nodes if n.kind == "switch")
    print(
        f"{args.model}: valid ({len(model.nodes)} nodes, {sw} switch(es), "
        f"{len(model.ports)} ports, {len(model.flows)} flows)"
    )
    return EXIT_OK


def cmd_analyze(args):
    model = load_model(args.model)
    report = analyze_network(model, args.policy)
    if args.json:
        _write(_dump(report.to_document()), args.out)
        return EXIT_OK
    if args.out:
        _write(_dump(report.to_document()), args.out)
    sys.stdout.write(report_table(report))
    return EXIT_OK


def cmd_curve(args):
    model = load_model(args.model)
    port = model.port(args.port)
    if port.class_entry(args.cls) is None:
        raise ParameterError(f"class {args.cls!r} is not configured at port {args.port!r}")
    report = analyze_network(model, args.policy)
    try:
        qa = report.queue(args.port, args.cls)
    except KeyError:
        qa = None
    if qa is not None:
        curve = {
            "arrival": qa.aggregate_arrival,
            "service": qa.service_curve,
            "output": qa.output_bound,
        }[args.which]
    elif args.which == "service":
        C = model.link_rate(port.id)
        cdt = cdt_spec_of(port, C) if port.cdt_class() is not None else None
        curve = service_curve_for(port, args.cls, C, args.policy, cdt)
    else:
        curve = zero()  # no flows in this queue
    _write(to_csv(curve, parse_exact(args.step), parse_exact(args.horizon)), args.out)
    return EXIT_OK


def cmd_simulate(args):
    model = load_model(args.model)
    report = analyze_network(model, args.policy)
    horizon = parse_exact(args.horizon) if args.horizon else None
    res = simulate(model, horizon, args.traffic, args.seed)
    report.validation = {"simulation": res.to_document()}
    _write(_dump(report.to_document()), args.out)
    if args.out:
        for k in sorted(res.queues):
            s = res.queues[k]
            print(
                f"{s.port} {s.traffic_class}: max delay {_us(s.max_delay)} us, "
                f"max backlog {render_decimal(s.max_backlog)} bit, {s.frames} frames"
            )
    return EXIT_OK


def cmd_compare(args):
    model = load_model(args.model)
    horizon = parse_exact(args.horizon) if args.horizon else None
    verdict = check_bounds_against_sim(model, horizon, args.trials, args.seed, args.policy)
    if args.out:
        report = analyze_network(model, args.policy)
        report.validation = verdict.to_document()
        _write(_dump(report.to_document()), args.out)
    sys.stdout.write(verdict_table(verdict))
    return EXIT_OK if verdict.passed else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsncalc",
        description="Network-calculus delay and backlog bounds for TSN scheduler configurations.",
    )
    parser.add_argument(
        "--policy",
        choices=POLICIES,
        default=None,
        help="guaranteed-slot policy for TAS queues (default: per port, else ideal)",
    )
    # also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--policy", choices=POLICIES, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="parse and check a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", parents=[common], help="compute per-queue and end-to-end bounds")
    p.add_argument("model")
    p.add_argument("--out", help="write the report JSON here")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("curve", parents=[common], help="sample a queue's curve as CSV")
    p.add_argument("model")
    p.add_argument("--port", required=True)
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--which", choices=("arrival", "service", "output"), default="service")
    p.add_argument("--step", required=True, help="sampling step in seconds")
    p.add_argument("--horizon", required=True, help="last sample time in seconds")
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("simulate", parents=[common], help="simulate a single-switch model once")
    p.add_argument("model")
    p.add_argument("--traffic", choices=("greedy", "randomized"), default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", help="simulated time in seconds (default: 4 common periods)")
    p.add_argument("--out", help="write the report JSON with simulation results here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="check bounds against greedy and randomized simulations")
    p.add_argument("model")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", help="simulated time in seconds")
    p.add_argument("--out", help="write the report JSON with the verdict here")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnboundedError as exc:
        print(f"unbounded: {exc}", file=sys.stderr)
        return EXIT_UNBOUNDED
    except ScopeError as exc:
        print(f"out of scope: {exc}", file=sys.stderr)
        return EXIT_SCOPE
    except TsnCalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except KeyError as exc:
        print(f"error: unknown id {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
