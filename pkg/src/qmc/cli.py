"""``qmc`` command line: verify, solve, certify, sdp, ratio."""

from __future__ import annotations

import argparse
import json
import sys

from .graph_core import load_graph_json
from .verify_pipeline import PipelineConfig, parse_params, run_algorithm, run_certificates, run_verification

CERTIFICATE_SUITES = ("alpha-table", "triangle-free", "bipartite", "sdp-invariants")


def _cmd_verify(args) -> int:
    cfg = PipelineConfig(s=args.s, inputs=args.g6, workers=args.workers, out=args.out,
                         resume=args.resume, spot_check_rate=args.spot_check,
                         stable_set_size=args.stable_set, tau_discard=args.tau_discard,
                         use_skip_bound=not args.no_skip_bound, chunk_size=args.chunk_size)
    report = run_verification(cfg)
    print(json.dumps(report.to_json(), indent=2))
    return 0 if report.ok else 1


def _cmd_solve(args) -> int:
    params = parse_params(args.alg, args.theta, args.k, args.h_max, args.theta_star)
    seeds = list(range(args.seed, args.seed + args.samples))
    result = run_algorithm(args.graph, args.alg, params, seeds)
    text = json.dumps(result, indent=2, default=float)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(json.dumps(result.get("summary", result), indent=2, default=float))
    else:
        print(text)
    return 2 if "refused" in result else 0


def _cmd_certify(args) -> int:
    ok, lines = run_certificates(args.suite)
    print("\n".join(lines))
    print(f"{args.suite}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _cmd_sdp(args) -> int:
    from .sdp_relax import dump_solution, solution_report, solve_sdp

    sol = solve_sdp(load_graph_json(args.graph), args.k, args.tol)
    if args.dump:
        dump_solution(sol, args.dump, include_matrix=args.matrix)
    report = solution_report(sol)
    short = {key: report[key] for key in ("k", "status", "objective", "edges")}
    short["c"] = sol.objective / 2 - sol.graph.total_weight
    print(json.dumps(short, indent=2, default=float))
    return 0 if sol.optimal else 1


def _cmd_ratio(args) -> int:
    from . import ratio_analysis as ra

    if args.alpha_table:
        ra.write_alpha_table(args.alpha_table)
        print(f"wrote {args.alpha_table}")
    if args.zeta_curve:
        theta = ra.ThetaSpec.parse(args.theta)
        ra.write_zeta_curve(args.zeta_curve, theta, args.mu, args.p)
        print(f"wrote {args.zeta_curve}")
    if args.search_theta:
        res = ra.search_theta(args.mu)
        for family, (spec, p, value) in res.per_family.items():
            print(f"{family:12s} {spec}  p*={p:.4f}  max_p zeta*={value:.6f}")
        print(f"best: {res.best}  value={res.value:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmc", description="Quantum Max-Cut relaxations, roundings and checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check c(G, s) <= floor(s/2) over a graph6 stream")
    v.add_argument("--s", type=int, required=True)
    v.add_argument("--g6", nargs="+", required=True)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out")
    v.add_argument("--resume", action="store_true")
    v.add_argument("--spot-check", type=float, default=0.01)
    v.add_argument("--stable-set", type=int, default=None, help="max stable-set size checked (0 disables)")
    v.add_argument("--tau-discard", action=argparse.BooleanOptionalAction, default=None)
    v.add_argument("--no-skip-bound", action="store_true")
    v.add_argument("--chunk-size", type=int, default=256)
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("solve", help="run a rounding algorithm on a JSON graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--alg", type=int, choices=(1, 2, 3), required=True)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--theta", help="family:R, e.g. linear:0.5 or exponential:2")
    s.add_argument("--h-max", type=float, default=0.876)
    s.add_argument("--theta-star", type=float, default=0.4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_solve)

    c = sub.add_parser("certify", help="run a named check suite")
    c.add_argument("suite", choices=CERTIFICATE_SUITES)
    c.set_defaults(func=_cmd_certify)

    d = sub.add_parser("sdp", help="solve the moment relaxation of a JSON graph")
    d.add_argument("--graph", required=True)
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--tol", type=float)
    d.add_argument("--dump", help="write the solution report to this JSON path")
    d.add_argument("--matrix", action="store_true", help="include the moment matrix in the dump")
    d.set_defaults(func=_cmd_sdp)

    r = sub.add_parser("ratio", help="ratio tables, zeta curves and the Theta search")
    r.add_argument("--alpha-table", help="CSV path for the alpha(mu) table")
    r.add_argument("--zeta-curve", help="CSV path for (x, zeta) pairs")
    r.add_argument("--theta", default="exponential:0.0521")
    r.add_argument("--mu", type=float, default=14 / 15)
    r.add_argument("--p", type=float, default=0.898)
    r.add_argument("--search-theta", action="store_true")
    r.set_defaults(func=_cmd_ratio)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
