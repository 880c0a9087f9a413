"""Command-line front end: ``solve``, ``verify``, ``simulate`` and ``sweep``.

Exit codes: 0 success, 1 verification failure, 2 solver failure, 3 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import files, incentives, lp_builder, simulator, structure
from .model import ConfigError, ModelConfig
from .simplex import SimplexError
from .stationary import recursion_residual

EXIT_OK, EXIT_VERIFY, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2, 3

RECURSION_TOL = 1e-6
STRUCTURE_TOL = 1e-6
SWEEP_HEADER = ["price", "status", "revenue", "outside_option_revenue",
                "beats_outside_option", "case", "xtilde"]

log = logging.getLogger("queue_persuasion")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_config_path() -> Path:
    return Path(str(resources.files("queue_persuasion") / "data" / "reference.json"))


def load_config(args, price: float | None = None) -> ModelConfig:
    path = args.config or default_config_path()
    try:
        cfg = ModelConfig.from_json(path)
        return cfg.with_overrides(x_max=args.xmax, tol=args.tol, price=price)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except (ConfigError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad config {path}: {exc}") from None


def solve_summary(cfg: ModelConfig) -> tuple[dict, lp_builder.DesignSolution | None]:
    """Solve one configuration; the summary dict is filled even on failure."""
    summary = {"config": cfg.to_dict(), "status": "optimal"}
    start = time.perf_counter()
    try:
        sol = lp_builder.solve_design(cfg)
    except lp_builder.SolveFailed as exc:
        summary["status"] = exc.status
        if exc.residuals is not None:
            summary["solver"] = {"max_residual": exc.residuals.max_residual}
        return summary, None
    except (SimplexError, lp_builder.InconsistentSolutionError) as exc:
        summary["status"] = "error"
        summary["error"] = str(exc)
        return summary, None
    elapsed = time.perf_counter() - start
    report = structure.classify(sol, STRUCTURE_TOL)
    outside = incentives.outside_option_revenue(cfg.lam, cfg.price)
    revenue = incentives.revenue(sol.taxes, cfg.lam, cfg.type_prior)
    summary.update(
        revenue=revenue,
        lp_objective=sol.objective_value,
        taxes=sol.taxes.to_dict(),
        vbar=sol.mu.vbar,
        incentives=sol.incentives.to_dict(),
        structure=report.to_dict(),
        outside_option_revenue=outside,
        beats_outside_option=revenue > outside,
        solver=sol.diagnostics,
        timing={"solve_seconds": elapsed},
    )
    return summary, sol


def cmd_solve(args) -> int:
    cfg = load_config(args, args.price[-1] if args.price else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary, sol = solve_summary(cfg)
    files.write_json(out / files.SUMMARY_FILE, summary)
    if sol is None:
        print(f"solver failed: {summary['status']}", file=sys.stderr)
        return EXIT_SOLVER
    files.write_policy_csv(out / files.POLICY_FILE, cfg.rewards(), sol.policy, sol.mu)
    print(f"revenue {summary['revenue']:.6f}  outside option {summary['outside_option_revenue']:.6f}"
          f"  case {summary['structure']['case']}")
    if not sol.truncation_ok:
        print(f"warning: tail mass {sol.mu.tail_mass:.3g} exceeds "
              f"{lp_builder.TAIL_MASS_LIMIT:g}; increase --xmax", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def verify_loaded(sol: files.LoadedSolution) -> list[tuple[str, bool, str]]:
    """Every file-level check as ``(name, passed, detail)``."""
    cfg, taxes, summary = sol.config, sol.taxes, sol.summary
    v = cfg.rewards()
    mu = sol.mu.mu
    checks = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    add("rewards", np.allclose(sol.rewards, v, rtol=0, atol=1e-12),
        "v_x column disagrees with the configured reward")
    add("normalization", abs(mu.sum() - 1) <= RECURSION_TOL and mu.min() >= -1e-12,
        f"mu sums to {mu.sum():.12g}")
    res = recursion_residual(mu, sol.policy, cfg.lam, cfg.type_prior)
    worst = int(res.argmax()) if res.size else 0
    add("recursion", res.max(initial=0.0) <= RECURSION_TOL,
        f"residual {res.max(initial=0.0):.3g} between states {worst} and {worst + 1}")
    add("truncation", sol.mu.tail_mass <= lp_builder.TAIL_MASS_LIMIT,
        f"tail mass {sol.mu.tail_mass:.3g}")

    q1, q2 = incentives.allocations(sol.policy, mu, cfg.reward)
    add("allocations", abs(q1 - taxes.q1) <= incentives.VERIFY_TOL
        and abs(q2 - taxes.q2) <= incentives.VERIFY_TOL,
        f"policy gives q1={q1:.9g}, q2={q2:.9g}; summary has q1={taxes.q1:.9g}, q2={taxes.q2:.9g}")
    built = incentives.build_taxes(taxes.t0, taxes.q1, taxes.q2)
    add("taxes", abs(built.t1 - taxes.t1) <= 1e-9 and abs(built.t2 - taxes.t2) <= 1e-9,
        "t1/t2 do not follow from t0, q1, q2")
    dsic = incentives.verify_dsic(taxes)
    add("dsic", dsic.dsic_ok,
        f"q2-q1={taxes.q2 - taxes.q1:.3g}, slacks {dsic.to_dict()['dsic_slacks']}")
    ir = incentives.verify_ir(taxes, taxes.q1, sol.mu.vbar, cfg.price)
    add("ir", ir.ir_ok, f"slacks {ir.to_dict()['ir_slacks']}")
    revenue = incentives.revenue(taxes, cfg.lam, cfg.type_prior)
    add("revenue", abs(revenue - summary.get("revenue", np.nan)) <= 1e-9,
        f"taxes imply {revenue:.12g}, summary has {summary.get('revenue')}")

    report = structure.classify(sol, STRUCTURE_TOL)
    expected = summary.get("structure", {}).get("case")
    detail = "; ".join(f"state {x}: {msg}" for x, msg in report.case1_violations)
    add("structure", report.case != structure.INDETERMINATE and
        (expected is None or report.case == expected),
        f"classified {report.case} (summary says {expected}); {detail}")
    return checks


def cmd_verify(args) -> int:
    try:
        sol = files.load_solution_dir(args.out)
    except files.MissingArtifactError as exc:
        raise UsageError(str(exc)) from None
    except (KeyError, ValueError, ConfigError) as exc:
        raise UsageError(f"unreadable solution files: {exc}") from None
    checks = verify_loaded(sol)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + ("" if ok else f": {detail}"))
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_VERIFY


def cmd_simulate(args) -> int:
    try:
        sol = files.load_solution_dir(args.out)
    except files.MissingArtifactError as exc:
        raise UsageError(str(exc)) from None
    cfg = sol.config
    seeds = args.seed or [0, 1, 2]
    analytic_rev = incentives.revenue(sol.taxes, cfg.lam, cfg.type_prior)
    replicas, all_stats = [], []
    for seed in seeds:
        stats = simulator.simulate(cfg, sol.policy, sol.taxes, args.horizon, seed)
        all_stats.append(stats)
        tv = simulator.total_variation(stats.empirical_mu, sol.mu.mu)
        replicas.append({
            "seed": seed,
            "tv_distance": tv,
            "revenue_rate": stats.revenue_rate,
            "revenue_se": stats.revenue_se,
            "revenue_within_3se": abs(stats.revenue_rate - analytic_rev) <= 3 * stats.revenue_se,
            "stats": stats.to_dict(),
        })
        print(f"seed {seed}: TV {tv:.4f}  revenue {stats.revenue_rate:.5f} "
              f"(analytic {analytic_rev:.5f}, se {stats.revenue_se:.2g})")
    pooled = simulator.merge(all_stats)
    report = {
        "horizon": args.horizon,
        "analytic_revenue": analytic_rev,
        "analytic_mu": sol.mu.mu.tolist(),
        "pooled_empirical_mu": pooled.tolist(),
        "pooled_tv_distance": simulator.total_variation(pooled, sol.mu.mu),
        "replicas": replicas,
    }
    files.write_json(Path(args.out) / "sim_report.json", report)
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for price in args.price or []:
        summary, sol = solve_summary(base.with_overrides(price=price))
        outside = incentives.outside_option_revenue(base.lam, price)
        if sol is None:
            rows.append([price, summary["status"], "", outside, "", "", ""])
            continue
        st = summary["structure"]
        rows.append([price, "optimal", summary["revenue"], outside,
                     summary["beats_outside_option"], st["case"],
                     "" if st["xtilde"] is None else st["xtilde"]])
        print(f"p={price}: revenue {summary['revenue']:.6f}  outside {outside:.6f}  {st['case']}")
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        w.writerows(rows)
    return EXIT_OK if all(r[1] == "optimal" for r in rows) else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="model JSON (default: bundled numerical setting)")
    common.add_argument("--out", default="out", help="solution / output directory")
    common.add_argument("--xmax", type=int, help="override truncation level")
    common.add_argument("--tol", type=float, help="override numerical tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="queue-persuasion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("solve", parents=[common], help="solve the designer LP")
    p.add_argument("--price", type=float, action="append", help="override the config price")
    p.set_defaults(func=cmd_solve)
    p = sub.add_parser("verify", parents=[common], help="re-check a solve directory")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("simulate", parents=[common], help="simulate a solved mechanism")
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--seed", type=int, action="append")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("sweep", parents=[common], help="solve for several prices")
    p.add_argument("--price", type=float, action="append")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
