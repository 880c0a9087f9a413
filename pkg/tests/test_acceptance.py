"""Acceptance gate: one PASS/FAIL line per criterion, at the stated tolerances."""

import csv
import json
import time

import numpy as np
import pytest

from oracles import planted_table, random_lp, vertex_enumeration
from queue_persuasion import incentives, lp_builder, simulator, structure
from queue_persuasion.cli import main
from queue_persuasion.model import ModelConfig, Policy, RewardFn, reference_config
from queue_persuasion.simplex import LpProblem, solve
from queue_persuasion.stationary import recursion_residual, stationary_distribution


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title}  [{detail}]")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_criterion_01_revenue_without_price(report, ref_p0):
    start = time.perf_counter()
    at150 = lp_builder.solve_design(reference_config(0.0, x_max=150))
    elapsed = time.perf_counter() - start
    revs = [ref_p0.revenue, at150.revenue]
    ok = all(abs(r - 0.0786) <= 0.002 for r in revs) and elapsed < 30
    report(1, "revenue at p=0 is 0.0786 +- 0.002", ok,
           f"x_max=200: {revs[0]:.6f}, x_max=150: {revs[1]:.6f}, solve {elapsed:.1f}s")


def test_criterion_02_revenue_with_price(report, ref_p02):
    rev = ref_p02.revenue
    report(2, "revenue at p=0.2 is 0.2693 +- 0.003", abs(rev - 0.2693) <= 0.003, f"{rev:.6f}")


def test_criterion_03_outside_option_benchmark(report, tmp_path):
    code = main(["sweep", "--price", "0", "--price", "0.2", "--out", str(tmp_path)])
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    outside = [float(r["outside_option_revenue"]) for r in rows]
    beats = [float(r["revenue"]) > float(r["outside_option_revenue"]) for r in rows]
    ok = (code == 0 and len(rows) == 2 and abs(outside[0]) <= 1e-12
          and abs(outside[1] - 0.12) <= 1e-12 and all(beats)
          and all(r["beats_outside_option"] == "True" for r in rows))
    report(3, "sweep reports lam*p/2 and the design beats it", ok,
           "; ".join(f"p={r['price']}: {float(r['revenue']):.4f} vs {r['outside_option_revenue']}"
                     for r in rows))


def test_criterion_04_structure(report, ref_p0, ref_p02):
    tol = 1e-6
    reps = [structure.classify(s, tol) for s in (ref_p0, ref_p02)]
    ok = all(r.case == structure.CASE1 and not r.case1_violations for r in reps)
    sol = ref_p02
    v, mu = sol.config.rewards(), sol.mu.mu
    cut = reps[1].xtilde if reps[1].xtilde is not None else v.size
    reach = (mu > tol) & (np.arange(v.size) < cut)
    bad2 = [x for x in np.flatnonzero(reach & (v > 0)) if sol.policy.sigma(2)[x] < 1 - tol]
    bad1 = [x for x in np.flatnonzero(reach & (v < 0)) if sol.policy.sigma(1)[x] < 1 - tol]
    ok = ok and not bad1 and not bad2
    report(4, "both optima are type-priority (case 1) with the expected shape", ok,
           f"cases {[r.case for r in reps]}, shape misses type2 {bad2} type1 {bad1}")


def test_criterion_05_stationarity(report, ref_p0, ref_p02):
    worst_rec = worst_trip = 0.0
    for sol in (ref_p0, ref_p02):
        cfg = sol.config
        pol, _ = lp_builder.recover_policy(sol.occupation, cfg.tol)
        marg = sol.occupation.marginal
        worst_rec = max(worst_rec, recursion_residual(marg, pol, cfg.lam).max())
        redo = stationary_distribution(pol, cfg.lam, reward=cfg.reward).mu
        worst_trip = max(worst_trip, np.abs(redo - marg).max())
    report(5, "recovered marginals satisfy the birth-death recursion",
           worst_rec <= 1e-6 and worst_trip <= 1e-6,
           f"recursion {worst_rec:.2e}, round trip {worst_trip:.2e}")


def test_criterion_06_incentives(report, ref_p0, ref_p02):
    details, ok = [], True
    for name, sol in (("p=0", ref_p0), ("p=0.2", ref_p02)):
        t = sol.taxes
        dsic = incentives.verify_dsic(t)
        ir = incentives.verify_ir(t, t.q1, sol.mu.vbar, sol.config.price)
        gap = t.q2 - t.q1
        mono = t.q2 >= t.q1 - 1e-7
        sym = all(abs(s - gap) <= 1e-9 for s in dsic.dsic_slacks.values())
        irok = all(s >= -1e-7 for s in ir.ir_slacks.values())
        ok = ok and mono and sym and irok
        details.append(f"{name}: q2-q1={gap:.6g}, slack(1->2)={dsic.dsic_slacks[(1, 2)]:.6g}, "
                       f"slack(2->1)={dsic.dsic_slacks[(2, 1)]:.6g}, "
                       f"IR min={min(ir.ir_slacks.values()):.2e}")
    report(6, "monotone allocations, DSIC slacks both equal q2-q1, IR holds", ok,
           "; ".join(details))


def test_criterion_07_solver_oracle(report):
    worst, failures = 0.0, []
    for seed in range(50):
        c, A_ub, b_ub, A_eq, b_eq = random_lp(seed)
        assert c.size <= 6 and A_ub.shape[0] + A_eq.shape[0] <= 8
        expect = vertex_enumeration(c, A_ub, b_ub, A_eq, b_eq)
        for bland_after in (2000, 0):
            sol = solve(LpProblem(c=c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq),
                        bland_after=bland_after, max_iters=10_000)
            err = abs(sol.objective - expect) if sol.optimal else np.inf
            worst = max(worst, err)
            if err > 1e-8:
                failures.append(seed)
    report(7, "50 random LPs match vertex enumeration", not failures,
           f"max error {worst:.2e}, failing seeds {failures}")


def test_criterion_08_simulation(report, ref_p02):
    cfg = ModelConfig(lam=0.5, price=0.0, reward=RewardFn.quadratic(50), x_max=60)
    geo = 0.5 * 0.5 ** np.arange(61)
    free = incentives.build_taxes(0.0, 0.0, 0.0)
    tvs = [simulator.total_variation(
        simulator.simulate(cfg, Policy.constant(60, 1.0), free, 1e6, seed).empirical_mu, geo)
        for seed in (0, 1, 2)]
    start = time.perf_counter()
    stats = simulator.simulate(ref_p02.config, ref_p02.policy, ref_p02.taxes, 1e6, seed=0)
    elapsed = time.perf_counter() - start
    target = incentives.revenue(ref_p02.taxes, ref_p02.config.lam)
    ok = max(tvs) < 0.02 and abs(stats.revenue_rate - target) <= 3 * stats.revenue_se \
        and elapsed < 60
    report(8, "simulator agrees with the geometric law and the analytic revenue", ok,
           f"TV {[round(t, 4) for t in tvs]}, revenue {stats.revenue_rate:.5f} vs {target:.5f} "
           f"(se {stats.revenue_se:.1e}), replica {elapsed:.1f}s")


def test_criterion_09_exceptional_system(report):
    v = planted_table(eps=0.3, psi=-0.2, pair=(2, 4))
    search = structure.solve_exceptional_system(structure.exceptional_candidates(6), v, 1.2)
    planted = [f for f in search.accepted if f.states == (2, 4)]
    ok = (len(planted) == 1 and abs(planted[0].epsilon1 - 0.3) <= 1e-9
          and abs(planted[0].psi + 0.2) <= 1e-9
          and all(f.epsilon1 > 0 for f in search.accepted))
    detail = (f"eps1={planted[0].epsilon1:.12f}, psi={planted[0].psi:.12f}" if planted
              else "planted pair not accepted")
    report(9, "planted (eps1, psi) recovered from the backwards-built table", ok, detail)


def _tamper_policy(directory, fn):
    path = directory / "policy.csv"
    with open(path) as fh:
        rows = list(csv.reader(fh))
    fn(rows)
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def test_criterion_10_tamper_detection(report, tmp_path, capsys):
    import shutil
    base = tmp_path / "base"
    assert main(["solve", "--out", str(base)]) == 0

    def case1(d):
        def edit(rows):
            rows[11][2], rows[11][3] = "1.0", "0.5"
        _tamper_policy(d, edit)

    def monotone(d):
        s = json.loads((d / "summary.json").read_text())
        s["taxes"]["q2"] = s["taxes"]["q1"] - 0.05
        (d / "summary.json").write_text(json.dumps(s))

    def recursion(d):
        def edit(rows):
            rows[6][4] = repr(float(rows[6][4]) + 1e-3)
            rows[7][4] = repr(float(rows[7][4]) - 1e-3)
        _tamper_policy(d, edit)

    results = []
    for name, tamper, check in (("case-1 injection", case1, "structure"),
                                ("q-monotonicity", monotone, "dsic"),
                                ("recursion", recursion, "recursion")):
        d = tmp_path / name.replace(" ", "_")
        shutil.copytree(base, d)
        tamper(d)
        capsys.readouterr()
        code = main(["verify", "--out", str(d)])
        out = capsys.readouterr().out
        results.append((name, code != 0 and f"FAIL {check}" in out, code))
    report(10, "verify rejects each tampered solve directory", all(r[1] for r in results),
           ", ".join(f"{n}: exit {c}" for n, _, c in results))
