"""Revenue-maximization LP over the joint law of (signal, type, backlog).

Variables are ``gamma[s, i, x]`` for signal ``s in {0, 1}``, type ``i in {1, 2}``,
state ``x in 0..x_max`` (flattened in that order), followed by ``u = -t0 >= 0``.
Only the uniform type prior is supported here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import incentives, simplex
from .incentives import IncentiveReport
from .model import ConfigError, ModelConfig, Policy, TaxSchedule
from .simplex import LpProblem, LpSolution, SolverOptions
from .stationary import StationaryDist, expected_reward, recursion_residual

TAIL_MASS_LIMIT = 1e-8


class UnsupportedConfigError(ConfigError):
    pass


class InconsistentSolutionError(RuntimeError):
    pass


class SolveFailed(RuntimeError):
    def __init__(self, status: str, residuals=None):
        super().__init__(f"designer LP ended with status {status!r}")
        self.status = status
        self.residuals = residuals


@dataclass(frozen=True)
class OccupationMeasure:
    gamma: np.ndarray  # shape (2 signals, 2 types, n_states)

    @property
    def x_max(self) -> int:
        return self.gamma.shape[2] - 1

    @property
    def marginal(self) -> np.ndarray:
        return self.gamma.sum(axis=(0, 1))


def n_variables(x_max: int) -> int:
    return 4 * (x_max + 1) + 1


def var_index(s: int, i: int, x: int, x_max: int) -> int:
    return (2 * s + (i - 1)) * (x_max + 1) + x


def build_lp(config: ModelConfig) -> LpProblem:
    if not math.isclose(config.type_prior, 0.5, abs_tol=1e-15):
        raise UnsupportedConfigError(
            "the occupation-measure LP fixes P(type 1) = P(type 2) = 1/2; "
            f"got type_prior={config.type_prior}")
    N = config.x_max
    S = N + 1
    n = n_variables(N)
    U = n - 1
    lam, p = config.lam, config.price
    v = config.rewards()

    def block(s, i):
        k = 2 * s + (i - 1)
        return slice(k * S, (k + 1) * S)

    names = [f"g[{s},{i},{x}]" for s in (0, 1) for i in (1, 2) for x in range(S)] + ["u"]

    c = np.zeros(n)
    c[block(1, 2)] = 2 * lam * v
    c[U] = -lam

    # v-weighted mass of each gamma block
    mass_v = np.zeros(n)
    for s in (0, 1):
        for i in (1, 2):
            mass_v[block(s, i)] = v
    alloc1 = np.zeros(n)
    alloc1[block(1, 1)] = v
    alloc2 = np.zeros(n)
    alloc2[block(1, 2)] = v
    u = np.zeros(n)
    u[U] = 1.0

    # IR rows, written as <=:
    #   u >= vbar - p                    ->  vbar - u <= p
    #   2 q1' + u >= 2 vbar - p          ->  2 vbar - 2 q1' - u <= p
    #   u >= 0                           ->  -u <= 0 (duplicates the bound, kept for reporting)
    #   2 q1' + u >= 0                   ->  -2 q1' - u <= 0
    #   q2' >= q1'                       ->  q1' - q2' <= 0
    A_ub = np.vstack([
        mass_v - u,
        2 * mass_v - 2 * alloc1 - u,
        -u,
        -2 * alloc1 - u,
        alloc1 - alloc2,
    ])
    b_ub = np.array([p, p, 0.0, 0.0, 0.0])
    ub_labels = ("ir_type1", "ir_type2", "ir_offset", "ir_type2_floor", "monotone")

    eq_rows, eq_labels = [], []
    for x in range(N):
        row = np.zeros(n)
        for s in (0, 1):
            for i in (1, 2):
                row[var_index(s, i, x + 1, N)] = 1.0
        for i in (1, 2):
            row[var_index(1, i, x, N)] -= lam
        eq_rows.append(row)
        eq_labels.append(f"flow[{x}]")
    row = np.zeros(n)
    for i in (1, 2):
        row[var_index(1, i, N, N)] = 1.0
    eq_rows.append(row)
    eq_labels.append("closure")
    for i in (1, 2):
        for x in range(S):
            row = np.zeros(n)
            for s in (0, 1):
                for j in (1, 2):
                    row[var_index(s, j, x, N)] -= 0.5
                row[var_index(s, i, x, N)] += 1.0
            eq_rows.append(row)
            eq_labels.append(f"type[{i},{x}]")
    row = np.ones(n)
    row[U] = 0.0
    eq_rows.append(row)
    eq_labels.append("mass")
    b_eq = np.zeros(len(eq_rows))
    b_eq[-1] = 1.0

    return LpProblem(c=c, A_eq=np.array(eq_rows), b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                     names=tuple(names), eq_labels=tuple(eq_labels), ub_labels=ub_labels)


def export_tableau(problem: LpProblem, path: str | Path) -> None:
    Path(path).write_text(simplex.dumps_tableau(problem))


def split_values(values: np.ndarray, x_max: int) -> tuple[OccupationMeasure, float]:
    """LP vector -> (gamma, t0)."""
    gamma = np.asarray(values[:-1], dtype=float).reshape(2, 2, x_max + 1)
    return OccupationMeasure(np.maximum(gamma, 0.0)), 0.0 - float(values[-1])


def embed(policy: Policy, mu, t0: float) -> np.ndarray:
    """LP vector for a (policy, stationary law, offset) triple under the uniform prior."""
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    sig = policy.admit[:, : len(mu)]
    gamma = np.stack([0.5 * mu * (1 - sig), 0.5 * mu * sig])
    return np.concatenate([gamma.ravel(), [-t0]])


def recover_policy(gamma: OccupationMeasure, tol: float = 1e-9) -> tuple[Policy, list]:
    """Conditional join probabilities; states with no type mass get 0 and are listed."""
    g = gamma.gamma
    denom = g.sum(axis=0)  # (type, state)
    reachable = denom > tol
    admit = np.zeros_like(denom)
    np.divide(g[1], denom, out=admit, where=reachable)
    admit = np.clip(admit, 0.0, 1.0)
    unreachable = sorted(set(np.flatnonzero(~reachable.all(axis=0)).tolist()))
    return Policy(admit), unreachable


def recover_marginals(gamma: OccupationMeasure, lam: float | None = None,
                      policy: Policy | None = None, tol: float = 1e-9,
                      reward=None) -> StationaryDist:
    """Backlog marginal of gamma.

    When ``lam`` and ``policy`` are given the result is checked against the
    birth-death recursion and a residual above ``100 * tol`` raises.
    """
    mu = gamma.marginal
    if lam is not None and policy is not None:
        worst = recursion_residual(mu, policy, lam).max(initial=0.0)
        if worst > 100 * tol:
            raise InconsistentSolutionError(
                f"recovered marginal violates the stationary recursion by {worst:.3g}")
    vbar = expected_reward(mu, reward) if reward is not None else None
    return StationaryDist(mu=mu, tail_mass=float(mu[-1]), vbar=vbar)


@dataclass
class DesignSolution:
    config: ModelConfig
    policy: Policy
    mu: StationaryDist
    taxes: TaxSchedule
    occupation: OccupationMeasure
    objective_value: float
    incentives: IncentiveReport
    diagnostics: dict = field(default_factory=dict)

    @property
    def revenue(self) -> float:
        return self.objective_value

    @property
    def truncation_ok(self) -> bool:
        return self.mu.tail_mass <= TAIL_MASS_LIMIT


def assemble_solution(lp_solution: LpSolution, config: ModelConfig,
                      problem: LpProblem | None = None,
                      verify_tol: float = incentives.VERIFY_TOL) -> DesignSolution:
    if not lp_solution.optimal:
        residuals = None
        if problem is not None and lp_solution.values is not None:
            residuals = simplex.check_solution(problem, lp_solution)
        raise SolveFailed(lp_solution.status, residuals)
    N = config.x_max
    gamma, t0 = split_values(lp_solution.values, N)
    policy, unreachable = recover_policy(gamma, config.tol)
    # the reported residual is diagnostic; the hard check uses the verification tolerance
    mu = recover_marginals(gamma, config.lam, policy, tol=verify_tol, reward=config.reward)
    q1, q2 = incentives.allocations(policy, mu, config.reward)
    taxes = incentives.build_taxes(t0, q1, q2)
    report = incentives.verify_dsic(taxes, tol=verify_tol).merge(
        incentives.verify_ir(taxes, q1, mu.vbar, config.price, tol=verify_tol))
    v = config.rewards()
    objective = config.lam * t0 + 2 * config.lam * float(v @ gamma.gamma[1, 1])
    diagnostics = {
        "lp_objective": lp_solution.objective,
        "iterations": lp_solution.iterations,
        "max_residual": lp_solution.max_residual,
        "recursion_residual": float(recursion_residual(mu, policy, config.lam).max(initial=0.0)),
        "tail_mass": mu.tail_mass,
        "truncation_ok": mu.tail_mass <= TAIL_MASS_LIMIT,
        "unreachable_states": unreachable,
        "degenerate_states": [int(x) for x in np.flatnonzero(mu.mu <= config.tol)],
    }
    if problem is not None:
        rep = simplex.check_solution(problem, lp_solution)
        diagnostics.update(eq_residual=rep.eq_residual, ineq_violation=rep.ineq_violation,
                           negativity=rep.negativity)
    return DesignSolution(config, policy, mu, taxes, gamma, objective, report, diagnostics)


def solve_design(config: ModelConfig, options: SolverOptions | None = None) -> DesignSolution:
    """Build, solve and unpack the designer LP for ``config``."""
    problem = build_lp(config)
    lp_solution = simplex.solve(problem, options)
    return assemble_solution(lp_solution, config, problem)
