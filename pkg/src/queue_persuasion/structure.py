"""Shape checks on an optimal recommendation policy.

An optimum either (case 1) favours type 2 where rewards are positive and type 1
where they are negative, or (case 2) sends both types the same signal below a
blocking threshold, except on a small exceptional set whose states share one
solution ``(eps1, psi)`` of a linear system built from partial sums of
``lam**x * v(x)``.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import Policy, RewardFn, sign_threshold

CASE1 = "case1"
CASE2 = "case2"
INDETERMINATE = "indeterminate"

# representative point reported on the half-line of a single exceptional state
_SINGLE_STATE_EPS = 0.5


@dataclass
class StructureReport:
    case: str
    x0: int | None
    case1_violations: list = field(default_factory=list)
    xtilde: int | None = None
    exceptional_set: list = field(default_factory=list)
    epsilon1: float | None = None
    psi: float | None = None
    residuals: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["case1_violations"] = [{"x": x, "detail": msg} for x, msg in self.case1_violations]
        return d


def case1_violations(policy: Policy, mu, v: np.ndarray, tol: float = 1e-6) -> list:
    """States where the type-priority rule fails; unreachable states are skipped."""
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    s1, s2 = policy.sigma(1), policy.sigma(2)
    out = []
    for x in np.flatnonzero(mu > tol):
        x = int(x)
        if v[x] > tol and s1[x] > tol and s2[x] < 1 - tol:
            out.append((x, f"v>0 and sigma1={s1[x]:.6g} > 0 but sigma2={s2[x]:.6g} < 1"))
        elif v[x] < -tol and s2[x] > tol and s1[x] < 1 - tol:
            out.append((x, f"v<0 and sigma2={s2[x]:.6g} > 0 but sigma1={s1[x]:.6g} < 1"))
    return out


def check_case1(solution, tol: float = 1e-6) -> list:
    return case1_violations(solution.policy, solution.mu, solution.config.rewards(), tol)


def find_xtilde(policy: Policy, tol: float = 1e-6) -> int | None:
    """Smallest state from which neither type is ever told to join."""
    blocked = np.all(policy.admit <= tol, axis=0)
    if not blocked[-1]:
        return None
    open_ = np.flatnonzero(~blocked)
    return int(open_[-1]) + 1 if open_.size else 0


def exceptional_row(x: int, v: np.ndarray, lam: float) -> tuple[float, float, float]:
    """Coefficients ``(a, b, c)`` of ``a*eps1 + b*psi = c`` for state ``x``, scaled so b = 1."""
    w = lam ** np.arange(x + 1, dtype=float)
    b = w.sum()
    a = 2.0 * np.dot(w, v[: x + 1])
    c = np.dot(w[:-1], v[:x])
    return a / b, 1.0, c / b


@dataclass
class ExceptionalFit:
    states: tuple
    epsilon1: float
    psi: float
    residuals: list
    determined: bool
    line: tuple | None = None  # (a, b, c) when only a half-line is pinned down


@dataclass
class ExceptionalSearch:
    accepted: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (states, reason)


def fit_exceptional_states(states: Sequence[int], reward: RewardFn | np.ndarray, lam: float,
                           tol: float = 1e-9, skipped: list | None = None):
    """Shared ``(eps1, psi)`` for a set of exceptional states, or None.

    One state leaves a half-line of solutions ``eps1 > 0``; a representative
    point on it is returned with ``determined=False``.  Two or more states are
    solved from the first nonsingular pair and every remaining equation must
    hold to ``tol``.
    """
    states = tuple(int(x) for x in states)
    if not states:
        return None
    v = _reward_vector(reward, max(states))
    rows = [exceptional_row(x, v, lam) for x in states]
    if len(states) == 1:
        a, b, c = rows[0]
        eps = _SINGLE_STATE_EPS
        return ExceptionalFit(states, eps, (c - a * eps) / b, [0.0], False, line=rows[0])
    sol = None
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(rows, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) <= tol * max(1.0, abs(a1), abs(a2)):
            continue
        sol = ((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det)
        break
    if sol is None:
        if skipped is not None:
            skipped.append((states, "singular system: all equations parallel"))
        return None
    eps, psi = sol
    residuals = [abs(a * eps + b * psi - c) for a, b, c in rows]
    if eps <= 0 or max(residuals) > tol:
        return None
    return ExceptionalFit(states, eps, psi, residuals, True)


def exceptional_candidates(xtilde: int) -> Iterable[tuple]:
    """All single states and unordered pairs below ``xtilde``."""
    for x in range(xtilde):
        yield (x,)
    yield from itertools.combinations(range(xtilde), 2)


def solve_exceptional_system(candidates: Iterable[Sequence[int]], reward, lam: float,
                             tol: float = 1e-9) -> ExceptionalSearch:
    search = ExceptionalSearch()
    for states in candidates:
        fit = fit_exceptional_states(states, reward, lam, tol, skipped=search.skipped)
        if fit is not None:
            search.accepted.append(fit)
    return search


def classify(solution, tol: float = 1e-6) -> StructureReport:
    """Observational case label for a solved design.

    The common-signal pattern is tested first since a pure threshold policy
    satisfies both descriptions; otherwise the type-priority rule decides.
    """
    cfg = solution.config
    v = cfg.rewards()
    mu = np.asarray(solution.mu.mu)
    policy = solution.policy
    report = StructureReport(case=INDETERMINATE, x0=sign_threshold(cfg.reward, cfg.x_max).x0)
    report.case1_violations = case1_violations(policy, mu, v, tol)
    report.xtilde = find_xtilde(policy, tol)

    if report.xtilde is not None:
        xt = report.xtilde
        reach = mu[:xt] > tol
        partial = np.any(policy.admit[:, :xt] < 1 - tol, axis=0) & reach
        exceptional = [int(x) for x in np.flatnonzero(partial)]
        if not exceptional:
            report.case = CASE2
            report.notes.append("common signal everywhere below the threshold; "
                                "exceptional system is vacuous")
            return report
        fit = fit_exceptional_states(exceptional, v, cfg.lam, tol=1e-9)
        if fit is not None:
            report.case = CASE2
            report.exceptional_set = exceptional
            report.epsilon1, report.psi = fit.epsilon1, fit.psi
            report.residuals = list(fit.residuals)
            if not fit.determined:
                report.notes.append("single exceptional state: (eps1, psi) lies on a "
                                    "half-line, representative point reported")
            if len(exceptional) > 2:
                report.notes.append(f"{len(exceptional)} exceptional states share one solution")
            return report
        report.notes.append(f"{len(exceptional)} partially admitted states below the "
                            "threshold admit no common (eps1, psi)")

    if not report.case1_violations:
        report.case = CASE1
    return report


def _reward_vector(reward, x_max: int) -> np.ndarray:
    if isinstance(reward, RewardFn):
        return reward.evaluate(x_max)
    return np.asarray(reward, dtype=float)
