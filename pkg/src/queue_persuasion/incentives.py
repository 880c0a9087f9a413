"""Tax schedule construction and truthfulness / participation checks."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .model import Policy, RewardFn, TaxSchedule, utility_closed_form

VERIFY_TOL = 1e-7


@dataclass
class IncentiveReport:
    dsic_ok: bool = True
    ir_ok: bool = True
    monotone_ok: bool = True
    dsic_slacks: dict = field(default_factory=dict)
    ir_slacks: dict = field(default_factory=dict)

    def merge(self, other: "IncentiveReport") -> "IncentiveReport":
        return IncentiveReport(
            dsic_ok=self.dsic_ok and other.dsic_ok,
            ir_ok=self.ir_ok and other.ir_ok,
            monotone_ok=self.monotone_ok and other.monotone_ok,
            dsic_slacks={**self.dsic_slacks, **other.dsic_slacks},
            ir_slacks={**self.ir_slacks, **other.ir_slacks},
        )

    @property
    def ok(self) -> bool:
        return self.dsic_ok and self.ir_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dsic_slacks"] = {f"{i}->{m}": s for (i, m), s in self.dsic_slacks.items()}
        d["ir_slacks"] = {str(i): s for i, s in self.ir_slacks.items()}
        return d


def allocations(policy: Policy, mu, reward: RewardFn) -> tuple[float, float]:
    """``q(i) = sum_x v(x) mu(x) sigma(1|x,i)`` for both types."""
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    weighted = reward.evaluate(len(mu) - 1) * mu
    return float(weighted @ policy.sigma(1)), float(weighted @ policy.sigma(2))


def build_taxes(t0: float, q1: float, q2: float) -> TaxSchedule:
    return TaxSchedule(t0=t0, q1=q1, q2=q2, t1=t0 + q1, t2=t0 + 2 * q2 - q1)


def verify_dsic(taxes: TaxSchedule, q1: float | None = None, q2: float | None = None,
                tol: float = VERIFY_TOL) -> IncentiveReport:
    """Slack of truth-telling over each misreport, from the closed-form utility.

    ``q1``/``q2`` default to the allocations stored on ``taxes``.
    """
    q1 = taxes.q1 if q1 is None else q1
    q2 = taxes.q2 if q2 is None else q2
    t = TaxSchedule(t0=taxes.t0, q1=q1, q2=q2, t1=taxes.t1, t2=taxes.t2)
    slacks = {}
    for i, m in ((1, 2), (2, 1)):
        # truthful utility as paid under the stored taxes
        truthful = i * t.allocation(i) - t.tax(i)
        lie = i * t.allocation(m) - t.tax(m)
        slacks[(i, m)] = truthful - lie
    monotone = q2 >= q1 - tol
    return IncentiveReport(
        dsic_ok=monotone and all(s >= -tol for s in slacks.values()),
        monotone_ok=monotone,
        dsic_slacks=slacks,
    )


def verify_ir(taxes: TaxSchedule, q1: float | None, vbar: float, p: float,
              tol: float = VERIFY_TOL) -> IncentiveReport:
    """Participation slacks ``-t0 - (vbar-p)^+`` and ``q1 - t0 - (2 vbar - p)^+``."""
    q1 = taxes.q1 if q1 is None else q1
    slacks = {
        1: -taxes.t0 - max(vbar - p, 0.0),
        2: q1 - taxes.t0 - max(2 * vbar - p, 0.0),
    }
    return IncentiveReport(ir_ok=all(s >= -tol for s in slacks.values()), ir_slacks=slacks)


def misreport_utilities(taxes: TaxSchedule) -> dict:
    """Closed-form expected utility for each (true type, report) pair."""
    return {(i, m): utility_closed_form(i, m, taxes) for i in (1, 2) for m in (1, 2)}


def revenue(taxes: TaxSchedule, lam: float, type_prior: float = 0.5) -> float:
    """Tax income per unit time, ``lam * E[t(I)]``."""
    return lam * (type_prior * taxes.t1 + (1.0 - type_prior) * taxes.t2)


def outside_option_revenue(lam: float, p: float) -> float:
    """Price income when only type-2 users self-select into the queue."""
    return lam * p / 2
