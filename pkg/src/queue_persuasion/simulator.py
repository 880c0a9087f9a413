"""Event-driven simulation of the queue under a committed mechanism.

Arrivals are Poisson(lam); service is exponential with rate 1 whenever the
backlog is positive.  Occupancy is time-weighted, so ``empirical_mu`` estimates
the continuous-time stationary law directly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import incentives
from .model import ModelConfig, Policy, TaxSchedule, outside_option
from .stationary import stationary_distribution

_BATCH = 1 << 16


@dataclass
class SimStats:
    empirical_mu: np.ndarray
    events: dict
    revenue_rate: float
    revenue_se: float
    seed: int
    sim_time: float
    participates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["empirical_mu"] = self.empirical_mu.tolist()
        return d


def participation(config: ModelConfig, policy: Policy, taxes: TaxSchedule,
                  tol: float = incentives.VERIFY_TOL) -> tuple[dict, dict, float]:
    """Which types hear the recommendation and, for the rest, whether they join.

    Uses the analytic stationary law of ``policy``; returns
    ``(participates, self_join, vbar)`` keyed by type.
    """
    dist = stationary_distribution(policy, config.lam, config.type_prior,
                                   reward=config.reward)
    ir = incentives.verify_ir(taxes, taxes.q1, dist.vbar, config.price, tol)
    participates = {i: ir.ir_slacks[i] >= -tol for i in (1, 2)}
    self_join = {i: outside_option(i, dist.vbar, config.price) for i in (1, 2)}
    return participates, self_join, dist.vbar


def simulate(config: ModelConfig, policy: Policy, taxes: TaxSchedule, horizon: float,
             seed: int = 0) -> SimStats:
    if not (isinstance(horizon, (int, float)) and math.isfinite(horizon) and horizon > 0):
        raise ValueError(f"horizon must be a positive finite number, got {horizon!r}")
    rng = np.random.default_rng(seed)
    lam, x_max = config.lam, config.x_max
    participates, self_join, _ = participation(config, policy, taxes)
    sig1 = policy.sigma(1).tolist()
    sig2 = policy.sigma(2).tolist()
    tax = (taxes.t1, taxes.t2)

    occupancy = [0.0] * (x_max + 1)
    counts = {k: [0, 0] for k in ("arrivals", "joins", "balks", "participants", "truncations")}
    services = 0
    paid = paid_sq = 0.0

    t = 0.0
    x = 0
    k = _BATCH
    while True:
        if k == _BATCH:
            expo = rng.standard_exponential(_BATCH).tolist()
            u_event = rng.random(_BATCH).tolist()
            u_type = rng.random(_BATCH).tolist()
            u_sig = rng.random(_BATCH).tolist()
            k = 0
        rate = lam + (1.0 if x > 0 else 0.0)
        dt = expo[k] / rate
        if t + dt >= horizon:
            occupancy[x] += horizon - t
            break
        occupancy[x] += dt
        t += dt
        if x > 0 and u_event[k] * rate >= lam:
            x -= 1
            services += 1
        else:
            typ = 0 if u_type[k] < config.type_prior else 1
            counts["arrivals"][typ] += 1
            if participates[typ + 1]:
                counts["participants"][typ] += 1
                paid += tax[typ]
                paid_sq += tax[typ] * tax[typ]
                admit = (sig1 if typ == 0 else sig2)[x]
                join = u_sig[k] < admit
            else:
                join = self_join[typ + 1] == 1
            if join and x == x_max:
                counts["truncations"][typ] += 1
                join = False
            if join:
                counts["joins"][typ] += 1
                x += 1
            else:
                counts["balks"][typ] += 1
        k += 1

    occ = np.array(occupancy)
    events = {name: {"type1": c[0], "type2": c[1]} for name, c in counts.items()}
    events["services"] = services
    return SimStats(
        empirical_mu=occ / occ.sum(),
        events=events,
        revenue_rate=paid / horizon,
        # compound-Poisson variance of the collected total
        revenue_se=math.sqrt(paid_sq) / horizon,
        seed=seed,
        sim_time=float(horizon),
        participates={str(i): bool(p) for i, p in participates.items()},
    )


def empirical_revenue(stats: SimStats) -> float:
    if not stats.sim_time > 0:
        raise ValueError("simulation time must be positive")
    return stats.revenue_rate


def total_variation(p, q) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    n = max(p.size, q.size)
    p = np.pad(p, (0, n - p.size))
    q = np.pad(q, (0, n - q.size))
    return 0.5 * float(np.abs(p - q).sum())


def merge(stats: list[SimStats]) -> np.ndarray:
    """Time-weighted average occupancy over replicas, in the order given."""
    total = sum(s.sim_time for s in stats)
    return sum(s.empirical_mu * s.sim_time for s in stats) / total
