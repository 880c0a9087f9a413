"""Stationary backlog law of the birth-death queue induced by a policy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Policy, RewardFn


@dataclass(frozen=True)
class StationaryDist:
    mu: np.ndarray
    tail_mass: float
    vbar: float | None = None

    @property
    def x_max(self) -> int:
        return len(self.mu) - 1


def join_rate(policy: Policy, type_prior: float) -> np.ndarray:
    """Per-state probability that an arrival is told to join."""
    return type_prior * policy.sigma(1) + (1.0 - type_prior) * policy.sigma(2)


def stationary_distribution(policy: Policy, lam: float, type_prior: float = 0.5,
                            x_max: int | None = None, tol: float = 1e-9,
                            reward: RewardFn | None = None) -> StationaryDist:
    """Normalized solution of ``mu(x+1) = lam * mu(x) * P(join | x)``.

    The product of ratios is accumulated in log space, so geometric growth for
    ``lam > 1`` cannot overflow.  Admission at ``x_max`` is ignored (the top
    state reflects).
    """
    x_max = policy.x_max if x_max is None else x_max
    if x_max > policy.x_max:
        raise ValueError(f"policy covers 0..{policy.x_max}, asked for 0..{x_max}")
    a = join_rate(policy, type_prior)[:x_max]
    with np.errstate(divide="ignore"):
        steps = np.log(lam * a)
    logw = np.concatenate([[0.0], np.cumsum(steps)])
    if not np.all(np.isfinite(logw) | (logw == -np.inf)):
        raise FloatingPointError("non-finite stationary weights")
    w = np.exp(logw - logw.max())
    mu = w / w.sum()
    vbar = expected_reward(mu, reward) if reward is not None else None
    return StationaryDist(mu=mu, tail_mass=float(mu[-1]), vbar=vbar)


def expected_reward(mu, reward: RewardFn) -> float:
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    return float(np.dot(reward.evaluate(len(mu) - 1), mu))


def recursion_residual(mu, policy: Policy, lam: float, type_prior: float = 0.5) -> np.ndarray:
    """``|mu(x+1) - lam mu(x) P(join|x)|`` for ``x < x_max``."""
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    a = join_rate(policy, type_prior)[: len(mu) - 1]
    return np.abs(mu[1:] - lam * mu[:-1] * a)
