"""Domain types for the admission-recommendation model.

States are 0-based backlog levels ``0..x_max``; user types are ``1`` and ``2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

TYPES = (1, 2)


class ConfigError(ValueError):
    """Raised for malformed or unsupported model configurations."""


@dataclass(frozen=True)
class RewardFn:
    """Reward ``v(x)`` received by a unit-type user joining at backlog ``x``.

    Two forms are supported: ``quadratic`` evaluates ``1 - (x/scale)**2`` and
    ``table`` looks the value up in ``values``.
    """

    kind: str
    scale: float | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "quadratic":
            if self.scale is None or not self.scale > 0:
                raise ConfigError("quadratic reward needs a positive scale")
        elif self.kind == "table":
            if not self.values:
                raise ConfigError("table reward needs a non-empty value list")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        else:
            raise ConfigError(f"unknown reward kind {self.kind!r}")

    @classmethod
    def quadratic(cls, scale: float) -> "RewardFn":
        return cls("quadratic", scale=float(scale))

    @classmethod
    def table(cls, values: Sequence[float]) -> "RewardFn":
        return cls("table", values=tuple(values))

    def __call__(self, x: int) -> float:
        return reward_at(self, x)

    def evaluate(self, x_max: int) -> np.ndarray:
        """Vector ``[v(0), ..., v(x_max)]``."""
        if self.kind == "quadratic":
            xs = np.arange(x_max + 1, dtype=float)
            return 1.0 - (xs / self.scale) ** 2
        if len(self.values) < x_max + 1:
            raise ConfigError(
                f"table reward has {len(self.values)} entries, needs {x_max + 1}"
            )
        return np.asarray(self.values[: x_max + 1], dtype=float)

    def to_dict(self) -> dict:
        if self.kind == "quadratic":
            return {"kind": "quadratic", "scale": self.scale}
        return {"kind": "table", "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "RewardFn":
        kind = data.get("kind")
        if kind == "quadratic":
            return cls.quadratic(data["scale"])
        if kind == "table":
            return cls.table(data["values"])
        raise ConfigError(f"unknown reward kind {kind!r}")


def reward_at(reward: RewardFn, x: int) -> float:
    if reward.kind == "quadratic":
        return 1.0 - (x / reward.scale) ** 2
    if not 0 <= x < len(reward.values):
        raise IndexError(f"state {x} outside reward table 0..{len(reward.values) - 1}")
    return reward.values[x]


@dataclass(frozen=True)
class SignThreshold:
    x0: int | None
    monotone: bool


def sign_threshold(reward: RewardFn, x_max: int) -> SignThreshold:
    """First state with ``v(x) <= 0`` (``None`` if v stays positive).

    ``monotone`` is False when the reward increases somewhere on ``0..x_max``;
    the returned state is then only the first sign change.
    """
    v = reward.evaluate(x_max)
    monotone = bool(np.all(np.diff(v) <= 0))
    nonpos = np.flatnonzero(v <= 0)
    x0 = int(nonpos[0]) if nonpos.size else None
    return SignThreshold(x0, monotone)


def outside_option(i: int, vbar: float, p: float) -> int:
    """Join decision of a type-``i`` user who declines the recommendation."""
    return 1 if i * vbar - p >= 0 else 0


@dataclass(frozen=True)
class ModelConfig:
    lam: float
    price: float
    reward: RewardFn
    type_prior: float = 0.5
    x_max: int = 200
    tol: float = 1e-9

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"arrival rate must be positive, got {self.lam}")
        if not (math.isfinite(self.price) and self.price >= 0):
            raise ConfigError(f"price must be nonnegative, got {self.price}")
        if not 0 <= self.type_prior <= 1:
            raise ConfigError(f"type_prior must lie in [0, 1], got {self.type_prior}")
        if int(self.x_max) != self.x_max or self.x_max < 1:
            raise ConfigError(f"x_max must be an integer >= 1, got {self.x_max}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        # table rewards must cover every state
        self.reward.evaluate(int(self.x_max))

    @property
    def priors(self) -> np.ndarray:
        """``[P(type 1), P(type 2)]``."""
        return np.array([self.type_prior, 1.0 - self.type_prior])

    def rewards(self) -> np.ndarray:
        return self.reward.evaluate(self.x_max)

    def with_overrides(self, **changes) -> "ModelConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "price": self.price,
            "type_prior": self.type_prior,
            "reward": self.reward.to_dict(),
            "x_max": self.x_max,
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        try:
            return cls(
                lam=float(data["lambda"]),
                price=float(data["price"]),
                reward=RewardFn.from_dict(data["reward"]),
                type_prior=float(data.get("type_prior", 0.5)),
                x_max=int(data.get("x_max", 200)),
                tol=float(data.get("tol", 1e-9)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc.args[0]!r}") from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ModelConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def reference_config(price: float = 0.0, x_max: int = 200) -> ModelConfig:
    """The numerical setting used throughout: rate 1.2, ``v(x) = 1 - (x/50)^2``."""
    return ModelConfig(lam=1.2, price=price, reward=RewardFn.quadratic(50), x_max=x_max)


@dataclass(frozen=True)
class Policy:
    """Join-recommendation probabilities; ``admit[i-1, x]`` is sigma(1 | x, i)."""

    admit: np.ndarray

    def __post_init__(self):
        a = np.array(self.admit, dtype=float)
        if a.ndim != 2 or a.shape[0] != 2:
            raise ValueError(f"admit must have shape (2, n_states), got {a.shape}")
        if np.any(a < 0) or np.any(a > 1) or not np.all(np.isfinite(a)):
            raise ValueError("admit probabilities must lie in [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "admit", a)

    @property
    def x_max(self) -> int:
        return self.admit.shape[1] - 1

    def sigma(self, i: int) -> np.ndarray:
        return self.admit[i - 1]

    @classmethod
    def constant(cls, x_max: int, p1: float, p2: float | None = None) -> "Policy":
        p2 = p1 if p2 is None else p2
        return cls(np.vstack([np.full(x_max + 1, p1), np.full(x_max + 1, p2)]))

    @classmethod
    def threshold(cls, x_max: int, cut1: int, cut2: int | None = None) -> "Policy":
        """Admit type i exactly at states ``x < cut_i``."""
        cut2 = cut1 if cut2 is None else cut2
        xs = np.arange(x_max + 1)
        return cls(np.vstack([xs < cut1, xs < cut2]).astype(float))


@dataclass(frozen=True)
class TaxSchedule:
    t0: float
    q1: float
    q2: float
    t1: float
    t2: float

    def tax(self, m: int) -> float:
        return self.t1 if m == 1 else self.t2

    def allocation(self, m: int) -> float:
        return self.q1 if m == 1 else self.q2

    def to_dict(self) -> dict:
        return {"t0": self.t0, "q1": self.q1, "q2": self.q2, "t1": self.t1, "t2": self.t2}


def expected_utility_report(i: int, m: int, mu, policy: Policy, taxes: TaxSchedule,
                            reward: RewardFn) -> float:
    """Expected utility of a type-``i`` participant who reports ``m``."""
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    v = reward.evaluate(len(mu) - 1)
    return float(i * np.sum(v * mu * policy.sigma(m)) - taxes.tax(m))


def utility_closed_form(i: int, m: int, taxes: TaxSchedule) -> float:
    """Same utility written through allocations: ``(i-m) q(m) + sum_{j<m} q(j) - t0``."""
    lower = taxes.q1 if m == 2 else 0.0
    return (i - m) * taxes.allocation(m) + lower - taxes.t0
