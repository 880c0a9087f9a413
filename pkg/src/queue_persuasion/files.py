"""Flat-file artifacts: ``summary.json`` and ``policy.csv``."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ModelConfig, Policy, TaxSchedule
from .stationary import StationaryDist, expected_reward

POLICY_HEADER = ["x", "v_x", "sigma_1", "sigma_2", "mu"]
SUMMARY_FILE = "summary.json"
POLICY_FILE = "policy.csv"


class MissingArtifactError(FileNotFoundError):
    pass


def write_policy_csv(path: str | Path, v, policy: Policy, mu) -> None:
    mu = np.asarray(getattr(mu, "mu", mu), dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(POLICY_HEADER)
        for x in range(len(mu)):
            w.writerow([x, repr(float(v[x])), repr(float(policy.admit[0, x])),
                        repr(float(policy.admit[1, x])), repr(float(mu[x]))])


def read_policy_csv(path: str | Path) -> tuple[np.ndarray, Policy, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != POLICY_HEADER:
            raise ValueError(f"{path}: expected header {','.join(POLICY_HEADER)}")
        rows = [list(map(float, r)) for r in reader if r]
    data = np.array(rows).reshape(-1, 5)
    if not np.array_equal(data[:, 0], np.arange(len(data))):
        raise ValueError(f"{path}: states must run 0, 1, 2, ... without gaps")
    return data[:, 1], Policy(data[:, 2:4].T), data[:, 4]


def write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class LoadedSolution:
    """A solution reconstructed from a solve directory alone."""

    config: ModelConfig
    policy: Policy
    mu: StationaryDist
    taxes: TaxSchedule
    rewards: np.ndarray
    summary: dict


def load_solution_dir(directory: str | Path) -> LoadedSolution:
    directory = Path(directory)
    summary_path, policy_path = directory / SUMMARY_FILE, directory / POLICY_FILE
    for p in (summary_path, policy_path):
        if not p.is_file():
            raise MissingArtifactError(f"missing {p}")
    summary = json.loads(summary_path.read_text())
    config = ModelConfig.from_dict(summary["config"])
    v, policy, mu = read_policy_csv(policy_path)
    if len(mu) != config.x_max + 1:
        raise ValueError(f"policy.csv has {len(mu)} states, config expects {config.x_max + 1}")
    t = summary["taxes"]
    taxes = TaxSchedule(t0=t["t0"], q1=t["q1"], q2=t["q2"], t1=t["t1"], t2=t["t2"])
    dist = StationaryDist(mu=mu, tail_mass=float(mu[-1]),
                          vbar=expected_reward(mu, config.reward))
    return LoadedSolution(config, policy, dist, taxes, v, summary)
