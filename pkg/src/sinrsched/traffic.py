"""Stochastic arrivals and queue dynamics.

Queues evolve as q(t+1) = max(0, q(t) - s(t)) + a(t+1): each active link
serves one packet per slot, arrivals land afterwards. Arrivals are
per-link independent Poisson draws truncated at a configurable cap, which
keeps them bounded without noticeably distorting the distribution at
simulated rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .interference import Schedule

__all__ = [
    "QueueState",
    "ArrivalConfig",
    "sample_arrivals",
    "update_queues",
    "total_backlog",
    "backlog_slope",
    "initial_queues",
]


@dataclass(frozen=True)
class QueueState:
    """Per-link nonnegative integer backlogs."""

    q: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.q, dtype=np.int64)
        if arr.ndim != 1:
            raise ConfigError("queue state must be a flat vector")
        if (arr < 0).any():
            raise ConfigError("queue lengths must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "q", arr)

    def __len__(self) -> int:
        return len(self.q)

    def weight(self, link_id: int) -> int:
        return int(self.q[link_id])


@dataclass(frozen=True)
class ArrivalConfig:
    lam: float
    a_max: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ConfigError(f"arrival rate must be nonnegative, got {self.lam}")
        if self.a_max < 1:
            raise ConfigError(f"arrival cap must be >= 1, got {self.a_max}")


def sample_arrivals(
    cfg: ArrivalConfig, rng: np.random.Generator, n_links: int
) -> np.ndarray:
    """One slot of arrivals: Poisson(lam) per link, truncated at the cap."""
    return np.minimum(rng.poisson(cfg.lam, n_links), cfg.a_max).astype(np.int64)


def update_queues(q: QueueState, s: Schedule, a: np.ndarray) -> QueueState:
    """Serve one packet on each active link, then add the arrivals."""
    arrivals = np.asarray(a, dtype=np.int64)
    if len(arrivals) != len(q):
        raise ConfigError("arrival vector length must match the queue vector")
    served = np.zeros(len(q), dtype=np.int64)
    if len(s):
        served[np.fromiter(s, dtype=int)] = 1
    return QueueState(np.maximum(0, q.q - served) + arrivals)


def total_backlog(q: QueueState) -> int:
    return int(q.q.sum())


def backlog_slope(series: Sequence[float], window: int) -> float:
    """Least-squares trend (packets/slot) of the trailing ``window`` samples."""
    if window < 2:
        raise ConfigError(f"slope window must be >= 2 samples, got {window}")
    tail = np.asarray(series[-window:], dtype=float)
    if len(tail) < 2:
        raise ConfigError("series too short for the requested window")
    x = np.arange(len(tail), dtype=float)
    return float(np.polyfit(x, tail, 1)[0])


def initial_queues(
    rng: np.random.Generator, n_links: int, lo: int = 100, hi: int = 300
) -> QueueState:
    """Independent uniform integer backlogs in [lo, hi] per link."""
    return QueueState(rng.integers(lo, hi + 1, n_links))
