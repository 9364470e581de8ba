"""Gamma-distributed message delays."""

from __future__ import annotations

import random
from dataclasses import dataclass


@dataclass(frozen=True)
class DelayModel:
    """Mean delay in microseconds; standard deviation is ``stdev_ratio * mean``.

    The gamma shape is ``1 / stdev_ratio**2`` and the scale ``mean / shape``.
    """

    mean_us: float = 0.0
    stdev_ratio: float = 0.10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mean_us < 0:
            raise ValueError("mean delay must be non-negative")
        if self.stdev_ratio <= 0:
            raise ValueError("stdev_ratio must be positive")

    @property
    def shape(self) -> float:
        return 1.0 / self.stdev_ratio**2

    @property
    def scale(self) -> float:
        return self.mean_us / self.shape

    @classmethod
    def from_config(cls, cfg: dict) -> "DelayModel":
        return cls(
            float(cfg.get("delay_mean_ms", 0.0)) * 1000.0,
            float(cfg.get("delay_stdev_ratio", 0.10)),
            int(cfg.get("seed", 0)),
        )

    def to_config(self) -> dict:
        return {
            "delay_mean_ms": self.mean_us / 1000.0,
            "delay_stdev_ratio": self.stdev_ratio,
            "seed": self.seed,
        }


def sample_delay_raw(model: DelayModel, rng: random.Random) -> float:
    if model.mean_us == 0:
        return 0.0
    return rng.gammavariate(model.shape, model.scale)


def sample_delay(model: DelayModel, rng: random.Random) -> int:
    """One delay draw, rounded to whole microseconds."""
    return int(round(sample_delay_raw(model, rng)))
