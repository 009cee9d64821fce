"""Label-flipping attacks on a training set.

Two scenarios are supported: relabel victims as a single target class
(``ToTarget``), or advance each victim one risk level along the cycle
Low -> Normal -> Medium -> High -> Low (``NextLevel``).
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

import numpy as np

from .data import N_CLASSES, Dataset, RiskLabel
from .rng import substream

log = logging.getLogger(__name__)

_NEXT_LEVEL = np.array([RiskLabel.NORMAL, RiskLabel.MEDIUM, RiskLabel.HIGH, RiskLabel.LOW])


def next_level_map(label: RiskLabel) -> RiskLabel:
    return RiskLabel(int(_NEXT_LEVEL[int(label)]))


@dataclass(frozen=True)
class ToTarget:
    target: RiskLabel = RiskLabel.HIGH

    @property
    def tag(self) -> str:
        return f"to_target_{self.target.name.lower()}"

    def image(self, y):
        return np.full_like(np.asarray(y), int(self.target))

    def eligible(self, y):
        return np.asarray(y) != int(self.target)


@dataclass(frozen=True)
class NextLevel:
    tag = "next_level"

    def image(self, y):
        return _NEXT_LEVEL[np.asarray(y)].astype(np.int64)

    def eligible(self, y):
        return np.ones(np.shape(y), dtype=bool)


def parse_scenario(text):
    """Accept ``next_level``, ``to_target`` (High) or ``to_target_<label>``."""
    if isinstance(text, (ToTarget, NextLevel)):
        return text
    key = str(text).strip().lower().replace("-", "_")
    if key in ("next_level", "nextlevel"):
        return NextLevel()
    if key in ("to_target", "totarget"):
        return ToTarget()
    if key.startswith("to_target_"):
        return ToTarget(RiskLabel.coerce(key[len("to_target_"):]))
    raise ValueError(f"unknown poisoning scenario {text!r}")


@dataclass(frozen=True)
class PoisonSpec:
    scenario: ToTarget | NextLevel
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.rate <= 1.0):
            raise ValueError(f"poison rate must lie in [0, 1], got {self.rate}")


@dataclass
class FlipLog:
    entries: list = field(default_factory=list)  # (index, old_label, new_label)
    requested_count: int = 0
    clamped: bool = False

    @property
    def actual_count(self) -> int:
        return len(self.entries)

    def summary(self, spec: PoisonSpec | None = None) -> dict:
        out = {
            "requested": self.requested_count,
            "actual": self.actual_count,
            "clamped": self.clamped,
        }
        if spec is not None:
            out.update(scenario=spec.scenario.tag, rate=spec.rate, seed=spec.seed)
        return out

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "old_label", "new_label"])
            for i, old, new in self.entries:
                w.writerow([i, RiskLabel(old).text, RiskLabel(new).text])

    def write_json(self, path, spec: PoisonSpec | None = None) -> None:
        Path(path).write_text(json.dumps(self.summary(spec), indent=2) + "\n", encoding="utf-8")


def requested_flips(rate: float, n: int) -> int:
    # decimal repr avoids 0.29 * 100 -> 28.999... flooring to 28
    return math.floor(Decimal(repr(float(rate))) * n)


def victim_ranking(n: int, seed: int) -> np.ndarray:
    """Random order over training indices; victims at any rate are a prefix of it."""
    return substream(seed, "poison").permutation(n)


def plan_flips(train: Dataset | np.ndarray, spec: PoisonSpec):
    """Choose victims; returns ``(victim_indices, FlipLog)`` with the log entries filled."""
    y = train.y if isinstance(train, Dataset) else np.asarray(train, dtype=np.int64)
    n = y.shape[0]
    requested = requested_flips(spec.rate, n)
    ranking = victim_ranking(n, spec.seed)
    pool = ranking[spec.scenario.eligible(y)[ranking]]
    clamped = requested > pool.size
    if clamped:
        log.warning(
            "poison budget %d exceeds eligible pool %d (%s); flipping the whole pool",
            requested, pool.size, spec.scenario.tag,
        )
    victims = pool[: min(requested, pool.size)]
    new = spec.scenario.image(y[victims])
    entries = [(int(i), int(o), int(v)) for i, o, v in zip(victims, y[victims], new)]
    return victims, FlipLog(entries, requested, bool(clamped))


def apply_poison(train: Dataset, spec: PoisonSpec):
    """Return ``(poisoned copy, FlipLog)``; only victim labels change."""
    victims, flog = plan_flips(train, spec)
    if not victims.size:
        return train, flog
    y = train.y.copy()
    y[victims] = spec.scenario.image(y[victims])
    assert np.all(y < N_CLASSES)
    return train.with_labels(y), flog
