"""Greedy evaluation over many seeded games and the stepping throughput
benchmark.

Greedy play scores every placement of the current piece by the weighted
afterstate features and picks the best placement that keeps a spare row
above the stack, falling back to the best surviving one (see
kernels.greedy_pick). Games are embarrassingly parallel over a seed list
and bit-reproducible regardless of worker count.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

import numba
import numpy as np

from . import _kernels as K
from .engine import GENERATOR_KINDS


@dataclass
class EvalReport:
    games: int
    mean: float
    std: float
    min: int
    max: int
    generator: str
    height: int
    seconds: float
    truncated: int      # games stopped by the step cap instead of game over
    total_steps: int
    weights_label: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def row(self) -> str:
        return (f"games={self.games} mean={self.mean:.2f} sd={self.std:.2f} "
                f"min={self.min} max={self.max} gen={self.generator} "
                f"height={self.height} truncated={self.truncated} "
                f"secs={self.seconds:.1f}")


def game_seeds(base_seed: int, games: int) -> np.ndarray:
    """Per-game seed list derived from one base seed."""
    return (np.uint64(base_seed) + np.arange(1, games + 1, dtype=np.uint64)).astype(np.int64)


def evaluate(weights, games: int, gen_kind: str = "random", height: int = 10,
             seed: int = 0, max_steps: int = 10 ** 6, workers: int | None = None,
             weights_label: str = "", return_scores: bool = False):
    """Play seeded greedy games and aggregate per-game line counts."""
    if games < 1:
        raise ValueError("games must be >= 1")
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    seeds = game_seeds(seed, games)
    scores = np.zeros(games, dtype=np.int64)
    steps = np.zeros(games, dtype=np.int64)
    finished = np.zeros(games, dtype=np.int64)
    old_threads = numba.get_num_threads()
    if workers is not None:
        numba.set_num_threads(max(1, workers))
    t0 = time.perf_counter()
    try:
        K.greedy_game_many(weights, height, GENERATOR_KINDS[gen_kind], seeds,
                           max_steps, scores, steps, finished)
    finally:
        numba.set_num_threads(old_threads)
    seconds = time.perf_counter() - t0
    report = EvalReport(
        games=games,
        mean=float(scores.mean()),
        std=float(scores.std(ddof=1)) if games > 1 else 0.0,
        min=int(scores.min()),
        max=int(scores.max()),
        generator=gen_kind,
        height=height,
        seconds=seconds,
        truncated=int((finished == 0).sum()),
        total_steps=int(steps.sum()),
        weights_label=weights_label,
    )
    if return_scores:
        return report, scores
    return report


def greedy_run(weights, height: int = 10, gen_kind: str = "random", seed: int = 0,
               max_steps: int = 10 ** 6, check_invariants: bool = False):
    """One greedy game; returns (score, steps, finished, violations)."""
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    score, steps, finished, violations = K.greedy_game(
        weights, height, GENERATOR_KINDS[gen_kind], seed, max_steps,
        1 if check_invariants else 0,
    )
    return int(score), int(steps), bool(finished), int(violations)


@dataclass
class BenchReport:
    steps: int
    seconds: float
    steps_per_second: float
    games: int
    height: int
    with_features: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def row(self) -> str:
        mode = "step+features" if self.with_features else "step"
        return (f"steps={self.steps} secs={self.seconds:.4f} "
                f"steps/sec={self.steps_per_second:.0f} games={self.games} mode={mode}")


def benchmark_throughput(steps: int, seed: int = 0, height: int = 10,
                         gen_kind: str = "random", with_features: bool = False,
                         trace: np.ndarray | None = None) -> BenchReport:
    """Time uniformly random feasible actions, resetting on game over.

    Runs single-threaded; the kernel is warmed before timing so compilation
    is excluded. with_features additionally extracts the full 34-slot
    afterstate feature batch every step, measuring the feature path.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    kind = GENERATOR_KINDS[gen_kind]
    if trace is None:
        trace = np.empty(0, dtype=np.int64)
    if with_features:
        K.random_steps_with_features(height, kind, seed, 1, np.empty(0, dtype=np.int64))
        t0 = time.perf_counter()
        games = K.random_steps_with_features(height, kind, seed, steps, trace)
    else:
        K.random_steps(height, kind, seed, 1, np.empty(0, dtype=np.int64))
        t0 = time.perf_counter()
        games = K.random_steps(height, kind, seed, steps, trace)
    seconds = time.perf_counter() - t0
    return BenchReport(steps, seconds, steps / seconds, int(games), height, with_features)
