"""Gym-style wrapper over the bittetris engine.

The environment speaks plain integer sequences: game states travel as the
15-slot signed-32-bit array (columns 0-9, reward, score, current piece,
drop height, cleared-row mask), features as 306 floats plus a 34-flag
mask, and policies as 9 floats. One wrapper owns exactly one engine
instance; step() validates the caller's state array against the engine's
before advancing so a desynchronized caller fails loudly instead of
silently diverging.
"""
from __future__ import annotations

import numpy as np

from bittetris.engine import GameState, TetrisGame
from bittetris.evaluate import evaluate
from bittetris.features import afterstate_batch

__version__ = "0.1.0"

STATE_SIZE = 15
FEATURE_PAYLOAD = 306
MASK_SIZE = 34


class Tetris:
    """A single game instance behind the five-call API.

    reset() -> state; isFinal(state) -> bool; step(state, a) -> (state,
    reward, done); get_9feature(state) -> (306 floats, 34 mask flags);
    parallel_episode(weights) -> mean score over many games.
    """

    def __init__(self, height: int = 10, gen: str = "random", seed: int = 0):
        self._game = TetrisGame(height=height, gen=gen, seed=seed)
        self.height = height
        self.gen = gen
        self.seed = seed
        self._closed = False

    # -- lifecycle ---------------------------------------------------------
    def close(self) -> None:
        self._game = None
        self._closed = True

    def _require_open(self):
        if self._closed:
            raise RuntimeError("environment is closed")

    def _validate(self, state) -> GameState:
        arr = np.asarray(state, dtype=np.int64)
        if arr.shape != (STATE_SIZE,):
            raise ValueError(f"state must be exactly {STATE_SIZE} integers")
        return GameState(arr.copy(), self.height)

    # -- the five calls ----------------------------------------------------
    def reset(self) -> list[int]:
        self._require_open()
        return self._game.reset().to_ints()

    def isFinal(self, state) -> bool:
        """Game over, derived from the state array alone."""
        self._require_open()
        parsed = self._validate(state)
        band = 0xF << self.height
        return any(c & band for c in parsed.board.columns)

    def step(self, state, action: int) -> tuple[list[int], int, bool]:
        self._require_open()
        parsed = self._validate(state)
        if not np.array_equal(parsed.slots, self._game.state.slots):
            raise ValueError(
                "state array does not match this environment's current state; "
                "step() must be driven from the latest returned state"
            )
        nxt, reward, done = self._game.step(int(action))
        return nxt.to_ints(), reward, done

    def get_9feature(self, state) -> tuple[list[float], list[int]]:
        """Afterstate features for up to 34 successor placements, plus mask."""
        self._require_open()
        parsed = self._validate(state)
        if not 0 <= parsed.piece <= 6:
            raise ValueError(f"piece slot {parsed.piece} outside 0..6")
        batch = afterstate_batch(parsed)
        return batch.flat().tolist(), batch.mask.astype(int).tolist()

    def parallel_episode(self, weights, games: int = 10_000, seed: int = 0,
                         workers: int | None = None) -> float:
        """Mean score of seeded greedy games under 9 linear feature weights."""
        self._require_open()
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (9,):
            raise ValueError("weights must be exactly 9 numbers")
        report = evaluate(w, games=games, gen_kind=self.gen, height=self.height,
                          seed=seed, workers=workers)
        return report.mean
