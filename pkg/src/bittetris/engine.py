"""Board, game state, piece generators, and the placement-level game step.

The playfield is 10 columns of 32-bit words (bit k = row k from the bottom)
on a board of height 10 or 20. A step places the current piece at a decoded
(rotation, column), clears full rows, and draws the next piece.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .pieces import (
    ACTION_SIZE,
    BOARD_WIDTH,
    PIECES,
    PieceShape,
    decode_action,
    legal_action_count,
)

GENERATOR_KINDS = {"random": K.GEN_RANDOM, "bag7": K.GEN_BAG7, "sz": K.GEN_ADVERSARIAL_SZ}

SLOT_REWARD = 10
SLOT_SCORE = 11
SLOT_PIECE = 12
SLOT_DROP_HEIGHT = 13
SLOT_DELETE_LINE = 14


def column_top_index(word: int) -> int:
    """Index of the highest set bit of a column word; 0 for an empty column."""
    return int(K.top_index(np.int64(word)))


def fill_below_highest(word: int) -> int:
    """Set every bit from the highest set bit down to bit 0."""
    return int(K.fill_below(np.int64(word)))


@dataclass(frozen=True)
class Board:
    """Ten column words plus the playfield height."""

    columns: tuple[int, ...]
    height: int = 10

    def __post_init__(self):
        if len(self.columns) != BOARD_WIDTH:
            raise ValueError("a board has exactly 10 columns")
        if self.height not in (10, 20):
            raise ValueError("board height must be 10 or 20")

    @classmethod
    def empty(cls, height: int = 10) -> "Board":
        return cls((0,) * BOARD_WIDTH, height)

    def as_array(self) -> np.ndarray:
        return np.array(self.columns, dtype=np.int64)

    def cell(self, column: int, row: int) -> bool:
        return bool((self.columns[column] >> row) & 1)

    def popcount(self) -> int:
        return sum(int(c).bit_count() for c in self.columns)


def delete_line_mask(board: Board) -> int:
    """Bitmask of rows full across all ten columns."""
    return int(K.delete_mask(board.as_array()))


def clear_lines(board: Board) -> tuple[Board, int]:
    cols = board.as_array()
    lines = int(K.clear_rows(cols))
    return Board(tuple(int(c) for c in cols), board.height), lines


def is_game_over(board: Board) -> bool:
    """True when any column has a block in the 4-row band above the playfield."""
    return bool(K.game_over(board.as_array(), board.height))


def drop(board: Board, shape: PieceShape, column: int) -> tuple[Board, int]:
    """Place a shape at the smallest non-overlapping offset in the given column.

    Returns the board with the shape OR-ed in and the resting row of the
    shape's bottom.
    """
    if not 0 <= column <= BOARD_WIDTH - shape.width:
        raise ValueError(f"column {column} out of range for width {shape.width}")
    cols = board.as_array()
    pattern = np.array(shape.cols, dtype=np.int64)
    d = int(K.drop_offset_pattern(cols, pattern, shape.width, column))
    for i, c in enumerate(shape.cols):
        cols[column + i] |= c << d
    return Board(tuple(int(c) for c in cols), board.height), d


class PieceGenerator:
    """Seedable piece stream: i.i.d. uniform, 7-bag, or alternating S/Z."""

    def __init__(self, kind: str = "random", seed: int = 0):
        if kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {kind!r}")
        self.kind = kind
        self.seed = seed
        self.state = np.zeros(10, dtype=np.uint64)
        self.state[0] = GENERATOR_KINDS[kind]
        self.state[1] = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    def next(self) -> int:
        return int(K.gen_next(self.state))


@dataclass
class GameState:
    """The 15-slot integer record: columns, reward, score, piece, drop data."""

    slots: np.ndarray
    height: int = 10

    @classmethod
    def zeros(cls, height: int = 10) -> "GameState":
        return cls(np.zeros(15, dtype=np.int64), height)

    @property
    def board(self) -> Board:
        return Board(tuple(int(c) for c in self.slots[:10]), self.height)

    @property
    def reward(self) -> int:
        return int(self.slots[SLOT_REWARD])

    @property
    def score(self) -> int:
        return int(self.slots[SLOT_SCORE])

    @property
    def piece(self) -> int:
        return int(self.slots[SLOT_PIECE])

    @property
    def drop_height(self) -> int:
        return int(self.slots[SLOT_DROP_HEIGHT])

    @property
    def delete_line(self) -> int:
        return int(self.slots[SLOT_DELETE_LINE])

    def copy(self) -> "GameState":
        return GameState(self.slots.copy(), self.height)

    def to_ints(self) -> list[int]:
        """Wire format: the 15 slots as signed 32-bit integers."""
        return [int(x) for x in self.slots.astype(np.int32)]

    @classmethod
    def from_ints(cls, values, height: int = 10) -> "GameState":
        arr = np.asarray(values, dtype=np.int64)
        if arr.shape != (15,):
            raise ValueError("a game state is exactly 15 integers")
        return cls(arr.copy(), height)


def reset(gen: PieceGenerator, height: int = 10) -> GameState:
    state = GameState.zeros(height)
    K.reset_state(state.slots, gen.state)
    return state


def apply_action(
    state: GameState, action: int, gen: PieceGenerator
) -> tuple[GameState, int, bool]:
    """Decode and play one action; returns (next state, reward, done).

    Raises on an action index outside the current piece's feasible range.
    """
    n = legal_action_count(state.piece)
    if not 0 <= action < n:
        raise ValueError(
            f"action {action} out of range for piece {PIECES[state.piece].name} "
            f"(feasible range 0..{n - 1})"
        )
    nxt = state.copy()
    reward, done = K.apply_action(nxt.slots, nxt.height, action, gen.state)
    return nxt, int(reward), bool(done)


class TetrisGame:
    """A single game: one state plus one generator, stepped action by action."""

    def __init__(self, height: int = 10, gen: str = "random", seed: int = 0):
        self.generator = PieceGenerator(gen, seed)
        self.height = height
        self.state = reset(self.generator, height)
        self.done = False

    def reset(self) -> GameState:
        self.state = reset(self.generator, self.height)
        self.done = False
        return self.state

    def step(self, action: int) -> tuple[GameState, int, bool]:
        if self.done:
            raise RuntimeError("game is over; call reset()")
        self.state, reward, self.done = apply_action(self.state, action, self.generator)
        return self.state, reward, self.done

    @property
    def action_count(self) -> int:
        return int(ACTION_SIZE[self.state.piece])


def decode(piece: int, action: int) -> tuple[int, int]:
    return decode_action(piece, action)
